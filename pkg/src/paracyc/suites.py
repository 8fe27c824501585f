"""Verification suites behind the command-line jobs."""
from __future__ import annotations

from .algebras import GAlgebra, unitarize
from .cq import cq_suite
from .dualgj import dual_greenjulg_suite
from .errors import LevelTooHigh, NotBalanced, NoWitness
from .forms import FormSpace
from .greenjulg import greenjulg_suite
from .homotopy import constant_homotopy, homotopy_suite, nabla_retraction, unipotent_conjugation
from .hp import greenjulg_compare, hp_ordinary, hpg_second_variable
from .linalg import SparseMatrix
from .perturbation import boxtimes, make_special_retraction, perturb, perturb_checks, perturb_lemma_check
from .report import Suite
from .stability import kg_pairing, stability_suite
from .tower import hodge_level, rescale_delta, x_boundary_on_tower, x_complex

ANCHORS = {
    "d^2 = 0": "d^2 = 0",
    "b^2 = 0": "b^2 = 0",
    "B^2 = 0": "B^2 = 0",
    "Bb + bB = id - T": "Bb + bB = id - T",
    "a) kappa^(n+1) d = T d": "kappa^{n+1} d = T d",
    "b) kappa^n = T + b kappa^n d": "kappa^n = T + b kappa^n d",
    "c) b kappa^n = b T": "b kappa^n = b T",
    "d) kappa^(n+1) = (id - db) T": "kappa^{n+1} = (id - db) T",
    "e) (kappa^(n+1) - T)(kappa^n - T) = 0": "(kappa^{n+1} - T)(kappa^n - T) = 0",
    "kappa d = d kappa": "kappa d = d kappa",
    "kappa b = b kappa": "kappa b = b kappa",
    "[d, T] = 0": "T commutes with d",
    "[kappa, T] = 0": "T commutes with kappa",
    "[b, T] = 0": "T commutes with b",
    "[B, T] = 0": "T commutes with B",
}

# Hodge levels whose paracomplex contract is checked in verify-forms.
CONTRACT_LEVEL_CAP = 4


def _add_records(suite: Suite, records, anchor_of=ANCHORS.get, default_anchor: str = ""):
    for name, deg, ok, wit in records:
        suite.add(name, anchor_of(name) or default_anchor, ok, deg, wit)


def forms_suite(A: GAlgebra, N: int, suite: Suite | None = None) -> Suite:
    """The paramixed identities, the kappa relations, covariance and the two routes to b."""
    from .tower import covariance_checks, karoubi_lemma_checks, paramixed_checks

    suite = suite or Suite(f"forms {A.name} over {A.group.name}, level {N}")
    with suite.timed("build"):
        fs = FormSpace(A, N)
    with suite.timed("paramixed"):
        _add_records(suite, paramixed_checks(fs))
    with suite.timed("kappa relations"):
        _add_records(suite, karoubi_lemma_checks(fs))
    with suite.timed("covariance"):
        _add_records(suite, covariance_checks(fs), default_anchor="operators commute with the G- and O_G-actions")
    with suite.timed("b routes"):
        for n in range(1, N + 1):
            diff = fs.b(n) - fs.b_formula(n)
            suite.add("b: tensor route = Leibniz route", "b(w dx) = (-1)^n (w x - (s^-1 x) w)", diff.is_zero(), n,
                      None if diff.is_zero() else {"first_nonzero": str(diff.first_nonzero())})
    suite.data["dimensions"] = [{"degree": n, "dim": fs.dim(n)} for n in range(N + 1)]
    return suite


def _contract(suite: Suite, pc, label: str):
    for nm, ok, wit in pc.check():
        suite.add(f"{label}: {nm}", "partial^2 = id - T, T partial = partial T", ok, pc.info.get("level"), wit)
    cov = pc.check_covariance()
    if cov:
        suite.add(f"{label}: covariant boundary", "boundary commutes with the G- and O_G-actions",
                  all(ok for _, ok, _ in cov), pc.info.get("level"),
                  next((w for _, ok, w in cov if not ok), None))


def paracomplex_suite(A: GAlgebra, N: int, suite: Suite | None = None) -> Suite:
    """Paracomplex contracts of the Hodge levels, X_G, the X-boundary towers, the rescaled
    boundary and the box product of X_G with itself."""
    suite = suite or Suite(f"paracomplexes {A.name} over {A.group.name}")
    top = min(N - 1, CONTRACT_LEVEL_CAP)
    fs = FormSpace(A, top + 1)
    with suite.timed("hodge levels"):
        for n in range(top + 1):
            _contract(suite, hodge_level(fs, n), f"theta^{n}")
    with suite.timed("X-boundary"):
        for n in range(1, top + 1):
            _contract(suite, x_boundary_on_tower(fs, n), f"theta^{n} with the X_G(TA) boundary")
    with suite.timed("rescaled"):
        for n in range(top + 1):
            _contract(suite, rescale_delta(fs, n), f"theta^{n} with the rescaled boundary")
    X = x_complex(A)
    _contract(suite, X, "X_G")
    with suite.timed("boxtimes"):
        try:
            _contract(suite, boxtimes(X, X), "X_G boxtimes X_G")
        except NotBalanced as exc:
            suite.notes.append(f"box product skipped: {exc}")
    return suite


def verify_forms_job(A: GAlgebra, N: int) -> list[Suite]:
    return [forms_suite(A, N), paracomplex_suite(A, N)]


def verify_cq_job(A: GAlgebra, N: int) -> list[Suite]:
    suite = Suite(f"Cuntz-Quillen {A.name} over {A.group.name}, level {N}")
    if N < 4:
        suite.notes.append(f"level {N}: identities of higher arity have an empty interior-degree range")
    return [cq_suite(FormSpace(A, N), suite)]


def _unital(A: GAlgebra, suite: Suite) -> GAlgebra:
    if A.unit is not None:
        return A
    suite.notes.append(f"{A.name} has no unit; using its unitarization")
    return unitarize(A)


def greenjulg_job(A: GAlgebra, N: int) -> list[Suite]:
    suite = Suite(f"Green-Julg {A.name} over {A.group.name}")
    return [greenjulg_suite(_unital(A, suite), suite)]


def dual_greenjulg_job(A: GAlgebra, N: int) -> list[Suite]:
    suite = Suite(f"dual Green-Julg {A.name} over {A.group.name}, level {N}")
    return [dual_greenjulg_suite(_unital(A, suite), N, suite, morita=True)]


def _compare_suite(A: GAlgebra, N: int) -> Suite:
    suite = Suite(f"Green-Julg comparison {A.name} over {A.group.name}")
    try:
        c = greenjulg_compare(A, N)
    except LevelTooHigh as exc:
        suite.notes.append(f"comparison skipped: {exc}")
        return suite
    left, right = c.pop("_reports")
    suite.add("HP^G(R) = HP(R x| G) at truncation", "HP^G_*(C, A) = HP_*(A x| G)", c["equal"], N,
              None if c["equal"] else {"hpg": list(left.final), "hp_crossed": list(right.final)})
    suite.add("dim X_G(R)^G = dim X(R x| G)_H", "X_G(R)^G = X(R x| G)_H", c["chain_level_equal"], None,
              None if c["chain_level_equal"] else c["chain_level"])
    suite.data["comparison"] = [{"group": c["group"], "algebra": c["algebra"], "level": N,
                                 "hpg_even": left.final[0], "hpg_odd": left.final[1],
                                 "hp_crossed_even": right.final[0], "hp_crossed_odd": right.final[1],
                                 "both_stabilized": c["both_stabilized"]}]
    return suite


def hpg_job(A: GAlgebra, N: int) -> list[Suite]:
    rep = hpg_second_variable(A, N)
    suite = rep.to_suite(Suite(f"HP^G {A.name} over {A.group.name}, level {N}"))
    suite.data["result"] = [rep.as_dict()]
    if not rep.stabilized:
        suite.notes.append("the stable images at the two levels differ: not stabilized")
    return [suite, _compare_suite(A, N)]


def hp_job(A: GAlgebra, N: int) -> list[Suite]:
    rep = hp_ordinary(A, N)
    suite = rep.to_suite(Suite(f"HP {A.name}, level {N}"))
    suite.data["result"] = [rep.as_dict()]
    if not rep.stabilized:
        suite.notes.append("the stable images at the two levels differ: not stabilized")
    return [suite]


def stability_job(A: GAlgebra, N: int) -> list[Suite]:
    return [stability_suite(A, kg_pairing(A.group))]


def homotopy_job(A: GAlgebra, N: int) -> list[Suite]:
    """Constant homotopy on A, and a unipotent conjugation when A has a unit and a nonzero
    invariant element of square zero among its basis vectors."""
    out = [homotopy_suite(constant_homotopy(A, A, SparseMatrix.identity(A.dim)),
                          Suite(f"homotopy invariance, constant homotopy on {A.name}"))]
    if A.unit is not None:
        for j in range(A.dim):
            if A.mult[j][j] or any(A.act[s][j] != {j: 1} for s in range(A.group.order)):
                continue
            phi = unipotent_conjugation(A, {j: 1})
            if not phi.problems():
                out.append(homotopy_suite(phi, Suite(f"homotopy invariance, conjugation by exp(t {A.labels[j]})")))
                break
    return out


def perturbation_job(A: GAlgebra, N: int) -> list[Suite]:
    """The nabla-retraction of theta^N onto theta^1 and its perturbation."""
    suite = Suite(f"perturbation {A.name} over {A.group.name}, level {N}")
    try:
        r, idem = nabla_retraction(A, 1, N)
    except NoWitness as exc:
        suite.notes.append(str(exc))
        return [suite]
    for nm, ok, wit in idem:
        suite.add(nm, "[b, nabla_G] is the projection onto the complement", ok, None, wit)
    for nm, ok, wit in r.checks():
        suite.add(nm, "deformation retraction for b", ok, None, wit)
    sr, inter = make_special_retraction(r)
    for nm, ok, wit in inter + sr.special_checks():
        suite.add(nm, "special deformation retraction", ok, None, wit)
    pt = perturb(sr)
    for nm, ok, wit in perturb_checks(sr, pt):
        suite.add(nm, "PI = id, IP = id + [H, B + b]", ok, None, wit)
    for nm, j, ok, wit in perturb_lemma_check(sr, 4):
        suite.add(nm, "[(lB)^j i, b] = -[(lB)^(j-1) i, B]", ok, j, wit)
    suite.data["perturbation"] = [{"level": N, "nilpotency_index": pt.index, "dim_C": r.i.shape[0],
                                   "dim_D": r.i.shape[1]}]
    return [suite]


JOBS = {
    "verify-forms": verify_forms_job,
    "verify-cq": verify_cq_job,
    "greenjulg": greenjulg_job,
    "dual-greenjulg": dual_greenjulg_job,
    "hpg": hpg_job,
    "hp": hp_job,
    "stability": stability_job,
    "homotopy": homotopy_job,
    "perturbation": perturbation_job,
}

DEFAULT_LEVEL = {"verify-forms": 5, "verify-cq": 6, "greenjulg": 2, "dual-greenjulg": 3, "hpg": 6, "hp": 6,
                 "stability": 2, "homotopy": 3, "perturbation": 5}
