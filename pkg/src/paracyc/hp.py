"""Homology numbers: invariant Hodge towers, covariant Hom-complexes and the Green-Julg comparison."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from gmpy2 import mpq

from .algebras import GAlgebra, crossed_product, forget_action, unitarize
from .errors import ContractViolation, GroupMismatch, LevelTooHigh, Mismatch, NotAComplex
from .forms import FormSpace
from .graded import GOp, ParaComplex, witness
from .groups import COUNTING
from .linalg import (SparseMatrix, block_matrix, hstack, image_basis, intertwiner_space, kernel_basis, rank, solve,
                     supercomplex_homology, unvec)
from .report import Suite
from .tower import HodgeLevel, _ops, hodge_level, level_map, tower_boundary

_ONE = mpq(1)

# Largest form space (columns of Omega^{N+1}) a homology job may build.
MAX_FORM_DIM = 100_000

REDUCTION_NOTES = (
    "K_G-stabilization is dropped: for a finite group the trivial representation is a summand of the "
    "regular one, so both definitions agree",
    "the pro-object X_G(T.) is replaced by the Hodge tower theta^N Omega_G(.); dimensions are read at the "
    "stated levels and agreement of the stable images at levels N-4 and N-2 is the convergence certificate",
)


@dataclass
class HomologyReport:
    """(dim H_even, dim H_odd) per truncation level, with a stabilization flag."""

    kind: str
    inputs: dict
    levels: list = field(default_factory=list)
    dims: list = field(default_factory=list)
    raw: dict = field(default_factory=dict)  # level -> homology of that single level
    checks: list = field(default_factory=list)  # (name, anchor, ok, level)
    notes: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def stabilized(self) -> bool:
        return len(self.dims) >= 2 and self.dims[-1] == self.dims[-2]

    @property
    def final(self) -> tuple[int, int]:
        return self.dims[-1]

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "inputs": self.inputs,
            "levels": [{"level": n, "even": e, "odd": o} for n, (e, o) in zip(self.levels, self.dims)],
            "raw": [{"level": n, "even": e, "odd": o} for n, (e, o) in sorted(self.raw.items())],
            "stabilized": self.stabilized,
            "read_at_level": self.levels[-1] if self.levels else None,
            "notes": list(self.notes),
        }

    def to_suite(self, suite: Suite | None = None) -> Suite:
        suite = suite or Suite(f"{self.kind} {self.inputs.get('algebra', '')}".strip())
        for name, anchor, ok, lvl in self.checks:
            suite.add(name, anchor, ok, lvl)
        suite.data.setdefault("homology", []).extend(
            dict(kind=self.kind, level=n, even=e, odd=o, **self.inputs) for n, (e, o) in zip(self.levels, self.dims))
        suite.data.setdefault("stabilization", []).append(
            {"kind": self.kind, "stabilized": self.stabilized, "read_at_level": self.levels[-1], **self.inputs})
        suite.notes.extend(n for n in self.notes if n not in suite.notes)
        suite.timings.update(self.timings)
        return suite


def _levels(N: int) -> list[int]:
    """Levels whose stable images are reported: N-4 (when defined) and N-2."""
    if N < 2:
        raise LevelTooHigh("homology needs a level N >= 2")
    return [n for n in (N - 4, N - 2) if n >= 0]


def _form_space(A: GAlgebra, n: int) -> FormSpace:
    fs = FormSpace(A, n + 1)
    if fs.dim(n + 1) > MAX_FORM_DIM:
        raise LevelTooHigh(f"level {n} of {A.name} needs {fs.dim(n + 1)} forms in degree {n + 1} "
                           f"(limit {MAX_FORM_DIM})")
    return fs


def _is_identity(m: SparseMatrix) -> bool:
    return m == SparseMatrix.identity(m.shape[0])


def _restrict(m: SparseMatrix, src: SparseMatrix, tgt: SparseMatrix) -> SparseMatrix:
    x = solve(tgt, m @ src)
    if x is None:
        raise ContractViolation("subspace is not preserved")
    return x


def invariant_part(pc: ParaComplex) -> tuple[ParaComplex, tuple[SparseMatrix, SparseMatrix]]:
    """The invariant subcomplex and its bases (averaged vectors), idempotency of averaging asserted."""
    bases = []
    for p in (0, 1):
        P = pc.averaging(p)
        if not (P @ P == P):
            raise ContractViolation("averaging operator is not idempotent")
        bases.append(image_basis(P))
    V0, V1 = bases
    inv = ParaComplex(_restrict(pc.d0, V0, V1), _restrict(pc.d1, V1, V0),
                      _restrict(pc.T0, V0, V0), _restrict(pc.T1, V1, V1), name=f"{pc.name}^G")
    return inv, (V0, V1)


def induced_rank(C: ParaComplex, D: ParaComplex, f: tuple[SparseMatrix, SparseMatrix]) -> tuple[int, int]:
    """Rank of the map H(C) -> H(D) induced by the parity-preserving chain map f = (f0, f1)."""
    out = []
    for p in (0, 1):
        dC = C.d0 if p == 0 else C.d1
        dD_in = D.d1 if p == 0 else D.d0
        Z = kernel_basis(dC)
        r = rank(dD_in)
        out.append(rank(hstack([f[p] @ Z, dD_in])) - r)
    return tuple(out)


def tower_projection(hi: HodgeLevel, lo: HodgeLevel) -> tuple[SparseMatrix, SparseMatrix]:
    """theta^m -> theta^n (n < m): identity below n, projection onto Omega^n / b in degree n."""
    ident = GOp.identity({k: hi.fs.dim(k) for k in range(hi.fs.N + 1)}, range(hi.n + 1))
    return tuple(level_map(ident, hi, lo, p, p) for p in (0, 1))


def invariant_tower_homology(A: GAlgebra, N: int, kind: str = "hpg") -> HomologyReport:
    """H of the G-invariant part of the Hodge tower of A.

    Raw homology of a single level carries classes in the top degree that do
    not lift to the next level, so the reported dimensions are the stable
    images H(theta^(n+2)) -> H(theta^n) for n = N-4, N-2."""
    rep = HomologyReport(kind, {"group": A.group.name, "algebra": A.name, "N": N}, notes=list(REDUCTION_NOTES))
    rep.notes.append("dimensions are images of H(theta^(n+2)) in H(theta^n); raw level homology is in 'raw'")
    t = time.perf_counter()
    fs = _form_space(A, N)
    ops = _ops(fs)
    lv, inv, bases = {}, {}, {}
    for n in sorted({k for m in _levels(N) for k in (m, m + 2)}):
        lv[n] = HodgeLevel(fs, n)
        pc = lv[n].paracomplex(tower_boundary(fs, n), ops.T, f"theta^{n}")
        inv[n], bases[n] = invariant_part(pc)
        I = inv[n]
        t_id = _is_identity(I.T0) and _is_identity(I.T1)
        rep.checks.append(("T = id on invariants", "T = id on Omega_G(A)^G", t_id, n))
        sq = (I.d1 @ I.d0).is_zero() and (I.d0 @ I.d1).is_zero()
        rep.checks.append(("boundary squares to zero on invariants", "T = id gives a Z/2-graded complex", sq, n))
        if not sq:
            raise NotAComplex(f"invariant boundary does not square to zero at level {n}")
        rep.raw[n] = supercomplex_homology(I.d0, I.d1)
    rep.timings["levels"] = round(time.perf_counter() - t, 4)
    for n in _levels(N):
        pr = tower_projection(lv[n + 2], lv[n])
        f = tuple(_restrict(pr[p], bases[n + 2][p], bases[n][p]) for p in (0, 1))
        rep.levels.append(n)
        rep.dims.append(induced_rank(inv[n + 2], inv[n], f))
    rep.timings["total"] = round(time.perf_counter() - t, 4)
    return rep


def hpg_second_variable(A: GAlgebra, N: int) -> HomologyReport:
    """Equivariant periodic cyclic homology of A read from the invariant Hodge towers."""
    return invariant_tower_homology(A, N, "hpg")


def hp_ordinary(B: GAlgebra, N: int) -> HomologyReport:
    """Ordinary periodic cyclic homology at truncation: the trivial-group tower of B."""
    rep = invariant_tower_homology(forget_action(B), N, "hp")
    rep.inputs = {"group": "trivial", "algebra": B.name, "N": N}
    return rep


# ---------------------------------------------------------------------------
# covariant Hom-complexes


def _blockdiag(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    return block_matrix([[a, None], [None, b]], [a.shape[0], b.shape[0]], [a.shape[1], b.shape[1]])


def total_boundary(C: ParaComplex) -> SparseMatrix:
    """The boundary of C as one odd matrix on C0 + C1."""
    ne, no = C.dims
    return block_matrix([[None, C.d1], [C.d0, None]], [ne, no], [ne, no])


def total_symmetry(C: ParaComplex) -> SparseMatrix:
    return _blockdiag(C.T0, C.T1)


def _parity(C: ParaComplex, flip: bool = False) -> SparseMatrix:
    ne, no = C.dims
    return SparseMatrix.diagonal([mpq(int(flip))] * ne + [mpq(int(not flip))] * no)


def covariance_constraints(C: ParaComplex, D: ParaComplex) -> list[tuple[SparseMatrix, SparseMatrix]]:
    """(L, R) pairs with L X = X R expressing G- and O_G-covariance of X: C -> D."""
    out = []
    for cs, ds in ((("act0", "act1"), ("act0", "act1")), (("og0", "og1"), ("og0", "og1"))):
        ca0, ca1 = getattr(C, cs[0]), getattr(C, cs[1])
        da0, da1 = getattr(D, ds[0]), getattr(D, ds[1])
        if ca0 is None or da0 is None:
            continue
        if len(ca0) != len(da0):
            raise GroupMismatch("source and target carry actions of different groups")
        out += [(_blockdiag(a, b), _blockdiag(c, e)) for a, b, c, e in zip(da0, da1, ca0, ca1)]
    return out


def hom_boundary(C: ParaComplex, D: ParaComplex, X: SparseMatrix, degree: int) -> SparseMatrix:
    """d(phi) = phi d_C - (-1)^|phi| d_D phi on the total spaces."""
    left = X @ total_boundary(C)
    right = total_boundary(D) @ X
    return left - right if degree % 2 == 0 else left + right


@dataclass(eq=False)
class SuperComplex:
    """Two-periodic complex of covariant maps; bases are vectorized maps C0+C1 -> D0+D1."""

    d0: SparseMatrix
    d1: SparseMatrix
    basis0: SparseMatrix
    basis1: SparseMatrix
    shape: tuple
    name: str = "hom"

    @property
    def dims(self) -> tuple[int, int]:
        return (self.basis0.shape[1], self.basis1.shape[1])

    def homology(self) -> tuple[int, int]:
        return supercomplex_homology(self.d0, self.d1)

    def element(self, parity: int, coeffs: dict) -> SparseMatrix:
        basis = self.basis0 if parity == 0 else self.basis1
        vec: dict = {}
        for k, c in coeffs.items():
            for r, x in basis.col(k).items():
                vec[r] = vec.get(r, 0) + c * x
        return unvec({r: x for r, x in vec.items() if x}, *self.shape)


def _vec(X: SparseMatrix) -> dict:
    return {j * X.shape[0] + i: x for j, c in enumerate(X.columns()) for i, x in c.items()}


def covariant_maps(C: ParaComplex, D: ParaComplex, degree: int) -> SparseMatrix:
    """Basis (vectorized, column-major) of covariant maps C -> D of the given parity."""
    cons = covariance_constraints(C, D)
    cons.append((_parity(D), _parity(C, flip=bool(degree % 2))))
    return intertwiner_space(cons, sum(D.dims), sum(C.dims))


def hom_supercomplex(C: ParaComplex, D: ParaComplex, name: str = "hom") -> SuperComplex:
    shape = (sum(D.dims), sum(C.dims))
    bases = [covariant_maps(C, D, p) for p in (0, 1)]
    ds = []
    for p in (0, 1):
        cols = []
        for k in range(bases[p].shape[1]):
            X = unvec(bases[p].col(k), *shape)
            Y = hom_boundary(C, D, X, p)
            cols.append(_vec(Y))
        img = SparseMatrix.from_columns(shape[0] * shape[1], cols)
        coords = solve(bases[1 - p], img)
        if coords is None:
            raise ContractViolation("the Hom boundary leaves the space of covariant maps")
        ds.append(coords)
    return SuperComplex(ds[0], ds[1], bases[0], bases[1], shape, name)


def _tower(A: GAlgebra, N: int, levels) -> tuple[dict, dict]:
    fs = _form_space(A, N)
    ops = _ops(fs)
    lv = {n: HodgeLevel(fs, n) for n in levels}
    return lv, {n: lv[n].paracomplex(tower_boundary(fs, n), ops.T, f"theta^{n}") for n in levels}


def hpg_bivariant(A: GAlgebra, B: GAlgebra, N: int) -> HomologyReport:
    """H of covariant maps theta^(n+2) Omega_G(A) -> theta^(n+2) Omega_G(B), read through the
    projection of the target to level n (the stable image), for n = N-4, N-2."""
    if A.group.order != B.group.order or A.group.table != B.group.table:
        raise GroupMismatch("both algebras must carry actions of the same group")
    rep = HomologyReport("hpg-bivariant", {"group": A.group.name, "source": A.name, "algebra": B.name, "N": N},
                         notes=list(REDUCTION_NOTES))
    rep.notes.append("dimensions are images of H(hom(C, theta^(n+2) B)) in H(hom(C, theta^n B))")
    t = time.perf_counter()
    needed = sorted({k for m in _levels(N) for k in (m, m + 2)})
    _, pa = _tower(A, N, needed)
    lb, pb = _tower(B, N, needed)
    for n in _levels(N):
        C = pa[n + 2]
        hi, lo = hom_supercomplex(C, pb[n + 2]), hom_supercomplex(C, pb[n])
        for H, lvl in ((hi, n + 2), (lo, n)):
            sq = (H.d1 @ H.d0).is_zero() and (H.d0 @ H.d1).is_zero()
            rep.checks.append(("Hom boundary squares to zero", "d^2(phi) = T phi - phi T = 0", sq, lvl))
        rep.raw[n + 2] = hi.homology()
        pr = tower_projection(lb[n + 2], lb[n])
        pi = _blockdiag(*pr)
        f = []
        for p in (0, 1):
            basis = hi.basis0 if p == 0 else hi.basis1
            cols = [_vec(pi @ unvec(basis.col(k), *hi.shape)) for k in range(basis.shape[1])]
            img = SparseMatrix.from_columns(lo.shape[0] * lo.shape[1], cols)
            f.append(_restrict(SparseMatrix.identity(img.shape[0]), img, lo.basis0 if p == 0 else lo.basis1))
        rep.levels.append(n)
        rep.dims.append(induced_rank(hi, lo, tuple(f)))
    rep.timings["total"] = round(time.perf_counter() - t, 4)
    return rep


# ---------------------------------------------------------------------------
# classes and their composition


@dataclass(eq=False)
class HomClass:
    """A closed covariant map source -> target; maps = (restriction to even part, to odd part)."""

    maps: tuple
    degree: int
    source: ParaComplex
    target: ParaComplex

    @classmethod
    def from_total(cls, X: SparseMatrix, degree: int, source: ParaComplex, target: ParaComplex) -> "HomClass":
        ne = source.dims[0]
        n = sum(source.dims)
        return cls((X.select(cols=list(range(ne))), X.select(cols=list(range(ne, n)))), degree % 2, source, target)

    @classmethod
    def identity(cls, C: ParaComplex) -> "HomClass":
        return cls.from_total(SparseMatrix.identity(sum(C.dims)), 0, C, C)

    @property
    def total(self) -> SparseMatrix:
        a, b = self.maps
        return block_matrix([[a, b]], [a.shape[0]], [a.shape[1], b.shape[1]])

    def is_closed(self) -> bool:
        return hom_boundary(self.source, self.target, self.total, self.degree).is_zero()


def compose_classes(x: HomClass, y: HomClass) -> HomClass:
    """x . y: first x, then y; degrees add mod 2."""
    if x.target is not y.source and x.target.dims != y.source.dims:
        raise Mismatch(f"target {x.target.dims} of x is not the source {y.source.dims} of y")
    for c in (x, y):
        if not c.is_closed():
            d = hom_boundary(c.source, c.target, c.total, c.degree)
            raise ContractViolation(f"representative is not closed: {witness(d)}")
    return HomClass.from_total(y.total @ x.total, x.degree + y.degree, x.source, y.target)


# ---------------------------------------------------------------------------
# Green-Julg comparison


def greenjulg_compare(A: GAlgebra, N: int) -> dict:
    """HP^G of the unital algebra R (A, or A+ when A has no unit) against HP of R x| G."""
    from .greenjulg import gj_setup

    R = A if A.unit is not None else unitarize(A)
    left = hpg_second_variable(R, N)
    right = hp_ordinary(crossed_product(R, COUNTING), N)
    gj = gj_setup(R)
    chain = {"x_g_invariants": [gj.cg0.dim, gj.cg1.dim], "x_crossed_coinvariants": [gj.xh0.dim, gj.xh1.dim]}
    return {
        "group": A.group.name,
        "algebra": R.name,
        "N": N,
        "hpg": left.as_dict(),
        "hp_crossed": right.as_dict(),
        "equal": left.final == right.final,
        "both_stabilized": left.stabilized and right.stabilized,
        "chain_level": chain,
        "chain_level_equal": chain["x_g_invariants"] == chain["x_crossed_coinvariants"],
        "_reports": (left, right),
    }
