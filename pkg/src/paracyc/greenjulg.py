"""Chain-level comparison of X_G(R)^G with the relative X-complex of the crossed product R x| G.

Conventions: the measure on G is normalized, so H = D(G) sits in B = R x| G as
1_R x| f and the basis element x x| delta_u is the function u -> x.
"""
from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .algebras import GAlgebra, crossed_product, forget_action
from .errors import NotUnital
from .forms import UNIT, FormSpace
from .graded import witness
from .groups import NORMALIZED
from .linalg import Echelon, Q, SparseMatrix, Subquotient, hstack, image_basis, rank, solve
from .report import Suite
from .tower import hodge_level

_ONE = mpq(1)


def _add(acc: dict, k, c):
    v = acc.get(k, 0) + c
    if v:
        acc[k] = v
    else:
        acc.pop(k, None)


@dataclass(eq=False)
class GJData:
    """Both sides of the comparison on ambient form coordinates.

    cg0, cg1: coinvariants of Omega^0_G(R) and of Omega^1_G(R)/b; xh0, xh1: the
    relative X-complex X(B)_H as quotients of B and of Omega^1(B)."""

    R: GAlgebra
    B: GAlgebra
    fR: FormSpace
    fB: FormSpace
    comm: SparseMatrix  # [B, H] generators in B
    rel1: SparseMatrix  # x (dh) y generators in Omega^1(B)
    rel1_index: list  # (x, h, y) per column of rel1
    comm_index: list  # (basis index of B, h) per column of comm
    cg0: Subquotient
    cg1: Subquotient
    xh0: Subquotient
    xh1: Subquotient


def _h_vec(R: GAlgebra, n: int, v: int) -> dict:
    """1_R x| delta_v in B."""
    return {i * n + v: Q(c) for i, c in R.unit.items()}


def _omega1(fB: FormSpace, x, z: dict) -> dict:
    """x dz in Omega^1(B); x is UNIT or a coordinate dict."""
    out: dict = {}
    if x == UNIT:
        for k, c in z.items():
            _add(out, fB.index(0, (UNIT, k)), c)
        return out
    for i, a in x.items():
        for k, c in z.items():
            _add(out, fB.index(0, (i, k)), a * c)
    return out


def gj_setup(R: GAlgebra) -> GJData:
    if R.unit is None:
        raise NotUnital(f"{R.name} has no unit; unitarize it first")
    n = R.group.order
    B = crossed_product(R, NORMALIZED)
    fR, fB = FormSpace(R, 2), FormSpace(forget_action(B), 2)
    hs = [_h_vec(R, n, v) for v in range(n)]
    comm_cols, comm_index = [], []
    for i in range(B.dim):
        for v in range(n):
            c = dict(B.product({i: _ONE}, hs[v]))
            for k, x in B.product(hs[v], {i: _ONE}).items():
                _add(c, k, -x)
            comm_cols.append(c)
            comm_index.append((i, v))
    comm = SparseMatrix.from_columns(B.dim, comm_cols)
    rel_cols, rel_index = [], []
    plus = [UNIT] + list(range(B.dim))
    for x in plus:
        xv = UNIT if x == UNIT else {x: _ONE}
        for v in range(n):
            for y in plus:
                # x (dh) y = x d(h y) - (x h) dy
                hy = hs[v] if y == UNIT else B.product(hs[v], {y: _ONE})
                col = _omega1(fB, xv, hy)
                if y != UNIT:
                    xh = hs[v] if x == UNIT else B.product(xv, hs[v])
                    for k, c in _omega1(fB, xh, {y: _ONE}).items():
                        _add(col, k, -c)
                rel_cols.append(col)
                rel_index.append((x, v, y))
    rel1 = SparseMatrix.from_columns(fB.dim(1), rel_cols)
    I0, I1 = SparseMatrix.identity(fR.dim(0)), SparseMatrix.identity(fR.dim(1))
    cg0 = Subquotient(fR.dim(0), hstack([fR.act(t, 0) - I0 for t in range(n)]))
    cg1 = Subquotient(fR.dim(1), hstack([fR.b(2)] + [fR.act(t, 1) - I1 for t in range(n)]))
    xh0 = Subquotient(B.dim, comm)
    xh1 = Subquotient(fB.dim(1), hstack([fB.b(2), rel1]))
    return GJData(R, B, fR, fB, comm, rel1, rel_index, comm_index, cg0, cg1, xh0, xh1)


def gj_lambda0(R: GAlgebra, B: GAlgebra) -> SparseMatrix:
    """lambda_0(f)(t) = integral s . f(s^-1 t s) ds, normalized measure."""
    G, n = R.group, R.group.order
    w = mpq(1, n)
    cols = []
    for a in range(B.dim):
        i, u = divmod(a, n)
        out: dict = {}
        for s in range(n):
            cu = G.conj(s, u)
            for k, c in R.act[s][i].items():
                _add(out, k * n + cu, w * c)
        cols.append(out)
    return SparseMatrix.from_columns(B.dim, cols)


def gj_alpha(d: GJData) -> tuple[SparseMatrix, SparseMatrix]:
    """alpha_0(f x)(s) = f(s) x, alpha_1(f x dy)(s,t) = f(st) x d(s^-1.y), alpha_1(f dy)(t) = f(t) dy."""
    R, fR, fB = d.R, d.fR, d.fB
    G, n = R.group, R.group.order
    a0 = []
    for idx in range(fR.dim(0)):
        g, (x,) = fR.word(idx, 0)
        a0.append({x * n + g: _ONE})
    a1 = []
    for idx in range(fR.dim(1)):
        g, (x, y) = fR.word(idx, 1)
        if x == UNIT:
            a1.append({fB.index(0, (UNIT, y * n + g)): _ONE})
            continue
        out: dict = {}
        for s in range(n):
            si = G.inv(s)
            t = G.mul(si, g)
            for k, c in R.act[si][y].items():
                _add(out, fB.index(0, (x * n + s, k * n + t)), c)
        a1.append(out)
    return SparseMatrix.from_columns(d.B.dim, a0), SparseMatrix.from_columns(fB.dim(1), a1)


def gj_beta(d: GJData, pointwise: bool = False) -> tuple[SparseMatrix, SparseMatrix]:
    """beta_0(x x| f) = f x; beta_1((x x| f) d(y x| g)) = (f * g) x d(s.y) with the
    convolution f * g, and beta_1(d(y x| g)) = g dy.

    pointwise=True uses f(r) g(r) x d(r.y) in place of the convolution."""
    R, fR, fB = d.R, d.fR, d.fB
    G, n = R.group, R.group.order
    w = mpq(1, n)
    b0 = []
    for a in range(d.B.dim):
        x, u = divmod(a, n)
        b0.append({fR.index(u, (x,)): _ONE})
    b1 = []
    for idx in range(fB.dim(1)):
        _, (c0, c1) = fB.word(idx, 1)
        y, t = divmod(c1, n)
        if c0 == UNIT:
            b1.append({fR.index(t, (UNIT, y)): _ONE})
            continue
        x, s = divmod(c0, n)
        out: dict = {}
        if pointwise:
            if s == t:
                for k, c in R.act[s][y].items():
                    _add(out, fR.index(s, (x, k)), c)
        else:
            st = G.mul(s, t)
            for k, c in R.act[s][y].items():
                _add(out, fR.index(st, (x, k)), w * c)
        b1.append(out)
    return SparseMatrix.from_columns(fR.dim(0), b0), SparseMatrix.from_columns(fR.dim(1), b1)


def _zero(Sq: Subquotient, m: SparseMatrix):
    p = Sq.project(m)
    return p.is_zero(), witness(p)


def _same(Sq: Subquotient, lhs: SparseMatrix, rhs: SparseMatrix):
    return _zero(Sq, lhs - rhs)


def k_contraction(d: GJData) -> dict:
    """K^0 = [B, H] and its partner K^1 in X^1(B); alpha([x, h]) = x dh inverts b."""
    fB, B = d.fB, d.B
    xb1 = Subquotient(fB.dim(1), fB.b(2))
    b1 = fB.b(1) @ xb1.section
    ech = Echelon(B.dim)
    chosen = [j for j, c in enumerate(d.comm.columns()) if ech.add(c)]
    keep = d.comm.select(cols=chosen)
    hs = [_h_vec(d.R, d.R.group.order, v) for v in range(d.R.group.order)]
    alpha_cols = []
    for j in chosen:
        i, v = d.comm_index[j]
        alpha_cols.append(xb1.project_vector(_omega1(fB, {i: _ONE}, hs[v])))
    alpha = SparseMatrix.from_columns(xb1.dim, alpha_cols)
    K1 = image_basis(xb1.project(d.rel1))
    out = {"dim_K0": keep.shape[1], "dim_K1": K1.shape[1]}
    bal = b1 @ alpha - keep
    out["b alpha = id"] = (bal.is_zero(), witness(bal))
    coords = solve(keep, b1 @ K1)
    if coords is None:
        out["alpha b = id"] = (False, {"detail": "b does not map K^1 into K^0"})
    else:
        ab = alpha @ coords - K1
        out["alpha b = id"] = (ab.is_zero(), witness(ab))
    out["dim X(B)"] = (B.dim, xb1.dim)
    return out


def greenjulg_suite(R: GAlgebra, suite: Suite | None = None) -> Suite:
    suite = suite or Suite(f"Green-Julg {R.name} over {R.group.name}")

    def put(name, anchor, res, degree=None):
        suite.add(name, anchor, res[0], degree, res[1])
    with suite.timed("setup"):
        d = gj_setup(R)
    fR, fB, B = d.fR, d.fB, d.B
    suite.notes.append("measure: normalized (H = D(G) embedded as 1_R x| f)")
    # lambda_0
    lam = gj_lambda0(R, B)
    suite.add("lambda_0 vanishes on [B, H]", "lambda_0 vanishes on [B, H]", (lam @ d.comm).is_zero(),
              witness=witness(lam @ d.comm))
    suite.add("lambda_0 is idempotent", "lambda_0 splits [B,H] -> B -> B/[B,H]", lam @ lam == lam)
    rl, rc = rank(lam), rank(d.comm)
    suite.add("rank lambda_0 + rank [B, H] = dim B", "K^0 = [B, H]", rl + rc == B.dim,
              detail=f"{rl} + {rc} vs {B.dim}")
    # the two complexes
    xh0, xh1, cg0, cg1 = d.xh0, d.xh1, d.cg0, d.cg1
    for nm, ok_w in (("d descends to X(B)_H", _zero(xh1, fB.d(0) @ d.comm)),
                     ("b descends to X(B)_H", _zero(xh0, fB.b(1) @ xh1.generators)),
                     ("d descends to X_G(R)_G", _zero(cg1, fR.d(0) @ cg0.generators)),
                     ("b descends to X_G(R)_G", _zero(cg0, fR.b(1) @ cg1.generators))):
        put(nm, "differentials of X(B) descend to X(B)_H", ok_w)
    rd = xh1.project(fB.d(0) @ xh0.section)
    rb = xh0.project(fB.b(1) @ xh1.section)
    suite.add("X(B)_H is a complex", "relative X-complex", (rb @ rd).is_zero() and (rd @ rb).is_zero())
    # dimensions
    XG = hodge_level(fR, 1)
    inv = XG.invariants()
    dims_inv = inv.dims
    dims_rel = (xh0.dim, xh1.dim)
    dims_co = (cg0.dim, cg1.dim)
    suite.add("dim X_G(R)^G = dim X(R x| G)_H", "X_G(R)^G = X(R x| G)_H", dims_inv == dims_rel,
              detail=f"invariants {dims_inv}, coinvariants {dims_co}, relative {dims_rel}")
    suite.add("invariants and coinvariants agree", "X_G(R)^G identified with coinvariants by averaging",
              dims_inv == dims_co)
    # alpha and beta
    a0, a1 = gj_alpha(d)
    b0, b1 = gj_beta(d)
    put("alpha is well defined", "alpha: X_G(R)_G -> X(R x| G)_H",
              _zero(xh0, a0 @ cg0.generators))
    put("alpha is well defined", "alpha: X_G(R)_G -> X(R x| G)_H", _zero(xh1, a1 @ cg1.generators), degree=1)
    put("beta is well defined", "beta: X(R x| G)_H -> X_G(R)_G", _zero(cg0, b0 @ d.comm))
    put("beta is well defined", "beta: X(R x| G)_H -> X_G(R)_G", _zero(cg1, b1 @ xh1.generators), degree=1)
    for deg, (A_, B_, src, tgt) in enumerate(((a0, b0, cg0, xh0), (a1, b1, cg1, xh1))):
        ab = tgt.project(A_ @ B_ @ tgt.section) - SparseMatrix.identity(tgt.dim)
        ba = src.project(B_ @ A_ @ src.section) - SparseMatrix.identity(src.dim)
        suite.add("alpha beta = id", "alpha and beta are inverse to each other", ab.is_zero(), deg, witness(ab))
        suite.add("beta alpha = id", "alpha and beta are inverse to each other", ba.is_zero(), deg, witness(ba))
    # chain-map squares
    put("alpha d = d alpha", "(d alpha_0)(f x)(s) = f(s) dx = (alpha_1 d)(f x)(s)",
              _same(xh1, fB.d(0) @ a0 @ cg0.section, a1 @ fR.d(0) @ cg0.section), degree=0)
    put("alpha b = b alpha", "(b alpha_1)(f xdy)(t) = (alpha_0 b)(f xdy)(t)",
              _same(xh0, fB.b(1) @ a1 @ cg1.section, a0 @ fR.b(1) @ cg1.section), degree=1)
    put("beta d = d beta", "beta is a chain map",
              _same(cg1, fR.d(0) @ b0 @ xh0.section, b1 @ fB.d(0) @ xh0.section), degree=0)
    put("beta b = b beta", "beta is a chain map",
              _same(cg0, fR.b(1) @ b1 @ xh1.section, b0 @ fB.b(1) @ xh1.section), degree=1)
    # the contraction of K
    kc = k_contraction(d)
    put("b alpha = id on K^0", "alpha(x) = x (x) 1 is inverse to b: K^1 -> K^0", kc["b alpha = id"])
    put("alpha b = id on K^1", "alpha(x) = x (x) 1 is inverse to b: K^1 -> K^0", kc["alpha b = id"])
    suite.add("dim K^0 = dim [B, H]", "K^0 = [B, H]", kc["dim_K0"] == rc and kc["dim_K1"] == kc["dim_K0"],
              detail=f"K^0 {kc['dim_K0']}, K^1 {kc['dim_K1']}")
    xb = kc["dim X(B)"]
    suite.add("X(B) = K + X(B)_H", "K -> X(B) -> X(B)_H",
              xb[0] - kc["dim_K0"] == xh0.dim and xb[1] - kc["dim_K1"] == xh1.dim,
              detail=f"X(B) {xb}, K ({kc['dim_K0']}, {kc['dim_K1']}), X(B)_H {dims_rel}")
    suite.data["greenjulg"] = [{"algebra": R.name, "group": R.group.name, "X_G(R)^G": list(dims_inv),
                                "X(B)_H": list(dims_rel), "X(B)": list(xb),
                                "K": [kc["dim_K0"], kc["dim_K1"]]}]
    return suite
