"""Polynomial homotopies, the Cartan homotopy eta, the map xi^2 and the nabla-retraction.

Smooth homotopies are replaced by polynomial ones: Phi_t = sum_k C_k t^k with
C_k: A -> B linear, and the integral over [0, 1] is t^k -> 1/(k+1).
"""
from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .algebras import GAlgebra
from .errors import InvalidInput, NoWitness
from .forms import UNIT, FormSpace, _add
from .graded import GOp
from .linalg import SparseMatrix, kron
from .perturbation import RetractionDatum
from .report import Suite
from .tower import HodgeLevel, _ops, level_map, tower_boundary
from .witnesses import connection_witness

_ONE = mpq(1)


@dataclass
class PolynomialHomotopy:
    """Phi: A -> B (x) Q[t] given by coefficient matrices coeffs[k] (B.dim x A.dim) of t^k."""

    A: GAlgebra
    B: GAlgebra
    coeffs: list

    def __post_init__(self):
        if not self.coeffs:
            raise InvalidInput("a homotopy needs at least one coefficient")
        for c in self.coeffs:
            if c.shape != (self.B.dim, self.A.dim):
                raise InvalidInput(f"coefficient of shape {c.shape}, expected {(self.B.dim, self.A.dim)}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def at(self, t) -> SparseMatrix:
        t = mpq(t)
        out = SparseMatrix.zeros(self.B.dim, self.A.dim)
        for k, c in enumerate(self.coeffs):
            out = out + c.scale(t ** k)
        return out

    def derivative(self) -> list:
        return [self.coeffs[k].scale(k) for k in range(1, len(self.coeffs))]

    def problems(self) -> list[str]:
        """Multiplicativity in B[t] on basis pairs and equivariance of every coefficient."""
        A, B = self.A, self.B
        out = []
        cols = [[c.col(x) for x in range(A.dim)] for c in self.coeffs]
        D = self.degree
        for x in range(A.dim):
            for y in range(A.dim):
                for k in range(2 * D + 1):
                    lhs: dict = {}
                    if k <= D:
                        for z, c in A.mult[x][y].items():
                            for r, v in cols[k][z].items():
                                _add(lhs, r, c * v)
                    rhs: dict = {}
                    for i in range(max(0, k - D), min(k, D) + 1):
                        for r, v in B.product(cols[i][x], cols[k - i][y]).items():
                            _add(rhs, r, v)
                    if lhs != rhs:
                        out.append(f"Phi(e{x} e{y}) != Phi(e{x}) Phi(e{y}) at t^{k}")
                        return out
        for s in range(A.group.order):
            for k, c in enumerate(self.coeffs):
                if not (B.action_matrix(s) @ c == c @ A.action_matrix(s)):
                    out.append(f"coefficient t^{k} is not equivariant for group element {s}")
        return out

    def reparametrize_square(self) -> "PolynomialHomotopy":
        """t -> t^2."""
        z = SparseMatrix.zeros(self.B.dim, self.A.dim)
        coeffs = []
        for c in self.coeffs:
            coeffs += [c, z]
        return PolynomialHomotopy(self.A, self.B, coeffs[:-1])


def constant_homotopy(A: GAlgebra, B: GAlgebra, f: SparseMatrix) -> PolynomialHomotopy:
    return PolynomialHomotopy(A, B, [f])


def unipotent_conjugation(A: GAlgebra, nil: dict) -> PolynomialHomotopy:
    """Phi_t(x) = (1 + t n) x (1 - t n) for an invariant n with n^2 = 0: from id to Ad(1 + n)."""
    if A.product(nil, nil):
        raise InvalidInput("the conjugating element must square to zero")
    for s in range(A.group.order):
        if A.act_vec(s, nil) != {k: v for k, v in nil.items() if v}:
            raise InvalidInput("the conjugating element must be G-invariant")
    m = A.dim
    c1, c2 = [], []
    for x in range(m):
        ex = {x: 1}
        nx, xn = A.product(nil, ex), A.product(ex, nil)
        col = dict(nx)
        for k, v in xn.items():
            _add(col, k, -v)
        c1.append(col)
        c2.append({k: -v for k, v in A.product(nx, nil).items()})
    return PolynomialHomotopy(A, A, [SparseMatrix.identity(m), SparseMatrix.from_columns(m, c1),
                                     SparseMatrix.from_columns(m, c2)])


# ---------------------------------------------------------------------------


def _poly_vec(coeff_cols: list, x: int, shift: int = 0, weight: bool = False) -> dict:
    """{(power, basis index): c} for Phi_t(e_x) (or Phi'_t(e_x) with weight/shift)."""
    out: dict = {}
    for k, cols in enumerate(coeff_cols):
        if weight and k == 0:
            continue
        for r, v in cols[x].items():
            out[(k - shift, r)] = v * (k if weight else 1)
    return out


def cartan_eta(phi: PolynomialHomotopy, fa: FormSpace, fb: FormSpace, degrees) -> GOp:
    """eta(f(s) x0 dx1..dxn) = int_0^1 f(s) Phi_t(x0) Phi'_t(x1) dPhi_t(x2)..dPhi_t(xn) dt; eta = 0 on degree 0."""
    A, B = phi.A, phi.B
    cols = [[c.col(x) for x in range(A.dim)] for c in phi.coeffs]
    blocks = {}
    for n in degrees:
        if n == 0:
            continue
        mat_cols = []
        cache: dict = {}
        for idx in range(fa.dim(n)):
            g, w = fa.word(idx, n)
            key = w
            if key not in cache:
                cache[key] = _eta_word(A, B, cols, w)
            mat_cols.append({fb.index(g, tw): c for tw, c in cache[key].items()})
        blocks[(n - 1, n)] = SparseMatrix.from_columns(fb.dim(n - 1), mat_cols)
    dom = sorted(set(degrees) | {0})
    return GOp({n: fa.dim(n) for n in range(fa.N + 1)}, {n: fb.dim(n) for n in range(fb.N + 1)}, blocks, dom, "eta")


def _eta_word(A, B, cols, w) -> dict:
    w0, x1, rest = w[0], w[1], w[2:]
    if w0 == UNIT:
        lead = {(0, None): _ONE}
    else:
        lead = _poly_vec(cols, w0)
    deriv = _poly_vec(cols, x1, shift=1, weight=True)
    # Phi_t(x0) Phi'_t(x1) in B, as {(power, (y,)): c}
    cur: dict = {}
    for (p, y0), c0 in lead.items():
        for (q, y1), c1 in deriv.items():
            if y0 is None:
                _add(cur, (p + q, (y1,)), c0 * c1)
            else:
                for z, cz in B.mult[y0][y1].items():
                    _add(cur, (p + q, (z,)), c0 * c1 * cz)
    for x in rest:
        nxt: dict = {}
        px = _poly_vec(cols, x)
        for (p, word), c in cur.items():
            for (q, y), cy in px.items():
                _add(nxt, (p + q, word + (y,)), c * cy)
        cur = nxt
    out: dict = {}
    for (p, word), c in cur.items():
        _add(out, word, c / (p + 1))
    return out


def x_map(f: SparseMatrix, fa: FormSpace, fb: FormSpace, degrees=(0, 1)) -> GOp:
    """Omega_G(f) on the given degrees: f(s) w0 dw1..dwn -> f(s) f(w0) df(w1)..df(wn), unit to unit."""
    fcols = [f.col(x) for x in range(fa.m)]
    blocks = {}
    for n in degrees:
        mat_cols = []
        for idx in range(fa.dim(n)):
            g, w = fa.word(idx, n)
            cur = {(): _ONE}
            for pos, x in enumerate(w):
                nxt: dict = {}
                if pos == 0 and x == UNIT:
                    nxt = {(UNIT,): c for _, c in cur.items()}
                else:
                    for word, c in cur.items():
                        for y, cy in fcols[x].items():
                            _add(nxt, word + (y,), c * cy)
                cur = nxt
            mat_cols.append({fb.index(g, tw): c for tw, c in cur.items()})
        blocks[(n, n)] = SparseMatrix.from_columns(fb.dim(n), mat_cols)
    return GOp({n: fa.dim(n) for n in range(fa.N + 1)}, {n: fb.dim(n) for n in range(fb.N + 1)}, blocks,
               degrees, "X(f)")


def xi2(fs: FormSpace) -> GOp:
    """theta^2 -> X_G: identity on degree 0, projection on degree 1, zero on degree 2."""
    dm = {n: fs.dim(n) for n in range(fs.N + 1)}
    return GOp(dm, dm, {(0, 0): SparseMatrix.identity(dm[0]), (1, 1): SparseMatrix.identity(dm[1])}, (0, 1, 2), "xi2")


def homotopy_suite(phi: PolynomialHomotopy, suite: Suite | None = None) -> Suite:
    """X_G(Phi_1) xi^2 - X_G(Phi_0) xi^2 = d eta + eta d on theta^2 Omega_G(A) -> X_G(B)."""
    suite = suite or Suite(f"homotopy invariance {phi.A.name} -> {phi.B.name}")
    probs = phi.problems()
    suite.add("Phi is an equivariant homomorphism into B[t]", "Phi: A -> B[0,1] equivariant homomorphism",
              not probs, detail="; ".join(probs))
    if probs:
        return suite
    fa, fb = FormSpace(phi.A, 3), FormSpace(phi.B, 3)
    la, lb = HodgeLevel(fa, 2), HodgeLevel(fb, 1)
    with suite.timed("eta"):
        eta = cartan_eta(phi, fa, fb, (1, 2, 3))
    p0, p1 = x_map(phi.at(0), fa, fb), x_map(phi.at(1), fa, fb)
    dA, dB = tower_boundary(fa, 2), tower_boundary(fb, 1)
    # eta anticommutes with b on forms
    opa, opb = _ops(fa), _ops(fb)
    for n in (2, 3):
        lhs = eta.blocks[(n - 2, n - 1)] @ opa.b.blocks[(n - 1, n)] + opb.b.blocks[(n - 2, n - 1)] @ eta.blocks[(n - 1, n)]
        suite.add("eta b + b eta = 0", "eta b = - b eta", lhs.is_zero(), n)
    desc = lb.top.project(eta.blocks[(1, 2)] @ fa.b(3))
    suite.add("eta maps b(Omega^3) into b(Omega^2)", "eta induces theta^2 Omega_G(A) -> X_G(B)", desc.is_zero(), 3)
    # degree-zero commutator
    diff0 = kron(SparseMatrix.identity(phi.A.group.order), phi.at(1) - phi.at(0))
    suite.add("[d, eta] = Phi_1 - Phi_0 on degree 0", "[d, eta](f x) = f Phi_1(x) - f Phi_0(x)",
              (eta.blocks[(0, 1)] @ fa.d(0) - diff0).is_zero(), 0)
    # X(Phi) is a map of paracomplexes X_G(A) -> X_G(B), xi^2 a map theta^2 -> X_G(A)
    x1a = HodgeLevel(fa, 1)
    for nm, F in (("X(Phi_0)", p0), ("X(Phi_1)", p1)):
        for sp in (0, 1):
            lhs = level_map(dB @ F, x1a, lb, sp, 1 - sp)
            rhs = level_map(F @ tower_boundary(fa, 1), x1a, lb, sp, 1 - sp)
            suite.add(f"{nm} is a chain map", "X_G(Phi_t) map of paracomplexes", lhs == rhs, sp)
    xa = xi2(fa)
    for sp in (0, 1):
        lhs = level_map(tower_boundary(fa, 1) @ xa, la, x1a, sp, 1 - sp)
        rhs = level_map(xa @ dA, la, x1a, sp, 1 - sp)
        suite.add("xi^2 is a chain map", "natural map of paracomplexes theta^2 Omega_G(A) -> X_G(A)", lhs == rhs, sp)
    lhs_op = (p1 - p0) @ xa
    rhs_op = dB @ eta + eta @ dA
    data = []
    for sp in (0, 1):
        lhs = level_map(lhs_op, la, lb, sp, sp)
        rhs = level_map(rhs_op, la, lb, sp, sp)
        diff = lhs - rhs
        suite.add("X(Phi_1) xi^2 - X(Phi_0) xi^2 = d eta + eta d",
                  "X_G(Phi_1) xi^2 - X_G(Phi_0) xi^2 = partial eta + eta partial", diff.is_zero(), sp,
                  None if diff.is_zero() else {"first_nonzero": str(diff.first_nonzero())})
        data.append({"parity": sp, "lhs_zero": lhs.is_zero(), "shape": list(lhs.shape)})
    suite.data["homotopy"] = data
    return suite


# ---------------------------------------------------------------------------


def nabla_operator(fs: FormSpace, X: SparseMatrix, n: int, top: int) -> GOp:
    """nabla_G on degrees n..top: nabla(w0 dw1..dwn dx..) = nabla(w0 dw1..dwn) dx..; zero below n."""
    G, m = fs.G, fs.m
    blocks = {}
    for j in range(n, top + 1):
        loc = kron(X, SparseMatrix.identity(m ** (j - n)))
        blocks[(j + 1, j)] = kron(SparseMatrix.identity(G.order), loc)
    dm = {k: fs.dim(k) for k in range(fs.N + 1)}
    return GOp(dm, dm, blocks, range(top + 1), "nabla_G")


def _B_on_level(fs: FormSpace, L: int) -> GOp:
    ops = _ops(fs)
    blocks = {k: v for k, v in ops.B.blocks.items() if k[0] <= L}
    return GOp(ops.dims, ops.dims, blocks, range(L + 1), "B")


def nabla_retraction(A: GAlgebra, n: int, L: int) -> tuple[RetractionDatum, list]:
    """Deformation retraction of theta^L Omega_G(A) onto theta^n Omega_G(A) from a graded connection on Omega^n:
    i = id - [b, nabla_G], p = projection, h = -nabla_G.  Returns the datum and the idempotent checks."""
    if not 1 <= n < L:
        raise InvalidInput("need 1 <= n < L")
    w = connection_witness(A, n)
    if not w.feasible:
        raise NoWitness(f"no equivariant graded connection on Omega^{n}({A.name})")
    fs = FormSpace(A, L + 1)
    ops = _ops(fs)
    C, D = HodgeLevel(fs, L), HodgeLevel(fs, n)
    nab = nabla_operator(fs, w.map, n, L)
    comm = ops.b @ nab + nab @ ops.b
    ident = GOp.identity(ops.dims)
    Bt = _B_on_level(fs, L)
    BD = _B_on_level(fs, n)
    r = RetractionDatum(
        i=level_map(ident - comm, D, C),
        p=level_map(ident, C, D),
        h=level_map(-nab, C, C),
        bC=level_map(ops.b, C, C), BC=level_map(Bt, C, C),
        bD=level_map(ops.b, D, D), BD=level_map(BD, D, D),
        name=f"nabla-retraction({A.name}, n={n}, L={L})",
        info={"n": n, "L": L, "sizes_C": dict(C.sizes), "sizes_D": dict(D.sizes)},
    )
    cm = level_map(comm, C, C)
    checks = [("[b, nabla_G] idempotent", cm @ cm == cm, None)]
    offs, o = {}, 0
    for j in range(L + 1):
        offs[j] = o
        o += C.sizes[j]
    for j in range(L + 1):
        sel = list(range(offs[j], offs[j] + C.sizes[j]))
        blk = cm.select(cols=sel)
        if j < n:
            checks.append((f"[b, nabla_G] = 0 on degree {j}", blk.is_zero(), None))
        elif j > n:
            expect = SparseMatrix.identity(cm.shape[0]).select(cols=sel)
            checks.append((f"[b, nabla_G] = id on degree {j}", blk == expect, None))
    bn = fs.b(n + 1)
    on_b = comm.blocks[(n, n)] @ bn
    checks.append(("[b, nabla_G] = id on b(Omega^{n+1})", on_b == bn, None))
    return r, checks
