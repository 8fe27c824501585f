"""The operator calculus comparing the X-complex boundary with B + b on forms.

All operators are built from exact polynomials in x = kappa^2 and the
primitive operators d, b, B, T.  Matrices are dense FLINT rationals per
degree; graded-operator domains take care of truncation.
"""
from __future__ import annotations

from functools import lru_cache

import flint

from .forms import FormSpace
from .graded import Dense, GOp
from .report import Suite
from .tower import delta_closed, rescale_c, xdiff_boundary

Poly = flint.fmpq_poly
X = Poly([0, 1])
ONE = Poly([1])
HALF = flint.fmpq(1, 2)


def _frac(a: int, b: int = 1) -> flint.fmpq:
    return flint.fmpq(a, b)


# ---------------------------------------------------------------------------
# the polynomials


@lru_cache(maxsize=None)
def N_poly(n: int) -> Poly:
    """N_n = (1/n) sum_{j<n} x^j, N_0 = 1."""
    if n < 0:
        raise ValueError("N_n is defined for n >= 0")
    if n == 0:
        return ONE
    return Poly([1] * n) * _frac(1, n)


@lru_cache(maxsize=None)
def f_poly(n: int) -> Poly:
    """f_n = N_n N_{n+1} (1 + (n - 1/2)(1 - x)); f_j = 1 for j < 0."""
    if n < 0:
        return ONE
    return N_poly(n) * N_poly(n + 1) * (ONE + (ONE - X) * (_frac(n) - HALF))


def _exact_div(p: Poly, q: Poly) -> Poly:
    quo, rem = divmod(p, q)
    if not rem.is_zero():
        raise ArithmeticError(f"division leaves remainder {rem}")
    return quo


@lru_cache(maxsize=None)
def g_poly(n: int) -> Poly:
    """g_n = -(n - 1/2) N_n N_{n+1} + N_n (N_{n+1} - 1)/(x - 1) + (N_n - 1)/(x - 1); g_j = 0 for j < 0."""
    if n < 0:
        return Poly([])
    xm1 = X - ONE
    a = N_poly(n) * N_poly(n + 1) * (-(_frac(n) - HALF))
    b = N_poly(n) * _exact_div(N_poly(n + 1) - ONE, xm1)
    c = _exact_div(N_poly(n) - ONE, xm1)
    return a + b + c


def F_poly(j: int) -> Poly:
    """F_{2n-1} = F_{2n} = f_{2n-2} f_{2n-1} f_{2n}."""
    n = (j + 1) // 2
    return f_poly(2 * n - 2) * f_poly(2 * n - 1) * f_poly(2 * n)


def S_poly(j: int) -> Poly:
    """S_{2n-1} = S_{2n} = g_{2n-2} + g_{2n-1} f_{2n-2} + g_{2n} f_{2n-1} f_{2n-2}."""
    n = (j + 1) // 2
    return g_poly(2 * n - 2) + g_poly(2 * n - 1) * f_poly(2 * n - 2) + g_poly(2 * n) * f_poly(2 * n - 1) * f_poly(2 * n - 2)


def S_poly_alt(j: int) -> Poly:
    """The second expression g_{2n} + g_{2n-1} f_{2n} + g_{2n-2} f_{2n-1} f_{2n}."""
    n = (j + 1) // 2
    return g_poly(2 * n) + g_poly(2 * n - 1) * f_poly(2 * n) + g_poly(2 * n - 2) * f_poly(2 * n - 1) * f_poly(2 * n)


def Q_core(n: int) -> Poly:
    """N_{2n}(1 + (2n - 1/2)(1 - x)) (g_{2n-2} f_{2n-1} + g_{2n-1} - g_{2n+2} f_{2n+1} - g_{2n+1})."""
    k = 2 * n
    lead = N_poly(k) * (ONE + (ONE - X) * (_frac(k) - HALF))
    mid = g_poly(k - 2) * f_poly(k - 1) + g_poly(k - 1) - g_poly(k + 2) * f_poly(k + 1) - g_poly(k + 1)
    return lead * mid


def K_core(n: int) -> Poly:
    """(1/2n) f_{2n-2} f_{2n-1} N_{2n+1} (1 + (2n - 1/2)(1 - x)), the polynomial part of K_n."""
    k = 2 * n
    return f_poly(k - 2) * f_poly(k - 1) * N_poly(k + 1) * (ONE + (ONE - X) * (_frac(k) - HALF)) * _frac(1, k)


def R_weight(n: int) -> Poly:
    """sum_{j=0}^{n-2} (n - j - 1) x^j."""
    return Poly([n - j - 1 for j in range(max(n - 1, 0))]) if n >= 2 else Poly([])


def symbolic_checks(nmax: int = 6) -> list[tuple[str, int, bool]]:
    out = []
    for n in range(-2, nmax + 1):
        out.append(("g_n (1 - x) = 1 - f_n", n, g_poly(n) * (ONE - X) == ONE - f_poly(n)))
    for n in range(0, nmax + 1):
        out.append(("N_n(1) = 1", n, N_poly(n)(1) == 1))
        out.append(("f_n(1) = 1", n, f_poly(n)(1) == 1))
    for j in range(0, nmax + 1):
        out.append(("Seq1 = Seq2", j, S_poly(j) == S_poly_alt(j)))
        out.append(("1 - F = (1 - x) S", j, ONE - F_poly(j) == (ONE - X) * S_poly(j)))
        out.append(("F(1) = 1", j, F_poly(j)(1) == 1))
    for n in range(0, nmax // 2 + 1):
        lhs = S_poly(2 * n) - S_poly(2 * n + 2)
        rhs = f_poly(2 * n) * (g_poly(2 * n - 1) - g_poly(2 * n + 1) + g_poly(2 * n - 2) * f_poly(2 * n - 1)
                               - g_poly(2 * n + 2) * f_poly(2 * n + 1))
        out.append(("Seq3", 2 * n, lhs == rhs))
    return out


# ---------------------------------------------------------------------------
# operators


class CQOperators:
    """All operators of the comparison on prod_j Omega^j_G(A), j <= N, as dense graded operators."""

    def __init__(self, fs: FormSpace):
        self.fs = fs
        N = fs.N
        self.N = N
        self.dims = {n: fs.dim(n) for n in range(N + 1)}
        dm = self.dims
        self.kdom = range(N)  # kappa known on these degrees
        self._pow: dict = {}
        self.id = GOp.identity(dm, dense=True)
        self.d = GOp.homogeneous(dm, dm, 1, {n: Dense.of(fs.d(n)) for n in range(N)}, "d")
        self.b = GOp(dm, dm, {(n - 1, n): Dense.of(fs.b(n)) for n in range(1, N + 1)}, range(N + 1), "b")
        self.T = GOp.homogeneous(dm, dm, 0, {n: Dense.of(fs.T(n)) for n in range(N + 1)}, "T")
        self.kappa = GOp.homogeneous(dm, dm, 0, {n: Dense.of(fs.kappa(n)) for n in self.kdom}, "kappa")
        self.B = GOp.homogeneous(dm, dm, 1, {n: Dense.of(fs.B(n)) for n in range(N - 1)}, "B")
        self.onepk = self.id + self.kappa
        self.onepT = self.id + self.T
        self.x = self.kappa @ self.kappa
        self.partial = xdiff_boundary(fs).dense().renamed("partial")
        self.delta = delta_closed(fs).dense().renamed("delta")
        self._build()

    # -- polynomial evaluation --
    def power(self, n: int, j: int) -> Dense:
        key = (n, j)
        if key not in self._pow:
            if j == 0:
                self._pow[key] = Dense.identity(self.dims[n])
            else:
                self._pow[key] = self.x.blocks[(n, n)] @ self.power(n, j - 1)
        return self._pow[key]

    def eval(self, p: Poly, n: int) -> Dense:
        out = Dense.zeros(self.dims[n], self.dims[n])
        for j, c in enumerate(p.coeffs()):
            if c != 0:
                out = out + self.power(n, j).scale(c)
        return out

    def poly_op(self, fn, name: str) -> GOp:
        """Degree-preserving operator given on degree n by the polynomial fn(n) in kappa^2."""
        return GOp.homogeneous(self.dims, self.dims, 0, {n: self.eval(fn(n), n) for n in self.kdom}, name)

    def c_op(self, inverse: bool = False) -> GOp:
        mats = {}
        for n in range(self.N + 1):
            c = rescale_c(n)
            c = 1 / c if inverse else c
            mats[n] = Dense.identity(self.dims[n]).scale(c)
        return GOp.homogeneous(self.dims, self.dims, 0, mats, "c^-1" if inverse else "c")

    def _build(self):
        dm, N = self.dims, self.N
        x, T = self.x, self.T
        self.F = self.poly_op(F_poly, "F")
        self.S = self.poly_op(S_poly, "S")
        self.S_alt = self.poly_op(S_poly_alt, "S'")
        # Q: even degrees via B, odd degrees via b; the polynomial is evaluated after B or b
        qb = {}
        qdom = []
        for k in range(N + 1):
            n = k // 2
            if k % 2 == 0:
                if k <= N - 2:
                    qb[(k + 1, k)] = (self.eval(Q_core(n), k + 1) @ self.onepT.blocks[(k + 1, k + 1)]
                                      @ self.B.blocks[(k + 1, k)]).scale(_frac(-1, 2 * n + 1))
                    qdom.append(k)
            else:
                if k - 1 in self.kdom:
                    qb[(k - 1, k)] = (self.eval(Q_core(n), k - 1) @ self.onepT.blocks[(k - 1, k - 1)]
                                      @ self.b.blocks[(k - 1, k)]).scale(_frac(1, 2 * n + 1))
                    qdom.append(k)
        self.Q = GOp(dm, dm, qb, qdom, "Q")
        # homotopies
        self.h = self._by_parity(lambda k: self.onepk @ self.d - self.b, None, "h")
        self.l = self._by_parity(lambda k: self.onepk @ self.d,
                                 lambda k: (self.onepk @ self.d).scale(_frac(-1, k // 2 + 1)), "l")
        half = HALF
        self.H = self._by_parity(lambda k: self.h @ self.S + self.Q.scale(half), None, "H")
        self.L = self._by_parity(lambda k: self.l @ self.S + self.Q.scale(half), lambda k: self.l @ self.S, "L")
        # R
        rb, rdom = {}, []
        for k in range(N + 1):
            if k == 0:
                rdom.append(0)
                continue
            if k % 2 == 0:
                n = k // 2
                if k - 1 in self.kdom:
                    poly = R_weight(n) * K_core(n)
                    rb[(k - 1, k)] = -(self.eval(poly, k - 1) @ self.onepT.blocks[(k - 1, k - 1)] @ self.b.blocks[(k - 1, k)])
                    rdom.append(k)
            else:
                n = (k + 1) // 2
                if k + 1 in self.kdom:
                    poly = R_weight(n) * K_core(n)
                    m = self.onepk.blocks[(k + 1, k + 1)] @ self.eval(poly, k + 1) @ self.onepT.blocks[(k + 1, k + 1)] \
                        @ self.d.blocks[(k + 1, k)]
                    rb[(k + 1, k)] = m.scale(_frac(1, n))
                    rdom.append(k)
        self.R = GOp(dm, dm, rb, rdom, "R")
        half = HALF
        self.P = self.F + (self.Q @ self.partial).scale(half)
        self.P_variants = {
            "F + Q partial / 2": self.P,
            "F - partial Q / 2": self.F - (self.partial @ self.Q).scale(half),
            "F + Q delta / 2": self.F + (self.Q @ self.delta).scale(half),
            "F - delta Q / 2": self.F - (self.delta @ self.Q).scale(half),
        }
        self.phi = self.P + (self.R @ self.partial).scale(half)
        self.phi_alt = self.P - (self.delta @ self.R).scale(half)
        self.psi = self.P + (self.partial @ self.R).scale(half)
        self.psi_alt = self.P - (self.R @ self.delta).scale(half)

    def _by_parity(self, even, odd, name: str) -> GOp:
        """Operator equal to even(k) on even degrees and odd(k) (or 0) on odd degrees."""
        blocks, dom = {}, []
        for k in range(self.N + 1):
            fn = even if k % 2 == 0 else odd
            if fn is None:
                dom.append(k)
                continue
            op = fn(k)
            if k in op.dom:
                dom.append(k)
                for t in op.targets(k):
                    blocks[(t, k)] = op.blocks[(t, k)]
        return GOp(self.dims, self.dims, blocks, dom, name)


# ---------------------------------------------------------------------------


def cq_suite(fs: FormSpace, suite: Suite | None = None) -> Suite:
    """Run every identity of the comparison; each record carries its anchor string."""
    suite = suite or Suite(f"cq-homotopy {fs.A.name} / {fs.G.name} / N={fs.N}")
    with suite.timed("symbolic"):
        for name, n, ok in symbolic_checks(6):
            suite.add(f"symbolic: {name}", "g_n (id - kappa^2) = id - f_n", ok, n)
    with suite.timed("build"):
        ops = CQOperators(fs)
    I, T, x = ops.id, ops.T, ops.x
    one_minus_T = I - T
    one_minus_x = I - x
    dP, dl = ops.partial, ops.delta
    F, Q, R, P, S = ops.F, ops.Q, ops.R, ops.P, ops.S

    def rel(name, anchor, lhs, rhs):
        suite.add_degreewise(name, anchor, lhs.compare(rhs))

    with suite.timed("identities"):
        gmat = {}
        for n in range(0, 7):
            gmat[n] = ops.poly_op(lambda k, n=n: g_poly(n), f"g_{n}") @ one_minus_x
            rel(f"g_{n}(id - kappa^2) = id - f_{n} (matrix)", "g_n (id - kappa^2) = id - f_n",
                gmat[n], I - ops.poly_op(lambda k, n=n: f_poly(n), f"f_{n}"))
        rel("F commutes with kappa", "F_{2n - 1} = F_{2n} = f_{2n - 2} f_{2n - 1} f_{2n}", F @ ops.kappa, ops.kappa @ F)
        rel("F commutes with T", "F_{2n - 1} = F_{2n} = f_{2n - 2} f_{2n - 1} f_{2n}", F @ T, T @ F)
        rel("partial F - F partial = (id - T)Q", "partial F - F partial = (id - T) Q", dP @ F - F @ dP, one_minus_T @ Q)
        rel("delta F - F delta = (id - T)Q", "delta F - F delta = (id - T) Q", dl @ F - F @ dl, one_minus_T @ Q)
        rel("partial Q + Q partial = 0", "partial Q + Q partial = 0", dP @ Q + Q @ dP, GOp.zero(ops.dims, ops.dims))
        rel("delta Q + Q delta = 0", "delta Q + Q delta = 0", dl @ Q + Q @ dl, GOp.zero(ops.dims, ops.dims))
        rel("partial Q = delta Q", "partial Q = delta Q", dP @ Q, dl @ Q)
        rel("Q partial = Q delta", "Q partial = Q delta", Q @ dP, Q @ dl)
        variants = list(ops.P_variants.items())
        for nm, op in variants[1:]:
            rel(f"P: {variants[0][0]} = {nm}", "P = F + 1/2 Q partial = F - 1/2 partial Q = F + 1/2 Q delta = F - 1/2 delta Q",
                variants[0][1], op)
        rel("partial P = P partial", "partial P - P partial = 0", dP @ P, P @ dP)
        rel("delta P = P delta", "delta P - P delta = 0", dl @ P, P @ dl)
        rel("id - F = (id - kappa^2) S", "id - F = (id - kappa^2) S", I - F, one_minus_x @ S)
        rel("Seq1 = Seq2 (matrix)", "S_{2n - 1} = S_{2n} = g_{2n} + g_{2n - 1} f_{2n} + g_{2n - 2} f_{2n - 1} f_{2n}", S, ops.S_alt)
        seq3 = {}
        for k in range(0, ops.N, 2):
            if k + 2 in ops.kdom and k in ops.kdom:
                n = k // 2
                rhs_poly = f_poly(k) * (g_poly(k - 1) - g_poly(k + 1) + g_poly(k - 2) * f_poly(k - 1)
                                        - g_poly(k + 2) * f_poly(k + 1))
                seq3[k] = (ops.eval(S_poly(k) - S_poly(k + 2), k), ops.eval(rhs_poly, k))
        for k, (a, b_) in seq3.items():
            suite.add("S_2n - S_2n+2 factorization (Seq3)", "S_{2n} - S_{2n + 2} = f_{2n}(...)", a == b_, k)
        rel("partial h + h partial = id - kappa^2", "partial h + h partial = id - kappa^2", dP @ ops.h + ops.h @ dP, one_minus_x)
        suite.add_degreewise("h vanishes on odd degrees", "h_{2n + 1} = 0",
                             [(k, not any(s == k for (_, s) in ops.h.blocks), None) for k in sorted(ops.h.dom) if k % 2])
        rel("id - P = partial H + H partial", "id - P = partial H + H partial", I - P, dP @ ops.H + ops.H @ dP)
        rel("delta l + l delta = id - kappa^2", "delta l + l delta = id - kappa^2", dl @ ops.l + ops.l @ dl, one_minus_x)
        cdc = ops.c_op(True) @ ops.d @ ops.c_op()
        rel("[delta, c^-1 d c] = id - kappa", "[delta, c^{-1} d c] = id - kappa", dl @ cdc + cdc @ dl, I - ops.kappa)
        rel("id - P = delta L + L delta", "id - P = delta L + L delta", I - P, dl @ ops.L + ops.L @ dl)
        rel("delta F - F partial = (id - T)(Q + R)", "delta F - F partial = (id - T)(Q + R)", dl @ F - F @ dP, one_minus_T @ (Q + R))
        rel("partial F - F delta = (id - T)(Q - R)", "partial F - F delta = (id - T)(Q - R)", dP @ F - F @ dl, one_minus_T @ (Q - R))
        zero = GOp.zero(ops.dims, ops.dims)
        rel("delta R + R partial = 0", "delta R + R partial = 0", dl @ R + R @ dP, zero)
        rel("partial R + R delta = 0", "partial R + R delta = 0", dP @ R + R @ dl, zero)
        rel("[F, R] = 0", "[F,R] = FR - RF = 0", F @ R, R @ F)
        rel("RQ = 0", "RQ = QR = 0", R @ Q, zero)
        rel("QR = 0", "RQ = QR = 0", Q @ R, zero)
        suite.add("R_0 = 0", "R_0 = 0", not any(s == 0 for (_, s) in R.blocks), 0)
        rel("phi: P + R partial/2 = P - delta R/2", "phi = P + 1/2 R partial = P - 1/2 delta R", ops.phi, ops.phi_alt)
        rel("psi: P + partial R/2 = P - R delta/2", "psi = P + 1/2 partial R = P - 1/2 R delta", ops.psi, ops.psi_alt)
        rel("delta phi = phi partial", "phi and psi are chain maps", dl @ ops.phi, ops.phi @ dP)
        rel("partial psi = psi delta", "phi and psi are chain maps", dP @ ops.psi, ops.psi @ dl)
        quarter = flint.fmpq(1, 4)
        expansion = P @ P - (dl @ R @ F + R @ F @ dl).scale(HALF) + (R @ R @ one_minus_T).scale(quarter)
        rel("phi psi expansion", "phi psi = P^2 - 1/2(delta R F + R F delta) + 1/4 R^2(id - T)", ops.phi @ ops.psi, expansion)
        # auxiliary relations, on the degrees where they are stated
        for k in range(0, ops.N + 1):
            n = k // 2
            if k % 2 == 0 and k + 1 in ops.kdom and k <= ops.N - 2:
                Bk = ops.B.blocks[(k + 1, k)]
                Tt = ops.T.blocks[(k + 1, k + 1)]
                It = Dense.identity(ops.dims[k + 1])
                lhs = (It - ops.x.blocks[(k + 1, k + 1)]) @ ops.eval(N_poly(k + 1), k + 1) @ Bk
                rhs = ((It - Tt @ Tt) @ Bk).scale(_frac(1, k + 1))
                suite.add("cqheq1: (id - kappa^2) N_{2n+1} B = (id - T^2) B/(2n+1)",
                          "(id - kappa^2) N_{2n + 1} B = 1/(2n + 1)(id - T^2) B", lhs == rhs, k)
                lhs4 = ops.eval(N_poly(k + 1), k + 1) @ ops.onepk.blocks[(k + 1, k + 1)] @ ops.d.blocks[(k + 1, k)]
                rhs4 = (ops.onepT.blocks[(k + 1, k + 1)] @ Bk).scale(_frac(1, k + 1))
                suite.add("Seq4: N_{2n+1}(id + kappa) d = (id + T) B/(2n+1)",
                          "N_{2n + 1}(id + kappa) d = 1/(2n + 1)(id + T) B", lhs4 == rhs4, k)
            if k % 2 == 1 and k - 1 in ops.kdom:
                bk = ops.b.blocks[(k - 1, k)]
                Tt = ops.T.blocks[(k - 1, k - 1)]
                It = Dense.identity(ops.dims[k - 1])
                lhs = (It - ops.x.blocks[(k - 1, k - 1)]) @ ops.eval(N_poly(k), k - 1) @ bk
                rhs = ((It - Tt @ Tt) @ bk).scale(_frac(1, k))
                suite.add("cqheq2: (id - kappa^2) N_{2n+1} b = (id - T^2) b/(2n+1)",
                          "(id - kappa^2) N_{2n + 1} b = 1/(2n + 1)(id - T^2) b", lhs == rhs, k)
    suite.data["degrees"] = {"level": fs.N, "dims": [fs.dim(n) for n in range(fs.N + 1)]}
    return suite
