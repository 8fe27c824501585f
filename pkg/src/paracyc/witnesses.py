"""Fedosov truncations and linear-system witnesses for quasifreeness and graded connections."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from gmpy2 import mpq

from .algebras import GAlgebra, make_algebra
from .forms import UNIT, FormArithmetic, _add
from .linalg import SparseMatrix, solve

_ONE = mpq(1)


class PlainForms:
    """Basis of Omega^n(A) (no group variable) with matrices of the module operations."""

    def __init__(self, A: GAlgebra):
        self.A = A
        self.arith = FormArithmetic(A)
        self._words: dict = {}

    def words(self, n: int) -> list[tuple]:
        if n not in self._words:
            m = self.A.dim
            lead = list(range(m)) if n == 0 else [UNIT] + list(range(m))
            self._words[n] = [(w0,) + rest for w0 in lead for rest in itertools.product(range(m), repeat=n)]
        return self._words[n]

    def index(self, n: int) -> dict:
        key = ("idx", n)
        if key not in self._words:
            self._words[key] = {w: i for i, w in enumerate(self.words(n))}
        return self._words[key]

    def dim(self, n: int) -> int:
        return len(self.words(n))

    def matrix(self, n_src: int, n_tgt: int, fn) -> SparseMatrix:
        idx = self.index(n_tgt)
        cols = []
        for w in self.words(n_src):
            col: dict = {}
            for tw, c in fn({w: _ONE}).items():
                _add(col, idx[tw], c)
            cols.append(col)
        return SparseMatrix.from_columns(self.dim(n_tgt), cols)

    def lmul(self, x: int, n: int) -> SparseMatrix:
        return self.matrix(n, n, lambda f: self.arith.lmul({x: _ONE}, f))

    def rmul(self, x: int, n: int) -> SparseMatrix:
        return self.matrix(n, n, lambda f: self.arith.rmul(f, {x: _ONE}))

    def act(self, s: int, n: int) -> SparseMatrix:
        return self.matrix(n, n, lambda f: self.arith.act(s, f))

    def vec(self, n: int, form: dict) -> dict:
        idx = self.index(n)
        return {idx[w]: c for w, c in form.items()}


# ---------------------------------------------------------------------------


def fedosov_truncation(A: GAlgebra, N: int) -> GAlgebra:
    """Even forms of degree <= 2N-2 with the Fedosov product w o h = wh - dw dh, higher degrees dropped."""
    if N < 1:
        raise ValueError("level must be at least 1")
    pf = PlainForms(A)
    ar = pf.arith
    top = 2 * N - 2
    basis = [w for k in range(0, top + 1, 2) for w in pf.words(k)]
    index = {w: i for i, w in enumerate(basis)}

    def mult(i, j):
        w1, w2 = basis[i], basis[j]
        prod = ar.mul({w1: _ONE}, {w2: _ONE})
        # |w1| is even, so the correction term enters with a minus sign
        corr = ar.mul(ar.d({w1: _ONE}), ar.d({w2: _ONE}))
        out: dict = {}
        for w, c in prod.items():
            if len(w) - 1 <= top:
                _add(out, index[w], c)
        for w, c in corr.items():
            if len(w) - 1 <= top:
                _add(out, index[w], -c)
        return out

    def act(s, j):
        return {index[w]: c for w, c in ar.act(s, {basis[j]: _ONE}).items()}

    labels = tuple("".join(["1" if w[0] == UNIT else A.labels[w[0]]] + ["d" + A.labels[a] for a in w[1:]])
                   for w in basis)
    out = make_algebra(A.group, len(basis), mult, act, None, f"fedosov({A.name},{N})", labels)
    out.degree_zero = [index[(a,)] for a in range(A.dim)]
    return out


def fedosov_projection(A: GAlgebra, F: GAlgebra) -> SparseMatrix:
    """The projection onto the degree-zero part, as a matrix F -> A."""
    cols = [dict() for _ in range(F.dim)]
    for a, i in enumerate(F.degree_zero):
        cols[i] = {a: _ONE}
    return SparseMatrix.from_columns(A.dim, cols)


# ---------------------------------------------------------------------------


def solve_linear_map(nrows: int, ncols: int, constraints: list) -> SparseMatrix | None:
    """Find X (nrows x ncols) with  sum_k P_k X Q_k = C  for every constraint ([(P_k, Q_k)], C).

    Returns one solution or None when the system is inconsistent.
    """
    ncol_unknown = nrows * ncols
    eq_cols = [dict() for _ in range(ncol_unknown)]
    rhs: dict = {}
    off = 0
    for terms, C in constraints:
        cr, cc = C.shape
        for P, Q in terms:
            qt = Q.T
            prow = [P.col(i) for i in range(nrows)]
            for j in range(ncols):
                qrow = qt.col(j)
                if not qrow:
                    continue
                for i in range(nrows):
                    pc = prow[i]
                    if not pc:
                        continue
                    col = eq_cols[i + nrows * j]
                    for a, pa in pc.items():
                        for b, qb in qrow.items():
                            _add(col, off + a + cr * b, pa * qb)
        for (a, b), v in C.entries().items():
            rhs[off + a + cr * b] = v
        off += cr * cc
    E = SparseMatrix.from_columns(off, eq_cols)
    sol = solve(E, SparseMatrix.from_columns(off, [rhs]))
    if sol is None:
        return None
    vec = sol.col(0)
    cols = [dict() for _ in range(ncols)]
    for u, v in vec.items():
        cols[u // nrows][u % nrows] = v
    return SparseMatrix.from_columns(nrows, cols)


@dataclass
class WitnessResult:
    feasible: bool
    map: SparseMatrix | None
    residual_ok: bool

    def __bool__(self):
        return self.feasible


def _unit_vec(n: int, i: int) -> SparseMatrix:
    return SparseMatrix.from_columns(n, [{i: _ONE}])


def quasifree_witness(A: GAlgebra) -> WitnessResult:
    """Solve for an equivariant phi: A -> Omega^2(A) with phi(xy) = phi(x)y + x phi(y) - dx dy."""
    pf = PlainForms(A)
    m, G = A.dim, A.group
    n2 = pf.dim(2)
    M = A.mult_matrix()  # m x m^2, column i*m + j
    cons = []
    for i in range(m):
        for j in range(m):
            # phi(e_i e_j) - R_j phi(e_i) - L_i phi(e_j) = -de_i de_j
            terms = [(SparseMatrix.identity(n2), M.select(cols=[i * m + j])),
                     (-pf.rmul(j, 2), _unit_vec(m, i)),
                     (-pf.lmul(i, 2), _unit_vec(m, j))]
            rhs = SparseMatrix.from_columns(n2, [{pf.index(2)[(UNIT, i, j)]: mpq(-1)}])
            cons.append((terms, rhs))
    for s in range(G.order):
        cons.append(([(pf.act(s, 2), SparseMatrix.identity(m)), (-SparseMatrix.identity(n2), A.action_matrix(s))],
                     SparseMatrix.zeros(n2, m)))
    X = solve_linear_map(n2, m, cons)
    if X is None:
        return WitnessResult(False, None, True)
    return WitnessResult(True, X, _check_quasifree(A, pf, X))


def _check_quasifree(A, pf, X) -> bool:
    m = A.dim
    ar = pf.arith
    words = pf.words(2)

    def phi(vec):
        out: dict = {}
        for k, c in vec.items():
            for r, v in X.col(k).items():
                _add(out, words[r], c * v)
        return out

    for i in range(m):
        for j in range(m):
            lhs = phi(A.mult[i][j])
            rhs: dict = {}
            for w, c in ar.rmul(phi({i: _ONE}), {j: _ONE}).items():
                _add(rhs, w, c)
            for w, c in ar.lmul({i: _ONE}, phi({j: _ONE})).items():
                _add(rhs, w, c)
            _add(rhs, (UNIT, i, j), mpq(-1))
            diff = dict(lhs)
            for w, c in rhs.items():
                _add(diff, w, -c)
            if diff:
                return False
    for s in range(A.group.order):
        if pf.act(s, 2) @ X != X @ A.action_matrix(s):
            return False
    return True


def connection_witness(A: GAlgebra, n: int) -> WitnessResult:
    """Solve for an equivariant nabla: Omega^n -> Omega^{n+1} with
    nabla(x w) = x nabla(w) and nabla(w x) = nabla(w) x + (-1)^n w dx."""
    if n < 1:
        raise ValueError("connections are defined on degrees n >= 1")
    pf = PlainForms(A)
    G = A.group
    ns, nt = pf.dim(n), pf.dim(n + 1)
    sign = -1 if n % 2 else 1
    cons = []
    for x in range(A.dim):
        cons.append(([(pf.lmul(x, n + 1), SparseMatrix.identity(ns)), (-SparseMatrix.identity(nt), pf.lmul(x, n))],
                     SparseMatrix.zeros(nt, ns)))
        # w dx as a matrix Omega^n -> Omega^{n+1}
        wdx = pf.matrix(n, n + 1, lambda f, x=x: pf.arith.mul(f, {(UNIT, x): _ONE}))
        cons.append(([(SparseMatrix.identity(nt), pf.rmul(x, n)), (-pf.rmul(x, n + 1), SparseMatrix.identity(ns))],
                     wdx.scale(sign)))
    for s in range(G.order):
        cons.append(([(pf.act(s, n + 1), SparseMatrix.identity(ns)), (-SparseMatrix.identity(nt), pf.act(s, n))],
                     SparseMatrix.zeros(nt, ns)))
    X = solve_linear_map(nt, ns, cons)
    if X is None:
        return WitnessResult(False, None, True)
    ok = True
    for terms, C in cons:
        tot = SparseMatrix.zeros(*C.shape)
        for P, Qm in terms:
            tot = tot + P @ X @ Qm
        ok = ok and tot == C
    return WitnessResult(True, X, ok)
