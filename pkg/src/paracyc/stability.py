"""Stability under tensoring with l(b): the twisted trace, tr_A and the corner inclusion iota_A."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from gmpy2 import mpq

from .algebras import GAlgebra, algebra_map_check, make_algebra, tensor_galgebras
from .forms import UNIT, FormSpace
from .graded import GOp, witness
from .groups import COUNTING, FiniteGroup, GModule, MeasureConvention
from .homotopy import x_map
from .linalg import Q, SparseMatrix
from .report import Suite
from .tower import HodgeLevel, _ops, level_map, tower_boundary

_ONE = mpq(1)


@dataclass(eq=False)
class AdmissiblePairing:
    """An equivariant pairing b: W x V -> Q with invariant vectors v, w and b(w, v) = 1.

    b is stored as a dim W x dim V matrix; b(x, y) = x^t b y."""

    V: GModule
    W: GModule
    b: SparseMatrix
    v: dict
    w: dict
    name: str = "pairing"

    @property
    def group(self) -> FiniteGroup:
        return self.V.group

    def pair(self, x: dict, y: dict):
        by = self.b.apply(y)
        return sum((c * by.get(k, 0) for k, c in x.items()), mpq(0))

    def problems(self) -> list[str]:
        out = [f"V: {p}" for p in self.V.check()] + [f"W: {p}" for p in self.W.check()]
        G = self.group
        for s in range(G.order):
            rv, rw = self.V.action[s], self.W.action[s]
            if rw.T @ self.b @ rv != self.b:
                out.append(f"b is not invariant under {G.labels[s]}")
            if rv.apply(self.v) != {k: Q(c) for k, c in self.v.items() if c}:
                out.append(f"v is not fixed by {G.labels[s]}")
            if rw.apply(self.w) != {k: Q(c) for k, c in self.w.items() if c}:
                out.append(f"w is not fixed by {G.labels[s]}")
        if self.pair(self.w, self.v) != 1:
            out.append("b(w, v) != 1")
        return out

    # -- the algebra l(b) = V (x) W, basis v_i (x) w_j at index i*dim W + j --
    def algebra(self) -> GAlgebra:
        nv, nw = self.V.dim, self.W.dim
        bm = self.b

        def mult(a, c):
            i, j = divmod(a, nw)
            k, l = divmod(c, nw)
            x = bm[j, k]
            return {i * nw + l: x} if x else {}

        def act(s, a):
            i, j = divmod(a, nw)
            ci, cj = self.V.action[s].col(i), self.W.action[s].col(j)
            return {p * nw + q: x * y for p, x in ci.items() for q, y in cj.items()}

        unit = None
        if nv == nw:
            m = bm.to_flint()
            if m.rank() == nv:
                inv = m.inv()  # u = sum (b^-1)_{ij} v_i (x) w_j
                unit = {i * nw + j: mpq(int(inv[i, j].p), int(inv[i, j].q))
                        for i in range(nv) for j in range(nw) if inv[i, j] != 0}
        labels = tuple(f"v{i}(x)w{j}" for i in range(nv) for j in range(nw))
        return make_algebra(self.group, nv * nw, mult, act, unit, f"l({self.name})", labels)

    def idempotent(self) -> dict:
        """p = v (x) w."""
        nw = self.W.dim
        return {i * nw + j: Q(x) * Q(y) for i, x in self.v.items() for j, y in self.w.items() if x and y}

    def twisted_trace(self, s: int) -> list:
        """tr_s on the basis: tr_s(v_i (x) w_j) = b(w_j, s.v_i)."""
        nw = self.W.dim
        out = []
        for a in range(self.V.dim * nw):
            i, j = divmod(a, nw)
            out.append(self.pair({j: _ONE}, self.V.action[s].col(i)))
        return out


def kg_pairing(G: FiniteGroup, measure: MeasureConvention = COUNTING) -> AdmissiblePairing:
    """The pairing on functions on G giving K_G: b(f, g) = integral f g, translation action."""
    n = G.order
    reg = GModule(G, n, [SparseMatrix.from_columns(n, [{G.mul(s, r): _ONE} for r in range(n)]) for s in range(n)])
    wt = measure.weight(G)
    b = SparseMatrix.identity(n).scale(wt)
    v = {r: _ONE for r in range(n)}
    w = {r: 1 / (wt * n) for r in range(n)}
    return AdmissiblePairing(reg, reg, b, v, w, f"K_G({measure.kind})")


def twisted_trace_checks(pairing: AdmissiblePairing) -> list[tuple[int, int, int, bool]]:
    """tr_s(T0 T1) = tr_s((s^-1.T1) T0) for all s and basis pairs; returns the failures."""
    L = pairing.algebra()
    G = pairing.group
    bad = []
    for s in range(G.order):
        tr = pairing.twisted_trace(s)
        ev = lambda vec: sum((c * tr[k] for k, c in vec.items()), mpq(0))  # noqa: E731
        si = G.inv(s)
        for i, j in itertools.product(range(L.dim), repeat=2):
            lhs = ev(L.mult[i][j])
            rhs = ev(L.product(L.act[si][j], {i: _ONE}))
            if lhs != rhs:
                bad.append((s, i, j, False))
    return bad


def stability_trace(A: GAlgebra, pairing: AdmissiblePairing, fs_src: FormSpace, fs_tgt: FormSpace) -> GOp:
    """tr_A on degrees 0 and 1 of Omega_G(A (x) l(b)) -> Omega_G(A).

    f(s) x (x) T -> tr_s(T) f(s) x and f(s) (x0 (x) T0) d(x1 (x) T1) -> tr_s(T0 T1) f(s) x0 dx1;
    a leading unit is read as the unit of l(b)^+, giving tr_s(T1) f(s) dx1."""
    L = pairing.algebra()
    nl, G = L.dim, A.group
    traces = [pairing.twisted_trace(s) for s in range(G.order)]

    def ev(s, vec):
        return sum((c * traces[s][k] for k, c in vec.items()), mpq(0))

    cols0 = []
    for idx in range(fs_src.dim(0)):
        g, (c,) = fs_src.word(idx, 0)
        a, k = divmod(c, nl)
        t = traces[g][k]
        cols0.append({fs_tgt.index(g, (a,)): t} if t else {})
    cols1 = []
    for idx in range(fs_src.dim(1)):
        g, (c0, c1) = fs_src.word(idx, 1)
        a1, k1 = divmod(c1, nl)
        if c0 == UNIT:
            t, a0 = traces[g][k1], UNIT
        else:
            a0, k0 = divmod(c0, nl)
            t = ev(g, L.mult[k0][k1])
        cols1.append({fs_tgt.index(g, (a0, a1)): t} if t else {})
    blocks = {(0, 0): SparseMatrix.from_columns(fs_tgt.dim(0), cols0),
              (1, 1): SparseMatrix.from_columns(fs_tgt.dim(1), cols1)}
    return GOp({n: fs_src.dim(n) for n in range(fs_src.N + 1)}, {n: fs_tgt.dim(n) for n in range(fs_tgt.N + 1)},
               blocks, (0, 1), "tr_A")


def corner_inclusion(A: GAlgebra, pairing: AdmissiblePairing, C: GAlgebra) -> SparseMatrix:
    """iota_A(a) = a (x) p as a matrix A -> A (x) l(b)."""
    p, nl = pairing.idempotent(), C.dim // A.dim
    return SparseMatrix.from_columns(C.dim, [{a * nl + k: c for k, c in p.items()} for a in range(A.dim)])


def stability_suite(A: GAlgebra, pairing: AdmissiblePairing, suite: Suite | None = None) -> Suite:
    suite = suite or Suite(f"stability {A.name} (x) l({pairing.name})")
    G = A.group
    probs = pairing.problems()
    suite.add("pairing is admissible", "b(s.w, s.v) = b(w, v), v and w invariant, b(w, v) = 1", not probs,
              detail="; ".join(probs))
    if probs:
        return suite
    L = pairing.algebra()
    lp = L.check()
    suite.add("l(b) is a G-algebra", "(v1 (x) w1)(v2 (x) w2) = v1 (x) b(w1, v2) w2", not lp, detail="; ".join(lp[:3]))
    p = pairing.idempotent()
    suite.add("p = v (x) w is an invariant idempotent", "p = v (x) w",
              L.product(p, p) == p and all(L.act_vec(s, p) == p for s in range(G.order)))
    bad = twisted_trace_checks(pairing)
    suite.add("tr_s(T0 T1) = tr_s((s^-1.T1) T0)", "tr_s(T_0 T_1) = tr_s((s^{-1} . T_1) T_0)", not bad,
              witness={"s": bad[0][0], "T0": bad[0][1], "T1": bad[0][2]} if bad else None,
              detail=f"{G.order} elements x {L.dim}^2 basis pairs")
    tr_e = pairing.twisted_trace(G.identity)
    ev = lambda vec: sum((c * tr_e[k] for k, c in vec.items()), mpq(0))  # noqa: E731
    ok = all(ev(L.mult[i][j]) == ev(L.mult[j][i]) for i in range(L.dim) for j in range(L.dim))
    suite.add("tr_e is a trace", "tr(T_0 T_1) = tr(T_1 T_0)", ok)
    suite.add("tr_s(p) = 1", "tr_s(v (x) w) = b(w, s.v)",
              all(sum((c * pairing.twisted_trace(s)[k] for k, c in p.items()), mpq(0)) == 1 for s in range(G.order)))

    C = tensor_galgebras(A, L)
    with suite.timed("forms"):
        fc, fa = FormSpace(C, 2), FormSpace(A, 2)
        lc, la = HodgeLevel(fc, 1), HodgeLevel(fa, 1)
    with suite.timed("trace"):
        tr = stability_trace(A, pairing, fc, fa)
    desc = la.top.project(tr.blocks[(1, 1)] @ fc.b(2))
    suite.add("tr_A maps b(Omega^2) into b(Omega^2)", "tr_A: X_G(A (x) l(b)) -> X_G(A)", desc.is_zero(), 2, witness(desc))
    dC, dA = tower_boundary(fc, 1), tower_boundary(fa, 1)
    for sp in (0, 1):
        lhs = level_map(dA @ tr, lc, la, sp, 1 - sp)
        rhs = level_map(tr @ dC, lc, la, sp, 1 - sp)
        suite.add("tr_A is a chain map", "tr_A is a map of paracomplexes", lhs == rhs, sp, witness(lhs - rhs))
    oc, oa = _ops(fc), _ops(fa)
    for sp in (0, 1):
        ok, wit = True, None
        pairs = [(oc.act(t), oa.act(t)) for t in range(G.order)] + [(oc.og(h), oa.og(h)) for h in range(G.order)]
        pairs.append((oc.T, oa.T))
        for X, Y in pairs:
            lhs = level_map(tr @ X, lc, la, sp, sp)
            rhs = level_map(Y @ tr, lc, la, sp, sp)
            if lhs != rhs:
                ok, wit = False, witness(lhs - rhs)
                break
        suite.add("tr_A is covariant", "tr_A commutes with the G-action, the O_G-action and T", ok, sp, wit)
    iota = corner_inclusion(A, pairing, C)
    ip = algebra_map_check(iota, A, C)
    suite.add("iota_A is an equivariant homomorphism", "iota_A(a) = a (x) p", not ip, detail="; ".join(ip[:3]))
    xi = x_map(iota, fa, fc)
    for sp in (0, 1):
        comp = level_map(tr @ xi, la, la, sp, sp)
        diff = comp - SparseMatrix.identity(la.dim(sp))
        suite.add("tr_A X_G(iota_A) = id", "p U_s = p gives [iota_A] . [tau_A] = 1", diff.is_zero(), sp, witness(diff))
    suite.data["stability"] = [{"algebra": A.name, "pairing": pairing.name, "dim_l": L.dim,
                                "x_source": list(lc.sizes.values()), "x_target": list(la.sizes.values())}]
    return suite
