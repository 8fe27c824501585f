"""Chain-level dual comparison: Omega_G(A (x) K_G)_G against Omega(A x| G) for finite G.

Counting measure throughout.  K_G has basis [r,t] (index r*|G| + t) with
[r,p][q,t] = delta_{pq} [r,t] and s.[r,t] = [sr, st]; a basis element of
C = A (x) K_G is a (x) [r,t] at index a*|G|^2 + r*|G| + t.
"""
from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .algebras import GAlgebra, algebra_KG, crossed_product, forget_action, make_algebra, tensor_galgebras
from .errors import NotUnital
from .forms import UNIT, FormSpace
from .graded import witness
from .groups import COUNTING
from .homotopy import x_map
from .linalg import Q, SparseMatrix, Subquotient, hstack, rank
from .report import Suite

_ONE = mpq(1)


def _add(acc: dict, k, c):
    v = acc.get(k, 0) + c
    if v:
        acc[k] = v
    else:
        acc.pop(k, None)


def _words(slots: list) -> dict:
    """Expand a list of slot vectors ({basis: coeff} or UNIT) into {word: coeff}."""
    cur = {(): _ONE}
    for sl in slots:
        nxt: dict = {}
        if sl == UNIT:
            nxt = {w + (UNIT,): c for w, c in cur.items()}
        else:
            for w, c in cur.items():
                for k, x in sl.items():
                    _add(nxt, w + (k,), c * x)
        cur = nxt
    return cur


@dataclass(eq=False)
class DualSetup:
    A: GAlgebra
    K: GAlgebra
    C: GAlgebra  # A (x) K_G
    B: GAlgebra  # A x| G, counting measure
    fA: FormSpace
    fC: FormSpace
    fB: FormSpace  # ordinary forms of B (trivial group)
    N: int

    @property
    def n(self) -> int:
        return self.A.group.order

    def split(self, c: int) -> tuple[int, int, int]:
        n = self.n
        a, k = divmod(c, n * n)
        r, t = divmod(k, n)
        return a, r, t

    def join(self, a: int, r: int, t: int) -> int:
        n = self.n
        return a * n * n + r * n + t

    def unit_at(self, q: int) -> dict:
        """1_A (x) [q, q]."""
        return {self.join(a, q, q): Q(c) for a, c in self.A.unit.items()}


def dual_setup(A: GAlgebra, N: int = 3) -> DualSetup:
    K = algebra_KG(A.group, COUNTING)
    C = tensor_galgebras(A, K)
    B = crossed_product(A, COUNTING)
    return DualSetup(A, K, C, B, FormSpace(A, N), FormSpace(C, N), FormSpace(forget_action(B), N), N)


def _chain(ds: DualSetup, g: int, rs: list) -> bool:
    """s_j = r_{j+1} along the word and s_last = g r_first."""
    G = ds.A.group
    for (_, _, t), (_, r, _) in zip(rs, rs[1:]):
        if t != r:
            return False
    return rs[-1][2] == G.mul(g, rs[0][1])


def dual_trace(ds: DualSetup, n: int) -> SparseMatrix:
    """Tr: Omega^n_G(A (x) K_G) -> Omega^n_G(A), the kernel product integrated around the loop r_0 .. s r_0."""
    fC, fA = ds.fC, ds.fA
    cols = []
    for idx in range(fC.dim(n)):
        g, w = fC.word(idx, n)
        lead = w[0] == UNIT
        rs = [ds.split(c) for c in (w[1:] if lead else w)]
        if not _chain(ds, g, rs):
            cols.append({})
            continue
        word = ((UNIT,) if lead else ()) + tuple(a for a, _, _ in rs)
        cols.append({fA.index(g, word): _ONE})
    return SparseMatrix.from_columns(fA.dim(n), cols)


def dual_tau(ds: DualSetup, n: int) -> SparseMatrix:
    """tau: Omega^n_G(A (x) K_G) -> Omega^n(A x| G):
    s (a_0 [r_0,r_1]) d(a_1 [r_1,r_2]) .. -> (r_0^-1.a_0 x| r_0^-1 r_1) d(r_1^-1.a_1 x| r_1^-1 r_2) .. d(.. x| r_n^-1 s r_0)."""
    fC, fB, A = ds.fC, ds.fB, ds.A
    G, m = A.group, ds.n
    cols = []
    for idx in range(fC.dim(n)):
        g, w = fC.word(idx, n)
        lead = w[0] == UNIT
        rs = [ds.split(c) for c in (w[1:] if lead else w)]
        if not _chain(ds, g, rs):
            cols.append({})
            continue
        slots = [UNIT] if lead else []
        for i, (a, r, _) in enumerate(rs):
            nxt = rs[i + 1][1] if i + 1 < len(rs) else G.mul(g, rs[0][1])
            ri = G.inv(r)
            u = G.mul(ri, nxt)
            slots.append({k * m + u: c for k, c in A.act[ri][a].items()})
        cols.append({fB.index(0, wd): c for wd, c in _words(slots).items()})
    return SparseMatrix.from_columns(fB.dim(n), cols)


def dual_phi(ds: DualSetup, n: int) -> SparseMatrix:
    """phi: Omega^n(A x| G) -> Omega^n_G(A (x) K_G):
    (a_0 x| s_0) d(a_1 x| s_1) .. -> s_0..s_n (x) a_0[e,s_0] d(s_0.a_1)[s_0,s_0 s_1] .."""
    fC, fB, A = ds.fC, ds.fB, ds.A
    G, m = A.group, ds.n
    cols = []
    for idx in range(fB.dim(n)):
        _, w = fB.word(idx, n)
        lead = w[0] == UNIT
        body = w[1:] if lead else w
        slots = [UNIT] if lead else []
        prev = G.identity
        for b in body:
            a, u = divmod(b, m)
            cur = G.mul(prev, u)
            slots.append({ds.join(k, prev, cur): c for k, c in A.act[prev][a].items()})
            prev = cur
        cols.append({fC.index(prev, wd): c for wd, c in _words(slots).items()})
    return SparseMatrix.from_columns(fC.dim(n), cols)


def _m_index(ds: DualSetup, g: int, rs: list, lead: bool):
    """The number M of the homotopy (None for M = infinity); positions are slot positions 0..n
    for a leading a_0 and 1..n otherwise."""
    G = ds.A.group
    first = 1 if lead else 0
    nn = len(rs) - 1 + first
    for j in range(len(rs) - 1):
        if rs[j][2] != rs[j + 1][1]:
            return j + first
    if G.mul(G.inv(g), rs[-1][2]) == rs[0][1]:
        return None
    return nn


def dual_homotopy(ds: DualSetup, n: int) -> SparseMatrix:
    """h: Omega^n_G(A (x) K_G) -> Omega^{n+1}_G(A (x) K_G), on representatives."""
    if ds.A.unit is None:
        raise NotUnital("the homotopy inserts d1_A")
    fC, A = ds.fC, ds.A
    G = A.group
    cols = []
    for idx in range(fC.dim(n)):
        g, w = fC.word(idx, n)
        lead = w[0] == UNIT
        body = w[1:] if lead else w
        rs = [ds.split(c) for c in body]
        M = _m_index(ds, g, rs, lead)
        out: dict = {}
        if M is None:
            cols.append(out)
            continue
        # slot vectors, positions 0..n (position 0 is the unit for unit-leading words)
        base = [UNIT] if lead else []
        base += [{c: _ONE} for c in body]
        sM = rs[M - (1 if lead else 0)][2]
        ins = base[: M + 1] + [ds.unit_at(sM)] + base[M + 1:]
        sign = -1 if M % 2 else 1
        for wd, c in _words(ins).items():
            _add(out, fC.index(g, wd), sign * c)
        if lead:
            gi = G.inv(g)
            an, rn, sn = rs[-1]
            q = G.mul(gi, sn)
            if q != rs[0][1]:
                sign2 = -1 if (M + n) % 2 else 1
                if M == n:
                    extra = [UNIT, ds.unit_at(q)] + base[1:]
                else:
                    lead_vec = {ds.join(k, G.mul(gi, rn), q): c for k, c in A.act[gi][an].items()}
                    mid = base[1: n]  # da_1 .. da_{n-1}
                    extra = [lead_vec, ds.unit_at(q)] + mid[:M] + [ds.unit_at(sM)] + mid[M:]
                for wd, c in _words(extra).items():
                    _add(out, fC.index(g, wd), sign2 * c)
        cols.append(out)
    return SparseMatrix.from_columns(fC.dim(n + 1), cols)


def coinvariants(fs: FormSpace, n: int) -> Subquotient:
    """Omega^n_G modulo the span of t.m - m."""
    G = fs.G
    I = fs.identity(n)
    gens = [fs.act(t, n) - I for t in range(G.order) if t != G.identity]
    return Subquotient(fs.dim(n), hstack(gens) if gens else SparseMatrix.zeros(fs.dim(n), 0))


def averaging_rank(fs: FormSpace, n: int) -> int:
    G = fs.G
    tot = SparseMatrix.zeros(fs.dim(n), fs.dim(n))
    for t in range(G.order):
        tot = tot + fs.act(t, n)
    return rank(tot)


def invariant_corner(ds: DualSetup) -> SparseMatrix:
    """iota(a) = a (x) p with p = chi (x) chi, chi constant and sum chi^2 = 1, i.e. p = |G|^-1 sum [r,t]."""
    m = ds.n
    p = mpq(1, m)
    return SparseMatrix.from_columns(ds.C.dim, [{ds.join(a, r, t): p for r in range(m) for t in range(m)}
                                                for a in range(ds.A.dim)])


# ---------------------------------------------------------------------------
# Morita homotopy on the first column (K with trivial action, chi = delta_e)


def trivial_kernels(G) -> GAlgebra:
    K = algebra_KG(G, COUNTING)
    return make_algebra(G, K.dim, lambda i, j: K.mult[i][j], lambda s, j: {j: 1}, K.unit, "K(trivial action)", K.labels)


def morita_check(A: GAlgebra, N: int = 3) -> list[tuple[str, int, bool, dict | None]]:
    """Loday's presimplicial homotopy on the first column of Omega_G(A (x) K):
    sum_j (-1)^j h_j satisfies b h + h b = id - Omega(iota) tau, iota(x) = x (x) [e,e]."""
    G = A.group
    if A.unit is None:
        raise NotUnital("the presimplicial homotopy inserts 1_A")
    m = G.order
    K = trivial_kernels(G)
    C = tensor_galgebras(A, K)
    fC, fA = FormSpace(C, N), FormSpace(A, N)
    e = G.identity

    def split(c):
        a, k = divmod(c, m * m)
        r, t = divmod(k, m)
        return a, r, t

    def join(a, r, t):
        return a * m * m + r * m + t

    def first(n):
        return [i for i in range(fC.dim(n)) if n == 0 or fC.word(i, n)[1][0] != UNIT]

    def tau(n):
        cols = []
        for i in first(n):
            g, w = fC.word(i, n)
            rs = [split(c) for c in w]
            ok = all(rs[j][2] == rs[j + 1][1] for j in range(n)) and rs[n][2] == rs[0][1]
            cols.append({fA.index(g, tuple(a for a, _, _ in rs)): _ONE} if ok else {})
        return SparseMatrix.from_columns(fA.dim(n), cols)

    def first_a(n):
        return [i for i in range(fA.dim(n)) if n == 0 or fA.word(i, n)[1][0] != UNIT]

    def iota(n):
        cols = []
        for i in first_a(n):
            g, w = fA.word(i, n)
            cols.append({fC.index(g, tuple(join(a, e, e) for a in w)): _ONE})
        return SparseMatrix.from_columns(fC.dim(n), cols)

    def hmap(n):
        """sum_j (-1)^j h_j: x_0|p_0><chi|, x_k|chi><chi| for 0 < k <= j along a chain p_k = q_{k-1},
        then 1|chi><q_j|, the rest unchanged."""
        cols = []
        for i in first(n):
            g, w = fC.word(i, n)
            rs = [split(c) for c in w]
            out: dict = {}
            for j in range(n + 1):
                if any(rs[k][1] != rs[k - 1][2] for k in range(1, j + 1)):
                    continue  # the corner entries are matrix entries: p_k = q_{k-1}
                slots = [{join(rs[0][0], rs[0][1], e): _ONE}]
                slots += [{join(a, e, e): _ONE} for a, _, _ in rs[1: j + 1]]
                slots.append({join(a, e, rs[j][2]): Q(c) for a, c in A.unit.items()})
                slots += [{c: _ONE} for c in w[j + 1:]]
                sign = -1 if j % 2 else 1
                for wd, c in _words(slots).items():
                    _add(out, fC.index(g, wd), sign * c)
            cols.append(out)
        return SparseMatrix.from_columns(fC.dim(n + 1), cols)

    res = []
    h = {n: hmap(n) for n in range(N)}
    for n in range(N):
        idx_n = first(n)
        tn = tau(n).select(rows=first_a(n))
        ok = (tn @ iota(n).select(rows=idx_n)) == SparseMatrix.identity(len(first_a(n)))
        res.append(("tau Omega(iota) = id", n, ok, None))
        b_up = fC.b(n + 1).select(rows=idx_n, cols=first(n + 1))
        lhs = b_up @ h[n].select(rows=first(n + 1))
        if n > 0:
            lhs = lhs + h[n - 1].select(rows=idx_n) @ fC.b(n).select(rows=first(n - 1), cols=idx_n)
        rhs = SparseMatrix.identity(len(idx_n)) - iota(n).select(rows=idx_n) @ tn
        diff = lhs - rhs
        res.append(("b h + h b = id - Omega(iota) tau", n, diff.is_zero(), witness(diff)))
    return res


# ---------------------------------------------------------------------------


def dual_greenjulg_suite(A: GAlgebra, N: int = 3, suite: Suite | None = None, morita: bool = False) -> Suite:
    suite = suite or Suite(f"dual Green-Julg {A.name} over {A.group.name}")
    if A.unit is None:
        raise NotUnital(f"{A.name} has no unit; unitarize it first")
    suite.notes.append("measure: counting")
    with suite.timed("setup"):
        ds = dual_setup(A, N)
    fC, fA, fB = ds.fC, ds.fA, ds.fB
    G = A.group
    with suite.timed("maps"):
        Tr = {k: dual_trace(ds, k) for k in range(N + 1)}
        tau = {k: dual_tau(ds, k) for k in range(N + 1)}
        phi = {k: dual_phi(ds, k) for k in range(N + 1)}
    # Tr is a covariant map of paramixed complexes
    for k in range(1, N + 1):
        diff = Tr[k - 1] @ fC.b(k) - fA.b(k) @ Tr[k]
        suite.add("Tr b = b Tr", "Tr commutes with the Hochschild boundary b", diff.is_zero(), k, witness(diff))
    for k in range(N):
        diff = Tr[k + 1] @ fC.d(k) - fA.d(k) @ Tr[k]
        suite.add("Tr d = d Tr", "Tr commutes with the operator d", diff.is_zero(), k, witness(diff))
    for k in range(N + 1):
        ok, wit = True, None
        for t in range(G.order):
            for X, Y in ((fC.act(t, k), fA.act(t, k)), (fC.og(t, k), fA.og(t, k))):
                diff = Tr[k] @ X - Y @ Tr[k]
                if not diff.is_zero():
                    ok, wit = False, witness(diff)
        suite.add("Tr is covariant", "Tr is a covariant map", ok, k, wit)
    io = invariant_corner(ds)
    xi = x_map(io, fA, fC, tuple(range(N + 1)))
    for k in range(N + 1):
        diff = Tr[k] @ xi.blocks[(k, k)] - SparseMatrix.identity(fA.dim(k))
        suite.add("Tr Omega(iota) = id", "tau Omega_G(iota) = id, p = chi (x) chi with sum chi^2 = 1", diff.is_zero(), k,
                  witness(diff))
    # coinvariants both ways
    with suite.timed("coinvariants"):
        co = {k: coinvariants(fC, k) for k in range(N + 1)}
    dims = []
    for k in range(N + 1):
        ar = averaging_rank(fC, k)
        dims.append({"degree": k, "coinvariants": co[k].dim, "averaging": ar, "Omega(A x| G)": fB.dim(k)})
        suite.add("coinvariants: cokernel = image of averaging", "coinvariants computed as quotient and by averaging",
                  ar == co[k].dim, k, detail=f"{co[k].dim} vs {ar}")
    suite.data["dual_dims"] = dims
    # tau and phi
    for k in range(N + 1):
        diff = tau[k] @ phi[k] - SparseMatrix.identity(fB.dim(k))
        suite.add("tau phi = id", "tau phi = id", diff.is_zero(), k, witness(diff))
        gens = co[k].generators
        tg = tau[k] @ gens
        suite.add("tau vanishes on coinvariant relations", "tau is well-defined since it vanishes on coinvariants",
                  tg.is_zero(), k, witness(tg))
    for k in range(1, N + 1):
        diff = tau[k - 1] @ fC.b(k) - fB.b(k) @ tau[k]
        suite.add("tau b = b tau", "phi and tau are maps of mixed complexes", diff.is_zero(), k, witness(diff))
        diff = co[k - 1].project(phi[k - 1] @ fB.b(k) - fC.b(k) @ phi[k])
        suite.add("phi b = b phi", "phi and tau are maps of mixed complexes", diff.is_zero(), k, witness(diff))
    for k in range(N):
        diff = tau[k + 1] @ fC.d(k) - fB.d(k) @ tau[k]
        suite.add("tau d = d tau", "phi and tau commute with d", diff.is_zero(), k, witness(diff))
        diff = co[k + 1].project(phi[k + 1] @ fB.d(k) - fC.d(k) @ phi[k])
        suite.add("phi d = d phi", "phi and tau commute with d", diff.is_zero(), k, witness(diff))
    for k in range(N + 1):
        pt = co[k].project(phi[k] @ tau[k] @ co[k].section)
        suite.add("(phi tau)^2 = phi tau", "phi tau idempotent", pt @ pt == pt, k)
    # the homotopy
    with suite.timed("homotopy"):
        h = {k: dual_homotopy(ds, k) for k in range(N)}
    for k in range(N):
        img = co[k + 1].project(h[k] @ co[k].generators)
        suite.add("h preserves coinvariant relations", "coinvariants are mapped to coinvariants", img.is_zero(), k,
                  witness(img))
    for k in range(N):
        lhs = fC.b(k + 1) @ h[k]
        if k > 0:
            lhs = lhs + h[k - 1] @ fC.b(k)
        rhs = fC.identity(k) - phi[k] @ tau[k]
        diff = co[k].project((lhs - rhs) @ co[k].section)
        suite.add("b h + h b = id - phi tau", "bh + hb = id - phi tau", diff.is_zero(), k, witness(diff))
    if morita:
        for nm, k, ok, wit in morita_check(A, N):
            suite.add(nm, "presimplicial homotopy between Omega_G(iota) tau and id", ok, k, wit)
    return suite
