"""Hodge towers, the Hodge filtration, the equivariant X-complex and its variants."""
from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from .algebras import GAlgebra, unitarize
from .errors import LevelTooHigh
from .forms import UNIT, FormSpace
from .graded import GOp, ParaComplex, witness
from .linalg import SparseMatrix, Subquotient, block_matrix, hstack, rank

# ---------------------------------------------------------------------------
# primitive operators as graded operators


class FormOps:
    """The primitive operators of a FormSpace packaged as graded operators."""

    def __init__(self, fs: FormSpace):
        self.fs = fs
        N = fs.N
        self.dims = {n: fs.dim(n) for n in range(N + 1)}
        dm = self.dims
        self.id = GOp.identity(dm, name="id")
        self.d = GOp.homogeneous(dm, dm, 1, {n: fs.d(n) for n in range(N)}, "d")
        self.b = GOp(dm, dm, {(n - 1, n): fs.b(n) for n in range(1, N + 1)}, range(N + 1), "b")
        self.T = GOp.homogeneous(dm, dm, 0, {n: fs.T(n) for n in range(N + 1)}, "T")
        self.kappa = GOp.homogeneous(dm, dm, 0, {n: fs.kappa(n) for n in range(N)}, "kappa")
        self.B = GOp.homogeneous(dm, dm, 1, {n: fs.B(n) for n in range(N - 1)}, "B")

    def act(self, t: int) -> GOp:
        fs = self.fs
        return GOp.homogeneous(self.dims, self.dims, 0, {n: fs.act(t, n) for n in range(fs.N + 1)}, f"rho{t}")

    def og(self, h: int) -> GOp:
        fs = self.fs
        return GOp.homogeneous(self.dims, self.dims, 0, {n: fs.og(h, n) for n in range(fs.N + 1)}, f"delta{h}")

    def kappa_power(self, j: int) -> GOp:
        fs = self.fs
        return GOp.homogeneous(self.dims, self.dims, 0, {n: fs.kappa_power(n, j) for n in range(fs.N)}, f"kappa^{j}")


def paramixed_checks(fs: FormSpace) -> list[tuple[str, int, bool, dict | None]]:
    """d^2 = b^2 = B^2 = 0 and Bb + bB = id - T, per degree on the computable range."""
    N = fs.N
    out = []

    def rec(name, n, m):
        out.append((name, n, m.is_zero(), witness(m)))

    for n in range(N - 1):
        rec("d^2 = 0", n, fs.d(n + 1) @ fs.d(n))
    for n in range(2, N + 1):
        rec("b^2 = 0", n, fs.b(n - 1) @ fs.b(n))
    for n in range(N - 2):
        rec("B^2 = 0", n, fs.B(n + 1) @ fs.B(n))
    for n in range(N - 1):
        lhs = fs.b(n + 1) @ fs.B(n)
        if n > 0:
            lhs = lhs + fs.B(n - 1) @ fs.b(n)
        rec("Bb + bB = id - T", n, lhs - (fs.identity(n) - fs.T(n)))
    return out


def karoubi_lemma_checks(fs: FormSpace) -> list[tuple[str, int, bool, dict | None]]:
    """The relations a)-e) between kappa, d, b and T on Omega^n."""
    N = fs.N
    out = []

    def rec(name, n, m):
        out.append((name, n, m.is_zero(), witness(m)))

    for n in range(N):
        kn = fs.kappa_power(n, n)
        T = fs.T(n)
        if n + 1 <= N - 1:
            # a) kappa^{n+1} d = T d on Omega^n (kappa on degree n+1)
            rec("a) kappa^(n+1) d = T d", n, fs.kappa_power(n + 1, n + 1) @ fs.d(n) - fs.T(n + 1) @ fs.d(n))
            # b) kappa^n = T + b kappa^n d
            rec("b) kappa^n = T + b kappa^n d", n, kn - T - fs.b(n + 1) @ fs.kappa_power(n + 1, n) @ fs.d(n))
        if n >= 1:
            # c) b kappa^n = b T
            rec("c) b kappa^n = b T", n, fs.b(n) @ kn - fs.b(n) @ T)
        # d) kappa^{n+1} = (id - db) T
        db = fs.d(n - 1) @ fs.b(n) if n >= 1 else SparseMatrix.zeros(fs.dim(0), fs.dim(0))
        rec("d) kappa^(n+1) = (id - db) T", n, fs.kappa_power(n, n + 1) - (fs.identity(n) - db) @ T)
        # e) (kappa^{n+1} - T)(kappa^n - T) = 0
        rec("e) (kappa^(n+1) - T)(kappa^n - T) = 0", n, (fs.kappa_power(n, n + 1) - T) @ (kn - T))
    for n in range(N - 1):
        rec("kappa d = d kappa", n, fs.kappa(n + 1) @ fs.d(n) - fs.d(n) @ fs.kappa(n))
    for n in range(1, N):
        rec("kappa b = b kappa", n, fs.kappa(n - 1) @ fs.b(n) - fs.b(n) @ fs.kappa(n))
    for n in range(N):
        rec("[d, T] = 0", n, fs.T(n + 1) @ fs.d(n) - fs.d(n) @ fs.T(n))
        rec("[kappa, T] = 0", n, fs.T(n) @ fs.kappa(n) - fs.kappa(n) @ fs.T(n))
    for n in range(1, N + 1):
        rec("[b, T] = 0", n, fs.T(n - 1) @ fs.b(n) - fs.b(n) @ fs.T(n))
    for n in range(N - 1):
        rec("[B, T] = 0", n, fs.T(n + 1) @ fs.B(n) - fs.B(n) @ fs.T(n))
    return out


def covariance_checks(fs: FormSpace) -> list[tuple[str, int, bool, dict | None]]:
    """The primitive operators commute with the G-action and the O_G-action."""
    N, G = fs.N, fs.G
    out = []
    for kind, get in (("G", fs.act), ("O_G", fs.og)):
        for t in range(G.order):
            for n in range(N + 1):
                bad = None
                mats = []
                if n < N:
                    mats.append(("d", get(t, n + 1) @ fs.d(n) - fs.d(n) @ get(t, n)))
                    mats.append(("kappa", get(t, n) @ fs.kappa(n) - fs.kappa(n) @ get(t, n)))
                if n >= 1:
                    mats.append(("b", get(t, n - 1) @ fs.b(n) - fs.b(n) @ get(t, n)))
                if n < N - 1:
                    mats.append(("B", get(t, n + 1) @ fs.B(n) - fs.B(n) @ get(t, n)))
                mats.append(("T", get(t, n) @ fs.T(n) - fs.T(n) @ get(t, n)))
                ok = True
                for nm, m in mats:
                    if not m.is_zero():
                        ok, bad = False, dict(witness(m), operator=nm)
                        break
                out.append((f"{kind}-covariance [{t}]", n, ok, bad))
    return out


# ---------------------------------------------------------------------------
# Hodge towers


class HodgeLevel:
    """theta^n Omega_G(A): degrees 0..n-1 in full and Omega^n modulo b(Omega^{n+1})."""

    def __init__(self, fs: FormSpace, n: int):
        if n < 0 or n > fs.N - 1:
            raise LevelTooHigh(f"level {n} needs forms up to degree {n + 1}, space built to {fs.N}")
        self.fs, self.n = fs, n
        self.top = Subquotient(fs.dim(n), fs.b(n + 1))
        self.sizes = {j: fs.dim(j) for j in range(n)}
        self.sizes[n] = self.top.dim
        self.parts = ([j for j in range(n + 1) if j % 2 == 0], [j for j in range(n + 1) if j % 2 == 1])

    def dim(self, parity: int) -> int:
        return sum(self.sizes[j] for j in self.parts[parity])

    def offset(self, j: int) -> int:
        p = self.parts[j % 2]
        return sum(self.sizes[k] for k in p[: p.index(j)])

    def induced(self, t: int, s: int, m: SparseMatrix) -> SparseMatrix:
        if s == self.n:
            m = m @ self.top.section
        if t == self.n:
            m = self.top.project(m)
        return m

    def assemble(self, op: GOp, src_par: int, tgt_par: int) -> SparseMatrix:
        """Matrix of the operator induced by op, from one parity part to another."""
        rows, cols = self.parts[tgt_par], self.parts[src_par]
        blocks = []
        for t in rows:
            row = []
            for s in cols:
                if s not in op.dom:
                    raise LevelTooHigh(f"operator {op.name} unknown on degree {s}")
                m = op.blocks.get((t, s))
                row.append(None if m is None else self.induced(t, s, m))
            blocks.append(row)
        return block_matrix(blocks, [self.sizes[t] for t in rows], [self.sizes[s] for s in cols])

    def descends(self, op: GOp) -> tuple[bool, dict | None]:
        """op maps b(Omega^{n+1}) into b(Omega^{n+1}) plus degrees above n."""
        gens = self.fs.b(self.n + 1)
        for t in op.targets(self.n):
            if t > self.n:
                continue
            img = op.blocks[(t, self.n)] @ gens
            if t == self.n:
                img = self.top.project(img)
            if not img.is_zero():
                return False, witness(img)
        return True, None

    def paracomplex(self, boundary: GOp, symmetry: GOp, name: str, with_actions: bool = True) -> ParaComplex:
        d0 = self.assemble(boundary, 0, 1)
        d1 = self.assemble(boundary, 1, 0)
        T0 = self.assemble(symmetry, 0, 0)
        T1 = self.assemble(symmetry, 1, 1)
        pc = ParaComplex(d0, d1, T0, T1, name=name, info={"level": self.n, "parts": self.parts,
                                                          "sizes": dict(self.sizes)})
        if with_actions:
            ops = _ops(self.fs)
            G = self.fs.G
            acts = [ops.act(t) for t in range(G.order)]
            ogs = [ops.og(h) for h in range(G.order)]
            pc.act0 = [self.assemble(a, 0, 0) for a in acts]
            pc.act1 = [self.assemble(a, 1, 1) for a in acts]
            pc.og0 = [self.assemble(a, 0, 0) for a in ogs]
            pc.og1 = [self.assemble(a, 1, 1) for a in ogs]
        return pc


def level_map(op: GOp, src: HodgeLevel, tgt: HodgeLevel, src_par: int | None = None,
              tgt_par: int | None = None) -> SparseMatrix:
    """Matrix of the map between two Hodge levels induced by op.

    Without parities the spaces are ordered by degree (0..n); components
    landing above the target level are dropped."""
    cols = list(range(src.n + 1)) if src_par is None else src.parts[src_par]
    rows = list(range(tgt.n + 1)) if tgt_par is None else tgt.parts[tgt_par]
    blocks = []
    for t in rows:
        row = []
        for s in cols:
            if s not in op.dom:
                raise LevelTooHigh(f"operator {op.name} unknown on degree {s}")
            m = op.blocks.get((t, s))
            if m is not None:
                if s == src.n:
                    m = m @ src.top.section
                if t == tgt.n:
                    m = tgt.top.project(m)
            row.append(m)
        blocks.append(row)
    return block_matrix(blocks, [tgt.sizes[t] for t in rows], [src.sizes[s] for s in cols])


def _ops(fs: FormSpace) -> FormOps:
    ops = fs._cache.get("__ops__")
    if ops is None:
        ops = FormOps(fs)
        fs._cache["__ops__"] = ops
    return ops


def tower_boundary(fs: FormSpace, n: int) -> GOp:
    """B + b on degrees 0..n, leaving out the component of B that leaves the tower."""
    ops = _ops(fs)
    blocks = {k: v for k, v in ops.b.blocks.items() if k[1] <= n}
    blocks.update({k: v for k, v in ops.B.blocks.items() if k[0] <= n})
    return GOp(ops.dims, ops.dims, blocks, range(n + 1), "B+b")


def hodge_level(fs: FormSpace, n: int, with_actions: bool = True) -> ParaComplex:
    """theta^n Omega_G(A) with boundary B + b."""
    lvl = HodgeLevel(fs, n)
    ops = _ops(fs)
    pc = lvl.paracomplex(tower_boundary(fs, n), ops.T, f"theta^{n}", with_actions)
    pc.info["tower"] = lvl
    return pc


def hodge_filtration(fs: FormSpace, n: int, k: int) -> tuple[SparseMatrix, SparseMatrix]:
    """Generators (even part, odd part) of F^k theta^n in tower coordinates:
    b(Omega^{k+1}) in degree k, then every summand of degree k+1..n."""
    if not -1 <= k <= n:
        raise ValueError("filtration index must satisfy -1 <= k <= n")
    lvl = HodgeLevel(fs, n)
    gens: tuple[list, list] = ([], [])
    for j in range(max(k, 0), n + 1):
        par, off, total = j % 2, lvl.offset(j), lvl.dim(j % 2)
        if j == k:
            if k == n:
                continue
            cols = [{off + r: v for r, v in c.items()} for c in fs.b(k + 1).columns()]
        else:
            cols = [{off + i: mpq(1)} for i in range(lvl.sizes[j])]
        gens[par].append(SparseMatrix.from_columns(total, cols))
    out = []
    for par in (0, 1):
        out.append(hstack(gens[par]) if gens[par] else SparseMatrix.zeros(lvl.dim(par), 0))
    return out[0], out[1]


def filtration_closed(pc: ParaComplex, gens: tuple[SparseMatrix, SparseMatrix]) -> bool:
    """Is the span of the generators closed under the boundary?"""
    g0, g1 = gens
    img1 = pc.d0 @ g0  # lands in odd
    img0 = pc.d1 @ g1
    return rank(hstack([g1, img1])) == rank(g1) and rank(hstack([g0, img0])) == rank(g0)


def x_complex(A: GAlgebra, fs: FormSpace | None = None) -> ParaComplex:
    """X_G(A) = theta^1: Omega^0_G -> Omega^1_G / b(Omega^2_G) with boundaries d and b."""
    fs = fs if fs is not None and fs.N >= 2 else FormSpace(A, 2)
    pc = hodge_level(fs, 1)
    pc.name = "X_G"
    return pc


def xdiff_boundary(fs: FormSpace, top: int | None = None) -> GOp:
    """The X_G(TA) boundary on forms: b - (1+kappa)d on odd degrees, -sum kappa^{2j} b + B on Omega^{2m}.

    With `top` given, components landing above degree top are left out."""
    ops = _ops(fs)
    N, dm = fs.N, ops.dims
    top = N + 1 if top is None else top
    blocks = {}
    dom = []
    for k in range(min(N, top) + 1):
        up = k + 1 <= top
        if k % 2 == 1:
            if up and k + 1 > N - 1:  # needs kappa on degree k+1
                continue
            blocks[(k - 1, k)] = fs.b(k)
            if up:
                blocks[(k + 1, k)] = -(fs.d(k) + fs.kappa(k + 1) @ fs.d(k))
            dom.append(k)
        else:
            if up and k > N - 2:
                continue
            m = k // 2
            if up:
                blocks[(k + 1, k)] = fs.B(k)
            if m > 0:
                acc = SparseMatrix.zeros(fs.dim(k - 1), fs.dim(k - 1))
                for j in range(m):
                    acc = acc + fs.kappa_power(k - 1, 2 * j)
                blocks[(k - 1, k)] = -(acc @ fs.b(k))
            dom.append(k)
    return GOp(dm, dm, blocks, dom, "dX")


def x_boundary_on_tower(fs: FormSpace, n: int) -> ParaComplex:
    lvl = HodgeLevel(fs, n)
    pc = lvl.paracomplex(xdiff_boundary(fs, n), _ops(fs).T, f"theta^{n} (X-boundary)")
    pc.info["tower"] = lvl
    return pc


def rescale_c(k: int) -> mpq:
    """c_{2m} = c_{2m+1} = (-1)^m m!."""
    m = k // 2
    return mpq((-1) ** m * factorial(m))


def delta_conjugated(fs: FormSpace, top: int | None = None) -> GOp:
    """c^{-1}(B + b)c."""
    ops = _ops(fs)
    bd = ops.B + ops.b if top is None else tower_boundary(fs, top)
    blocks = {(t, s): m.scale(rescale_c(s) / rescale_c(t)) for (t, s), m in bd.blocks.items()}
    return GOp(bd.src_dims, bd.tgt_dims, blocks, bd.dom, "delta")


def delta_closed(fs: FormSpace, top: int | None = None) -> GOp:
    """B - m b on Omega^{2m} and -B/(m+1) + b on Omega^{2m+1}."""
    ops = _ops(fs)
    bd = ops.B + ops.b if top is None else tower_boundary(fs, top)
    blocks = {}
    for (t, s), m in bd.blocks.items():
        half = s // 2
        if s % 2 == 0:
            c = mpq(1) if t > s else mpq(-half)
        else:
            c = mpq(-1, half + 1) if t > s else mpq(1)
        blocks[(t, s)] = m.scale(c)
    return GOp(ops.dims, ops.dims, blocks, bd.dom, "delta")


def rescale_delta(fs: FormSpace, n: int) -> ParaComplex:
    lvl = HodgeLevel(fs, n)
    pc = lvl.paracomplex(delta_conjugated(fs, n), _ops(fs).T, f"theta^{n} (delta)")
    pc.info["tower"] = lvl
    return pc


# ---------------------------------------------------------------------------
# unitarization and the X-complex of the scalars


def direct_sum(C: ParaComplex, D: ParaComplex, name="sum") -> ParaComplex:
    def diag(a, b):
        return block_matrix([[a, None], [None, b]], [a.shape[0], b.shape[0]], [a.shape[1], b.shape[1]])

    pc = ParaComplex(diag(C.d0, D.d0), diag(C.d1, D.d1), diag(C.T0, D.T0), diag(C.T1, D.T1), name=name)
    if C.act0 is not None and D.act0 is not None:
        pc.act0 = [diag(a, b) for a, b in zip(C.act0, D.act0)]
        pc.act1 = [diag(a, b) for a, b in zip(C.act1, D.act1)]
        pc.og0 = [diag(a, b) for a, b in zip(C.og0, D.og0)]
        pc.og1 = [diag(a, b) for a, b in zip(C.og1, D.og1)]
    return pc


def og_point(G) -> ParaComplex:
    """O_G[0]: O_G in even degree, nothing odd, T = id, O_G acting by multiplication."""
    n = G.order
    pc = ParaComplex(SparseMatrix.zeros(0, n), SparseMatrix.zeros(n, 0), SparseMatrix.identity(n),
                     SparseMatrix.identity(0), name="O_G[0]")
    pc.act0 = [SparseMatrix.from_columns(n, [{G.conj(t, g): mpq(1)} for g in range(n)]) for t in range(n)]
    pc.act1 = [SparseMatrix.identity(0) for _ in range(n)]
    pc.og0 = [SparseMatrix.from_columns(n, [{g: mpq(1)} if g == h else {} for g in range(n)]) for h in range(n)]
    pc.og1 = [SparseMatrix.identity(0) for _ in range(n)]
    return pc


def unitarization_check(A: GAlgebra) -> list[tuple[str, bool, dict | None]]:
    """X_G(A) + O_G[0] -> X_G(A+) is an isomorphism of paracomplexes (maps q0, q1 and inverse p1)."""
    G, m = A.group, A.dim
    Ap = unitarize(A)
    fa, fp = FormSpace(A, 2), FormSpace(Ap, 2)
    XA = hodge_level(fa, 1)
    XP = hodge_level(fp, 1)
    top_a = XA.info["tower"].top
    top_p = XP.info["tower"].top
    src = direct_sum(XA, og_point(G))
    # q0 on X^0_G(A) + O_G
    cols = [{fp.index(g, (a,)): mpq(1)} for g in range(G.order) for a in range(m)]
    cols += [{fp.index(g, (m,)): mpq(1)} for g in range(G.order)]
    q0 = SparseMatrix.from_columns(fp.dim(0), cols)
    # q1 and p1 on ambient one-forms
    q1_amb = []
    for i in range(fa.dim(1)):
        g, w = fa.word(i, 1)
        q1_amb.append({fp.index(g, w): mpq(1)})
    q1_amb = SparseMatrix.from_columns(fp.dim(1), q1_amb)
    p1_amb = []
    for i in range(fp.dim(1)):
        g, (w0, x1) = fp.word(i, 1)
        if x1 == m:
            p1_amb.append({})
        elif w0 in (UNIT, m):
            p1_amb.append({fa.index(g, (UNIT, x1)): mpq(1)})
        else:
            p1_amb.append({fa.index(g, (w0, x1)): mpq(1)})
    p1_amb = SparseMatrix.from_columns(fa.dim(1), p1_amb)
    q1 = top_p.project(q1_amb @ top_a.section)
    p1 = top_a.project(p1_amb @ top_p.section)
    out = []

    def rec(name, diff):
        out.append((name, diff.is_zero(), witness(diff)))

    out.append(("dimensions", (src.dims == XP.dims), None))
    rec("q1 descends", top_p.project(q1_amb @ fa.b(2)))
    rec("p1 descends", top_a.project(p1_amb @ fp.b(2)))
    rec("p1 q1 = id", p1 @ q1 - SparseMatrix.identity(top_a.dim))
    rec("q1 p1 = id", q1 @ p1 - SparseMatrix.identity(top_p.dim))
    out.append(("q0 bijective", q0.shape[0] == q0.shape[1] and rank(q0) == q0.shape[0], None))
    # the odd-degree map of the direct sum is q1 (O_G[0] has no odd part)
    rec("q d0 = d0 q", XP.d0 @ q0 - q1 @ src.d0)
    rec("q d1 = d1 q", XP.d1 @ q1 - q0 @ src.d1)
    rec("q T = T q (even)", XP.T0 @ q0 - q0 @ src.T0)
    rec("q T = T q (odd)", XP.T1 @ q1 - q1 @ src.T1)
    for t in range(G.order):
        rec(f"q covariant [{t}]", XP.act0[t] @ q0 - q0 @ src.act0[t])
    return out
