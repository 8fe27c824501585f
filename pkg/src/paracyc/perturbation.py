"""Deformation retractions, the perturbation transfer and the box product of paracomplexes."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ContractViolation, NotBalanced, NotNilpotent
from .graded import ParaComplex, witness
from .linalg import SparseMatrix, block_matrix, image_basis, kron, solve

Rec = tuple  # (name, ok, witness)


def _rec(name: str, lhs: SparseMatrix, rhs: SparseMatrix) -> Rec:
    diff = lhs - rhs
    return (name, diff.is_zero(), witness(diff))


@dataclass
class RetractionDatum:
    """Maps i: D -> C, p: C -> D and an operator h on C, together with the Hochschild
    and Connes operators of both sides.

    The contract: p i = id and i p = id + (b h + h b), with i, p chain maps for b
    and p a chain map for B."""

    i: SparseMatrix
    p: SparseMatrix
    h: SparseMatrix
    bC: SparseMatrix
    BC: SparseMatrix
    bD: SparseMatrix
    BD: SparseMatrix
    name: str = ""
    info: dict = field(default_factory=dict)

    @property
    def idC(self) -> SparseMatrix:
        return SparseMatrix.identity(self.bC.shape[0])

    @property
    def idD(self) -> SparseMatrix:
        return SparseMatrix.identity(self.bD.shape[0])

    def checks(self) -> list[Rec]:
        i, p, h, b = self.i, self.p, self.h, self.bC
        return [
            _rec("p i = id", p @ i, self.idD),
            _rec("i p = id + (b h + h b)", i @ p, self.idC + b @ h + h @ b),
            _rec("b i = i b", b @ i, i @ self.bD),
            _rec("b p = p b", self.bD @ p, p @ b),
            _rec("B p = p B", self.BD @ p, p @ self.BC),
        ]

    def special_checks(self) -> list[Rec]:
        i, p, h = self.i, self.p, self.h
        zC = SparseMatrix.zeros(*h.shape)
        return [
            _rec("h i = 0", h @ i, SparseMatrix.zeros(*i.shape)),
            _rec("p h = 0", p @ h, SparseMatrix.zeros(*p.shape)),
            _rec("h^2 = 0", h @ h, zC),
            _rec("b h + h b = i p - id", self.bC @ h + h @ self.bC, i @ p - self.idC),
        ]

    def validate(self):
        bad = [r for r in self.checks() if not r[1]]
        if bad:
            raise ContractViolation(f"retraction {self.name}: {bad[0][0]} fails at {bad[0][2]}")


def make_special_retraction(r: RetractionDatum) -> tuple[RetractionDatum, list[Rec]]:
    """k = (bh + hb) h (bh + hb), then l = -k b k; returns the special datum and the
    intermediate relations for k."""
    r.validate()
    b, h = r.bC, r.h
    e = b @ h + h @ b
    k = e @ h @ e
    l = -(k @ b @ k)
    inter = [
        _rec("k i = 0", k @ r.i, SparseMatrix.zeros(*r.i.shape)),
        _rec("p k = 0", r.p @ k, SparseMatrix.zeros(*r.p.shape)),
        _rec("b k + k b = i p - id", b @ k + k @ b, r.i @ r.p - r.idC),
        _rec("b k^2 - k^2 b = 0", b @ k @ k, k @ k @ b),
    ]
    out = RetractionDatum(r.i, r.p, l, r.bC, r.BC, r.bD, r.BD, f"special({r.name})", dict(r.info, k=k))
    return out, inter


def _powers(lB: SparseMatrix, bound: int) -> list[SparseMatrix]:
    """[id, lB, (lB)^2, ...] up to the last nonzero power."""
    pw = [SparseMatrix.identity(lB.shape[0])]
    while True:
        nxt = lB @ pw[-1]
        if nxt.is_zero():
            return pw
        if len(pw) > bound:
            raise NotNilpotent(f"(lB)^{len(pw)} is still nonzero")
        pw.append(nxt)


@dataclass
class Perturbed:
    I: SparseMatrix
    H: SparseMatrix
    P: SparseMatrix
    K: SparseMatrix
    index: int  # nilpotency index of lB


def perturb(r: RetractionDatum) -> Perturbed:
    """K = sum_j (lB)^j, I = K i, H = K l, P = p for a special retraction."""
    lB = r.h @ r.BC
    pw = _powers(lB, r.bC.shape[0])
    K = pw[0]
    for m in pw[1:]:
        K = K + m
    return Perturbed(K @ r.i, K @ r.h, r.p, K, len(pw))


def perturb_checks(r: RetractionDatum, pt: Perturbed) -> list[Rec]:
    dC, dD = r.BC + r.bC, r.BD + r.bD
    return [
        _rec("P I = id", pt.P @ pt.I, r.idD),
        _rec("I P = id + [H, B + b]", pt.I @ pt.P, r.idC + pt.H @ dC + dC @ pt.H),
        _rec("[I, B + b] = 0", dC @ pt.I, pt.I @ dD),
        _rec("K = id + K l B", pt.K, r.idC + pt.K @ r.h @ r.BC),
    ]


def perturb_lemma_check(r: RetractionDatum, jmax: int = 4) -> list[tuple[str, int, bool, dict | None]]:
    """[(lB)^j i, b] = -[(lB)^{j-1} i, B] and [(lB)^j, b] l = B (lB)^{j-1} l for j = 1..jmax."""
    l, i, bC, BC, bD, BD = r.h, r.i, r.bC, r.BC, r.bD, r.BD
    lB = l @ BC
    pw = [SparseMatrix.identity(lB.shape[0])]
    for _ in range(jmax):
        pw.append(lB @ pw[-1])
    out = []
    for j in range(1, jmax + 1):
        a, a1 = pw[j] @ i, pw[j - 1] @ i
        lhs = a @ bD - bC @ a
        rhs = -(a1 @ BD - BC @ a1)
        n, ok, wit = _rec("[(lB)^j i, b] = -[(lB)^(j-1) i, B]", lhs, rhs)
        out.append((n, j, ok, wit))
        lhs2 = (pw[j] @ bC - bC @ pw[j]) @ l
        rhs2 = BC @ pw[j - 1] @ l
        n, ok, wit = _rec("[(lB)^j, b] l = B (lB)^(j-1) l", lhs2, rhs2)
        out.append((n, j, ok, wit))
    return out


# ---------------------------------------------------------------------------
# the box product


def _og_structure(acts: list[SparseMatrix], n: int, label: str):
    """Check that the O_G action is a family of orthogonal idempotents summing to id."""
    tot = SparseMatrix.zeros(n, n)
    for h, e in enumerate(acts):
        if not (e @ e == e):
            raise NotBalanced(f"{label}: delta_{h} is not idempotent")
        for k, f in enumerate(acts):
            if k != h and not (e @ f).is_zero():
                raise NotBalanced(f"{label}: delta_{h} delta_{k} != 0")
        tot = tot + e
    if not (tot == SparseMatrix.identity(n)):
        raise NotBalanced(f"{label}: the idempotents do not sum to the identity")


class _Balanced:
    """C_i (x)_{O_G} D_j realised as the image of sum_h delta_h (x) delta_h."""

    def __init__(self, ogC, ogD, nC, nD):
        P = SparseMatrix.zeros(nC * nD, nC * nD)
        for eC, eD in zip(ogC, ogD):
            P = P + kron(eC, eD)
        self.P = P
        self.V = image_basis(P)
        self.dim = self.V.shape[1]
        diag = all(set(c) <= {j} for j, c in enumerate(P.columns()))
        self.rows = [j for j, c in enumerate(P.columns()) if c] if diag else None

    def coords(self, m: SparseMatrix) -> SparseMatrix:
        if self.rows is not None:
            return m.select(rows=self.rows)
        x = solve(self.V, m)
        if x is None:
            raise NotBalanced("operator does not preserve the balanced tensor product")
        return x


def boxtimes(C: ParaComplex, D: ParaComplex, name: str | None = None) -> ParaComplex:
    """C ⊠ D over O_G with the T-twisted boundary; G acts diagonally."""
    for X, lab in ((C, "C"), (D, "D")):
        if X.og0 is None or X.og1 is None:
            raise NotBalanced(f"factor {lab} carries no O_G action")
        _og_structure(X.og0, X.dims[0], f"{lab} even")
        _og_structure(X.og1, X.dims[1], f"{lab} odd")
    if len(C.og0) != len(D.og0):
        raise NotBalanced("factors over different groups")
    c, d = C.dims, D.dims
    ogc, ogd = (C.og0, C.og1), (D.og0, D.og1)
    sp = {(a, b): _Balanced(ogc[a], ogd[b], c[a], d[b]) for a in (0, 1) for b in (0, 1)}
    idC = (SparseMatrix.identity(c[0]), SparseMatrix.identity(c[1]))
    idD = (SparseMatrix.identity(d[0]), SparseMatrix.identity(d[1]))
    dC = {(1, 0): C.d0, (0, 1): C.d1}
    dD = {(1, 0): D.d0, (0, 1): D.d1}
    TC, TD = (C.T0, C.T1), (D.T0, D.T1)

    def op(src, tgt, a_mat, b_mat, sign=1):
        m = kron(a_mat, b_mat) @ sp[src].V
        m = sp[tgt].coords(m)
        return m if sign > 0 else -m

    even, odd = [(0, 0), (1, 1)], [(1, 0), (0, 1)]
    # rows: targets, columns: sources
    d0 = [[op((0, 0), (1, 0), dC[(1, 0)], idD[0]), op((1, 1), (1, 0), idC[1], dD[(0, 1)], -1)],
          [op((0, 0), (0, 1), idC[0], dD[(1, 0)]), op((1, 1), (0, 1), dC[(0, 1)], TD[1])]]
    d1 = [[op((1, 0), (0, 0), dC[(0, 1)], TD[0]), op((0, 1), (0, 0), idC[0], dD[(0, 1)])],
          [op((1, 0), (1, 1), idC[1], dD[(1, 0)], -1), op((0, 1), (1, 1), dC[(1, 0)], idD[1])]]
    sz = lambda parts: [sp[x].dim for x in parts]  # noqa: E731

    def diag(parts, fa, fb):
        blocks = [[None] * len(parts) for _ in parts]
        for k, x in enumerate(parts):
            blocks[k][k] = op(x, x, fa(x[0]), fb(x[1]))
        return block_matrix(blocks, sz(parts), sz(parts))

    pc = ParaComplex(
        block_matrix(d0, sz(odd), sz(even)),
        block_matrix(d1, sz(even), sz(odd)),
        diag(even, lambda a: TC[a], lambda b: TD[b]),
        diag(odd, lambda a: TC[a], lambda b: TD[b]),
        name=name or f"({C.name})⊠({D.name})",
    )
    if C.act0 is not None and D.act0 is not None:
        actc, actd = (C.act0, C.act1), (D.act0, D.act1)
        n = len(C.act0)
        pc.act0 = [diag(even, lambda a, t=t: actc[a][t], lambda b, t=t: actd[b][t]) for t in range(n)]
        pc.act1 = [diag(odd, lambda a, t=t: actc[a][t], lambda b, t=t: actd[b][t]) for t in range(n)]
    pc.og0 = [diag(even, lambda a, h=h: ogc[a][h], lambda b: idD[b]) for h in range(len(C.og0))]
    pc.og1 = [diag(odd, lambda a, h=h: ogc[a][h], lambda b: idD[b]) for h in range(len(C.og0))]
    pc.info["factors"] = (C.name, D.name)
    pc.info["parts"] = {"even": [sp[x].dim for x in even], "odd": [sp[x].dim for x in odd]}
    return pc

