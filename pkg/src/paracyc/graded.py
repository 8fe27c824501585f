"""Graded operators on truncated form spaces and paracomplexes."""
from __future__ import annotations

from dataclasses import dataclass, field

import flint
from gmpy2 import mpq

from .errors import ShapeMismatch
from .linalg import SparseMatrix, image_basis, rank, solve, supercomplex_homology, to_fraction

# ---------------------------------------------------------------------------
# dense exact blocks (used where operator polynomials make matrices dense)


def _fq(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    c = mpq(c)
    return flint.fmpq(int(c.numerator), int(c.denominator))


class Dense:
    """Thin wrapper around a FLINT rational matrix with the SparseMatrix interface."""

    __slots__ = ("m",)

    def __init__(self, m: flint.fmpq_mat):
        self.m = m

    @classmethod
    def of(cls, x) -> "Dense":
        if isinstance(x, Dense):
            return x
        return cls(x.to_flint())

    @classmethod
    def identity(cls, n: int) -> "Dense":
        m = flint.fmpq_mat(n, n)
        for i in range(n):
            m[i, i] = 1
        return cls(m)

    @classmethod
    def zeros(cls, r: int, c: int) -> "Dense":
        return cls(flint.fmpq_mat(r, c))

    @property
    def shape(self):
        return (self.m.nrows(), self.m.ncols())

    def __matmul__(self, o):
        o = Dense.of(o)
        if self.shape[1] != o.shape[0]:
            raise ShapeMismatch(f"cannot compose {self.shape} @ {o.shape}")
        return Dense(self.m * o.m)

    def __add__(self, o):
        o = Dense.of(o)
        if self.shape != o.shape:
            raise ShapeMismatch(f"{self.shape} vs {o.shape}")
        return Dense(self.m + o.m)

    def __sub__(self, o):
        o = Dense.of(o)
        if self.shape != o.shape:
            raise ShapeMismatch(f"{self.shape} vs {o.shape}")
        return Dense(self.m - o.m)

    def __neg__(self):
        return Dense(-self.m)

    def scale(self, c):
        return Dense(self.m * _fq(c))

    def __rmul__(self, c):
        return self.scale(c)

    def is_zero(self) -> bool:
        r, c = self.shape
        return r == 0 or c == 0 or self.m == flint.fmpq_mat(r, c)

    def __eq__(self, o):  # type: ignore[override]
        o = Dense.of(o)
        return self.shape == o.shape and self.m == o.m

    def first_nonzero(self):
        r, c = self.shape
        for j in range(c):
            for i in range(r):
                v = self.m[i, j]
                if v != 0:
                    return (i, j, mpq(int(v.p), int(v.q)))
        return None

    def to_sparse(self) -> SparseMatrix:
        r, c = self.shape
        ent = {}
        for i in range(r):
            for j in range(c):
                v = self.m[i, j]
                if v != 0:
                    ent[(i, j)] = mpq(int(v.p), int(v.q))
        return SparseMatrix.from_entries((r, c), ent)


def _zero_like(proto, r: int, c: int):
    return Dense.zeros(r, c) if isinstance(proto, Dense) else SparseMatrix.zeros(r, c)


def witness(diff) -> dict | None:
    """Location and value of the first nonzero entry of a difference matrix."""
    w = diff.first_nonzero()
    if w is None:
        return None
    r, c, v = w
    return {"row": int(r), "col": int(c), "value": str(to_fraction(v))}


# ---------------------------------------------------------------------------


class GOp:
    """A linear map on a graded space, stored as blocks (target degree, source degree).

    `dom` lists the source degrees on which the operator is completely known;
    missing blocks with source in `dom` are zero.  Composition and sums keep
    only degrees where every factor is known, so truncation never produces
    spurious values.
    """

    def __init__(self, src_dims: dict, tgt_dims: dict, blocks: dict, dom, name: str = ""):
        self.src_dims = dict(src_dims)
        self.tgt_dims = dict(tgt_dims)
        self.dom = frozenset(dom)
        self.blocks = {k: v for k, v in blocks.items() if k[1] in self.dom}
        self.name = name
        for (t, s), m in self.blocks.items():
            if m.shape != (self.tgt_dims[t], self.src_dims[s]):
                raise ShapeMismatch(f"block {(t, s)} of {name} has shape {m.shape}")

    @classmethod
    def identity(cls, dims: dict, dom=None, dense: bool = False, name="id"):
        dom = dims.keys() if dom is None else dom
        mk = Dense.identity if dense else SparseMatrix.identity
        return cls(dims, dims, {(n, n): mk(dims[n]) for n in dom}, dom, name)

    @classmethod
    def zero(cls, src_dims: dict, tgt_dims: dict, dom=None, name="0"):
        return cls(src_dims, tgt_dims, {}, src_dims.keys() if dom is None else dom, name)

    @classmethod
    def homogeneous(cls, src_dims, tgt_dims, shift: int, mats: dict, name=""):
        """Operator of fixed degree shift given by {source degree: matrix}."""
        return cls(src_dims, tgt_dims, {(s + shift, s): m for s, m in mats.items()}, mats.keys(), name)

    def targets(self, s: int) -> list[int]:
        return sorted(t for (t, ss) in self.blocks if ss == s)

    def block(self, t: int, s: int):
        m = self.blocks.get((t, s))
        return m

    def __matmul__(self, other: "GOp") -> "GOp":
        dom = [s for s in other.dom if all(t in self.dom for t in other.targets(s))]
        out: dict = {}
        for s in dom:
            for mid in other.targets(s):
                y = other.blocks[(mid, s)]
                for t in self.targets(mid):
                    p = self.blocks[(t, mid)] @ y
                    out[(t, s)] = out[(t, s)] + p if (t, s) in out else p
        return GOp(other.src_dims, self.tgt_dims, out, dom, f"({self.name})({other.name})")

    def _combine(self, other: "GOp", sign: int) -> "GOp":
        dom = self.dom & other.dom
        out = {k: v for k, v in self.blocks.items() if k[1] in dom}
        for k, v in other.blocks.items():
            if k[1] not in dom:
                continue
            if k in out:
                out[k] = out[k] + v if sign > 0 else out[k] - v
            else:
                out[k] = v if sign > 0 else -v
        return GOp(self.src_dims, self.tgt_dims, out, dom, f"{self.name}{'+' if sign > 0 else '-'}{other.name}")

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return GOp(self.src_dims, self.tgt_dims, {k: -v for k, v in self.blocks.items()}, self.dom, f"-{self.name}")

    def scale(self, c) -> "GOp":
        return GOp(self.src_dims, self.tgt_dims, {k: v.scale(c) for k, v in self.blocks.items()}, self.dom, self.name)

    def __rmul__(self, c):
        return self.scale(c)

    def restrict(self, dom) -> "GOp":
        return GOp(self.src_dims, self.tgt_dims, self.blocks, self.dom & frozenset(dom), self.name)

    def dense(self) -> "GOp":
        return GOp(self.src_dims, self.tgt_dims, {k: Dense.of(v) for k, v in self.blocks.items()}, self.dom, self.name)

    def renamed(self, name: str) -> "GOp":
        return GOp(self.src_dims, self.tgt_dims, self.blocks, self.dom, name)

    def compare(self, other: "GOp", degrees=None) -> list[tuple[int, bool, dict | None]]:
        """Per-source-degree equality on the common domain: (degree, equal, witness)."""
        dom = sorted(self.dom & other.dom if degrees is None else set(degrees) & self.dom & other.dom)
        diff = self - other
        res = []
        for s in dom:
            ok, wit = True, None
            for t in sorted(set(self.targets(s)) | set(other.targets(s))):
                m = diff.blocks.get((t, s))
                if m is not None and not m.is_zero():
                    ok = False
                    wit = witness(m) | {"target_degree": t}
                    break
            res.append((s, ok, wit))
        return res

    def is_zero_on(self, degrees=None) -> list[tuple[int, bool, dict | None]]:
        return self.compare(GOp.zero(self.src_dims, self.tgt_dims, self.dom), degrees)


# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ParaComplex:
    """Even and odd spaces with boundaries d0: even -> odd, d1: odd -> even and symmetry T.

    The optional action lists carry the G-action and the O_G-action (one
    matrix per group element) needed for covariance and invariants.
    """

    d0: SparseMatrix
    d1: SparseMatrix
    T0: SparseMatrix
    T1: SparseMatrix
    act0: list | None = None
    act1: list | None = None
    og0: list | None = None
    og1: list | None = None
    name: str = ""
    info: dict = field(default_factory=dict)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.d0.shape[1], self.d1.shape[1])

    def check(self) -> list[tuple[str, bool, dict | None]]:
        """The paracomplex contract: boundary squares to id - T and commutes with T."""
        ne, no = self.dims
        out = []
        for nm, lhs, rhs in (
            ("d1 d0 = id - T", self.d1 @ self.d0, SparseMatrix.identity(ne) - self.T0),
            ("d0 d1 = id - T", self.d0 @ self.d1, SparseMatrix.identity(no) - self.T1),
            ("T d0 = d0 T", self.T1 @ self.d0, self.d0 @ self.T0),
            ("T d1 = d1 T", self.T0 @ self.d1, self.d1 @ self.T1),
        ):
            diff = lhs - rhs
            out.append((nm, diff.is_zero(), witness(diff)))
        out.append(("T invertible", rank(self.T0) == ne and rank(self.T1) == no, None))
        return out

    def check_covariance(self) -> list[tuple[str, bool, dict | None]]:
        out = []
        for label, acts0, acts1 in (("G", self.act0, self.act1), ("O_G", self.og0, self.og1)):
            if acts0 is None:
                continue
            for s, (a0, a1) in enumerate(zip(acts0, acts1)):
                for nm, lhs, rhs in ((f"{label}[{s}] d0", a1 @ self.d0, self.d0 @ a0),
                                     (f"{label}[{s}] d1", a0 @ self.d1, self.d1 @ a1)):
                    diff = lhs - rhs
                    out.append((nm, diff.is_zero(), witness(diff)))
        return out

    def is_complex(self) -> bool:
        ne, no = self.dims
        return self.T0 == SparseMatrix.identity(ne) and self.T1 == SparseMatrix.identity(no)

    def homology(self) -> tuple[int, int]:
        return supercomplex_homology(self.d0, self.d1)

    def averaging(self, parity: int) -> SparseMatrix:
        acts = self.act0 if parity == 0 else self.act1
        n = self.dims[parity]
        tot = SparseMatrix.zeros(n, n)
        for a in acts:
            tot = tot + a
        return tot.scale(mpq(1, len(acts)))

    def invariants(self) -> "ParaComplex":
        """The subcomplex of G-invariant vectors, in a basis of averaged vectors."""
        if self.act0 is None:
            raise ValueError("no group action recorded")
        bases = []
        for p in (0, 1):
            P = self.averaging(p)
            if not (P @ P == P):
                raise AssertionError("averaging operator is not idempotent")
            bases.append(image_basis(P))
        V0, V1 = bases

        def restrict(m, src, tgt):
            x = solve(tgt, m @ src)
            if x is None:
                raise AssertionError("invariant subspace is not preserved")
            return x

        return ParaComplex(
            restrict(self.d0, V0, V1), restrict(self.d1, V1, V0),
            restrict(self.T0, V0, V0), restrict(self.T1, V1, V1),
            name=f"{self.name}^G", info=dict(self.info, invariant_basis=(V0.shape[1], V1.shape[1])),
        )
