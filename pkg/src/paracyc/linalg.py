"""Exact rational sparse linear algebra.

Matrices are stored as a scaled integer matrix (scipy int64, CSC) together
with a positive common denominator.  Every integer operation is guarded by an
a priori bound; when the bound would exceed 2**62 the matrix silently switches
to a column-dictionary representation over gmpy2 rationals, so results are
always exact.
"""
from __future__ import annotations

import heapq
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp
from gmpy2 import mpq

from .errors import NotAComplex, ShapeMismatch

Scalar = type(mpq())
_LIM = float(1 << 61)
_ZERO = mpq(0)
_ONE = mpq(1)


def Q(x) -> Scalar:
    """Coerce ints, Fractions, strings like '3/4' and mpq to a Scalar."""
    if isinstance(x, Scalar):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, (np.integer,)):
        return mpq(int(x))
    if isinstance(x, tuple):
        return mpq(int(x[0]), int(x[1]))
    return mpq(x)


def to_fraction(x) -> Fraction:
    x = Q(x)
    return Fraction(int(x.numerator), int(x.denominator))


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _fits(*bounds: float) -> bool:
    return all(b < _LIM for b in bounds)


class SparseMatrix:
    """Immutable exact sparse matrix over the rationals."""

    __slots__ = ("shape", "_num", "_den", "_cols")
    __hash__ = None  # type: ignore[assignment]

    def __init__(self, shape, num=None, den=1, cols=None):
        self.shape = (int(shape[0]), int(shape[1]))
        self._num = num
        self._den = den
        self._cols = cols

    # ---- construction -------------------------------------------------
    @classmethod
    def _from_int(cls, shape, num, den: int) -> "SparseMatrix":
        num = sp.csc_matrix(num, shape=shape, dtype=np.int64)
        num.sum_duplicates()
        num.eliminate_zeros()
        num.sort_indices()
        den = int(den)
        if num.nnz == 0:
            return cls(shape, num, 1)
        g = int(np.gcd.reduce(np.abs(num.data)))
        g = gcd(g, den)
        if g > 1:
            num = sp.csc_matrix((num.data // g, num.indices, num.indptr), shape=shape)
            den //= g
        return cls(shape, num, den)

    @classmethod
    def from_int_triplets(cls, shape, rows, cols, data, den: int = 1) -> "SparseMatrix":
        """Build from integer coordinate arrays (duplicates are summed)."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        data = np.asarray(data, dtype=np.int64)
        coo = sp.coo_matrix((data, (rows, cols)), shape=shape)
        return cls._from_int(shape, coo.tocsc(), den)

    @classmethod
    def from_columns(cls, nrows: int, columns: list[dict]) -> "SparseMatrix":
        """Build from a list of {row: value} dictionaries."""
        cols = []
        for c in columns:
            d = {}
            for r, v in c.items():
                v = Q(v)
                if v:
                    if not 0 <= r < nrows:
                        raise ShapeMismatch(f"row {r} out of range {nrows}")
                    d[r] = v
            cols.append(d)
        return cls._pack((nrows, len(cols)), cols)

    @classmethod
    def from_entries(cls, shape, entries: dict) -> "SparseMatrix":
        cols = [dict() for _ in range(shape[1])]
        for (r, c), v in entries.items():
            v = Q(v)
            if v:
                cols[c][r] = v
        return cls._pack(shape, cols)

    @classmethod
    def from_dense(cls, rows: list[list]) -> "SparseMatrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        cols = [dict() for _ in range(nc)]
        for i, row in enumerate(rows):
            if len(row) != nc:
                raise ShapeMismatch("ragged dense matrix")
            for j, v in enumerate(row):
                v = Q(v)
                if v:
                    cols[j][i] = v
        return cls._pack((nr, nc), cols)

    @classmethod
    def _pack(cls, shape, cols: list[dict]) -> "SparseMatrix":
        den = 1
        big = False
        for c in cols:
            for v in c.values():
                den = _lcm(den, int(v.denominator))
                if den >= _LIM:
                    big = True
                    break
            if big:
                break
        if not big:
            rows_, cols_, data = [], [], []
            for j, c in enumerate(cols):
                for r, v in c.items():
                    n = int(v.numerator) * (den // int(v.denominator))
                    if abs(n) >= _LIM:
                        big = True
                        break
                    rows_.append(r)
                    cols_.append(j)
                    data.append(n)
                if big:
                    break
            if not big:
                return cls.from_int_triplets(shape, rows_, cols_, data, den)
        return cls(shape, None, 1, [dict(c) for c in cols])

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        idx = np.arange(n)
        return cls.from_int_triplets((n, n), idx, idx, np.ones(n, dtype=np.int64))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseMatrix":
        return cls((nrows, ncols), sp.csc_matrix((nrows, ncols), dtype=np.int64), 1)

    @classmethod
    def diagonal(cls, values) -> "SparseMatrix":
        values = list(values)
        n = len(values)
        return cls.from_columns(n, [{i: v} for i, v in enumerate(values)])

    # ---- access -------------------------------------------------------
    @property
    def is_big(self) -> bool:
        return self._num is None

    @property
    def nnz(self) -> int:
        if self._num is not None:
            return int(self._num.nnz)
        return sum(len(c) for c in self._cols)

    def col(self, j: int) -> dict:
        if self._num is not None:
            m = self._num
            lo, hi = m.indptr[j], m.indptr[j + 1]
            d = self._den
            return {int(r): mpq(int(v), d) for r, v in zip(m.indices[lo:hi], m.data[lo:hi])}
        return dict(self._cols[j])

    def columns(self) -> Iterator[dict]:
        for j in range(self.shape[1]):
            yield self.col(j)

    def entries(self) -> dict:
        out = {}
        for j in range(self.shape[1]):
            for r, v in self.col(j).items():
                out[(r, j)] = v
        return out

    def __getitem__(self, rc) -> Scalar:
        r, c = rc
        return self.col(c).get(r, _ZERO)

    def to_dense(self) -> list[list]:
        out = [[_ZERO] * self.shape[1] for _ in range(self.shape[0])]
        for (r, c), v in self.entries().items():
            out[r][c] = v
        return out

    def _as_big(self) -> list[dict]:
        if self._num is None:
            return self._cols
        return [self.col(j) for j in range(self.shape[1])]

    def max_abs_int(self) -> float:
        if self._num is None or self._num.nnz == 0:
            return 0.0
        return float(np.abs(self._num.data).max())

    def first_nonzero(self):
        """(row, col, value) of the first nonzero entry in column-major order."""
        for j in range(self.shape[1]):
            c = self.col(j)
            if c:
                r = min(c)
                return (r, j, c[r])
        return None

    def apply(self, vec: dict) -> dict:
        """Matrix times a sparse vector {index: value}."""
        out: dict = {}
        for k, x in vec.items():
            x = Q(x)
            for r, v in self.col(k).items():
                nv = out.get(r, _ZERO) + v * x
                if nv:
                    out[r] = nv
                else:
                    out.pop(r, None)
        return out

    # ---- arithmetic ---------------------------------------------------
    def _check_same(self, other):
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} vs {other.shape}")

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape[1] != other.shape[0]:
            raise ShapeMismatch(f"cannot compose {self.shape} @ {other.shape}")
        shape = (self.shape[0], other.shape[1])
        if self._num is not None and other._num is not None:
            a, b = self._num, other._num
            if a.nnz == 0 or b.nnz == 0:
                return SparseMatrix.zeros(*shape)
            rowsum = float(np.asarray(abs(a).astype(np.float64).sum(axis=1)).max())
            bmax = other.max_abs_int()
            if _fits(rowsum * bmax, float(self._den) * float(other._den)):
                return SparseMatrix._from_int(shape, (a @ b).tocsc(), self._den * other._den)
        acols = self._as_big()
        out = []
        for bc in other._as_big():
            acc: dict = {}
            for k, x in bc.items():
                for r, v in acols[k].items():
                    acc[r] = acc.get(r, _ZERO) + v * x
            out.append({r: v for r, v in acc.items() if v})
        return SparseMatrix._pack(shape, out)

    def _combine(self, other: "SparseMatrix", sign: int) -> "SparseMatrix":
        self._check_same(other)
        if self._num is not None and other._num is not None:
            L = _lcm(self._den, other._den)
            f1, f2 = L // self._den, L // other._den
            if _fits(float(L), self.max_abs_int() * f1 + other.max_abs_int() * f2 + 1):
                num = self._num * f1 + (other._num * f2 if sign > 0 else -(other._num * f2))
                return SparseMatrix._from_int(self.shape, num, L)
        a, b = self._as_big(), other._as_big()
        out = []
        for ca, cb in zip(a, b):
            d = dict(ca)
            for r, v in cb.items():
                nv = d.get(r, _ZERO) + (v if sign > 0 else -v)
                if nv:
                    d[r] = nv
                else:
                    d.pop(r, None)
            out.append(d)
        return SparseMatrix._pack(self.shape, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        if self._num is not None:
            return SparseMatrix(self.shape, -self._num, self._den)
        return SparseMatrix(self.shape, None, 1, [{r: -v for r, v in c.items()} for c in self._cols])

    def scale(self, c) -> "SparseMatrix":
        c = Q(c)
        if not c:
            return SparseMatrix.zeros(*self.shape)
        p, q = int(c.numerator), int(c.denominator)
        if self._num is not None and _fits(self.max_abs_int() * abs(p), float(self._den) * q):
            return SparseMatrix._from_int(self.shape, self._num * p, self._den * q)
        return SparseMatrix._pack(self.shape, [{r: v * c for r, v in col.items()} for col in self._as_big()])

    def __rmul__(self, c):
        return self.scale(c)

    def is_zero(self) -> bool:
        if self._num is not None:
            return self._num.nnz == 0
        return not any(self._cols)

    def __eq__(self, other) -> bool:  # type: ignore[override]
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        if self._num is not None and other._num is not None and self._den == other._den:
            return (self._num != other._num).nnz == 0
        return (self - other).is_zero()

    @property
    def T(self) -> "SparseMatrix":
        if self._num is not None:
            return SparseMatrix._from_int((self.shape[1], self.shape[0]), self._num.T, self._den)
        cols = [dict() for _ in range(self.shape[0])]
        for j, c in enumerate(self._cols):
            for r, v in c.items():
                cols[r][j] = v
        return SparseMatrix._pack((self.shape[1], self.shape[0]), cols)

    def select(self, rows: list[int] | None = None, cols: list[int] | None = None) -> "SparseMatrix":
        """Submatrix on the given row and column index lists (in that order)."""
        rows = list(range(self.shape[0])) if rows is None else list(rows)
        cols = list(range(self.shape[1])) if cols is None else list(cols)
        if self._num is not None:
            m = self._num[:, cols][rows, :] if rows else sp.csc_matrix((0, len(cols)), dtype=np.int64)
            return SparseMatrix._from_int((len(rows), len(cols)), m, self._den)
        pos = {r: i for i, r in enumerate(rows)}
        out = []
        for j in cols:
            out.append({pos[r]: v for r, v in self._cols[j].items() if r in pos})
        return SparseMatrix._pack((len(rows), len(cols)), out)

    def to_flint(self):
        import flint

        m = flint.fmpq_mat(self.shape[0], self.shape[1])
        for (r, c), v in self.entries().items():
            m[r, c] = flint.fmpq(int(v.numerator), int(v.denominator))
        return m

    @classmethod
    def from_flint(cls, m) -> "SparseMatrix":
        nr, nc = m.nrows(), m.ncols()
        cols = [dict() for _ in range(nc)]
        for i in range(nr):
            for j in range(nc):
                v = m[i, j]
                if v != 0:
                    cols[j][i] = mpq(int(v.p), int(v.q))
        return cls._pack((nr, nc), cols)

    def __repr__(self):
        return f"SparseMatrix({self.shape[0]}x{self.shape[1]}, nnz={self.nnz})"


def block_matrix(blocks: list[list], row_sizes: list[int], col_sizes: list[int]) -> SparseMatrix:
    """Assemble a block matrix; None entries are zero blocks."""
    shape = (sum(row_sizes), sum(col_sizes))
    ro = np.concatenate([[0], np.cumsum(row_sizes)]).astype(int)
    co = np.concatenate([[0], np.cumsum(col_sizes)]).astype(int)
    present = [(i, j, b) for i, row in enumerate(blocks) for j, b in enumerate(row) if b is not None]
    for i, j, b in present:
        if b.shape != (row_sizes[i], col_sizes[j]):
            raise ShapeMismatch(f"block ({i},{j}) has shape {b.shape}, expected {(row_sizes[i], col_sizes[j])}")
    if all(b._num is not None for _, _, b in present):
        den = 1
        for _, _, b in present:
            den = _lcm(den, b._den)
        if _fits(float(den), max([b.max_abs_int() * (den // b._den) for _, _, b in present] + [0.0])):
            rows, cols, data = [], [], []
            for i, j, b in present:
                coo = b._num.tocoo()
                rows.append(coo.row + ro[i])
                cols.append(coo.col + co[j])
                data.append(coo.data * (den // b._den))
            if not rows:
                return SparseMatrix.zeros(*shape)
            return SparseMatrix.from_int_triplets(shape, np.concatenate(rows), np.concatenate(cols), np.concatenate(data), den)
    out = [dict() for _ in range(shape[1])]
    for i, j, b in present:
        for jj, c in enumerate(b._as_big()):
            tgt = out[co[j] + jj]
            for r, v in c.items():
                tgt[r + ro[i]] = v
    return SparseMatrix._pack(shape, out)


def kron(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    """Kronecker product; index (i, k) of the product space is i * dim_b + k."""
    (ar, ac), (br, bc) = a.shape, b.shape
    bcols = list(b.columns())
    cols = []
    for ca in a.columns():
        for cb in bcols:
            cols.append({i * br + k: x * y for i, x in ca.items() for k, y in cb.items()})
    return SparseMatrix.from_columns(ar * br, cols) if cols else SparseMatrix.zeros(ar * br, ac * bc)


def hstack(mats: list[SparseMatrix]) -> SparseMatrix:
    return block_matrix([mats], [mats[0].shape[0]], [m.shape[1] for m in mats])


def vstack(mats: list[SparseMatrix]) -> SparseMatrix:
    return block_matrix([[m] for m in mats], [m.shape[0] for m in mats], [mats[0].shape[1]])


# ---------------------------------------------------------------------------
# elimination


class Echelon:
    """Incremental column echelon form with lowest-index pivots.

    Each stored vector has its pivot (smallest row index) normalised to one;
    optional tracking records every stored vector as a combination of the
    inserted input vectors.
    """

    def __init__(self, dim: int, track: bool = False):
        self.dim = dim
        self.track = track
        self.piv: dict[int, dict] = {}
        self.comb: dict[int, dict] = {}

    def __len__(self):
        return len(self.piv)

    def reduce(self, vec: dict, comb: dict | None = None):
        v = {k: Q(x) for k, x in vec.items() if x}
        c = dict(comb) if comb is not None else None
        piv = self.piv
        heap = [k for k in v if k in piv]
        heapq.heapify(heap)
        while heap:
            r = heapq.heappop(heap)
            x = v.get(r)
            if x is None:
                continue
            pv = piv[r]
            for k, y in pv.items():
                nv = v.get(k, _ZERO) - x * y
                if nv:
                    if k not in v and k in piv:
                        heapq.heappush(heap, k)
                    v[k] = nv
                else:
                    v.pop(k, None)
            if c is not None:
                for k, y in self.comb[r].items():
                    nv = c.get(k, _ZERO) - x * y
                    if nv:
                        c[k] = nv
                    else:
                        c.pop(k, None)
        return v, c

    def insert(self, reduced: dict, comb: dict | None = None) -> int:
        p = min(reduced)
        inv = 1 / reduced[p]
        self.piv[p] = {k: x * inv for k, x in reduced.items()}
        if self.track:
            self.comb[p] = {k: x * inv for k, x in comb.items()}
        return p

    def add(self, vec: dict, comb: dict | None = None) -> bool:
        v, c = self.reduce(vec, comb)
        if v:
            self.insert(v, c)
            return True
        return False

    def nonpivots(self) -> list[int]:
        return [i for i in range(self.dim) if i not in self.piv]


def rank(m: SparseMatrix) -> int:
    if m.shape[0] < m.shape[1]:
        m = m.T
    ech = Echelon(m.shape[0])
    for c in m.columns():
        ech.add(c)
    return len(ech)


def kernel_basis(m: SparseMatrix) -> SparseMatrix:
    """Columns spanning the kernel, one per non-pivot input column."""
    ech = Echelon(m.shape[0], track=True)
    kern = []
    for j, c in enumerate(m.columns()):
        v, comb = ech.reduce(c, {j: _ONE})
        if v:
            ech.insert(v, comb)
        else:
            kern.append(comb)
    return SparseMatrix.from_columns(m.shape[1], kern)


def image_basis(m: SparseMatrix) -> SparseMatrix:
    """Independent columns of m (a subset, in order) spanning its image."""
    ech = Echelon(m.shape[0])
    keep = []
    for j, c in enumerate(m.columns()):
        if ech.add(c):
            keep.append(j)
    return m.select(cols=keep)


def solve(m: SparseMatrix, rhs: SparseMatrix) -> SparseMatrix | None:
    """Some X with m X = rhs, or None when the system is inconsistent."""
    ech = Echelon(m.shape[0], track=True)
    for j, c in enumerate(m.columns()):
        ech.add(c, {j: _ONE})
    out = []
    for col in rhs.columns():
        v, comb = ech.reduce(col, {})
        if v:
            return None
        out.append({k: -x for k, x in comb.items()})
    return SparseMatrix.from_columns(m.shape[1], out)


class Subquotient:
    """Quotient of a based space by the span of generator columns.

    Quotient coordinates are the non-pivot ambient coordinates; the section
    sends a quotient basis vector to the corresponding ambient unit vector.
    """

    def __init__(self, dim: int, generators: SparseMatrix | None = None, labels=None):
        self.ambient_dim = dim
        self.labels = labels
        self.generators = generators if generators is not None else SparseMatrix.zeros(dim, 0)
        if self.generators.shape[0] != dim:
            raise ShapeMismatch("generator rows must equal the ambient dimension")
        self.echelon = Echelon(dim)
        for c in self.generators.columns():
            self.echelon.add(c)
        self.reps = self.echelon.nonpivots()
        self._qidx = {r: i for i, r in enumerate(self.reps)}
        self._proj = None
        self._sec = None

    @property
    def dim(self) -> int:
        return len(self.reps)

    def project_vector(self, vec: dict) -> dict:
        v, _ = self.echelon.reduce(vec)
        return {self._qidx[k]: x for k, x in v.items()}

    def project(self, m: SparseMatrix) -> SparseMatrix:
        """Quotient coordinates of the columns of m."""
        if not self.echelon.piv:
            return m.select(rows=self.reps)
        return self.projection @ m

    @property
    def projection(self) -> SparseMatrix:
        if self._proj is None:
            cols = []
            for i in range(self.ambient_dim):
                if i in self._qidx:
                    cols.append({self._qidx[i]: _ONE})
                else:
                    cols.append(self.project_vector({i: _ONE}))
            self._proj = SparseMatrix.from_columns(self.dim, cols)
        return self._proj

    @property
    def section(self) -> SparseMatrix:
        if self._sec is None:
            n = self.dim
            self._sec = SparseMatrix.from_int_triplets((self.ambient_dim, n), self.reps, np.arange(n), np.ones(n, dtype=np.int64))
        return self._sec

    def contains(self, vec: dict) -> bool:
        v, _ = self.echelon.reduce(vec)
        return not v

    def induced(self, m: SparseMatrix, target: "Subquotient | None" = None) -> SparseMatrix:
        """Matrix of the map induced by m on this quotient (into target)."""
        img = m @ self.section
        return target.project(img) if target is not None else img


def quotient(dim: int, generators: SparseMatrix, labels=None) -> Subquotient:
    return Subquotient(dim, generators, labels)


def supercomplex_homology(d_even: SparseMatrix, d_odd: SparseMatrix) -> tuple[int, int]:
    """(dim H_even, dim H_odd) of a two-periodic complex E -> O -> E."""
    ne, no = d_even.shape[1], d_odd.shape[1]
    if d_even.shape[0] != no or d_odd.shape[0] != ne:
        raise ShapeMismatch("boundary shapes do not form a two-periodic complex")
    if not (d_odd @ d_even).is_zero() or not (d_even @ d_odd).is_zero():
        raise NotAComplex("boundary does not square to zero")
    re, ro = rank(d_even), rank(d_odd)
    return (ne - re - ro, no - ro - re)


def vec_index(i: int, j: int, nrows: int) -> int:
    return i + nrows * j


def unvec(vec: dict, nrows: int, ncols: int) -> SparseMatrix:
    cols = [dict() for _ in range(ncols)]
    for k, v in vec.items():
        cols[k // nrows][k % nrows] = v
    return SparseMatrix.from_columns(nrows, cols)


def _is_diagonal(m: SparseMatrix) -> bool:
    if m.shape[0] != m.shape[1]:
        return False
    for j, c in enumerate(m.columns()):
        if any(r != j for r in c):
            return False
    return True


def intertwiner_space(constraints: list[tuple[SparseMatrix, SparseMatrix]], nrows: int | None = None,
                      ncols: int | None = None) -> SparseMatrix:
    """Basis of {X : L X = X R for all (L, R)}, columns are vec(X) (column-major)."""
    if constraints:
        nrows = constraints[0][0].shape[0] if nrows is None else nrows
        ncols = constraints[0][1].shape[0] if ncols is None else ncols
    if nrows is None or ncols is None:
        raise ShapeMismatch("shape of the unknown map is undetermined")
    for L, R in constraints:
        if L.shape != (nrows, nrows) or R.shape != (ncols, ncols):
            raise ShapeMismatch(f"constraint shapes {L.shape}, {R.shape} vs unknown {(nrows, ncols)}")
    diag = [(L, R) for L, R in constraints if _is_diagonal(L) and _is_diagonal(R)]
    general = [(L, R) for L, R in constraints if not (_is_diagonal(L) and _is_diagonal(R))]
    # diagonal constraints only prune unknowns
    allowed = np.ones((nrows, ncols), dtype=bool)
    for L, R in diag:
        ld = np.array([L[i, i] for i in range(nrows)], dtype=object)
        rd = np.array([R[j, j] for j in range(ncols)], dtype=object)
        allowed &= ld[:, None] == rd[None, :]
    free = [vec_index(i, j, nrows) for j in range(ncols) for i in range(nrows) if allowed[i, j]]
    if not general:
        return SparseMatrix.from_columns(nrows * ncols, [{u: _ONE} for u in free])
    lcols = [[L.col(a) for a in range(nrows)] for L, _ in general]
    rrows = [[R.T.col(b) for b in range(ncols)] for _, R in general]
    size = nrows * ncols
    eqcols = []
    for u in free:
        a, b = u % nrows, u // nrows
        col: dict = {}
        for ci in range(len(general)):
            off = ci * size
            for i, x in lcols[ci][a].items():
                k = off + vec_index(i, b, nrows)
                col[k] = col.get(k, _ZERO) + x
            for j, y in rrows[ci][b].items():
                k = off + vec_index(a, j, nrows)
                col[k] = col.get(k, _ZERO) - y
        eqcols.append(col)
    E = SparseMatrix.from_columns(size * len(general), eqcols)
    K = kernel_basis(E)
    out = []
    for c in K.columns():
        out.append({free[k]: v for k, v in c.items()})
    return SparseMatrix.from_columns(size, out)
