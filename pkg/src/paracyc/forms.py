"""Noncommutative differential forms and the equivariant form spaces.

A word (w0, a1, ..., an) stands for w0 da1 ... dan.  Slot values are basis
indices of A; w0 = UNIT (-1) denotes the adjoined unit of A+.  Degree-0 words
(a0,) always have a0 in A.

Two independent constructions of the primitive operators are provided:
the vectorised one (index arithmetic over all basis elements at once, using
the Hochschild tensor formula for b) and the formula one, which follows the
defining expressions word by word (Leibniz rule for right multiplication,
closed formulas for kappa and B).  The test-suite compares them.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from gmpy2 import mpq

from .algebras import GAlgebra
from .errors import DegreeOverflow
from .linalg import SparseMatrix

UNIT = -1
_ZERO = mpq(0)
_ONE = mpq(1)


def _add(acc: dict, key, c):
    nv = acc.get(key, _ZERO) + c
    if nv:
        acc[key] = nv
    else:
        acc.pop(key, None)


def _addall(acc: dict, form: dict, c=_ONE):
    for k, v in form.items():
        _add(acc, k, c * v)
    return acc


class FormArithmetic:
    """Arithmetic in Omega(A) = A+ (x) A^(x)n on dictionaries word -> coefficient."""

    def __init__(self, A: GAlgebra):
        self.A = A
        self._rcache: dict = {}

    # -- elementary operations on words --
    def rmul_word(self, word: tuple, y: int) -> dict:
        """word * e_y via the Leibniz rule  (w da) y = w d(ay) - (w a) dy."""
        key = (word, y)
        hit = self._rcache.get(key)
        if hit is not None:
            return hit
        A = self.A
        out: dict = {}
        if len(word) == 1:
            w0 = word[0]
            if w0 == UNIT:
                out[(y,)] = _ONE
            else:
                for k, c in A.mult[w0][y].items():
                    out[(k,)] = c
        else:
            head, a = word[:-1], word[-1]
            for k, c in A.mult[a][y].items():
                _add(out, head + (k,), c)
            for w, c in self.rmul_word(head, a).items():
                _add(out, w + (y,), -c)
        self._rcache[key] = out
        return out

    def rmul(self, form: dict, vec: dict) -> dict:
        out: dict = {}
        for w, c in form.items():
            for y, x in vec.items():
                _addall(out, self.rmul_word(w, y), c * x)
        return out

    def lmul(self, vec: dict, form: dict) -> dict:
        """Left multiplication by an element of A."""
        A = self.A
        out: dict = {}
        for w, c in form.items():
            w0, rest = w[0], w[1:]
            for x, cx in vec.items():
                if w0 == UNIT:
                    _add(out, (x,) + rest, c * cx)
                else:
                    for k, ck in A.mult[x][w0].items():
                        _add(out, (k,) + rest, c * cx * ck)
        return out

    def d(self, form: dict) -> dict:
        out: dict = {}
        for w, c in form.items():
            if w[0] != UNIT:
                _add(out, (UNIT,) + w, c)
        return out

    def dlmul(self, vec: dict, form: dict) -> dict:
        """Left multiplication by the one-form d(vec):  dy.(w0 dw) = d(y w0)dw - y dw0 dw."""
        A = self.A
        out: dict = {}
        for w, c in form.items():
            w0, rest = w[0], w[1:]
            for y, cy in vec.items():
                if w0 == UNIT:
                    _add(out, (UNIT, y) + rest, c * cy)
                else:
                    for k, ck in A.mult[y][w0].items():
                        _add(out, (UNIT, k) + rest, c * cy * ck)
                    _add(out, (y, w0) + rest, -c * cy)
        return out

    def act(self, s: int, form: dict) -> dict:
        A = self.A
        out: dict = {}
        for w, c in form.items():
            partial = {(): c}
            for pos, x in enumerate(w):
                nxt: dict = {}
                if pos == 0 and x == UNIT:
                    for p, cp in partial.items():
                        nxt[p + (UNIT,)] = cp
                else:
                    for p, cp in partial.items():
                        for i, ci in A.act[s][x].items():
                            _add(nxt, p + (i,), cp * ci)
                partial = nxt
            _addall(out, partial)
        return out

    def mul(self, f1: dict, f2: dict) -> dict:
        """Product of forms: w * (b0 db1..dbk) = (w b0) db1..dbk."""
        out: dict = {}
        for w2, c2 in f2.items():
            b0, tail = w2[0], w2[1:]
            if b0 == UNIT:
                for w1, c1 in f1.items():
                    _add(out, w1 + tail, c1 * c2)
            else:
                for w1, c1 in f1.items():
                    for w, c in self.rmul_word(w1, b0).items():
                        _add(out, w + tail, c * c1 * c2)
        return out

    def b_plain(self, form: dict, s_inv: int) -> dict:
        """Twisted Hochschild boundary  b(w dx) = (-1)^|w| (w x - (s^-1 x) w)."""
        out: dict = {}
        for w, c in form.items():
            n = len(w) - 1
            if n == 0:
                continue
            head, x = w[:-1], w[-1]
            sign = -1 if (n - 1) % 2 else 1
            _addall(out, self.rmul_word(head, x), sign * c)
            _addall(out, self.lmul(self.A.act[s_inv][x], {head: _ONE}), -sign * c)
        return out


# ---------------------------------------------------------------------------
# vectorised index helpers


def _expand(keys: np.ndarray, ptr: np.ndarray):
    """For each key select its CSR range; returns (source position, table position)."""
    counts = ptr[keys + 1] - ptr[keys]
    total = int(counts.sum())
    pos = np.repeat(np.arange(len(keys)), counts)
    if total == 0:
        return pos, np.zeros(0, dtype=np.int64)
    starts = np.repeat(ptr[keys], counts)
    offs = np.repeat(np.cumsum(counts) - counts, counts)
    return pos, starts + np.arange(total) - offs


def _csr(keys: np.ndarray, nkeys: int):
    order = np.argsort(keys, kind="stable")
    ptr = np.zeros(nkeys + 1, dtype=np.int64)
    np.add.at(ptr, keys + 1, 1)
    return order, np.cumsum(ptr)


class FormSpace:
    """The spaces Omega^n_G(A) = O_G (x) Omega^n(A) for n = 0..N with operator caches.

    Basis order: group element first, then lexicographic word with the
    adjoined unit sorting before the basis of A in the leading slot.
    """

    def __init__(self, A: GAlgebra, N: int):
        if N < 0:
            raise ValueError("level must be nonnegative")
        self.A = A
        self.G = A.group
        self.N = N
        self.m = A.dim
        self.arith = FormArithmetic(A)
        self._cache: dict = {}
        mult, md, acts, ad = A.int_data()
        m = self.m
        self.md, self.ad = md, ad
        # multiplication lookup keyed by i*m + j
        keys = mult[:, 0] * m + mult[:, 1] if len(mult) else np.zeros(0, dtype=np.int64)
        order, self._mptr = _csr(keys, m * m)
        self._mk = mult[order, 2] if len(mult) else np.zeros(0, dtype=np.int64)
        self._mv = mult[order, 3] if len(mult) else np.zeros(0, dtype=np.int64)
        # stacked action lookup keyed by s*m + j
        rows = [np.column_stack([np.full(len(a), s), a]) if len(a) else np.zeros((0, 4), dtype=np.int64)
                for s, a in enumerate(acts)]
        allact = np.concatenate(rows) if rows else np.zeros((0, 4), dtype=np.int64)
        akeys = allact[:, 0] * m + allact[:, 1]
        order, self._aptr = _csr(akeys, self.G.order * m)
        self._ai = allact[order, 2]
        self._av = allact[order, 3]
        self._inv = np.array(self.G.inverse, dtype=np.int64)
        self._table = np.array(self.G.table, dtype=np.int64)

    # -- dimensions and indexing --
    def dim(self, n: int) -> int:
        if n < 0:
            return 0
        if n == 0:
            return self.G.order * self.m
        return self.G.order * (self.m + 1) * self.m ** n

    @property
    def dims(self) -> list[int]:
        return [self.dim(n) for n in range(self.N + 1)]

    def index(self, g: int, word: tuple) -> int:
        m, n = self.m, len(word) - 1
        if n == 0:
            return g * m + word[0]
        idx = g * (m + 1) + word[0] + 1
        for a in word[1:]:
            idx = idx * m + a
        return idx

    def word(self, idx: int, n: int) -> tuple[int, tuple]:
        m = self.m
        if n == 0:
            g, a = divmod(idx, m)
            return g, (a,)
        slots = []
        for _ in range(n):
            idx, a = divmod(idx, m)
            slots.append(a)
        g, w0 = divmod(idx, m + 1)
        return g, (w0 - 1,) + tuple(reversed(slots))

    def labels(self, n: int) -> list[str]:
        out = []
        for i in range(self.dim(n)):
            g, w = self.word(i, n)
            parts = ["1" if w[0] == UNIT else self.A.labels[w[0]]] + ["d" + self.A.labels[a] for a in w[1:]]
            out.append(f"{self.G.labels[g]}|{' '.join(parts)}")
        return out

    def _decode(self, n: int):
        idx = np.arange(self.dim(n), dtype=np.int64)
        m = self.m
        if n == 0:
            return idx // m, [idx % m]
        slots = []
        rest = idx
        for _ in range(n):
            slots.append(rest % m)
            rest = rest // m
        g = rest // (m + 1)
        w0 = rest % (m + 1) - 1
        return g, [w0] + slots[::-1]

    def _encode(self, n: int, g, slots) -> np.ndarray:
        m = self.m
        if n == 0:
            return g * m + slots[0]
        idx = g * (m + 1) + slots[0] + 1
        for a in slots[1:]:
            idx = idx * m + a
        return idx

    def _check(self, n: int, top: int):
        if n < 0 or n > top:
            raise DegreeOverflow(f"degree {n} outside 0..{top} at level {self.N}")

    def _cached(self, key, fn):
        v = self._cache.get(key)
        if v is None:
            v = fn()
            self._cache[key] = v
        return v

    # -- vectorised primitive operators --
    def d(self, n: int) -> SparseMatrix:
        """d: Omega^n -> Omega^{n+1}."""
        self._check(n, self.N - 1)
        return self._cached(("d", n), lambda: self._build_d(n))

    def _build_d(self, n):
        g, slots = self._decode(n)
        cols = np.arange(self.dim(n))
        keep = slots[0] != UNIT
        newslots = [np.full(int(keep.sum()), UNIT, dtype=np.int64)] + [s[keep] for s in slots]
        rows = self._encode(n + 1, g[keep], newslots)
        return SparseMatrix.from_int_triplets((self.dim(n + 1), self.dim(n)), rows, cols[keep], np.ones(len(rows), dtype=np.int64))

    def b(self, n: int) -> SparseMatrix:
        """b_G: Omega^n -> Omega^{n-1}; on degree 0 the zero map to the zero space."""
        self._check(n, self.N)
        if n == 0:
            return SparseMatrix.zeros(0, self.dim(0))
        return self._cached(("b", n), lambda: self._build_b(n))

    def _build_b(self, n):
        m, md, ad = self.m, self.md, self.ad
        g, slots = self._decode(n)
        cols_all = np.arange(self.dim(n), dtype=np.int64)
        R, C, V = [], [], []

        def emit(rows_g, new_slots, cols, vals):
            R.append(self._encode(n - 1, rows_g, new_slots))
            C.append(cols)
            V.append(vals)

        s0 = slots[0]
        # i = 0: s0 * a1
        u = s0 == UNIT
        emit(g[u], [slots[1][u]] + [s[u] for s in slots[2:]], cols_all[u], np.full(int(u.sum()), md * ad, dtype=np.int64))
        nu = ~u
        pos, sel = _expand(s0[nu] * m + slots[1][nu], self._mptr)
        src = np.nonzero(nu)[0][pos]
        emit(g[src], [self._mk[sel]] + [s[src] for s in slots[2:]], src, self._mv[sel] * ad)
        # 1 <= i <= n-1: a_i * a_{i+1}
        for i in range(1, n):
            pos, sel = _expand(slots[i] * m + slots[i + 1], self._mptr)
            sign = -1 if i % 2 else 1
            new = [s[pos] for s in slots[:i]] + [self._mk[sel]] + [s[pos] for s in slots[i + 2:]]
            emit(g[pos], new, pos, sign * self._mv[sel] * ad)
        # last: (-1)^n (g^-1 . a_n) s0
        sign = -1 if n % 2 else 1
        pos, sel = _expand(self._inv[g] * m + slots[n], self._aptr)
        y, yv = self._ai[sel], self._av[sel]
        us = s0[pos] == UNIT
        p_u = pos[us]
        emit(g[p_u], [y[us]] + [s[p_u] for s in slots[1:n]], p_u, sign * yv[us] * md)
        p_n, y_n, yv_n = pos[~us], y[~us], yv[~us]
        pos2, sel2 = _expand(y_n * m + s0[p_n], self._mptr)
        src = p_n[pos2]
        emit(g[src], [self._mk[sel2]] + [s[src] for s in slots[1:n]], src, sign * yv_n[pos2] * self._mv[sel2])
        shape = (self.dim(n - 1), self.dim(n))
        return SparseMatrix.from_int_triplets(shape, np.concatenate(R), np.concatenate(C), np.concatenate(V), md * ad)

    def _slotwise(self, n: int, svec: np.ndarray, newg: np.ndarray) -> SparseMatrix:
        """Apply s_c (per column c) to every slot and move the column to group index newg."""
        m, ad = self.m, self.ad
        g, slots = self._decode(n)
        pos = np.arange(self.dim(n), dtype=np.int64)
        vals = np.ones(len(pos), dtype=np.int64)
        out_slots: list = []
        den = 1
        for k, slot in enumerate(slots):
            x = slot[pos]
            if k == 0 and n > 0:
                u = x == UNIT
                # unit slot is fixed; multiply by ad to keep a common denominator
                keys = np.where(u, 0, svec[pos] * m + np.maximum(x, 0))
                p2, sel = _expand(keys, self._aptr)
                unit_rows = np.nonzero(u)[0]
                nonu = ~u[p2]
                p2, sel = p2[nonu], sel[nonu]
                take = np.concatenate([unit_rows, p2])
                newval = np.concatenate([np.full(len(unit_rows), UNIT, dtype=np.int64), self._ai[sel]])
                mul = np.concatenate([np.full(len(unit_rows), ad, dtype=np.int64), self._av[sel]])
            else:
                take, sel = _expand(svec[pos] * m + x, self._aptr)
                newval, mul = self._ai[sel], self._av[sel]
            out_slots = [s[take] for s in out_slots] + [newval]
            pos = pos[take]
            vals = vals[take] * mul
            den *= ad
        rows = self._encode(n, newg[pos], out_slots)
        return SparseMatrix.from_int_triplets((self.dim(n), self.dim(n)), rows, pos, vals, den)

    def T(self, n: int) -> SparseMatrix:
        """T(delta_g (x) w) = delta_g (x) g^-1 . w."""
        self._check(n, self.N)

        def build():
            g, _ = self._decode(n)
            return self._slotwise(n, self._inv[g], g)

        return self._cached(("T", n), build)

    def T_inverse(self, n: int) -> SparseMatrix:
        self._check(n, self.N)

        def build():
            g, _ = self._decode(n)
            return self._slotwise(n, g, g)

        return self._cached(("Tinv", n), build)

    def act(self, t: int, n: int) -> SparseMatrix:
        """G-action t.(delta_g (x) w) = delta_{t g t^-1} (x) t.w."""
        self._check(n, self.N)

        def build():
            g, _ = self._decode(n)
            newg = self._table[self._table[t, g], self._inv[t]]
            return self._slotwise(n, np.full(len(g), t, dtype=np.int64), newg)

        return self._cached(("act", t, n), build)

    def og(self, h: int, n: int) -> SparseMatrix:
        """Multiplication by delta_h in O_G: projection onto the h-component."""
        self._check(n, self.N)

        def build():
            g, _ = self._decode(n)
            cols = np.nonzero(g == h)[0]
            return SparseMatrix.from_int_triplets((self.dim(n), self.dim(n)), cols, cols, np.ones(len(cols), dtype=np.int64))

        return self._cached(("og", h, n), build)

    def identity(self, n: int) -> SparseMatrix:
        return self._cached(("id", n), lambda: SparseMatrix.identity(self.dim(n)))

    # -- derived operators --
    def kappa(self, n: int) -> SparseMatrix:
        """kappa = id - (bd + db) on Omega^n (needs degree n+1)."""
        self._check(n, self.N - 1)

        def build():
            k = self.identity(n) - self.b(n + 1) @ self.d(n)
            if n > 0:
                k = k - self.d(n - 1) @ self.b(n)
            return k

        return self._cached(("kappa", n), build)

    def kappa_power(self, n: int, j: int) -> SparseMatrix:
        if j == 0:
            return self.identity(n)
        return self._cached(("kpow", n, j), lambda: self.kappa(n) @ self.kappa_power(n, j - 1))

    def B(self, n: int) -> SparseMatrix:
        """B = sum_{j=0}^{n} kappa^j d : Omega^n -> Omega^{n+1}."""
        self._check(n, self.N - 2)

        def build():
            x = self.d(n)
            acc = x
            k = self.kappa(n + 1)
            for _ in range(n):
                x = k @ x
                acc = acc + x
            return acc

        return self._cached(("B", n), build)

    # -- formula-by-formula constructions (independent route) --
    def _columns(self, n: int, ntgt: int, fn) -> SparseMatrix:
        cols = []
        for i in range(self.dim(n)):
            g, w = self.word(i, n)
            out = {}
            for (tg, tw), c in fn(g, w).items():
                _add(out, self.index(tg, tw), c)
            cols.append(out)
        return SparseMatrix.from_columns(self.dim(ntgt), cols)

    def d_formula(self, n: int) -> SparseMatrix:
        self._check(n, self.N - 1)
        ar = self.arith
        return self._columns(n, n + 1, lambda g, w: {(g, k): c for k, c in ar.d({w: _ONE}).items()})

    def b_formula(self, n: int) -> SparseMatrix:
        self._check(n, self.N)
        ar, G = self.arith, self.G
        return self._columns(n, n - 1, lambda g, w: {(g, k): c for k, c in ar.b_plain({w: _ONE}, G.inv(g)).items()})

    def kappa_formula(self, n: int) -> SparseMatrix:
        """Closed formula: (-1)^(n-1) (g^-1 . dx) w on n >= 1 and g^-1 . x on degree 0."""
        self._check(n, self.N)
        ar, G, A = self.arith, self.G, self.A

        def col(g, w):
            gi = G.inv(g)
            if n == 0:
                return {(g, (k,)): c for k, c in A.act[gi][w[0]].items()}
            head, x = w[:-1], w[-1]
            sign = -1 if (n - 1) % 2 else 1
            res = ar.dlmul(A.act[gi][x], {head: _ONE})
            return {(g, k): sign * c for k, c in res.items()}

        return self._columns(n, n, col)

    def B_formula(self, n: int) -> SparseMatrix:
        """Closed formula sum_i (-1)^(ni) g^-1.(dx_{n+1-i}..dx_n) dx_0..dx_{n-i}."""
        self._check(n, self.N - 1)
        ar, G = self.arith, self.G

        def col(g, w):
            out: dict = {}
            if w[0] == UNIT:
                return out
            gi = G.inv(g)
            for i in range(n + 1):
                sign = -1 if (n * i) % 2 else 1
                lead = ar.act(gi, {(UNIT,) + w[n + 1 - i:]: _ONE}) if i else {(UNIT,): _ONE}
                tail = w[: n + 1 - i]
                for lw, c in lead.items():
                    _add(out, (g, lw + tail), sign * c)
            return out

        return self._columns(n, n + 1, col)

    def T_formula(self, n: int) -> SparseMatrix:
        ar, G = self.arith, self.G
        return self._columns(n, n, lambda g, w: {(g, k): c for k, c in ar.act(G.inv(g), {w: _ONE}).items()})

    def act_formula(self, t: int, n: int) -> SparseMatrix:
        ar, G = self.arith, self.G
        return self._columns(n, n, lambda g, w: {(G.conj(t, g), k): c for k, c in ar.act(t, {w: _ONE}).items()})

    # -- helpers for maps given on basis elements --
    def vector(self, n: int, terms: dict) -> dict:
        """{(g, word): c} -> {index: c}."""
        out: dict = {}
        for (g, w), c in terms.items():
            _add(out, self.index(g, w), c)
        return out
