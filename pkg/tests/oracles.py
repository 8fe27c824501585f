"""Independent oracles: dense Fraction elimination and a naive form calculus.

Nothing here calls the engine's linear algebra or operator builders.  The form
calculus works on words directly with the Leibniz rule of the universal
differential algebra, so its matrices are an independent route to d, b, kappa,
B, T and the actions.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

# ---------------------------------------------------------------------------
# dense linear algebra over Q


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(int(x.numerator), int(x.denominator))


def dense(m) -> list[list[Fraction]]:
    """Rows of Fractions from an engine SparseMatrix or a nested list."""
    rows = m.to_dense() if hasattr(m, "to_dense") else m
    return [[frac(x) for x in r] for r in rows]


def zeros(r: int, c: int) -> list[list[Fraction]]:
    return [[Fraction(0)] * c for _ in range(r)]


def eye(n: int) -> list[list[Fraction]]:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def matmul(a, b):
    if not a:
        return []
    ncols = len(b[0]) if b else 0
    out = zeros(len(a), ncols)
    for i, row in enumerate(a):
        acc = out[i]
        for k, x in enumerate(row):
            if x:
                for j, y in enumerate(b[k]):
                    if y:
                        acc[j] += x * y
    return out


def hcat(*ms, nrows: int | None = None):
    nrows = nrows if nrows is not None else next(len(m) for m in ms if m is not None)
    return [sum((list(m[i]) for m in ms if m and m[0] is not None), []) for i in range(nrows)]


def rref(m) -> tuple[list[list[Fraction]], list[int]]:
    a = [list(r) for r in m]
    piv = []
    r = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], piv


def rank(m) -> int:
    if not m or not m[0]:
        return 0
    return len(rref(m)[1])


def nullspace(m, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis vectors (as lists) of {x : m x = 0}."""
    ncols = ncols if ncols is not None else (len(m[0]) if m else 0)
    if not m:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, piv = rref(m)
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, piv):
            v[p] = -row[f]
        out.append(v)
    return out


def columns_to_matrix(cols: list[list[Fraction]], nrows: int):
    return [[c[i] for c in cols] for i in range(nrows)]


def supercomplex_homology(d_even, d_odd) -> tuple[int, int]:
    """(dim H_even, dim H_odd) of E -d_even-> O -d_odd-> E by dense ranks."""
    ne = len(d_even[0]) if d_even and d_even[0] else len(d_odd)
    no = len(d_odd[0]) if d_odd and d_odd[0] else len(d_even)
    re, ro = rank(d_even), rank(d_odd)
    return ne - re - ro, no - ro - re


# ---------------------------------------------------------------------------
# naive forms over O_G (x) Omega(A)

U = None  # the adjoined unit in the leading slot


class NaiveForms:
    """Forms delta_s (x) a0 da1 ... dan as dictionaries {(s, word): Fraction}."""

    def __init__(self, A):
        self.A = A
        self.G = A.group
        self.m = A.dim
        self.mult = [[{k: frac(v) for k, v in A.mult[i][j].items()} for j in range(self.m)] for i in range(self.m)]
        self.acts = [[{k: frac(v) for k, v in A.act[s][j].items()} for j in range(self.m)]
                     for s in range(self.G.order)]

    # bases
    def words(self, n: int) -> list[tuple]:
        if n == 0:
            return [(a,) for a in range(self.m)]
        lead = [U] + list(range(self.m))
        return [(a0,) + rest for a0 in lead for rest in itertools.product(range(self.m), repeat=n)]

    def basis(self, n: int) -> list[tuple]:
        return [(s, w) for s in range(self.G.order) for w in self.words(n)]

    # word arithmetic (single group component)
    @staticmethod
    def _acc(out: dict, key, c):
        v = out.get(key, Fraction(0)) + c
        if v:
            out[key] = v
        else:
            out.pop(key, None)

    def rmul(self, word: tuple, y: int) -> dict:
        """(a0 da1 ... dan) * y by dan y = d(an y) - an dy."""
        if len(word) == 1:
            if word[0] is U:
                return {(y,): Fraction(1)}
            return {(k,): c for k, c in self.mult[word[0]][y].items()}
        head, an = word[:-1], word[-1]
        out: dict = {}
        for k, c in self.mult[an][y].items():
            self._acc(out, head + (k,), c)
        for w, c in self.rmul(head, an).items():
            self._acc(out, w + (y,), -c)
        return out

    def lmul(self, x: int, word: tuple) -> dict:
        if word[0] is U:
            return {(x,) + word[1:]: Fraction(1)}
        return {(k,) + word[1:]: c for k, c in self.mult[x][word[0]].items()}

    def dlmul(self, x: int, word: tuple) -> dict:
        """dx * (a0 da1 ...) = d(x a0) da1 ... - x da0 da1 ..."""
        if word[0] is U:
            return {(U, x) + word[1:]: Fraction(1)}
        out: dict = {}
        for k, c in self.mult[x][word[0]].items():
            self._acc(out, (U, k) + word[1:], c)
        self._acc(out, (x,) + word, Fraction(-1))
        return out

    def act_word(self, s: int, word: tuple) -> dict:
        slots = [[(U, Fraction(1))] if a is U else list(self.acts[s][a].items()) for a in word]
        out: dict = {}
        for combo in itertools.product(*slots):
            c = Fraction(1)
            for _, x in combo:
                c *= x
            self._acc(out, tuple(a for a, _ in combo), c)
        return out

    # operators on basis elements (s, word) -> {(s', word'): c}
    def d(self, s: int, word: tuple) -> dict:
        if len(word) > 1 and word[0] is U:
            return {}
        return {(s, (U,) + word): Fraction(1)}

    def b(self, s: int, word: tuple) -> dict:
        n = len(word) - 1
        if n == 0:
            return {}
        omega, x = word[:-1], word[-1]
        sign = Fraction((-1) ** (n - 1))
        out: dict = {}
        for w, c in self.rmul(omega, x).items():
            self._acc(out, (s, w), sign * c)
        sinv = self.G.inverse[s]
        for k, c in self.acts[sinv][x].items():
            for w, c2 in self.lmul(k, omega).items():
                self._acc(out, (s, w), -sign * c * c2)
        return out

    def kappa(self, s: int, word: tuple) -> dict:
        sinv = self.G.inverse[s]
        n = len(word) - 1
        if n == 0:
            return {(s, w): c for w, c in self.act_word(sinv, word).items()}
        omega, x = word[:-1], word[-1]
        sign = Fraction((-1) ** (n - 1))
        out: dict = {}
        for k, c in self.acts[sinv][x].items():
            for w, c2 in self.dlmul(k, omega).items():
                self._acc(out, (s, w), sign * c * c2)
        return out

    def T(self, s: int, word: tuple) -> dict:
        return {(s, w): c for w, c in self.act_word(self.G.inverse[s], word).items()}

    def act(self, t: int, s: int, word: tuple) -> dict:
        return {(self.G.conj(t, s), w): c for w, c in self.act_word(t, word).items()}

    def og(self, h: int, s: int, word: tuple) -> dict:
        return {(s, word): Fraction(1)} if s == h else {}

    # matrices in a caller-given ordering
    def matrix(self, op, n_src: int, n_tgt: int, index=None) -> list[list[Fraction]]:
        src, tgt = self.basis(n_src), self.basis(n_tgt)
        pos = index(n_tgt) if index else {k: i for i, k in enumerate(tgt)}
        out = zeros(len(tgt), len(src))
        order = index(n_src) if index else {k: i for i, k in enumerate(src)}
        for key in src:
            j = order[key]
            for tkey, c in op(*key).items():
                out[pos[tkey]][j] += c
        return out

    def compose(self, *ops):
        """Operator applying ops right to left on form dictionaries."""
        def run(s, word):
            cur = {(s, word): Fraction(1)}
            for op in reversed(ops):
                nxt: dict = {}
                for (s2, w2), c in cur.items():
                    for k, c2 in op(s2, w2).items():
                        self._acc(nxt, k, c * c2)
                cur = nxt
            return cur
        return run

    def B(self, s: int, word: tuple) -> dict:
        """sum_{j=0}^{n} kappa^j d on degree n."""
        n = len(word) - 1
        out: dict = {}
        cur = self.d(s, word)
        for _ in range(n + 1):
            for k, c in cur.items():
                self._acc(out, k, c)
            nxt: dict = {}
            for (s2, w2), c in cur.items():
                for k, c2 in self.kappa(s2, w2).items():
                    self._acc(nxt, k, c * c2)
            cur = nxt
        return out


def engine_index(fs):
    """Ordering map of NaiveForms keys onto engine coordinates (leading unit encoded as -1)."""
    def index(n):
        return {(s, w): fs.index(s, tuple(-1 if a is U else a for a in w)) for s, w in NaiveForms(fs.A).basis(n)}
    return index


# ---------------------------------------------------------------------------
# truncated tower homology, stable images
#
# Matrices below are (rows, nrows, ncols) triples so that empty spaces keep
# their shapes.


def mat(rows, nrows: int, ncols: int):
    return (rows if nrows else [], nrows, ncols)


def mrank(m) -> int:
    rows, nr, nc = m
    return rank(rows) if nr and nc else 0


def mmul(a, b):
    ra, nra, nca = a
    rb, nrb, ncb = b
    assert nca == nrb, (nca, nrb)
    if not nra or not ncb:
        return mat([], nra, ncb)
    if not nca:
        return mat(zeros(nra, ncb), nra, ncb)
    return mat(matmul(ra, rb), nra, ncb)


def mhcat(*ms):
    nr = ms[0][1]
    assert all(m[1] == nr for m in ms)
    nc = sum(m[2] for m in ms)
    rows = [sum((list(m[0][i]) for m in ms if m[2]), []) for i in range(nr)]
    return mat(rows, nr, nc)


def meye(n: int):
    return mat(eye(n), n, n)


class NaiveTower:
    """theta^n as V = Omega^0..Omega^n modulo W = b(Omega^{n+1}), boundary B + b, optionally on G-invariants.

    For a subquotient V'/W' with boundary D (D W' in W'):
      cycles     Z = {v in V' : D v in W'},  dim Z = dim V' - (rank[D V' | W'] - rank W')
      boundaries B = D V'_other + W'
    and H = Z / B.
    """

    def __init__(self, A, invariant: bool):
        self.nf = NaiveForms(A)
        self.invariant = invariant
        self._cache: dict = {}

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def op(self, name, n_src, n_tgt):
        return self._memo((name, n_src, n_tgt), lambda: self.nf.matrix(getattr(self.nf, name), n_src, n_tgt))

    def act(self, t, j):
        return self._memo(("act", t, j), lambda: self.nf.matrix(lambda s, w: self.nf.act(t, s, w), j, j))

    def dim(self, n):
        return len(self.nf.basis(n))

    def offsets(self, n, parity):
        out, pos = {}, 0
        for j in range(n + 1):
            if j % 2 == parity:
                out[j] = pos
                pos += self.dim(j)
        return out, pos

    def boundary(self, n, parity):
        """B + b from parity to 1 - parity on V (B dropped out of degree n)."""
        so, sd = self.offsets(n, parity)
        to, td = self.offsets(n, 1 - parity)
        out = zeros(td, sd)
        for j, c0 in so.items():
            parts = []
            if j >= 1:
                parts.append(("b", j - 1))
            if j + 1 <= n:
                parts.append(("B", j + 1))
            for name, t in parts:
                r0 = to[t]
                for r, row in enumerate(self.op(name, j, t)):
                    for c, x in enumerate(row):
                        if x:
                            out[r0 + r][c0 + c] += x
        return mat(out, td, sd)

    def averaging(self, n, parity):
        def build():
            so, sd = self.offsets(n, parity)
            P = zeros(sd, sd)
            order = self.nf.G.order
            for j, c0 in so.items():
                for t in range(order):
                    for r, row in enumerate(self.act(t, j)):
                        for c, x in enumerate(row):
                            if x:
                                P[c0 + r][c0 + c] += x / order
            return mat(P, sd, sd)
        return self._memo(("avg", n, parity), build)

    def W(self, n, parity):
        """Generators of b(Omega^{n+1}) inside V_parity (none if n has the other parity)."""
        so, sd = self.offsets(n, parity)
        if n not in so:
            return mat([], sd, 0)
        img = self.op("b", n + 1, n)
        ncols = self.dim(n + 1)
        out = zeros(sd, ncols)
        for r, row in enumerate(img):
            out[so[n] + r] = list(row)
        return mat(out, sd, ncols)

    def space(self, n, parity):
        """(basis of V_parity or of its invariants, generators of W or of W^G)."""
        def build():
            _, sd = self.offsets(n, parity)
            W = self.W(n, parity)
            if not self.invariant:
                return meye(sd), W
            P = self.averaging(n, parity)
            if not sd:
                return mat([], 0, 0), W
            red, _ = rref(transpose(P[0]))
            basis = mat(transpose(red), sd, len(red)) if red else mat(zeros(sd, 0), sd, 0)
            return basis, mmul(P, W)
        return self._memo(("space", n, parity), build)

    def _system(self, n, parity):
        I, _ = self.space(n, parity)
        _, Wt = self.space(n, 1 - parity)
        return mmul(self.boundary(n, parity), I), Wt, I

    def cycle_dim(self, n, parity) -> int:
        DI, Wt, I = self._system(n, parity)
        return I[2] - (mrank(mhcat(DI, Wt)) - mrank(Wt))

    def cycles(self, n, parity):
        """Columns (in V coordinates) spanning the cycles."""
        DI, Wt, I = self._system(n, parity)
        k, nw = I[2], Wt[2]
        if DI[1] == 0:
            return I
        sysm = mhcat(DI, mat([[-x for x in r] for r in Wt[0]], Wt[1], nw) if nw else Wt)
        sol = nullspace(sysm[0], k + nw)
        cs = [v[:k] for v in sol]
        cols = mat(columns_to_matrix(cs, k), k, len(cs)) if cs else mat(zeros(k, 0), k, 0)
        return mmul(I, cols)

    def boundaries(self, n, parity):
        I, _ = self.space(n, 1 - parity)
        _, Wp = self.space(n, parity)
        return mhcat(mmul(self.boundary(n, 1 - parity), I), Wp)

    def projection(self, hi, lo, parity):
        """V_parity(theta^hi) -> V_parity(theta^lo), dropping degrees above lo."""
        sh, dh = self.offsets(hi, parity)
        sl, dl = self.offsets(lo, parity)
        out = zeros(dl, dh)
        for j, c0 in sl.items():
            for i in range(self.dim(j)):
                out[c0 + i][sh[j] + i] = Fraction(1)
        return mat(out, dl, dh)

    def homology(self, n, parity) -> int:
        return self.cycle_dim(n, parity) - mrank(self.boundaries(n, parity))

    def stable_image(self, lo, parity) -> int:
        """dim of the image of H(theta^{lo+2}) -> H(theta^lo)."""
        Z = self.cycles(lo + 2, parity)
        img = mmul(self.projection(lo + 2, lo, parity), Z)
        Bd = self.boundaries(lo, parity)
        return mrank(mhcat(img, Bd)) - mrank(Bd)


def transpose(m):
    return [list(r) for r in zip(*m)] if m else []


def tower_stable_dims(A, N: int, invariant: bool) -> list[tuple[int, int]]:
    """Stable images H(theta^{m+2}) -> H(theta^m) for m in (N-4, N-2), m >= 0."""
    tw = NaiveTower(A, invariant)
    return [(tw.stable_image(m, 0), tw.stable_image(m, 1)) for m in (N - 4, N - 2) if m >= 0]
