"""Finite-dimensional G-algebras given by structure constants."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np
from gmpy2 import mpq

from .errors import GroupMismatch, InvalidInput
from .groups import COUNTING, FiniteGroup, GModule, MeasureConvention, trivial_group
from .linalg import Q, SparseMatrix

_ZERO = mpq(0)


def _vadd(acc: dict, v: dict, c=1) -> dict:
    for k, x in v.items():
        nv = acc.get(k, _ZERO) + c * x
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)
    return acc


@dataclass(eq=False)
class GAlgebra:
    """Algebra with basis e_0..e_{dim-1}; mult[i][j] = {k: c} means e_i e_j = sum c e_k.

    act[s][j] = {i: c} gives s . e_j; unit is a vector or None.
    """

    group: FiniteGroup
    dim: int
    mult: list
    act: list
    unit: dict | None = None
    name: str = "algebra"
    labels: tuple = field(default=())

    def __post_init__(self):
        if not self.labels:
            self.labels = tuple(f"e{i}" for i in range(self.dim))
        self._action_mats = None
        self._int_data = None

    # -- basic arithmetic on coordinate dictionaries --
    def product(self, u: dict, v: dict) -> dict:
        out: dict = {}
        for i, x in u.items():
            row = self.mult[i]
            for j, y in v.items():
                _vadd(out, row[j], x * y)
        return out

    def act_vec(self, s: int, v: dict) -> dict:
        out: dict = {}
        for j, x in v.items():
            _vadd(out, self.act[s][j], x)
        return out

    @property
    def is_unital(self) -> bool:
        return self.unit is not None

    def action_matrix(self, s: int) -> SparseMatrix:
        if self._action_mats is None:
            self._action_mats = [SparseMatrix.from_columns(self.dim, self.act[t]) for t in range(self.group.order)]
        return self._action_mats[s]

    def module(self) -> GModule:
        return GModule(self.group, self.dim, [self.action_matrix(s) for s in range(self.group.order)])

    def mult_matrix(self) -> SparseMatrix:
        """Multiplication A (x) A -> A with column index i*dim + j."""
        return SparseMatrix.from_columns(self.dim, [self.mult[i][j] for i in range(self.dim) for j in range(self.dim)])

    def check(self) -> list[str]:
        """All G-algebra axioms; returns a list of violations (empty when valid)."""
        problems = []
        n, G = self.dim, self.group
        for i, j, k in itertools.product(range(n), repeat=3):
            left = self.product(self.mult[i][j], {k: 1})
            right = self.product({i: 1}, self.mult[j][k])
            if left != right:
                problems.append(f"not associative on ({i},{j},{k})")
                if len(problems) > 5:
                    return problems
        problems.extend(self.module().check())
        for s in range(G.order):
            for i, j in itertools.product(range(n), repeat=2):
                lhs = self.act_vec(s, self.mult[i][j])
                rhs = self.product(self.act[s][i], self.act[s][j])
                if lhs != rhs:
                    problems.append(f"action of {s} is not multiplicative on ({i},{j})")
                    break
        if self.unit is not None:
            for i in range(n):
                if self.product(self.unit, {i: 1}) != {i: mpq(1)} or self.product({i: 1}, self.unit) != {i: mpq(1)}:
                    problems.append(f"unit fails on e{i}")
            for s in range(G.order):
                if self.act_vec(s, self.unit) != {k: v for k, v in self.unit.items() if v}:
                    problems.append(f"unit not fixed by {s}")
        return problems

    def int_data(self):
        """Structure constants and action as integer arrays with common denominators.

        Returns (mult_entries, mult_den, act_entries, act_den) where mult_entries
        is an int64 array of rows (i, j, k, num) and act_entries[s] of rows (j, i, num).
        """
        if self._int_data is None:
            md = 1
            for i in range(self.dim):
                for j in range(self.dim):
                    for v in self.mult[i][j].values():
                        md = md * int(v.denominator) // gcd(md, int(v.denominator))
            rows = [(i, j, k, int(v * md)) for i in range(self.dim) for j in range(self.dim)
                    for k, v in sorted(self.mult[i][j].items())]
            ad = 1
            for s in range(self.group.order):
                for c in self.act[s]:
                    for v in c.values():
                        ad = ad * int(v.denominator) // gcd(ad, int(v.denominator))
            acts = []
            for s in range(self.group.order):
                acts.append(np.array([(j, i, int(v * ad)) for j in range(self.dim)
                                      for i, v in sorted(self.act[s][j].items())], dtype=np.int64).reshape(-1, 3))
            self._int_data = (np.array(rows, dtype=np.int64).reshape(-1, 4), md, acts, ad)
        return self._int_data

    def __repr__(self):
        return f"GAlgebra({self.name}, dim={self.dim}, G={self.group.name})"


def _clean(d: dict) -> dict:
    return {k: Q(v) for k, v in d.items() if v}


def make_algebra(G: FiniteGroup, dim: int, mult_fn, act_fn, unit=None, name="algebra", labels=()) -> GAlgebra:
    """Build from callables mult_fn(i, j) -> dict and act_fn(s, j) -> dict."""
    mult = [[_clean(mult_fn(i, j)) for j in range(dim)] for i in range(dim)]
    act = [[_clean(act_fn(s, j)) for j in range(dim)] for s in range(G.order)]
    return GAlgebra(G, dim, mult, act, _clean(unit) if unit is not None else None, name, tuple(labels))


def _parse_constants(G: FiniteGroup, dim: int, constants, action, unit):
    mult = [[{} for _ in range(dim)] for _ in range(dim)]
    for entry in constants:
        i, j, k, num, den = (int(x) for x in entry)
        if den == 0 or not all(0 <= x < dim for x in (i, j, k)):
            raise InvalidInput(f"bad structure constant {entry}")
        _vadd(mult[i][j], {k: mpq(num, den)})
    act = []
    for s in range(G.order):
        if action is not None and (s in action or str(s) in action):
            entries = action.get(s, action.get(str(s)))
            cols = [{} for _ in range(dim)]
            for entry in entries:
                i, j, num, den = (int(x) for x in entry)
                if den == 0 or not (0 <= i < dim and 0 <= j < dim):
                    raise InvalidInput(f"bad action entry {entry}")
                _vadd(cols[j], {i: mpq(num, den)})
            act.append(cols)
        else:
            act.append([{j: mpq(1)} for j in range(dim)])
    u = None
    if unit is not None:
        u = {}
        for entry in unit:
            k, num, den = (int(x) for x in entry)
            if den == 0 or not 0 <= k < dim:
                raise InvalidInput(f"bad unit entry {entry}")
            _vadd(u, {k: mpq(num, den)})
    return mult, act, u


def from_structure_constants(G: FiniteGroup, dim: int, constants, action=None, unit=None, name="inline") -> GAlgebra:
    """constants: iterable of (i, j, k, num, den); action: {s: [(i, j, num, den)]} meaning
    s . e_j has coefficient num/den on e_i (identity when omitted); unit: list of (k, num, den)."""
    try:
        mult, act, u = _parse_constants(G, dim, constants, action, unit)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"malformed inline algebra: {exc}") from None
    A = GAlgebra(G, dim, mult, act, u, name)
    problems = A.check()
    if problems:
        raise InvalidInput("; ".join(problems[:5]))
    return A


# ---------------------------------------------------------------------------
# builtin algebras


def scalars(G: FiniteGroup) -> GAlgebra:
    return make_algebra(G, 1, lambda i, j: {0: 1}, lambda s, j: {j: 1}, {0: 1}, "scalars", ("1",))


def dual_numbers(G: FiniteGroup) -> GAlgebra:
    """The nonunital algebra spanned by x with x^2 = 0 and trivial action."""
    return make_algebra(G, 1, lambda i, j: {}, lambda s, j: {j: 1}, None, "dual-numbers", ("x",))


def group_algebra_adjoint(G: FiniteGroup) -> GAlgebra:
    return make_algebra(G, G.order, lambda i, j: {G.mul(i, j): 1}, lambda s, j: {G.conj(s, j): 1},
                        {G.identity: 1}, "group-algebra-adjoint", tuple(f"u[{l}]" for l in G.labels))


def algebra_OG(G: FiniteGroup) -> GAlgebra:
    """Functions on G, pointwise product, (t.f)(s) = f(t^-1 s t); basis delta functions."""
    return make_algebra(G, G.order, lambda i, j: {i: 1} if i == j else {}, lambda s, j: {G.conj(s, j): 1},
                        {g: 1 for g in range(G.order)}, "O_G", tuple(f"delta[{l}]" for l in G.labels))


def sign_character(G: FiniteGroup) -> list[int]:
    """First nontrivial homomorphism G -> Z/2 (by generator assignment order), else trivial."""
    gens = G.generators()
    for bits in itertools.product((0, 1), repeat=len(gens)):
        if not any(bits):
            continue
        chi = {G.identity: 0}
        frontier = [G.identity]
        ok = True
        while frontier and ok:
            new = []
            for x in frontier:
                for g, b in zip(gens, bits):
                    y = G.mul(x, g)
                    val = chi[x] ^ b
                    if y in chi:
                        if chi[y] != val:
                            ok = False
                            break
                    else:
                        chi[y] = val
                        new.append(y)
                if not ok:
                    break
            frontier = new
        if ok:
            return [chi[g] for g in range(G.order)]
    return [0] * G.order


def functions_on_gset(G: FiniteGroup, perms=None) -> GAlgebra:
    """Functions on a finite G-set; perms[s][x] is the image of point x under s.

    Default: a two-point set on which G acts through sign_character.
    """
    if perms is None:
        chi = sign_character(G)
        perms = [[x ^ chi[s] for x in range(2)] for s in range(G.order)]
    npts = len(perms[0])
    return make_algebra(G, npts, lambda i, j: {i: 1} if i == j else {}, lambda s, j: {perms[s][j]: 1},
                        {x: 1 for x in range(npts)}, "functions-on-G-set", tuple(f"delta[{x}]" for x in range(npts)))


def algebra_KG(G: FiniteGroup, measure: MeasureConvention = COUNTING) -> GAlgebra:
    """Kernels on G x G; basis [r,t] has index r*|G| + t."""
    n = G.order
    w = measure.weight(G)

    def mult(a, b):
        r, p = divmod(a, n)
        q, t = divmod(b, n)
        return {r * n + t: w} if p == q else {}

    def act(s, a):
        r, t = divmod(a, n)
        return {G.mul(s, r) * n + G.mul(s, t): 1}

    unit = {r * n + r: 1 / w for r in range(n)}
    labels = tuple(f"[{G.labels[r]},{G.labels[t]}]" for r in range(n) for t in range(n))
    return make_algebra(G, n * n, mult, act, unit, f"K_G({measure.kind})", labels)


def group_convolution_algebra(G: FiniteGroup, measure: MeasureConvention = COUNTING) -> GAlgebra:
    """D(G) with (f*g)(t) = sum_s w(s) f(s) g(s^-1 t); trivial action."""
    w = measure.weight(G)
    return make_algebra(G, G.order, lambda i, j: {G.mul(i, j): w}, lambda s, j: {j: 1},
                        {G.identity: 1 / w}, f"D(G)({measure.kind})", tuple(f"u[{l}]" for l in G.labels))


def matrix_algebra(G: FiniteGroup, n: int, conj=None, upper: bool = False) -> GAlgebra:
    """n x n matrices (or upper triangular ones); G acts by conj[s] X conj[s]^-1.

    conj[s] must be a rational matrix (list of lists) with inverse conj[s^-1].
    """
    pairs = [(i, j) for i in range(n) for j in range(n) if not upper or i <= j]
    index = {p: k for k, p in enumerate(pairs)}

    def mult(a, b):
        (i, j), (k, l) = pairs[a], pairs[b]
        return {index[(i, l)]: 1} if j == k else {}

    if conj is None:
        conj = [[[int(i == j) for j in range(n)] for i in range(n)] for _ in range(G.order)]

    def act(s, a):
        i, j = pairs[a]
        u, v = conj[s], conj[G.inv(s)]
        out = {}
        for p in range(n):
            for q in range(n):
                c = Q(u[p][i]) * Q(v[j][q])
                if c:
                    if (p, q) not in index:
                        raise InvalidInput("conjugation does not preserve the subalgebra")
                    _vadd(out, {index[(p, q)]: c})
        return out

    unit = {index[(i, i)]: 1 for i in range(n)}
    labels = tuple(f"E{i}{j}" for i, j in pairs)
    return make_algebra(G, len(pairs), mult, act, unit, ("T" if upper else "M") + str(n), labels)


def unitarize(A: GAlgebra) -> GAlgebra:
    """A+ with the adjoined unit as the last basis vector."""
    m = A.dim

    def mult(i, j):
        if i == m and j == m:
            return {m: 1}
        if i == m:
            return {j: 1}
        if j == m:
            return {i: 1}
        return A.mult[i][j]

    def act(s, j):
        return {m: 1} if j == m else A.act[s][j]

    return make_algebra(A.group, m + 1, mult, act, {m: 1}, f"unitarize({A.name})", A.labels + ("1+",))


def forget_action(A: GAlgebra) -> GAlgebra:
    """The same algebra regarded over the trivial group."""
    G1 = trivial_group()
    return GAlgebra(G1, A.dim, A.mult, [[dict(c) for c in A.act[A.group.identity]]], A.unit, A.name, A.labels)


def crossed_product(A: GAlgebra, measure: MeasureConvention = COUNTING) -> GAlgebra:
    """A x| G with basis a_i x| g at index i*|G| + g and the conjugation G-action."""
    G = A.group
    n = G.order
    w = measure.weight(G)

    def mult(a, b):
        i, u = divmod(a, n)
        j, v = divmod(b, n)
        uv = G.mul(u, v)
        out = {}
        for k, c in A.product({i: 1}, A.act[u][j]).items():
            out[k * n + uv] = w * c
        return out

    def act(s, a):
        i, u = divmod(a, n)
        cu = G.conj(s, u)
        return {k * n + cu: c for k, c in A.act[s][i].items()}

    unit = None
    if A.unit is not None:
        unit = {k * n + G.identity: c / w for k, c in A.unit.items()}
    labels = tuple(f"{A.labels[i]}x|{G.labels[u]}" for i in range(A.dim) for u in range(n))
    return make_algebra(G, A.dim * n, mult, act, unit, f"crossed({A.name},{measure.kind})", labels)


def tensor_galgebras(A: GAlgebra, B: GAlgebra) -> GAlgebra:
    if A.group is not B.group and A.group.table != B.group.table:
        raise GroupMismatch("tensor product needs a common group")
    nb = B.dim

    def mult(a, b):
        i, j = divmod(a, nb)
        k, l = divmod(b, nb)
        out = {}
        for p, x in A.mult[i][k].items():
            for q, y in B.mult[j][l].items():
                out[p * nb + q] = x * y
        return out

    def act(s, a):
        i, j = divmod(a, nb)
        return {p * nb + q: x * y for p, x in A.act[s][i].items() for q, y in B.act[s][j].items()}

    unit = None
    if A.unit is not None and B.unit is not None:
        unit = {p * nb + q: x * y for p, x in A.unit.items() for q, y in B.unit.items()}
    labels = tuple(f"{a}(x){b}" for a in A.labels for b in B.labels)
    return make_algebra(A.group, A.dim * nb, mult, act, unit, f"tensor({A.name},{B.name})", labels)


def algebra_map_check(f: SparseMatrix, A: GAlgebra, B: GAlgebra, unital: bool = False) -> list[str]:
    """Violations of: f multiplicative and equivariant (and unital if requested)."""
    problems = []
    cols = [f.col(i) for i in range(A.dim)]
    for i in range(A.dim):
        for j in range(A.dim):
            lhs = f.apply(A.mult[i][j])
            rhs = B.product(cols[i], cols[j])
            if lhs != rhs:
                problems.append(f"not multiplicative on ({i},{j})")
    for s in range(A.group.order):
        if f @ A.action_matrix(s) != B.action_matrix(s) @ f:
            problems.append(f"not equivariant for {s}")
    if unital and A.unit is not None and B.unit is not None:
        if f.apply(A.unit) != B.unit:
            problems.append("not unital")
    return problems


def augmentation_square_zero(G: FiniteGroup) -> GAlgebra:
    """The augmentation ideal of Q[G] (basis e_g - e_1, g != 1) with zero product and translation action."""
    others = [g for g in range(G.order) if g != G.identity]
    pos = {g: i for i, g in enumerate(others)}

    def act(s, j):
        out: dict = {}
        for g, c in ((G.mul(s, others[j]), 1), (s, -1)):
            if g != G.identity:
                out[pos[g]] = out.get(pos[g], 0) + c
        return {k: v for k, v in out.items() if v}

    return make_algebra(G, len(others), lambda i, j: {}, act, None, "augmentation-square-zero",
                        tuple(f"e[{G.labels[g]}]-e" for g in others))


def builtin_algebra(name: str, G: FiniteGroup, measure: MeasureConvention = COUNTING) -> GAlgebra:
    from .errors import InvalidInput

    key = name.strip().lower()
    table = {
        "scalars": lambda: scalars(G),
        "dual-numbers": lambda: dual_numbers(G),
        "group-algebra-adjoint": lambda: group_algebra_adjoint(G),
        "functions-on-g-set": lambda: functions_on_gset(G),
        "o_g": lambda: algebra_OG(G),
        "k_g": lambda: algebra_KG(G, measure),
        "augmentation-square-zero": lambda: augmentation_square_zero(G),
    }
    if key in table:
        return table[key]()
    for prefix, fn in (("unitarize(", unitarize), ("crossed(", lambda A: crossed_product(A, measure))):
        if key.startswith(prefix) and key.endswith(")"):
            return fn(builtin_algebra(key[len(prefix):-1], G, measure))
    if key.startswith("tensor(") and key.endswith(")"):
        inner = key[len("tensor("):-1]
        depth, split = 0, None
        for k, ch in enumerate(inner):
            depth += ch == "("
            depth -= ch == ")"
            if ch == "," and depth == 0:
                split = k
                break
        if split is None:
            raise InvalidInput("tensor(A,B) needs two arguments")
        return tensor_galgebras(builtin_algebra(inner[:split], G, measure), builtin_algebra(inner[split + 1:], G, measure))
    raise InvalidInput(f"unknown algebra {name!r}")


BUILTIN_ALGEBRAS = ("scalars", "dual-numbers", "group-algebra-adjoint", "functions-on-G-set", "O_G", "K_G",
                    "augmentation-square-zero", "crossed(A)", "tensor(A,B)", "unitarize(A)")
