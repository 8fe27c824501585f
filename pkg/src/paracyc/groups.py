"""Finite groups given by multiplication tables, measures and G-modules."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpq

from .errors import InvalidInput, NoIdentity, NoInverse, NotAssociative
from .linalg import SparseMatrix


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    labels: tuple
    table: tuple  # table[i][j] = index of labels[i] * labels[j]
    identity: int
    inverse: tuple
    classes: tuple = field(default=())
    name: str = ""

    @property
    def order(self) -> int:
        return len(self.labels)

    def mul(self, i: int, j: int) -> int:
        return self.table[i][j]

    def inv(self, i: int) -> int:
        return self.inverse[i]

    def conj(self, t: int, g: int) -> int:
        """t g t^-1."""
        return self.table[self.table[t][g]][self.inverse[t]]

    def class_of(self, g: int) -> int:
        for k, c in enumerate(self.classes):
            if g in c:
                return k
        raise KeyError(g)

    def generators(self) -> list[int]:
        """A small deterministic generating set (greedy)."""
        gens: list[int] = []
        span = {self.identity}
        for g in range(self.order):
            if g not in span:
                gens.append(g)
                span = _closure(self, gens)
        return gens

    def __repr__(self):
        return f"FiniteGroup({self.name or self.order})"


def _closure(G: FiniteGroup, gens: list[int]) -> set:
    span = {G.identity}
    frontier = [G.identity]
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = G.table[x][g]
                if y not in span:
                    span.add(y)
                    new.append(y)
        frontier = new
    return span


def validate_group(table, labels=None, name: str = "") -> FiniteGroup:
    """Validate a multiplication table (0-based indices) and build the group."""
    try:
        t = tuple(tuple(int(x) for x in row) for row in table)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"group table must be a square integer table: {exc}") from None
    n = len(t)
    if n == 0 or any(len(row) != n for row in t):
        raise InvalidInput("group table must be square and nonempty")
    if any(not 0 <= x < n for row in t for x in row):
        raise InvalidInput("group table entries out of range")
    for a, b, c in itertools.product(range(n), repeat=3):
        if t[t[a][b]][c] != t[a][t[b][c]]:
            raise NotAssociative(f"({a}*{b})*{c} != {a}*({b}*{c})")
    e = None
    for i in range(n):
        if all(t[i][j] == j and t[j][i] == j for j in range(n)):
            e = i
            break
    if e is None:
        raise NoIdentity("no two-sided identity element")
    inv = []
    for i in range(n):
        cands = [j for j in range(n) if t[i][j] == e and t[j][i] == e]
        if not cands:
            raise NoInverse(f"element {i} has no inverse")
        inv.append(cands[0])
    classes = []
    seen = set()
    for g in range(n):
        if g in seen:
            continue
        cl = sorted({t[t[s][g]][inv[s]] for s in range(n)})
        seen.update(cl)
        classes.append(tuple(cl))
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
    return FiniteGroup(labels, t, e, tuple(inv), tuple(classes), name)


def trivial_group() -> FiniteGroup:
    return validate_group([[0]], ["e"], "trivial")


def cyclic_group(n: int) -> FiniteGroup:
    if n < 1:
        raise InvalidInput("cyclic(n) needs n >= 1")
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return validate_group(table, [f"g{i}" for i in range(n)], f"cyclic({n})")


def klein4() -> FiniteGroup:
    table = [[i ^ j for j in range(4)] for i in range(4)]
    return validate_group(table, ["e", "a", "b", "ab"], "klein4")


def symmetric_group(n: int) -> FiniteGroup:
    perms = sorted(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    # (p*q)(x) = p(q(x))
    table = [[index[tuple(p[q[x]] for x in range(n))] for q in perms] for p in perms]
    return validate_group(table, ["".join(map(str, p)) for p in perms], f"symmetric({n})")


BUILTIN_GROUPS = {
    "trivial": trivial_group,
    "klein4": klein4,
}


def group_from_name(name: str) -> FiniteGroup:
    name = name.strip().lower().replace(" ", "")
    if name in BUILTIN_GROUPS:
        return BUILTIN_GROUPS[name]()
    for prefix, fn in (("cyclic(", cyclic_group), ("symmetric(", symmetric_group)):
        if name.startswith(prefix) and name.endswith(")"):
            try:
                k = int(name[len(prefix):-1])
            except ValueError:
                raise InvalidInput(f"bad group descriptor {name!r}") from None
            if fn is symmetric_group and not 1 <= k <= 4:
                raise InvalidInput("symmetric(n) is limited to n <= 4")
            return fn(k)
    raise InvalidInput(f"unknown group {name!r}")


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureConvention:
    kind: str  # "counting" or "normalized"

    def __post_init__(self):
        if self.kind not in ("counting", "normalized"):
            raise InvalidInput(f"unknown measure {self.kind!r}")

    def weight(self, G: FiniteGroup):
        return mpq(1) if self.kind == "counting" else mpq(1, G.order)


COUNTING = MeasureConvention("counting")
NORMALIZED = MeasureConvention("normalized")


@dataclass(eq=False)
class GModule:
    """A finite-dimensional representation: one action matrix per element."""

    group: FiniteGroup
    dim: int
    action: list  # SparseMatrix per group element

    def check(self) -> list[str]:
        G, problems = self.group, []
        if self.action[G.identity] != SparseMatrix.identity(self.dim):
            problems.append("rho(e) != id")
        for s in range(G.order):
            for t in range(G.order):
                if self.action[s] @ self.action[t] != self.action[G.mul(s, t)]:
                    problems.append(f"rho({s})rho({t}) != rho({s}{t})")
        return problems

    def averaging(self) -> SparseMatrix:
        G = self.group
        tot = SparseMatrix.zeros(self.dim, self.dim)
        for s in range(G.order):
            tot = tot + self.action[s]
        return tot.scale(Fraction(1, G.order))
