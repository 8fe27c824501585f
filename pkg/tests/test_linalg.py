from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from paracyc.errors import NotAComplex, ShapeMismatch
from paracyc.linalg import (SparseMatrix, Subquotient, intertwiner_space, kernel_basis, rank, solve,
                            supercomplex_homology, unvec)


def M(rows):
    return SparseMatrix.from_dense(rows)


def test_rank_examples():
    assert rank(SparseMatrix.identity(3)) == 3
    assert rank(SparseMatrix.zeros(2, 5)) == 0
    assert rank(M([[1, 2], [2, 4]])) == 1


def test_kernel_examples():
    assert kernel_basis(SparseMatrix.identity(3)).shape[1] == 0
    assert kernel_basis(SparseMatrix.zeros(2, 3)).shape[1] == 3
    k = kernel_basis(M([[1, 1]]))
    assert k.shape[1] == 1
    a, b = k[0, 0], k[1, 0]
    assert a != 0 and a == -b


def test_quotient_examples():
    q = Subquotient(3)
    assert q.dim == 3 and q.projection == SparseMatrix.identity(3)
    assert Subquotient(3, SparseMatrix.identity(3)).dim == 0
    q = Subquotient(3, M([[0], [1], [1]]))
    assert q.dim == 2
    assert q.contains({1: 1, 2: 1}) and not q.contains({1: 1})


def test_supercomplex_examples():
    assert supercomplex_homology(SparseMatrix.zeros(3, 2), SparseMatrix.zeros(2, 3)) == (2, 3)
    assert supercomplex_homology(M([[5]]), SparseMatrix.zeros(1, 1)) == (0, 0)
    with pytest.raises(NotAComplex):
        supercomplex_homology(M([[1]]), M([[1]]))
    with pytest.raises(ShapeMismatch):
        supercomplex_homology(SparseMatrix.zeros(2, 2), SparseMatrix.zeros(3, 2))


def test_intertwiner_examples():
    assert intertwiner_space([], 2, 2).shape[1] == 4
    D = SparseMatrix.diagonal([1, 2])
    assert intertwiner_space([(D, D)]).shape[1] == 2
    # commutant of the regular representation of Z/2: brute force over the 4 matrix units
    swap = M([[0, 1], [1, 0]])
    basis = intertwiner_space([(swap, swap)])
    assert basis.shape[1] == 2
    units = [M([[int(i == r and j == c) for j in range(2)] for i in range(2)]) for r in range(2) for c in range(2)]
    span = [u for u in units]
    commuting = [swap @ u @ swap for u in span]
    # the averages u + swap u swap span the commutant
    avgs = [u + v for u, v in zip(span, commuting)]
    flat = [[oracles.frac(a.to_dense()[i][j]) for a in avgs] for j in range(2) for i in range(2)]
    assert oracles.rank(flat) == 2
    for c in range(basis.shape[1]):
        X = unvec(basis.col(c), 2, 2)
        assert swap @ X == X @ swap
    with pytest.raises(ShapeMismatch):
        intertwiner_space([(SparseMatrix.identity(2), SparseMatrix.identity(3))], 2, 2)


def test_solve():
    m = M([[1, 1], [0, 1]])
    x = solve(m, M([[3], [1]]))
    assert x == M([[2], [1]])
    assert solve(M([[1], [1]]), M([[1], [0]])) is None


entries = st.integers(min_value=-3, max_value=3)


@st.composite
def matrices(draw, max_dim=6):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    return draw(st.lists(st.lists(entries, min_size=c, max_size=c), min_size=r, max_size=r))


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_rank_nullity(rows):
    m = M(rows)
    assert rank(m) == oracles.rank(oracles.dense(rows))
    k = kernel_basis(m)
    assert rank(m) + k.shape[1] == m.shape[1]
    assert (m @ k).is_zero()


@given(matrices(), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_subquotient_section(rows, _):
    gens = M(rows)
    q = Subquotient(gens.shape[0], gens)
    assert q.dim == gens.shape[0] - oracles.rank(oracles.dense(rows))
    assert q.projection @ q.section == SparseMatrix.identity(q.dim)
    assert q.project(gens).is_zero()


@st.composite
def random_complexes(draw, max_dim=12):
    """E -> O -> E with both composites zero: d_even = U P, d_odd = V Q built from a split."""
    ne = draw(st.integers(1, max_dim // 2))
    no = draw(st.integers(1, max_dim - ne))
    r = draw(st.integers(0, min(ne, no)))
    s = draw(st.integers(0, min(ne - r, no - r)))
    # choose coordinates: even = [im(d_odd) s | complement r | rest], odd = [im(d_even) r | complement s | rest]
    de = [[0] * ne for _ in range(no)]
    do = [[0] * no for _ in range(ne)]
    for i in range(r):
        de[i][s + i] = 1
    for i in range(s):
        do[i][r + i] = 1
    # conjugate by random unitriangular changes of basis
    def unitri(n):
        m = [[int(i == j) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                m[i][j] = draw(entries)
        return m

    def inv_unitri(m):
        n = len(m)
        red, _ = oracles.rref([list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
                               for i, row in enumerate(m)])
        return [row[n:] for row in red]

    Pe, Po = unitri(ne), unitri(no)
    Pe_i, Po_i = inv_unitri(Pe), inv_unitri(Po)
    de2 = oracles.matmul(oracles.matmul(oracles.dense(Po), oracles.dense(de)), Pe_i)
    do2 = oracles.matmul(oracles.matmul(oracles.dense(Pe), oracles.dense(do)), Po_i)
    return de2, do2


@given(random_complexes())
@settings(max_examples=50, deadline=None)
def test_supercomplex_homology_against_oracle(pair):
    de, do = pair
    got = supercomplex_homology(M(de), M(do))
    assert got == oracles.supercomplex_homology(de, do)
