from fractions import Fraction

import pytest

import oracles
from conftest import CORPUS, algebra
from paracyc.algebras import builtin_algebra, scalars
from paracyc.errors import DegreeOverflow
from paracyc.forms import UNIT, FormSpace
from paracyc.groups import cyclic_group, trivial_group
from paracyc.linalg import SparseMatrix
from paracyc.tower import covariance_checks, karoubi_lemma_checks, paramixed_checks


def _engine_key(w):
    return tuple(UNIT if a is oracles.U else a for a in w)


def agree(fs, nf, op, m: SparseMatrix, n_src: int, n_tgt: int) -> bool:
    """Column-by-column comparison of an engine matrix with a naive operator."""
    for s, w in nf.basis(n_src):
        col = {fs.index(t, _engine_key(v)): c for (t, v), c in op(s, w).items()}
        got = {k: oracles.frac(v) for k, v in m.col(fs.index(s, _engine_key(w))).items()}
        if col != got:
            return False
    return True


def test_dimension_examples():
    G = cyclic_group(2)
    fs = FormSpace(scalars(G), 2)
    # degree 0 is O_G (x) A, higher degrees O_G (x) A+ (x) A^n
    assert fs.dims == [2, 4, 4]
    A2 = builtin_algebra("functions-on-G-set", G)
    assert FormSpace(A2, 3).dim(3) == 48
    assert FormSpace(A2, 3).dim(0) == 4


@pytest.mark.parametrize("g,a", CORPUS)
def test_operators_match_naive_calculus(g, a):
    A = algebra(g, a)
    fs = FormSpace(A, 4)
    nf = oracles.NaiveForms(A)
    top = 2 if fs.dim(2) <= 400 else 1
    for n in range(top + 1):
        assert agree(fs, nf, nf.d, fs.d(n), n, n + 1), ("d", n)
        assert agree(fs, nf, nf.kappa, fs.kappa(n), n, n), ("kappa", n)
        assert agree(fs, nf, nf.B, fs.B(n), n, n + 1), ("B", n)
        assert agree(fs, nf, nf.T, fs.T(n), n, n), ("T", n)
        if n >= 1:
            assert agree(fs, nf, nf.b, fs.b(n), n, n - 1), ("b", n)
        for t in range(A.group.order):
            assert agree(fs, nf, lambda s, w: nf.act(t, s, w), fs.act(t, n), n, n), ("act", t, n)
            assert agree(fs, nf, lambda s, w: nf.og(t, s, w), fs.og(t, n), n, n), ("og", t, n)


@pytest.mark.parametrize("g,a", [("cyclic(2)", "group-algebra-adjoint"), ("symmetric(3)", "scalars"),
                                 ("cyclic(3)", "unitarize(dual-numbers)"), ("klein4", "functions-on-G-set")])
def test_closed_formulas_match_defining_route(g, a):
    fs = FormSpace(algebra(g, a), 4)
    for n in range(4):
        assert fs.kappa(n) == fs.kappa_formula(n)
        assert fs.T(n) == fs.T_formula(n)
        assert fs.d(n) == fs.d_formula(n)
    for n in range(3):
        assert fs.B(n) == fs.B_formula(n)
    for n in range(1, 5):
        assert fs.b(n) == fs.b_formula(n)


def test_d_examples():
    G = cyclic_group(2)
    A = builtin_algebra("group-algebra-adjoint", G)
    fs = FormSpace(A, 3)
    # f (x) x -> f (x) dx with the leading slot the adjoined unit
    assert fs.d(0).apply({fs.index(1, (1,)): 1}) == {fs.index(1, (UNIT, 1)): 1}
    # d vanishes on forms starting with the unit
    assert fs.d(1).apply({fs.index(0, (UNIT, 1)): 1}) == {}
    assert (fs.d(1) @ fs.d(0)).is_zero()
    with pytest.raises(DegreeOverflow):
        fs.d(3)


def test_b_examples():
    G = cyclic_group(2)
    A = builtin_algebra("group-algebra-adjoint", G)
    fs = FormSpace(A, 3)
    s = 1
    for x0 in range(2):
        for x1 in range(2):
            # b(f(s) (x) x0 dx1) = f(s) (x) (x0 x1 - (s^-1 . x1) x0)
            lhs = fs.b(1).apply({fs.index(s, (x0, x1)): 1})
            sx1 = G.conj(G.inv(s), x1)
            rhs: dict = {}
            for k, c in ((G.mul(x0, x1), 1), (G.mul(sx1, x0), -1)):
                idx = fs.index(s, (k,))
                rhs[idx] = rhs.get(idx, 0) + c
            assert lhs == {k: v for k, v in rhs.items() if v}
    # commutative algebra over the trivial group: b = 0 on degree 1
    C = FormSpace(builtin_algebra("functions-on-G-set", trivial_group()), 2)
    assert C.b(1).is_zero()
    assert (fs.b(2) @ fs.b(3)).is_zero()
    assert fs.b(0).shape == (0, fs.dim(0)) and fs.b(0).is_zero()


def test_kappa_examples():
    G = cyclic_group(3)
    A = builtin_algebra("functions-on-G-set", G)
    fs = FormSpace(A, 3)
    # degree 0: f(s) (x) x -> f(s) (x) s^-1 . x
    for s in range(3):
        for x in range(A.dim):
            expect = {fs.index(s, (k,)): c for k, c in A.act[G.inv(s)][x].items()}
            assert fs.kappa(0).apply({fs.index(s, (x,)): 1}) == expect
    # trivial group, degree 1: x0 dx1 -> dx1 x0 = d(x1 x0) - x1 dx0
    B = builtin_algebra("group-algebra-adjoint", cyclic_group(2))
    from paracyc.algebras import forget_action
    T = FormSpace(forget_action(B), 3)
    Gz = B.group
    for x0 in range(2):
        for x1 in range(2):
            got = T.kappa(1).apply({T.index(0, (x0, x1)): 1})
            assert got == {T.index(0, (UNIT, Gz.mul(x1, x0))): 1, T.index(0, (x1, x0)): -1}
    for n in range(2):
        assert fs.kappa(n + 1) @ fs.d(n) == fs.d(n) @ fs.kappa(n)
    with pytest.raises(DegreeOverflow):
        fs.kappa(3)


def test_B_and_T_examples():
    G = cyclic_group(2)
    A = builtin_algebra("group-algebra-adjoint", G)
    fs = FormSpace(A, 4)
    assert fs.B(0) == fs.d(0)
    assert (fs.B(1) @ fs.B(0)).is_zero()
    assert fs.b(1) @ fs.B(0) == fs.identity(0) - fs.T(0)
    T1 = FormSpace(builtin_algebra("group-algebra-adjoint", trivial_group()), 3)
    for n in range(4):
        assert T1.T(n) == SparseMatrix.identity(T1.dim(n))
    for n in range(4):
        assert fs.T(n) @ fs.T_inverse(n) == fs.identity(n)
    # T(delta_s (x) x) = delta_s (x) s^-1 . x on O_G
    O = builtin_algebra("O_G", cyclic_group(3))
    fo = FormSpace(O, 1)
    Gc = O.group
    for s in range(3):
        for x in range(3):
            assert fo.T(0).apply({fo.index(s, (x,)): 1}) == {fo.index(s, (Gc.conj(Gc.inv(s), x),)): 1}


@pytest.mark.parametrize("g,a", CORPUS)
def test_paramixed_and_kappa_relations(g, a):
    A = algebra(g, a)
    N = 6 if A.dim * A.group.order <= 4 else 4
    fs = FormSpace(A, N)
    for name, n, ok, wit in paramixed_checks(fs) + karoubi_lemma_checks(fs):
        assert ok, (name, n, wit)


@pytest.mark.parametrize("g,a", [("cyclic(2)", "group-algebra-adjoint"), ("symmetric(3)", "functions-on-G-set")])
def test_covariance(g, a):
    fs = FormSpace(algebra(g, a), 3)
    assert all(ok for _, _, ok, _ in covariance_checks(fs))


def test_mutation_is_detected():
    """A corrupted b must break Bb + bB = id - T."""
    fs = FormSpace(builtin_algebra("group-algebra-adjoint", cyclic_group(2)), 4)
    good = fs.b(1)
    # add the elementary matrix sending the first basis form d e_0 to e_0
    fs._cache[("b", 1)] = good + SparseMatrix.from_entries(good.shape, {(0, 0): Fraction(1)})
    bad = [r for r in paramixed_checks(fs) if not r[2]]
    assert bad and all(r[3] is not None for r in bad)
