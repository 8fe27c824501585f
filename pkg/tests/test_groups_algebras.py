import itertools

import pytest

from conftest import CORPUS, algebra
from paracyc.algebras import (GAlgebra, algebra_KG, algebra_map_check, algebra_OG, builtin_algebra,
                              crossed_product, from_structure_constants, group_convolution_algebra, scalars,
                              tensor_galgebras, unitarize)
from paracyc.errors import GroupMismatch, InvalidInput, NoIdentity, NoInverse, NotAssociative
from paracyc.groups import (COUNTING, NORMALIZED, MeasureConvention, cyclic_group, group_from_name,
                            symmetric_group, trivial_group, validate_group)
from paracyc.linalg import SparseMatrix
from paracyc.stability import kg_pairing
from paracyc.witnesses import (connection_witness, fedosov_projection, fedosov_truncation, quasifree_witness)


def test_validate_group_examples():
    z2 = validate_group([[0, 1], [1, 0]])
    assert z2.order == 2 and len(z2.classes) == 2
    s3 = symmetric_group(3)
    again = validate_group(s3.table)
    assert sorted(len(c) for c in again.classes) == [1, 2, 3]
    with pytest.raises(NoInverse):
        validate_group([[0, 1], [1, 1]])
    with pytest.raises(NoIdentity):
        validate_group([[1, 1], [1, 1]])
    with pytest.raises(NotAssociative):
        validate_group([[0, 1, 2], [1, 0, 0], [2, 0, 1]])
    with pytest.raises(InvalidInput):
        validate_group([[0, 1]])


def test_named_groups():
    assert group_from_name("cyclic(3)").order == 3
    assert len(group_from_name("klein4").classes) == 4
    with pytest.raises(InvalidInput):
        group_from_name("symmetric(5)")
    with pytest.raises(InvalidInput):
        group_from_name("dihedral(4)")
    with pytest.raises(InvalidInput):
        MeasureConvention("haar")


@pytest.mark.parametrize("g,a", CORPUS)
def test_corpus_algebras_are_valid(g, a):
    assert algebra(g, a).check() == []


def test_unitarize_examples():
    G = cyclic_group(2)
    zero = GAlgebra(G, 0, [], [[] for _ in range(G.order)], None, "zero")
    U = unitarize(zero)
    assert U.dim == 1 and U.unit == {0: 1} and U.check() == []
    A = builtin_algebra("functions-on-G-set", G)
    U = unitarize(A)
    assert U.dim == 3 and U.check() == []
    for j in range(3):
        assert U.product(U.unit, {j: 1}) == {j: 1}
    # the old unit of a unital algebra stays an idempotent different from the new one
    old = {k: v for k, v in A.unit.items()}
    assert U.product(old, old) == old and old != U.unit


def test_crossed_product_examples():
    G = cyclic_group(2)
    C = crossed_product(scalars(G), COUNTING)
    D = group_convolution_algebra(G, COUNTING)
    # same structure constants in the basis 1 x| g <-> u[g]
    assert [[C.mult[i][j] for j in range(2)] for i in range(2)] == [[D.mult[i][j] for j in range(2)] for i in range(2)]
    assert all(C.mult[i][j] == C.mult[j][i] for i in range(2) for j in range(2))
    A = builtin_algebra("group-algebra-adjoint", trivial_group())
    assert crossed_product(A).dim == A.dim and crossed_product(A).mult == A.mult
    # trivial action: A x| G is the tensor product with the convolution algebra
    B = builtin_algebra("functions-on-G-set", trivial_group())
    Bg = from_structure_constants(G, 2, [[i, i, i, 1, 1] for i in range(2)], None, [[0, 1, 1], [1, 1, 1]])
    T = tensor_galgebras(Bg, D)
    Cg = crossed_product(Bg)
    assert T.mult == Cg.mult and B.dim == 2
    assert crossed_product(A, NORMALIZED).check() == []


def test_OG_examples():
    assert algebra_OG(trivial_group()).dim == 1
    G = cyclic_group(2)
    O = algebra_OG(G)
    assert all(O.act[s][j] == {j: 1} for s in range(2) for j in range(2))
    S3 = symmetric_group(3)
    O = algebra_OG(S3)
    for g in range(S3.order):
        orbit = {next(iter(O.act[s][g])) for s in range(S3.order)}
        assert orbit == set(S3.classes[S3.class_of(g)])


def test_KG_examples():
    assert algebra_KG(trivial_group()).dim == 1 and algebra_KG(trivial_group()).unit is not None
    G = cyclic_group(2)
    K = algebra_KG(G, COUNTING)
    assert K.check() == []
    assert algebra_KG(G, NORMALIZED).check() == []
    p = kg_pairing(G)
    assert p.problems() == []
    idem = p.idempotent()
    KA = p.algebra()
    assert KA.product(idem, idem) == idem


def test_tensor_examples():
    G = cyclic_group(2)
    A = builtin_algebra("group-algebra-adjoint", G)
    T = tensor_galgebras(A, scalars(G))
    assert T.mult == A.mult and T.act == A.act
    K = algebra_KG(G)
    AK = tensor_galgebras(A, K)
    assert AK.dim == A.dim * K.dim and AK.check() == []
    with pytest.raises(GroupMismatch):
        tensor_galgebras(A, scalars(cyclic_group(3)))


def test_fedosov_examples():
    G = trivial_group()
    A = scalars(G)
    F1 = fedosov_truncation(A, 1)
    assert F1.dim == 1 and F1.mult == [[{0: 1}]]
    F2 = fedosov_truncation(A, 2)
    assert F2.dim == 1 + 2 * 1 * 1 and F2.check() == []
    for name in ("functions-on-G-set", "dual-numbers"):
        B = builtin_algebra(name, cyclic_group(2))
        F = fedosov_truncation(B, 2)
        assert F.check() == []
        assert algebra_map_check(fedosov_projection(B, F), F, B) == []


def test_quasifree_examples():
    G = cyclic_group(2)
    w = quasifree_witness(scalars(G))
    assert w and w.residual_ok
    w = quasifree_witness(builtin_algebra("group-algebra-adjoint", G))
    assert w and w.residual_ok
    assert not quasifree_witness(unitarize(builtin_algebra("dual-numbers", trivial_group())))
    assert connection_witness(scalars(G), 1)
    assert not connection_witness(unitarize(builtin_algebra("dual-numbers", trivial_group())), 1)


@pytest.mark.parametrize("g,a", [("trivial", "scalars"), ("cyclic(2)", "group-algebra-adjoint"),
                                 ("cyclic(2)", "O_G"), ("cyclic(2)", "functions-on-G-set"),
                                 ("trivial", "unitarize(dual-numbers)")])
def test_connection_iff_quasifree(g, a):
    A = algebra(g, a)
    assert bool(quasifree_witness(A)) == bool(connection_witness(A, 1))


def test_inline_algebra_errors():
    G = cyclic_group(2)
    with pytest.raises(InvalidInput):
        from_structure_constants(G, 2, [[0, 1, 1, 1]], None, None)
    with pytest.raises(InvalidInput):
        from_structure_constants(G, 2, [[0, 1, 0, 1, 0]], None, None)
    # e0 e1 = e0 and all other products zero: (e0 e1) e1 = e0 but e0 (e1 e1) = 0
    with pytest.raises(InvalidInput, match="associative"):
        from_structure_constants(G, 2, [[0, 1, 0, 1, 1]], None, None)
    with pytest.raises(InvalidInput):
        from_structure_constants(G, 1, [[0, 0, 0, 1, 1]], {"1": [[0, 0, 2, 1]]}, [[0, 1, 1]])


def test_algebra_map_check_detects():
    G = trivial_group()
    A = builtin_algebra("functions-on-G-set", G)
    swap = SparseMatrix.from_dense([[0, 1], [1, 0]])
    assert algebra_map_check(swap, A, A) == []
    bad = SparseMatrix.from_dense([[1, 1], [0, 0]])
    assert algebra_map_check(bad, A, A) != []
