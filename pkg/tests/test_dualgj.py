import pytest

from paracyc.algebras import builtin_algebra, scalars, unitarize
from paracyc.dualgj import (_m_index, coinvariants, dual_greenjulg_suite, dual_homotopy, dual_phi, dual_setup,
                            dual_tau, dual_trace, morita_check)
from paracyc.errors import NotUnital
from paracyc.forms import UNIT
from paracyc.groups import cyclic_group, trivial_group
from paracyc.linalg import SparseMatrix


def test_trivial_group_trace_and_inverse_pair():
    A = builtin_algebra("group-algebra-adjoint", trivial_group())
    ds = dual_setup(A, 3)
    # one summand: Tr(x (x) k) = x k(e, e), and K_G is one-dimensional
    assert dual_trace(ds, 0) == SparseMatrix.identity(A.dim)
    for n in range(3):
        phi, tau = dual_phi(ds, n), dual_tau(ds, n)
        assert phi == SparseMatrix.identity(phi.shape[0]) and tau == SparseMatrix.identity(tau.shape[0])
        h = dual_homotopy(ds, n)
        assert h.is_zero()


def test_dual_greenjulg_unitarized_dual_numbers():
    A = unitarize(builtin_algebra("dual-numbers", cyclic_group(2)))
    s = dual_greenjulg_suite(A, 3, morita=True)
    assert s.passed, [(c.name, c.degree) for c in s.failures()]
    degrees = {(c.name, c.degree) for c in s.checks}
    for n in range(4):
        assert ("tau phi = id", n) in degrees
    for n in range(3):
        assert ("b h + h b = id - phi tau", n) in degrees
    for n in range(1, 4):
        assert ("Tr b = b Tr", n) in degrees


@pytest.mark.parametrize("G", [trivial_group(), cyclic_group(2), cyclic_group(3)])
def test_morita_homotopy_scalars(G):
    assert all(ok for _, _, ok, _ in morita_check(scalars(G), 3))


def test_chain_elements_fixed_and_killed():
    """Elements with M = infinity are killed by h and fixed by phi tau modulo coinvariants."""
    A = unitarize(builtin_algebra("dual-numbers", cyclic_group(2)))
    ds = dual_setup(A, 3)
    fC = ds.fC
    for n in range(3):
        h = dual_homotopy(ds, n)
        pt = dual_phi(ds, n) @ dual_tau(ds, n)
        co = coinvariants(fC, n)
        found = 0
        for idx in range(fC.dim(n)):
            g, w = fC.word(idx, n)
            lead = w[0] == UNIT
            rs = [ds.split(c) for c in (w[1:] if lead else w)]
            if not rs or _m_index(ds, g, rs, lead) is not None:
                continue
            found += 1
            assert h.col(idx) == {}
            diff = dict(pt.col(idx))
            diff[idx] = diff.get(idx, 0) - 1
            assert co.contains({k: v for k, v in diff.items() if v})
        assert found > 0


def test_phi_tau_idempotent():
    ds = dual_setup(unitarize(builtin_algebra("dual-numbers", cyclic_group(2))), 3)
    for n in range(3):
        pt = dual_phi(ds, n) @ dual_tau(ds, n)
        assert pt @ pt == pt


def test_homotopy_needs_unit():
    ds = dual_setup(builtin_algebra("dual-numbers", cyclic_group(2)), 2)
    with pytest.raises(NotUnital):
        dual_homotopy(ds, 0)
