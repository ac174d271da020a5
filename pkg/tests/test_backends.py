import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simclust import _backend
from simclust.distributions import EmpiricalDistribution, cost_matrix
from simclust.simulation import CallCenterConfig, RngPolicy, Staffing, generate_customers, simulate_customers

pytestmark = pytest.mark.skipif(not _backend.has_compiled(), reason="compiled kernels not built")

PY = _backend.get_kernels("python")
C = _backend.get_kernels("compiled") if _backend.has_compiled() else None


def _pair(seed, m=30, n=25, dim=3):
    rng = np.random.default_rng(seed)
    a = EmpiricalDistribution.from_samples(rng.standard_normal((m, dim)))
    b = EmpiricalDistribution.from_samples(rng.standard_normal((n, dim)) + 0.7)
    return a.weights, b.weights, cost_matrix(a, b).entries


def test_default_backend_is_compiled():
    assert _backend.BACKEND == "compiled"


@pytest.mark.parametrize("log_domain,lam", [(False, 0.5), (True, 0.05), (True, 0.005)])
@pytest.mark.parametrize("seed", range(4))
def test_sinkhorn_backends_agree(seed, log_domain, lam):
    p, q, D = _pair(seed)
    args = (p, q, D, lam, 10_000, 1e-7, 1e-6, log_domain)
    rp, rc = PY.sinkhorn_kernel(*args), C.sinkhorn_kernel(*args)
    assert rp[2] == rc[2] and rp[3] == rc[3] and rp[7] == rc[7]
    assert abs(rp[1] - rc[1]) <= 1e-10 * abs(rp[1])
    np.testing.assert_allclose(rc[0], rp[0], rtol=1e-8, atol=1e-15)
    np.testing.assert_allclose(rc[4], rp[4], rtol=1e-8, atol=1e-10)


def test_plain_underflow_reported_by_both():
    p, q, D = _pair(0)
    args = (p, q, D * 1e4, 1e-3, 100, 1e-7, 1e-6, False)
    assert PY.sinkhorn_kernel(*args)[7] == C.sinkhorn_kernel(*args)[7] == _backend.UNDERFLOW


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 25), st.integers(0, 2**32 - 1), st.booleans())
def test_linkage_bit_identical(n, seed, integer_ties):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 4, (n, n)).astype(float) if integer_ties else rng.random((n, n))
    x = x + x.T
    np.fill_diagonal(x, 0.0)
    assert np.array_equal(PY.complete_linkage(x), C.complete_linkage(x))


@pytest.mark.parametrize("staff", [(22, 9, 8), (5, 1, 1), (40, 20, 30), (1, 1, 1)])
@pytest.mark.parametrize("rep", range(3))
def test_simulate_day_bit_identical(staff, rep):
    cfg = CallCenterConfig()
    cust = generate_customers(cfg, RngPolicy(seed=11, replication_index=rep))
    a = simulate_customers(cfg, Staffing(*staff), cust, backend="python")
    b = simulate_customers(cfg, Staffing(*staff), cust, backend="compiled")
    assert a.kpis.tobytes() == b.kpis.tobytes()
    assert np.array_equal(a.states, b.states)
    assert a.hourly.tobytes() == b.hourly.tobytes()
    assert (a.arrivals, a.completions, a.abandonments) == (b.arrivals, b.completions, b.abandonments)
