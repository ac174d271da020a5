import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from simclust.distributions import EmpiricalDistribution, cost_matrix, from_samples
from simclust.errors import NumericalError, ValidationError
from simclust.transport import (
    EXACT_SIZE_CAP, SinkhornConfig, exact_wasserstein, exact_weights, plan_entropy, sinkhorn,
    sinkhorn_weights,
)


def uniform01():
    return from_samples([(0.0,), (1.0,)])


def random_dist(rng, m, d):
    w = rng.random(m) + 0.05
    return EmpiricalDistribution(rng.normal(size=(m, d)), w / w.sum())


def lp_value(p, q, D):
    """Transportation LP through a generic solver, independent of the network simplex."""
    m, n = D.shape
    rows = np.kron(np.eye(m), np.ones(n))
    cols = np.kron(np.ones(m), np.eye(n))
    res = linprog(D.ravel(), A_eq=np.vstack([rows, cols]), b_eq=np.r_[p, q], bounds=(0, None),
                  method="highs")
    return res.fun


@pytest.mark.parametrize("lam", [0.25, 0.5, 1.0, 2.0, 5.0])
def test_two_point_closed_form(lam):
    r = sinkhorn(uniform01(), uniform01(), cfg=SinkhornConfig(lam=lam))
    assert r.distance == pytest.approx(1 / (1 + math.exp(1 / lam)), abs=1e-6)
    assert r.converged


def test_dirac_pairs():
    a = from_samples([(0.0, 0.0)])
    b = from_samples([(3.0, 4.0)])
    for lam in (0.001, 1.0, 100.0):
        r = sinkhorn(a, a, cfg=SinkhornConfig(lam=lam))
        assert r.distance == 0.0 and r.plan.coupling.tolist() == [[1.0]]
        r = sinkhorn(a, b, cfg=SinkhornConfig(lam=lam))
        assert r.distance == pytest.approx(5.0, abs=1e-12)
        assert r.plan.coupling[0, 0] == pytest.approx(1.0)


def test_distance_decreases_toward_lp(rng):
    a, b = random_dist(rng, 10, 3), random_dist(rng, 10, 3)
    D = cost_matrix(a, b)
    exact, _ = exact_wasserstein(a, b, D)
    vals = [sinkhorn(a, b, D, SinkhornConfig(lam=lam)).distance for lam in (1.0, 0.1, 0.01)]
    assert vals[0] > vals[1] > vals[2] >= exact - 1e-9
    assert vals[2] - exact < 1e-2


def test_exact_examples():
    assert exact_wasserstein(uniform01(), uniform01())[0] == pytest.approx(0.0, abs=1e-12)
    d, plan = exact_wasserstein(from_samples([(0.0,)]), from_samples([(-1.0,), (1.0,)]))
    assert d == pytest.approx(1.0)
    np.testing.assert_allclose(plan.coupling, [[0.5, 0.5]])


def test_exact_self_distance_is_zero(rng):
    a = random_dist(rng, 12, 2)
    d, plan = exact_wasserstein(a, a)
    assert d == pytest.approx(0.0, abs=1e-12)
    assert np.count_nonzero(plan.coupling > 1e-15) <= 2 * a.size - 1


def test_exact_matches_generic_lp(rng):
    for _ in range(10):
        a, b = random_dist(rng, rng.integers(2, 9), 3), random_dist(rng, rng.integers(2, 9), 3)
        D = cost_matrix(a, b).entries
        d, plan = exact_weights(a.weights, b.weights, D)
        assert d == pytest.approx(lp_value(a.weights, b.weights, D), abs=1e-9)
        assert plan.row_marginal_error <= 1e-9 and plan.col_marginal_error <= 1e-9
        assert np.count_nonzero(plan.coupling > 1e-15) <= a.size + b.size - 1


def test_exact_size_cap():
    big = int(math.isqrt(EXACT_SIZE_CAP)) + 1
    p = np.full(big, 1.0 / big)
    with pytest.raises(ValidationError, match="sinkhorn"):
        exact_weights(p, p, np.zeros((big, big)))


def marginal_slack(r, p, q, D):
    """How far below the LP value an infeasible plan can price."""
    P = r.plan.coupling
    return D.max() * (np.abs(P.sum(1) - p).sum() + np.abs(P.sum(0) - q).sum())


def test_sinkhorn_never_below_lp_and_gap_shrinks(rng):
    for _ in range(100):
        m, n, d = rng.integers(1, 16), rng.integers(1, 16), rng.integers(1, 5)
        a, b = random_dist(rng, m, d), random_dist(rng, n, d)
        D = cost_matrix(a, b).entries
        exact, _ = exact_weights(a.weights, b.weights, D)
        prev, g = math.inf, None
        for lam in np.geomspace(1.0, 1e-3, 7):
            r = sinkhorn_weights(a.weights, b.weights, D, SinkhornConfig(lam=lam), warm_start=g)
            g = r.dual_potential_beta
            slack = marginal_slack(r, a.weights, b.weights, D)
            assert np.all(r.plan.coupling >= 0)
            assert r.distance >= exact - slack - 1e-12
            if r.converged:
                assert r.plan.col_marginal_error <= 1e-6
            assert r.distance - exact <= prev + slack + 1e-12
            prev = r.distance - exact
        assert r.distance - exact <= 1e-2 * (1 + exact)


def test_symmetry(rng):
    for _ in range(20):
        a, b = random_dist(rng, 6, 2), random_dist(rng, 9, 2)
        cfg = SinkhornConfig(lam=0.2, tolerance=1e-13, max_iterations=50_000)
        ab = sinkhorn(a, b, cost_matrix(a, b), cfg).distance
        ba = sinkhorn(b, a, cost_matrix(b, a), cfg).distance
        assert ab == pytest.approx(ba, abs=1e-9)


@given(st.floats(0.1, 50.0))
def test_exact_scale_covariance(c):
    rng = np.random.default_rng(7)
    a, b = random_dist(rng, 6, 3), random_dist(rng, 5, 3)
    base = exact_wasserstein(a, b)[0]
    scaled = exact_wasserstein(EmpiricalDistribution(a.support * c, a.weights),
                               EmpiricalDistribution(b.support * c, b.weights))[0]
    assert scaled == pytest.approx(c * base, abs=1e-9 * max(1.0, c * base))


def test_self_distance_vanishes_with_lambda(rng):
    a = random_dist(rng, 8, 2)
    vals = [sinkhorn(a, a, cfg=SinkhornConfig(lam=lam)).distance for lam in (1.0, 0.1, 0.01, 0.001)]
    assert all(v >= 0 for v in vals)
    assert vals == sorted(vals, reverse=True)
    assert vals[-1] < 1e-3


def test_dual_potential_matches_scaling_vector():
    a, b = uniform01(), from_samples([(0.2,), (0.9,), (1.5,)])
    lam = 0.5
    r = sinkhorn(a, b, cfg=SinkhornConfig(lam=lam, method="plain"))
    Q = np.exp(-cost_matrix(a, b).entries / lam)
    # rebuild u from the plan: plan = diag(u) Q diag(v), so u is fixed up to the v scale
    u = np.exp(-r.dual_potential_alpha / lam)
    v = r.plan.coupling[0] / (u[0] * Q[0])
    np.testing.assert_allclose(u[:, None] * Q * v[None, :], r.plan.coupling, rtol=1e-10)


def test_log_and_plain_agree(rng):
    a, b = random_dist(rng, 10, 2), random_dist(rng, 12, 2)
    D = cost_matrix(a, b)
    cfg = dict(lam=0.3, tolerance=1e-12, max_iterations=20_000)
    plain = sinkhorn(a, b, D, SinkhornConfig(method="plain", **cfg))
    logd = sinkhorn(a, b, D, SinkhornConfig(method="log", **cfg))
    assert plain.distance == pytest.approx(logd.distance, abs=1e-9)
    np.testing.assert_allclose(plain.dual_potential_alpha - plain.dual_potential_alpha.mean(),
                               logd.dual_potential_alpha - logd.dual_potential_alpha.mean(), atol=1e-8)


def test_small_lambda_uses_stable_iteration(rng):
    a, b = random_dist(rng, 10, 2), random_dist(rng, 10, 2)
    D = cost_matrix(a, b)
    r = sinkhorn(a, b, D, SinkhornConfig(lam=1e-4))
    assert r.log_domain and np.isfinite(r.distance)
    assert r.distance >= exact_wasserstein(a, b, D)[0] - 1e-9


def test_plain_underflow_reports_ratio():
    a = from_samples([(0.0,)])
    b = from_samples([(1000.0,)])
    with pytest.raises(NumericalError, match="regularization too small"):
        sinkhorn(a, b, cfg=SinkhornConfig(lam=1.0, method="plain"))


def test_warm_start_reaches_same_answer(rng):
    a, b = random_dist(rng, 15, 3), random_dist(rng, 15, 3)
    D = cost_matrix(a, b).entries
    cfg = SinkhornConfig(lam=0.01)
    cold = sinkhorn_weights(a.weights, b.weights, D, cfg)
    warm = sinkhorn_weights(a.weights, b.weights, D, cfg, warm_start=cold.dual_potential_beta)
    assert warm.iterations <= cold.iterations
    assert warm.distance == pytest.approx(cold.distance, abs=1e-6)


def test_iteration_cap_reports_not_converged(rng):
    a, b = random_dist(rng, 10, 2), random_dist(rng, 10, 2)
    r = sinkhorn(a, b, cfg=SinkhornConfig(lam=0.01, max_iterations=3))
    assert r.iterations == 3 and not r.converged


def test_config_validation():
    for kw in ({"lam": 0.0}, {"tolerance": -1.0}, {"max_iterations": 0}, {"method": "fast"}):
        with pytest.raises(ValidationError):
            SinkhornConfig(**kw)
    with pytest.raises(ValidationError):
        sinkhorn_weights(np.array([1.0]), np.array([0.5, 0.5]), np.zeros((2, 2)))


def test_entropy_examples():
    assert plan_entropy(np.array([[1.0]])) == 0.0
    assert plan_entropy(np.full((2, 2), 0.25)) == pytest.approx(math.log(4))
    assert plan_entropy(np.array([[0.5, 0.0], [0.0, 0.5]])) == pytest.approx(math.log(2))


@given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
def test_entropy_nonnegative(xs):
    g = np.array(xs)
    if g.sum() == 0:
        return
    assert plan_entropy(g / g.sum()) >= 0
