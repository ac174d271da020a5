import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from simclust.distributions import (
    EUCLIDEAN, SQUARED_EUCLIDEAN, CostMatrix, EmpiricalDistribution, NormalizationParams,
    cost_matrix, fit_normalization, from_samples, normalize_all, read_samples_csv,
    write_samples_csv,
)
from simclust.errors import ValidationError

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_duplicates_merge_with_summed_weight():
    d = from_samples([(1, 2), (1, 2), (3, 4)])
    assert d.support.tolist() == [[1, 2], [3, 4]]
    np.testing.assert_allclose(d.weights, [2 / 3, 1 / 3])


def test_single_sample():
    d = from_samples([(5,)])
    assert d.size == 1 and d.dim == 1
    assert d.weights.tolist() == [1.0]


def test_forty_daily_vectors(rng):
    d = from_samples(rng.random((40, 5)))
    assert d.size <= 40 and d.dim == 5
    assert d.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_empty_and_nonfinite_rejected():
    with pytest.raises(ValidationError, match="empty sample set"):
        from_samples([])
    with pytest.raises(ValidationError, match="non-finite sample"):
        from_samples([(1.0, np.nan)])
    with pytest.raises(ValidationError, match="non-finite sample"):
        from_samples([(np.inf,)])


def test_weights_must_sum_to_one():
    with pytest.raises(ValidationError):
        EmpiricalDistribution([[0.0], [1.0]], [0.5, 0.6])
    with pytest.raises(ValidationError):
        EmpiricalDistribution([[0.0], [1.0]], [1.5, -0.5])


def test_distribution_is_read_only():
    d = from_samples([(1.0,), (2.0,)])
    with pytest.raises(ValueError):
        d.weights[0] = 0.3


@given(st.integers(1, 400), st.integers(1, 3), st.integers(1, 6))
def test_dedupe_preserves_mass(n, dim, levels):
    x = np.random.default_rng(n).integers(0, levels, size=(n, dim)).astype(float)
    d = from_samples(x)
    assert abs(d.weights.sum() - 1.0) <= 1e-12
    assert len(np.unique(d.support, axis=0)) == d.size


def test_dedupe_large_sample():
    x = np.random.default_rng(0).integers(0, 30, size=(100_000, 2)).astype(float)
    d = from_samples(x)
    assert abs(d.weights.sum() - 1.0) <= 1e-12
    assert d.size == len(np.unique(x, axis=0))


def test_pooled_normalization_two_diracs():
    p = fit_normalization([from_samples([(0.0,)]), from_samples([(2.0,)])])
    assert p.center.tolist() == [1.0]
    assert p.scale.tolist() == [1.0]


def test_degenerate_dimension_gets_unit_scale():
    p = fit_normalization([from_samples([(3.0, 1.0), (3.0, 2.0)])])
    assert p.scale[0] == 1.0


def test_scenarios_weigh_equally():
    # the 3-point scenario must not outweigh the 1-point scenario
    a = from_samples([(0.0,), (0.1,), (0.2,)])
    b = from_samples([(10.0,)])
    p = fit_normalization([a, b])
    assert p.center[0] == pytest.approx((0.1 + 10.0) / 2)


def test_normalization_idempotent(rng):
    dists = [from_samples(rng.normal(3.0, 2.0, size=(20, 3))) for _ in range(4)]
    normed, _ = normalize_all(dists)
    again = fit_normalization(normed)
    np.testing.assert_allclose(again.center, 0.0, atol=1e-12)
    np.testing.assert_allclose(again.scale, 1.0, atol=1e-12)


@given(arrays(np.float64, (6, 2), elements=finite), arrays(np.float64, 2, elements=finite))
def test_normalization_round_trip(x, shift):
    params = NormalizationParams(shift, np.abs(shift) + 0.5)
    np.testing.assert_allclose(params.invert_points(params.apply_points(x)), x,
                               atol=1e-10 * (1 + np.abs(x).max()))


def test_normalization_dimension_mismatch():
    with pytest.raises(ValidationError):
        fit_normalization([from_samples([(1.0,)]), from_samples([(1.0, 2.0)])])


def test_costs_after_normalization_ignore_common_shift(rng):
    raw = [rng.normal(size=(8, 3)) for _ in range(3)]
    shift = np.array([100.0, -3.0, 7.5])
    a, _ = normalize_all([from_samples(x) for x in raw])
    b, _ = normalize_all([from_samples(x + shift) for x in raw])
    np.testing.assert_allclose(cost_matrix(a[0], a[1]).entries, cost_matrix(b[0], b[1]).entries,
                               atol=1e-10)


def test_cost_matrix_examples():
    c = cost_matrix(from_samples([(0.0, 0.0)]), from_samples([(3.0, 4.0)]))
    assert c.entries.tolist() == [[5.0]]
    c = cost_matrix(from_samples([(0.0,), (1.0,)]), from_samples([(0.0,), (2.0,)]))
    assert c.entries.tolist() == [[0.0, 2.0], [1.0, 1.0]]
    sq = cost_matrix(from_samples([(0.0, 0.0)]), from_samples([(3.0, 4.0)]), SQUARED_EUCLIDEAN)
    assert sq.entries.tolist() == [[25.0]]


def test_cost_self_has_zero_diagonal(rng):
    d = from_samples(rng.random((7, 3)))
    assert np.all(np.diag(cost_matrix(d, d).entries) == 0.0)


def test_cost_dimension_mismatch():
    with pytest.raises(ValidationError):
        cost_matrix(from_samples([(0.0,)]), from_samples([(0.0, 1.0)]))
    with pytest.raises(ValidationError):
        CostMatrix([[1.0]], "manhattan")


@given(arrays(np.float64, (4, 2), elements=finite), arrays(np.float64, (3, 2), elements=finite))
def test_cost_transpose_symmetry(x, y):
    a, b = from_samples(x), from_samples(y)
    np.testing.assert_array_equal(cost_matrix(a, b).entries, cost_matrix(b, a).T.entries)


@given(arrays(np.float64, (3, 2), elements=st.floats(-100, 100)))
def test_euclidean_triangle_inequality(x):
    d = from_samples(x)
    c = cost_matrix(d, d, EUCLIDEAN).entries
    n = d.size
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert c[i, k] <= c[i, j] + c[j, k] + 1e-9


def test_csv_round_trip(tmp_path, rng):
    x = rng.random((5, 3))
    path = tmp_path / "s.csv"
    write_samples_csv(path, ["a", "b", "c"], x, comment="manifest abc")
    names, y = read_samples_csv(path)
    assert names == ["a", "b", "c"]
    np.testing.assert_array_equal(x, y)


def test_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2,3\n")
    with pytest.raises(ValidationError):
        read_samples_csv(p)
    p.write_text("a,b\n")
    with pytest.raises(ValidationError, match="empty sample set"):
        read_samples_csv(p)
