import numpy as np
import pytest

from simclust.errors import ValidationError
from simclust.simulation import (
    CRN, INDEPENDENT, CallCenterConfig, RngPolicy, Staffing, crn_distance_study, enumerate_budget,
    enumerate_fixed_total, f_test, generate_customers, min_pairwise_distance, run_scenario_samples,
    run_scenarios, simulate_customers, simulate_day, simulate_replications, uniform_subset,
)
from simclust.transport import SinkhornConfig

CFG = CallCenterConfig()
BASE_STAFF = Staffing(22, 9, 8)
ARRIVE, ABANDON, DONE_BASIC, DONE_PREMIUM, DONE_TECH = range(5)


def test_config_validation():
    with pytest.raises(ValidationError):
        CallCenterConfig(premium_fraction=1.5)
    with pytest.raises(ValidationError):
        CallCenterConfig(patience_bounds=(3.0, 0.5))
    with pytest.raises(ValidationError):
        CallCenterConfig(arrival_rate=0.0)
    with pytest.raises(ValidationError):
        Staffing(0, 1, 1)
    with pytest.raises(ValidationError):
        RngPolicy(mode="shared")
    assert CallCenterConfig.from_dict(CFG.to_dict()) == CFG


def test_premium_first_triplet_order():
    assert Staffing.from_pbt(7, 28, 14) == Staffing(28, 7, 14)
    assert str(Staffing(28, 7, 14)) == "b28-p7-t14"


def test_flow_conservation_and_rates():
    arrivals, ab, imp = [], [], []
    for r in range(300):
        out = simulate_day(CFG, BASE_STAFF, RngPolicy(INDEPENDENT, 1, r))
        assert out.arrivals == out.completions + out.abandonments
        assert out.abandonments <= out.impatient_arrivals
        assert np.all(np.isfinite(out.kpis)) and np.all(out.kpis >= 0)
        arrivals.append(out.arrivals)
        ab.append(out.abandonments)
    arrivals = np.array(arrivals)
    se = arrivals.std(ddof=1) / np.sqrt(arrivals.size)
    assert abs(arrivals.mean() - 3200) <= 3 * se + 1e-9
    frac = np.sum(ab) / arrivals.sum()
    assert frac <= 0.15 + 3 * np.sqrt(0.15 * 0.85 / arrivals.sum())


def test_base_staffing_queues_and_overworks():
    kpis = simulate_replications(CFG, BASE_STAFF, 20, seed=3)
    assert np.all(kpis.mean(axis=0)[2:] > 0)
    assert kpis[:, 0].mean() > CFG.service_means[0]


def test_overstaffed_limit():
    big = Staffing(1000, 1000, 1000)
    kpis = simulate_replications(CFG, big, 200, seed=4)
    np.testing.assert_allclose(kpis[:, 2:].mean(axis=0), 0.0, atol=0.5)
    y1 = kpis[:, 0]
    se = y1.std(ddof=1) / np.sqrt(y1.size)
    assert abs(y1.mean() - (7 + 0.15 * 10)) <= 4 * se + 0.05


def test_crn_customers_do_not_depend_on_staffing():
    pol = [RngPolicy(CRN, 9, 2, scenario_index=i) for i in range(3)]
    first = generate_customers(CFG, pol[0])
    for p in pol[1:]:
        other = generate_customers(CFG, p)
        for name in ("arrival", "premium", "impatient", "patience", "technical", "u_initial", "u_technical"):
            np.testing.assert_array_equal(getattr(first, name), getattr(other, name))


def test_crn_identical_staffings_bitwise():
    a, b = run_scenario_samples(CFG, [BASE_STAFF, BASE_STAFF], 5, CRN, seed=2)
    np.testing.assert_array_equal(a, b)


def test_independent_streams_differ():
    a, b = run_scenario_samples(CFG, [BASE_STAFF, BASE_STAFF], 5, INDEPENDENT, seed=2)
    assert not np.array_equal(a, b)


def test_scenario_sizes():
    dists = run_scenarios(CFG, [BASE_STAFF, Staffing(20, 10, 9), Staffing(30, 5, 4)], 8, CRN, seed=0)
    assert len(dists) == 3 and all(d.size <= 8 and d.dim == 5 for d in dists)


def test_workers_do_not_change_samples():
    staffs = [BASE_STAFF, Staffing(20, 10, 9), Staffing(30, 5, 4)]
    for mode in (CRN, INDEPENDENT):
        one = run_scenario_samples(CFG, staffs, 4, mode, seed=5, workers=1)
        many = run_scenario_samples(CFG, staffs, 4, mode, seed=5, workers=3)
        for x, y in zip(one, many):
            np.testing.assert_array_equal(x, y)


def test_backends_agree_on_a_day():
    cust = generate_customers(CFG, RngPolicy(seed=11))
    a = simulate_customers(CFG, BASE_STAFF, cust, backend="python")
    b = simulate_customers(CFG, BASE_STAFF, cust)
    np.testing.assert_array_equal(a.kpis, b.kpis)
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.hourly, b.hourly)


def audit(staff, seed):
    log = []
    simulate_day(CFG, staff, RngPolicy(seed=seed), log=log)
    return log


@pytest.mark.parametrize("staff", [BASE_STAFF, Staffing(10, 3, 2), Staffing(40, 20, 3)])
def test_non_idling(staff):
    for t, kind, c, free, live in audit(staff, 21):
        if free[0] > 0:
            assert live[0] == 0
        if free[1] > 0:
            assert live[0] == 0 and live[1] == 0
        if free[2] > 0:
            assert live[2] == 0 and live[3] == 0


@pytest.mark.parametrize("staff", [BASE_STAFF, Staffing(10, 3, 2)])
def test_premium_priority_in_technical_queue(staff):
    log = audit(staff, 22)
    for prev, rec in zip(log, log[1:]):
        if rec[1] == DONE_TECH and rec[4][2] < prev[4][2]:
            assert prev[4][3] == 0


def test_event_times_nondecreasing():
    times = [rec[0] for rec in audit(BASE_STAFF, 23)]
    assert all(a <= b for a, b in zip(times, times[1:]))


def test_more_technical_operators_lower_tech_overwork():
    base = Staffing(22, 9, 4)
    more = Staffing(22, 9, 5)
    a, b = run_scenario_samples(CFG, [base, more], 1000, CRN, seed=6)
    assert b[:, 4].mean() <= a[:, 4].mean()


def test_enumerate_fixed_total():
    assert len(enumerate_fixed_total(49)) == 1128
    assert enumerate_fixed_total(3) == [Staffing(1, 1, 1)]
    assert len(enumerate_fixed_total(5)) == 6
    assert all(s.total == 49 for s in enumerate_fixed_total(49))
    with pytest.raises(ValidationError):
        enumerate_fixed_total(2)


def test_enumerate_budget():
    assert enumerate_budget((1, 1, 1), (3, 3)) == [Staffing(1, 1, 1)]
    assert len(enumerate_budget((1, 1, 1), (6, 6))) == 10
    for s in enumerate_budget():
        assert 50 <= s.basic + 4 * s.premium + s.technical <= 55
    capped = enumerate_budget(caps=(30, 5, 30))
    assert all(s.basic <= 30 and s.premium <= 5 and s.technical <= 30 for s in capped)
    with pytest.raises(ValidationError):
        enumerate_budget((1, 1, 1), (1, 2))


def test_uniform_subset():
    line = [Staffing(b, 1, 1) for b in range(1, 11)]
    assert uniform_subset(line, 10) == line
    assert uniform_subset(line, 2) == [line[0], line[-1]]
    with pytest.raises(ValidationError):
        uniform_subset(line, 11)


def test_uniform_subset_space_filling():
    universe = enumerate_fixed_total(49)
    picked = uniform_subset(universe, 100, seed=0)
    assert len(set(picked)) == 100
    rng = np.random.default_rng(0)
    random_min = [min_pairwise_distance([universe[i] for i in rng.choice(len(universe), 100, replace=False)])
                  for _ in range(1000)]
    assert min_pairwise_distance(picked) >= np.median(random_min)


def test_f_test_planted_common_shock():
    rng = np.random.default_rng(0)
    # CRN: both scenarios share the day shock, so their difference is stable
    shock = rng.normal(scale=3.0, size=(60, 2))
    independent = np.abs(shock[:, 0] - (shock[:, 1] + 1.0))
    crn = np.abs(shock[:, 0] - (shock[:, 0] + 1.0 + rng.normal(scale=0.05, size=60)))
    f, p = f_test(independent, crn)
    assert f > 10 and p < 0.01


def test_crn_study_identical_pair_has_no_variance():
    rep = crn_distance_study(CFG, (BASE_STAFF, BASE_STAFF), 5, 4, SinkhornConfig(lam=0.1), seed=1)
    assert rep.variances[CRN] == pytest.approx(0.0, abs=1e-8)
    assert len(rep.distances[INDEPENDENT]) == 4
    with pytest.raises(ValidationError):
        crn_distance_study(CFG, (BASE_STAFF, BASE_STAFF), 5, 1)
