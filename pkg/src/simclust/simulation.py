"""Two-class call-center simulation with abandonment and technical escalation.

Time is in minutes. Every random quantity of a day is drawn up front from
counter-based (Philox) streams keyed by ``(seed, replication, scenario,
purpose)``; the event loop itself is deterministic. Under common random
numbers the scenario slot of the key is constant, so all staffings see the
same customers (arrival epochs, classes, patience, escalation flags and the
uniforms behind every service time).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from . import _backend
from .distributions import EmpiricalDistribution, fit_normalization, cost_matrix
from .errors import ValidationError
from .parallel import parallel_map
from .transport import SinkhornConfig, sinkhorn

KPI_NAMES = ("Y1", "Y2", "Y3", "Y4", "Y5")

INDEPENDENT = "independent"
CRN = "crn"
RNG_MODES = (INDEPENDENT, CRN)

_PURPOSES = ("arrival", "class", "impatience", "patience", "technical",
             "service_initial", "service_technical")


@dataclass(frozen=True)
class CallCenterConfig:
    open_duration: float = 8.0        # hours
    arrival_rate: float = 400.0       # customers per hour
    premium_fraction: float = 0.4
    impatient_fraction: float = 0.15
    patience_bounds: tuple[float, float] = (0.5, 3.0)   # minutes
    technical_fraction: float = 0.15
    service_means: tuple[float, float, float] = (7.0, 3.0, 10.0)  # basic, premium, technical

    def __post_init__(self) -> None:
        if self.open_duration <= 0 or self.arrival_rate <= 0:
            raise ValidationError("open duration and arrival rate must be positive")
        for name in ("premium_fraction", "impatient_fraction", "technical_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")
        lo, hi = self.patience_bounds
        if not 0 <= lo < hi:
            raise ValidationError("patience bounds must satisfy 0 <= lower < upper")
        if len(self.service_means) != 3 or min(self.service_means) <= 0:
            raise ValidationError("three positive service means required")

    @property
    def close(self) -> float:
        return self.open_duration * 60.0

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "CallCenterConfig":
        d = dict(d)
        for k in ("patience_bounds", "service_means"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


@dataclass(frozen=True, order=True)
class Staffing:
    """Operator counts in (basic, premium, technical) order."""

    basic: int
    premium: int
    technical: int

    def __post_init__(self) -> None:
        if min(self.basic, self.premium, self.technical) < 1:
            raise ValidationError("at least one operator of each type is required")

    @classmethod
    def from_pbt(cls, premium: int, basic: int, technical: int) -> "Staffing":
        """Build from a (premium, basic, technical) triplet."""
        return cls(basic, premium, technical)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.basic, self.premium, self.technical)

    @property
    def total(self) -> int:
        return self.basic + self.premium + self.technical

    def __str__(self) -> str:
        return f"b{self.basic}-p{self.premium}-t{self.technical}"


@dataclass(frozen=True)
class RngPolicy:
    mode: str = INDEPENDENT
    seed: int = 0
    replication_index: int = 0
    scenario_index: int = 0

    def __post_init__(self) -> None:
        if self.mode not in RNG_MODES:
            raise ValidationError(f"unknown rng mode {self.mode!r}")
        if self.seed < 0 or self.replication_index < 0 or self.scenario_index < 0:
            raise ValidationError("seed and indices must be nonnegative")

    def key(self, purpose: str) -> list[int]:
        scenario = 0 if self.mode == CRN else self.scenario_index + 1
        return [self.seed, self.replication_index, scenario, _PURPOSES.index(purpose)]


def stream(policy: RngPolicy, purpose: str) -> np.random.Generator:
    """Philox generator for one purpose of one (seed, replication[, scenario])."""
    key = np.random.SeedSequence(policy.key(purpose)).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True, eq=False)
class Customers:
    arrival: np.ndarray
    premium: np.ndarray
    impatient: np.ndarray
    patience: np.ndarray
    technical: np.ndarray
    u_initial: np.ndarray
    u_technical: np.ndarray

    def __len__(self) -> int:
        return len(self.arrival)


def generate_customers(cfg: CallCenterConfig, policy: RngPolicy) -> Customers:
    close = cfg.close
    mean_gap = 60.0 / cfg.arrival_rate
    rng = stream(policy, "arrival")
    expected = close / mean_gap
    chunk = int(expected + 6 * math.sqrt(expected)) + 16
    times = np.cumsum(rng.exponential(mean_gap, chunk))
    while times[-1] < close:
        more = np.cumsum(rng.exponential(mean_gap, chunk)) + times[-1]
        times = np.concatenate([times, more])
    arrival = times[times < close]
    n = len(arrival)
    lo, hi = cfg.patience_bounds
    return Customers(
        arrival=arrival,
        premium=(stream(policy, "class").random(n) < cfg.premium_fraction).astype(np.int8),
        impatient=(stream(policy, "impatience").random(n) < cfg.impatient_fraction).astype(np.int8),
        patience=lo + (hi - lo) * stream(policy, "patience").random(n),
        technical=(stream(policy, "technical").random(n) < cfg.technical_fraction).astype(np.int8),
        u_initial=stream(policy, "service_initial").random(n),
        u_technical=stream(policy, "service_technical").random(n),
    )


@dataclass(frozen=True, eq=False)
class ReplicationOutput:
    """One simulated day.

    ``kpis``: mean time in system of regular (Y1) and premium (Y2) customers
    who completed service, and mean per-operator overwork past closing for
    basic (Y3), premium (Y4) and technical (Y5) operators.
    """

    kpis: np.ndarray
    arrivals: int
    completions: int
    abandonments: int
    impatient_arrivals: int
    states: np.ndarray = field(repr=False)
    hourly: np.ndarray = field(repr=False)
    n_operators: int = 0
    snapshot_interval: float = 60.0


def simulate_customers(cfg: CallCenterConfig, staffing: Staffing, customers: Customers,
                       snapshot_interval: float = 60.0, backend: str | None = None,
                       log: list | None = None) -> ReplicationOutput:
    kern = _backend.get_kernels("python" if log is not None else backend)
    mb, mp, mt = cfg.service_means
    kpis, counts, states, hourly = kern.simulate_day(
        customers.arrival, customers.premium, customers.impatient, customers.patience,
        customers.technical, customers.u_initial, customers.u_technical,
        staffing.basic, staffing.premium, staffing.technical, mb, mp, mt,
        cfg.close, 60.0, snapshot_interval, **({"log": log} if log is not None else {}))
    return ReplicationOutput(kpis, int(counts[0]), int(counts[1]), int(counts[2]),
                             int(counts[3]), states, hourly, staffing.total, snapshot_interval)


def simulate_day(cfg: CallCenterConfig, staffing: Staffing, rng: RngPolicy,
                 snapshot_interval: float = 60.0, backend: str | None = None,
                 log: list | None = None) -> ReplicationOutput:
    """Simulate one day; arrivals stop at closing, service continues until empty."""
    return simulate_customers(cfg, staffing, generate_customers(cfg, rng),
                              snapshot_interval, backend, log)


def simulate_replications(cfg: CallCenterConfig, staffing: Staffing, n_replications: int,
                          mode: str = INDEPENDENT, seed: int = 0, scenario_index: int = 0,
                          first_replication: int = 0) -> np.ndarray:
    """KPI matrix ``(n_replications, 5)`` for one staffing."""
    out = np.empty((n_replications, 5))
    for r in range(n_replications):
        pol = RngPolicy(mode, seed, first_replication + r, scenario_index)
        out[r] = simulate_day(cfg, staffing, pol).kpis
    return out


def run_scenario_samples(cfg: CallCenterConfig, staffings: Sequence[Staffing],
                         n_replications: int, mode: str = INDEPENDENT, seed: int = 0,
                         workers: int = 1) -> list[np.ndarray]:
    """Raw KPI samples per staffing (rows are replications)."""
    if n_replications < 1:
        raise ValidationError("need at least one replication")
    if mode not in RNG_MODES:
        raise ValidationError(f"unknown rng mode {mode!r}")
    if mode == CRN:
        # one customer population per replication, shared by every staffing
        out = [np.empty((n_replications, 5)) for _ in staffings]
        for r in range(n_replications):
            cust = generate_customers(cfg, RngPolicy(CRN, seed, r))
            rows = parallel_map(lambda s: simulate_customers(cfg, s, cust).kpis, staffings, workers)
            for i, row in enumerate(rows):
                out[i][r] = row
        return out
    return parallel_map(
        lambda item: simulate_replications(cfg, item[1], n_replications, mode, seed, item[0]),
        list(enumerate(staffings)), workers)


def run_scenarios(cfg: CallCenterConfig, staffings: Sequence[Staffing], n_replications: int,
                  rng_mode: str = INDEPENDENT, seed: int = 0,
                  workers: int = 1) -> list[EmpiricalDistribution]:
    samples = run_scenario_samples(cfg, staffings, n_replications, rng_mode, seed, workers)
    return [EmpiricalDistribution.from_samples(s) for s in samples]


# --- staffing universes --------------------------------------------------------

def enumerate_fixed_total(total: int) -> list[Staffing]:
    """Every (basic, premium, technical) with all parts >= 1 summing to ``total``."""
    if total < 3:
        raise ValidationError("total must be at least 3")
    return [Staffing(b, p, total - b - p)
            for b in range(1, total - 1) for p in range(1, total - b)]


def enumerate_budget(costs: tuple[float, float, float] = (1, 4, 1),
                     budget: tuple[float, float] = (50, 55),
                     caps: tuple[int | None, int | None, int | None] = (None, None, None)) -> list[Staffing]:
    """Staffings with every count >= 1 and total cost inside ``budget``.

    ``costs`` and ``caps`` follow (basic, premium, technical) order; the
    default costs charge 4 per premium operator and 1 otherwise.
    """
    lo, hi = budget
    if lo > hi:
        raise ValidationError("empty budget range")
    if min(costs) <= 0:
        raise ValidationError("costs must be positive")
    limits = []
    for c, cap in zip(costs, caps):
        most = int(math.floor(hi / c))
        limits.append(most if cap is None else min(most, int(cap)))
    cb, cp, ct = costs
    out = []
    for b in range(1, limits[0] + 1):
        for p in range(1, limits[1] + 1):
            for t in range(1, limits[2] + 1):
                cost = cb * b + cp * p + ct * t
                if lo <= cost <= hi:
                    out.append(Staffing(b, p, t))
    if not out:
        raise ValidationError("no staffing satisfies the budget")
    return out


def uniform_subset(configs: Sequence[Staffing], n: int, seed: int = 0) -> list[Staffing]:
    """Greedy farthest-point (maximin) selection in staffing-count space.

    The start point is drawn (using ``seed``) among the configurations farthest
    from the centroid; each further pick maximizes the distance to the
    selected set, ties to the lowest index. Returned in input order.
    """
    configs = list(configs)
    if n > len(configs):
        raise ValidationError(f"cannot pick {n} of {len(configs)} configurations")
    if n == len(configs):
        return configs
    if n <= 0:
        return []
    pts = np.array([c.as_tuple() for c in configs], dtype=np.float64)
    d_center = ((pts - pts.mean(axis=0)) ** 2).sum(axis=1)
    far = np.flatnonzero(d_center == d_center.max())
    start = int(np.random.default_rng(seed).choice(far))
    chosen = [start]
    mind = ((pts - pts[start]) ** 2).sum(axis=1)
    for _ in range(n - 1):
        nxt = int(np.argmax(mind))
        chosen.append(nxt)
        mind = np.minimum(mind, ((pts - pts[nxt]) ** 2).sum(axis=1))
    return [configs[i] for i in sorted(chosen)]


def min_pairwise_distance(configs: Sequence[Staffing]) -> float:
    pts = np.array([c.as_tuple() for c in configs], dtype=np.float64)
    return min(float(np.linalg.norm(a - b)) for a, b in combinations(pts, 2))


# --- common random numbers study ------------------------------------------------

@dataclass
class CrnVarianceReport:
    distances: dict[str, list[float]]
    variances: dict[str, float]
    f_statistic: float
    p_value: float
    n_replications: int
    n_macroreps: int

    def to_dict(self) -> dict:
        return asdict(self)


def f_test(independent: Sequence[float], crn: Sequence[float]) -> tuple[float, float]:
    """Variance ratio independent/crn and its two-sided p-value."""
    a = np.asarray(independent, dtype=np.float64)
    b = np.asarray(crn, dtype=np.float64)
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if vb == 0.0:
        return (math.inf if va > 0 else math.nan), (0.0 if va > 0 else 1.0)
    f = va / vb
    dist = stats.f(len(a) - 1, len(b) - 1)
    p = 2.0 * min(dist.cdf(f), dist.sf(f))
    return float(f), float(min(p, 1.0))


def pair_distance(samples_a: np.ndarray, samples_b: np.ndarray,
                  sinkhorn_cfg: SinkhornConfig, metric: str = "euclidean") -> float:
    """Sinkhorn distance between two sample sets after joint normalization."""
    a = EmpiricalDistribution.from_samples(samples_a)
    b = EmpiricalDistribution.from_samples(samples_b)
    norm = fit_normalization([a, b])
    a, b = norm.apply(a), norm.apply(b)
    return sinkhorn(a, b, cost_matrix(a, b, metric), sinkhorn_cfg).distance


def crn_distance_study(cfg: CallCenterConfig, pair: tuple[Staffing, Staffing],
                       n_replications: int, n_macroreps: int,
                       sinkhorn_cfg: SinkhornConfig = SinkhornConfig(), seed: int = 0,
                       workers: int = 1,
                       distance: Callable[[np.ndarray, np.ndarray], float] | None = None
                       ) -> CrnVarianceReport:
    """Distance variability between two staffings, independent vs CRN sampling."""
    if n_macroreps < 2:
        raise ValidationError("need at least two macroreplications")
    if distance is None:
        def distance(x, y):
            return pair_distance(x, y, sinkhorn_cfg)

    def one(job):
        mode, m = job
        macro_seed = int(np.random.SeedSequence([seed, m]).generate_state(1, np.uint64)[0])
        s = run_scenario_samples(cfg, pair, n_replications, mode, macro_seed)
        return distance(s[0], s[1])

    jobs = [(mode, m) for mode in RNG_MODES for m in range(n_macroreps)]
    vals = parallel_map(one, jobs, workers)
    dists = {INDEPENDENT: vals[:n_macroreps], CRN: vals[n_macroreps:]}
    variances = {k: float(np.var(v, ddof=1)) for k, v in dists.items()}
    f, p = f_test(dists[INDEPENDENT], dists[CRN])
    return CrnVarianceReport(dists, variances, f, p, n_replications, n_macroreps)


def staffing_list_to_json(staffings: Iterable[Staffing]) -> list[list[int]]:
    return [list(s.as_tuple()) for s in staffings]
