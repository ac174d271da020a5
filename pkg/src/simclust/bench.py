"""Timing suites: distance scaling, agglomerative vs k-means, compiled vs Python kernels.

The k-means routine here is a minimal baseline for timing comparisons only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .barycenter import BarycenterConfig, free_support_barycenter
from .clustering import DistanceMatrix, agglomerate, pairwise_distances, select_clustering
from .distributions import EmpiricalDistribution, cost_matrix
from .simulation import CallCenterConfig, RngPolicy, Staffing, generate_customers, simulate_customers
from .transport import SinkhornConfig, exact_wasserstein, sinkhorn

DISTANCE_SIZES = (10, 25, 50, 100, 200, 400, 800)
KMEANS_N = (10, 20, 40, 60, 80, 100)
KMEANS_K = tuple(range(2, 11))


@dataclass(frozen=True)
class Timing:
    suite: str
    method: str
    n: int
    support: int
    seconds: float
    note: str = ""

    def row(self) -> list:
        return [self.suite, self.method, self.n, self.support, repr(self.seconds), self.note]


TIMING_HEADER = ["suite", "method", "n", "support", "seconds", "note"]


def best_of(fn: Callable[[], object], repeats: int) -> tuple[float, object]:
    best = np.inf
    out = None
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def random_pair(size: int, dim: int, rng: np.random.Generator) -> tuple[EmpiricalDistribution, EmpiricalDistribution]:
    a = EmpiricalDistribution.from_samples(rng.standard_normal((size, dim)))
    b = EmpiricalDistribution.from_samples(rng.standard_normal((size, dim)) + 0.5)
    return a, b


def distance_scaling(sizes: Sequence[int] = DISTANCE_SIZES, dim: int = 5, repeats: int = 3,
                     cfg: SinkhornConfig = SinkhornConfig(), seed: int = 0) -> list[Timing]:
    """Exact network simplex vs Sinkhorn on pairs of Gaussian samples."""
    rng = np.random.default_rng(seed)
    out = []
    # first call pays one-off import costs
    exact_wasserstein(*random_pair(2, dim, rng))
    for m in sizes:
        a, b = random_pair(m, dim, rng)
        D = cost_matrix(a, b)
        te, _ = best_of(lambda: exact_wasserstein(a, b, D), repeats)
        ts, res = best_of(lambda: sinkhorn(a, b, D, cfg), repeats)
        out.append(Timing("distance-scaling", "exact", 2, m, te))
        out.append(Timing("distance-scaling", "sinkhorn", 2, m, ts,
                          f"iterations={res.iterations} converged={res.converged}"))
    return out


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def linear_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


def synthetic_scenarios(n: int, support: int, dim: int = 5, groups: int = 4,
                        seed: int = 0) -> list[EmpiricalDistribution]:
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=3.0, size=(groups, dim))
    return [EmpiricalDistribution.from_samples(centers[i % groups] + rng.standard_normal((support, dim)))
            for i in range(n)]


def kmeans_baseline(dists: Sequence[EmpiricalDistribution], k: int, cfg: SinkhornConfig,
                    bcfg: BarycenterConfig, max_iter: int = 10, seed: int = 0) -> np.ndarray:
    """Lloyd iterations in Wasserstein space with barycenter centroids."""
    n = len(dists)
    rng = np.random.default_rng(seed)
    centers = [dists[i] for i in np.sort(rng.choice(n, k, replace=False))]
    labels = np.full(n, -1)
    for _ in range(max_iter):
        d = np.array([[sinkhorn(x, c, cost_matrix(x, c), cfg).distance for c in centers] for x in dists])
        new = d.argmin(axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            members = [dists[i] for i in np.flatnonzero(labels == c)]
            if members:
                centers[c] = free_support_barycenter(members, bcfg).distribution
    return labels


def agglomerative_total(dists: Sequence[EmpiricalDistribution], cfg: SinkhornConfig) -> int:
    dm = pairwise_distances(dists, cfg, normalize=False)
    return select_clustering(agglomerate(dm), dm).k


def clustering_vs_kmeans(ns: Sequence[int] = KMEANS_N, support: int = 20, ks: Sequence[int] = KMEANS_K,
                         cfg: SinkhornConfig = SinkhornConfig(lam=0.1),
                         bcfg: BarycenterConfig | None = None, seed: int = 0,
                         supports: Sequence[int] = (), n_fixed: int = 20) -> list[Timing]:
    """Total time of the agglomerative pipeline vs k-means over every k in ``ks``.

    Varies N at fixed support size, then (if ``supports`` is given) support
    size at fixed N.
    """
    out = []
    grid = [(n, support) for n in ns] + [(n_fixed, m) for m in supports]
    for n, m in grid:
        # a coarse centroid step; the baseline only needs its growth in N
        b = bcfg or BarycenterConfig(support_size=m, lam=1.0, max_outer_iterations=3,
                                     max_weight_iterations=10)
        dists = synthetic_scenarios(n, m, seed=seed)
        ta, _ = best_of(lambda: agglomerative_total(dists, cfg), 1)
        tk, _ = best_of(lambda: [kmeans_baseline(dists, k, cfg, b, seed=seed) for k in ks if k <= n], 1)
        out.append(Timing("clustering-vs-kmeans", "agglomerative", n, m, ta))
        out.append(Timing("clustering-vs-kmeans", "kmeans", n, m, tk, f"k={min(ks)}..{max(ks)}"))
    return out


def backend_timings(repeats: int = 3, seed: int = 0) -> list[Timing]:
    """Same inputs through the compiled and the pure-Python kernels."""
    rng = np.random.default_rng(seed)
    a, b = random_pair(100, 5, rng)
    D = cost_matrix(a, b).entries
    dm = DistanceMatrix(_symmetric(rng, 60), ())
    cfg = CallCenterConfig()
    cust = generate_customers(cfg, RngPolicy(seed=seed))
    staff = Staffing(22, 9, 8)
    out = []
    for name in ("compiled", "python"):
        if name == "compiled" and not _backend.has_compiled():
            continue
        k = _backend.get_kernels(name)
        ts, _ = best_of(lambda: k.sinkhorn_kernel(a.weights, b.weights, D, 0.1, 10_000, 1e-7, 1e-6, False), repeats)
        tl, _ = best_of(lambda: k.complete_linkage(dm.entries), repeats)
        tdes, _ = best_of(lambda: simulate_customers(cfg, staff, cust, backend=name), repeats)
        out += [Timing("backends", f"sinkhorn-{name}", 2, 100, ts),
                Timing("backends", f"linkage-{name}", 60, 0, tl),
                Timing("backends", f"simulate_day-{name}", 1, len(cust), tdes)]
    return out


def _symmetric(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.random((n, n))
    x = x + x.T
    np.fill_diagonal(x, 0.0)
    return x
