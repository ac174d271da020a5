"""Multi-step experiments built from the library pieces."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .barycenter import Barycenter, BarycenterConfig, free_support_barycenter
from .clustering import Clustering, DistanceMatrix, Dendrogram, adjusted_rand_index, cluster_distributions
from .distributions import EmpiricalDistribution, normalize_all
from .parallel import parallel_map
from .simulation import (
    CRN, INDEPENDENT, RNG_MODES, CallCenterConfig, Staffing, enumerate_fixed_total,
    run_scenarios, uniform_subset,
)
from .transport import SinkhornConfig


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


@dataclass
class AriStudy:
    truth_labels: np.ndarray
    truth_k: int
    # (mode, macroreplication, ari, selected k)
    rows: list = field(default_factory=list)

    def values(self, mode: str) -> np.ndarray:
        return np.array([r[2] for r in self.rows if r[0] == mode])

    def summary(self) -> dict:
        out = {"truth_k": self.truth_k}
        for mode in RNG_MODES:
            v = self.values(mode)
            out[mode] = {"mean": float(v.mean()), "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0,
                         "n": int(v.size)}
        return out


def crn_ari_study(cfg: CallCenterConfig, staffings: Sequence[Staffing], n_truth: int, n_small: int,
                  n_macroreps: int, sinkhorn_cfg: SinkhornConfig = SinkhornConfig(),
                  seed: int = 0, workers: int = 1) -> AriStudy:
    """Agreement of small-sample clusterings with a large-sample reference, per sampling mode."""
    truth_d = run_scenarios(cfg, staffings, n_truth, INDEPENDENT, derive_seed(seed, 0), workers)
    truth = cluster_distributions(truth_d, sinkhorn_cfg, workers=workers)[2]
    study = AriStudy(truth.labels, truth.k)
    for mode in RNG_MODES:
        for m in range(n_macroreps):
            d = run_scenarios(cfg, staffings, n_small, mode, derive_seed(seed, 1, m), workers)
            cl = cluster_distributions(d, sinkhorn_cfg, workers=workers)[2]
            study.rows.append((mode, m, adjusted_rand_index(truth.labels, cl.labels), cl.k))
    return study


@dataclass
class StaffingStudy:
    staffings: list
    distributions: list
    distances: DistanceMatrix
    dendrogram: Dendrogram
    clustering: Clustering
    barycenters: dict
    kpi_means: dict

    def non_dominated(self) -> list[int]:
        """Clusters whose barycenter KPI means no other cluster beats in every KPI."""
        keys = sorted(self.kpi_means)
        out = []
        for c in keys:
            x = self.kpi_means[c]
            if not any(np.all(self.kpi_means[o] <= x) and np.any(self.kpi_means[o] < x)
                       for o in keys if o != c):
                out.append(c)
        return out


def cluster_barycenters(dists: Sequence[EmpiricalDistribution], labels: Sequence[int],
                        bcfg: BarycenterConfig = BarycenterConfig(),
                        workers: int = 1) -> tuple[dict[int, Barycenter | None], dict[int, np.ndarray]]:
    """Barycenter per cluster, computed on pooled z-scores and mapped back to raw units.

    Single-member clusters pass the member through (value ``None`` in the
    first dict). The second dict holds the raw-unit KPI means.
    """
    normed, params = normalize_all(dists)
    labels = np.asarray(labels)
    bary: dict[int, Barycenter | None] = {}
    means: dict[int, np.ndarray] = {}

    def one(c):
        members = [normed[i] for i in np.flatnonzero(labels == c)]
        if len(members) == 1:
            return None, params.invert(members[0])
        size = min(bcfg.support_size or int(np.median([m.size for m in members])),
                   len(np.unique(np.vstack([m.support for m in members]), axis=0)))
        b = free_support_barycenter(members, replace(bcfg, support_size=size))
        return b, params.invert(b.distribution)

    clusters = sorted(set(int(c) for c in labels))
    for c, (b, raw) in zip(clusters, parallel_map(one, clusters, workers)):
        bary[c] = b
        means[c] = raw.mean()
    return bary, means


def staffing_study(cfg: CallCenterConfig, n_configs: int = 30, n_replications: int = 20,
                   total: int = 49, mode: str = CRN, seed: int = 0,
                   sinkhorn_cfg: SinkhornConfig = SinkhornConfig(),
                   bcfg: BarycenterConfig = BarycenterConfig(), workers: int = 1) -> StaffingStudy:
    """Subset the fixed-total universe, simulate, cluster and summarize each cluster."""
    staffings = uniform_subset(enumerate_fixed_total(total), n_configs, seed)
    dists = run_scenarios(cfg, staffings, n_replications, mode, seed, workers)
    dm, dendro, cl = cluster_distributions(dists, sinkhorn_cfg, workers=workers)
    bary, means = cluster_barycenters(dists, cl.labels, bcfg, workers)
    return StaffingStudy(staffings, dists, dm, dendro, cl, bary, means)
