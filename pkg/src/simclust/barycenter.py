"""Regularized Wasserstein barycenters on fixed and free supports."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .distributions import (
    SQUARED_EUCLIDEAN, METRICS, EmpiricalDistribution, pairwise_cost,
)
from .errors import SimclustError, ValidationError
from .parallel import parallel_map
from .transport import SinkhornConfig, sinkhorn_weights

WEIGHT_FLOOR = 1e-12
MONOTONE_SLACK = 1e-8


@dataclass(frozen=True)
class BarycenterConfig:
    """Parameters for the alternating barycenter solver.

    ``support_size=None`` means the median member support size. ``t0`` scales
    the multiplicative weight step and ``theta`` relaxes the support move.
    """

    support_size: int | None = None
    lam: float = 0.01
    theta: float = 1.0
    t0: float = 1.0
    outer_tolerance: float = 1e-6
    max_outer_iterations: int = 50
    weight_tolerance: float = 1e-7
    max_weight_iterations: int = 200
    metric_tag: str = SQUARED_EUCLIDEAN
    seed: int = 0
    sinkhorn_max_iterations: int = 10_000

    def __post_init__(self) -> None:
        if self.support_size is not None and self.support_size < 1:
            raise ValidationError("support_size must be at least 1")
        if not 0 < self.theta <= 1:
            raise ValidationError("theta must lie in (0, 1]")
        if not self.t0 > 0 or not self.lam > 0:
            raise ValidationError("t0 and lambda must be positive")
        if not self.outer_tolerance > 0 or not self.weight_tolerance > 0:
            raise ValidationError("tolerances must be positive")
        if self.max_outer_iterations < 1 or self.max_weight_iterations < 1:
            raise ValidationError("iteration caps must be at least 1")
        if self.metric_tag not in METRICS:
            raise ValidationError(f"unknown metric {self.metric_tag!r}")

    def sinkhorn(self) -> SinkhornConfig:
        return SinkhornConfig(lam=self.lam, max_iterations=self.sinkhorn_max_iterations)


@dataclass(frozen=True, eq=False)
class Barycenter:
    distribution: EmpiricalDistribution
    objective: float
    iterations_outer: int
    converged: bool
    objective_history: tuple[float, ...] = ()
    metric_tag: str = SQUARED_EUCLIDEAN
    stop_reason: str = ""
    respawned: int = 0

    def metadata(self) -> dict:
        return {
            "objective": self.objective,
            "iterations_outer": self.iterations_outer,
            "converged": self.converged,
            "objective_history": list(self.objective_history),
            "metric_tag": self.metric_tag,
            "stop_reason": self.stop_reason,
            "respawned": self.respawned,
            "support_size": self.distribution.size,
        }


@dataclass
class WeightSolve:
    """Result of the fixed-support weight optimization."""

    weights: np.ndarray
    objective: float
    iterations: int
    converged: bool
    plans: list = field(repr=False, default_factory=list)
    potentials: list = field(repr=False, default_factory=list)


def _check_cluster(cluster: Sequence[EmpiricalDistribution]) -> int:
    if not cluster:
        raise ValidationError("empty cluster")
    d = cluster[0].dim
    if any(m.dim != d for m in cluster):
        raise ValidationError("cluster members differ in dimension")
    return d


def _canonical(cluster: Sequence[EmpiricalDistribution]) -> list[EmpiricalDistribution]:
    # fixed member order keeps floating-point sums independent of input order
    return sorted(cluster, key=lambda m: (m.size, m.support.tobytes(), m.weights.tobytes()))


def _solve_members(p, costs, cluster, scfg, warm, workers):
    def one(i):
        try:
            return sinkhorn_weights(p, cluster[i].weights, costs[i], scfg,
                                    warm[i] if warm is not None else None)
        except SimclustError as exc:
            raise type(exc)(f"cluster member {i}: {exc}") from exc

    return parallel_map(one, range(len(cluster)), workers)


def fixed_support_weights(cluster: Sequence[EmpiricalDistribution], support: np.ndarray,
                          cfg: BarycenterConfig = BarycenterConfig(),
                          init: np.ndarray | None = None,
                          workers: int = 1) -> WeightSolve:
    """Accelerated mirror descent on the simplex driven by averaged dual potentials.

    Each pass interpolates ``p = (1 - 1/b) p_hat + (1/b) p_tilde`` with
    ``b = (t + 1) / 2``, solves every member against ``p`` and applies
    ``p_tilde <- p_tilde * exp(-t0 * b * g / max(D))`` followed by simplex
    renormalization, where ``g`` is the member-averaged ``lam * log(u)``.
    Stops on relative objective change.
    """
    _check_cluster(cluster)
    cluster = _canonical(cluster)
    support = np.atleast_2d(np.asarray(support, dtype=np.float64))
    if support.shape[1] != cluster[0].dim:
        raise ValidationError("support dimension does not match the cluster")
    m = support.shape[0]
    costs = [pairwise_cost(support, mem.support, cfg.metric_tag) for mem in cluster]
    # t0 is in units of the largest cost so the exponent is dimensionless
    step = cfg.t0 / max(max(float(D.max()) for D in costs), 1e-300)
    scfg = cfg.sinkhorn()
    p_hat = np.full(m, 1.0 / m) if init is None else _renorm(np.asarray(init, dtype=np.float64))
    p_tilde = p_hat.copy()
    warm = None
    prev = np.inf
    best = None
    best_feasible = False
    converged = False
    t = 0
    while t < cfg.max_weight_iterations:
        t += 1
        b = (t + 1) / 2.0
        p = _renorm((1 - 1 / b) * p_hat + p_tilde / b)
        res = _solve_members(p, costs, cluster, scfg, warm, workers)
        warm = [r.dual_potential_beta for r in res] if res[0].log_domain else None
        obj = float(np.mean([r.distance for r in res]))
        # an unconverged plan prices the wrong marginals, so it cannot win or stop the loop
        feasible = all(r.converged for r in res)
        if best is None or (feasible, -obj) > (best_feasible, -best.objective):
            best = WeightSolve(p, obj, t, False, [r.plan.coupling for r in res],
                               [r.dual_potential_alpha for r in res])
            best_feasible = feasible
        if m == 1 or (feasible and abs(prev - obj) <= cfg.weight_tolerance * max(abs(obj), 1e-300)):
            converged = True
            break
        prev = obj
        # -alpha = lam log u is the gradient of the cost in p
        grad = -np.mean([r.dual_potential_alpha for r in res], axis=0)
        grad = grad - grad.min()
        p_tilde = _renorm(p_tilde * np.exp(-step * b * grad))
        p_hat = _renorm((1 - 1 / b) * p_hat + p_tilde / b)
    best.iterations = t
    best.converged = converged
    return best


def _renorm(p: np.ndarray) -> np.ndarray:
    p = np.maximum(p, WEIGHT_FLOOR)
    return p / p.sum()


def initial_support(cluster: Sequence[EmpiricalDistribution], size: int, seed: int) -> np.ndarray:
    """``size`` distinct pooled member points, chosen by a seeded draw."""
    pooled = np.unique(np.vstack([m.support for m in cluster]), axis=0)
    if size > pooled.shape[0]:
        raise ValidationError(
            f"support_size {size} exceeds the {pooled.shape[0]} distinct member points")
    idx = np.sort(np.random.default_rng(seed).choice(pooled.shape[0], size, replace=False))
    return pooled[idx]


def default_support_size(cluster: Sequence[EmpiricalDistribution]) -> int:
    return max(1, int(round(float(np.median([m.size for m in cluster])))))


def free_support_barycenter(cluster: Sequence[EmpiricalDistribution],
                            cfg: BarycenterConfig = BarycenterConfig(),
                            workers: int = 1) -> Barycenter:
    """Alternate weight optimization with transport-weighted support relocation.

    The support step moves each point to the plan-weighted average of member
    points, relaxed by ``theta``. Points whose weight collapses are moved to
    the mean of the members. If the objective rises by more than 1e-8 the
    previous iterate is kept and the loop stops.
    """
    _check_cluster(cluster)
    cluster = _canonical(cluster)
    size = cfg.support_size or default_support_size(cluster)
    Y = initial_support(cluster, size, cfg.seed)
    center = np.mean([m.mean() for m in cluster], axis=0)
    solve = fixed_support_weights(cluster, Y, cfg, workers=workers)
    history = [solve.objective]
    converged = False
    reason = "max_iterations"
    respawned = 0
    outer = 0
    while outer < cfg.max_outer_iterations:
        outer += 1
        moved = sum(g @ mem.support for g, mem in zip(solve.plans, cluster)) / len(cluster)
        mass = sum(g.sum(axis=1) for g in solve.plans) / len(cluster)
        Y_new = (1 - cfg.theta) * Y + cfg.theta * moved / mass[:, None]
        # floored weights sit at ~1e-12 after renormalization
        dead = solve.weights < 2 * WEIGHT_FLOOR
        if np.any(dead):
            respawned += int(dead.sum())
            Y_new[dead] = center
        solve_new = fixed_support_weights(cluster, Y_new, cfg, init=solve.weights, workers=workers)
        if solve_new.objective > history[-1] + MONOTONE_SLACK:
            reason = "objective_increase"
            break
        dy = float(np.abs(Y_new - Y).max())
        dp = float(np.abs(solve_new.weights - solve.weights).max())
        Y, solve = Y_new, solve_new
        history.append(solve.objective)
        if dy < cfg.outer_tolerance and dp < cfg.outer_tolerance:
            converged = True
            reason = "converged"
            break
    dist = EmpiricalDistribution(Y, solve.weights / solve.weights.sum())
    return Barycenter(dist, solve.objective, outer, converged, tuple(history),
                      cfg.metric_tag, reason, respawned)


# --- density grids ----------------------------------------------------------------

def silverman_bandwidth(x: np.ndarray, w: np.ndarray) -> float:
    mean = w @ x
    sd = float(np.sqrt(w @ (x - mean) ** 2))
    n_eff = 1.0 / float(w @ w)
    h = 1.06 * sd * n_eff ** (-0.2)
    if h <= 0:
        h = 1e-3 * max(1.0, abs(float(mean)))
    return h


def density_grid(x: np.ndarray, w: np.ndarray | None = None,
                 n_points: int = 512) -> tuple[np.ndarray, np.ndarray, float]:
    """Weighted Gaussian KDE on ``n_points`` spanning the data range +-3 bandwidths."""
    x = np.asarray(x, dtype=np.float64).ravel()
    w = np.full(x.size, 1.0 / x.size) if w is None else np.asarray(w, dtype=np.float64) / np.sum(w)
    h = silverman_bandwidth(x, w)
    grid = np.linspace(x.min() - 3 * h, x.max() + 3 * h, n_points)
    z = (grid[:, None] - x[None, :]) / h
    dens = (np.exp(-0.5 * z * z) @ w) / (h * np.sqrt(2 * np.pi))
    return grid, dens, h


def write_density_csv(path: str | Path, dist: EmpiricalDistribution, names: Sequence[str],
                      comment: str | None = None, n_points: int = 512) -> None:
    """One block of ``(grid, density)`` columns per KPI."""
    cols = []
    header = []
    for j, name in enumerate(names):
        g, d, _ = density_grid(dist.support[:, j], dist.weights, n_points)
        cols += [g, d]
        header += [f"{name}_x", f"{name}_density"]
    with Path(path).open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.column_stack(cols):
            w.writerow([repr(float(v)) for v in row])


def write_barycenter_csv(path: str | Path, dist: EmpiricalDistribution, names: Sequence[str],
                         comment: str | None = None) -> None:
    with Path(path).open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + ["weight"])
        for y, p in zip(dist.support, dist.weights):
            w.writerow([repr(float(v)) for v in y] + [repr(float(p))])


def read_barycenter_csv(path: str | Path) -> tuple[list[str], EmpiricalDistribution]:
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return rows[0][:-1], EmpiricalDistribution(data[:, :-1], data[:, -1])


def barycenter_json(bary: Barycenter, extra: dict | None = None) -> str:
    doc = bary.metadata()
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1)
