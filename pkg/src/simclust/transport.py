"""Entropy-regularized transport (Sinkhorn scaling) and the exact LP oracle."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .distributions import CostMatrix, EmpiricalDistribution, cost_matrix
from .errors import NumericalError, ValidationError

# the plain scaling form is used while lambda / max(D) stays above this
LOG_DOMAIN_RATIO = 0.05
EXACT_SIZE_CAP = 10**6


@dataclass(frozen=True)
class SinkhornConfig:
    """Regularization strength and stopping rule.

    ``lam`` is in the same units as the cost matrix. The run stops when the
    relative change of ``<D, plan>`` between sweeps drops below ``tolerance``
    (and the plan's marginals are within ``marginal_tolerance``) or after
    ``max_iterations`` sweeps. ``method`` is ``auto``, ``plain`` or ``log``.
    """

    lam: float = 0.01
    max_iterations: int = 10_000
    tolerance: float = 1e-7
    marginal_tolerance: float = 1e-6
    method: str = "auto"

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValidationError("lambda must be positive")
        if not self.tolerance > 0 or not self.marginal_tolerance > 0:
            raise ValidationError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be at least 1")
        if self.method not in ("auto", "plain", "log"):
            raise ValidationError(f"unknown method {self.method!r}")


@dataclass(frozen=True, eq=False)
class TransportPlan:
    coupling: np.ndarray
    row_marginal_error: float
    col_marginal_error: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.coupling.shape


@dataclass(frozen=True, eq=False)
class SinkhornResult:
    distance: float
    plan: TransportPlan
    iterations: int
    converged: bool
    dual_potential_alpha: np.ndarray
    log_domain: bool = field(default=False)
    # column potential, usable as a warm start for a nearby problem
    dual_potential_beta: np.ndarray | None = field(default=None, repr=False)


def _use_log_domain(D: np.ndarray, cfg: SinkhornConfig) -> bool:
    if cfg.method != "auto":
        return cfg.method == "log"
    dmax = float(D.max()) if D.size else 0.0
    return dmax > 0 and cfg.lam / dmax < LOG_DOMAIN_RATIO


def sinkhorn_weights(p: np.ndarray, q: np.ndarray, D: np.ndarray,
                     cfg: SinkhornConfig = SinkhornConfig(),
                     warm_start: np.ndarray | None = None) -> SinkhornResult:
    """Sinkhorn on raw weight vectors; ``p`` and ``q`` must be strictly positive."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    D = np.ascontiguousarray(D, dtype=np.float64)
    if D.shape != (p.shape[0], q.shape[0]):
        raise ValidationError(f"cost shape {D.shape} does not match weights ({p.shape[0]}, {q.shape[0]})")
    if np.any(p <= 0) or np.any(q <= 0):
        raise ValidationError("Sinkhorn needs strictly positive weights")
    log_domain = _use_log_domain(D, cfg)
    plan, dist, it, conv, alpha, rerr, cerr, status, beta = _backend.kernels.sinkhorn_kernel(
        p, q, D, cfg.lam, cfg.max_iterations, cfg.tolerance, cfg.marginal_tolerance,
        log_domain, warm_start if log_domain else None)
    if status == _backend.UNDERFLOW:
        ratio = cfg.lam / float(D.max())
        raise NumericalError(f"regularization too small for cost scale (lambda/max(D) = {ratio:.3g})")
    if not np.isfinite(dist):
        raise NumericalError("Sinkhorn produced a non-finite distance")
    return SinkhornResult(float(dist), TransportPlan(plan, rerr, cerr), int(it), bool(conv),
                          alpha, log_domain, beta)


def sinkhorn(a: EmpiricalDistribution, b: EmpiricalDistribution,
             D: CostMatrix | np.ndarray | None = None,
             cfg: SinkhornConfig = SinkhornConfig()) -> SinkhornResult:
    """Regularized transport cost ``<D, plan>`` between two distributions."""
    if D is None:
        D = cost_matrix(a, b)
    entries = D.entries if isinstance(D, CostMatrix) else np.asarray(D, dtype=np.float64)
    return sinkhorn_weights(a.weights, b.weights, entries, cfg)


_ot = None


def _pot():
    global _ot
    if _ot is None:
        # keep POT from probing for GPU frameworks at import
        for key in ("PYTORCH", "JAX", "CUPY", "TENSORFLOW"):
            os.environ.setdefault(f"POT_BACKEND_DISABLE_{key}", "1")
        import ot

        _ot = ot
    return _ot


def exact_wasserstein(a: EmpiricalDistribution, b: EmpiricalDistribution,
                      D: CostMatrix | np.ndarray | None = None) -> tuple[float, TransportPlan]:
    """Optimal transport LP solved by network simplex (vertex solution)."""
    if D is None:
        D = cost_matrix(a, b)
    entries = D.entries if isinstance(D, CostMatrix) else np.asarray(D, dtype=np.float64)
    return exact_weights(a.weights, b.weights, entries)


def exact_weights(p: np.ndarray, q: np.ndarray, D: np.ndarray) -> tuple[float, TransportPlan]:
    p = np.ascontiguousarray(p, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    D = np.ascontiguousarray(D, dtype=np.float64)
    if D.shape != (p.shape[0], q.shape[0]):
        raise ValidationError("cost shape does not match weights")
    if p.shape[0] * q.shape[0] > EXACT_SIZE_CAP:
        raise ValidationError(
            f"exact transport limited to {EXACT_SIZE_CAP} cells; use sinkhorn for "
            f"{p.shape[0]}x{q.shape[0]}")
    ot = _pot()
    # match total masses exactly; both are 1 up to rounding
    q = q * (p.sum() / q.sum())
    plan, log = ot.emd(p, q, D, numItermax=50_000_000, log=True)
    if log.get("warning"):
        raise NumericalError(f"network simplex did not finish: {log['warning']}")
    plan = np.asarray(plan)
    rerr = float(np.abs(plan.sum(axis=1) - p).max())
    cerr = float(np.abs(plan.sum(axis=0) - q).max())
    return float((plan * D).sum()), TransportPlan(plan, rerr, cerr)


def plan_entropy(plan: TransportPlan | np.ndarray) -> float:
    """``-sum g log g`` with ``0 log 0 = 0``."""
    g = plan.coupling if isinstance(plan, TransportPlan) else np.asarray(plan, dtype=np.float64)
    nz = g[g > 0]
    return float(-(nz * np.log(nz)).sum())
