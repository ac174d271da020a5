"""Empirical distributions, per-dimension normalization and cost matrices."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

EUCLIDEAN = "euclidean"
SQUARED_EUCLIDEAN = "squared_euclidean"
METRICS = (EUCLIDEAN, SQUARED_EUCLIDEAN)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _merge_rows(points: np.ndarray, mass: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge bitwise-identical rows, summing mass; keeps first-occurrence order."""
    contiguous = np.ascontiguousarray(points)
    keys = contiguous.view(np.dtype((np.void, contiguous.dtype.itemsize * contiguous.shape[1])))
    _, first, inverse = np.unique(keys.ravel(), return_index=True, return_inverse=True)
    if len(first) == len(points):
        return points, mass
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    merged = np.zeros(len(first))
    np.add.at(merged, rank[inverse.ravel()], mass)
    return points[first[order]], merged


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Weighted point cloud: ``support`` is ``(M, d)``, ``weights`` sums to one."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        support = np.array(self.support, dtype=np.float64)
        if support.ndim == 1:
            support = support[:, None]
        weights = np.array(self.weights, dtype=np.float64).ravel()
        if support.ndim != 2 or support.shape[0] < 1 or support.shape[1] < 1:
            raise ValidationError("support must be a non-empty (M, d) matrix")
        if weights.shape[0] != support.shape[0]:
            raise ValidationError("weights length does not match support size")
        if not np.all(np.isfinite(support)) or not np.all(np.isfinite(weights)):
            raise ValidationError("non-finite sample")
        if np.any(weights < 0):
            raise ValidationError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError(f"weights sum to {weights.sum()!r}, not 1")
        support, weights = _merge_rows(support, weights)
        object.__setattr__(self, "support", _readonly(support))
        object.__setattr__(self, "weights", _readonly(weights))

    @classmethod
    def from_samples(cls, samples: Iterable[Sequence[float]] | np.ndarray) -> "EmpiricalDistribution":
        """Uniform mass ``1/n`` per sample, duplicates merged."""
        arr = np.array(samples, dtype=np.float64)
        if arr.size == 0:
            raise ValidationError("empty sample set")
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValidationError("samples must be a list of equal-length vectors")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("non-finite sample")
        n = arr.shape[0]
        return cls(arr, np.full(n, 1.0 / n))

    @property
    def size(self) -> int:
        return self.support.shape[0]

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    def mean(self) -> np.ndarray:
        return self.weights @ self.support

    def __repr__(self) -> str:
        return f"EmpiricalDistribution(M={self.size}, d={self.dim})"


def from_samples(samples) -> EmpiricalDistribution:
    return EmpiricalDistribution.from_samples(samples)


@dataclass(frozen=True, eq=False)
class NormalizationParams:
    center: np.ndarray
    scale: np.ndarray

    def __post_init__(self) -> None:
        center = np.array(self.center, dtype=np.float64).ravel()
        scale = np.array(self.scale, dtype=np.float64).ravel()
        if center.shape != scale.shape:
            raise ValidationError("center and scale must have the same length")
        if np.any(scale <= 0) or not np.all(np.isfinite(scale)):
            raise ValidationError("scale must be strictly positive")
        object.__setattr__(self, "center", _readonly(center))
        object.__setattr__(self, "scale", _readonly(scale))

    def apply(self, dist: EmpiricalDistribution) -> EmpiricalDistribution:
        return EmpiricalDistribution((dist.support - self.center) / self.scale, dist.weights)

    def invert(self, dist: EmpiricalDistribution) -> EmpiricalDistribution:
        return EmpiricalDistribution(dist.support * self.scale + self.center, dist.weights)

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - self.center) / self.scale

    def invert_points(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) * self.scale + self.center


def _common_dim(dists: Sequence[EmpiricalDistribution]) -> int:
    if not dists:
        raise ValidationError("need at least one distribution")
    d = dists[0].dim
    if any(x.dim != d for x in dists):
        raise ValidationError("dimension mismatch between distributions")
    return d


def fit_normalization(dists: Sequence[EmpiricalDistribution]) -> NormalizationParams:
    """Pooled z-score parameters; every scenario carries equal total mass.

    Dimensions whose pooled standard deviation is below 1e-12 get scale 1.
    """
    _common_dim(dists)
    share = 1.0 / len(dists)
    center = sum(share * (x.weights @ x.support) for x in dists)
    var = sum(share * (x.weights @ (x.support - center) ** 2) for x in dists)
    sd = np.sqrt(var)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return NormalizationParams(center, sd)


def normalize_all(dists: Sequence[EmpiricalDistribution]) -> tuple[list[EmpiricalDistribution], NormalizationParams]:
    params = fit_normalization(dists)
    return [params.apply(x) for x in dists], params


@dataclass(frozen=True, eq=False)
class CostMatrix:
    entries: np.ndarray
    metric_tag: str = EUCLIDEAN

    def __post_init__(self) -> None:
        if self.metric_tag not in METRICS:
            raise ValidationError(f"unknown metric {self.metric_tag!r}")
        object.__setattr__(self, "entries", _readonly(np.asarray(self.entries, dtype=np.float64)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def T(self) -> "CostMatrix":
        return CostMatrix(self.entries.T.copy(), self.metric_tag)


def pairwise_cost(x: np.ndarray, y: np.ndarray, metric_tag: str = EUCLIDEAN) -> np.ndarray:
    """Cost between point sets, exact zero for identical points."""
    if metric_tag not in METRICS:
        raise ValidationError(f"unknown metric {metric_tag!r}")
    diff = x[:, None, :] - y[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    return sq if metric_tag == SQUARED_EUCLIDEAN else np.sqrt(sq)


def cost_matrix(a: EmpiricalDistribution, b: EmpiricalDistribution,
                metric_tag: str = EUCLIDEAN) -> CostMatrix:
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return CostMatrix(pairwise_cost(a.support, b.support, metric_tag), metric_tag)


# --- CSV ---------------------------------------------------------------------

def read_samples_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read one scenario file: header of KPI names, one row per replication.

    Lines starting with ``#`` are treated as comments.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    if data.size == 0:
        raise ValidationError(f"{path}: empty sample set")
    if data.shape[1] != len(header):
        raise ValidationError(f"{path}: {data.shape[1]} columns but {len(header)} names")
    return header, data


def write_samples_csv(path: str | Path, names: Sequence[str], samples: np.ndarray,
                      comment: str | None = None) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in np.atleast_2d(samples):
            w.writerow([repr(float(v)) for v in row])


def read_distribution_csv(path: str | Path) -> tuple[list[str], EmpiricalDistribution]:
    names, data = read_samples_csv(path)
    return names, EmpiricalDistribution.from_samples(data)
