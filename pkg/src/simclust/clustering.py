"""Complete-linkage agglomerative clustering over regularized Wasserstein distances."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _backend
from .distributions import EUCLIDEAN, EmpiricalDistribution, cost_matrix, normalize_all
from .errors import SimclustError, ValidationError
from .parallel import parallel_map
from .transport import SinkhornConfig, sinkhorn


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    entries: np.ndarray
    scenario_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        e = np.array(self.entries, dtype=np.float64)
        n = e.shape[0]
        if e.ndim != 2 or e.shape != (n, n):
            raise ValidationError("distance matrix must be square")
        if not np.all(np.isfinite(e)):
            raise ValidationError("distance matrix has non-finite entries")
        if np.any(np.diag(e) != 0):
            raise ValidationError("distance matrix diagonal must be zero")
        if np.any(e < 0):
            raise ValidationError("distances must be nonnegative")
        if not np.allclose(e, e.T, rtol=0, atol=1e-9):
            raise ValidationError("distance matrix is not symmetric")
        ids = tuple(str(s) for s in self.scenario_ids) if self.scenario_ids else tuple(str(i) for i in range(n))
        if len(ids) != n:
            raise ValidationError("scenario id count does not match matrix size")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "scenario_ids", ids)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


class PairError(SimclustError):
    """A Sinkhorn failure tagged with the scenario pair that caused it."""

    def __init__(self, i: int, j: int, cause: Exception):
        super().__init__(f"pair ({i}, {j}): {cause}")
        self.pair = (i, j)
        self.cause = cause


def pairwise_distances(distributions: Sequence[EmpiricalDistribution],
                       cfg: SinkhornConfig = SinkhornConfig(),
                       metric_tag: str = EUCLIDEAN,
                       scenario_ids: Sequence[str] | None = None,
                       normalize: bool = True,
                       workers: int = 1) -> DistanceMatrix:
    """Sinkhorn distance for every unordered pair, after pooled z-scoring."""
    if len(distributions) < 2:
        raise ValidationError("need at least two distributions")
    dists = normalize_all(distributions)[0] if normalize else list(distributions)
    n = len(dists)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def one(pair):
        i, j = pair
        try:
            return sinkhorn(dists[i], dists[j], cost_matrix(dists[i], dists[j], metric_tag), cfg).distance
        except SimclustError as exc:
            raise PairError(i, j, exc) from exc

    vals = parallel_map(one, pairs, workers)
    out = np.zeros((n, n))
    for (i, j), v in zip(pairs, vals):
        out[i, j] = v
        out[j, i] = v
    return DistanceMatrix(out, tuple(scenario_ids) if scenario_ids else tuple(str(i) for i in range(n)))


@dataclass(frozen=True, eq=False)
class Dendrogram:
    """Merge history: row ``s`` of ``merges`` is (left, right, height, new_id).

    Leaves are ``0..N-1``; the cluster created by merge ``s`` has id ``N + s``.
    """

    merges: np.ndarray
    leaf_ids: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.leaf_ids)

    def records(self) -> list[dict]:
        return [{"left": int(l), "right": int(r), "height": float(h), "new_id": int(k)}
                for l, r, h, k in self.merges]

    def cut(self, k: int) -> np.ndarray:
        """Labels of the ``k``-cluster level, numbered by first member."""
        n = self.n
        if not 1 <= k <= n:
            raise ValidationError(f"k must be in [1, {n}]")
        parent = list(range(2 * n - 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for left, right, _, new in self.merges[: n - k]:
            parent[find(int(left))] = int(new)
            parent[find(int(right))] = int(new)
        roots = [find(i) for i in range(n)]
        relabel: dict[int, int] = {}
        return np.array([relabel.setdefault(r, len(relabel)) for r in roots], dtype=np.int64)

    def to_json(self) -> str:
        return json.dumps({"leaf_ids": list(self.leaf_ids), "merges": self.records()}, indent=1)


def agglomerate(dm: DistanceMatrix, backend: str | None = None) -> Dendrogram:
    """Complete linkage, merging the pair with the smallest maximum distance."""
    merges = _backend.get_kernels(backend).complete_linkage(dm.entries)
    return Dendrogram(merges, dm.scenario_ids)


def naive_complete_linkage(D: np.ndarray) -> np.ndarray:
    """Reference: recompute every inter-cluster max distance at every step."""
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    clusters = {i: [i] for i in range(n)}
    out = []
    for step in range(n - 1):
        best = None
        keys = sorted(clusters)
        for x in range(len(keys)):
            for y in range(x + 1, len(keys)):
                a, b = keys[x], keys[y]
                h = max(D[i, j] for i in clusters[a] for j in clusters[b])
                if best is None or h < best[0] or (h == best[0] and (a, b) < (best[1], best[2])):
                    best = (h, a, b)
        h, a, b = best
        clusters[n + step] = clusters.pop(a) + clusters.pop(b)
        out.append((a, b, h, n + step))
    return np.array(out, dtype=np.float64).reshape(-1, 4)


def silhouette_index(dm: DistanceMatrix | np.ndarray, labels: Sequence[int],
                     reduced_denominator: bool = False) -> float:
    """Cluster-averaged silhouette: mean over clusters of the mean ``S_mu``.

    ``b_mu`` averages over the other cluster's members (``1/|C'|``). With
    ``reduced_denominator`` the sum is divided by ``|C'| - 1`` instead, which
    needs every cluster to have at least two members. Singletons score 0.
    """
    D = dm.entries if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=np.float64)
    labels = np.asarray(labels)
    n = D.shape[0]
    if labels.shape != (n,):
        raise ValidationError("one label per scenario required")
    uniq = np.unique(labels)
    k = len(uniq)
    if k < 2 or k >= n:
        raise ValidationError("silhouette undefined at trivial levels")
    members = [np.flatnonzero(labels == c) for c in uniq]
    sizes = np.array([len(m) for m in members])
    if reduced_denominator and sizes.min() < 2:
        raise ValidationError("the |C'|-1 denominator needs clusters of size >= 2")
    # sums[i, c] = total distance from i to cluster c
    sums = np.stack([D[:, m].sum(axis=1) for m in members], axis=1)
    own = np.searchsorted(uniq, labels)
    s = np.zeros(n)
    for i in range(n):
        ci = own[i]
        if sizes[ci] == 1:
            continue
        a = sums[i, ci] / (sizes[ci] - 1)
        denom = sizes - 1 if reduced_denominator else sizes
        others = [sums[i, c] / denom[c] for c in range(k) if c != ci]
        b = min(others)
        top = max(a, b)
        s[i] = 0.0 if top == 0 else (b - a) / top
    return float(np.mean([s[m].mean() for m in members]))


@dataclass(frozen=True, eq=False)
class Clustering:
    labels: np.ndarray
    k: int
    silhouette: float
    scenario_ids: tuple[str, ...] = ()
    # (k, score) for every evaluated level
    table: tuple[tuple[int, float], ...] = ()

    def to_json(self, extra: dict | None = None) -> str:
        doc = {
            "k": self.k,
            "silhouette": self.silhouette,
            "labels": {sid: int(l) for sid, l in zip(self.scenario_ids, self.labels)},
        }
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=1)

    def members(self, c: int) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.labels == c)]


def silhouette_table(dendro: Dendrogram, dm: DistanceMatrix,
                     reduced_denominator: bool = False) -> list[tuple[int, float]]:
    return [(k, silhouette_index(dm, dendro.cut(k), reduced_denominator))
            for k in range(2, dm.n)]


def select_clustering(dendro: Dendrogram, dm: DistanceMatrix,
                      reduced_denominator: bool = False) -> Clustering:
    """Cut with the largest silhouette over 2 <= k <= N-1; ties go to smaller k."""
    if dm.n < 3:
        raise ValidationError("need at least three scenarios to select a level")
    table = silhouette_table(dendro, dm, reduced_denominator)
    best_k, best_s = table[0]
    for k, s in table[1:]:
        if s > best_s:
            best_k, best_s = k, s
    return Clustering(dendro.cut(best_k), best_k, best_s, dm.scenario_ids, tuple(table))


def cluster_distributions(distributions: Sequence[EmpiricalDistribution],
                          cfg: SinkhornConfig = SinkhornConfig(),
                          metric_tag: str = EUCLIDEAN,
                          scenario_ids: Sequence[str] | None = None,
                          workers: int = 1) -> tuple[DistanceMatrix, Dendrogram, Clustering]:
    """Normalize, compute pairwise distances, agglomerate and pick a level."""
    dm = pairwise_distances(distributions, cfg, metric_tag, scenario_ids, workers=workers)
    dendro = agglomerate(dm)
    return dm, dendro, select_clustering(dendro, dm)


def adjusted_rand_index(labels_a: Sequence, labels_b: Sequence) -> float:
    """Hubert-Arabie adjusted Rand index from the contingency table.

    When the chance-corrected denominator vanishes (both partitions trivial)
    the result is 1 for identical partitions and 0 otherwise.
    """
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError("label vectors must have equal length")
    n = a.shape[0]
    if n == 0:
        raise ValidationError("empty labelings")
    # pair counts as Python ints so the single division below is correctly rounded
    pairs = Counter(zip(a.tolist(), b.tolist()))
    index = sum(c * (c - 1) for c in pairs.values()) // 2
    sum_a = sum(c * (c - 1) for c in Counter(a.tolist()).values()) // 2
    sum_b = sum(c * (c - 1) for c in Counter(b.tolist()).values()) // 2
    total = n * (n - 1) // 2
    num = 2 * (total * index - sum_a * sum_b)
    den = total * (sum_a + sum_b) - 2 * sum_a * sum_b
    if den == 0:
        return 1.0 if index == sum_a == sum_b else 0.0
    return num / den


# --- file formats ----------------------------------------------------------------

def write_distance_csv(path: str | Path, dm: DistanceMatrix, comment: str | None = None) -> None:
    with Path(path).open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + list(dm.scenario_ids))
        for sid, row in zip(dm.scenario_ids, dm.entries):
            w.writerow([sid] + [repr(float(x)) for x in row])


def read_distance_csv(path: str | Path) -> DistanceMatrix:
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    ids = rows[0][1:]
    return DistanceMatrix(np.array([[float(x) for x in r[1:]] for r in rows[1:]]), tuple(ids))


def write_silhouette_csv(path: str | Path, table: Sequence[tuple[int, float]],
                         comment: str | None = None) -> None:
    with Path(path).open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "silhouette"])
        for k, s in table:
            w.writerow([k, repr(float(s))])


def read_clustering_json(path: str | Path) -> tuple[dict[str, int], dict]:
    doc = json.loads(Path(path).read_text())
    return {k: int(v) for k, v in doc["labels"].items()}, doc
