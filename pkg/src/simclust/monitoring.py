"""Queue-state conditioned output distributions and nearest-neighbor state labeling."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .distributions import EmpiricalDistribution
from .errors import ValidationError
from .parallel import parallel_map
from .simulation import (
    INDEPENDENT, CallCenterConfig, RngPolicy, Staffing, simulate_day,
)

STATE_NAMES = ("regular_initial", "premium_initial", "regular_technical", "premium_technical")
OBS_NAMES = ("utilization", "max_tech_wait", "churn")
QUALITY_NAMES = {1: ("good",), 2: ("good", "bad"), 3: ("good", "moderate", "bad")}


def quality_names(k: int) -> tuple[str, ...]:
    return QUALITY_NAMES.get(k, tuple(f"rank{i + 1}" for i in range(k)))


@dataclass(frozen=True, eq=False)
class StateRecords:
    """Hourly snapshots: ``states`` is ``(n, 4)`` int, ``observations`` is ``(n, 3)``."""

    states: np.ndarray
    observations: np.ndarray

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass(frozen=True, eq=False)
class StateScenario:
    state: tuple[int, int, int, int]
    observations: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return self.observations.shape[0]

    def distribution(self) -> EmpiricalDistribution:
        return EmpiricalDistribution.from_samples(self.observations)

    @property
    def scenario_id(self) -> str:
        return "s" + "-".join(str(x) for x in self.state)


def hourly_records(out, n_hours: int) -> tuple[np.ndarray, np.ndarray]:
    """States at each hour mark and the three KPIs over the following hour."""
    step = int(round(60.0 / out.snapshot_interval))
    states = out.states[::step][:n_hours]
    h = out.hourly[:n_hours]
    obs = np.column_stack([
        # summed busy intervals can overshoot a full hour by rounding
        np.minimum(h[:, 0] / (out.n_operators * 60.0), 1.0),
        h[:, 1] + h[:, 2],
        h[:, 3],
    ])
    return states, obs


def collect_states(cfg: CallCenterConfig, staffing: Staffing, n_days: int, seed: int = 0,
                   workers: int = 1, first_day: int = 0) -> StateRecords:
    """Simulate ``n_days`` and record every open-hour snapshot with its next-hour KPIs."""
    if n_days < 1:
        raise ValidationError("need at least one day")
    n_hours = int(round(cfg.open_duration))

    def one(day):
        return hourly_records(simulate_day(cfg, staffing, RngPolicy(INDEPENDENT, seed, day)), n_hours)

    rows = parallel_map(one, range(first_day, first_day + n_days), workers)
    return StateRecords(np.vstack([r[0] for r in rows]).astype(np.int64),
                        np.vstack([r[1] for r in rows]))


def build_state_scenarios(records: StateRecords, min_count: int = 10) -> list[StateScenario]:
    """Group records by exact state; keep states seen at least ``min_count`` times."""
    if len(records) == 0:
        raise ValidationError("no records")
    uniq, inverse, counts = np.unique(records.states, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    out = [StateScenario(tuple(int(x) for x in uniq[g]), records.observations[inverse == g])
           for g in range(len(uniq)) if counts[g] >= min_count]
    if not out:
        raise ValidationError(
            f"no state observed {min_count} or more times; simulate more days")
    return out


@dataclass(frozen=True, eq=False)
class LabeledStateLibrary:
    """Reference states with quality labels; ``ranking`` lists labels best first."""

    states: np.ndarray
    labels: tuple[str, ...]
    ranking: tuple[str, ...]
    normalize: bool = False

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=np.float64).reshape(-1, 4)
        labels = tuple(str(x) for x in self.labels)
        if states.shape[0] == 0:
            raise ValidationError("empty library")
        if len(labels) != states.shape[0]:
            raise ValidationError("one label per library state required")
        unknown = set(labels) - set(self.ranking)
        if unknown:
            raise ValidationError(f"labels missing from ranking: {sorted(unknown)}")
        # duplicate (state, label) entries carry no information
        seen = {}
        for s, l in zip(map(tuple, states), labels):
            seen.setdefault((s, l), None)
        keys = sorted(seen, key=lambda x: (x[0], self.ranking.index(x[1])))
        object.__setattr__(self, "states", np.array([k[0] for k in keys]).reshape(-1, 4))
        object.__setattr__(self, "labels", tuple(k[1] for k in keys))
        object.__setattr__(self, "ranking", tuple(self.ranking))

    def __len__(self) -> int:
        return len(self.labels)

    def scale(self) -> np.ndarray:
        if not self.normalize:
            return np.ones(4)
        sd = self.states.std(axis=0)
        return np.where(sd > 0, sd, 1.0)

    def to_json(self, extra: dict | None = None) -> str:
        doc = {
            "states": self.states.astype(int).tolist(),
            "labels": list(self.labels),
            "ranking": list(self.ranking),
            "normalize": self.normalize,
        }
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "LabeledStateLibrary":
        doc = json.loads(text)
        return cls(np.array(doc["states"]), tuple(doc["labels"]), tuple(doc["ranking"]),
                   bool(doc.get("normalize", False)))


def label_library(scenarios: Sequence[StateScenario], cluster_labels: Sequence[int],
                  cluster_scores: dict[int, float], normalize: bool = False) -> LabeledStateLibrary:
    """Name clusters by ascending score (lower is better) and label each state."""
    order = sorted(cluster_scores, key=lambda c: (cluster_scores[c], c))
    names = quality_names(len(order))
    name_of = {c: names[i] for i, c in enumerate(order)}
    return LabeledStateLibrary(np.array([s.state for s in scenarios]),
                               tuple(name_of[int(c)] for c in cluster_labels), names, normalize)


@dataclass(frozen=True)
class Verdict:
    labels: tuple[str, ...]

    @property
    def is_transition(self) -> bool:
        return len(self.labels) > 1

    @property
    def label(self) -> str:
        return self.labels[0]

    def __str__(self) -> str:
        return f"transition({'|'.join(self.labels)})" if self.is_transition else self.labels[0]


def knn_classify(state: Sequence[float], library: LabeledStateLibrary, k: int = 2) -> Verdict:
    """Label of the ``k`` nearest library states, or a transition if they disagree.

    Ties in distance are resolved by lexicographic state order, then label rank.
    """
    if not 1 <= k <= len(library):
        raise ValidationError(f"k must be in [1, {len(library)}]")
    x = np.asarray(state, dtype=np.float64).ravel()
    if x.shape != (4,):
        raise ValidationError("state must have 4 queue lengths")
    scale = library.scale()
    d = np.sqrt((((library.states - x) / scale) ** 2).sum(axis=1))
    # library is already sorted by (state, rank); a stable sort on distance keeps that order
    nearest = np.argsort(d, kind="stable")[:k]
    found = {library.labels[i] for i in nearest}
    return Verdict(tuple(l for l in library.ranking if l in found))


@dataclass(frozen=True)
class TimelineRow:
    minute: float
    state: tuple[int, ...]
    verdict: Verdict
    closing_soon: bool


def day_trace(cfg: CallCenterConfig, staffing: Staffing, rng: RngPolicy,
              interval: float = 10.0) -> list[tuple[float, tuple[int, ...]]]:
    """Queue-length snapshots of one simulated day every ``interval`` minutes."""
    out = simulate_day(cfg, staffing, rng, snapshot_interval=interval)
    return [(i * interval, tuple(int(v) for v in s)) for i, s in enumerate(out.states)]


def monitor_timeline(trace: Sequence[tuple[float, Sequence[int]]], library: LabeledStateLibrary,
                     k: int = 2, close: float = 480.0, horizon: float = 60.0) -> list[TimelineRow]:
    """Classify each snapshot; flag those within ``horizon`` minutes of closing."""
    times = [t for t, _ in trace]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValidationError("trace must be sorted by time")
    return [TimelineRow(float(t), tuple(int(v) for v in s), knn_classify(s, library, k),
                        close - horizon <= t < close)
            for t, s in trace]


def write_timeline_csv(path: str | Path, rows: Sequence[TimelineRow], comment: str | None = None) -> None:
    with Path(path).open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["minute", "verdict", "closing_soon"] + list(STATE_NAMES))
        for r in rows:
            w.writerow([repr(r.minute), str(r.verdict), int(r.closing_soon)] + list(r.state))


def read_trace_csv(path: str | Path) -> list[tuple[float, tuple[int, ...]]]:
    """``minute`` plus the four queue-length columns."""
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.DictReader(row for row in fh if not row.startswith("#"))]
    try:
        return [(float(r["minute"]), tuple(int(r[n]) for n in STATE_NAMES)) for r in rows]
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"{path}: bad trace file ({exc})") from exc


def write_trace_csv(path: str | Path, trace: Sequence[tuple[float, Sequence[int]]]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["minute"] + list(STATE_NAMES))
        for t, s in trace:
            w.writerow([repr(float(t))] + [int(v) for v in s])
