"""Command-line entry point: simulate, cluster, barycenter, monitor, crn, bench."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .artifacts import RunManifest, dump_json, load_manifest, provenance, write_json
from .barycenter import BarycenterConfig, write_barycenter_csv, write_density_csv
from .bench import (
    TIMING_HEADER, backend_timings, clustering_vs_kmeans, distance_scaling,
)
from .clustering import (
    Clustering, DistanceMatrix, agglomerate, pairwise_distances, read_clustering_json,
    select_clustering, silhouette_index, silhouette_table, write_distance_csv, write_silhouette_csv,
)
from .distributions import (
    METRICS, EUCLIDEAN, SQUARED_EUCLIDEAN, normalize_all, read_distribution_csv, write_samples_csv,
)
from .errors import NumericalError, SimclustError, ValidationError
from .monitoring import (
    OBS_NAMES, LabeledStateLibrary, build_state_scenarios, collect_states, day_trace,
    label_library, monitor_timeline, read_trace_csv, write_timeline_csv,
)
from .parallel import default_workers
from .simulation import (
    KPI_NAMES, RNG_MODES, CallCenterConfig, RngPolicy, Staffing, crn_distance_study,
    enumerate_budget, enumerate_fixed_total, run_scenario_samples, uniform_subset,
)
from .studies import cluster_barycenters, crn_ari_study
from .transport import SinkhornConfig

log = logging.getLogger("simclust")

OUTPUT_ENV = "SIMCLUST_OUTPUT_DIR"
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _staffing(text: str) -> list[int]:
    try:
        parts = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected basic,premium,technical integers, got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three counts, got {text!r}")
    return parts


def _triple(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
    return [float(x) for x in parts]


def _caps(text: str) -> list[int | None]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("caps take basic,premium,technical (use '-' for none)")
    return [None if p.strip() in ("", "-", "none") else int(p) for p in parts]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


# --- shared pieces -----------------------------------------------------------------

def _sinkhorn_cfg(p: dict) -> SinkhornConfig:
    return SinkhornConfig(lam=p["lam"], max_iterations=p["max_iterations"], tolerance=p["tolerance"])


def _sim_cfg(p: dict) -> CallCenterConfig:
    return CallCenterConfig.from_dict(p.get("call_center") or {})


def _read_scenarios(input_dir: str | Path) -> tuple[list[str], list[str], list]:
    """Every ``*.csv`` under ``input_dir`` in name order."""
    d = Path(input_dir)
    if not d.is_dir():
        raise ValidationError(f"{d}: not a directory")
    files = sorted(d.glob("*.csv"))
    names = None
    dists = []
    for f in files:
        cols, dist = read_distribution_csv(f)
        if names is None:
            names = cols
        elif cols != names:
            raise ValidationError(f"{f}: columns {cols} differ from {names}")
        dists.append(dist)
    return [f.stem for f in files], names or [], dists


def _mkdir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"{path}: cannot create directory ({exc.strerror})") from exc
    return path


def _cluster_artifacts(out: Path, dm: DistanceMatrix, manifest: RunManifest,
                       reduced_denominator: bool, forced_k: int | None = None):
    dendro = agglomerate(dm)
    if forced_k:
        table = silhouette_table(dendro, dm, reduced_denominator)
        labels = dendro.cut(forced_k)
        clustering = Clustering(labels, forced_k, silhouette_index(dm, labels, reduced_denominator),
                                dm.scenario_ids, tuple(table))
    else:
        clustering = select_clustering(dendro, dm, reduced_denominator)
    tag = provenance(manifest)
    write_distance_csv(out / "distances.csv", dm, tag)
    write_json(out / "dendrogram.json",
               {"leaf_ids": list(dendro.leaf_ids), "merges": dendro.records()}, manifest)
    write_json(out / "clustering.json", {
        "k": clustering.k,
        "silhouette": clustering.silhouette,
        "labels": {sid: int(l) for sid, l in zip(dm.scenario_ids, clustering.labels)},
        "scenario_ids": list(dm.scenario_ids),
    }, manifest)
    write_silhouette_csv(out / "silhouette.csv", clustering.table, tag)
    return dendro, clustering


# --- commands -------------------------------------------------------------------

def run_simulate(p: dict, out: Path, workers: int, manifest: RunManifest) -> list[Path]:
    cfg = _sim_cfg(p)
    kind = p["universe"]
    if kind == "fixed-total":
        universe = enumerate_fixed_total(p["total"])
    elif kind == "budget":
        b, pr, t = p["costs"]
        universe = enumerate_budget((b, pr, t), tuple(p["budget"]), tuple(p["caps"]))
    elif kind == "explicit":
        if not p["staffings"]:
            raise ValidationError("explicit universe needs at least one --staffing")
        universe = [Staffing(*s) for s in p["staffings"]]
    else:
        raise ValidationError(f"unknown universe {kind!r}")
    staffings = uniform_subset(universe, p["subset"], p["seed"]) if p["subset"] else universe
    samples = run_scenario_samples(cfg, staffings, p["replications"], p["rng_mode"], p["seed"], workers)
    sdir = _mkdir(out / "scenarios")
    tag = provenance(manifest)
    ids = []
    for i, (s, x) in enumerate(zip(staffings, samples)):
        sid = f"{i:04d}_{s}"
        ids.append(sid)
        write_samples_csv(sdir / f"{sid}.csv", KPI_NAMES, x, tag)
    meta = {
        "version": __version__,
        "seed": p["seed"],
        "rng_mode": p["rng_mode"],
        "replications": p["replications"],
        "universe_size": len(universe),
        "call_center": cfg.to_dict(),
        "scenarios": {sid: list(s.as_tuple()) for sid, s in zip(ids, staffings)},
        "staffing_order": ["basic", "premium", "technical"],
    }
    write_json(out / "metadata.json", meta, manifest)
    log.info("wrote %d scenario files to %s", len(ids), sdir)
    return [sdir]


def run_cluster(p: dict, out: Path, workers: int, manifest: RunManifest) -> list[Path]:
    ids, _, dists = _read_scenarios(p["input"])
    if len(dists) < 3:
        raise ValidationError(f"{p['input']}: need at least 3 scenario files, found {len(dists)}")
    dm = pairwise_distances(dists, _sinkhorn_cfg(p), p["metric"], ids, workers=workers)
    _, clustering = _cluster_artifacts(out, dm, manifest, p["reduced_denominator"], p.get("clusters"))
    log.info("selected k=%d (silhouette %.4f)", clustering.k, clustering.silhouette)
    return [out / "clustering.json"]


def _barycenter_cfg(p: dict) -> BarycenterConfig:
    return BarycenterConfig(support_size=p["support_size"], lam=p["lam"], theta=p["theta"], t0=p["t0"],
                            max_outer_iterations=p["max_outer_iterations"], metric_tag=p["metric"],
                            seed=p["seed"])


def _write_barycenters(out: Path, ids, names, dists, labels, bcfg, workers, manifest, grid_points):
    bary, means = cluster_barycenters(dists, labels, bcfg, workers)
    _, params = normalize_all(dists)
    tag = provenance(manifest)
    summary = {}
    for c, b in bary.items():
        members = [ids[i] for i in np.flatnonzero(np.asarray(labels) == c)]
        if b is None:
            log.info("cluster %d has one member (%s); passing it through", c, members[0])
            raw = dists[ids.index(members[0])]
            meta = {"single_member": True}
        else:
            raw = params.invert(b.distribution)
            meta = b.metadata()
        write_barycenter_csv(out / f"barycenter_{c}.csv", raw, names, tag)
        write_density_csv(out / f"density_{c}.csv", raw, names, tag, grid_points)
        meta.update({"cluster": c, "members": members, "kpi_means": means[c].tolist()})
        write_json(out / f"barycenter_{c}.json", meta, manifest)
        summary[str(c)] = {"members": members, "kpi_means": means[c].tolist()}
    return summary, means


def run_barycenter(p: dict, out: Path, workers: int, manifest: RunManifest) -> list[Path]:
    labels_by_id, _ = read_clustering_json(p["clustering"])
    ids, names, dists = _read_scenarios(p["input"])
    missing = set(labels_by_id) - set(ids)
    if missing:
        raise ValidationError(f"scenarios in clustering but not in {p['input']}: {sorted(missing)[:5]}")
    keep = [i for i, s in enumerate(ids) if s in labels_by_id]
    ids = [ids[i] for i in keep]
    dists = [dists[i] for i in keep]
    labels = [labels_by_id[s] for s in ids]
    summary, _ = _write_barycenters(out, ids, names, dists, labels, _barycenter_cfg(p), workers,
                                    manifest, p["grid_points"])
    write_json(out / "barycenters.json", {"clusters": summary, "kpi_names": names}, manifest)
    return [out / "barycenters.json"]


def run_monitor_build(p: dict, out: Path, workers: int, manifest: RunManifest) -> list[Path]:
    cfg = _sim_cfg(p)
    staffing = Staffing(*p["staffing"])
    records = collect_states(cfg, staffing, p["days"], p["seed"], workers)
    scenarios = build_state_scenarios(records, p["min_count"])
    log.info("%d records, %d states seen at least %d times", len(records), len(scenarios), p["min_count"])
    tag = provenance(manifest)
    with (out / "states.csv").open("w", newline="") as fh:
        fh.write(f"# {tag}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", "count"])
        for s in scenarios:
            w.writerow([s.scenario_id, s.count])
    ids = [s.scenario_id for s in scenarios]
    dists = [s.distribution() for s in scenarios]
    if len(dists) < 3:
        raise ValidationError(f"only {len(dists)} states qualify; simulate more days")
    dm = pairwise_distances(dists, _sinkhorn_cfg(p), EUCLIDEAN, ids, workers=workers)
    _, clustering = _cluster_artifacts(out, dm, manifest, False, p.get("clusters"))
    bdir = _mkdir(out / "barycenters")
    _, means = _write_barycenters(bdir, ids, list(OBS_NAMES), dists, clustering.labels,
                                  _barycenter_cfg(p), workers, manifest, p["grid_points"])
    churn = {c: float(m[OBS_NAMES.index("churn")]) for c, m in means.items()}
    library = label_library(scenarios, clustering.labels, churn, p["normalize_knn"])
    doc = json.loads(library.to_json())
    doc["cluster_churn"] = {str(c): v for c, v in churn.items()}
    doc["staffing"] = list(staffing.as_tuple())
    write_json(out / "library.json", doc, manifest)
    return [out / "library.json"]


def run_monitor_classify(p: dict, out: Path, workers: int, manifest: RunManifest) -> list[Path]:
    try:
        library = LabeledStateLibrary.from_json(Path(p["library"]).read_text())
    except OSError as exc:
        raise ValidationError(f"{p['library']}: cannot read library ({exc.strerror})") from exc
    if p["trace"]:
        trace = read_trace_csv(p["trace"])
    else:
        if not p["staffing"]:
            raise ValidationError("give --trace or --staffing to simulate a day")
        trace = day_trace(_sim_cfg(p), Staffing(*p["staffing"]),
                          RngPolicy(seed=p["seed"], replication_index=p["day"]), p["interval"])
    cfg = _sim_cfg(p)
    rows = monitor_timeline(trace, library, p["k"], cfg.close)
    write_timeline_csv(out / "timeline.csv", rows, provenance(manifest))
    return [out / "timeline.csv"]


def run_crn(p: dict, out: Path, workers: int, manifest: RunManifest) -> list[Path]:
    cfg = _sim_cfg(p)
    scfg = _sinkhorn_cfg(p)
    pair = tuple(Staffing(*s) for s in p["pair"])
    if len(pair) != 2:
        raise ValidationError("the variance study needs exactly two staffings")
    rep = crn_distance_study(cfg, pair, p["replications"], p["macroreps"], scfg, p["seed"], workers)
    doc = rep.to_dict()
    doc["pair"] = [list(s.as_tuple()) for s in pair]
    write_json(out / "crn_variance.json", doc, manifest)
    written = [out / "crn_variance.json"]
    if p["ari_scenarios"]:
        staffings = uniform_subset(enumerate_fixed_total(p["total"]), p["ari_scenarios"], p["seed"])
        study = crn_ari_study(cfg, staffings, p["truth_replications"], p["small_replications"],
                              p["ari_macroreps"], scfg, p["seed"], workers)
        with (out / "ari_study.csv").open("w", newline="") as fh:
            fh.write(f"# {provenance(manifest)}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["mode", "macroreplication", "ari", "k"])
            for mode, m, ari, k in study.rows:
                w.writerow([mode, m, repr(float(ari)), k])
        summary = study.summary()
        summary["staffings"] = [list(s.as_tuple()) for s in staffings]
        write_json(out / "ari_summary.json", summary, manifest)
        written += [out / "ari_study.csv", out / "ari_summary.json"]
    return written


def run_bench(p: dict, out: Path, workers: int, manifest: RunManifest) -> list[Path]:
    suites = ["distance-scaling", "clustering-vs-kmeans", "backends"] if p["suite"] == "all" else [p["suite"]]
    rows = []
    for suite in suites:
        if suite == "distance-scaling":
            rows += distance_scaling(p["sizes"], repeats=p["repeats"],
                                     cfg=SinkhornConfig(lam=p["lam"]), seed=p["seed"])
        elif suite == "clustering-vs-kmeans":
            rows += clustering_vs_kmeans(p["ns"], p["support"], cfg=SinkhornConfig(lam=p["lam"]),
                                         seed=p["seed"], supports=p["supports"])
        else:
            rows += backend_timings(p["repeats"], p["seed"])
    with (out / "timings.csv").open("w", newline="") as fh:
        fh.write(f"# {provenance(manifest)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_HEADER)
        for r in rows:
            w.writerow(r.row())
    return [out / "timings.csv"]


# --- parser ---------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--out", dest="output_dir", default=None,
                    help=f"output directory (default ${OUTPUT_ENV} or ./simclust-out)")
    sp.add_argument("--workers", type=int, default=None, help="worker threads (default: all cores)")
    sp.add_argument("--manifest", default=None, help="JSON manifest; its params override flags")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--error-json", action="store_true", help="print errors as JSON on stderr")
    sp.add_argument("-v", "--verbose", action="store_true")


def _add_sinkhorn(sp: argparse.ArgumentParser, lam: float = 0.01) -> None:
    sp.add_argument("--lam", type=float, default=lam, help="entropic regularization (normalized units)")
    sp.add_argument("--max-iterations", type=int, default=10_000)
    sp.add_argument("--tolerance", type=float, default=1e-7)


def _add_barycenter(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--support-size", type=int, default=None, help="default: median member size")
    sp.add_argument("--theta", type=float, default=1.0)
    sp.add_argument("--t0", type=float, default=1.0)
    sp.add_argument("--max-outer-iterations", type=int, default=50)
    sp.add_argument("--grid-points", type=int, default=512)


def _add_call_center(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--arrival-rate", type=float, default=None, help="customers per hour")
    sp.add_argument("--open-hours", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="simclust", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="simulate staffing scenarios to CSV")
    _add_common(sp)
    _add_call_center(sp)
    sp.add_argument("--universe", choices=["fixed-total", "budget", "explicit"], default="fixed-total")
    sp.add_argument("--total", type=int, default=49)
    sp.add_argument("--costs", type=_triple, default=[1.0, 4.0, 1.0], help="basic,premium,technical")
    sp.add_argument("--budget", type=float, nargs=2, default=[50.0, 55.0], metavar=("LO", "HI"))
    sp.add_argument("--caps", type=_caps, default=[None, None, None], help="basic,premium,technical")
    sp.add_argument("--staffing", dest="staffings", type=_staffing, action="append", default=[],
                    help="basic,premium,technical (repeatable; explicit universe)")
    sp.add_argument("--subset", type=int, default=None, help="maximin subset size")
    sp.add_argument("--replications", type=int, default=40)
    sp.add_argument("--rng-mode", choices=RNG_MODES, default="independent")
    sp.set_defaults(func=run_simulate)

    sp = sub.add_parser("cluster", help="cluster scenario distributions")
    _add_common(sp)
    _add_sinkhorn(sp)
    sp.add_argument("--input", required=False, default=None, help="directory of scenario CSVs")
    sp.add_argument("--metric", choices=METRICS, default=EUCLIDEAN)
    sp.add_argument("--reduced-denominator", action="store_true",
                    help="divide the between-cluster sum by |C'|-1")
    sp.add_argument("--clusters", type=int, default=None, help="force k instead of the silhouette pick")
    sp.set_defaults(func=run_cluster)

    sp = sub.add_parser("barycenter", help="barycenter and density grids per cluster")
    _add_common(sp)
    _add_sinkhorn(sp)
    _add_barycenter(sp)
    sp.add_argument("--clustering", default=None, help="clustering.json from 'cluster'")
    sp.add_argument("--input", default=None, help="directory of scenario CSVs")
    sp.add_argument("--metric", choices=METRICS, default=SQUARED_EUCLIDEAN)
    sp.set_defaults(func=run_barycenter)

    mon = sub.add_parser("monitor", help="queue-state monitoring")
    msub = mon.add_subparsers(dest="monitor_command", required=True)
    sp = msub.add_parser("build", help="simulate, cluster states and write a labeled library")
    _add_common(sp)
    _add_call_center(sp)
    _add_sinkhorn(sp)
    _add_barycenter(sp)
    sp.add_argument("--staffing", type=_staffing, default=[22, 9, 8], help="basic,premium,technical")
    sp.add_argument("--days", type=int, default=5000)
    sp.add_argument("--min-count", type=int, default=10)
    sp.add_argument("--clusters", type=int, default=None, help="force k instead of the silhouette pick")
    sp.add_argument("--normalize-knn", action="store_true", help="scale queue lengths before k-NN")
    sp.add_argument("--metric", choices=METRICS, default=SQUARED_EUCLIDEAN, help="barycenter cost")
    sp.set_defaults(func=run_monitor_build, experiment="monitor-build")
    sp = msub.add_parser("classify", help="classify a day's queue states")
    _add_common(sp)
    _add_call_center(sp)
    sp.add_argument("--library", default=None, help="library.json from 'monitor build'")
    sp.add_argument("--trace", default=None, help="CSV with minute and the four queue lengths")
    sp.add_argument("--staffing", type=_staffing, default=None, help="simulate a day instead of --trace")
    sp.add_argument("--day", type=int, default=0, help="replication index of the simulated day")
    sp.add_argument("--interval", type=float, default=10.0, help="snapshot spacing in minutes")
    sp.add_argument("--k", type=int, default=2)
    sp.set_defaults(func=run_monitor_classify, experiment="monitor-classify")

    sp = sub.add_parser("crn", help="common-random-numbers variance and ARI study")
    _add_common(sp)
    _add_call_center(sp)
    _add_sinkhorn(sp)
    sp.add_argument("--pair", type=_staffing, action="append", default=None,
                    help="basic,premium,technical; give twice (default 23,9,27 and 28,7,14)")
    sp.add_argument("--replications", type=int, default=40)
    sp.add_argument("--macroreps", type=int, default=30)
    sp.add_argument("--ari-scenarios", type=int, default=20, help="0 skips the ARI study")
    sp.add_argument("--total", type=int, default=49)
    sp.add_argument("--truth-replications", type=int, default=500)
    sp.add_argument("--small-replications", type=int, default=15)
    sp.add_argument("--ari-macroreps", type=int, default=30)
    sp.set_defaults(func=run_crn)

    sp = sub.add_parser("bench", help="timing suites")
    _add_common(sp)
    sp.add_argument("--suite", choices=["distance-scaling", "clustering-vs-kmeans", "backends", "all"],
                    default="all")
    sp.add_argument("--sizes", type=_ints, default=[10, 25, 50, 100, 200, 400, 800])
    sp.add_argument("--ns", type=_ints, default=[10, 20, 40, 60, 80, 100])
    sp.add_argument("--support", type=int, default=20)
    sp.add_argument("--supports", type=_ints, default=[], help="support-size grid at N=20")
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("--lam", type=float, default=0.01)
    sp.set_defaults(func=run_bench)
    return ap


_REQUIRED = {
    "cluster": ("input",),
    "barycenter": ("clustering", "input"),
    "monitor-classify": ("library",),
}


def _params(args: argparse.Namespace) -> dict:
    skip = {"output_dir", "workers", "manifest", "error_json", "func", "command", "verbose",
            "monitor_command", "experiment", "open_hours", "arrival_rate"}
    p = {k: v for k, v in vars(args).items() if k not in skip}
    cc = {}
    if getattr(args, "arrival_rate", None) is not None:
        cc["arrival_rate"] = args.arrival_rate
    if getattr(args, "open_hours", None) is not None:
        cc["open_duration"] = args.open_hours
    if hasattr(args, "arrival_rate"):
        p["call_center"] = CallCenterConfig.from_dict(cc).to_dict()
    if args.command == "crn" and not p.get("pair"):
        p["pair"] = [[23, 9, 27], [28, 7, 14]]
    return p


def _resolve(args: argparse.Namespace) -> tuple[Callable, dict, Path, int, RunManifest]:
    experiment = getattr(args, "experiment", None) or args.command
    params = _params(args)
    out = args.output_dir
    if args.manifest:
        doc = load_manifest(args.manifest)
        if doc.get("experiment", experiment) != experiment:
            raise ValidationError(
                f"manifest is for {doc['experiment']!r}, not {experiment!r}")
        unknown = set(doc.get("params", {})) - set(params)
        if unknown:
            raise ValidationError(f"unknown manifest params: {sorted(unknown)}")
        params.update(doc.get("params", {}))
        out = out or doc.get("output_dir")
    for key in _REQUIRED.get(experiment, ()):
        if not params.get(key):
            raise ValidationError(f"--{key.replace('_', '-')} is required")
    out_dir = Path(out or os.environ.get(OUTPUT_ENV) or "simclust-out")
    workers = args.workers or default_workers()
    if workers < 1:
        raise ValidationError("--workers must be at least 1")
    return args.func, params, out_dir, workers, RunManifest(experiment, params, str(out_dir))


def _fail(args, exc: Exception, code: int) -> int:
    if getattr(args, "error_json", False):
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                     "exit_code": code}) + "\n")
    else:
        sys.stderr.write(f"simclust: error: {exc}\n")
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        func, params, out, workers, manifest = _resolve(args)
        _mkdir(out)
        written = func(params, out, workers, manifest)
        doc = manifest.to_dict()
        doc["version"] = __version__
        (out / "manifest.json").write_text(dump_json(doc))
    except NumericalError as exc:
        return _fail(args, exc, EXIT_NUMERICAL)
    except (ValidationError, SimclustError) as exc:
        return _fail(args, exc, EXIT_VALIDATION)
    except OSError as exc:
        where = f"{exc.filename}: " if exc.filename else ""
        return _fail(args, ValidationError(f"{where}{exc.strerror or exc}"), EXIT_VALIDATION)
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
