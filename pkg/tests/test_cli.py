import json
from pathlib import Path

import pytest

from simclust import cli
from simclust.errors import NumericalError

STAFFS = ["--staffing", "22,9,8", "--staffing", "30,5,4", "--staffing", "10,12,3", "--staffing", "25,8,10"]


def run(*argv):
    return cli.main([str(a) for a in argv])


def tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and p.name != "manifest.json"}


@pytest.fixture(scope="module")
def simulated(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert run("simulate", "--universe", "explicit", *STAFFS, "--replications", 6,
               "--rng-mode", "crn", "--out", out, "--workers", 1) == 0
    return out


def test_simulate_outputs(simulated):
    files = sorted((simulated / "scenarios").glob("*.csv"))
    assert [f.stem for f in files] == ["0000_b22-p9-t8", "0001_b30-p5-t4", "0002_b10-p12-t3", "0003_b25-p8-t10"]
    lines = files[0].read_text().splitlines()
    assert lines[0].startswith("# manifest ") and lines[1] == "Y1,Y2,Y3,Y4,Y5"
    assert 1 <= len(lines) - 2 <= 6
    manifest = json.loads((simulated / "manifest.json").read_text())
    meta = json.loads((simulated / "metadata.json").read_text())
    assert meta["manifest_hash"] == lines[0].split()[-1]
    assert manifest["params"]["replications"] == 6 and "version" in manifest


def test_single_replication_rows(tmp_path):
    assert run("simulate", "--universe", "explicit", "--staffing", "22,9,8", "--replications", 1,
               "--out", tmp_path) == 0
    (csv_file,) = (tmp_path / "scenarios").glob("*.csv")
    assert len(csv_file.read_text().splitlines()) == 3


def test_pipeline_is_byte_identical_across_workers(simulated, tmp_path):
    trees = []
    for workers in (1, 3):
        out = tmp_path / f"w{workers}"
        assert run("simulate", "--universe", "explicit", *STAFFS, "--replications", 6, "--rng-mode", "crn",
                   "--out", out / "sim", "--workers", workers) == 0
        assert run("cluster", "--input", simulated / "scenarios", "--out", out / "cl", "--workers", workers,
                   "--lam", 0.05) == 0
        # input paths are part of the manifest, so both runs read the same clustering file
        assert run("barycenter", "--clustering", tmp_path / "w1" / "cl" / "clustering.json", "--input",
                   simulated / "scenarios", "--out", out / "bc", "--workers", workers, "--lam", 0.05,
                   "--max-outer-iterations", 5) == 0
        trees.append(tree(out))
    assert trees[0].keys() == trees[1].keys()
    for name in trees[0]:
        assert trees[0][name] == trees[1][name], name
    assert {"cl/distances.csv", "cl/dendrogram.json", "cl/clustering.json", "cl/silhouette.csv",
            "bc/barycenters.json"} <= set(trees[0])


def test_cluster_requires_three_scenarios(tmp_path):
    assert run("simulate", "--universe", "explicit", "--staffing", "22,9,8", "--staffing", "30,5,4",
               "--replications", 3, "--out", tmp_path / "s") == 0
    assert run("cluster", "--input", tmp_path / "s" / "scenarios", "--out", tmp_path / "c") == 2


def test_identical_scenarios_merge_first(tmp_path):
    assert run("simulate", "--universe", "explicit", "--staffing", "22,9,8", "--staffing", "22,9,8",
               "--staffing", "5,1,1", "--replications", 5, "--rng-mode", "crn", "--out", tmp_path / "s") == 0
    assert run("cluster", "--input", tmp_path / "s" / "scenarios", "--out", tmp_path / "c") == 0
    merges = json.loads((tmp_path / "c" / "dendrogram.json").read_text())["merges"]
    assert {merges[0]["left"], merges[0]["right"]} == {0, 1}


def test_forced_cluster_count(simulated, tmp_path):
    assert run("cluster", "--input", simulated / "scenarios", "--out", tmp_path, "--clusters", 3) == 0
    assert json.loads((tmp_path / "clustering.json").read_text())["k"] == 3


def test_missing_input_is_validation_error(tmp_path, capsys):
    assert run("cluster", "--input", tmp_path / "nope", "--out", tmp_path / "o", "--error-json") == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2 and "not a directory" in err["message"]
    assert run("cluster", "--out", tmp_path / "o") == 2


def test_numerical_failure_exit_code(simulated, tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise NumericalError("regularization too small for cost scale")

    monkeypatch.setattr(cli, "pairwise_distances", boom)
    assert run("cluster", "--input", simulated / "scenarios", "--out", tmp_path, "--error-json") == 3
    assert json.loads(capsys.readouterr().err)["error"] == "NumericalError"


def test_manifest_overrides_flags(tmp_path):
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"experiment": "simulate",
                                    "params": {"replications": 2, "universe": "explicit",
                                               "staffings": [[22, 9, 8]]}}))
    assert run("simulate", "--manifest", manifest, "--replications", 9, "--out", tmp_path / "o") == 0
    (f,) = (tmp_path / "o" / "scenarios").glob("*.csv")
    assert len(f.read_text().splitlines()) <= 4
    manifest.write_text(json.dumps({"experiment": "simulate", "params": {"replicationz": 2}}))
    assert run("simulate", "--manifest", manifest, "--out", tmp_path / "o2") == 2
    manifest.write_text(json.dumps({"experiment": "cluster", "params": {}}))
    assert run("simulate", "--manifest", manifest, "--out", tmp_path / "o3") == 2
    manifest.write_text("{not json")
    assert run("simulate", "--manifest", manifest, "--out", tmp_path / "o4") == 2


def test_equal_manifests_share_hash(tmp_path):
    for name in ("a", "b"):
        assert run("simulate", "--universe", "explicit", "--staffing", "22,9,8", "--replications", 2,
                   "--out", tmp_path / name) == 0
    ha = json.loads((tmp_path / "a" / "metadata.json").read_text())["manifest_hash"]
    hb = json.loads((tmp_path / "b" / "metadata.json").read_text())["manifest_hash"]
    assert ha == hb
    assert tree(tmp_path / "a") == tree(tmp_path / "b")


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    assert run("simulate", "--universe", "explicit", "--staffing", "22,9,8", "--replications", 1) == 0
    assert (tmp_path / "env" / "manifest.json").exists()


def test_monitor_build_and_classify(tmp_path):
    assert run("monitor", "build", "--days", 200, "--min-count", 3, "--out", tmp_path / "lib",
               "--max-outer-iterations", 2, "--clusters", 3) == 0
    lib = json.loads((tmp_path / "lib" / "library.json").read_text())
    assert lib["ranking"] == ["good", "moderate", "bad"]
    assert len(lib["states"]) == len(lib["labels"]) >= 3
    assert run("monitor", "classify", "--library", tmp_path / "lib" / "library.json", "--staffing", "22,9,8",
               "--day", 7, "--out", tmp_path / "cls") == 0
    rows = (tmp_path / "cls" / "timeline.csv").read_text().splitlines()
    assert rows[1].startswith("minute,verdict,closing_soon") and len(rows) == 2 + 48
    assert run("monitor", "classify", "--library", tmp_path / "missing.json", "--out", tmp_path / "x") == 2


def test_crn_small(tmp_path):
    assert run("crn", "--replications", 5, "--macroreps", 3, "--ari-scenarios", 4,
               "--truth-replications", 20, "--small-replications", 5, "--ari-macroreps", 2,
               "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "crn_variance.json").read_text())
    assert rep["pair"] == [[23, 9, 27], [28, 7, 14]]
    assert set(rep["variances"]) == {"independent", "crn"}
    summary = json.loads((tmp_path / "ari_summary.json").read_text())
    assert summary["crn"]["n"] == 2


def test_bench_smoke(tmp_path):
    assert run("bench", "--suite", "distance-scaling", "--sizes", "10", "--repeats", 1, "--out", tmp_path) == 0
    rows = (tmp_path / "timings.csv").read_text().splitlines()
    assert rows[1] == "suite,method,n,support,seconds,note"
    assert all(float(r.split(",")[4]) < 1.0 for r in rows[2:])
