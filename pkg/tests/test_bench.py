"""Experiment harness: trial seeding, summaries, reports, and the CLI."""

import json

import numpy as np
import pytest

from cutseek import (
    ExperimentRecord,
    FeatureDataset,
    LabelSignal,
    LaplacianModel,
    SpectralConfig,
    TrialSummary,
    WeightedGraph,
    build_bundle,
    completion_error,
    cut_structure,
    experiment_metadata,
    report,
    run_experiment,
    trial_seed,
)
from cutseek.bench import attach_error_curve, summary_from_dict, summary_to_dict
from cutseek.cli import main


@pytest.fixture(scope="module")
def line_bundle():
    xs = [0.0, 0.1, 0.2, 3.0, 3.1, 3.2]
    pts = np.column_stack([xs, np.zeros(6)])
    ds = FeatureDataset(points=pts,
                        labels=LabelSignal(np.array([1, 1, 1, -1, -1, -1])))
    return build_bundle(ds, k=3), ds.labels


# --- trial seeding -----------------------------------------------------------

def test_trial_seed_is_deterministic_and_distinct():
    seeds = [trial_seed(9, t) for t in range(10)]
    assert seeds == [trial_seed(9, t) for t in range(10)]
    assert len(set(seeds)) == 10
    assert trial_seed(9, 0) != trial_seed(10, 0)


def test_trial_seed_matches_the_spawn_key_recipe():
    want = int(np.random.SeedSequence(9, spawn_key=(3,)).generate_state(1)[0])
    assert trial_seed(9, 3) == want


# --- error curves --------------------------------------------------------------

def test_completion_error_echo_and_flip(line_bundle):
    bundle, signal = line_bundle
    model = LaplacianModel.from_graph(bundle.g_similarity)
    cfg = SpectralConfig()
    full = {v: int(signal[v]) for v in range(bundle.n)}
    assert completion_error(model, cfg, full, signal) == 0.0
    flipped = {v: -y for v, y in full.items()}
    assert completion_error(model, cfg, flipped, signal) == 1.0


def test_attach_error_curve_respects_max_steps(line_bundle):
    bundle, signal = line_bundle
    model = LaplacianModel.from_graph(bundle.g_similarity)
    records = [ExperimentRecord(step=i + 1, node=i, phase="random", cut_found=0)
               for i in range(4)]
    log = [(i, int(signal[i]), "random") for i in range(4)]
    attach_error_curve(model, SpectralConfig(), records, log, signal, max_steps=2)
    assert records[0].error is not None and records[1].error is not None
    assert records[2].error is None and records[3].error is None


# --- run_experiment --------------------------------------------------------------

def test_run_experiment_weighted_trials(line_bundle):
    bundle, signal = line_bundle
    summaries = run_experiment(bundle, signal, "weighted_s2", trials=2, seed=9,
                               budget=6, stop_mode="budget", compute_curves=True)
    assert len(summaries) == 2
    assert [s.seed for s in summaries] == [trial_seed(9, 0), trial_seed(9, 1)]
    for s in summaries:
        assert s.method == "weighted_s2"
        assert s.total_queries == 6
        # every boundary node must be labeled here, so the cut completes
        # exactly when the budget runs out
        assert s.samples_to_full_cut == 6
        assert len(s.error_curve) == 6
        assert s.error_curve[-1].error == 0.0


def test_run_experiment_cutoff_is_a_single_deterministic_summary(line_bundle):
    bundle, signal = line_bundle
    a = run_experiment(bundle, signal, "cutoff", trials=7, seed=0)
    b = run_experiment(bundle, signal, "cutoff", trials=1, seed=123)
    assert len(a) == 1 and len(b) == 1
    assert [r.node for r in a[0].error_curve] == [r.node for r in b[0].error_curve]
    assert a[0].samples_to_full_cut == b[0].samples_to_full_cut


def test_run_experiment_cutoff_budget_mode_truncates(line_bundle):
    bundle, signal = line_bundle
    out = run_experiment(bundle, signal, "cutoff", budget=3, stop_mode="budget")
    assert out[0].total_queries == 3
    assert out[0].samples_to_full_cut is None


def test_run_experiment_hybrid_reports_the_switch(line_bundle):
    bundle, signal = line_bundle
    out = run_experiment(bundle, signal, "hybrid", trials=1, seed=3,
                         stability_threshold=2.5)
    assert out[0].switch_step == 2
    assert out[0].samples_to_full_cut is not None


def test_run_experiment_validation(line_bundle):
    bundle, signal = line_bundle
    with pytest.raises(ValueError, match="method"):
        run_experiment(bundle, signal, "random_walk")
    with pytest.raises(ValueError, match="trials"):
        run_experiment(bundle, signal, "weighted_s2", trials=0)
    with pytest.raises(ValueError, match="budget"):
        run_experiment(bundle, signal, "weighted_s2", stop_mode="budget")


def test_experiment_metadata_values(line_bundle):
    bundle, signal = line_bundle
    meta = experiment_metadata(bundle, signal)
    cs = cut_structure(bundle.g_dissimilarity, signal)
    assert meta["n"] == 6 and meta["num_edges"] == 11
    assert meta["cut_size"] == len(cs.cut_edges) == 5
    assert meta["boundary_size"] == 6
    assert meta["num_cut_components"] == 1
    assert meta["cut_length_ratio"] == pytest.approx(
        meta["mean_cut_length"] / meta["mean_noncut_length"])


# --- summaries and reports --------------------------------------------------------

def test_summary_round_trips_through_json(line_bundle):
    bundle, signal = line_bundle
    summary = run_experiment(bundle, signal, "weighted_s2", trials=1, seed=4,
                             compute_curves=True)[0]
    data = json.loads(json.dumps(summary_to_dict(summary)))
    back = summary_from_dict(data)
    assert back.method == summary.method and back.seed == summary.seed
    assert back.total_queries == summary.total_queries
    assert back.samples_to_full_cut == summary.samples_to_full_cut
    assert back.switch_step == summary.switch_step
    assert back.error_curve == summary.error_curve


def fake_summary(method, seed, errors, full_cut=None, switch=None):
    records = [ExperimentRecord(step=i + 1, node=i, phase="random",
                                cut_found=0, error=e)
               for i, e in enumerate(errors)]
    return TrialSummary(method=method, seed=seed, total_queries=len(errors),
                        samples_to_full_cut=full_cut, switch_step=switch,
                        error_curve=records)


def test_report_writes_tables_and_holds_final_errors(tmp_path):
    summaries = [
        fake_summary("weighted_s2", 1, [0.5, 0.25, 0.0], full_cut=3),
        fake_summary("weighted_s2", 2, [0.5], full_cut=1),
        fake_summary("cutoff", 0, [0.4, 0.1], full_cut=None),
    ]
    paths = report(summaries, tmp_path / "out", meta={"note": "tiny"})
    table = (tmp_path / "out" / "table.csv").read_text().strip().split("\n")
    assert table[0] == "method,trials,full_cut_found,mean_samples_to_full_cut,mean_switch_step"
    assert table[1].startswith("cutoff,1,0,,")
    assert table[2].startswith("weighted_s2,2,2,2.0,")
    curves = (tmp_path / "out" / "curves.csv").read_text().strip().split("\n")
    assert curves[0] == "method,step,mean_error"
    rows = [r.split(",") for r in curves[1:]]
    w = {int(r[1]): float(r[2]) for r in rows if r[0] == "weighted_s2"}
    # the one-step trial holds its final error 0.5 across later steps
    assert w[1] == pytest.approx(0.5)
    assert w[2] == pytest.approx((0.25 + 0.5) / 2)
    assert w[3] == pytest.approx((0.0 + 0.5) / 2)
    meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert meta["meta"] == {"note": "tiny"}
    assert meta["methods"]["weighted_s2"]["trials"] == 2
    assert set(paths) == {"table", "curves", "metadata"}


def test_report_is_byte_deterministic(tmp_path):
    summaries = [fake_summary("cutoff", 0, [0.3, 0.2, 0.1], full_cut=2)]
    report(summaries, tmp_path / "a")
    report(summaries, tmp_path / "b")
    for name in ("table.csv", "curves.csv", "metadata.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# --- CLI -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def features_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "points.csv"
    code = main(["generate", "--seed", "0", "--inner-count", "30",
                 "--outer-count", "10", "--out", str(path)])
    assert code == 0
    return path


def test_cli_generate_writes_features(features_csv):
    lines = features_csv.read_text().strip().split("\n")
    assert lines[0] == "label,f0,f1"
    assert len(lines) == 41


def test_cli_build_graph_round_trips(features_csv, tmp_path):
    prefix = tmp_path / "bundle"
    assert main(["build-graph", "--features", str(features_csv),
                 "--k", "4", "--out-prefix", str(prefix)]) == 0
    for part in ("unweighted", "dissimilarity", "similarity"):
        assert (tmp_path / f"bundle.{part}.edges").exists()
    assert (tmp_path / "bundle.labels").exists()


def test_cli_run_and_report(features_csv, tmp_path, capsys):
    out = tmp_path / "weighted.json"
    code = main(["run", "--features", str(features_csv), "--k", "4",
                 "--method", "weighted_s2", "--trials", "2", "--seed", "1",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["method"] == "weighted_s2"
    assert len(payload["summaries"]) == 2
    assert payload["meta"]["n"] == 40
    assert "full cut in" in capsys.readouterr().out

    report_dir = tmp_path / "report"
    assert main(["report", "--runs", str(out), "--out-dir", str(report_dir)]) == 0
    assert (report_dir / "table.csv").exists()
    assert (report_dir / "curves.csv").exists()
    assert (report_dir / "metadata.json").exists()


def test_cli_run_budget_mode(features_csv, tmp_path):
    out = tmp_path / "budget.json"
    code = main(["run", "--features", str(features_csv), "--method", "cutoff",
                 "--stop-mode", "budget", "--budget", "5", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["summaries"][0]["total_queries"] == 5


def test_cli_budget_bound(features_csv, tmp_path, capsys):
    out = tmp_path / "bound.json"
    assert main(["budget-bound", "--features", str(features_csv),
                 "--epsilon", "0.1", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["total_ceil"] >= 1
    assert payload["epsilon"] == 0.1
    # without --out the report goes to stdout
    assert main(["budget-bound", "--features", str(features_csv),
                 "--epsilon", "0.1"]) == 0
    assert json.loads(capsys.readouterr().out)["total_ceil"] == payload["total_ceil"]


@pytest.mark.parametrize("argv,fragment", [
    (["run", "--method", "weighted_s2", "--out", "x.json"], "pass --features"),
    (["run", "--features", "a.csv", "--bundle-prefix", "b", "--method",
      "weighted_s2", "--out", "x.json"], "not both"),
    (["run", "--features", "missing.csv", "--method", "weighted_s2",
      "--out", "x.json"], "error:"),
    (["budget-bound", "--features", "missing.csv", "--epsilon", "0.1"], "error:"),
])
def test_cli_failures_exit_nonzero_with_diagnostics(argv, fragment, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert fragment.removeprefix("error:") in err


def test_cli_run_budget_mode_requires_budget(features_csv, capsys):
    assert main(["run", "--features", str(features_csv), "--method", "cutoff",
                 "--stop-mode", "budget", "--out", "x.json"]) == 1
    assert "--budget" in capsys.readouterr().err


def test_cli_rejects_unknown_method(features_csv):
    with pytest.raises(SystemExit):
        main(["run", "--features", str(features_csv), "--method", "oracle",
              "--out", "x.json"])
