"""Benchmark harness: run sampling methods on a graph bundle and report.

Method-to-graph assignment: the unweighted sampler runs on the unit-length
graph, the weighted sampler on the dissimilarity graph, cutoff sampling and
the hybrid's first phase on the similarity graph. Error curves for every
method use the same reconstruction (alternating projections on the
similarity graph) so the sampling strategies stay comparable, and errors
count mislabeled nodes over all n nodes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import LabelSignal, cut_structure
from .hybrid import HybridConfig, run_hybrid
from .s2 import ExperimentRecord, S2Config, SignalOracle, run_s2
from .spectral import LaplacianModel, SpectralConfig, cutoff_greedy_select, pocs_reconstruct, threshold

METHODS = ("unweighted_s2", "weighted_s2", "cutoff", "hybrid")


@dataclass
class TrialSummary:
    method: str
    seed: int
    total_queries: int
    samples_to_full_cut: int | None
    switch_step: int | None = None
    error_curve: list = field(default_factory=list)


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial seed; adding trials never perturbs earlier ones."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial,))
    return int(ss.generate_state(1)[0])


def completion_error(model: LaplacianModel, scfg: SpectralConfig,
                     samples: dict, truth: LabelSignal) -> float:
    """Fraction of all nodes mislabeled after reconstruct-and-threshold."""
    soft = pocs_reconstruct(model, samples, scfg)
    pred = threshold(soft)
    return float(np.mean(pred.values != truth.values))


def attach_error_curve(model, scfg, records, query_log, truth, max_steps=None):
    """Fill the error field of each record from its query-log prefix."""
    steps = len(records) if max_steps is None else min(len(records), max_steps)
    samples = {}
    for i in range(steps):
        node, label, _ = query_log[i]
        samples[node] = label
        records[i].error = completion_error(model, scfg, samples, truth)
    return records


def _first_full_cut_step(records, cut_size):
    for rec in records:
        if rec.cut_found == cut_size:
            return rec.step
    return None


def _cutoff_records(order, signal, cut_edges, stop_at_full_cut, budget):
    cut_left = {}
    for u, v in cut_edges:
        cut_left.setdefault(u, set()).add((u, v))
        cut_left.setdefault(v, set()).add((u, v))
    labeled = set()
    found = set()
    records = []
    log = []
    for step, node in enumerate(order, start=1):
        labeled.add(node)
        for edge in cut_left.get(node, ()):
            if edge[0] in labeled and edge[1] in labeled:
                found.add(edge)
        log.append((node, int(signal[node]), "spectral"))
        records.append(ExperimentRecord(step=step, node=node, phase="spectral",
                                        cut_found=len(found)))
        if stop_at_full_cut and len(found) == len(cut_edges):
            break
        if budget is not None and step >= budget:
            break
    return records, log


def run_experiment(bundle, signal: LabelSignal, method: str, trials: int = 1,
                   seed: int = 0, budget: int | None = None,
                   stop_mode: str = "full_cut", compute_curves: bool = False,
                   spectral_cfg: SpectralConfig | None = None,
                   stability_threshold: float = 0.001,
                   model: LaplacianModel | None = None) -> list:
    """Run one method for several trials and summarize each trial.

    stop_mode="full_cut" runs until every cut edge is discovered;
    stop_mode="budget" stops after `budget` queries. Cutoff sampling is
    deterministic, so it yields a single summary regardless of `trials`.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if trials < 1:
        raise ValueError("trials must be positive")
    if stop_mode == "budget" and budget is None:
        raise ValueError("stop_mode='budget' needs a budget")
    n = bundle.n
    scfg = spectral_cfg if spectral_cfg is not None else SpectralConfig()
    cut = cut_structure(bundle.g_unweighted, signal)
    cut_edges = set(cut.cut_edges)
    need_model = compute_curves or method in ("cutoff", "hybrid")
    if model is None and need_model:
        model = LaplacianModel.from_graph(bundle.g_similarity, kind=scfg.laplacian)

    summaries = []
    if method == "cutoff":
        order_budget = n if stop_mode == "full_cut" else min(budget, n)
        order = cutoff_greedy_select(model, scfg, budget=order_budget)
        records, log = _cutoff_records(
            order, signal, cut_edges,
            stop_at_full_cut=(stop_mode == "full_cut"),
            budget=None if stop_mode == "full_cut" else budget,
        )
        if compute_curves:
            attach_error_curve(model, scfg, records, log, signal)
        summaries.append(TrialSummary(
            method=method, seed=seed, total_queries=len(records),
            samples_to_full_cut=_first_full_cut_step(records, len(cut_edges)),
            error_curve=records,
        ))
        return summaries

    for t in range(trials):
        tseed = trial_seed(seed, t)
        oracle = SignalOracle(signal)
        if method in ("unweighted_s2", "weighted_s2"):
            variant = "unweighted" if method == "unweighted_s2" else "weighted"
            g = bundle.g_unweighted if variant == "unweighted" else bundle.g_dissimilarity
            cfg = S2Config(budget=(budget if budget is not None else n),
                           variant=variant, seed=tseed, stop_mode=stop_mode)
            state, records = run_s2(g, oracle, cfg, target_cut=cut_edges)
            switch = None
        else:
            cfg = HybridConfig(
                budget=(budget if budget is not None else n),
                stability_threshold=stability_threshold,
                spectral=scfg,
                s2=S2Config(budget=(budget if budget is not None else n),
                            variant="weighted", seed=tseed, stop_mode=stop_mode),
            )
            state, switch, records = run_hybrid(
                bundle.g_similarity, bundle.g_dissimilarity, oracle, cfg,
                target_cut=cut_edges, model=model,
            )
        if compute_curves:
            attach_error_curve(model, scfg, records, state.query_log, signal)
        summaries.append(TrialSummary(
            method=method, seed=tseed, total_queries=len(records),
            samples_to_full_cut=_first_full_cut_step(records, len(cut_edges)),
            switch_step=switch, error_curve=records,
        ))
    return summaries


def experiment_metadata(bundle, signal: LabelSignal) -> dict:
    """Realized cut statistics of a labeled bundle, on the dissimilarity graph."""
    g = bundle.g_dissimilarity
    cut = cut_structure(g, signal)
    cut_set = set(cut.cut_edges)
    cut_lengths = [g.length(u, v) for u, v in cut.cut_edges]
    non_lengths = [length for u, v, length, _ in g.edge_items() if (u, v) not in cut_set]
    mean_cut = float(np.mean(cut_lengths)) if cut_lengths else None
    mean_non = float(np.mean(non_lengths)) if non_lengths else None
    ratio = (mean_cut / mean_non) if (mean_cut and mean_non) else None
    return {
        "n": bundle.n,
        "num_edges": g.num_edges,
        "cut_size": len(cut.cut_edges),
        "boundary_size": len(cut.boundary),
        "num_cut_components": cut.num_components,
        "mean_cut_length": mean_cut,
        "mean_noncut_length": mean_non,
        "cut_length_ratio": ratio,
    }


def summary_to_dict(summary: TrialSummary) -> dict:
    out = asdict(summary)
    out["error_curve"] = [asdict(rec) for rec in summary.error_curve]
    return out


def summary_from_dict(data: dict) -> TrialSummary:
    records = [ExperimentRecord(**rec) for rec in data.get("error_curve", [])]
    return TrialSummary(
        method=data["method"], seed=data["seed"],
        total_queries=data["total_queries"],
        samples_to_full_cut=data["samples_to_full_cut"],
        switch_step=data.get("switch_step"), error_curve=records,
    )


def _mean_or_none(values):
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def report(summaries, out_dir, meta: dict | None = None) -> dict:
    """Write table.csv, curves.csv, and metadata.json under out_dir.

    table.csv has one row per method with mean samples to full cut; curves.csv
    has mean error per (method, step) over the trials that computed errors.
    Returns the paths written.
    """
    import csv as _csv
    import os

    os.makedirs(out_dir, exist_ok=True)
    by_method = {}
    for s in summaries:
        by_method.setdefault(s.method, []).append(s)

    table_path = os.path.join(out_dir, "table.csv")
    with open(table_path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["method", "trials", "full_cut_found",
                         "mean_samples_to_full_cut", "mean_switch_step"])
        for method in sorted(by_method):
            rows = by_method[method]
            found = [s.samples_to_full_cut for s in rows if s.samples_to_full_cut is not None]
            mean_full = _mean_or_none([s.samples_to_full_cut for s in rows])
            mean_switch = _mean_or_none([s.switch_step for s in rows])
            writer.writerow([
                method, len(rows), len(found),
                "" if mean_full is None else repr(mean_full),
                "" if mean_switch is None else repr(mean_switch),
            ])

    curves_path = os.path.join(out_dir, "curves.csv")
    with open(curves_path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["method", "step", "mean_error"])
        for method in sorted(by_method):
            curves = []
            for s in by_method[method]:
                errs = [rec.error for rec in s.error_curve if rec.error is not None]
                if errs:
                    curves.append(errs)
            if not curves:
                continue
            depth = max(len(c) for c in curves)
            for step in range(1, depth + 1):
                # trials that stopped earlier hold their final error
                vals = [c[min(step, len(c)) - 1] for c in curves]
                writer.writerow([method, step, repr(float(np.mean(vals)))])

    meta_path = os.path.join(out_dir, "metadata.json")
    payload = {"meta": meta or {}, "methods": {}}
    for method in sorted(by_method):
        rows = by_method[method]
        payload["methods"][method] = {
            "trials": len(rows),
            "seeds": [s.seed for s in rows],
            "mean_samples_to_full_cut": _mean_or_none(
                [s.samples_to_full_cut for s in rows]),
            "mean_switch_step": _mean_or_none([s.switch_step for s in rows]),
        }
    with open(meta_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"table": table_path, "curves": curves_path, "metadata": meta_path}
