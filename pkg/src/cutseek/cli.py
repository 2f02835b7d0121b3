"""Command-line entry points.

Subcommands: generate (two-circles features CSV), build-graph (k-NN graph
bundle as edge-list files), run (sampling experiments to a JSON file),
report (aggregate run files into CSV tables), budget-bound (query-budget
bound for a labeled graph, as JSON). All outputs are deterministic for a
fixed master seed. Exit status 0 on success, 1 with a diagnostic line on
stderr otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import (METHODS, experiment_metadata, report, run_experiment,
                    summary_from_dict, summary_to_dict)
from .cutstats import budget_bound
from .datasets import (METRICS, GraphBundle, build_bundle, gen_two_circles,
                       load_features_csv, save_features_csv)
from .graph import (GraphError, LabelSignal, load_graph, load_labels,
                    save_graph, save_labels)
from .s2 import STOP_MODES, CompletionError
from .spectral import SpectralConfig

_BUNDLE_PARTS = ("unweighted", "dissimilarity", "similarity")


def _add_input_args(sub, need_k=True):
    sub.add_argument("--features", help="features CSV (label,f0,f1,...)")
    sub.add_argument("--bundle-prefix",
                     help="prefix of a saved bundle (<prefix>.<part>.edges, <prefix>.labels)")
    sub.add_argument("--metric", choices=METRICS, default="euclidean")
    if need_k:
        sub.add_argument("--k", type=int, default=4, help="neighbors per node")


def _load_bundle(args):
    if args.bundle_prefix and args.features:
        raise GraphError("pass --features or --bundle-prefix, not both")
    if args.bundle_prefix:
        graphs = {part: load_graph(f"{args.bundle_prefix}.{part}.edges")
                  for part in _BUNDLE_PARTS}
        signal = load_labels(f"{args.bundle_prefix}.labels")
        bundle = GraphBundle(g_unweighted=graphs["unweighted"],
                             g_dissimilarity=graphs["dissimilarity"],
                             g_similarity=graphs["similarity"])
        return bundle, signal
    if not args.features:
        raise GraphError("pass --features or --bundle-prefix")
    ds = load_features_csv(args.features, metric=args.metric)
    bundle = build_bundle(ds, k=args.k)
    return bundle, ds.labels


def _cmd_generate(args) -> int:
    ds = gen_two_circles(seed=args.seed, inner_count=args.inner_count,
                         outer_count=args.outer_count)
    save_features_csv(ds, args.out)
    print(f"wrote {ds.n} points to {args.out}")
    return 0


def _cmd_build_graph(args) -> int:
    ds = load_features_csv(args.features, metric=args.metric)
    bundle = build_bundle(ds, k=args.k)
    for part in _BUNDLE_PARTS:
        save_graph(getattr(bundle, f"g_{part}"), f"{args.out_prefix}.{part}.edges")
    save_labels(ds.labels, f"{args.out_prefix}.labels")
    print(f"wrote bundle ({bundle.n} nodes, {bundle.g_unweighted.num_edges} edges) "
          f"to {args.out_prefix}.*")
    return 0


def _cmd_run(args) -> int:
    bundle, signal = _load_bundle(args)
    if args.stop_mode == "budget" and args.budget is None:
        raise GraphError("--stop-mode budget needs --budget")
    summaries = run_experiment(
        bundle, signal, method=args.method, trials=args.trials,
        seed=args.seed, budget=args.budget, stop_mode=args.stop_mode,
        compute_curves=args.curves, spectral_cfg=SpectralConfig(),
    )
    payload = {
        "method": args.method,
        "seed": args.seed,
        "trials": args.trials,
        "stop_mode": args.stop_mode,
        "budget": args.budget,
        "meta": experiment_metadata(bundle, signal),
        "summaries": [summary_to_dict(s) for s in summaries],
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    done = [s.samples_to_full_cut for s in summaries if s.samples_to_full_cut is not None]
    mean = sum(done) / len(done) if done else float("nan")
    print(f"{args.method}: {len(summaries)} trial(s), "
          f"full cut in {len(done)}, mean samples to full cut {mean:.2f}")
    return 0


def _cmd_report(args) -> int:
    summaries = []
    meta = {}
    for path in args.runs:
        with open(path) as fh:
            payload = json.load(fh)
        summaries.extend(summary_from_dict(d) for d in payload["summaries"])
        if not meta and payload.get("meta"):
            meta = payload["meta"]
    if not summaries:
        raise GraphError("no summaries found in the given run files")
    paths = report(summaries, args.out_dir, meta=meta)
    print(f"wrote {paths['table']}, {paths['curves']}, {paths['metadata']}")
    return 0


def _cmd_budget_bound(args) -> int:
    bundle, signal = _load_bundle(args)
    g = bundle.g_dissimilarity if args.graph == "dissimilarity" else bundle.g_unweighted
    rep = budget_bound(g, signal, epsilon=args.epsilon)
    text = json.dumps(rep.to_dict(), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cutseek",
        description="Active boundary search on weighted graphs.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("generate", help="generate the two-circles dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inner-count", type=int, default=900)
    p.add_argument("--outer-count", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = subs.add_parser("build-graph", help="build a k-NN graph bundle from features")
    p.add_argument("--features", required=True)
    p.add_argument("--metric", choices=METRICS, default="euclidean")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_build_graph)

    p = subs.add_parser("run", help="run a sampling method for several trials")
    _add_input_args(p)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--stop-mode", choices=STOP_MODES, default="full_cut")
    p.add_argument("--curves", action="store_true",
                   help="attach reconstruction error curves to each trial")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = subs.add_parser("report", help="aggregate run files into CSV tables")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)

    p = subs.add_parser("budget-bound", help="query-budget bound for a labeled graph")
    _add_input_args(p)
    p.add_argument("--epsilon", type=float, required=True,
                   help="failure probability for the random phase")
    p.add_argument("--graph", choices=("dissimilarity", "unweighted"),
                   default="dissimilarity")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_budget_bound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, CompletionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
