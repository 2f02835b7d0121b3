"""Boundary-search sampling by bisection on shortest opposite-label paths.

The sampler queries node labels one at a time. Whenever two queried nodes
with opposite labels are connected in the residual graph, the next query is
the midpoint of their globally shortest connecting path (the msp rule);
otherwise a uniformly random unlabeled node is queried. Every edge whose two
endpoints are revealed to disagree is removed from the residual graph and
recorded as a discovered cut edge.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .graph import (
    GraphError,
    LabelSignal,
    WeightedGraph,
    _lex_walk,
    connected_components,
    distances,
)

VARIANTS = ("unweighted", "weighted")
STOP_MODES = ("budget", "full_cut")
PHASES = ("random", "bisect", "spectral")


class CompletionError(ValueError):
    """Raised when the residual components do not determine every label."""


@dataclass
class S2Config:
    budget: int
    variant: str = "weighted"
    seed: int = 0
    stop_mode: str = "budget"

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be a positive integer")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.stop_mode not in STOP_MODES:
            raise ValueError(f"stop_mode must be one of {STOP_MODES}")


class SignalOracle:
    """Answers label queries from a fixed signal and counts them."""

    def __init__(self, signal: LabelSignal):
        self._labels = signal.values.copy()
        self.num_queries = 0

    def __call__(self, node) -> int:
        self.num_queries += 1
        return int(self._labels[node])


@dataclass
class ExperimentRecord:
    step: int
    node: int
    phase: str
    cut_found: int
    error: float | None = None


@dataclass
class SamplerState:
    """Mutable run state: residual graph, labels seen, and discovered cut."""

    residual: WeightedGraph
    labeled: dict = field(default_factory=dict)
    query_log: list = field(default_factory=list)
    discovered_cut: set = field(default_factory=set)

    @classmethod
    def fresh(cls, g: WeightedGraph) -> "SamplerState":
        return cls(residual=g)


def ingest_sample(state: SamplerState, node, label, phase: str = "random") -> SamplerState:
    """Record one labeled node, removing any cut edges this reveals."""
    if node in state.labeled:
        raise ValueError(f"node {node} already labeled")
    label = int(label)
    if label not in (-1, 1):
        raise ValueError("label must be +1 or -1")
    if phase not in PHASES:
        raise ValueError(f"phase must be one of {PHASES}")
    state.labeled[node] = label
    state.query_log.append((node, label, phase))
    exposed = [
        w for w in state.residual.neighbors(node)
        if w in state.labeled and state.labeled[w] != label
    ]
    for w in exposed:
        state.residual = state.residual.remove_edge(node, w)
        state.discovered_cut.add((node, w) if node < w else (w, node))
    return state


def msp(state: SamplerState, variant: str = "weighted"):
    """Midpoint of the globally shortest path joining opposite known labels.

    Over all pairs of labeled nodes with opposite labels that are connected in
    the residual graph, the shortest connecting path is taken (hop metric for
    the unweighted variant, length metric for the weighted one). Ties between
    pairs go to the smaller (min id, max id) pair; ties between paths go to
    the lexicographically smallest node sequence. The unweighted variant
    returns the node at hop position ceil(h/2) counted from the smaller-id
    endpoint; the weighted variant returns the unlabeled interior node whose
    cumulative length is closest to half the total, smaller id on ties.
    Returns None when no opposite-label pair is connected.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    metric = "hop" if variant == "unweighted" else "length"
    plus = sorted(v for v, y in state.labeled.items() if y > 0)
    minus = sorted(v for v, y in state.labeled.items() if y < 0)
    if not plus or not minus:
        return None
    g = state.residual
    dminus = distances(g, minus, metric=metric)
    best = dminus[plus].min()
    if not np.isfinite(best):
        return None
    pairs = []
    for a in plus:
        if dminus[a] != best:
            continue
        da = distances(g, [a], metric=metric)
        amin = da[minus].min()
        for b in minus:
            if da[b] == amin:
                pairs.append((a, b))
    a, b = min(pairs, key=lambda p: (min(p), max(p)))
    first, second = (a, b) if a < b else (b, a)
    dgoal = distances(g, [second], metric=metric)
    path = _lex_walk(g, first, second, dgoal, metric)
    return _midpoint(g, state.labeled, path, variant)


def _midpoint(g, labeled, path, variant):
    hops = len(path) - 1
    if variant == "unweighted":
        node = path[(hops + 1) // 2]
        if node in labeled:
            raise GraphError("midpoint of a globally shortest path is labeled")
        return node
    cum = 0.0
    marks = [0.0]
    for i in range(hops):
        cum += g.length(path[i], path[i + 1])
        marks.append(cum)
    target = cum / 2.0
    interior = [
        (abs(marks[i] - target), path[i])
        for i in range(1, hops)
        if path[i] not in labeled
    ]
    if not interior:
        raise GraphError("globally shortest path has no unlabeled interior node")
    return min(interior)[1]


def run_s2(g: WeightedGraph, oracle, cfg: S2Config, target_cut=None):
    """Run the boundary-search sampling loop.

    With stop_mode="budget" the run ends once cfg.budget nodes are labeled
    (budget must not exceed n). With stop_mode="full_cut" the run ends once
    discovered_cut equals target_cut, which the caller must supply; budget is
    ignored. Returns (state, records).
    """
    n = g.n
    if cfg.stop_mode == "budget" and cfg.budget > n:
        raise ValueError(f"budget {cfg.budget} exceeds node count {n}")
    if cfg.stop_mode == "full_cut":
        if target_cut is None:
            raise ValueError("stop_mode='full_cut' needs the target cut edge set")
        target = {(u, v) if u < v else (v, u) for u, v in target_cut}
    rng = np.random.default_rng(cfg.seed)
    state = SamplerState.fresh(g)
    records = []

    def stopped():
        if cfg.stop_mode == "budget":
            return len(state.labeled) >= cfg.budget
        return state.discovered_cut == target

    while True:
        unlabeled = [v for v in range(n) if v not in state.labeled]
        if not unlabeled:
            return state, records
        x = unlabeled[int(rng.integers(len(unlabeled)))]
        phase = "random"
        while True:
            ingest_sample(state, x, oracle(x), phase=phase)
            records.append(
                ExperimentRecord(
                    step=len(state.query_log),
                    node=x,
                    phase=phase,
                    cut_found=len(state.discovered_cut),
                )
            )
            if stopped():
                return state, records
            nxt = msp(state, cfg.variant)
            if nxt is None:
                break
            x, phase = nxt, "bisect"


def complete_by_components(state: SamplerState) -> LabelSignal:
    """Spread observed labels across residual components.

    Every connected component of the residual graph must contain at least one
    labeled node and no conflicting labels; once the full cut has been
    discovered this reproduces the ground-truth signal exactly.
    """
    values = np.zeros(state.residual.n, dtype=np.int8)
    for comp in connected_components(state.residual):
        seen = sorted({state.labeled[v] for v in comp if v in state.labeled})
        if not seen:
            raise CompletionError(f"component containing node {comp[0]} has no labeled node")
        if len(seen) > 1:
            raise CompletionError(f"component containing node {comp[0]} has conflicting labels")
        values[list(comp)] = seen[0]
    return LabelSignal(values)


def write_query_log_csv(query_log, records, path) -> None:
    """Write the per-query log: step, node, label, phase, cut edges so far."""
    if len(query_log) != len(records):
        raise ValueError("query log and records disagree in length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "node", "label", "phase", "cut_edges_discovered_so_far"])
        for (node, label, phase), rec in zip(query_log, records):
            writer.writerow([rec.step, node, label, phase, rec.cut_found])
