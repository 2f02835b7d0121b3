"""Two-phase sampler: spectral ordering first, boundary bisection after.

Phase one samples in the greedy cutoff order on the similarity graph,
reconstructing after every sample; once successive reconstructions stop
moving (cosine stability below the threshold) the run hands every label
gathered so far to the weighted boundary-search sampler on the dissimilarity
graph and continues with bisection queries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .graph import GraphError, WeightedGraph
from .s2 import ExperimentRecord, S2Config, SamplerState, ingest_sample, msp
from .spectral import LaplacianModel, SpectralConfig, cutoff_selection_iter, pocs_reconstruct


@dataclass
class HybridConfig:
    budget: int
    stability_threshold: float = 0.001
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    s2: S2Config | None = None

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be a positive integer")
        if self.stability_threshold < 0:
            raise ValueError("stability_threshold must be nonnegative")
        if self.s2 is None:
            self.s2 = S2Config(budget=self.budget, variant="weighted")
        if self.s2.variant != "weighted":
            raise ValueError("the bisection phase runs the weighted variant")


def stability_stat(prev, curr) -> float:
    """One minus the cosine similarity of successive soft reconstructions."""
    a = np.asarray(prev.values if hasattr(prev, "values") else prev, dtype=np.float64)
    b = np.asarray(curr.values if hasattr(curr, "values") else curr, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("reconstructions differ in shape")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("stability is undefined for a zero reconstruction")
    return float(1.0 - (a @ b) / (na * nb))


def run_hybrid(g_similarity: WeightedGraph, g_dissimilarity: WeightedGraph,
               oracle, cfg: HybridConfig, target_cut=None, model: LaplacianModel | None = None):
    """Run the two-phase sampler.

    Returns (state, switch_step, records) where switch_step is the number of
    samples taken when the stability trigger fired, or None if the run ended
    still in the spectral phase (reported as pure cutoff sampling). Stop
    handling follows cfg.s2.stop_mode: "budget" ends after cfg.budget
    samples, "full_cut" ends once discovered_cut equals target_cut.
    """
    if not g_similarity.same_topology(g_dissimilarity):
        raise GraphError("similarity and dissimilarity graphs must share topology")
    n = g_similarity.n
    stop_mode = cfg.s2.stop_mode
    if stop_mode == "budget" and cfg.budget > n:
        raise ValueError(f"budget {cfg.budget} exceeds node count {n}")
    if stop_mode == "full_cut":
        if target_cut is None:
            raise ValueError("stop_mode='full_cut' needs the target cut edge set")
        target = {(u, v) if u < v else (v, u) for u, v in target_cut}
    if model is None:
        model = LaplacianModel.from_graph(g_similarity, kind=cfg.spectral.laplacian)
    state = SamplerState.fresh(g_dissimilarity)
    records = []

    def stopped():
        if stop_mode == "budget":
            return len(state.labeled) >= cfg.budget
        return state.discovered_cut == target

    def record(node, phase):
        records.append(
            ExperimentRecord(
                step=len(state.query_log),
                node=node,
                phase=phase,
                cut_found=len(state.discovered_cut),
            )
        )

    # selection is lazy: the switch usually fires long before the order
    # is exhausted, so never materialize the full greedy order
    order = itertools.islice(cutoff_selection_iter(model, cfg.spectral),
                             min(cfg.budget, n))
    prev = None
    switch_step = None
    for node in order:
        ingest_sample(state, node, oracle(node), phase="spectral")
        record(node, "spectral")
        if stopped():
            return state, None, records
        soft = pocs_reconstruct(model, dict(state.labeled), cfg.spectral)
        if prev is not None:
            if stability_stat(prev, soft) < cfg.stability_threshold:
                switch_step = len(state.labeled)
                break
        prev = soft
    if switch_step is None:
        return state, None, records

    rng = np.random.default_rng(cfg.s2.seed)
    while True:
        nxt = msp(state, "weighted")
        if nxt is None:
            unlabeled = [v for v in range(n) if v not in state.labeled]
            if not unlabeled:
                return state, switch_step, records
            nxt = unlabeled[int(rng.integers(len(unlabeled)))]
            phase = "random"
        else:
            phase = "bisect"
        ingest_sample(state, nxt, oracle(nxt), phase=phase)
        record(nxt, phase)
        if stopped():
            return state, switch_step, records
