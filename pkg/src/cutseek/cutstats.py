"""Cut complexity measures and the query-budget bound.

The distance between two cut edges adds the residual-graph distances between
their like-labeled endpoints to the longer of the two edge lengths. The
clustering threshold is the smallest radius at which the meta graph over cut
edges (edges joined when their distance is at most the radius) has exactly as
many components as the cut itself. Both feed a closed-form bound on how many
queries the boundary-search sampler needs to discover every cut edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import (
    GraphError,
    LabelSignal,
    WeightedGraph,
    CutStructure,
    cut_structure,
    distances,
    strip_cut,
)


@dataclass(frozen=True)
class MetaGraph:
    """Cut edges as nodes, joined when their pairwise distance is <= threshold."""

    meta_nodes: tuple
    meta_edges: tuple
    threshold: float


@dataclass(frozen=True)
class BudgetReport:
    """Breakdown of the query-budget bound for recovering the full cut."""

    num_components: int
    boundary_size: int
    min_cut_length: float | None
    diameter: float
    cluster_threshold: float | None
    min_region_fraction: float
    epsilon: float
    first_discovery_term: float
    remaining_discovery_term: float
    random_phase_term: float
    total: float
    total_ceil: int
    conventions: tuple

    def to_dict(self) -> dict:
        return {
            "num_components": self.num_components,
            "boundary_size": self.boundary_size,
            "min_cut_length": self.min_cut_length,
            "diameter": self.diameter,
            "cluster_threshold": self.cluster_threshold,
            "min_region_fraction": self.min_region_fraction,
            "epsilon": self.epsilon,
            "first_discovery_term": self.first_discovery_term,
            "remaining_discovery_term": self.remaining_discovery_term,
            "random_phase_term": self.random_phase_term,
            "total": self.total,
            "total_ceil": self.total_ceil,
            "conventions": list(self.conventions),
        }


def _oriented(f, edge):
    u, v = edge
    return (u, v) if f[u] < 0 else (v, u)


def _check_cut_edge(g, f, edge):
    u, v = edge
    if not g.has_edge(u, v):
        raise GraphError(f"no edge {edge}")
    if f[u] == f[v]:
        raise GraphError(f"edge {edge} is not a cut edge")


def _residual_distance(residual, a, b, cache):
    if a == b:
        return 0.0
    if a not in cache:
        cache[a] = distances(residual, [a])
    return float(cache[a][b])


def cut_edge_distance(g: WeightedGraph, f: LabelSignal, e1, e2,
                      residual=None, cache=None) -> float:
    """Distance between two cut edges, +inf across different cut components.

    Matching endpoints by label, the result is the cut-free distance between
    the negative endpoints plus the cut-free distance between the positive
    endpoints plus the larger of the two edge lengths.
    """
    e1 = tuple(sorted(e1))
    e2 = tuple(sorted(e2))
    _check_cut_edge(g, f, e1)
    _check_cut_edge(g, f, e2)
    if residual is None:
        residual = strip_cut(g, f)
    if cache is None:
        cache = {}
    n1, p1 = _oriented(f, e1)
    n2, p2 = _oriented(f, e2)
    dn = _residual_distance(residual, n1, n2, cache)
    dp = _residual_distance(residual, p1, p2, cache)
    if not (np.isfinite(dn) and np.isfinite(dp)):
        return math.inf
    return dn + dp + max(g.length(*e1), g.length(*e2))


def _pairwise_cut_distances(g, f, cut_edges):
    residual = strip_cut(g, f)
    cache = {}
    table = {}
    for i in range(len(cut_edges)):
        for j in range(i + 1, len(cut_edges)):
            table[(i, j)] = cut_edge_distance(
                g, f, cut_edges[i], cut_edges[j], residual=residual, cache=cache
            )
    return table


def _component_count(num_nodes, table, radius):
    parent = list(range(num_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = num_nodes
    for (i, j), d in table.items():
        if d <= radius:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
                count -= 1
    return count


def build_meta_graph(g: WeightedGraph, f: LabelSignal, threshold: float) -> MetaGraph:
    cs = cut_structure(g, f)
    cut = cs.cut_edges
    if not cut:
        raise GraphError("empty cut")
    table = _pairwise_cut_distances(g, f, cut)
    meta_edges = tuple(
        (cut[i], cut[j]) for (i, j), d in sorted(table.items()) if d <= threshold
    )
    return MetaGraph(meta_nodes=cut, meta_edges=meta_edges, threshold=threshold)


def cut_cluster_threshold(g: WeightedGraph, f: LabelSignal, structure: CutStructure | None = None) -> float:
    """Smallest radius whose meta graph has exactly one component per cut component.

    The component count of the meta graph is nonincreasing in the radius and
    reaches the number of cut components once the radius covers every finite
    pairwise distance, so a binary search over the distinct finite distances
    (plus zero) finds the smallest such radius.
    """
    cs = structure if structure is not None else cut_structure(g, f)
    cut = cs.cut_edges
    if not cut:
        raise GraphError("empty cut")
    target = cs.num_components
    table = _pairwise_cut_distances(g, f, cut)
    thresholds = sorted({0.0} | {d for d in table.values() if math.isfinite(d)})
    lo, hi = 0, len(thresholds) - 1
    if _component_count(len(cut), table, thresholds[hi]) != target:
        raise GraphError("meta graph never reaches the cut component count")
    while lo < hi:
        mid = (lo + hi) // 2
        if _component_count(len(cut), table, thresholds[mid]) <= target:
            hi = mid
        else:
            lo = mid + 1
    return thresholds[lo]


def _bisection_queries(ratio: float) -> float:
    return float(math.ceil(2.0 * math.log2(max(ratio, 1.0))))


def budget_bound_from_quantities(num_components, boundary_size, min_cut_length,
                                 diameter, cluster_threshold, min_region_fraction,
                                 epsilon) -> BudgetReport:
    """Combine measured cut quantities into the query-budget bound.

    The first term covers finding one edge per cut component by bisecting a
    path of at most diameter length down to the shortest cut edge; the second
    covers the remaining boundary nodes with paths of at most the clustering
    threshold; the third bounds the random queries needed to seed every
    region with probability at least 1 - epsilon.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if not (0.0 < min_region_fraction <= 1.0):
        raise ValueError("min_region_fraction must lie in (0, 1]")
    conventions = []
    if num_components == 0:
        first = 0.0
        remaining = 0.0
        conventions.append("empty cut: discovery terms set to 0")
    else:
        if min_cut_length is None or min_cut_length <= 0:
            raise ValueError("nonempty cut needs a positive min_cut_length")
        ratio_first = diameter / min_cut_length
        if ratio_first < 1.0:
            conventions.append("diameter ratio below 1 clamped to 1")
        first = num_components * _bisection_queries(ratio_first)
        ratio_rest = cluster_threshold / min_cut_length
        if ratio_rest < 1.0:
            conventions.append("cluster-threshold ratio below 1 clamped to 1")
        remaining = (boundary_size - num_components) * _bisection_queries(ratio_rest)
    if min_region_fraction >= 1.0:
        random_term = 1.0
        conventions.append("single region: random term set to 1")
    else:
        random_term = math.log(1.0 / (min_region_fraction * epsilon)) / math.log(
            1.0 / (1.0 - min_region_fraction)
        )
    total = first + remaining + random_term
    return BudgetReport(
        num_components=num_components,
        boundary_size=boundary_size,
        min_cut_length=min_cut_length,
        diameter=diameter,
        cluster_threshold=cluster_threshold,
        min_region_fraction=min_region_fraction,
        epsilon=epsilon,
        first_discovery_term=first,
        remaining_discovery_term=remaining,
        random_phase_term=random_term,
        total=total,
        total_ceil=int(math.ceil(total)),
        conventions=tuple(conventions),
    )


def budget_bound(g: WeightedGraph, f: LabelSignal, epsilon: float) -> BudgetReport:
    """Query budget sufficient for the weighted sampler to recover the cut
    with probability at least 1 - epsilon."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie strictly between 0 and 1")
    cs = cut_structure(g, f)
    threshold = (
        cut_cluster_threshold(g, f, structure=cs) if cs.num_components > 0 else None
    )
    return budget_bound_from_quantities(
        num_components=cs.num_components,
        boundary_size=len(cs.boundary),
        min_cut_length=cs.min_cut_length,
        diameter=cs.diameter,
        cluster_threshold=threshold,
        min_region_fraction=cs.min_region_fraction,
        epsilon=epsilon,
    )
