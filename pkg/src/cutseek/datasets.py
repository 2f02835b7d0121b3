"""Synthetic data, k-NN graph construction, and feature CSV ingestion."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, LabelSignal, WeightedGraph

METRICS = ("euclidean", "cosine")

# Duplicate points make zero-length edges; graph lengths must stay positive,
# so dissimilarity lengths are floored here while similarities keep the true
# (zero) distance.
MIN_EDGE_LENGTH = 1e-12


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    points: np.ndarray
    labels: LabelSignal
    metric: str = "euclidean"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] < 1:
            raise GraphError("points must be an (n, d) array with n >= 2")
        if not np.all(np.isfinite(pts)):
            raise GraphError("points must be finite")
        if len(self.labels) != pts.shape[0]:
            raise GraphError("labels length does not match point count")
        if self.metric not in METRICS:
            raise GraphError(f"metric must be one of {METRICS}")
        if self.metric == "cosine" and np.any(np.linalg.norm(pts, axis=1) == 0):
            raise GraphError("cosine metric needs nonzero feature rows")
        object.__setattr__(self, "points", pts)
        if not isinstance(self.labels, LabelSignal):
            object.__setattr__(self, "labels", LabelSignal(self.labels))

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class GraphBundle:
    """One topology under three edge weightings.

    g_unweighted has unit lengths, g_dissimilarity carries pointwise
    distances as lengths, and g_similarity additionally carries the kernel
    similarity on every edge.
    """

    g_unweighted: WeightedGraph
    g_dissimilarity: WeightedGraph
    g_similarity: WeightedGraph

    def __post_init__(self):
        keys = self.g_unweighted.edge_keys()
        if (self.g_dissimilarity.edge_keys() != keys
                or self.g_similarity.edge_keys() != keys
                or self.g_unweighted.n != self.g_dissimilarity.n
                or self.g_unweighted.n != self.g_similarity.n):
            raise GraphError("bundle graphs must share nodes and edges")

    @property
    def n(self) -> int:
        return self.g_unweighted.n


def gen_two_circles(seed: int, inner_count: int = 900, outer_count: int = 100,
                    inner_radius: float = 1.0, outer_radius: float = 1.024,
                    inner_spread: float = 0.004, outer_spread: float = 0.002,
                    outer_arc: float = 0.19) -> FeatureDataset:
    """Two concentric noisy circles; inner nodes labeled -1, outer +1.

    Points sit at evenly spaced angles with radius drawn from a normal
    distribution (spread is the standard deviation) and clamped to at least
    0.01. Inner points come first and cover the full circle; the outer
    points cover the leading `outer_arc` fraction of it.

    The defaults are calibrated jointly rather than independently: the
    outer class is concentrated on a short arc so its within-class spacing
    stays comparable to the inner ring's (keeping the Gaussian-kernel
    similarity graph coherent inside both classes), while the radial gap is
    wide enough that the between-class edges created by 4-NN adoption are
    the longest edges in the graph and form a single contiguous cut
    cluster. The spreads are kept small enough that radial tails from the
    two classes cannot collide: a collision produces a between-class edge
    as strong as a within-class one, which smears the class split across
    the Laplacian spectrum instead of leaving it concentrated in the low
    modes that spectral completion relies on. Spreading the outer class
    over the full circle, or inflating its radial spread, fragments it
    into islands and changes the sampling problem qualitatively.
    """
    rng = np.random.default_rng(seed)
    parts = []
    labels = []
    for count, radius, spread, label, arc in (
        (inner_count, inner_radius, inner_spread, -1, 1.0),
        (outer_count, outer_radius, outer_spread, 1, outer_arc),
    ):
        angles = 2.0 * math.pi * arc * np.arange(count) / count
        radii = rng.normal(radius, spread, size=count)
        radii = np.maximum(radii, 0.01)
        parts.append(np.column_stack([radii * np.cos(angles), radii * np.sin(angles)]))
        labels.extend([label] * count)
    return FeatureDataset(
        points=np.vstack(parts),
        labels=LabelSignal(np.array(labels)),
        metric="euclidean",
    )


def pairwise_distances(ds: FeatureDataset) -> np.ndarray:
    """Full pointwise distance matrix under the dataset's metric."""
    if ds.metric == "euclidean":
        sq = np.sum(ds.points ** 2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (ds.points @ ds.points.T)
        np.maximum(d2, 0.0, out=d2)
        return np.sqrt(d2)
    sims = pairwise_similarities(ds)
    return np.sqrt(np.maximum(1.0 - sims ** 2, 0.0))


def pairwise_similarities(ds: FeatureDataset) -> np.ndarray:
    """Cosine similarity matrix; only defined for the cosine metric."""
    if ds.metric != "cosine":
        raise GraphError("similarity matrix is defined for the cosine metric")
    norms = np.linalg.norm(ds.points, axis=1)
    return (ds.points @ ds.points.T) / np.outer(norms, norms)


def knn_edge_keys(ds: FeatureDataset, k: int, dist: np.ndarray | None = None) -> list:
    """Symmetrized k-nearest-neighbor edge keys, distance ties by smaller index."""
    n = ds.n
    if not (1 <= k < n):
        raise GraphError(f"k must lie in 1..{n - 1}")
    if dist is None:
        dist = pairwise_distances(ds)
    keys = set()
    for i in range(n):
        order = np.argsort(dist[i], kind="stable")
        picked = 0
        for j in order:
            j = int(j)
            if j == i:
                continue
            keys.add((i, j) if i < j else (j, i))
            picked += 1
            if picked == k:
                break
    return sorted(keys)


def kth_neighbor_scale(ds: FeatureDataset, k: int, dist: np.ndarray | None = None) -> float:
    """One third of the average distance to the k-th nearest neighbor."""
    if dist is None:
        dist = pairwise_distances(ds)
    n = ds.n
    kth = np.empty(n)
    for i in range(n):
        row = np.delete(dist[i], i)
        row.sort(kind="stable")
        kth[i] = row[k - 1]
    return float(kth.mean() / 3.0)


def build_bundle(ds: FeatureDataset, k: int) -> GraphBundle:
    """k-NN graph bundle: unit lengths, distance lengths, kernel similarities.

    Euclidean data gets Gaussian similarities exp(-d^2 / (2 sigma^2)) with
    sigma a third of the average k-th-neighbor distance; cosine data uses the
    cosine similarity directly with distance sqrt(1 - w^2).
    """
    dist = pairwise_distances(ds)
    keys = knn_edge_keys(ds, k, dist=dist)
    if ds.metric == "euclidean":
        sigma = kth_neighbor_scale(ds, k, dist=dist)
        if sigma <= 0.0:
            raise GraphError("degenerate scale: all k-th neighbor distances are zero")
        def sim_of(u, v):
            return math.exp(-dist[u, v] ** 2 / (2.0 * sigma * sigma))
    else:
        sims = pairwise_similarities(ds)
        def sim_of(u, v):
            return max(float(sims[u, v]), 0.0)
    unweighted = []
    dissim = []
    similar = []
    for u, v in keys:
        d = float(dist[u, v])
        length = max(d, MIN_EDGE_LENGTH)
        w = sim_of(u, v)
        unweighted.append((u, v, 1.0))
        dissim.append((u, v, length))
        similar.append((u, v, length, w))
    return GraphBundle(
        g_unweighted=WeightedGraph.from_edges(ds.n, unweighted),
        g_dissimilarity=WeightedGraph.from_edges(ds.n, dissim),
        g_similarity=WeightedGraph.from_edges(ds.n, similar),
    )


# --- CSV ingestion -----------------------------------------------------------

def _feature_header(d: int) -> list:
    return ["label"] + [f"f{i}" for i in range(d)]


def save_features_csv(ds: FeatureDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_feature_header(ds.points.shape[1]))
        for label, row in zip(ds.labels.values, ds.points):
            writer.writerow([int(label)] + [repr(float(x)) for x in row])


def loads_features_csv(text: str, metric: str = "euclidean") -> FeatureDataset:
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        raise GraphError("empty features file")
    header = rows[0]
    if len(header) < 2 or header[0] != "label":
        raise GraphError("features header must be label,f0,...")
    d = len(header) - 1
    if header != _feature_header(d):
        raise GraphError("features header must be label,f0,...")
    labels = []
    points = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != d + 1:
            raise GraphError(f"line {lineno}: expected {d + 1} fields, got {len(row)}")
        try:
            label = int(row[0])
            feats = [float(x) for x in row[1:]]
        except ValueError:
            raise GraphError(f"line {lineno}: malformed value") from None
        if label not in (-1, 1):
            raise GraphError(f"line {lineno}: label must be +1 or -1")
        labels.append(label)
        points.append(feats)
    if len(points) < 2:
        raise GraphError("need at least two feature rows")
    return FeatureDataset(
        points=np.array(points), labels=LabelSignal(np.array(labels)), metric=metric
    )


def load_features_csv(path, metric: str = "euclidean") -> FeatureDataset:
    with open(path) as fh:
        return loads_features_csv(fh.read(), metric=metric)
