"""Weighted undirected graphs: shortest paths, connectivity, label cuts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _csgraph_components
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

METRICS = ("length", "hop")


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LabelSignal:
    """A vector of +/-1 node labels."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 1 or arr.size == 0:
            raise GraphError("labels must be a nonempty 1-d sequence")
        if not np.all(np.isin(arr, (-1, 1))):
            raise GraphError("labels must be +1 or -1")
        object.__setattr__(self, "values", arr.astype(np.int8))

    def __len__(self):
        return int(self.values.size)

    def __getitem__(self, i):
        return int(self.values[i])

    def flipped(self) -> "LabelSignal":
        return LabelSignal(-self.values)


class WeightedGraph:
    """Undirected graph with positive finite edge lengths.

    Node ids are 0..n-1, at most one edge per pair, no self loops. Each edge
    may carry an optional nonnegative similarity weight alongside its length.
    Instances are immutable; `remove_edge` returns a new graph that shares
    untouched adjacency rows with its parent.
    """

    __slots__ = ("n", "_edges", "_adj", "_csr")

    def __init__(self, n, edges, adj, _internal=False):
        if not _internal:
            raise TypeError("use WeightedGraph.from_edges")
        self.n = n
        self._edges = edges  # (u, v) sorted key -> (length, similarity or None)
        self._adj = adj  # node -> {neighbor: length}, neighbors ascending
        self._csr = None

    @classmethod
    def from_edges(cls, n, edges):
        """Build a graph from (u, v, length) or (u, v, length, similarity) tuples."""
        if n < 1:
            raise GraphError("graph needs at least one node")
        table = {}
        for item in edges:
            if len(item) == 3:
                u, v, length = item
                sim = None
            elif len(item) == 4:
                u, v, length, sim = item
            else:
                raise GraphError(f"edge tuple of arity {len(item)}")
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self loop at node {u}")
            length = float(length)
            if not np.isfinite(length) or length <= 0:
                raise GraphError(f"edge ({u}, {v}) needs a positive finite length")
            if sim is not None:
                sim = float(sim)
                if not np.isfinite(sim) or sim < 0:
                    raise GraphError(f"edge ({u}, {v}) similarity must be finite and >= 0")
            key = (u, v) if u < v else (v, u)
            if key in table:
                raise GraphError(f"duplicate edge {key}")
            table[key] = (length, sim)
        ordered = dict(sorted(table.items()))
        adj = [dict() for _ in range(n)]
        for (u, v), (length, _) in ordered.items():
            adj[u][v] = length
            adj[v][u] = length
        adj = [dict(sorted(row.items())) for row in adj]
        return cls(n, ordered, adj, _internal=True)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def has_edge(self, u, v) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edges

    def length(self, u, v) -> float:
        key = (u, v) if u < v else (v, u)
        try:
            return self._edges[key][0]
        except KeyError:
            raise GraphError(f"no edge {key}") from None

    def similarity(self, u, v):
        key = (u, v) if u < v else (v, u)
        try:
            return self._edges[key][1]
        except KeyError:
            raise GraphError(f"no edge {key}") from None

    def neighbors(self, u) -> list:
        return list(self._adj[u])

    def neighbor_lengths(self, u):
        """Iterate (neighbor, length) pairs in ascending neighbor order."""
        return self._adj[u].items()

    def degree(self, u) -> int:
        return len(self._adj[u])

    def edge_items(self):
        """Iterate (u, v, length, similarity) with u < v, ascending."""
        for (u, v), (length, sim) in self._edges.items():
            yield u, v, length, sim

    def edge_keys(self) -> set:
        return set(self._edges)

    def same_topology(self, other) -> bool:
        return self.n == other.n and self._edges.keys() == other._edges.keys()

    def remove_edge(self, u, v) -> "WeightedGraph":
        key = (u, v) if u < v else (v, u)
        if key not in self._edges:
            raise GraphError(f"no edge {key}")
        edges = dict(self._edges)
        del edges[key]
        adj = list(self._adj)
        a, b = key
        adj[a] = {w: l for w, l in self._adj[a].items() if w != b}
        adj[b] = {w: l for w, l in self._adj[b].items() if w != a}
        return WeightedGraph(self.n, edges, adj, _internal=True)

    @property
    def csr(self) -> csr_matrix:
        if self._csr is None:
            m = len(self._edges)
            rows = np.empty(2 * m, dtype=np.int32)
            cols = np.empty(2 * m, dtype=np.int32)
            data = np.empty(2 * m, dtype=np.float64)
            for i, ((u, v), (length, _)) in enumerate(self._edges.items()):
                rows[2 * i], cols[2 * i], data[2 * i] = u, v, length
                rows[2 * i + 1], cols[2 * i + 1], data[2 * i + 1] = v, u, length
            self._csr = csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        return self._csr


def distances(g: WeightedGraph, sources, metric: str = "length") -> np.ndarray:
    """Shortest-path distances from a set of sources to every node.

    Returns an array of size n holding, per node, the minimum distance to any
    source; unreachable nodes get inf. metric="hop" counts edges instead of
    summing lengths.
    """
    if metric not in METRICS:
        raise GraphError(f"unknown metric {metric!r}")
    sources = list(sources)
    if not sources:
        raise GraphError("need at least one source")
    out = _csgraph_dijkstra(
        g.csr,
        directed=False,
        indices=sources,
        min_only=True,
        unweighted=(metric == "hop"),
    )
    return np.atleast_1d(out)


def _lex_walk(g: WeightedGraph, start, goal, dist_to_goal, metric) -> list:
    """Walk the lexicographically smallest shortest path from start to goal.

    dist_to_goal must be a distance array computed from goal. At every step
    the smallest neighbor that still lies on a shortest path is taken, which
    yields the lexicographically smallest node sequence among shortest paths.
    """
    hop = metric == "hop"
    path = [start]
    cur = start
    while cur != goal:
        here = dist_to_goal[cur]
        nxt = None
        for w, length in g.neighbor_lengths(cur):
            step = 1.0 if hop else length
            if dist_to_goal[w] + step == here:
                nxt = w
                break
        if nxt is None:
            raise GraphError("shortest-path walk failed to make progress")
        path.append(nxt)
        cur = nxt
    return path


def shortest_path(g: WeightedGraph, u, v, metric: str = "length"):
    """Shortest path between two nodes, or None if disconnected.

    Returns (distance, node sequence). Among equally short paths the
    lexicographically smallest node sequence is returned.
    """
    if metric not in METRICS:
        raise GraphError(f"unknown metric {metric!r}")
    for x in (u, v):
        if not (0 <= x < g.n):
            raise GraphError(f"node {x} out of range")
    if u == v:
        return 0.0, [u]
    d = distances(g, [v], metric=metric)
    if not np.isfinite(d[u]):
        return None
    return float(d[u]), _lex_walk(g, u, v, d, metric)


def connected_components(g: WeightedGraph) -> list:
    """Connected components as sorted node lists, ordered by smallest member."""
    _, labels = _csgraph_components(g.csr, directed=False)
    groups = {}
    for node, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(node)
    return sorted((sorted(nodes) for nodes in groups.values()), key=lambda c: c[0])


@dataclass(frozen=True, eq=False)
class CutStructure:
    """Everything the label cut determines about a graph and signal.

    cut_edges joins oppositely labeled endpoints; boundary collects their
    endpoints; regions are the connected identically-labeled node groups left
    after deleting the cut; component_edges buckets cut edges by the region
    pair they join. diameter is the largest finite pairwise shortest-path
    distance, and min_region_fraction the smallest region size over n.
    """

    cut_edges: tuple
    boundary: tuple
    regions: tuple
    component_edges: dict
    num_components: int
    min_cut_length: float | None
    diameter: float
    min_region_fraction: float


def strip_cut(g: WeightedGraph, f: LabelSignal) -> WeightedGraph:
    """The input graph with every cut edge removed."""
    if len(f) != g.n:
        raise GraphError("label vector length does not match node count")
    keep = [
        (u, v, length, sim)
        for u, v, length, sim in g.edge_items()
        if f[u] == f[v]
    ]
    return WeightedGraph.from_edges(g.n, keep)


def cut_structure(g: WeightedGraph, f: LabelSignal) -> CutStructure:
    """Extract the cut of a labeled graph along with its summary quantities."""
    if len(f) != g.n:
        raise GraphError("label vector length does not match node count")
    cut = []
    lengths = []
    for u, v, length, _ in g.edge_items():
        if f[u] != f[v]:
            cut.append((u, v))
            lengths.append(length)
    boundary = sorted({x for e in cut for x in e})
    residual = strip_cut(g, f)
    regions = connected_components(residual)
    region_of = np.empty(g.n, dtype=np.int64)
    for i, comp in enumerate(regions):
        region_of[comp] = i
    component_edges = {}
    for u, v in cut:
        i, j = region_of[u], region_of[v]
        key = (int(min(i, j)), int(max(i, j)))
        component_edges.setdefault(key, []).append((u, v))
    component_edges = {k: tuple(v) for k, v in sorted(component_edges.items())}
    dist = _csgraph_dijkstra(g.csr, directed=False)
    diameter = float(dist[np.isfinite(dist)].max())
    return CutStructure(
        cut_edges=tuple(cut),
        boundary=tuple(boundary),
        regions=tuple(tuple(c) for c in regions),
        component_edges=component_edges,
        num_components=len(component_edges),
        min_cut_length=(min(lengths) if lengths else None),
        diameter=diameter,
        min_region_fraction=min(len(c) for c in regions) / g.n,
    )


# --- serialization -----------------------------------------------------------

def graph_to_text(g: WeightedGraph) -> str:
    lines = [f"n={g.n}"]
    for u, v, length, sim in g.edge_items():
        if sim is None:
            lines.append(f"{u} {v} {length!r}")
        else:
            lines.append(f"{u} {v} {length!r} {sim!r}")
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> WeightedGraph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise GraphError("missing n=<count> header")
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise GraphError(f"bad header {lines[0]!r}") from None
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) not in (3, 4):
            raise GraphError(f"bad edge line {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            length = float(parts[2])
            sim = float(parts[3]) if len(parts) == 4 else None
        except ValueError:
            raise GraphError(f"bad edge line {ln!r}") from None
        edges.append((u, v, length) if sim is None else (u, v, length, sim))
    return WeightedGraph.from_edges(n, edges)


def labels_to_text(f: LabelSignal) -> str:
    return "\n".join(str(int(x)) for x in f.values) + "\n"


def labels_from_text(text: str) -> LabelSignal:
    values = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        if ln not in ("1", "-1", "+1"):
            raise GraphError(f"bad label line {ln!r}")
        values.append(int(ln))
    if not values:
        raise GraphError("empty label file")
    return LabelSignal(np.array(values))


def save_graph(g: WeightedGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(graph_to_text(g))


def load_graph(path) -> WeightedGraph:
    with open(path) as fh:
        return graph_from_text(fh.read())


def save_labels(f: LabelSignal, path) -> None:
    with open(path, "w") as fh:
        fh.write(labels_to_text(f))


def load_labels(path) -> LabelSignal:
    with open(path) as fh:
        return labels_from_text(fh.read())
