"""Spectral sampling and reconstruction on similarity graphs.

Sampling greedily grows a set that maximizes the estimated bandwidth a
signal may have while vanishing off the sampled set: each step takes the
smallest eigenpair of a power of the Laplacian restricted to the unsampled
rows and columns and samples the node carrying the largest squared
eigenvector entry. Reconstruction alternates projections between the set of
vectors agreeing with the observed samples and the span of the
lowest-frequency Laplacian eigenvectors.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .graph import GraphError, LabelSignal, WeightedGraph

RANK_RULES = ("sample-count", "estimated-cutoff")
LAPLACIAN_KINDS = ("combinatorial", "normalized")

_DENSE_EIG_SIZE = 128

# inverse-iteration budget for the restricted eigensolver
_INV_MAX_ITERS = 8
_INV_TOL = 1e-8


@dataclass
class SpectralConfig:
    proxy_power: int = 4
    pocs_max_iters: int = 500
    pocs_tol: float = 1e-6
    cutoff_rank_rule: str = "estimated-cutoff"
    laplacian: str = "combinatorial"

    def __post_init__(self):
        if self.proxy_power < 1:
            raise ValueError("proxy_power must be a positive integer")
        if self.pocs_max_iters < 1:
            raise ValueError("pocs_max_iters must be a positive integer")
        if not (self.pocs_tol > 0):
            raise ValueError("pocs_tol must be positive")
        if self.cutoff_rank_rule not in RANK_RULES:
            raise ValueError(f"cutoff_rank_rule must be one of {RANK_RULES}")
        if self.laplacian not in LAPLACIAN_KINDS:
            raise ValueError(f"laplacian must be one of {LAPLACIAN_KINDS}")


@dataclass(frozen=True, eq=False)
class SoftLabels:
    """Real-valued label estimates prior to thresholding."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("soft labels must be a 1-d vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("soft labels must be finite")
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return int(self.values.size)


class LaplacianModel:
    """A graph Laplacian with cached eigendecomposition and powers.

    Dense symmetric eigendecomposition; meant for graphs up to a few
    thousand nodes.
    """

    def __init__(self, matrix: np.ndarray):
        arr = np.asarray(matrix, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("Laplacian must be square")
        if not np.allclose(arr, arr.T, atol=1e-10):
            raise ValueError("Laplacian must be symmetric")
        self.matrix = arr
        self._eig = None
        self._powers = {1: arr}
        self._sparse = None
        self._sparse_powers = {}

    @property
    def sparse(self):
        if self._sparse is None:
            self._sparse = sparse.csr_matrix(self.matrix)
        return self._sparse

    @classmethod
    def from_graph(cls, g: WeightedGraph, kind: str = "combinatorial") -> "LaplacianModel":
        """Laplacian of a similarity graph; edges without a similarity count 1."""
        if kind not in LAPLACIAN_KINDS:
            raise ValueError(f"laplacian kind must be one of {LAPLACIAN_KINDS}")
        n = g.n
        w = np.zeros((n, n), dtype=np.float64)
        for u, v, _, sim in g.edge_items():
            weight = 1.0 if sim is None else sim
            w[u, v] = weight
            w[v, u] = weight
        deg = w.sum(axis=1)
        lap = np.diag(deg) - w
        if kind == "normalized":
            inv_sqrt = np.zeros(n)
            nz = deg > 0
            inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
            lap = lap * inv_sqrt[:, None] * inv_sqrt[None, :]
        return cls(lap)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def _eigendata(self):
        if self._eig is None:
            vals, vecs = np.linalg.eigh(self.matrix)
            self._eig = (vals, vecs)
        return self._eig

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eigendata()[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eigendata()[1]

    def power_matrix(self, k: int) -> np.ndarray:
        if k not in self._powers:
            self._powers[k] = np.linalg.matrix_power(self.matrix, k)
        return self._powers[k]

    def sparse_power(self, k: int):
        if k not in self._sparse_powers:
            p = self.sparse
            for _ in range(k - 1):
                p = p @ self.sparse
            self._sparse_powers[k] = p.tocsr()
        return self._sparse_powers[k]


def _proxy_quadratic(model: LaplacianModel, k: int, y: np.ndarray) -> float:
    """y^T L^k y via sparse mat-vecs, split as a norm to dodge cancellation.

    The restricted eigenvalues of L^k can sit many orders of magnitude below
    eps * lambda_max^k, so forming L^k and reading a Rayleigh quotient off it
    loses them entirely. Splitting the power as (L^a y) . (L^b y) with
    a = floor(k/2) keeps the value a nonnegative quadratic evaluated at full
    relative precision.
    """
    lap = model.sparse
    u = y
    for _ in range(k // 2):
        u = lap @ u
    if k % 2:
        return float(u @ (lap @ u))
    return float(u @ u)


def _smallest_restricted_eigpair(model: LaplacianModel, cfg: SpectralConfig,
                                 rest: np.ndarray, warm: np.ndarray | None,
                                 step: int):
    """Smallest eigenpair of the proxy operator restricted to `rest`.

    Returns (value, eigenvector, warm vector for the next restriction).
    Small systems use exact dense decomposition. Larger ones run
    shift-invert inverse iteration at zero: the restricted power of the
    Laplacian stays sparse, so one LU factorization plus a few solves pins
    the bottom eigenvector even when the bottom eigenvalue is far below
    what a dense solver can resolve against lambda_max^k roundoff. The
    eigenvalue is then read back through the split quadratic form rather
    than from the solver. A failed factorization (singular restriction)
    falls back to the dense path.
    """
    k = cfg.proxy_power
    m = rest.size
    n = model.n
    if m == 1:
        y = np.zeros(n)
        y[rest[0]] = 1.0
        return _proxy_quadratic(model, k, y), np.ones(1), np.ones(1)

    def dense():
        lk = model.power_matrix(k)
        try:
            vals, vecs = np.linalg.eigh(lk[np.ix_(rest, rest)])
        except np.linalg.LinAlgError as exc:
            raise GraphError(f"eigensolver failed at selection step {step}") from exc
        return float(vals[0]), vecs[:, 0], vecs[:, 0]

    if m == n and m > _DENSE_EIG_SIZE:
        # unrestricted: L^k shares L's eigenvectors, in the same order
        vals, vecs = model.eigenvalues, model.eigenvectors
        return float(vals[0]) ** k, vecs[:, 0].copy(), vecs[:, 0].copy()
    if m <= _DENSE_EIG_SIZE:
        return dense()

    sub = model.sparse_power(k)[rest][:, rest].tocsc()
    try:
        lu = splu(sub)
    except RuntimeError:
        return dense()

    if warm is not None and warm.shape == (m,) and np.all(np.isfinite(warm)):
        x = warm.copy()
    else:
        x = np.ones(m)
    x /= np.linalg.norm(x)
    val = None
    for _ in range(_INV_MAX_ITERS):
        x = lu.solve(x)
        nrm = np.linalg.norm(x)
        if not np.isfinite(nrm) or nrm == 0.0:
            return dense()
        x /= nrm
        y = np.zeros(n)
        y[rest] = x
        prev, val = val, _proxy_quadratic(model, k, y)
        if prev is not None and abs(val - prev) <= _INV_TOL * max(val, 1e-300):
            break
    return max(val, 0.0), x, x


def _first_node_by_cutoff(model: LaplacianModel, cfg: SpectralConfig) -> int:
    """Exhaustive first pick: the singleton whose estimated cutoff is largest.

    On a connected graph the unrestricted smallest eigenvector is constant,
    so its squared entries carry no preference for the first sample. Scan
    every node and keep the one whose grounding raises the smallest
    restricted eigenvalue the most; ties go to the smallest node id.
    """
    all_nodes = np.arange(model.n)
    best_val = -np.inf
    best_node = 0
    for v in range(model.n):
        rest = np.delete(all_nodes, v)
        val, _, _ = _smallest_restricted_eigpair(model, cfg, rest, None, step=0)
        if val > best_val:
            best_val = val
            best_node = v
    return best_node


def cutoff_selection_iter(model: LaplacianModel, cfg: SpectralConfig):
    """Yield the greedy sampling order one node at a time.

    Each step picks the largest squared entry of the smallest eigenvector of
    the proxy operator restricted to the unsampled set; ties go to the
    smallest node id. The first pick is special-cased to an exhaustive scan
    over singletons because the unrestricted smallest eigenvector carries no
    preference. Deterministic, so the order for a smaller budget is a prefix
    of the order for a larger one.
    """
    remaining = np.arange(model.n)
    warm = None
    step = 0
    while remaining.size:
        if step == 0 and remaining.size > 1:
            idx = _first_node_by_cutoff(model, cfg)
        else:
            _, vec, basis = _smallest_restricted_eigpair(model, cfg, remaining, warm, step)
            scores = vec * vec
            idx = int(np.argmax(scores))
            warm = np.delete(basis, idx, axis=0)
        yield int(remaining[idx])
        remaining = np.delete(remaining, idx)
        step += 1


def cutoff_greedy_select(model: LaplacianModel, cfg: SpectralConfig, budget: int) -> list:
    """First `budget` nodes of the greedy sampling order."""
    n = model.n
    if not (1 <= budget <= n):
        raise ValueError(f"budget must lie in 1..{n}")
    return list(itertools.islice(cutoff_selection_iter(model, cfg), budget))


def estimated_cutoff(model: LaplacianModel, cfg: SpectralConfig, sampled) -> float:
    """Estimated bandwidth below which signals are recoverable from `sampled`."""
    rest = np.array(sorted(set(range(model.n)) - set(sampled)), dtype=np.intp)
    if rest.size == 0:
        return float("inf")
    val, _, _ = _smallest_restricted_eigpair(model, cfg, rest, None, step=len(sampled))
    return max(val, 0.0) ** (1.0 / cfg.proxy_power)


def _projection_rank(model, cfg, samples) -> int:
    if cfg.cutoff_rank_rule == "sample-count":
        return min(len(samples), model.n)
    omega = estimated_cutoff(model, cfg, samples)
    rank = int(np.sum(model.eigenvalues < omega))
    return max(rank, 1)


def pocs_reconstruct(model: LaplacianModel, samples: dict, cfg: SpectralConfig,
                     history: list | None = None) -> SoftLabels:
    """Alternating projections between sample consistency and low frequency.

    samples maps node id -> observed value, +/-1 labels in ordinary use but
    any finite real (e.g. a bandlimited signal's samples) is accepted. Each
    sweep resets the sampled entries to their observations and projects onto
    the span of the lowest-frequency eigenvectors; iteration stops when
    successive projected iterates differ by less than cfg.pocs_tol in max
    norm, or after cfg.pocs_max_iters sweeps. A final reset makes the
    sampled entries exact. If provided, `history` collects the successive
    max-norm differences.
    """
    if not samples:
        raise ValueError("need at least one sample")
    n = model.n
    idx = np.array(sorted(samples), dtype=np.int64)
    if idx[0] < 0 or idx[-1] >= n:
        raise ValueError("sample node out of range")
    obs = np.array([float(samples[i]) for i in idx])
    if not np.all(np.isfinite(obs)):
        raise ValueError("observations must be finite")
    rank = _projection_rank(model, cfg, samples)
    basis = model.eigenvectors[:, :rank]
    x = np.zeros(n)
    prev = None
    for _ in range(cfg.pocs_max_iters):
        x[idx] = obs
        x = basis @ (basis.T @ x)
        if prev is not None:
            diff = float(np.max(np.abs(x - prev)))
            if history is not None:
                history.append(diff)
            if diff < cfg.pocs_tol:
                break
        prev = x.copy()
    x[idx] = obs
    return SoftLabels(x)


def threshold(soft: SoftLabels) -> LabelSignal:
    """Sign of the soft labels, with exact zero mapping to +1."""
    values = soft.values
    if not np.all(np.isfinite(values)):
        raise ValueError("soft labels must be finite")
    return LabelSignal(np.where(values >= 0, 1, -1).astype(np.int8))


def write_eigenvalues_csv(model: LaplacianModel, path) -> None:
    """Dump the Laplacian spectrum for diagnostics."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue"])
        for i, val in enumerate(model.eigenvalues):
            writer.writerow([i, repr(float(val))])
