"""Weighted graphs, random generators and Laplacian spectra.

Edge convention: ``W[i, j]`` is the weight of the edge ``j -> i``, so the
degree of node ``i`` is the row sum ``sum_j W[i, j]`` (weighted in-degree)
and the Laplacian is ``L = diag(d) - W``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import EdgeListParseError, NumericalError, ParameterError


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Dense weighted graph on ``n`` nodes.

    Parameters
    ----------
    weights : (n, n) array
        Non-negative weights, ``weights[i, j]`` for edge ``j -> i``.
    undirected : bool
        If set, ``weights`` must be exactly symmetric.
    labels : (n,) int array, optional
        Ground-truth cluster labels, when the generator knows them.
    """

    weights: np.ndarray
    undirected: bool = False
    labels: np.ndarray | None = None

    def __post_init__(self):
        W = np.array(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] == 0:
            raise ParameterError(f"weights must be a non-empty square matrix, got {W.shape}")
        if not np.all(np.isfinite(W)):
            raise ParameterError("weights must be finite")
        if np.any(W < 0):
            raise ParameterError("weights must be non-negative")
        if np.any(np.diag(W) != 0):
            raise ParameterError("self-loops are not allowed")
        if self.undirected and not np.array_equal(W, W.T):
            raise ParameterError("undirected graph has asymmetric weights")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=int)
            if labels.shape != (W.shape[0],):
                raise ParameterError("labels must have one entry per node")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def edge_count(self) -> int:
        """Number of directed edges (an undirected edge counts twice)."""
        return int(np.count_nonzero(self.weights))

    def mean_weight(self) -> float:
        nz = self.weights[self.weights > 0]
        return float(nz.mean()) if nz.size else 0.0

    def to_dict(self) -> dict:
        rows, cols = np.nonzero(self.weights)
        if self.undirected:
            keep = rows < cols
            rows, cols = rows[keep], cols[keep]
        # stored as [src, dst, w]
        edges = [[int(j), int(i), float(self.weights[i, j])] for i, j in zip(rows, cols)]
        doc = {"n": self.n, "directed": not self.undirected, "edges": edges}
        if self.labels is not None:
            doc["labels"] = [int(x) for x in self.labels]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "WeightedDigraph":
        n = int(doc["n"])
        undirected = not doc.get("directed", True)
        W = np.zeros((n, n))
        for src, dst, w in doc.get("edges", []):
            src, dst = int(src), int(dst)
            if not (0 <= src < n and 0 <= dst < n):
                raise ParameterError(f"edge ({src}, {dst}) out of range for n={n}")
            W[dst, src] += float(w)
            if undirected:
                W[src, dst] = W[dst, src]
        return cls(W, undirected=undirected, labels=doc.get("labels"))

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load_json(cls, path) -> "WeightedDigraph":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class Laplacian:
    matrix: np.ndarray
    source: WeightedDigraph | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class DegreeStats:
    d_min: float
    d_max: float
    mean_degree: float
    mean_sq_degree: float
    degrees: np.ndarray


def _check_range(weight_range):
    lo, hi = map(float, weight_range)
    if lo < 0 or hi < lo:
        raise ParameterError(f"invalid weight range {weight_range!r}")
    return lo, hi


def _check_prob(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p}")


def generate_erdos_renyi(n, p, weight_range=(0.0, 1.0), directed=True, seed=0):
    """Erdos-Renyi graph with uniformly distributed edge weights.

    Every ordered pair ``(i, j)``, ``i != j``, carries an edge with
    probability ``p`` (unordered pairs when ``directed`` is false).
    """
    if n < 1:
        raise ParameterError("n must be positive")
    _check_prob(p)
    lo, hi = _check_range(weight_range)
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    w = rng.uniform(lo, hi, size=(n, n))
    W = np.where(mask, w, 0.0)
    if directed:
        np.fill_diagonal(W, 0.0)
    else:
        W = np.triu(W, 1)
        W = W + W.T
    return WeightedDigraph(W, undirected=not directed)


def generate_planted_partition(clusters, cluster_size, p_in, p_out,
                               weight_range=(0.0, 1.0), seed=0):
    """Undirected planted-partition graph; labels are stored on the result."""
    if clusters < 1 or cluster_size < 1:
        raise ParameterError("clusters and cluster_size must be positive")
    _check_prob(p_in, "p_in")
    _check_prob(p_out, "p_out")
    lo, hi = _check_range(weight_range)
    n = clusters * cluster_size
    labels = np.repeat(np.arange(clusters), cluster_size)
    rng = np.random.default_rng(seed)
    same = labels[:, None] == labels[None, :]
    prob = np.where(same, p_in, p_out)
    mask = rng.random((n, n)) < prob
    w = rng.uniform(lo, hi, size=(n, n))
    W = np.triu(np.where(mask, w, 0.0), 1)
    return WeightedDigraph(W + W.T, undirected=True, labels=labels)


def generate_degree_targeted(n, mean_edges, sd_edges, weight_range=(0.0, 1.0), seed=0):
    """Directed graph whose in-edge counts follow a rounded normal law.

    Each node draws ``round(N(mean_edges, sd_edges))`` clipped to
    ``[0, n-1]`` and picks that many distinct in-neighbours uniformly.
    """
    if mean_edges <= 0:
        raise ParameterError("mean_edges must be positive")
    if mean_edges >= n:
        raise ParameterError("mean_edges must be smaller than n")
    if sd_edges < 0:
        raise ParameterError("sd_edges must be non-negative")
    lo, hi = _check_range(weight_range)
    rng = np.random.default_rng(seed)
    counts = np.clip(np.rint(rng.normal(mean_edges, sd_edges, size=n)), 0, n - 1).astype(int)
    W = np.zeros((n, n))
    for i in range(n):
        others = np.delete(np.arange(n), i)
        src = rng.choice(others, size=counts[i], replace=False)
        W[i, src] = rng.uniform(lo, hi, size=counts[i])
    return WeightedDigraph(W)


def generate_hub_graph(n, hub_degree, background_degree=4.0, hub=0, seed=0):
    """Undirected unweighted graph with one dominant hub.

    A sparse Erdos-Renyi background of the given mean degree, plus a hub
    joined to ``hub_degree`` random nodes. Extra components are stitched
    to the giant one by a single edge each, avoiding the hub, so the
    result is connected and the hub degree is exact.
    """
    if not 0 <= hub < n:
        raise ParameterError("hub index out of range")
    if not 1 <= hub_degree <= n - 1:
        raise ParameterError("hub_degree must lie in [1, n-1]")
    rng = np.random.default_rng(seed)
    p = min(1.0, background_degree / max(n - 1, 1))
    A = np.triu(rng.random((n, n)) < p, 1)
    A = A | A.T
    A[hub, :] = False
    A[:, hub] = False
    nbrs = rng.choice(np.delete(np.arange(n), hub), size=hub_degree, replace=False)
    A[hub, nbrs] = A[nbrs, hub] = True

    ncomp, comp = connected_components(A.astype(float), directed=False)
    if ncomp > 1:
        giant = np.argmax(np.bincount(comp))
        anchors = np.flatnonzero((comp == giant) & (np.arange(n) != hub))
        for c in range(ncomp):
            if c == giant:
                continue
            members = np.flatnonzero((comp == c) & (np.arange(n) != hub))
            a, b = rng.choice(members), rng.choice(anchors)
            A[a, b] = A[b, a] = True
    return WeightedDigraph(A.astype(float), undirected=True)


def laplacian(g: WeightedDigraph) -> Laplacian:
    L = -g.weights.copy()
    np.fill_diagonal(L, g.degrees)
    return Laplacian(L, g)


def exact_spectrum(lap):
    """Dense eigen-decomposition of a Laplacian, sorted by real part.

    Returns complex eigenvalues and the matching eigenvectors (columns).
    Symmetric Laplacians go through ``eigh`` so that the eigenvectors are
    real and orthonormal.
    """
    L = lap.matrix if isinstance(lap, Laplacian) else np.asarray(lap, dtype=float)
    try:
        if np.array_equal(L, L.T):
            vals, vecs = np.linalg.eigh(L)
            vals = vals.astype(complex)
        else:
            vals, vecs = np.linalg.eig(L)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    order = np.lexsort((vals.imag, np.round(vals.real, 12)))
    vals, vecs = vals[order], vecs[:, order]
    scale = max(np.linalg.norm(L, 2), 1.0)
    resid = np.linalg.norm(L @ vecs - vecs * vals, axis=0)
    if np.any(resid > 1e-8 * scale):
        raise NumericalError(f"eigen-residual {resid.max():.2e} too large")
    return vals, vecs


def degree_stats(g: WeightedDigraph) -> DegreeStats:
    d = g.degrees
    return DegreeStats(
        d_min=float(d.min()),
        d_max=float(d.max()),
        mean_degree=float(d.mean()),
        mean_sq_degree=float(np.mean(d ** 2)),
        degrees=d,
    )


def load_edge_list(path, n=None, undirected=False):
    """Read a whitespace-separated ``src dst [weight]`` edge list.

    Node ids are 0-based. Missing weights default to 1 and duplicate edges
    add up. ``n`` defaults to one more than the largest id seen; when it is
    given, ids beyond it are rejected. Lines starting with ``#`` are skipped.
    """
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise EdgeListParseError(lineno, f"expected 'src dst [weight]', got {raw!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise EdgeListParseError(lineno, f"cannot parse {raw!r}") from None
        if src < 0 or dst < 0 or (n is not None and max(src, dst) >= n):
            raise EdgeListParseError(lineno, f"node id out of range in {raw!r}")
        if not np.isfinite(w) or w < 0:
            raise EdgeListParseError(lineno, f"invalid weight {parts[2]!r}")
        if src == dst:
            raise EdgeListParseError(lineno, "self-loop")
        edges.append((lineno, src, dst, w))

    if n is None:
        n = 1 + max((max(s, d) for _, s, d, _ in edges), default=-1)
    if n == 0:
        raise EdgeListParseError(0, "empty edge list")
    W = np.zeros((n, n))
    for _, src, dst, w in edges:
        W[dst, src] += w
    if undirected:
        # an edge listed in both directions is one undirected edge
        W = np.maximum(W, W.T)
    return WeightedDigraph(W, undirected=undirected)
