"""Undirected graph storage, edge-list loading and structural queries.

Graphs are stored as compressed neighbor lists (CSR) with neighbors sorted
ascending, so every sparse product sums in a fixed order and downstream
numerics are bit-reproducible.
"""
from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)


class EdgeListError(ValueError):
    """Raised when an edge-list file cannot be parsed."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph on nodes ``0..n-1``.

    Parameters
    ----------
    indptr, indices : ndarray of int64
        CSR neighbor lists; ``indices[indptr[i]:indptr[i+1]]`` are the
        neighbors of ``i`` in ascending order.
    labels : ndarray of int64
        Original (external) id of every internal node.
    info : dict
        Load-time bookkeeping such as the number of dropped self-loops.
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.labels):
            arr.flags.writeable = False

    @classmethod
    def from_edges(cls, n, edges, labels=None, info=None):
        """Build a graph from an ``(k, 2)`` array of internal-id pairs.

        Self-loops and duplicate (including reversed) edges are dropped; the
        counts are stored in ``info``.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if n < 0:
            raise ValueError("node count must be nonnegative")
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ValueError("edge endpoint out of range")
        loops = edges[:, 0] == edges[:, 1]
        edges = edges[~loops]
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        pairs = np.unique(lo * max(n, 1) + hi)
        lo, hi = np.divmod(pairs, max(n, 1))
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        meta = dict(info or {})
        meta.setdefault("self_loops", int(loops.sum()))
        meta.setdefault("duplicates", int(len(edges) - len(pairs)))
        return cls(indptr, dst.astype(np.int64), np.asarray(labels, dtype=np.int64), meta)

    @property
    def n(self):
        return len(self.indptr) - 1

    @property
    def m(self):
        return len(self.indices) // 2

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @cached_property
    def degrees(self):
        d = np.diff(self.indptr)
        d.flags.writeable = False
        return d

    @cached_property
    def adjacency(self):
        """The adjacency matrix as a read-only-by-convention CSR matrix."""
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def edges(self):
        """Undirected edges as an ``(m, 2)`` array with ``u < v``."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]])

    def is_connected(self):
        if self.n <= 1:
            return True
        ncomp, _ = connected_components(self.adjacency, directed=False)
        return ncomp == 1

    def subgraph(self, nodes):
        """Induced subgraph on ``nodes`` (relabeled in ascending order)."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        e = self.edges()
        e = remap[e]
        e = e[(e >= 0).all(axis=1)]
        return Graph.from_edges(len(nodes), e, labels=self.labels[nodes])

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class DegreeSummary:
    degrees: np.ndarray
    mean: float
    max: int


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        if path.endswith(".gz"):
            import gzip

            return gzip.open(path, "rt")
        return open(path, "r")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode())
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source)


def read_edges(source, comment="#", delimiter=None):
    """Parse raw integer pairs from an edge-list stream.

    Returns an ``(k, 2)`` int64 array of original ids, in file order.
    """
    pairs = []
    fh = _open_text(source)
    try:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith(comment):
                continue
            tokens = s.split(delimiter)
            if len(tokens) < 2:
                raise EdgeListError(f"expected two node ids, got {s!r}", lineno)
            try:
                pairs.append((int(tokens[0]), int(tokens[1])))
            except ValueError:
                raise EdgeListError(f"non-integer node id in {s!r}", lineno) from None
    finally:
        if isinstance(source, (str, os.PathLike)):
            fh.close()
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def graph_from_raw_edges(raw):
    """Relabel original-id pairs to ``0..n-1`` (ascending original id)."""
    raw = np.asarray(raw, dtype=np.int64).reshape(-1, 2)
    if raw.size == 0:
        raise EdgeListError("edge list contains no edges")
    labels, inverse = np.unique(raw, return_inverse=True)
    g = Graph.from_edges(len(labels), inverse.reshape(-1, 2), labels=labels)
    if g.m == 0:
        raise EdgeListError("edge list contains no edges after removing self-loops")
    return g


def load_edge_list(source, comment="#", delimiter=None):
    """Load an undirected graph from a whitespace-delimited edge list.

    Parameters
    ----------
    source : path, bytes, or file object
        One edge per line as two integer tokens. Lines starting with
        ``comment`` are ignored. ``.gz`` paths are decompressed.
    delimiter : str, optional
        Token separator; ``None`` splits on any whitespace.

    Returns
    -------
    Graph
        Edges are symmetrized; self-loops and duplicates are dropped and
        counted in ``graph.info``. ``graph.labels`` maps back to file ids.
    """
    g = graph_from_raw_edges(read_edges(source, comment, delimiter))
    logger.info(
        "loaded %r; dropped %d self-loops and %d duplicate edges",
        g, g.info["self_loops"], g.info["duplicates"],
    )
    return g


def _pick_component(labels_per_node, comp, ncomp):
    sizes = np.bincount(comp, minlength=ncomp)
    best = sizes.max()
    # Tie-break on the smallest member id; internal ids ascend with original ids.
    first = np.full(ncomp, np.iinfo(np.int64).max)
    np.minimum.at(first, comp, labels_per_node)
    candidates = np.flatnonzero(sizes == best)
    return candidates[np.argmin(first[candidates])]


def largest_connected_component(g):
    """Induced subgraph on the largest connected component.

    Ties go to the component holding the smallest original id.
    """
    if g.n == 0:
        return g
    ncomp, comp = connected_components(g.adjacency, directed=False)
    if ncomp == 1:
        return g
    keep = _pick_component(g.labels, comp, ncomp)
    return g.subgraph(np.flatnonzero(comp == keep))


def largest_strong_component_edges(raw):
    """Restrict a directed edge list to its largest strongly connected component.

    Returns the surviving original-id pairs (direction kept); pass them to
    :func:`graph_from_raw_edges` for the undirected version.
    """
    raw = np.asarray(raw, dtype=np.int64).reshape(-1, 2)
    labels, inverse = np.unique(raw, return_inverse=True)
    inverse = inverse.reshape(-1, 2)
    n = len(labels)
    mat = sp.csr_matrix(
        (np.ones(len(inverse)), (inverse[:, 0], inverse[:, 1])), shape=(n, n)
    )
    ncomp, comp = connected_components(mat, directed=True, connection="strong")
    keep = _pick_component(labels, comp, ncomp)
    inside = (comp[inverse[:, 0]] == keep) & (comp[inverse[:, 1]] == keep)
    return raw[inside]


def matvec(g, v, scale=None):
    """Return ``A @ diag(scale) @ v`` (or ``A @ v`` when ``scale`` is None).

    Row sums run over neighbors in ascending id order.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (g.n,):
        raise ValueError(f"vector has shape {v.shape}, expected ({g.n},)")
    if scale is not None:
        scale = np.asarray(scale, dtype=np.float64)
        if scale.shape != (g.n,):
            raise ValueError(f"scale has shape {scale.shape}, expected ({g.n},)")
        if np.any(scale < 0) or np.any(scale > 1):
            raise ValueError("scale entries must lie in [0, 1]")
        v = scale * v
    return g.adjacency @ v


def degree_summary(g):
    d = np.asarray(g.degrees)
    mean = 2.0 * g.m / g.n if g.n else 0.0
    return DegreeSummary(degrees=d, mean=mean, max=int(d.max()) if g.n else 0)


def check_symmetric(g):
    """True when every stored edge appears in both neighbor lists."""
    a = g.adjacency
    return (a != a.T).nnz == 0 and not np.any(a.diagonal())


# -- generators -------------------------------------------------------------

def _from_networkx(nxg):
    e = np.array(list(nxg.edges()), dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(nxg.number_of_nodes(), e)


def path_graph(n):
    e = np.column_stack([np.arange(n - 1), np.arange(1, n)])
    return Graph.from_edges(n, e)


def star_graph(leaves):
    """Hub ``0`` joined to ``leaves`` leaf nodes ``1..leaves``."""
    e = np.column_stack([np.zeros(leaves, dtype=np.int64), np.arange(1, leaves + 1)])
    return Graph.from_edges(leaves + 1, e)


def complete_graph(n):
    i, j = np.triu_indices(n, k=1)
    return Graph.from_edges(n, np.column_stack([i, j]))


def erdos_renyi(n, p, seed=None):
    import networkx as nx

    return _from_networkx(nx.gnp_random_graph(n, p, seed=seed))


def barabasi_albert(n, m_attach, seed=None):
    import networkx as nx

    return _from_networkx(nx.barabasi_albert_graph(n, m_attach, seed=seed))


def connected_erdos_renyi(n, mean_degree, seed=None, max_tries=1000):
    """G(n, p) with ``p = mean_degree / (n - 1)``, redrawn until connected."""
    rng = np.random.default_rng(seed)
    p = mean_degree / (n - 1)
    for _ in range(max_tries):
        g = erdos_renyi(n, p, seed=int(rng.integers(2**63 - 1)))
        if g.is_connected():
            return g
    raise RuntimeError(f"no connected G({n}, {p:.4g}) in {max_tries} draws")


def erdos_renyi_with_radius(n, radius, seed=None, tol=1e-3, max_bisections=60):
    """G(n, p) with ``p`` tuned so the spectral radius is close to ``radius``.

    One uniform is drawn per node pair and edge ``(i, j)`` is present when
    its uniform is below ``p``. Edge sets are nested in ``p``, so the
    spectral radius is nondecreasing in ``p`` and bisection on ``p`` (with
    the uniforms held fixed) reaches the closest attainable graph.
    """
    from .linalg import dominant_eigenpair

    iu, ju = np.triu_indices(n, 1)
    u = np.random.default_rng(seed).random(len(iu))

    def build(p):
        keep = u < p
        return Graph.from_edges(n, np.column_stack([iu[keep], ju[keep]]))

    lo, hi = 0.0, 1.0
    best = None
    for _ in range(max_bisections):
        mid = 0.5 * (lo + hi)
        g = build(mid)
        lam = dominant_eigenpair(g).value if g.m else 0.0
        if best is None or abs(lam - radius) < abs(best[1] - radius):
            best = (g, lam)
        if abs(lam - radius) < tol:
            break
        lo, hi = (mid, hi) if lam < radius else (lo, mid)
    return best[0]


def make_graph(spec, seed=None):
    """Build a graph from a compact spec string.

    Accepted forms: ``path:N``, ``star:LEAVES``, ``complete:N``,
    ``er:N:P`` (or ``er:N:d=MEAN`` for a connected draw with that mean
    degree, or ``er:N:lambda=RADIUS``), ``ba:N:M``, and ``file:PATH`` with an
    optional ``:lcc`` / ``:scc`` suffix selecting the largest connected or
    largest strongly connected component.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.lower()
    if kind == "file":
        path, component = rest, "lcc"
        if rest.endswith((":lcc", ":scc", ":all")):
            path, component = rest[:-4], rest[-3:]
        raw = read_edges(path)
        if component == "scc":
            g = graph_from_raw_edges(largest_strong_component_edges(raw))
            return largest_connected_component(g)
        g = graph_from_raw_edges(raw)
        return largest_connected_component(g) if component == "lcc" else g
    parts = rest.split(":") if rest else []
    if kind == "path":
        return path_graph(int(parts[0]))
    if kind == "star":
        return star_graph(int(parts[0]))
    if kind == "complete":
        return complete_graph(int(parts[0]))
    if kind == "er":
        n = int(parts[0])
        if parts[1].startswith("d="):
            return connected_erdos_renyi(n, float(parts[1][2:]), seed=seed)
        if parts[1].startswith("lambda="):
            return erdos_renyi_with_radius(n, float(parts[1][7:]), seed=seed)
        return erdos_renyi(n, float(parts[1]), seed=seed)
    if kind == "ba":
        return barabasi_albert(int(parts[0]), int(parts[1]), seed=seed)
    raise ValueError(f"unknown graph spec {spec!r}")


__all__ = [
    "DegreeSummary",
    "EdgeListError",
    "Graph",
    "barabasi_albert",
    "check_symmetric",
    "complete_graph",
    "connected_erdos_renyi",
    "degree_summary",
    "erdos_renyi",
    "erdos_renyi_with_radius",
    "graph_from_raw_edges",
    "largest_connected_component",
    "largest_strong_component_edges",
    "load_edge_list",
    "make_graph",
    "matvec",
    "path_graph",
    "read_edges",
    "star_graph",
]
