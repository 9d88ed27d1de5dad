"""Correlation-threshold graph over variables and anchored neighborhood
enumeration.

Nodes i != j are adjacent when |G(i,j)| / sqrt(G(i,i) G(j,j)) exceeds the
threshold delta (strictly). A "neighborhood" of j is any vertex set that
contains j, has size at most m, and induces a connected subgraph; scoring
maximizes over these sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CostError, DegenerateVariableError, ParameterError

# Breadth-limited enumeration cost explodes with degree; refuse rather than
# silently stall (m = 2 stays linear in edge count and is always allowed).
_DEGREE_GUARD = 50


@dataclass(frozen=True)
class CovariateGraph:
    """Threshold graph: per-node sorted neighbor tuples, no self loops."""

    p: int
    neighbors: tuple
    delta: float
    dropped: frozenset = frozenset()

    @property
    def max_degree(self) -> int:
        return max((len(nb) for nb in self.neighbors), default=0)

    def edge_set(self) -> set:
        return {(i, j) for i in range(self.p) for j in self.neighbors[i] if i < j}


@dataclass(frozen=True)
class NeighborhoodCollection:
    """Per-anchor tuples of neighborhoods; each neighborhood is a sorted
    tuple of node indices containing its anchor."""

    m: int
    sets: tuple

    @property
    def total_count(self) -> int:
        return sum(len(s) for s in self.sets)

    def for_node(self, j: int) -> tuple:
        return self.sets[j]


def build_graph(gram: np.ndarray, delta: float, drop_degenerate: bool = False) -> CovariateGraph:
    """Threshold the normalized Gram matrix into an undirected graph.

    Variables with a nonpositive diagonal entry raise
    ``DegenerateVariableError`` unless ``drop_degenerate`` is set, in which
    case they become isolated nodes recorded in ``dropped``.
    """
    gram = np.asarray(gram, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise ParameterError(f"gram must be square, got shape {gram.shape}")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must be in (0, 1), got {delta}")
    p = gram.shape[0]
    diag = np.diag(gram).copy()
    bad = np.flatnonzero(diag <= 0.0)
    if bad.size and not drop_degenerate:
        raise DegenerateVariableError(
            f"variable {bad[0]} has nonpositive diagonal {diag[bad[0]]:.3e}; "
            "pass drop_degenerate to exclude such variables"
        )
    keep = diag > 0.0
    scale = np.where(keep, np.sqrt(np.abs(diag)), 1.0)
    normalized = np.abs(gram) / np.outer(scale, scale)
    adj = normalized > delta
    np.fill_diagonal(adj, False)
    if bad.size:
        adj[bad, :] = False
        adj[:, bad] = False
    neighbors = tuple(tuple(np.flatnonzero(adj[i]).tolist()) for i in range(p))
    return CovariateGraph(p=p, neighbors=neighbors, delta=float(delta),
                          dropped=frozenset(bad.tolist()))


def anchored_connected_sets(neighbors, anchor: int, m: int) -> tuple:
    """All vertex sets through ``anchor`` of size <= m that induce a
    connected subgraph, as sorted tuples in deterministic order.

    ``neighbors`` maps each node to a set of adjacent nodes (list, tuple,
    or dict). Frontier expansion: grow a set by one adjacent vertex at a
    time with deduplication, which produces exactly the induced-connected
    supersets of {anchor}.
    """
    seen = {frozenset((anchor,))}
    stack = [frozenset((anchor,))]
    while stack:
        current = stack.pop()
        if len(current) == m:
            continue
        frontier = set()
        for v in current:
            frontier |= set(neighbors[v])
        frontier -= current
        for w in frontier:
            grown = current | {w}
            if grown not in seen:
                seen.add(grown)
                stack.append(grown)
    return tuple(sorted(tuple(sorted(s)) for s in seen))


def enumerate_neighborhoods(graph: CovariateGraph, m: int) -> NeighborhoodCollection:
    """All connected vertex sets of size <= m containing each node."""
    if m < 1:
        raise ParameterError(f"m must be at least 1, got {m}")
    if m >= 3 and graph.max_degree > _DEGREE_GUARD:
        raise CostError(
            f"max degree {graph.max_degree} with m={m} implies up to "
            f"~p*m*(2.72*{graph.max_degree})^{m} neighborhoods; "
            "raise delta or lower m"
        )
    nbrs = [set(nb) for nb in graph.neighbors]
    per_node = tuple(anchored_connected_sets(nbrs, j, m) for j in range(graph.p))
    return NeighborhoodCollection(m=m, sets=per_node)


def verify_enum_bound(collection: NeighborhoodCollection, graph: CovariateGraph) -> bool:
    """Check the enumeration-count bound total <= p * m * (2.72 * d)^m.

    With maximum degree 0 every collection is the p singletons and the
    bound holds vacuously.
    """
    d = graph.max_degree
    if d == 0:
        return all(s == ((j,),) for j, s in enumerate(collection.sets))
    bound = graph.p * collection.m * (2.72 * d) ** collection.m
    return collection.total_count <= bound
