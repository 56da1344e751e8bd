"""Finite oriented networks with unit-length edges.

Indices are 0-based throughout the library; configuration files and the CLI
use 1-based indices and convert at the boundary (see :mod:`netfhn.config`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkGraph:
    """Network with ``n_vertices`` nodes and ``n_edges`` oriented edges.

    Edge ``j`` is parametrized by ``[0, 1]`` with ``edges[j] = (tail, head)``,
    the tail sitting at ``x = 0``.  ``phi_plus[i, j] = 1`` iff vertex ``i`` is
    the tail of edge ``j``; ``phi_minus[i, j] = 1`` iff it is the head.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    phi_plus: np.ndarray = field(repr=False)
    phi_minus: np.ndarray = field(repr=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def phi(self) -> np.ndarray:
        return self.phi_plus - self.phi_minus

    @property
    def degrees(self) -> np.ndarray:
        return (self.phi_plus.sum(axis=1) + self.phi_minus.sum(axis=1)).astype(int)

    def is_connected(self) -> bool:
        tails = [e[0] for e in self.edges]
        heads = [e[1] for e in self.edges]
        adj = coo_matrix((np.ones(len(tails)), (tails, heads)),
                         shape=(self.n_vertices, self.n_vertices))
        n_comp, _ = connected_components(adj, directed=False)
        return n_comp == 1


def build_network(n_vertices, edge_list) -> NetworkGraph:
    """Build the incidence structure of a network (0-based vertex indices).

    Parallel edges are allowed; self-loops and isolated vertices are not.
    """
    n_vertices = int(n_vertices)
    if n_vertices < 1:
        raise GraphError(f"n_vertices must be positive, got {n_vertices}")
    edges = [tuple(int(v) for v in e) for e in edge_list]
    if not edges:
        raise GraphError("edge list is empty")
    for j, e in enumerate(edges):
        if len(e) != 2:
            raise GraphError(f"edge {j} must be a (tail, head) pair, got {e}")
        tail, head = e
        for v in e:
            if not 0 <= v < n_vertices:
                raise GraphError(f"edge {j}: vertex index {v} out of range [0, {n_vertices})")
        if tail == head:
            raise GraphError(f"edge {j}: self-loop at vertex {tail}")

    m = len(edges)
    phi_plus = np.zeros((n_vertices, m))
    phi_minus = np.zeros((n_vertices, m))
    for j, (tail, head) in enumerate(edges):
        phi_plus[tail, j] = 1.0
        phi_minus[head, j] = 1.0

    deg = phi_plus.sum(axis=1) + phi_minus.sum(axis=1)
    isolated = np.flatnonzero(deg == 0)
    if isolated.size:
        raise GraphError(f"isolated vertices (degree 0): {isolated.tolist()}")

    phi_plus.setflags(write=False)
    phi_minus.setflags(write=False)
    return NetworkGraph(n_vertices, tuple(edges), phi_plus, phi_minus)


def vertex_star(g: NetworkGraph, i: int) -> list[tuple[int, int]]:
    """Edges incident to vertex ``i`` as ``(edge, endpoint)`` pairs.

    ``endpoint`` is 0 when the vertex is the edge's tail and 1 when it is the
    head, in increasing edge order.
    """
    if not 0 <= i < g.n_vertices:
        raise GraphError(f"vertex index {i} out of range [0, {g.n_vertices})")
    star = []
    for j, (tail, head) in enumerate(g.edges):
        if tail == i:
            star.append((j, 0))
        if head == i:
            star.append((j, 1))
    return star
