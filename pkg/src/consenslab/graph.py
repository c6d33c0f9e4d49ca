"""Weighted undirected communication graphs and their Laplacian spectra."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .linalg import ComplementBasis, SymMatrix, sym_eigen

__all__ = [
    "Graph",
    "laplacian",
    "is_connected",
    "algebraic_connectivity",
    "reduced_laplacian",
]


@dataclass(frozen=True)
class Graph:
    """Undirected graph on nodes 0..n-1 with strictly positive edge weights.

    Edges are canonical (i < j) and unique; the symmetric weight a_ij = a_ji
    is stored once.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __init__(self, n: int, edges):
        if n < 1:
            raise ValueError("Graph needs at least one node")
        canon = []
        seen = set()
        for edge in edges:
            i, j, w = edge
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < j < n):
                raise ValueError(f"edge ({i}, {j}) must satisfy 0 <= i < j < n={n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if not w > 0.0:
                raise ValueError(f"edge ({i}, {j}) weight must be positive, got {w}")
            seen.add((i, j))
            canon.append((i, j, w))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(canon))
        adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for i, j, w in canon:
            adj[i].append((j, w))
            adj[j].append((i, w))
        object.__setattr__(self, "_adjacency", tuple(tuple(row) for row in adj))

    def neighbors(self, i: int) -> tuple[tuple[int, float], ...]:
        """Neighbors of node i as (node, weight) pairs."""
        return self._adjacency[i]


def laplacian(g: Graph) -> SymMatrix:
    """Graph Laplacian: L_ii = sum of incident weights, L_ij = -a_ij."""
    mat = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        mat[i, j] = -w
        mat[j, i] = -w
    for i in range(g.n):
        # fsum keeps the diagonal independent of edge-list order
        mat[i, i] = math.fsum(w for _, w in g.neighbors(i))
    return SymMatrix(mat)


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability of every node from node 0."""
    reached = [False] * g.n
    reached[0] = True
    queue = deque([0])
    count = 1
    while queue:
        i = queue.popleft()
        for j, _ in g.neighbors(i):
            if not reached[j]:
                reached[j] = True
                count += 1
                queue.append(j)
    return count == g.n


def algebraic_connectivity(g: Graph) -> float:
    """Second-smallest Laplacian eigenvalue; positive iff the graph is connected."""
    if g.n < 2:
        raise ValueError("algebraic connectivity needs at least two nodes")
    return float(sym_eigen(laplacian(g)).eigenvalues[1])


def reduced_laplacian(g: Graph, u1: ComplementBasis) -> SymMatrix:
    """Compress L onto the disagreement subspace: U1^T L U1.

    The result is (n-1) x (n-1) and carries exactly the Laplacian spectrum
    with the structural zero removed.
    """
    if u1.n != g.n:
        raise ValueError(f"basis is for n={u1.n}, graph has n={g.n}")
    if g.n < 2:
        raise ValueError("reduced Laplacian needs at least two nodes")
    lap = laplacian(g).entries
    return SymMatrix(u1.columns.T @ lap @ u1.columns)
