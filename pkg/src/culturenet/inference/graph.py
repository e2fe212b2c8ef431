from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph stored as a symmetric boolean adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        adj.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def empty(cls, p):
        return cls(np.zeros((p, p), dtype=bool))

    @classmethod
    def complete(cls, p):
        return cls(~np.eye(p, dtype=bool))

    @classmethod
    def from_edges(cls, p, edges):
        adj = np.zeros((p, p), dtype=bool)
        for i, j in edges:
            adj[i, j] = adj[j, i] = True
        return cls(adj)

    @property
    def p(self):
        return self.adjacency.shape[0]

    @property
    def edges(self):
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    @property
    def n_edges(self):
        return int(np.triu(self.adjacency, 1).sum())

    def degrees(self):
        return self.adjacency.sum(axis=1)

    def has_edge(self, i, j):
        return bool(self.adjacency[i, j])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(np.packbits(self.adjacency).tobytes())


def as_adjacency(g):
    return g.adjacency if isinstance(g, Graph) else np.asarray(g, dtype=bool)
