"""Signed-network summaries: edge-sign ratio, density and Freeman centralizations."""

from __future__ import annotations

import csv
import io
import math
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroParcorrOnEdge
from .inference.graph import Graph, as_adjacency

STATS_FIELDS = ("pos_neg_ratio", "density", "degree_c", "betweenness_c", "closeness_c")


@dataclass(frozen=True, eq=False)
class SignedGraph:
    sign: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sign, dtype=np.int8)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("sign matrix must be square")
        if not np.array_equal(s, s.T) or np.any(np.diag(s) != 0):
            raise ValueError("sign matrix must be symmetric with zero diagonal")
        if np.any(np.abs(s) > 1):
            raise ValueError("signs must be -1, 0 or +1")
        s.setflags(write=False)
        object.__setattr__(self, "sign", s)

    @property
    def p(self):
        return self.sign.shape[0]

    @property
    def graph(self):
        return Graph(self.sign != 0)

    def count(self, value):
        return int(np.sum(np.triu(self.sign == value, 1)))


@dataclass(frozen=True)
class NetworkStats:
    pos_neg_ratio: float
    density: float
    degree_centralization: float
    betweenness_centralization: float
    closeness_centralization: float
    node_betweenness: tuple

    def row(self):
        return (self.pos_neg_ratio, self.density, self.degree_centralization,
                self.betweenness_centralization, self.closeness_centralization)


def signed_graph(binary, parcorr):
    """Edge signs taken from the partial correlations on the edges of ``binary``.

    An edge whose partial correlation is exactly zero gets sign +1 and a
    :class:`ZeroParcorrOnEdge` warning.
    """
    adj = as_adjacency(binary)
    pc = np.asarray(parcorr, dtype=float)
    if pc.shape != adj.shape:
        raise DimensionMismatch(f"graph has p={adj.shape[0]}, parcorr has shape {pc.shape}")
    s = np.where(adj, np.sign(pc), 0).astype(np.int8)
    zero = adj & (pc == 0)
    if zero.any():
        pairs = [(int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(zero, 1)))]
        warnings.warn(ZeroParcorrOnEdge(f"zero partial correlation on edges {pairs}; sign set to +1"),
                      stacklevel=2)
        s[zero] = 1
    return SignedGraph(s)


def pos_neg_ratio(g):
    """Positive over negative edge count; ``inf`` without negatives, ``nan`` without edges."""
    pos, neg = g.count(1), g.count(-1)
    if neg:
        return pos / neg
    return math.inf if pos else math.nan


def density(g):
    adj = as_adjacency(g)
    p = adj.shape[0]
    if p < 2:
        raise ValueError("density needs at least two nodes")
    return float(np.triu(adj, 1).sum()) / (p * (p - 1) / 2)


def _check_p(adj):
    if adj.shape[0] < 3:
        raise ValueError("centralization needs at least three nodes")


def degree_centralization(g):
    adj = as_adjacency(g)
    _check_p(adj)
    p = adj.shape[0]
    d = adj.sum(axis=1)
    return float(np.sum(d.max() - d)) / ((p - 1) * (p - 2))


def _bfs(adj, s):
    """Shortest-path distances, path counts and predecessor lists from ``s``."""
    p = adj.shape[0]
    dist = np.full(p, -1)
    sigma = np.zeros(p)
    preds = [[] for _ in range(p)]
    order = []
    dist[s], sigma[s] = 0, 1.0
    q = deque([s])
    while q:
        v = q.popleft()
        order.append(v)
        for w in np.flatnonzero(adj[v]):
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                q.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return dist, sigma, preds, order


def node_betweenness(g):
    """Fractional shortest-path betweenness over unordered pairs (Brandes), standardized to [0, 1]."""
    adj = as_adjacency(g)
    _check_p(adj)
    p = adj.shape[0]
    bc = np.zeros(p)
    for s in range(p):
        _, sigma, preds, order = _bfs(adj, s)
        delta = np.zeros(p)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    # each unordered pair was counted from both ends
    return bc / 2.0 / ((p - 1) * (p - 2) / 2.0)


def betweenness_centralization(g):
    """Freeman betweenness centralization and the per-node standardized betweenness."""
    b = node_betweenness(g)
    p = b.size
    return float(np.sum(b.max() - b)) / (p - 1), b


def node_closeness(g):
    """``(p - 1) / sum of distances``; unreachable nodes count as distance ``p``."""
    adj = as_adjacency(g)
    p = adj.shape[0]
    out = np.empty(p)
    for s in range(p):
        dist = _bfs(adj, s)[0]
        dist = np.where(dist < 0, p, dist)
        out[s] = (p - 1) / dist.sum()
    return out


def closeness_centralization(g):
    adj = as_adjacency(g)
    _check_p(adj)
    p = adj.shape[0]
    c = node_closeness(adj)
    return float(np.sum(c.max() - c)) / ((p - 1) * (p - 2) / (2 * p - 3))


def network_stats(sg):
    g = sg.graph
    bc, nodes = betweenness_centralization(g)
    return NetworkStats(
        pos_neg_ratio=pos_neg_ratio(sg),
        density=density(g),
        degree_centralization=degree_centralization(g),
        betweenness_centralization=bc,
        closeness_centralization=closeness_centralization(g),
        node_betweenness=tuple(float(x) for x in nodes),
    )


def _fmt(x):
    return repr(float(x))


def stats_csv(stats):
    """CSV text with one row per country, countries in the given mapping's order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("country",) + STATS_FIELDS)
    for country, st in stats.items():
        w.writerow((country,) + tuple(_fmt(v) for v in st.row()))
    return buf.getvalue()


def stats_summary(stats):
    """Min, average and max of each statistic with the countries attaining the extremes.

    Undefined ratios are skipped; an infinite ratio counts as the maximum and
    is left out of the average.
    """
    out = {}
    countries = list(stats)
    for k, name in enumerate(STATS_FIELDS):
        vals = np.array([stats[c].row()[k] for c in countries], dtype=float)
        ok = ~np.isnan(vals)
        if not ok.any():
            out[name] = None
            continue
        fin = ok & np.isfinite(vals)
        idx = np.flatnonzero(ok)
        lo = idx[np.argmin(vals[ok])]
        hi = idx[np.argmax(vals[ok])]
        out[name] = {
            "min": float(vals[lo]), "min_country": countries[lo],
            "avg": float(vals[fin].mean()) if fin.any() else math.nan,
            "max": float(vals[hi]), "max_country": countries[hi],
        }
    return out


def summary_csv(summary):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("statistic", "min", "min_country", "average", "max", "max_country"))
    for name, s in summary.items():
        if s is None:
            w.writerow((name, "nan", "", "nan", "nan", ""))
            continue
        w.writerow((name, _fmt(s["min"]), s["min_country"], _fmt(s["avg"]), _fmt(s["max"]),
                    s["max_country"]))
    return buf.getvalue()
