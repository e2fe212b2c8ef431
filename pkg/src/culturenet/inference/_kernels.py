"""Compiled small-matrix kernels for the structure sampler.

All randomness is drawn by the caller; these functions are deterministic.
"""

import math

import numpy as np
from numba import njit

LOG_2_SQRT_PI = math.log(2.0 * math.sqrt(math.pi))
LOG_2PI = math.log(2.0 * math.pi)


@njit(cache=True)
def complete_covariance(sigma, adj, tol, max_cycles):
    """Iterative completion of ``sigma`` so that its inverse vanishes off the graph.

    Keeps the diagonal and the graph-edge entries of ``sigma``. Returns the
    completed matrix and the number of cycles used (-1 when not converged).
    """
    p = sigma.shape[0]
    w = sigma.copy()
    nbr = np.empty(p, dtype=np.int64)
    for cycle in range(1, max_cycles + 1):
        delta = 0.0
        for j in range(p):
            m = 0
            for k in range(p):
                if adj[j, k]:
                    nbr[m] = k
                    m += 1
            beta = np.zeros(p)
            if m > 0:
                wn = np.empty((m, m))
                sn = np.empty(m)
                for a in range(m):
                    sn[a] = sigma[nbr[a], j]
                    for c in range(m):
                        wn[a, c] = w[nbr[a], nbr[c]]
                bn = np.linalg.solve(wn, sn)
                for a in range(m):
                    beta[nbr[a]] = bn[a]
            for r in range(p):
                if r == j:
                    continue
                acc = 0.0
                for c in range(p):
                    if c != j and beta[c] != 0.0:
                        acc += w[r, c] * beta[c]
                d = abs(acc - w[r, j])
                if d > delta:
                    delta = d
                w[r, j] = acc
                w[j, r] = acc
        if delta < tol:
            return w, cycle
    return w, -1


@njit(cache=True)
def complete_by_components(sigma, adj, tol, max_cycles):
    """Completion run separately on each connected component of ``adj``.

    The completed matrix is block diagonal over components, so this equals
    :func:`complete_covariance` on the whole graph. ``tol`` is relative to
    the largest diagonal entry of ``sigma``. Returns ``(w, cycles)`` with
    ``cycles`` the largest count over components, -1 if any failed.
    """
    p = sigma.shape[0]
    label = -np.ones(p, dtype=np.int64)
    stack = np.empty(p, dtype=np.int64)
    n_comp = 0
    for s in range(p):
        if label[s] >= 0:
            continue
        label[s] = n_comp
        top = 0
        stack[top] = s
        top += 1
        while top > 0:
            top -= 1
            v = stack[top]
            for u in range(p):
                if adj[v, u] and label[u] < 0:
                    label[u] = n_comp
                    stack[top] = u
                    top += 1
        n_comp += 1
    scale = 0.0
    for i in range(p):
        if sigma[i, i] > scale:
            scale = sigma[i, i]
    w = np.zeros((p, p))
    worst = 0
    for c in range(n_comp):
        m = 0
        for i in range(p):
            if label[i] == c:
                stack[m] = i
                m += 1
        idx = stack[:m].copy()
        n_edges = 0
        for a in range(m):
            for b in range(a + 1, m):
                if adj[idx[a], idx[b]]:
                    n_edges += 1
        sub = np.empty((m, m))
        for a in range(m):
            for b in range(m):
                sub[a, b] = sigma[idx[a], idx[b]]
        if n_edges < m * (m - 1) // 2:
            sub_adj = np.zeros((m, m), dtype=np.bool_)
            for a in range(m):
                for b in range(m):
                    sub_adj[a, b] = adj[idx[a], idx[b]]
            sub, cycles = complete_covariance(sub, sub_adj, tol * scale, max_cycles)
            if cycles < 0:
                return w, -1
            if cycles > worst:
                worst = cycles
        for a in range(m):
            for b in range(m):
                w[idx[a], idx[b]] = sub[a, b]
    return w, worst


@njit(cache=True)
def common_neighbours(adj, i, j):
    p = adj.shape[0]
    d = 0
    for k in range(p):
        if adj[i, k] and adj[j, k]:
            d += 1
    return d


@njit(cache=True)
def edge_terms(k, sigma, adj, dstar, b, d0):
    """Per-pair quantities for the one-edge moves, for every pair i < j.

    The larger index ``j`` is the pivot whose diagonal absorbs the change.
    Returns ``(log_ratio, a, h)`` where ``log_ratio`` is the log posterior
    ratio of the graph with the edge (its entry integrated out) over the
    graph without it, excluding the prior odds, and ``N(-h/a, 1/a)`` is the
    conditional law of the off-diagonal entry when the edge is present.
    """
    p = k.shape[0]
    log_ratio = np.zeros((p, p))
    a_out = np.zeros((p, p))
    h_out = np.zeros((p, p))
    for j in range(1, p):
        sjj = sigma[j, j]
        for i in range(j):
            sij = sigma[i, j]
            m_ii = sigma[i, i] - sij * sij / sjj
            acc = 0.0
            for l in range(p):
                if l == i or l == j:
                    continue
                m_il = sigma[i, l] - sij * sigma[l, j] / sjj
                acc += m_il * k[l, j]
            a = dstar[j, j] * m_ii
            h = dstar[i, j] + dstar[j, j] * acc
            d = common_neighbours(adj, i, j)
            log_iratio = LOG_2_SQRT_PI + math.lgamma(0.5 * (b + d + 1.0)) \
                - math.lgamma(0.5 * (b + d)) - math.log(d0)
            log_ratio[i, j] = 0.5 * (LOG_2PI - math.log(a)) + h * h / (2.0 * a) - log_iratio
            a_out[i, j] = a
            h_out[i, j] = h
    return log_ratio, a_out, h_out


@njit(cache=True)
def move_rates(log_ratio, adj, log_odds):
    """Birth rates for absent pairs and death rates for present ones (upper triangle)."""
    p = adj.shape[0]
    rates = np.zeros((p, p))
    total = 0.0
    for j in range(1, p):
        for i in range(j):
            lr = log_ratio[i, j] + log_odds
            if adj[i, j]:
                lr = -lr
            r = 1.0 if lr >= 0.0 else math.exp(lr)
            rates[i, j] = r
            total += r
    return rates, total


@njit(cache=True)
def set_pair(k, i, j, value):
    """Set ``k[i, j]`` while holding fixed the Schur complement of the pivot ``j``.

    Modifies ``k`` in place; returns the new pivot diagonal.
    """
    p = k.shape[0]
    m = p - 1
    idx = np.empty(m, dtype=np.int64)
    c = 0
    for r in range(p):
        if r != j:
            idx[c] = r
            c += 1
    krr = np.empty((m, m))
    u_old = np.empty(m)
    for a in range(m):
        u_old[a] = k[idx[a], j]
        for b in range(m):
            krr[a, b] = k[idx[a], idx[b]]
    x_old = np.linalg.solve(krr, u_old)
    schur = k[j, j] - np.dot(u_old, x_old)
    k[i, j] = value
    k[j, i] = value
    u_new = u_old.copy()
    for a in range(m):
        if idx[a] == i:
            u_new[a] = value
    x_new = np.linalg.solve(krr, u_new)
    k[j, j] = schur + np.dot(u_new, x_new)
    return k[j, j]
