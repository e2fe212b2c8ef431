"""Synthetic ordinal survey data drawn from known Gaussian copula graphical models."""

from __future__ import annotations

import csv

import numpy as np

from .ingest import RAW_COLUMNS, WVS6_CATALOG


def sparse_precision(p, edges, value):
    """Unit-diagonal precision with ``value`` on the listed off-diagonal pairs."""
    k = np.eye(p)
    for i, j in edges:
        k[i, j] = k[j, i] = value
    if np.linalg.eigvalsh(k).min() <= 0:
        raise ValueError("precision matrix is not positive definite")
    return k


def latent_sample(k, n, rng):
    """``n`` rows from N(0, k^-1)."""
    chol = np.linalg.cholesky(np.linalg.inv(k))
    return rng.standard_normal((n, k.shape[0])) @ chol.T


def discretize(z, levels):
    """Map each column to ``1..levels`` by its empirical quantile thresholds."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape, dtype=np.int64)
    probs = np.arange(1, levels) / levels
    for j in range(z.shape[1]):
        cuts = np.quantile(z[:, j], probs)
        out[:, j] = np.searchsorted(cuts, z[:, j], side="right") + 1
    return out


def _to_support(col, support, shift, rng):
    """Cut a latent column into the categories of ``support`` with random cell sizes."""
    weights = rng.dirichlet(np.full(len(support), 3.0))
    cuts = np.quantile(col, np.cumsum(weights)[:-1]) + shift
    return np.asarray(support)[np.searchsorted(cuts, col)]


def _postmat_inputs(cls, rng):
    mat, post = np.array([1, 3]), np.array([2, 4])
    n = cls.size
    a = np.where(cls == 3, rng.choice(post, n), rng.choice(mat, n))
    b = np.where(cls == 1, rng.choice(mat, n), rng.choice(post, n))
    # mixed answers pick the postmaterialist item first or second at random
    swap = (cls == 2) & (rng.random(n) < 0.5)
    a2 = np.where(swap, rng.choice(post, n), a)
    b2 = np.where(swap, rng.choice(mat, n), b)
    return a2, b2


def _autonomy_inputs(score, rng):
    """Four 0/1 mentions with ``(v12 + v18) - (v19 + v21) == score - 3``."""
    raw = score - 3
    n = score.size
    out = np.zeros((n, 4), dtype=np.int64)
    for r in range(n):
        options = [(a, b, c, d) for a in (0, 1) for b in (0, 1) for c in (0, 1) for d in (0, 1)
                   if a + b - c - d == raw[r]]
        out[r] = options[rng.integers(len(options))]
    return out.T


def survey_rows(country, n, rng, n_edges=6, missing_rate=0.02):
    """Respondent rows for one country in the raw-question CSV layout.

    The latent model has ``n_edges`` random edges over the ten traits; the two
    composite indices are emitted through their raw input questions.
    """
    p = len(WVS6_CATALOG)
    pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
    pick = rng.choice(len(pairs), n_edges, replace=False)
    k = np.eye(p)
    for idx in pick:
        i, j = pairs[idx]
        k[i, j] = k[j, i] = rng.choice([-1, 1]) * rng.uniform(0.2, 0.4)
    while np.linalg.eigvalsh(k).min() <= 0.05:
        k[~np.eye(p, dtype=bool)] *= 0.8
    z = latent_sample(k, n, rng)
    shift = rng.normal(0, 0.3, p)
    cols = {}
    for j, spec in enumerate(WVS6_CATALOG[:8]):
        cols[spec.code] = _to_support(z[:, j], spec.support, shift[j], rng)
    y002 = _to_support(z[:, 8], (1, 2, 3), shift[8], rng)
    y003 = _to_support(z[:, 9], (1, 2, 3, 4, 5), shift[9], rng)
    cols["V62"], cols["V63"] = _postmat_inputs(y002, rng)
    cols["V12"], cols["V18"], cols["V19"], cols["V21"] = _autonomy_inputs(y003, rng)
    header = [s.code for s in WVS6_CATALOG[:8]] + list(RAW_COLUMNS)
    mat = np.column_stack([cols[h] for h in header])
    miss = rng.random(mat.shape) < missing_rate
    mat = np.where(miss, -rng.integers(1, 6, mat.shape), mat)
    return header, [[country, *map(int, row)] for row in mat]


def write_survey_csv(path, countries, n, seed):
    """Write a multi-country synthetic survey; returns the header."""
    rng = np.random.Generator(np.random.PCG64(seed))
    rows, header = [], None
    for c in countries:
        header, part = survey_rows(c, n, rng)
        rows.extend(part)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", *header])
        w.writerows(rows)
    return ["country", *header]
