"""Latent Gaussian data constrained by the observed ranks (extended rank likelihood)."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr, ndtri

from ..errors import NumericalFailure


def rank_bounds(y_col, z_col, row, missing=None):
    """Interval allowed for ``z_col[row]`` given the other rows' latent values.

    ``y_col`` holds integer categories; missing cells are negative or flagged
    by ``missing``. A missing observation is unconstrained.
    """
    y = np.asarray(y_col)
    z = np.asarray(z_col, dtype=float)
    miss = y < 0 if missing is None else np.asarray(missing, dtype=bool)
    if miss[row]:
        return -np.inf, np.inf
    obs = ~miss
    lower_rows = obs & (y < y[row])
    upper_rows = obs & (y > y[row])
    lower = z[lower_rows].max() if lower_rows.any() else -np.inf
    upper = z[upper_rows].min() if upper_rows.any() else np.inf
    return float(lower), float(upper)


def truncated_normal(mu, sigma, lo, hi, u):
    """Inverse-cdf draw from ``N(mu, sigma^2)`` restricted to ``[lo, hi]``.

    ``u`` are uniforms shaped like ``mu``. The upper tail is sampled through
    the mirrored lower tail so that both ends keep precision.
    """
    a = (lo - mu) / sigma
    b = (hi - mu) / sigma
    flip = a > 0
    aa = np.where(flip, -b, a)
    bb = np.where(flip, -a, b)
    pa = ndtr(aa)
    pb = ndtr(bb)
    width = pb - pa
    x = ndtri(pa + u * width)
    # interval beyond double precision of the cdf: exponential tail approximation
    tiny = ~(width > 0) | ~np.isfinite(x)
    if tiny.any():
        at, bt, ut = aa[tiny], bb[tiny], u[tiny]
        lam = np.maximum(-bt, 1.0)
        span = bt - at
        tail = bt + np.log1p(-ut * -np.expm1(-lam * span)) / lam
        x[tiny] = np.where(bt < -1.0, tail, at + ut * span)
    x = np.where(flip, -x, x)
    x = np.clip(x, a, b)
    return mu + sigma * x


class LatentLayout:
    """Row groupings of a response matrix: one block per (column, category), plus missing rows."""

    def __init__(self, y):
        self.n, self.p = y.values.shape
        self.blocks = []
        for j in range(self.p):
            col = y.values[:, j]
            obs = ~y.missing[:, j]
            cats = np.unique(col[obs])
            groups = [np.flatnonzero(obs & (col == c)) for c in cats]
            for k, rows in enumerate(groups):
                below = groups[k - 1] if k > 0 else None
                above = groups[k + 1] if k + 1 < len(groups) else None
                self.blocks.append((j, rows, below, above))
            miss_rows = np.flatnonzero(~obs)
            if miss_rows.size:
                self.blocks.append((j, miss_rows, None, None))


def init_latent(y):
    """Normal scores of mid-ranks, column by column; missing cells start at 0."""
    n, p = y.values.shape
    z = np.zeros((n, p))
    for j in range(p):
        obs = ~y.missing[:, j]
        vals = y.values[obs, j]
        if vals.size == 0:
            continue
        cats, inverse, counts = np.unique(vals, return_inverse=True, return_counts=True)
        upto = np.cumsum(counts)
        mid = upto - (counts - 1) / 2.0
        z[obs, j] = ndtri(mid[inverse] / (vals.size + 1.0))
    return z


def latent_sweep(z, k, layout, rng, reverse=False):
    """One Gibbs pass over all blocks of ``layout``; updates ``z`` in place."""
    diag = np.diag(k)
    if np.any(diag <= 0):
        raise NumericalFailure("precision matrix has a non-positive diagonal entry")
    blocks = reversed(layout.blocks) if reverse else layout.blocks
    sd = 1.0 / np.sqrt(diag)
    for j, rows, below, above in blocks:
        kj = k[:, j]
        zr = z[rows]
        mu = -(zr @ kj - zr[:, j] * kj[j]) / kj[j]
        lo = z[below, j].max() if below is not None else -np.inf
        hi = z[above, j].min() if above is not None else np.inf
        u = rng.random(rows.size)
        z[rows, j] = truncated_normal(mu, sd[j], lo, hi, u)
    return z


def gibbs_latent_sweep(z, y, k, rng, reverse=False):
    """Resample every latent cell from its truncated full conditional.

    Cell ``(r, j)`` is drawn from ``N(mu, 1/k_jj)`` with
    ``mu = -sum_{t != j} k_jt z_rt / k_jj``, restricted to the interval
    given by :func:`rank_bounds`. Returns a new array; ``z`` is untouched.
    """
    return latent_sweep(np.array(z, dtype=float), np.asarray(k, dtype=float),
                        LatentLayout(y), rng, reverse=reverse)


def is_rank_consistent(z, y):
    """Direct scan: within each column, larger categories carry strictly larger latent values."""
    for j in range(y.p):
        obs = ~y.missing[:, j]
        vals, zs = y.values[obs, j], z[obs, j]
        cats = np.unique(vals)
        for lo_c, hi_c in zip(cats, cats[1:]):
            if zs[vals == lo_c].max() >= zs[vals == hi_c].min():
                return False
    return True
