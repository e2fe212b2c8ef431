"""PCA, classical MDS, kernel densities and group diagnostics for the 2-D maps."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import norm

from .errors import (DegenerateData, DimensionMismatch, NotEnoughPositiveEigenvalues,
                     RankDeficient, SingletonGroup)

RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PcaResult:
    """Principal components of an n x p data matrix.

    Attributes
    ----------
    scores : (n, k) array
        Centred (and scaled, for correlation PCA) data times the loadings.
    loadings : (p, k) array
        Unit eigenvectors; each column's largest-magnitude entry is positive.
    eigenvalues : (k,) array
        Non-increasing, clipped at zero.
    variance_fraction : (k,) array
    contributions : (p, k) array
        Percent contribution of each variable to each component.
    cos2 : (p, k) array
        Share of each variable's variance carried by each component.
    """

    scores: np.ndarray
    loadings: np.ndarray
    eigenvalues: np.ndarray
    variance_fraction: np.ndarray
    contributions: np.ndarray
    cos2: np.ndarray


def _orient(vecs):
    """Flip columns so that the entry of largest magnitude is positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def pca(matrix, standardize_columns=True):
    """Eigen-decomposition of the covariance or correlation matrix of ``matrix``."""
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise DimensionMismatch(f"need an n x p matrix with n > 1 and p >= 2, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("matrix has missing or non-finite cells")
    xc = x - x.mean(axis=0)
    if standardize_columns:
        sd = xc.std(axis=0, ddof=1)
        if np.any(sd == 0):
            raise DegenerateData("a column is constant; cannot standardize")
        xc = xc / sd
    cov = xc.T @ xc / (x.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    evecs = _orient(evecs[:, order])
    if np.any(evals < RANK_TOL * max(1.0, evals[0])):
        warnings.warn(RankDeficient("covariance matrix is rank deficient"), stacklevel=2)
    total = evals.sum()
    if not total > 0:
        raise DegenerateData("data have zero variance")
    var = np.diag(cov)
    cos2 = evecs ** 2 * evals / var[:, None]
    return PcaResult(
        scores=xc @ evecs,
        loadings=evecs,
        eigenvalues=evals,
        variance_fraction=evals / total,
        contributions=100.0 * evecs ** 2,
        cos2=np.clip(cos2, 0.0, 1.0),
    )


def distance_pca(distance_matrices):
    """Correlation PCA with country pairs as observations and measures as variables."""
    mats = list(distance_matrices)
    if len(mats) < 2:
        raise DimensionMismatch("need at least two distance matrices")
    countries = mats[0].countries
    for d in mats:
        if d.countries != countries:
            raise DimensionMismatch("distance matrices cover different countries")
        if not d.standardized:
            raise ValueError(f"{d.measure} distances are not standardized")
    return pca(np.column_stack([d.upper() for d in mats]), standardize_columns=True)


@dataclass(frozen=True, eq=False)
class MdsResult:
    coords: np.ndarray
    eigenvalues: np.ndarray
    stress_note: float


def classical_mds(d, dims=2, pad=False):
    """Classical (Torgerson-Gower) scaling of a distance matrix.

    ``stress_note`` is the share of the positive eigenvalue mass kept by the
    first ``dims`` axes. With ``pad`` a configuration of lower rank than
    ``dims`` gets zero columns instead of raising.
    """
    v = np.asarray(getattr(d, "values", d), dtype=float)
    n = v.shape[0]
    if v.shape != (n, n) or not np.allclose(v, v.T) or np.any(np.diag(v) != 0):
        raise ValueError("need a symmetric distance matrix with zero diagonal")
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (v ** 2) @ j
    b = (b + b.T) / 2
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    tol = RANK_TOL * max(1.0, np.abs(evals).max())
    positive = evals > tol
    npos = int(positive.sum())
    if npos < dims and not (pad and npos > 0):
        raise NotEnoughPositiveEigenvalues(f"{npos} positive eigenvalues, need {dims}")
    k = min(dims, npos)
    coords = np.zeros((n, dims))
    coords[:, :k] = _orient(evecs[:, :k] * np.sqrt(evals[:k]))
    coords = coords - coords.mean(axis=0)
    kept = float(evals[:k].sum() / evals[positive].sum())
    return MdsResult(coords=coords, eigenvalues=evals, stress_note=kept)


@dataclass(frozen=True, eq=False)
class DensityCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float


def silverman_bandwidth(x):
    x = np.asarray(x, dtype=float)
    sd = x.std(ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    # quartiles can coincide on lumpy data even when sd > 0
    if not spread > 0:
        spread = sd
    return 0.9 * spread * x.size ** (-0.2)


def kernel_density(values, grid_size=512):
    """Gaussian kernel density with the rule-of-thumb bandwidth."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2 or np.all(x == x[0]):
        raise DegenerateData("need at least two distinct values")
    h = silverman_bandwidth(x)
    grid = np.linspace(x.min() - 3 * h, x.max() + 3 * h, grid_size)
    dens = norm.pdf((grid[:, None] - x[None, :]) / h).sum(axis=1) / (x.size * h)
    return DensityCurve(grid=grid, density=dens, bandwidth=float(h))


def _coords(obj):
    if isinstance(obj, MdsResult):
        return obj.coords
    if isinstance(obj, PcaResult):
        return obj.scores[:, :2]
    return np.asarray(obj, dtype=float)


def group_map_stats(coords, countries, groups, focal=None):
    """Centroid diagnostics of country groups on a 2-D map.

    Parameters
    ----------
    coords : MdsResult, PcaResult or (n, 2) array
    countries : sequence of str
        Row labels of ``coords``.
    groups : dict
        Country code to group name; every country needs a group.
    focal : str, optional
        Country whose average distance to all others is reported.

    Returns
    -------
    dict
        ``groups`` (per-group centroid, size, within-group mean distance to
        the centroid), ``between`` (mean distance between centroids),
        ``origin`` (mean distance to the origin) and, with ``focal``,
        ``focal_distance``.
    """
    xy = _coords(coords)
    countries = list(countries)
    if xy.shape[0] != len(countries):
        raise DimensionMismatch("one coordinate row per country expected")
    missing = [c for c in countries if c not in groups]
    if missing:
        raise ValueError(f"countries without a group: {missing}")
    names = sorted({groups[c] for c in countries})
    report = {"groups": {}}
    centroids = []
    for g in names:
        rows = [i for i, c in enumerate(countries) if groups[c] == g]
        pts = xy[rows]
        cen = pts.mean(axis=0)
        if len(rows) == 1:
            warnings.warn(SingletonGroup(f"group {g!r} has one member"), stacklevel=2)
        report["groups"][g] = {
            "size": len(rows),
            "centroid": cen.tolist(),
            "within": float(np.linalg.norm(pts - cen, axis=1).mean()),
        }
        centroids.append(cen)
    centroids = np.array(centroids)
    report["between"] = float(pdist(centroids).mean()) if len(names) > 1 else 0.0
    report["origin"] = float(np.linalg.norm(xy, axis=1).mean())
    if focal is not None:
        if focal not in countries:
            raise ValueError(f"focal country {focal!r} not on the map")
        f = countries.index(focal)
        others = np.delete(xy, f, axis=0)
        report["focal"] = focal
        report["focal_distance"] = float(np.linalg.norm(others - xy[f], axis=1).mean())
    return report
