"""Country-pair distances, [0, 1] standardization and the fused network index.

Measures
--------
ParCorr, ProbEdge
    Frobenius norm of the difference of two p x p matrices (full matrix, so
    each off-diagonal pair counts twice).
MargDistr
    Root-sum-square over variables of a symmetrized KL divergence between
    the empirical marginals.
Mean, CulturalMap
    Euclidean distance between mean vectors or map coordinates.
NetworkIndex
    Standardized MargDistr plus standardized ParCorr, standardized again.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import CountryMismatch, DegenerateRange, DimensionMismatch, NoCommonSupport

MEASURES = ("ParCorr", "ProbEdge", "MargDistr", "Mean", "CulturalMap", "NetworkIndex")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    measure: str
    countries: tuple
    values: np.ndarray
    standardized: bool = False
    raw_min: float | None = None
    raw_max: float | None = None

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        v = np.array(self.values, dtype=float)
        n = len(self.countries)
        if v.shape != (n, n):
            raise DimensionMismatch(f"{n} countries but values of shape {v.shape}")
        if not np.allclose(v, v.T, rtol=0, atol=1e-12) or np.any(np.diag(v) != 0):
            raise ValueError("distance matrix must be symmetric with zero diagonal")
        if np.any(v < 0):
            raise ValueError("distances must be non-negative")
        v = (v + v.T) / 2
        v.flags.writeable = False
        object.__setattr__(self, "countries", tuple(self.countries))
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return len(self.countries)

    def upper(self):
        """Off-diagonal upper-triangle entries in row-major pair order."""
        return self.values[np.triu_indices(self.n, 1)]

    def to_dict(self):
        return {"measure": self.measure, "countries": list(self.countries),
                "values": self.values.tolist(), "standardized": self.standardized,
                "raw_min": self.raw_min, "raw_max": self.raw_max}

    @classmethod
    def from_dict(cls, d):
        return cls(d["measure"], tuple(d["countries"]), np.array(d["values"], dtype=float),
                   bool(d["standardized"]), d.get("raw_min"), d.get("raw_max"))


def _frobenius(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def parcorr_distance(pc_l, pc_m):
    return _frobenius(pc_l, pc_m)


def probedge_distance(pp_l, pp_m):
    return _frobenius(pp_l, pp_m)


def _pmf(f):
    return f.pmf if hasattr(f, "pmf") else f


def phi_terms(f_l, f_m):
    """Symmetrized KL divergence and the categories left out of the sum.

    Only categories with positive frequency in both pmfs enter the sum.
    Returns ``(phi, excluded)`` with ``excluded`` a sorted list of categories.
    """
    pl, pm = _pmf(f_l), _pmf(f_m)
    common = sorted(c for c in set(pl) & set(pm) if pl[c] > 0 and pm[c] > 0)
    if not common:
        raise NoCommonSupport("the two distributions share no category with positive frequency")
    a = np.array([pl[c] for c in common], dtype=float)
    b = np.array([pm[c] for c in common], dtype=float)
    lr = np.log(b) - np.log(a)
    phi = float(np.sum(b * lr - a * lr)) / 2.0
    excluded = sorted(c for c in set(pl) | set(pm) if c not in common)
    return max(phi, 0.0), excluded


def phi_divergence(f_l, f_m):
    return phi_terms(f_l, f_m)[0]


def margdistr_distance(marginals_l, marginals_m):
    if len(marginals_l) != len(marginals_m):
        raise DimensionMismatch("marginal lists differ in length")
    phis = np.array([phi_divergence(a, b) for a, b in zip(marginals_l, marginals_m)])
    return float(np.sqrt(np.sum(phis ** 2)))


def mean_distance(means_l, means_m):
    a = np.asarray(means_l, dtype=float)
    b = np.asarray(means_m, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"lengths {a.shape} and {b.shape} differ")
    return float(np.linalg.norm(a - b))


def culturalmap_distance(coords_l, coords_m):
    return mean_distance(coords_l, coords_m)


def pairwise(measure, countries, items, fn):
    """DistanceMatrix with ``fn(items[a], items[b])`` for every country pair."""
    n = len(countries)
    v = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            v[a, b] = v[b, a] = fn(items[a], items[b])
    return DistanceMatrix(measure, tuple(countries), v)


def excluded_categories(countries, marginals):
    """Per pair and variable, the categories dropped from the divergence sum."""
    out = []
    for a in range(len(countries)):
        for b in range(a + 1, len(countries)):
            for fa, fb in zip(marginals[a], marginals[b]):
                excl = phi_terms(fa, fb)[1]
                if excl:
                    out.append({"country_a": countries[a], "country_b": countries[b],
                                "variable": getattr(fa, "variable", None), "excluded": excl})
    return out


def standardize(d):
    """Affine map of the off-diagonal entries onto [0, 1]; idempotent."""
    off = d.upper()
    if off.size == 0:
        raise DegenerateRange("need at least two countries")
    lo, hi = float(off.min()), float(off.max())
    if not hi > lo:
        raise DegenerateRange(f"all {d.measure} distances equal {lo}")
    v = (d.values - lo) / (hi - lo)
    v[np.triu_indices(d.n, 1)] = np.clip(v[np.triu_indices(d.n, 1)], 0.0, 1.0)
    v = np.triu(v, 1)
    v = v + v.T
    if d.standardized:
        lo, hi = d.raw_min, d.raw_max
    return DistanceMatrix(d.measure, d.countries, v, True, lo, hi)


def network_index(margdistr_s, parcorr_s):
    """Standardized sum of standardized MargDistr and ParCorr."""
    if margdistr_s.countries != parcorr_s.countries:
        raise CountryMismatch("MargDistr and ParCorr cover different countries")
    if not (margdistr_s.standardized and parcorr_s.standardized):
        raise ValueError("network index needs standardized inputs")
    summed = DistanceMatrix("NetworkIndex", margdistr_s.countries,
                            margdistr_s.values + parcorr_s.values)
    return standardize(summed)


def raw_values(d):
    """Unstandardized distances, recovered from the recorded range when needed."""
    if not d.standardized:
        return d.values
    v = d.raw_min + d.values * (d.raw_max - d.raw_min)
    np.fill_diagonal(v, 0.0)
    return v


def long_form_csv(matrices):
    """``country_a,country_b,measure,raw_value,standardized_value`` for every pair and measure."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("country_a", "country_b", "measure", "raw_value", "standardized_value"))
    for d in matrices:
        raw = raw_values(d)
        std = d.values if d.standardized else standardize(d).values
        for a in range(d.n):
            for b in range(a + 1, d.n):
                w.writerow((d.countries[a], d.countries[b], d.measure,
                            repr(float(raw[a, b])), repr(float(std[a, b]))))
    return buf.getvalue()


def measure_correlations(matrices):
    """Pearson correlations between measures over country pairs."""
    names = [d.measure for d in matrices]
    x = np.column_stack([d.upper() for d in matrices])
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.corrcoef(x, rowvar=False)
    return names, np.atleast_2d(c)

