"""Wishart and G-Wishart sampling.

The G-Wishart ``W_G(b, D)`` has density proportional to
``|K|^{(b-2)/2} exp(-tr(D K)/2)`` on positive-definite ``K`` with zeros on
the non-edges of ``G``. For the complete graph it is the ordinary Wishart
with ``b + p - 1`` degrees of freedom and scale ``D^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceFailure, NumericalFailure
from ._kernels import complete_by_components
from .graph import as_adjacency

COMPLETION_TOL = 1e-8
COMPLETION_MAX_CYCLES = 100
# cap used inside the chain, where prior-like draws can be badly conditioned
CHAIN_MAX_CYCLES = 1000


@dataclass(frozen=True, eq=False)
class GWishartParams:
    b: float
    D: np.ndarray

    def __post_init__(self):
        D = np.array(self.D, dtype=float)
        if not self.b > 2:
            raise ValueError("degrees of freedom b must exceed 2")
        if D.ndim != 2 or D.shape[0] != D.shape[1] or not np.allclose(D, D.T):
            raise ValueError("D must be a symmetric square matrix")
        try:
            np.linalg.cholesky(D)
        except np.linalg.LinAlgError:
            raise ValueError("D must be positive definite") from None
        object.__setattr__(self, "D", D)

    @property
    def p(self):
        return self.D.shape[0]

    def posterior(self, u, n):
        """Parameters after observing latent data with moment matrix ``u = Z'Z`` from ``n`` rows."""
        return GWishartParams(self.b + n, self.D + u)


def sample_wishart(df, scale_chol, rng):
    """Bartlett draw of ``W_p(df, S)`` given the lower Cholesky factor of ``S``."""
    p = scale_chol.shape[0]
    a = np.zeros((p, p))
    a[np.diag_indices(p)] = np.sqrt(rng.chisquare(df - np.arange(p)))
    il = np.tril_indices(p, -1)
    a[il] = rng.standard_normal(len(il[0]))
    la = scale_chol @ a
    return la @ la.T


def draw_gwishart(df, scale_chol, adj, rng, tol=COMPLETION_TOL,
                  max_cycles=COMPLETION_MAX_CYCLES):
    """Unchecked G-Wishart draw from the Wishart ``df`` and ``chol(D^{-1})``."""
    p = adj.shape[0]
    k0 = sample_wishart(df, scale_chol, rng)
    offdiag = ~np.eye(p, dtype=bool)
    if adj[offdiag].all():
        return (k0 + k0.T) / 2
    sigma = np.linalg.inv(k0)
    w, cycles = complete_by_components((sigma + sigma.T) / 2, adj, tol, max_cycles)
    if cycles < 0:
        raise ConvergenceFailure(max_cycles)
    k = np.linalg.inv(w)
    k = (k + k.T) / 2
    k[offdiag & ~adj] = 0.0
    return k


def sample_gwishart(params, g, rng, tol=COMPLETION_TOL, max_cycles=COMPLETION_MAX_CYCLES):
    """Draw ``K ~ W_G(b, D)`` with exact zeros on the non-edges of ``g``.

    Uses a full Wishart draw followed by the iterative covariance completion
    that enforces the zero pattern (Lenkoski's direct sampler).
    """
    adj = np.ascontiguousarray(as_adjacency(g))
    p = params.p
    if adj.shape != (p, p):
        raise ValueError("graph and scale matrix sizes differ")
    chol = np.linalg.cholesky(np.linalg.inv(params.D))
    k = draw_gwishart(params.b + p - 1, chol, adj, rng, tol, max_cycles)
    try:
        np.linalg.cholesky(k)
    except np.linalg.LinAlgError:
        raise NumericalFailure("G-Wishart draw is not positive definite") from None
    return k
