"""The K(m) stability functional and sample-size budgets.

K(m) is the boundary maximum of sum_j |L_j(x)|^2 where (L_j) is an
orthonormal basis, with respect to the sampling density nu, of the span
of the multipole traces.  It depends only on the span and the density,
lower-bounds at m, and controls how many samples make the least-squares
fit stable: the theorem budget requires K(m) <= kappa(r) n / log n,
while the practical rule simply takes n = K(m) samples.

Orthonormalization is done by SVD whitening of the column-scaled trace
matrix under a deterministic nu-quantile midpoint quadrature (a seeded
Monte-Carlo mode is available as a cross-check); classical Gram-Schmidt
loses orthogonality catastrophically on the severely graded Hankel
columns, SVD does not.  When the quadrature cannot resolve the full
m-dimensional span in double precision, trailing singular values are
discarded and the estimate is flagged rank-deficient rather than
returning a garbage maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError
from .solver import assemble_matrix, _as_family_tuple

_EVAL_CHUNK = 8192
_SVD_CUTOFF = 1e-13


@dataclass(frozen=True)
class KEstimate:
    """Estimated K for one (basis, density) pair."""

    m: int
    K: float
    quadrature_size: int
    evaluation_size: int
    discarded: int
    smallest_ratio: float
    rank_deficient: bool


def _christoffel_whiten(b_quad, svd_cutoff=_SVD_CUTOFF):
    """Column scaling + SVD whitening of the quadrature-node trace matrix.

    Returns (col_scale, transform G, U-kept, kept singular values); the
    orthonormal basis is L(x) = psi(x) @ (col_scale * G) with
    sum_j |L_j(x)|^2 the squared row norm.
    """
    mq = b_quad.shape[0]
    col_scale = 1.0 / np.abs(b_quad).max(axis=0)
    a = (b_quad * col_scale[None, :]) / math.sqrt(mq)
    u, sig, vh = np.linalg.svd(a, full_matrices=False)
    keep = sig >= svd_cutoff * sig[0]
    g = vh[keep].conj().T / sig[keep][None, :]
    return col_scale, g, u[:, keep], sig[keep]


def _k_from_matrices(b_quad, b_eval, svd_cutoff=_SVD_CUTOFF):
    """K and rank data from trace matrices at quadrature and eval points."""
    mq = b_quad.shape[0]
    col_scale, g, u_kept, sig = _christoffel_whiten(b_quad, svd_cutoff)
    k_quad = mq * float(np.max(np.einsum("ij,ij->i", u_kept.real, u_kept.real)
                               + np.einsum("ij,ij->i", u_kept.imag, u_kept.imag)))
    k_eval = 0.0
    scaled_g = col_scale[:, None] * g
    for start in range(0, b_eval.shape[0], _EVAL_CHUNK):
        block = b_eval[start:start + _EVAL_CHUNK] @ scaled_g
        k_eval = max(k_eval, float(np.max(np.abs(block) ** 2 @ np.ones(block.shape[1]))))
    rank = int(u_kept.shape[1])
    return max(k_quad, k_eval), rank, float(sig[-1] / sig[0])


def estimate_K(families, scatterer, density, quadrature_size=None,
               evaluation_size=None, svd_cutoff=_SVD_CUTOFF,
               sampling="quantile", rng=None):
    """Estimate K(m) for multipole families against a boundary density.

    Parameters
    ----------
    families : MultipoleFamily or sequence
        Basis families; m is the total number of trace functions.
    scatterer, density
        The boundary and the sampling density bound to it.
    quadrature_size : int, optional
        Number of nu-quadrature nodes (default 20*m, the minimum).
    evaluation_size : int, optional
        Extra nu-quantile maximization points (default 4*quadrature).
    sampling : {"quantile", "montecarlo"}
        Deterministic quantile-midpoint rule, or seeded iid draws from
        nu (requires rng) for cross-checks.

    Returns
    -------
    KEstimate
        With ``rank_deficient`` set when trailing singular values below
        ``svd_cutoff * sigma_1`` had to be discarded; K then refers to
        the retained subspace.
    """
    families = _as_family_tuple(families)
    m = sum(f.size for f in families)
    mq = int(quadrature_size) if quadrature_size is not None else 20 * m
    me = int(evaluation_size) if evaluation_size is not None else 4 * mq
    if mq < 20 * m:
        raise ConfigurationError(f"quadrature size {mq} below 20*m = {20 * m}")
    if me < 4 * mq:
        raise ConfigurationError(f"evaluation size {me} below 4*quadrature = {4 * mq}")
    if sampling == "quantile":
        uq = (np.arange(mq) + 0.5) / mq
    elif sampling == "montecarlo":
        if rng is None:
            raise ConfigurationError("montecarlo sampling requires rng")
        uq = np.sort(rng.random(mq))
    else:
        raise ConfigurationError(f"unknown sampling mode {sampling!r}")
    t_quad = density.inverse_cdf(uq)
    t_eval = density.inverse_cdf((np.arange(me) + 0.5) / me)
    pts_q, _ = scatterer.boundary(t_quad)
    pts_e, _ = scatterer.boundary(t_eval)
    b_quad = assemble_matrix(families, pts_q)
    b_eval = assemble_matrix(families, pts_e)
    k_val, rank, ratio = _k_from_matrices(b_quad, b_eval, svd_cutoff)
    return KEstimate(
        m=m,
        K=k_val,
        quadrature_size=mq,
        evaluation_size=me,
        discarded=m - rank,
        smallest_ratio=ratio,
        rank_deficient=(m - rank) > 0,
    )


def kappa(r):
    """Oversampling constant kappa(r) = (1 - log 2) / (2 + 2r)."""
    if r <= 0:
        raise ConfigurationError("r must be positive")
    return (1.0 - math.log(2.0)) / (2.0 + 2.0 * r)


class BudgetResult(NamedTuple):
    """Sample budget; ``satisfied`` is False when n_max saturates the bound."""

    n: int
    satisfied: bool


def sample_budget(K, n_max, r):
    """Smallest n <= n_max with K <= kappa(r) n / log n (natural log, n >= 3).

    Returns a flagged saturation result (n = n_max, satisfied=False)
    when no admissible n exists.
    """
    if K < 1.0:
        raise ConfigurationError("K must be >= 1")
    if n_max < 3:
        raise ConfigurationError("n_max must be >= 3")
    kap = kappa(r)

    def ok(n):
        return kap * n / math.log(n) >= K

    if not ok(n_max):
        return BudgetResult(n=int(n_max), satisfied=False)
    lo, hi = 3, int(n_max)
    if ok(lo):
        return BudgetResult(n=lo, satisfied=True)
    # ok is monotone on n >= 3: bisect the first admissible n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return BudgetResult(n=hi, satisfied=True)


def practical_budget(K):
    """The empirical rule n = ceil(K); a 1e-9 slack absorbs float noise
    so the exact lower-bound case K = m yields n = m."""
    if K < 1.0:
        raise ConfigurationError("K must be >= 1")
    return int(math.ceil(K - 1e-9))
