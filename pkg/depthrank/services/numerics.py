"""
Special functions and small-dimension linear algebra.

Every other service consumes these. All functions are pure and safe to
call from any number of threads.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import linalg, special

from depthrank.core.errors import (
    DomainError,
    FactorizationError,
    InsufficientDataError,
)

logger = logging.getLogger(__name__)

MAX_DIM = 10
SERIES_TAIL = 1e-12


def std_normal_cdf(x):
    """Standard normal cdf Φ(x); saturates at the tails."""
    return special.ndtr(x)


def std_normal_quantile(p):
    """Inverse of Φ on the open unit interval."""
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0.0) | (p_arr >= 1.0)) or np.any(np.isnan(p_arr)):
        raise DomainError("normal quantile needs 0 < p < 1", p=p_arr)
    return special.ndtri(p)


def chisq_quantile(p: float, d: int) -> float:
    """p-th quantile of the central chi-square law with d degrees of freedom."""
    if not 0.0 < p < 1.0:
        raise DomainError("chi-square quantile needs 0 < p < 1", p=p)
    if int(d) != d or d < 1:
        raise DomainError("degrees of freedom must be a positive integer", d=d)
    return float(special.chdtri(d, 1.0 - p))


def chisq_sf(x, d: int):
    """Central chi-square survival function P(Z > x)."""
    return special.chdtrc(d, np.maximum(x, 0.0))


def _poisson_terms(half_ncp: float) -> np.ndarray:
    """Indices k whose Poisson(half_ncp) weights cover all but SERIES_TAIL mass."""
    spread = 10.0 * np.sqrt(half_ncp) + 30.0
    lo = max(0, int(np.floor(half_ncp - spread)))
    hi = int(np.ceil(half_ncp + spread))
    # widen until both tails are below the bound
    while lo > 0 and special.pdtr(lo - 1, half_ncp) > SERIES_TAIL / 2:
        lo = max(0, lo - int(spread))
    while special.pdtrc(hi, half_ncp) > SERIES_TAIL / 2:
        hi += int(spread)
    return np.arange(lo, hi + 1)


def noncentral_chisq_sf(x, d: int, ncp: float):
    """
    Survival function of the noncentral chi-square law.

    Evaluated as the Poisson(ncp/2)-weighted mixture of central chi-square
    survival functions with d + 2k degrees of freedom, truncated where the
    omitted Poisson weight falls below 1e-12.
    """
    if ncp < 0:
        raise DomainError("noncentrality must be nonnegative", ncp=ncp)
    if int(d) != d or d < 1:
        raise DomainError("degrees of freedom must be a positive integer", d=d)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("noncentral chi-square sf needs x >= 0", x=x_arr)

    if ncp == 0:
        out = chisq_sf(x_arr, d)
        return float(out) if out.ndim == 0 else out

    half = 0.5 * ncp
    k = _poisson_terms(half)
    log_w = k * np.log(half) - half - special.gammaln(k + 1.0)
    weights = np.exp(log_w)
    dofs = d + 2.0 * k
    terms = special.chdtrc(dofs[:, None], x_arr.reshape(1, -1))
    out = np.clip(weights @ terms, 0.0, 1.0)
    return float(out[0]) if x_arr.ndim == 0 else out.reshape(x_arr.shape)


def noncentral_chisq_cdf(x, d: int, ncp: float):
    """Complement of noncentral_chisq_sf."""
    return 1.0 - noncentral_chisq_sf(x, d, ncp)


def _as_square(M) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DomainError("expected a nonempty square matrix", shape=A.shape)
    if A.shape[0] > MAX_DIM:
        raise DomainError(f"matrix dimension above {MAX_DIM} is not supported", dim=A.shape[0])
    return A


def invert(M) -> np.ndarray:
    """Inverse of a nonsingular square matrix."""
    A = _as_square(M)
    try:
        inv = linalg.inv(A, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise FactorizationError(f"matrix is singular: {exc}", dim=A.shape[0]) from exc
    if not np.all(np.isfinite(inv)):
        raise FactorizationError("matrix is numerically singular", dim=A.shape[0])
    return inv


def determinant(M) -> float:
    return float(linalg.det(_as_square(M)))


def cholesky(M) -> np.ndarray:
    """Lower-triangular L with L·Lᵀ = M for symmetric positive definite M."""
    A = _as_square(M)
    if not np.allclose(A, A.T, rtol=1e-10, atol=1e-12):
        raise FactorizationError("matrix is not symmetric", dim=A.shape[0])
    try:
        return linalg.cholesky(A, lower=True)
    except linalg.LinAlgError as exc:
        raise FactorizationError(f"matrix is not positive definite: {exc}", dim=A.shape[0]) from exc


def solve_spd(M, b) -> np.ndarray:
    """Solve M·x = b for SPD M through its Cholesky factor."""
    A = _as_square(M)
    try:
        factor = linalg.cho_factor(A, lower=True)
    except linalg.LinAlgError as exc:
        raise FactorizationError(f"matrix is not positive definite: {exc}", dim=A.shape[0]) from exc
    return linalg.cho_solve(factor, b)


def as_sample(S) -> np.ndarray:
    """Coerce an observation matrix (or 1-D vector of scalars) to n×d floats."""
    arr = np.asarray(S, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DomainError("a sample must be an n×d matrix", shape=arr.shape)
    return arr


def sample_mean_cov(S) -> Tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased (n−1 divisor) covariance."""
    X = as_sample(S)
    n = X.shape[0]
    if n < 2:
        raise InsufficientDataError("mean and covariance need at least 2 observations", n=n)
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)
    return mean, 0.5 * (cov + cov.T)
