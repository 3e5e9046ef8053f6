"""
Depth functions and the depth-based rank transform.

Four depths are available: Mahalanobis, halfspace (Tukey), projection
and the 1-D empirical cdf. Every single-point operation is a thin wrapper
around ``depth_values``, which evaluates many query points against one
reference sample and shares the direction set between them, so ranks
computed from one call are mutually consistent.

Exact algorithms exist for d ≤ 2 (halfspace, projection) and any d
(Mahalanobis, cdf1d for d = 1); approximate algorithms optimize over a
random direction set and bound the exact depth from above.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from depthrank.core.config import settings
from depthrank.core.errors import (
    DegenerateSampleError,
    DegenerateScaleError,
    DomainError,
    InsufficientDataError,
    UnsupportedConfigurationError,
)
from depthrank.services.model import RngStream
from depthrank.services.numerics import as_sample, sample_mean_cov
from depthrank.services.parallel import chunk_ranges, ordered_map

logger = logging.getLogger(__name__)

METHODS = ("mahalanobis", "halfspace", "projection", "cdf1d")
MODES = ("exact", "approximate")
LOCATION_SCALES = ("median-mad", "mean-sd")

TWO_PI = 2.0 * np.pi
HALF_PI = 0.5 * np.pi
ANGLE_TOL = 1e-10
SCALE_TOL = 1e-12
DIRECTION_CHUNK = 4096
QUERY_CHUNK = 2048


@dataclass(frozen=True)
class DepthSpec:
    """Which depth to compute, and how."""

    method: str = "halfspace"
    mode: str = "exact"
    n_directions: int = settings.DEFAULT_DIRECTIONS
    location_scale: str = "median-mad"
    mad_constant: float = 1.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown depth method '{self.method}'", valid=list(METHODS))
        if self.mode not in MODES:
            raise DomainError(f"unknown depth mode '{self.mode}'", valid=list(MODES))
        if self.location_scale not in LOCATION_SCALES:
            raise DomainError(
                f"unknown location-scale pair '{self.location_scale}'",
                valid=list(LOCATION_SCALES),
            )
        if int(self.n_directions) < 1:
            raise DomainError("n_directions must be positive", n_directions=self.n_directions)
        if not self.mad_constant > 0:
            raise DomainError("mad_constant must be positive", mad_constant=self.mad_constant)

    def check_dim(self, dim: int) -> None:
        if self.method == "cdf1d" and dim != 1:
            raise UnsupportedConfigurationError("cdf1d depth is only defined for d = 1", dim=dim)
        if self.mode == "exact" and self.method in ("halfspace", "projection") and dim > 2:
            raise UnsupportedConfigurationError(
                f"exact {self.method} depth is only available for d <= 2; use approximate mode",
                dim=dim,
            )

    def label(self) -> str:
        if self.method == "projection":
            return f"projection/{self.location_scale}/{self.mode}"
        return f"{self.method}/{self.mode}"


def depth_values(queries, ref, spec: DepthSpec, rng=None, n_jobs: Optional[int] = 1) -> np.ndarray:
    """
    Depth of every row of ``queries`` with respect to the sample ``ref``.

    Approximate modes draw their direction set once from ``rng`` (an
    RngStream or numpy Generator; stream (0, 0) when omitted) and use it
    for every query. Queries are evaluated in fixed blocks of QUERY_CHUNK
    rows spread over ``n_jobs`` workers, so the worker count never changes
    a value.
    """
    Q = as_sample(queries)
    X = as_sample(ref)
    if X.shape[0] == 0:
        raise InsufficientDataError("reference sample is empty")
    if Q.shape[1] != X.shape[1]:
        raise DomainError("query and reference dimensions differ", query=Q.shape[1], ref=X.shape[1])
    spec.check_dim(X.shape[1])

    # identical query rows must receive bit-identical depths
    unique, inverse = np.unique(Q, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    U = None
    if spec.mode == "approximate" and spec.method in ("halfspace", "projection") and X.shape[1] > 1:
        U = random_directions(spec.n_directions, X.shape[1], rng)

    blocks = [unique[start:stop] for start, stop in chunk_ranges(unique.shape[0], QUERY_CHUNK)]
    parts = ordered_map(lambda block: _depth_block(block, X, spec, U), blocks, n_jobs=n_jobs)
    if not parts:
        return np.empty(0)
    return np.concatenate(parts)[inverse]


def _depth_block(Q: np.ndarray, X: np.ndarray, spec: DepthSpec, U: Optional[np.ndarray]) -> np.ndarray:
    if spec.method == "mahalanobis":
        return _mahalanobis(Q, X)
    if spec.method == "cdf1d":
        return _cdf1d(Q[:, 0], X[:, 0])
    if spec.method == "halfspace":
        return _halfspace(Q, X, spec, U)
    return _projection(Q, X, spec, U)


def mahalanobis_depth(x, ref) -> float:
    return float(depth_values(np.atleast_2d(x), ref, DepthSpec(method="mahalanobis"))[0])


def halfspace_depth(x, ref, spec: Optional[DepthSpec] = None, rng=None) -> float:
    spec = spec or DepthSpec(method="halfspace")
    return float(depth_values(np.atleast_2d(x), ref, spec, rng)[0])


def projection_depth(x, ref, spec: Optional[DepthSpec] = None, rng=None) -> float:
    spec = spec or DepthSpec(method="projection")
    return float(depth_values(np.atleast_2d(x), ref, spec, rng)[0])


def cdf_depth_1d(x: float, ref) -> float:
    return float(depth_values(np.array([[x]], dtype=float), ref, DepthSpec(method="cdf1d"))[0])


def rank_counts(queries, ref, spec: DepthSpec, rng=None, n_jobs: Optional[int] = 1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    #{i : D(X_i) <= D(y)} for every query row y, as integers.

    Returns (counts, ref_depths, query_depths), all depths computed against
    ``ref`` in a single pass.
    """
    X = as_sample(ref)
    Q = as_sample(queries)
    m = X.shape[0]
    depths = depth_values(np.vstack([X, Q]), X, spec, rng, n_jobs=n_jobs)
    ref_depths, query_depths = depths[:m], depths[m:]
    counts = np.searchsorted(np.sort(ref_depths), query_depths, side="right")
    return counts, ref_depths, query_depths


def rank_values(queries, ref, spec: DepthSpec, rng=None, n_jobs: Optional[int] = 1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Empirical rank transform R(y; F_m) = #{i : D(X_i) <= D(y)} / m, with both depth arrays."""
    counts, ref_depths, query_depths = rank_counts(queries, ref, spec, rng, n_jobs=n_jobs)
    return counts / ref_depths.size, ref_depths, query_depths


def rank_transform(y, ref, spec: DepthSpec, rng=None) -> float:
    ranks, _, _ = rank_values(np.atleast_2d(y), ref, spec, rng)
    return float(ranks[0])


def random_directions(count: int, dim: int, rng=None) -> np.ndarray:
    """Unit vectors drawn uniformly on the sphere S^{dim-1}."""
    gen = _generator(rng)
    U = gen.standard_normal((int(count), dim))
    norms = np.linalg.norm(U, axis=1)
    norms[norms == 0] = 1.0
    return U / norms[:, None]


def projected_location_scale(ref, spec: DepthSpec, directions) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Univariate (location, scale) of the projected reference sample along
    each direction, plus the infimum of the scale over the directions.
    """
    X = as_sample(ref)
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    loc, scale = _location_scale(X @ U.T, spec)
    return loc, scale, float(scale.min())


def _generator(rng) -> np.random.Generator:
    if rng is None:
        return RngStream(0, 0).generator()
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def _mahalanobis(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    m, d = X.shape
    if m < d + 1:
        raise InsufficientDataError("Mahalanobis depth needs at least d + 1 reference points", m=m, d=d)
    mean, cov = sample_mean_cov(X)
    L = _cholesky_or_degenerate(cov, "reference sample covariance is singular")
    w = linalg.solve_triangular(L, (Q - mean).T, lower=True)
    return 1.0 / (1.0 + np.sum(w * w, axis=0))


def _cholesky_or_degenerate(cov: np.ndarray, message: str) -> np.ndarray:
    scale = max(float(np.max(np.abs(np.diag(cov)))), np.finfo(float).tiny)
    try:
        L = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise DegenerateSampleError(message) from exc
    if np.min(np.abs(np.diag(L))) ** 2 <= 1e-12 * scale:
        raise DegenerateSampleError(message)
    return L


def _cdf1d(q: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.searchsorted(np.sort(x), q, side="right") / x.size


def _halfspace(Q: np.ndarray, X: np.ndarray, spec: DepthSpec, U: Optional[np.ndarray]) -> np.ndarray:
    m, d = X.shape
    if d == 1:
        counts = _halfspace_counts_1d(Q[:, 0], X[:, 0])
    elif spec.mode == "exact":
        counts = np.array([_halfspace_count_2d(x, X) for x in Q], dtype=np.int64)
    else:
        counts = _halfspace_counts_directions(Q, X, U)
    return counts / m


def _halfspace_counts_1d(q: np.ndarray, x: np.ndarray) -> np.ndarray:
    xs = np.sort(x)
    below = np.searchsorted(xs, q, side="right")
    above = x.size - np.searchsorted(xs, q, side="left")
    return np.minimum(below, above)


def _halfspace_count_2d(x: np.ndarray, X: np.ndarray) -> int:
    """
    Minimum number of points of X in a closed half-plane whose boundary
    passes through x, by an angular sweep.

    The count is piecewise constant in the normal angle and only changes
    at the angles θ_i ± π/2; it is evaluated at every such critical angle
    (with boundary points included) and at the midpoint of every gap.
    """
    diff = X - x
    coincident = np.all(diff == 0.0, axis=1)
    base = int(coincident.sum())
    diff = diff[~coincident]
    if diff.shape[0] == 0:
        return base

    theta = np.sort(np.mod(np.arctan2(diff[:, 1], diff[:, 0]), TWO_PI))
    wrapped = np.concatenate([theta, theta + TWO_PI])

    crit = np.sort(np.mod(np.concatenate([theta + HALF_PI, theta - HALF_PI]), TWO_PI))
    keep = np.concatenate([[True], np.diff(crit) > ANGLE_TOL])
    crit = crit[keep]
    if crit.size > 1 and crit[0] + TWO_PI - crit[-1] <= ANGLE_TOL:
        crit = crit[:-1]
    following = np.append(crit[1:], crit[0] + TWO_PI)
    mids = np.mod(0.5 * (crit + following), TWO_PI)

    def closed_counts(phi, tol):
        lo = np.mod(phi - HALF_PI, TWO_PI)
        hi = lo + np.pi
        return np.searchsorted(wrapped, hi + tol, side="right") - np.searchsorted(
            wrapped, lo - tol, side="left"
        )

    # shift lo by 2π when tolerance pushes it below zero
    at_crit = closed_counts(crit, ANGLE_TOL)
    low_edge = np.mod(crit - HALF_PI, TWO_PI) < ANGLE_TOL
    if np.any(low_edge):
        at_crit = at_crit.copy()
        at_crit[low_edge] += np.sum(theta >= TWO_PI - ANGLE_TOL)
    at_mid = closed_counts(mids, 0.0)
    return base + int(min(at_crit.min(), at_mid.min()))


def _halfspace_counts_directions(Q: np.ndarray, X: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Minimum closed-halfspace count over the directions ±U."""
    m = X.shape[0]
    ref_proj = np.sort(X @ U.T, axis=0)
    query_proj = Q @ U.T
    best = np.full(Q.shape[0], m, dtype=np.int64)
    for k in range(U.shape[0]):
        col = ref_proj[:, k]
        at_or_above = m - np.searchsorted(col, query_proj[:, k], side="left")
        at_or_below = np.searchsorted(col, query_proj[:, k], side="right")
        np.minimum(best, np.minimum(at_or_above, at_or_below), out=best)
    return best


def _location_scale(P: np.ndarray, spec: DepthSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Column-wise univariate location and scale of projected data."""
    if spec.location_scale == "mean-sd":
        if P.shape[0] < 2:
            raise InsufficientDataError("standard deviation needs at least 2 points", m=P.shape[0])
        return P.mean(axis=0), P.std(axis=0, ddof=1)
    loc = np.median(P, axis=0)
    mad = np.median(np.abs(P - loc), axis=0) * spec.mad_constant
    return loc, mad


def _projection(Q: np.ndarray, X: np.ndarray, spec: DepthSpec, U: Optional[np.ndarray]) -> np.ndarray:
    m, d = X.shape
    if d == 1:
        outlying = _outlyingness(Q, X, np.ones((1, 1)), spec)
    elif spec.mode == "approximate":
        outlying = _outlyingness(Q, X, U, spec)
    elif spec.location_scale == "mean-sd":
        outlying = _outlyingness_mean_sd(Q, X)
    else:
        outlying = np.zeros(Q.shape[0])
        for U in _critical_directions_2d(X):
            np.maximum(outlying, _outlyingness(Q, X, U, spec), out=outlying)
    return 1.0 / (1.0 + outlying)


def _outlyingness(Q: np.ndarray, X: np.ndarray, U: np.ndarray, spec: DepthSpec) -> np.ndarray:
    """max over the rows u of U of |uᵀq − μ(F_u)| / σ(F_u)."""
    loc, scale = _location_scale(X @ U.T, spec)
    scale_floor = SCALE_TOL * max(1.0, float(np.max(np.abs(X))))
    bad = np.flatnonzero(scale <= scale_floor)
    if bad.size:
        direction = U[bad[0]]
        raise DegenerateScaleError(
            f"projected scale is zero along direction {np.round(direction, 6).tolist()}",
            direction=direction,
        )
    return np.max(np.abs(Q @ U.T - loc) / scale, axis=1)


def _outlyingness_mean_sd(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    # sup_u |uᵀ(x − x̄)| / √(uᵀSu) is the Mahalanobis distance under S
    mean, cov = sample_mean_cov(X)
    try:
        L = _cholesky_or_degenerate(cov, "reference sample covariance is singular")
    except DegenerateSampleError as exc:
        raise DegenerateScaleError(
            "projected standard deviation vanishes in some direction",
            direction=np.linalg.eigh(cov)[1][:, 0],
        ) from exc
    w = linalg.solve_triangular(L, (Q - mean).T, lower=True)
    return np.sqrt(np.sum(w * w, axis=0))


def _critical_directions_2d(X: np.ndarray):
    """
    Chunks of unit directions containing every breakpoint of the projected
    median and MAD of a bivariate sample.

    Between breakpoints the outlyingness is a ratio of two linear forms in
    u and hence monotone, so its supremum is attained at a breakpoint.
    Breakpoints are normals of X_i − X_j and X_i + X_j − 2X_k for odd m,
    and of X_i + X_j − X_k − X_l for even m.
    """
    m = X.shape[0]
    if m % 2:
        i, j = np.triu_indices(m, k=1)
        pair_diff = X[i] - X[j]
        pair_sum = X[i] + X[j]
        total = pair_diff.shape[0] * (1 + m)
    else:
        i, j = np.triu_indices(m)
        pair_sum = X[i] + X[j]
        total = pair_sum.shape[0] * (pair_sum.shape[0] - 1) // 2

    budget = settings.PD_EXACT_BUDGET
    if total > budget:
        raise UnsupportedConfigurationError(
            f"exact projection depth needs {total} candidate directions (budget {budget}); "
            "use approximate mode",
            m=m,
            candidates=total,
        )
    logger.debug(f"Exact projection depth: {total} candidate directions for m={m}")

    if m % 2:
        yield _normals(pair_diff)
        for start in range(0, pair_sum.shape[0], max(1, DIRECTION_CHUNK // m)):
            block = pair_sum[start:start + max(1, DIRECTION_CHUNK // m)]
            yield _normals((block[:, None, :] - 2.0 * X[None, :, :]).reshape(-1, 2))
    else:
        a, b = np.triu_indices(pair_sum.shape[0], k=1)
        for start in range(0, a.size, DIRECTION_CHUNK):
            sl = slice(start, start + DIRECTION_CHUNK)
            yield _normals(pair_sum[a[sl]] - pair_sum[b[sl]])


def _normals(V: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(V, axis=1)
    keep = norms > 0
    N = np.column_stack([-V[keep, 1], V[keep, 0]]) / norms[keep, None]
    if N.shape[0] == 0:
        return np.array([[1.0, 0.0]])
    return N
