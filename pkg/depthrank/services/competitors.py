"""
Competitor two-sample tests: Hotelling's T² and the Oja rank test.

Both return a TestReport with a χ²(d) p-value. The Oja rank vector of a
point z averages sign(n0 + zᵀn)·n over d-subsets of the pooled sample,
where (n0, n) are the cofactors of the column (1, z) in the
(d+1)×(d+1) determinant built from the subset and z.
"""

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import Optional, Tuple

import numpy as np

from depthrank.core.config import settings
from depthrank.core.errors import (
    DegenerateRankError,
    DegenerateSampleError,
    DomainError,
    FactorizationError,
    InsufficientDataError,
)
from depthrank.schemas.reports import TestReport
from depthrank.services.model import RngStream
from depthrank.services.numerics import (
    as_sample,
    chisq_quantile,
    chisq_sf,
    cholesky,
    solve_spd,
)
from depthrank.services.parallel import chunk_ranges, ordered_map

logger = logging.getLogger(__name__)

OJA_MODES = ("exact", "subset-sampled")
SUBSET_CHUNK = 20_000
SIGN_TOL = 1e-10
RANK_TOL = 1e-12


@dataclass(frozen=True)
class OjaConfig:
    """How the Oja rank vectors are computed."""

    mode: str = "exact"
    n_subsets: int = settings.OJA_DEFAULT_SUBSETS
    budget: int = settings.OJA_ENUMERATION_BUDGET

    def __post_init__(self):
        if self.mode not in OJA_MODES:
            raise DomainError(f"unknown Oja mode '{self.mode}'", valid=list(OJA_MODES))
        if int(self.n_subsets) < 1:
            raise DomainError("n_subsets must be positive", n_subsets=self.n_subsets)
        if int(self.budget) < 1:
            raise DomainError("enumeration budget must be positive", budget=self.budget)


@dataclass(frozen=True, eq=False)
class OjaRanks:
    """Rank vectors R_N(z) of a batch of points, with the sampling error if any."""

    ranks: np.ndarray  # k×d
    mode: str  # mode actually used
    n_subsets: int
    mc_se: Optional[float] = None


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)", alpha=alpha)


def _check_pair(X, Y) -> Tuple[np.ndarray, np.ndarray]:
    X, Y = as_sample(X), as_sample(Y)
    if X.shape[1] != Y.shape[1]:
        raise DomainError("samples have different dimensions", x_dim=X.shape[1], y_dim=Y.shape[1])
    if X.shape[0] == 0 or Y.shape[0] == 0:
        raise DomainError("both samples must be nonempty", m=X.shape[0], n=Y.shape[0])
    return X, Y


# Hotelling T²

def pooled_covariance(X, Y) -> np.ndarray:
    """((m−1)S_X + (n−1)S_Y)/(m+n−2)."""
    X, Y = _check_pair(X, Y)
    cx = X - X.mean(axis=0)
    cy = Y - Y.mean(axis=0)
    pooled = (cx.T @ cx + cy.T @ cy) / (X.shape[0] + Y.shape[0] - 2)
    return 0.5 * (pooled + pooled.T)


def hotelling_t2(X, Y) -> float:
    """T² = (X̄−Ȳ)ᵀ[(1/m+1/n)S_pooled]⁻¹(X̄−Ȳ)."""
    X, Y = _check_pair(X, Y)
    m, n = X.shape[0], Y.shape[0]
    d = X.shape[1]
    if m + n < d + 2:
        raise InsufficientDataError("Hotelling's T² needs m + n >= d + 2", m=m, n=n, d=d)
    S = pooled_covariance(X, Y)
    diff = X.mean(axis=0) - Y.mean(axis=0)
    try:
        L = cholesky(S)
    except FactorizationError as exc:
        raise DegenerateSampleError("pooled covariance is singular", m=m, n=n, d=d) from exc
    if np.min(np.diag(L)) ** 2 <= 1e-12 * max(float(np.max(np.diag(S))), np.finfo(float).tiny):
        raise DegenerateSampleError("pooled covariance is singular", m=m, n=n, d=d)
    w = solve_spd(S, diff)
    return float(diff @ w / (1.0 / m + 1.0 / n))


def hotelling_t2_test(X, Y, alpha: float = 0.05) -> TestReport:
    """Reject equal means when T² exceeds the (1−α) quantile of χ²(d)."""
    _check_alpha(alpha)
    X, Y = _check_pair(X, Y)
    d = X.shape[1]
    t2 = hotelling_t2(X, Y)
    critical = chisq_quantile(1.0 - alpha, d)
    p = float(chisq_sf(t2, d))
    return TestReport(
        test="t2",
        statistic=t2,
        p_value=min(1.0, max(0.0, p)),
        alpha=alpha,
        reject=bool(t2 > critical),
        m=X.shape[0],
        n=Y.shape[0],
        df=d,
        mode="exact",
    )


# Oja rank vectors

def subset_cofactors(pooled: np.ndarray, subsets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    (n0, n) for each subset: the cofactors of the last column of

        | 1        …  1        1 |
        | z_{i_1}  …  z_{i_d}  z |

    so that the determinant equals n0 + zᵀn.
    """
    d = pooled.shape[1]
    S = subsets.shape[0]
    block = np.ones((S, d + 1, d))
    block[:, 1:, :] = np.transpose(pooled[subsets], (0, 2, 1))
    cof = np.empty((S, d + 1))
    for r in range(d + 1):
        minor = np.delete(block, r, axis=1)
        cof[:, r] = (-1.0) ** (r + d) * np.linalg.det(minor)
    return cof[:, 0], cof[:, 1:]


def _subset_signs(n0: np.ndarray, normals: np.ndarray, Z: np.ndarray, bound: np.ndarray) -> np.ndarray:
    """sign(n0 + zᵀn) for every (subset, point) pair, with sign(0) = 0 relative to the Hadamard bound."""
    values = n0[:, None] + normals @ Z.T
    scale = bound[:, None] * np.sqrt(1.0 + np.sum(Z ** 2, axis=1))[None, :]
    signs = np.sign(values)
    signs[np.abs(values) <= SIGN_TOL * scale] = 0.0
    return signs


def _partial_sums(pooled: np.ndarray, Z: np.ndarray, subsets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n0, normals = subset_cofactors(pooled, subsets)
    bound = np.prod(np.sqrt(1.0 + np.sum(pooled[subsets] ** 2, axis=2)), axis=1)
    signs = _subset_signs(n0, normals, Z, bound)
    return signs.T @ normals, np.abs(signs).T @ (normals ** 2)


def _enumerated(N: int, d: int, start: int, stop: int) -> np.ndarray:
    combos = itertools.islice(itertools.combinations(range(N), d), start, stop)
    return np.array(list(combos), dtype=np.intp).reshape(-1, d)


def _sampled(N: int, d: int, count: int, gen: np.random.Generator) -> np.ndarray:
    """count subsets of size d drawn uniformly, with redraws for repeated indices."""
    out = gen.integers(0, N, size=(count, d))
    while True:
        srt = np.sort(out, axis=1)
        bad = np.flatnonzero(np.any(np.diff(srt, axis=1) == 0, axis=1))
        if bad.size == 0:
            return np.sort(out, axis=1)
        out[bad] = gen.integers(0, N, size=(bad.size, d))


def oja_rank_vectors(
    Z,
    pooled,
    cfg: Optional[OjaConfig] = None,
    rng=None,
    n_jobs: Optional[int] = 1,
) -> OjaRanks:
    """
    R_N(z) for every row z of Z against the pooled sample.

    Exact mode averages over all C(N, d) subsets and falls back to
    sampling when that exceeds the budget. Sampled mode draws n_subsets
    subsets uniformly, or enumerates when n_subsets already covers them.
    Chunks of subsets are summed in order, so the result does not depend
    on n_jobs.
    """
    cfg = cfg or OjaConfig()
    P = as_sample(pooled)
    Z = as_sample(Z)
    N, d = P.shape
    if N < d + 1:
        raise InsufficientDataError("Oja ranks need at least d + 1 pooled points", N=N, d=d)
    if Z.shape[1] != d:
        raise DomainError("point and pooled dimensions differ", point=Z.shape[1], pooled=d)

    total = comb(N, d)
    mode = cfg.mode
    if mode == "exact" and total > cfg.budget:
        logger.warning(
            f"Oja exact enumeration needs {total} subsets (budget {cfg.budget}); "
            f"sampling {cfg.n_subsets} subsets instead"
        )
        mode = "subset-sampled"
    enumerate_all = mode == "exact" or cfg.n_subsets >= total

    if enumerate_all:
        count = total
        tasks = chunk_ranges(total, SUBSET_CHUNK)
        parts = ordered_map(lambda t: _partial_sums(P, Z, _enumerated(N, d, *t)), tasks, n_jobs=n_jobs)
    else:
        count = int(cfg.n_subsets)
        gen = rng.generator() if isinstance(rng, RngStream) else (rng or RngStream(0, 0).generator())
        subsets = _sampled(N, d, count, gen)
        tasks = chunk_ranges(count, SUBSET_CHUNK)
        parts = ordered_map(lambda t: _partial_sums(P, Z, subsets[t[0]:t[1]]), tasks, n_jobs=n_jobs)

    sums = np.sum(np.stack([p[0] for p in parts]), axis=0)
    ranks = sums / count
    mc_se = None
    if not enumerate_all:
        squares = np.sum(np.stack([p[1] for p in parts]), axis=0)
        var = np.maximum(squares / count - ranks ** 2, 0.0)
        mc_se = float(np.sqrt(var.max() / count))
    return OjaRanks(ranks=ranks, mode=mode, n_subsets=count, mc_se=mc_se)


def oja_rank_vector(z, pooled, cfg: Optional[OjaConfig] = None, rng=None) -> np.ndarray:
    """R_N(z) for a single point."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return oja_rank_vectors(z, pooled, cfg, rng).ranks[0]


# Oja test

def contrast_weights(m: int, n: int) -> np.ndarray:
    """Weights of the two-sample contrast T = Σ a_k R_k: −λ on the first m rows, 1 − λ on the last n."""
    lam = n / (m + n)
    return np.where(np.arange(m + n) < m, -lam, 1.0 - lam)


def oja_statistic(X, Y, cfg: Optional[OjaConfig] = None, rng=None, n_jobs: Optional[int] = 1):
    """O = (Nλ(1−λ))⁻¹ TᵀB⁻¹T with the pooled rank vectors; returns (O, OjaRanks)."""
    X, Y = _check_pair(X, Y)
    m, n = X.shape[0], Y.shape[0]
    P = np.vstack([X, Y])
    N = m + n
    lam = n / N

    ranks = oja_rank_vectors(P, P, cfg, rng, n_jobs=n_jobs)
    R = ranks.ranks
    T = contrast_weights(m, n) @ R
    B = R.T @ R / (N - 1)

    eig = np.linalg.eigvalsh(B)
    if eig.max() <= 0.0 or eig.min() <= RANK_TOL * eig.max():
        raise DegenerateRankError("Oja rank covariance B_N is singular", N=N, d=P.shape[1])
    try:
        w = solve_spd(B, T)
    except FactorizationError as exc:
        raise DegenerateRankError("Oja rank covariance B_N is singular", N=N, d=P.shape[1]) from exc
    stat = float(T @ w / (N * lam * (1.0 - lam)))
    return max(stat, 0.0), ranks


def oja_test(
    X,
    Y,
    cfg: Optional[OjaConfig] = None,
    alpha: float = 0.05,
    rng=None,
    n_jobs: Optional[int] = 1,
) -> TestReport:
    """Oja rank test of F = G with its asymptotic χ²(d) null."""
    _check_alpha(alpha)
    X, Y = _check_pair(X, Y)
    d = X.shape[1]
    stat, ranks = oja_statistic(X, Y, cfg, rng, n_jobs=n_jobs)
    critical = chisq_quantile(1.0 - alpha, d)
    p = float(chisq_sf(stat, d))
    logger.debug(f"Oja test: O={stat:.6f} p={p:.4g} mode={ranks.mode} subsets={ranks.n_subsets}")
    return TestReport(
        test="oja",
        statistic=stat,
        p_value=min(1.0, max(0.0, p)),
        alpha=alpha,
        reject=bool(stat > critical),
        m=X.shape[0],
        n=Y.shape[0],
        df=d,
        mode=ranks.mode,
        mc_se=ranks.mc_se,
    )
