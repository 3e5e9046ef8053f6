"""
The depth-based rank-sum statistic Q(F_m, G_n) and its asymptotic tests.

Q is the average over the second sample of the rank transform R(Y_j; F_m),
with every depth computed against the first sample X only. Under F = G it
is asymptotically normal around 1/2 with variance (1/m + 1/n)/12; in
general its variance is σ²_GF/m + σ²_FG/n, estimated here by plug-in.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from depthrank.core.errors import DegenerateVarianceError, DomainError
from depthrank.schemas.reports import QResult, TestReport
from depthrank.services.depth import DepthSpec, rank_counts
from depthrank.services.numerics import as_sample, std_normal_cdf, std_normal_quantile

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QComponents:
    """
    Per-point ingredients of Q and its plug-in variances, kept as integer
    pair counts so Q does not depend on the order of the rows.
    """

    rank_counts: np.ndarray  # #{i : D(X_i) <= D(Y_j)}, length n
    survival_counts: np.ndarray  # #{j : D(X_i) <= D(Y_j)}, length m

    @property
    def m(self) -> int:
        return int(self.survival_counts.size)

    @property
    def n(self) -> int:
        return int(self.rank_counts.size)

    @property
    def ranks(self) -> np.ndarray:
        """R(Y_j; F_m)."""
        return self.rank_counts / self.m

    @property
    def survivals(self) -> np.ndarray:
        """Ŝ(X_i)."""
        return self.survival_counts / self.n

    @property
    def pairs(self) -> int:
        """#{(i, j) : D(X_i) <= D(Y_j)}."""
        return int(np.sum(self.rank_counts, dtype=np.int64))

    @property
    def q(self) -> float:
        return float(np.clip(self.pairs / (self.m * self.n), 0.0, 1.0))


def _mean_square(counts: np.ndarray, scale: int) -> float:
    # exact integer sum of squares, divided once
    return int(np.sum(counts.astype(np.int64) ** 2, dtype=np.int64)) / (scale * scale * counts.size)


def _check_samples(X, Y) -> Tuple[np.ndarray, np.ndarray]:
    X, Y = as_sample(X), as_sample(Y)
    if X.shape[0] == 0 or Y.shape[0] == 0:
        raise DomainError("both samples must be nonempty", m=X.shape[0], n=Y.shape[0])
    if X.shape[1] != Y.shape[1]:
        raise DomainError("samples have different dimensions", x_dim=X.shape[1], y_dim=Y.shape[1])
    return X, Y


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)", alpha=alpha)


def q_components(X, Y, spec: DepthSpec, rng=None, n_jobs: Optional[int] = 1) -> QComponents:
    """Rank counts of Y against X and survival counts of X against Y, from one depth pass."""
    X, Y = _check_samples(X, Y)
    n = Y.shape[0]
    counts, dx, dy = rank_counts(Y, X, spec, rng, n_jobs=n_jobs)
    survival_counts = n - np.searchsorted(np.sort(dy), dx, side="left")
    return QComponents(rank_counts=counts, survival_counts=survival_counts)


def q_statistic(X, Y, spec: DepthSpec, rng=None, n_jobs: Optional[int] = 1) -> float:
    """Q(F_m, G_n) = (1/n) Σ_j R(Y_j; F_m)."""
    return q_components(X, Y, spec, rng, n_jobs).q


def _variances(parts: QComponents) -> Tuple[float, float]:
    q = parts.q
    sigma2_fg = max(_mean_square(parts.rank_counts, parts.m) - q * q, 0.0)
    sigma2_gf = max(_mean_square(parts.survival_counts, parts.n) - q * q, 0.0)
    return sigma2_gf, sigma2_fg


def variance_estimates(X, Y, spec: DepthSpec, rng=None, n_jobs: Optional[int] = 1) -> Tuple[float, float]:
    """Plug-in (σ̂²_GF, σ̂²_FG), each clipped below at zero."""
    return _variances(q_components(X, Y, spec, rng, n_jobs))


def null_z(q: float, m: int, n: int) -> float:
    return (q - 0.5) / np.sqrt((1.0 / m + 1.0 / n) / 12.0)


def two_sided_p(z: float) -> float:
    return float(min(1.0, 2.0 * (1.0 - std_normal_cdf(abs(z)))))


def q_result(X, Y, spec: DepthSpec, rng=None, n_jobs: Optional[int] = 1) -> QResult:
    X, Y = _check_samples(X, Y)
    parts = q_components(X, Y, spec, rng, n_jobs)
    m, n = X.shape[0], Y.shape[0]
    sigma2_gf, sigma2_fg = _variances(parts)
    z = null_z(parts.q, m, n)
    return QResult(
        q=parts.q,
        m=m,
        n=n,
        sigma2_gf_hat=sigma2_gf,
        sigma2_fg_hat=sigma2_fg,
        z_null=float(z),
        p_null=two_sided_p(z),
    )


def null_test(X, Y, spec: DepthSpec, alpha: float = 0.05, rng=None, n_jobs: Optional[int] = 1) -> TestReport:
    """
    Two-sided test of F = G: reject when |Q − 1/2| exceeds
    z_{1−α/2}·√((1/m + 1/n)/12), equivalently when p < α.
    """
    _check_alpha(alpha)
    res = q_result(X, Y, spec, rng, n_jobs)
    logger.debug(f"Q null test: q={res.q:.6f} z={res.z_null:.4f} p={res.p_null:.4g}")
    return TestReport(
        test="q",
        statistic=res.q,
        z=res.z_null,
        p_value=res.p_null,
        alpha=alpha,
        reject=bool(res.p_null < alpha),
        m=res.m,
        n=res.n,
        sigma2_gf_hat=res.sigma2_gf_hat,
        sigma2_fg_hat=res.sigma2_fg_hat,
        method=spec.method,
        mode=spec.mode,
    )


def general_test(
    X, Y, spec: DepthSpec, q0: float, alpha: float = 0.05, rng=None, n_jobs: Optional[int] = 1
) -> TestReport:
    """
    Test Q(F, G) = q0 with the plug-in variance σ̂²_GF/m + σ̂²_FG/n, and
    report the (1 − α) confidence interval for Q(F, G).
    """
    _check_alpha(alpha)
    if not 0.0 <= q0 <= 1.0:
        raise DomainError("q0 must lie in [0, 1]", q0=q0)
    res = q_result(X, Y, spec, rng, n_jobs)
    se = float(np.sqrt(res.sigma2_gf_hat / res.m + res.sigma2_fg_hat / res.n))
    if se <= 0.0:
        raise DegenerateVarianceError("estimated variance of Q is zero", m=res.m, n=res.n)
    z = (res.q - q0) / se
    p = two_sided_p(z)
    half = float(std_normal_quantile(1.0 - alpha / 2.0)) * se
    return TestReport(
        test="q-general",
        statistic=res.q,
        z=float(z),
        p_value=p,
        alpha=alpha,
        reject=bool(p < alpha),
        m=res.m,
        n=res.n,
        sigma2_gf_hat=res.sigma2_gf_hat,
        sigma2_fg_hat=res.sigma2_fg_hat,
        q0=q0,
        ci_low=max(0.0, res.q - half),
        ci_high=min(1.0, res.q + half),
        method=spec.method,
        mode=spec.mode,
    )
