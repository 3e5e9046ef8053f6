"""
Analytic results for F = N₂(0, I₂).

For any affine invariant depth the depth ordering under F is the ordering
of ‖y‖, so R(y; F) = P(‖X‖ ≥ ‖y‖) = exp(−‖y‖²/2) in two dimensions.
Everything here follows from that identity: Q(F, G) for normal and
mixture alternatives, the asymptotic variances σ²_GF and σ²_FG, and the
asymptotic power functions of the Q and T² tests.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from depthrank.core.config import settings
from depthrank.core.errors import (
    DomainError,
    FactorizationError,
    NumericError,
    UnsupportedConfigurationError,
)
from depthrank.schemas.power import PowerCell, PowerGrid
from depthrank.services.model import (
    CONTAMINATION,
    FAMILIES,
    TABLE1_SIGMA2,
    GaussianMixture,
    alternative_families,
)
from depthrank.services.numerics import (
    chisq_quantile,
    cholesky,
    determinant,
    noncentral_chisq_cdf,
    noncentral_chisq_sf,
    solve_spd,
    std_normal_cdf,
    std_normal_quantile,
)
from depthrank.services.parallel import ordered_map

logger = logging.getLogger(__name__)

RADIUS_MAX = 12.0

FIG1_U = np.round(np.arange(0.0, 2.0 + 1e-9, 0.1), 10)
FIG1_SIGMA2 = np.round(np.arange(1.0, 4.0 + 1e-9, 0.25), 10)
FIG2_SIGMA2 = np.round(np.arange(1.0, 3.0 + 1e-9, 0.1), 10)
FIG2_N = 100


@dataclass(frozen=True)
class PowerQuery:
    """One point of an analytic power curve."""

    family: str
    param: float
    m: int
    n: int
    alpha: float = 0.05

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family '{self.family}'", valid=list(FAMILIES))
        if self.m < 1 or self.n < 1:
            raise DomainError("sample sizes must be positive", m=self.m, n=self.n)
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)", alpha=self.alpha)
        # range check on param
        alternative_families(self.family, self.param)

    @property
    def alternative(self) -> GaussianMixture:
        return alternative_families(self.family, self.param)


def closed_form_q(mu, Sigma) -> float:
    """
    Q(F, G) for F = N₂(0, I₂) and G = N₂(μ, Σ):

        |I + Σ|^{-1/2} exp(−μᵀ(I + Σ)⁻¹μ / 2)
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    if mu.size != 2 or Sigma.shape != (2, 2):
        raise DomainError("closed-form Q is defined for bivariate normals", mu=mu.size, sigma=Sigma.shape)
    _check_spd(Sigma)
    A = np.eye(2) + Sigma
    return float(np.exp(-0.5 * mu @ solve_spd(A, mu)) / np.sqrt(determinant(A)))


def _check_spd(Sigma: np.ndarray) -> None:
    try:
        cholesky(Sigma)
    except FactorizationError as exc:
        raise DomainError("covariance must be symmetric positive definite", sigma=Sigma) from exc


def _check_bivariate(G: GaussianMixture) -> None:
    if G.dim != 2:
        raise DomainError("analytic results need a bivariate alternative", dim=G.dim)


def mixture_q(G: GaussianMixture) -> float:
    """Weight average of closed_form_q over the components of G."""
    _check_bivariate(G)
    return float(sum(c.weight * closed_form_q(c.mean, c.cov) for c in G.components))


def _expected_rank_square(mu: np.ndarray, Sigma: np.ndarray) -> float:
    # E exp(−‖Y‖²) for Y ~ N(μ, Σ)
    A = np.eye(2) + 2.0 * Sigma
    return float(np.exp(-mu @ solve_spd(A, mu)) / np.sqrt(determinant(A)))


def asymptotic_sigmas(G: GaussianMixture, tol: Optional[float] = None) -> Tuple[float, float]:
    """
    (σ²_GF, σ²_FG) for F = N₂(0, I₂).

    σ²_FG = Var_G R(Y; F) is a Gaussian integral. σ²_GF = Var_F P_G(‖Y‖ ≤ ‖X‖)
    is one quadrature over r = ‖X‖, with P_G(‖Y‖ ≤ r) from the noncentral
    chi-square cdf of each component. Components must be isotropic for
    the latter.
    """
    _check_bivariate(G)
    tol = settings.QUADRATURE_TOL if tol is None else tol
    q = mixture_q(G)

    second = sum(c.weight * _expected_rank_square(c.mean, c.cov) for c in G.components)
    sigma2_fg = second - q * q

    scales = [c.isotropic_scale() for c in G.components]
    if any(s is None for s in scales):
        raise UnsupportedConfigurationError("σ²_GF needs isotropic mixture components")
    weights = G.weights
    ncps = [float(c.mean @ c.mean) / s for c, s in zip(G.components, scales)]

    def integrand(r: float) -> float:
        inside = sum(
            w * noncentral_chisq_cdf(r * r / s, 2, ncp) for w, s, ncp in zip(weights, scales, ncps)
        )
        return inside * inside * r * np.exp(-0.5 * r * r)

    result = integrate.quad(integrand, 0.0, RADIUS_MAX, epsabs=tol, epsrel=0.0, limit=200, full_output=1)
    if len(result) > 3:
        raise NumericError(f"σ²_GF quadrature did not converge: {result[3]}", abserr=result[1])
    sigma2_gf = result[0] - q * q

    return _unit_variance(sigma2_gf), _unit_variance(sigma2_fg)


def _unit_variance(value: float) -> float:
    # variance of a [0, 1] variable
    return float(min(max(value, 0.0), 0.25))


def beta_q(query: PowerQuery) -> float:
    """
    Asymptotic power of the two-sided Q test of level α:

        1 − Φ((1/2 − Q + z·s0)/s) + Φ((1/2 − Q − z·s0)/s)

    with z = z_{1−α/2}, s0² = (1/m + 1/n)/12 and s² = σ²_GF/m + σ²_FG/n.
    """
    G = query.alternative
    q = mixture_q(G)
    sigma2_gf, sigma2_fg = asymptotic_sigmas(G)
    z = float(std_normal_quantile(1.0 - query.alpha / 2.0))
    s0 = np.sqrt((1.0 / query.m + 1.0 / query.n) / 12.0)
    s = np.sqrt(sigma2_gf / query.m + sigma2_fg / query.n)
    if s <= 0.0:
        return 1.0 if abs(q - 0.5) > z * s0 else 0.0
    upper = 1.0 - std_normal_cdf((0.5 - q + z * s0) / s)
    lower = std_normal_cdf((0.5 - q - z * s0) / s)
    return float(min(1.0, max(0.0, upper + lower)))


def t2_noncentrality(query: PowerQuery) -> float:
    """Noncentrality of the limiting χ²(2) law of T² under the family's alternative."""
    if query.m != query.n:
        raise DomainError("T² noncentrality is tabulated for m = n only", m=query.m, n=query.n)
    n = query.n
    eps = CONTAMINATION
    if query.family == "contaminated-location":
        u = query.param
        return n * (1 - eps) ** 2 * u * u / (1 + 5 * eps * u * TABLE1_SIGMA2 + eps * (1 - eps) * u * u)
    if query.family == "contaminated-scale":
        sigma2 = query.param
        u = np.sqrt(sigma2) - 1.0
        return float(2 * n * eps ** 2 * u * u / (1 + eps + (1 - eps) * sigma2 + 2 * eps * (1 - eps) * u * u))
    if query.family == "location-scale":
        u = query.param
        return 2 * n * u * u / (1 + (u + 1.0) ** 2)
    if query.family == "pure-location":
        return n * query.param ** 2
    return 0.0


def beta_t2(query: PowerQuery) -> float:
    """Asymptotic power of Hotelling's T² test, P(χ²(2, ncp) > χ²_{1−α}(2))."""
    if query.family == "pure-scale":
        return query.alpha
    ncp = t2_noncentrality(query)
    return float(noncentral_chisq_sf(chisq_quantile(1.0 - query.alpha, 2), 2, ncp))


def power_row(family: str, params: Sequence[float], n: int, alpha: float = 0.05) -> List[Tuple[float, float, float]]:
    """(param, β_T², β_Q) along a parameter grid with m = n."""
    rows = []
    for p in params:
        query = PowerQuery(family=family, param=float(p), m=n, n=n, alpha=alpha)
        rows.append((float(p), beta_t2(query), beta_q(query)))
    return rows


def figure_grids(which: str, alpha: float = 0.05, n_jobs: Optional[int] = 1) -> PowerGrid:
    """
    fig1: Q(u, σ²) for G = N₂((u, u)', σ²I₂), one group per σ².
    fig2: β_T², β_O and β_Q for pure-scale alternatives at n = 100; the β_O
    cells are left empty for the Monte Carlo driver to fill.
    """
    if which == "fig1":
        cells = []
        for sigma2 in FIG1_SIGMA2:
            for u in FIG1_U:
                value = closed_form_q([u, u], sigma2 * np.eye(2))
                cells.append(
                    PowerCell(param=float(u), method="Q", power=value, source="analytic", group=f"sigma2={sigma2:g}")
                )
        return PowerGrid(target="fig1", description="Q(u, sigma^2) for location-scale normals", param_name="u", cells=cells)

    if which == "fig2":
        group = f"n={FIG2_N}"
        queries = [PowerQuery("pure-scale", float(s), FIG2_N, FIG2_N, alpha) for s in FIG2_SIGMA2]
        betas = ordered_map(beta_q, queries, n_jobs=n_jobs)
        cells = []
        for query, bq in zip(queries, betas):
            cells.append(PowerCell(param=query.param, method="T2", power=beta_t2(query), source="analytic", group=group))
            cells.append(PowerCell(param=query.param, method="O", power=None, source="monte-carlo", group=group))
            cells.append(PowerCell(param=query.param, method="Q", power=bq, source="analytic", group=group))
        return PowerGrid(target="fig2", description="power under pure scale change", param_name="sigma2", cells=cells)

    raise DomainError(f"unknown figure '{which}'", valid=["fig1", "fig2"])
