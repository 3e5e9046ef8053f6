"""
Distribution specifications and seeded sampling.

Gaussian mixtures describe both samples of every experiment: F is always
a single standard bivariate normal, G one of the alternative families.
Replication r of a Monte Carlo run draws from RngStream(seed, r), so a
run's output never depends on scheduling.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from depthrank.core.errors import DomainError
from depthrank.services.numerics import cholesky

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12
CONTAMINATION = 0.1
TABLE1_SIGMA2 = 16.0  # σ = 4, used literally in (1 + 10uσ²)

FAMILIES = (
    "contaminated-location",
    "contaminated-scale",
    "location-scale",
    "pure-location",
    "pure-scale",
)


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True, eq=False)
class GaussianComponent:
    weight: float
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if not 0.0 < self.weight <= 1.0:
            raise DomainError("component weight must lie in (0, 1]", weight=self.weight)
        if cov.shape != (mean.size, mean.size):
            raise DomainError("covariance shape does not match mean", mean=mean.size, cov=cov.shape)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def isotropic_scale(self):
        """s² when cov = s²·I, else None."""
        s2 = float(self.cov[0, 0])
        if np.allclose(self.cov, s2 * np.eye(self.dim), rtol=0, atol=1e-12 * max(1.0, s2)):
            return s2
        return None


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    components: List[GaussianComponent] = field(default_factory=list)

    def __post_init__(self):
        comps = list(self.components)
        if not comps:
            raise DomainError("a mixture needs at least one component")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise DomainError("all components must share one dimension", dims=sorted(dims))
        total = sum(c.weight for c in comps)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise DomainError("mixture weights must sum to 1", total=total)
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    def is_isotropic(self) -> bool:
        return all(c.isotropic_scale() is not None for c in self.components)

    @classmethod
    def normal(cls, mean: Sequence[float], cov) -> "GaussianMixture":
        return cls([GaussianComponent(1.0, np.asarray(mean, float), np.asarray(cov, float))])

    @classmethod
    def standard(cls, dim: int = 2) -> "GaussianMixture":
        return cls.normal(np.zeros(dim), np.eye(dim))


def sample(mix: GaussianMixture, n: int, rng, return_labels: bool = False):
    """
    Draw n observations from a Gaussian mixture.

    The component of each row is chosen by weight; the row is then
    mean + L·z with L the component's Cholesky factor. ``rng`` is an
    RngStream or an already constructed numpy Generator (to continue a
    stream).

    With ``return_labels`` the component index of every row is returned
    as well.
    """
    if n < 1:
        raise DomainError("sample size must be positive", n=n)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    factors = [cholesky(c.cov) for c in mix.components]

    if len(mix.components) == 1:
        labels = np.zeros(n, dtype=np.intp)
    else:
        cum = np.cumsum(mix.weights)
        cum[-1] = 1.0
        labels = np.searchsorted(cum, gen.random(n), side="right")
    z = gen.standard_normal((n, mix.dim))

    out = np.empty((n, mix.dim))
    for k, (comp, L) in enumerate(zip(mix.components, factors)):
        rows = labels == k
        out[rows] = comp.mean + z[rows] @ L.T
    if return_labels:
        return out, labels
    return out


def alternative_families(kind: str, param: float) -> GaussianMixture:
    """
    The bivariate alternatives G of the power study.

    contaminated-location: 0.9·N₂((u,u)', I₂) + 0.1·N₂(0, (1 + 10uσ²)I₂), σ² = 16
    contaminated-scale:    0.9·N₂(0, σ²I₂) + 0.1·N₂((u,u)', I₂), u = σ − 1
    location-scale:        N₂((u,u)', σ²I₂), σ = u + 1
    pure-location:         N₂((u,u)', I₂)
    pure-scale:            N₂(0, σ²I₂)
    """
    eye = np.eye(2)
    eps = CONTAMINATION
    if kind == "contaminated-location":
        u = _check_nonneg(kind, param)
        main = GaussianComponent(1 - eps, np.array([u, u]), eye)
        contaminant = GaussianComponent(eps, np.zeros(2), (1 + 10 * u * TABLE1_SIGMA2) * eye)
        return GaussianMixture([main, contaminant])
    if kind == "contaminated-scale":
        sigma2 = _check_scale(kind, param)
        u = np.sqrt(sigma2) - 1.0
        main = GaussianComponent(1 - eps, np.zeros(2), sigma2 * eye)
        contaminant = GaussianComponent(eps, np.array([u, u]), eye)
        return GaussianMixture([main, contaminant])
    if kind == "location-scale":
        u = _check_nonneg(kind, param)
        return GaussianMixture.normal([u, u], (u + 1.0) ** 2 * eye)
    if kind == "pure-location":
        u = _check_nonneg(kind, param)
        return GaussianMixture.normal([u, u], eye)
    if kind == "pure-scale":
        sigma2 = _check_scale(kind, param)
        return GaussianMixture.normal([0.0, 0.0], sigma2 * eye)
    raise DomainError(f"unknown family '{kind}'", valid=list(FAMILIES))


def null_param(kind: str) -> float:
    """Parameter value at which the family coincides with F."""
    if kind not in FAMILIES:
        raise DomainError(f"unknown family '{kind}'", valid=list(FAMILIES))
    return 1.0 if kind in ("contaminated-scale", "pure-scale") else 0.0


def _check_nonneg(kind: str, value: float) -> float:
    if not np.isfinite(value) or value < 0:
        raise DomainError(f"{kind} needs u >= 0", param=value)
    return float(value)


def _check_scale(kind: str, value: float) -> float:
    if not np.isfinite(value) or value < 1.0:
        raise DomainError(f"{kind} needs sigma^2 >= 1", param=value)
    return float(value)


def mixture_to_json(mix: GaussianMixture) -> str:
    from depthrank.schemas.mixture import MixtureDocument

    return MixtureDocument.from_mixture(mix).model_dump_json(indent=2)


def mixture_from_json(text: str) -> GaussianMixture:
    from depthrank.schemas.mixture import MixtureDocument

    try:
        doc = MixtureDocument.model_validate(json.loads(text))
    except (ValueError, TypeError) as exc:
        raise DomainError(f"invalid mixture document: {exc}") from exc
    return doc.to_mixture()
