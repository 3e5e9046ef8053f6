"""
Mixture document schema.

A GaussianMixture serializes to {dim, components: [{weight, mean, cov}]}
with cov stored row-major as a flat list.
"""

from typing import List

import numpy as np
from pydantic import BaseModel, Field, model_validator

from depthrank.services.model import GaussianComponent, GaussianMixture


class ComponentDocument(BaseModel):
    weight: float = Field(gt=0.0, le=1.0)
    mean: List[float]
    cov: List[float]


class MixtureDocument(BaseModel):
    dim: int = Field(ge=1)
    components: List[ComponentDocument] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_shapes(self) -> "MixtureDocument":
        for comp in self.components:
            if len(comp.mean) != self.dim or len(comp.cov) != self.dim * self.dim:
                raise ValueError(f"component shapes do not match dim={self.dim}")
        return self

    @classmethod
    def from_mixture(cls, mix: GaussianMixture) -> "MixtureDocument":
        return cls(
            dim=mix.dim,
            components=[
                ComponentDocument(
                    weight=c.weight,
                    mean=c.mean.tolist(),
                    cov=c.cov.reshape(-1).tolist(),
                )
                for c in mix.components
            ],
        )

    def to_mixture(self) -> GaussianMixture:
        return GaussianMixture(
            [
                GaussianComponent(
                    c.weight,
                    np.asarray(c.mean, dtype=float),
                    np.asarray(c.cov, dtype=float).reshape(self.dim, self.dim),
                )
                for c in self.components
            ]
        )
