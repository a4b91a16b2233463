"""Uniform symmetric 1-D grids with trapezoid quadrature weights.

Both grids are centered at 0 with an odd node count, so 0 is always a
node (the fittest trait and the front-centering point must be sampled
exactly).  Trapezoid weights integrate grid functions over the full
interval: sum(quad_weights) == 2 * half_width.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class _UniformSymmetricGrid:
    half_width: float
    n_points: int
    nodes: np.ndarray = field(init=False, repr=False)
    spacing: float = field(init=False)
    quad_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise ValidationError(f"grid half_width must be positive, got {self.half_width}")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValidationError(
                f"grid n_points must be an odd integer >= 3, got {self.n_points}"
            )
        nodes = np.linspace(-self.half_width, self.half_width, self.n_points)
        spacing = 2.0 * self.half_width / (self.n_points - 1)
        weights = np.full(self.n_points, spacing)
        weights[0] = weights[-1] = spacing / 2.0
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "quad_weights", weights)

    @property
    def center_index(self) -> int:
        return self.n_points // 2

    def refined(self):
        """Same interval with the spacing halved (nodes are nested)."""
        return type(self)(self.half_width, 2 * self.n_points - 1)

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoid quadrature of a grid function (last axis = nodes)."""
        return float(np.dot(np.asarray(values), self.quad_weights))


class TraitGrid(_UniformSymmetricGrid):
    """Discretized trait interval [-R_y, R_y]."""


class SpaceGrid(_UniformSymmetricGrid):
    """Discretized spatial interval [-L_x, L_x]."""
