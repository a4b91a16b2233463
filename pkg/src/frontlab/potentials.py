"""Trait fitness costs g(y) and competition kernels K(z).

Presets cover the shapes used throughout the experiments; arbitrary
shapes come in as two-column CSV tables (y, value) and are linearly
interpolated onto the grid.  Validation enforces the structural
assumptions the solvers rely on: g confines (g(0)=0, positive
elsewhere, growing toward the boundary), K is nonnegative and not
identically zero, and both stay under the exponential growth envelope
kappa * exp(kappa |y|).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .grids import TraitGrid

POTENTIAL_KINDS = ("quadratic", "quartic", "abs", "tabulated")
KERNEL_KINDS = ("constant", "gaussian", "indicator", "tabulated")

#: default growth-envelope constant; generous at desk scale, tighten via config
DEFAULT_KAPPA = 10.0


def _load_table(path):
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if data.shape[1] != 2:
        raise ValidationError(f"tabulated CSV must have two columns (y, value): {path}")
    order = np.argsort(data[:, 0])
    return data[order, 0].copy(), data[order, 1].copy()


def _interp_table(table, nodes):
    ys, vals = table
    if nodes[0] < ys[0] - 1e-12 or nodes[-1] > ys[-1] + 1e-12:
        raise ValidationError(
            f"tabulated data covers [{ys[0]}, {ys[-1]}] but the grid needs "
            f"[{nodes[0]}, {nodes[-1]}]"
        )
    return np.interp(nodes, ys, vals)


def _check_growth_bound(values, nodes, kappa, label):
    envelope = kappa * np.exp(kappa * np.abs(nodes))
    bad = values > envelope * (1 + 1e-12)
    if np.any(bad):
        j = int(np.argmax(values - envelope))
        raise ValidationError(
            f"{label} exceeds the growth envelope kappa*exp(kappa|y|) at "
            f"y={nodes[j]:g}: {values[j]:g} > {envelope[j]:g} (kappa={kappa:g})"
        )


@dataclass(frozen=True)
class PotentialSpec:
    """Trait fitness cost g: zero at the fittest trait, confining at infinity."""

    kind: str = "quadratic"
    a: float = 1.0
    kappa: float = DEFAULT_KAPPA
    table: tuple | None = field(default=None, repr=False)

    @classmethod
    def from_csv(cls, path, kappa=DEFAULT_KAPPA):
        return cls(kind="tabulated", kappa=kappa, table=_load_table(path))

    def sample(self, grid: TraitGrid) -> np.ndarray:
        y = grid.nodes
        if self.kind == "quadratic":
            return self.a * y**2
        if self.kind == "quartic":
            return self.a * y**4
        if self.kind == "abs":
            return self.a * np.abs(y)
        if self.kind == "tabulated":
            if self.table is None:
                raise ValidationError("tabulated potential has no table attached")
            return _interp_table(self.table, y)
        raise ValidationError(f"unknown potential kind {self.kind!r}; use one of {POTENTIAL_KINDS}")

    def validate_on(self, grid: TraitGrid, tol: float = 1e-10) -> np.ndarray:
        """Sample onto the grid and check confinement; returns the samples."""
        g = self.sample(grid)
        scale = max(float(np.max(np.abs(g))), 1.0)
        i0 = grid.center_index
        if abs(g[i0]) > tol * scale:
            raise ValidationError(f"potential must vanish at y=0, got g(0)={g[i0]:g}")
        off = np.delete(g, i0)
        if np.any(off <= 0):
            raise ValidationError("potential must be strictly positive away from y=0")
        # confinement: non-decreasing toward each boundary, within tolerance
        right = g[i0:]
        left = g[i0::-1]
        slack = tol * scale
        if np.any(np.diff(right) < -slack) or np.any(np.diff(left) < -slack):
            raise ValidationError("potential samples must increase toward the domain boundary")
        _check_growth_bound(g, grid.nodes, self.kappa, "potential")
        return g


@dataclass(frozen=True)
class KernelSpec:
    """Competition kernel K: nonnegative weight over competitor traits."""

    kind: str = "constant"
    k: float = 1.0
    amplitude: float = 1.0
    width: float = 1.0
    radius: float = 1.0
    height: float = 1.0
    kappa: float = DEFAULT_KAPPA
    table: tuple | None = field(default=None, repr=False)

    @classmethod
    def from_csv(cls, path, kappa=DEFAULT_KAPPA):
        return cls(kind="tabulated", kappa=kappa, table=_load_table(path))

    def sample(self, grid: TraitGrid) -> np.ndarray:
        z = grid.nodes
        if self.kind == "constant":
            return np.full_like(z, float(self.k))
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-((z / self.width) ** 2))
        if self.kind == "indicator":
            return np.where(np.abs(z) <= self.radius, float(self.height), 0.0)
        if self.kind == "tabulated":
            if self.table is None:
                raise ValidationError("tabulated kernel has no table attached")
            return _interp_table(self.table, z)
        raise ValidationError(f"unknown kernel kind {self.kind!r}; use one of {KERNEL_KINDS}")

    def validate_on(self, grid: TraitGrid) -> np.ndarray:
        K = self.sample(grid)
        if np.any(K < 0):
            raise ValidationError("kernel must be nonnegative")
        if not np.any(K > 0):
            raise ValidationError("kernel must not vanish identically on the grid")
        _check_growth_bound(K, grid.nodes, self.kappa, "kernel")
        return K


def kernel_core_bound(kernel: KernelSpec, grid: TraitGrid, alpha: float,
                      potential_values: np.ndarray):
    """Lower bound of K on the core where the growth term can be positive.

    R0 is the radius beyond which alpha*g >= 1 (effective birth rate
    nonpositive); the propagation estimates need K >= K1 > 0 on
    {|y| <= R0 + 2}.  Returns (K1, R0); K1 = 0 flags an inadmissible
    kernel for those experiments.
    """
    y = np.abs(grid.nodes)
    weak = alpha * np.asarray(potential_values) < 1.0
    r0 = float(y[weak].max()) if np.any(weak) else 0.0
    core = y <= min(r0 + 2.0, grid.half_width)
    K = kernel.sample(grid)
    k1 = float(K[core].min()) if np.any(core) else 0.0
    return k1, r0
