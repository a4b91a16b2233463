"""Discretization and spectrum of the confining trait operator.

The operator -d2/dy2 + alpha*g(y) is discretized with second-order
centered differences on a truncated symmetric interval.  Homogeneous
Dirichlet truncation keeps only the interior nodes as unknowns (the
boundary values are pinned to zero, so the matrix acting on interior
nodes reproduces the textbook tridiagonal spectrum); reflected-ghost
Neumann keeps every node.  The fractional variant replaces the second
difference by the sigma-th spectral power of the Dirichlet difference
Laplacian, built from its full eigendecomposition.

Whatever the boundary treatment, the matrix stored here is the
symmetric similarity transform B = S A S^{-1} with S = diag(sqrt(w))
built from the trapezoid weights w; its eigenvectors map back to grid
functions orthonormal under the w-weighted inner product.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NumericsError, ValidationError
from .grids import TraitGrid
from .potentials import PotentialSpec

EIGEN_RESIDUAL_TOL = 1e-8


@dataclass
class DiscreteOperator:
    """Matrix realization of the confining operator on the active nodes."""

    grid: TraitGrid
    alpha: float
    bc: str
    diffusion: str
    sigma: float | None
    potential_values: np.ndarray = field(repr=False)
    active: np.ndarray = field(repr=False)          # grid indices of unknowns
    scale: np.ndarray = field(repr=False)           # sqrt(quad weights) on active
    sym_diag: np.ndarray | None = field(default=None, repr=False)
    sym_offdiag: np.ndarray | None = field(default=None, repr=False)
    sym_dense: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_active(self) -> int:
        return len(self.active)

    def to_dense(self) -> np.ndarray:
        """Dense symmetric matrix B on the active nodes."""
        if self.sym_dense is not None:
            return self.sym_dense.copy()
        M = np.diag(self.sym_diag.copy())
        off = self.sym_offdiag
        M += np.diag(off, 1) + np.diag(off, -1)
        return M

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Action of the true (unsymmetrized) operator on active-node values.

        ``values`` may be 1-D (n_active,) or 2-D (..., n_active); the
        operator acts along the last axis.
        """
        v = np.asarray(values) * self.scale
        if self.sym_dense is not None:
            out = v @ self.sym_dense.T
        else:
            out = self.sym_diag * v
            out[..., :-1] += self.sym_offdiag * v[..., 1:]
            out[..., 1:] += self.sym_offdiag * v[..., :-1]
        return out / self.scale

    def true_bands(self):
        """(lower, diag, upper) of the true tridiagonal operator.

        Only defined for standard diffusion; used by the time steppers.
        """
        if self.sym_dense is not None:
            raise ValidationError("fractional operator is dense, not tridiagonal")
        s = self.scale
        upper = self.sym_offdiag * s[:-1] / s[1:]
        lower = self.sym_offdiag * s[1:] / s[:-1]
        return lower, self.sym_diag.copy(), upper


@dataclass
class SpectralBasis:
    """Low-lying eigenpairs of a discrete confining operator.

    Eigenvectors are stored as full-grid functions (rows), orthonormal
    under the grid's trapezoid weights, with the ground state positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)    # (k, n_points)
    grid: TraitGrid = field(repr=False)
    alpha: float = 0.0
    bc: str = "dirichlet"
    diffusion: str = "standard"
    sigma: float | None = None
    residuals: np.ndarray = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def lambda0(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def psi0(self) -> np.ndarray:
        return self.eigenvectors[0]

    def orthonormality_defect(self) -> float:
        G = (self.eigenvectors * self.grid.quad_weights) @ self.eigenvectors.T
        return float(np.abs(G - np.eye(self.k)).max())


def _active_indices(grid: TraitGrid, bc: str) -> np.ndarray:
    if bc == "dirichlet":
        return np.arange(1, grid.n_points - 1)
    if bc == "neumann":
        return np.arange(grid.n_points)
    raise ValidationError(f"unknown boundary condition {bc!r}; use 'dirichlet' or 'neumann'")


def assemble_operator(grid: TraitGrid, potential: PotentialSpec, alpha: float,
                      bc: str = "dirichlet", diffusion: str = "standard",
                      sigma: float | None = None, validate: bool = True) -> DiscreteOperator:
    """Build the discrete confining operator -D2 + alpha*g (or fractional).

    ``validate=False`` admits non-confining potentials (e.g. g == 0) as
    diagnostic inputs; everything downstream of the spectrum then loses
    its meaning and tests use it only to check the pure Laplacian.
    """
    if not np.isfinite(alpha) or alpha <= 0:
        raise ValidationError(f"intensity alpha must be positive, got {alpha}")
    if diffusion not in ("standard", "fractional"):
        raise ValidationError(f"unknown diffusion kind {diffusion!r}")
    if diffusion == "fractional":
        if sigma is None or not (0.0 < sigma < 1.0):
            raise ValidationError(f"fractional order sigma must lie in (0, 1), got {sigma}")
        if bc != "dirichlet":
            raise ValidationError("fractional diffusion is implemented for dirichlet boundaries only")
    if validate:
        gvals = potential.validate_on(grid)
    else:
        gvals = potential.sample(grid)

    h = grid.spacing
    active = _active_indices(grid, bc)
    scale = np.sqrt(grid.quad_weights[active])
    diag_pot = alpha * gvals[active]

    if diffusion == "fractional":
        m = len(active)
        lap_d = np.full(m, 2.0 / h**2)
        lap_e = np.full(m - 1, -1.0 / h**2)
        w, Q = sla.eigh_tridiagonal(lap_d, lap_e)
        dense = (Q * w**sigma) @ Q.T
        dense[np.diag_indices(m)] += diag_pot
        dense = 0.5 * (dense + dense.T)
        return DiscreteOperator(grid, alpha, bc, diffusion, sigma, gvals, active,
                                scale, sym_dense=dense)

    if bc == "dirichlet":
        d = 2.0 / h**2 + diag_pot
        e = np.full(len(active) - 1, -1.0 / h**2)
    else:
        # reflected ghosts: row 0 of the true operator is (2u0 - 2u1)/h^2;
        # symmetrizing with the half boundary weights turns the boundary
        # couplings into -sqrt(2)/h^2
        d = 2.0 / h**2 + diag_pot
        e = np.full(len(active) - 1, -1.0 / h**2)
        e[0] = e[-1] = -np.sqrt(2.0) / h**2
    return DiscreteOperator(grid, alpha, bc, diffusion, None, gvals, active,
                            scale, sym_diag=d, sym_offdiag=e)


def _fix_signs(vectors: np.ndarray, center: int) -> np.ndarray:
    """Deterministic sign convention: ground state positive near y=0,
    higher modes positive in their first non-negligible component."""
    out = vectors
    v0 = out[0]
    anchor = v0[center] if abs(v0[center]) > 0 else v0[np.argmax(np.abs(v0))]
    if anchor < 0:
        out[0] = -v0
    for i in range(1, out.shape[0]):
        vi = out[i]
        nz = np.nonzero(np.abs(vi) > 1e-14 * np.abs(vi).max())[0]
        if len(nz) and vi[nz[0]] < 0:
            out[i] = -vi
    return out


def eigenpairs(op: DiscreteOperator, k: int) -> SpectralBasis:
    """k smallest eigenpairs, weight-orthonormalized, deterministic."""
    n = op.grid.n_points
    if not (1 <= k <= n - 2):
        raise ValidationError(f"k must satisfy 1 <= k <= n_points - 2 = {n - 2}, got {k}")
    if op.sym_dense is not None:
        vals, qs = sla.eigh(op.sym_dense, subset_by_index=[0, k - 1])
    else:
        vals, qs = sla.eigh_tridiagonal(op.sym_diag, op.sym_offdiag,
                                        select="i", select_range=(0, k - 1))

    # residuals of the symmetric problem, relative to each eigenvalue
    if op.sym_dense is not None:
        R = op.sym_dense @ qs - qs * vals
    else:
        R = op.sym_diag[:, None] * qs - qs * vals
        R[:-1] += op.sym_offdiag[:, None] * qs[1:]
        R[1:] += op.sym_offdiag[:, None] * qs[:-1]
    residuals = np.linalg.norm(R, axis=0) / np.abs(vals)
    if np.any(~np.isfinite(vals)) or np.any(residuals > EIGEN_RESIDUAL_TOL):
        raise NumericsError(
            "eigensolver did not converge to the requested accuracy",
            diagnostics={"residuals": residuals.tolist(), "eigenvalues": vals.tolist()},
        )
    if np.any(vals <= 0):
        raise NumericsError("operator lost positive definiteness on the truncated domain",
                            diagnostics={"eigenvalues": vals.tolist()})
    if k >= 2 and not vals[0] < vals[1] - 1e-12 * max(1.0, abs(vals[0])):
        raise NumericsError("principal eigenvalue is not numerically simple",
                            diagnostics={"eigenvalues": vals[:2].tolist()})

    vectors = np.zeros((k, n))
    vectors[:, op.active] = (qs / op.scale[:, None]).T
    vectors = _fix_signs(vectors, op.grid.center_index)
    return SpectralBasis(vals.copy(), vectors, op.grid, op.alpha, op.bc,
                         op.diffusion, op.sigma, residuals)


def _lambda0(potential, grid, alpha, bc, diffusion, sigma):
    op = assemble_operator(grid, potential, alpha, bc=bc, diffusion=diffusion, sigma=sigma)
    return eigenpairs(op, 1).lambda0


def find_alpha_bar(potential: PotentialSpec, grid: TraitGrid, tol: float = 1e-6,
                   bc: str = "dirichlet", diffusion: str = "standard",
                   sigma: float | None = None, bracket: tuple = (0.25, 4.0),
                   alpha_limits: tuple = (1e-10, 1e10), max_iter: int = 200,
                   return_info: bool = False):
    """Critical intensity: the alpha at which the smallest eigenvalue is 1.

    The smallest eigenvalue grows monotonically with alpha, so a plain
    bisection works once a bracket with lambda0 < 1 < lambda0 is found;
    the initial bracket is expanded geometrically as needed.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0 < lo < hi):
        raise ValidationError(f"invalid starting bracket {bracket}")
    lam = lambda a: _lambda0(potential, grid, a, bc, diffusion, sigma)

    f_lo, f_hi = lam(lo), lam(hi)
    evals = 2
    while f_lo >= 1.0:
        lo /= 4.0
        if lo < alpha_limits[0]:
            raise NumericsError("no critical intensity in range",
                                diagnostics={"alpha_lo": lo, "lambda0": f_lo})
        f_lo = lam(lo)
        evals += 1
    while f_hi <= 1.0:
        hi *= 4.0
        if hi > alpha_limits[1]:
            raise NumericsError("no critical intensity in range",
                                diagnostics={"alpha_hi": hi, "lambda0": f_hi})
        f_hi = lam(hi)
        evals += 1

    mid = 0.5 * (lo + hi)
    f_mid = lam(mid)
    evals += 1
    halvings = 0
    for _ in range(max_iter):
        if hi - lo <= tol and abs(f_mid - 1.0) <= tol:
            break
        if f_mid < 1.0:
            lo = mid
        else:
            hi = mid
        mid = 0.5 * (lo + hi)
        f_mid = lam(mid)
        evals += 1
        halvings += 1
    else:
        raise NumericsError("bisection for the critical intensity stalled",
                            diagnostics={"bracket": (lo, hi), "lambda0": f_mid})
    if return_info:
        return mid, {"halvings": halvings, "evaluations": evals,
                     "bracket": (lo, hi), "lambda0": f_mid}
    return mid


def truncation_study(potential: PotentialSpec, alpha: float, radii,
                     n_per_unit: int = 400, bc: str = "dirichlet",
                     diffusion: str = "standard", sigma: float | None = None):
    """Smallest eigenvalue as a function of the truncation radius.

    The node density is held fixed so the grids are nested and the
    eigenvalues are exactly non-increasing in R (up to solver roundoff).
    """
    radii = [float(R) for R in radii]
    if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValidationError("radii must be strictly ascending")
    out = []
    for R in radii:
        n = 2 * int(round(R * n_per_unit)) + 1
        grid = TraitGrid(R, max(n, 3))
        out.append((R, _lambda0(potential, grid, alpha, bc, diffusion, sigma)))
    return out


@dataclass
class DecayReport:
    """Tightest decay envelope of the ground state."""

    gamma: float
    bound_constant: float
    tight_y: float
    kind: str                     # "exponential" | "polynomial"
    tail_exponent: float | None = None
    fit_window: tuple | None = None


def tail_exponent(basis: SpectralBasis, window: tuple = (0.5, 1.0)) -> float:
    """Log-log slope of the ground state over the outer part of the domain.

    ``window`` is in fractions of the half-width; both sides contribute.
    Nonpositive values (the Dirichlet boundary nodes) are excluded.
    """
    y = np.abs(basis.grid.nodes)
    psi = basis.psi0
    R = basis.grid.half_width
    m = (y >= window[0] * R) & (y <= window[1] * R) & (psi > 0) & (y > 0)
    if m.sum() < 5:
        raise ValidationError("too few usable nodes for a tail-exponent fit")
    slope = np.polyfit(np.log(y[m]), np.log(psi[m]), 1)[0]
    return float(slope)


def decay_report(basis: SpectralBasis, gamma: float) -> DecayReport:
    """Smallest C with psi0 <= C * envelope(y), and where it is tight.

    Standard diffusion uses the exponential envelope exp(-gamma*|y|);
    the fractional operator uses the polynomial envelope |y|^-(1+2*sigma)
    on |y| >= 1 and also reports the fitted tail exponent over the outer
    half of the domain.
    """
    if gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    y = np.abs(basis.grid.nodes)
    psi = basis.psi0
    if basis.diffusion == "fractional":
        p = 1.0 + 2.0 * basis.sigma
        m = y >= 1.0
        ratios = psi[m] * y[m] ** p
        j = int(np.argmax(ratios))
        exponent = tail_exponent(basis)
        return DecayReport(gamma, float(ratios[j]), float(basis.grid.nodes[m][j]),
                           "polynomial", exponent, (0.5, 1.0))
    ratios = psi * np.exp(gamma * y)
    j = int(np.argmax(ratios))
    return DecayReport(gamma, float(ratios[j]), float(basis.grid.nodes[j]), "exponential")
