"""Steady states and traveling fronts built from the spectral data.

The invasion target is V = mu * psi0 with mu = (1 - lambda0) / <psi0, K>;
fronts exist for speeds c >= cstar = 2*sqrt(1 - lambda0) and take the
separated form u(x, y) = mu * v(x) * psi0(y), where v solves the scalar
pulled-front equation  -v'' - c v' = (1 - lambda0) v (1 - v).

The scalar profile is computed by damped Newton on the second-order
finite-difference system.  Hard equilibrium clamps at the ends make
that system ill-posed for a pulled front (the only exact discrete
solution rams the front against a boundary), so the ends are closed
with the linearized-orbit ratios of the discrete recurrence instead:
the solve runs from the left closure to the midpoint pinned at
v(0) = 1/2, and the tail continues rightward by stable marching of the
same recurrence, switching to the exact slow-decay ratio once the
profile drops below the marching floor.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NumericsError, ValidationError
from .grids import SpaceGrid, TraitGrid
from .potentials import KernelSpec
from .spectral import DiscreteOperator, SpectralBasis

NEWTON_TOL = 1e-10
MARCH_FLOOR = 1e-12
TAIL_FIT_WINDOW = (1e-8, 1e-4)


@dataclass
class SteadyState:
    """Invasion steady state V = mu * psi0 (zero in the extinction regime)."""

    mu: float
    V: np.ndarray = field(repr=False)
    lambda0: float = 0.0
    kernel_moment: float = 0.0
    regime: str = "invasion"
    grid: TraitGrid | None = field(default=None, repr=False)

    @property
    def max_V(self) -> float:
        return float(self.V.max())


def steady_state(basis: SpectralBasis, kernel: KernelSpec) -> SteadyState:
    """Unique positive steady state, or the zero state past the critical intensity."""
    lam0 = basis.lambda0
    moment = basis.grid.integrate(basis.psi0 * kernel.sample(basis.grid))
    if lam0 >= 1.0:
        return SteadyState(0.0, np.zeros_like(basis.psi0), lam0, moment,
                           "extinction", basis.grid)
    if moment <= 1e-300 or not np.isfinite(moment):
        raise ValidationError(
            "kernel is numerically degenerate: its overlap with the ground state vanishes"
        )
    mu = (1.0 - lam0) / moment
    return SteadyState(mu, mu * basis.psi0, lam0, moment, "invasion", basis.grid)


def critical_speed(lambda0: float) -> float:
    """Minimal front speed 2*sqrt(1 - lambda0)."""
    if not (0.0 < lambda0 < 1.0):
        raise ValidationError(
            f"no finite critical speed: requires 0 < lambda0 < 1, got {lambda0}"
        )
    return 2.0 * np.sqrt(1.0 - lambda0)


@dataclass(frozen=True)
class ModeRates:
    """Exponential decay rates of one trait mode ahead of the front."""

    lam: float
    gamma: float
    gamma_tilde: float
    is_real: bool = True


def decay_rates(c: float, lambdas) -> list[ModeRates]:
    """Rate pairs (c -+ sqrt(c^2 - 4(1 - lam)))/2 for each mode.

    Modes with lam < 1 and c below their critical speed have complex
    roots; they are flagged (is_real=False, NaN rates), not fatal.
    For lam <= 1 both rates are nonnegative with gamma <= gamma_tilde.
    """
    out = []
    for lam in np.atleast_1d(np.asarray(lambdas, dtype=float)):
        disc = c * c - 4.0 * (1.0 - lam)
        if disc < 0:
            out.append(ModeRates(float(lam), np.nan, np.nan, is_real=False))
            continue
        root = np.sqrt(disc)
        out.append(ModeRates(float(lam), (c - root) / 2.0, (c + root) / 2.0))
    return out


@dataclass
class WaveProfile:
    """Scalar front shape v(x) in [0, 1], centered so v(0) = 1/2."""

    c: float
    grid: SpaceGrid = field(repr=False)
    v: np.ndarray = field(repr=False)
    gamma0: float = 0.0
    residual_report: dict = field(default_factory=dict)


def kpp_interior_residual(v: np.ndarray, c: float, r: float, h: float) -> np.ndarray:
    """Residual of the interior difference equations for a profile v."""
    vi, vl, vr = v[1:-1], v[:-2], v[2:]
    return (-(vl - 2.0 * vi + vr) / h**2 - c * (vr - vl) / (2.0 * h)
            - r * vi * (1.0 - vi))


def _recurrence_ratio(c, r_coeff, h, target):
    """Real root of the linearized difference recurrence nearest ``target``.

    The recurrence is the interior stencil applied to a geometric mode
    v_i = rho^i of  -v'' - c v' = r_coeff * v.
    """
    roots = np.roots([-1.0 / h**2 - c / (2.0 * h),
                      2.0 / h**2 - r_coeff,
                      -1.0 / h**2 + c / (2.0 * h)])
    real = roots.real[np.abs(roots.imag) <= 1e-10 * max(1.0, np.abs(roots).max())]
    if len(real) == 0:
        raise NumericsError("no real linearized-mode ratio (speed below critical?)",
                            diagnostics={"c": c, "r": r_coeff})
    return float(real[np.argmin(np.abs(real - target))])


def solve_kpp_profile(c: float, lambda0: float, L_x: float | None = None,
                      n_x: int | None = None, tol: float = NEWTON_TOL,
                      depth: float = 12.0, max_iter: int = 60) -> WaveProfile:
    """Front profile at speed c >= cstar, by damped Newton plus tail marching.

    Defaults: L_x = 40 / gamma0 (the tail clears 1e-3 well inside the
    domain) and n_x chosen so the advection cell Peclet number c*h/2
    stays below 0.8.
    """
    cstar = critical_speed(lambda0)
    if c < cstar * (1.0 - 1e-12):
        raise ValidationError(
            f"no traveling front below the critical speed: c={c:g} < cstar={cstar:g} "
            "(any bounded state at such speeds relaxes to the steady state)"
        )
    c = max(c, cstar)
    r = 1.0 - lambda0
    gamma0 = (c - np.sqrt(max(c * c - 4.0 * r, 0.0))) / 2.0
    s_dep = (-c + np.sqrt(c * c + 4.0 * r)) / 2.0
    if L_x is None:
        L_x = 40.0 / gamma0
    if n_x is None:
        n_x = 4001
        if c * (2.0 * L_x / (n_x - 1)) / 2.0 > 0.8:
            n_x = int(np.ceil(c * 2.0 * L_x / 1.6)) | 1
    grid = SpaceGrid(L_x, n_x)
    x, h = grid.nodes, grid.spacing
    i0 = grid.center_index

    rho_tail = _recurrence_ratio(c, r, h, np.exp(-gamma0 * h))
    rho_dep = _recurrence_ratio(c, -r, h, np.exp(s_dep * h))

    # Newton solve on [x_left, 0]: left end closed by the departure ratio
    # of (1 - v), right end pinned at the midpoint value 1/2
    il = max(0, i0 - int(np.ceil(depth / s_dep / h)))
    xs = x[il:i0 + 1]
    m = len(xs) - 2
    if m < 3:
        raise ValidationError("grid too coarse for the front window; increase n_x")
    v = 1.0 / (1.0 + np.exp(np.clip(gamma0 * xs, -500.0, 500.0)))
    v[-1] = 0.5

    def close(w):
        w[0] = 1.0 - (1.0 - w[1]) / rho_dep
        return w

    iterations = 0
    newton_res = np.inf
    for iterations in range(max_iter):
        v = close(v)
        f = kpp_interior_residual(v, c, r, h)
        newton_res = float(np.abs(f).max())
        if newton_res < tol:
            break
        ab = np.zeros((3, m))
        ab[0, 1:] = -1.0 / h**2 - c / (2.0 * h)
        ab[1, :] = 2.0 / h**2 - r * (1.0 - 2.0 * v[1:-1])
        ab[2, :-1] = -1.0 / h**2 + c / (2.0 * h)
        ab[1, 0] += (-1.0 / h**2 + c / (2.0 * h)) / rho_dep
        delta = sla.solve_banded((1, 1), ab, -f, check_finite=False)
        step, base = 1.0, newton_res
        while step > 1e-4:
            trial = v.copy()
            trial[1:-1] += step * delta
            if np.abs(kpp_interior_residual(close(trial), c, r, h)).max() < base:
                break
            step /= 2.0
        v[1:-1] += step * delta
    else:
        raise NumericsError("Newton stagnated on the front profile",
                            diagnostics={"residual": newton_res, "iterations": iterations})
    v = close(v)

    full = np.empty(n_x)
    full[il:i0 + 1] = v
    if il > 0:
        full[:il] = 1.0 - (1.0 - v[0]) / rho_dep ** np.arange(il, 0, -1)

    # continue rightward: the junction stencil determines v[i0+1], then the
    # nonlinear recurrence marches (only decaying modes ahead of the front)
    cl = -1.0 / h**2 + c / (2.0 * h)
    cr = -1.0 / h**2 - c / (2.0 * h)
    for i in range(i0, n_x - 1):
        vi, vlft = full[i], full[i - 1]
        vnext = -(cl * vlft + (2.0 / h**2) * vi - r * vi * (1.0 - vi)) / cr
        if not (0.0 < vnext < vi) or vnext < MARCH_FLOOR:
            full[i + 1:] = vi * rho_tail ** np.arange(1, n_x - i)
            break
        full[i + 1] = vnext

    # translation normalization: interpolate the half-crossing back to x=0
    cross = int(np.argmax(full < 0.5))
    if cross == 0:
        raise NumericsError("profile lost its half-crossing", diagnostics={"v0": full[0]})
    shift = x[cross - 1] + h * (full[cross - 1] - 0.5) / (full[cross - 1] - full[cross])
    if abs(shift) > 0:
        full = np.interp(x + shift, x, full, left=full[0], right=full[-1])

    interior_res = float(np.abs(kpp_interior_residual(full, c, r, h)).max())
    gamma_tilde = (c + np.sqrt(max(c * c - 4.0 * r, 0.0))) / 2.0
    report = {
        "newton_residual": newton_res,
        "newton_iterations": iterations,
        "interior_residual": interior_res,
        "shift": float(shift),
        "gamma0": gamma0,
        "gamma0_tilde": gamma_tilde,
        "tail_ratio": rho_tail,
        "departure_ratio": rho_dep,
    }
    return WaveProfile(c, grid, full, gamma0, report)


def fit_tail_rate(profile: WaveProfile, lo: float = TAIL_FIT_WINDOW[0],
                  hi: float = TAIL_FIT_WINDOW[1]) -> float:
    """Exponential decay rate of the leading edge, by log-linear regression."""
    v = profile.v
    m = (v >= lo) & (v <= hi)
    if m.sum() < 5:
        raise ValidationError("tail window contains too few nodes for a rate fit")
    slope = np.polyfit(profile.grid.nodes[m], np.log(v[m]), 1)[0]
    return float(-slope)


@dataclass
class AssembledWave:
    """Separated two-dimensional front u(x, y) = mu * v(x) * psi0(y)."""

    u: np.ndarray = field(repr=False)               # (n_x, n_y)
    space_grid: SpaceGrid = field(repr=False)
    trait_grid: TraitGrid = field(repr=False)
    c: float = 0.0
    mu: float = 0.0
    lambda0: float = 0.0


def assemble_wave(profile: WaveProfile, steady: SteadyState) -> AssembledWave:
    if steady.regime != "invasion":
        raise ValidationError("cannot assemble a front onto the zero steady state")
    u = np.outer(profile.v, steady.V)
    return AssembledWave(u, profile.grid, steady.grid, profile.c,
                         steady.mu, steady.lambda0)


@dataclass
class WaveResidual:
    max_interior: float
    l2_interior: float


def wave_residual(u, c: float, op: DiscreteOperator, kernel: KernelSpec,
                  space_grid: SpaceGrid | None = None) -> WaveResidual:
    """Residual of the full traveling-front equation on a tensor field.

    Evaluates  -c du/dx - d2u/dx2 + (confining operator in y) u
    - (1 - integral of K u dz) u  with centered differences in x and the
    discrete trait operator in y, over the interior nodes.
    """
    if isinstance(u, AssembledWave):
        space_grid = u.space_grid
        u = u.u
    if space_grid is None:
        raise ValidationError("space_grid required when passing a bare array")
    u = np.asarray(u, dtype=float)
    if u.shape != (space_grid.n_points, op.grid.n_points):
        raise ValidationError(
            f"field shape {u.shape} does not match grids "
            f"({space_grid.n_points}, {op.grid.n_points})"
        )
    hx = space_grid.spacing
    wy = op.grid.quad_weights
    Kv = kernel.sample(op.grid)

    ux = (u[2:, :] - u[:-2, :]) / (2.0 * hx)
    uxx = (u[2:, :] - 2.0 * u[1:-1, :] + u[:-2, :]) / hx**2
    Lu = op.apply(u[1:-1][:, op.active])
    b = u[1:-1] @ (wy * Kv)
    res = (-c * ux - uxx)[:, op.active] + Lu - (1.0 - b)[:, None] * u[1:-1][:, op.active]
    # interior in y as well: drop active nodes adjacent to the boundary
    core = res[:, 1:-1] if res.shape[1] > 2 else res
    hy = op.grid.spacing
    return WaveResidual(float(np.abs(core).max()),
                        float(np.sqrt((core**2).sum() * hx * hy)))
