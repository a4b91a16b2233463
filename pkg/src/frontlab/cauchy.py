"""Time integration of the nonlocal growth-competition equation.

State u(t, x, y) lives on the tensor grid with homogeneous Dirichlet
clamps on the rectangle boundary.  One step is first-order IMEX:

  * explicit stage: the nonlocal reaction (1 - b(t, x)) u with
    b(t, x) = integral of K(z) u(t, x, z) dz per column (plus, in the
    moving-frame variant, an explicit upwind c du/dx transport term);
  * implicit stage: backward Euler in the stiff linear part, split by
    direction -- a tridiagonal solve in y per column (the trait
    operator, potential folded in) followed by a tridiagonal solve in
    x per row.

Both implicit factors are M-matrices and the explicit factor stays
positive under the enforced step cap dt * max|1 - b| <= 1/2, so the
scheme preserves nonnegativity up to roundoff.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NumericsError, ValidationError
from .grids import SpaceGrid, TraitGrid
from .potentials import KernelSpec, kernel_core_bound
from .spectral import DiscreteOperator, SpectralBasis
from . import tracker as _tracker

REACTION_CAP = 0.5
NEGATIVITY_REL_TOL = 1e-13


@dataclass(frozen=True)
class InitialData:
    """Compactly supported bump: amplitude times a cosine-squared plateau
    profile in each direction, supported on |x| <= r_x, |y| <= r_y."""

    amplitude: float
    r_x: float = 2.0
    r_y: float = 1.0
    plateau: float = 0.5


def bump_profile(s: np.ndarray, plateau: float = 0.5) -> np.ndarray:
    """1 on |s| <= plateau, cosine-squared taper to 0 at |s| = 1."""
    s = np.abs(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    out[s <= plateau] = 1.0
    ramp = (s > plateau) & (s < 1.0)
    out[ramp] = np.cos(0.5 * np.pi * (s[ramp] - plateau) / (1.0 - plateau)) ** 2
    return out


@dataclass
class Field:
    """Snapshot of the state on the tensor grid (x-major)."""

    t: float
    u: np.ndarray = field(repr=False)
    space_grid: SpaceGrid = field(repr=False)
    trait_grid: TraitGrid = field(repr=False)
    c0: float | None = None       # cap constant: u(0) <= c0 * psi0 where known


def init_field(spec: InitialData, space_grid: SpaceGrid, trait_grid: TraitGrid,
               psi0: np.ndarray | None = None) -> Field:
    """Field at t=0 from a bump spec; records the cap constant if psi0 given."""
    if spec.amplitude <= 0:
        raise ValidationError("initial data must not vanish identically (amplitude > 0)")
    if not (0.0 < spec.plateau < 1.0):
        raise ValidationError("bump plateau fraction must lie in (0, 1)")
    if spec.r_x + space_grid.spacing > space_grid.half_width:
        raise ValidationError("bump touches the x-boundary; shrink r_x or enlarge L_x")
    if spec.r_y + trait_grid.spacing > trait_grid.half_width:
        raise ValidationError("bump touches the y-boundary; shrink r_y or enlarge R_y")
    ux = bump_profile(space_grid.nodes / spec.r_x, spec.plateau)
    uy = bump_profile(trait_grid.nodes / spec.r_y, spec.plateau)
    u = spec.amplitude * np.outer(ux, uy)
    c0 = None
    if psi0 is not None:
        support = u > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(support, u / psi0[None, :], 0.0)
        if not np.all(np.isfinite(ratio)):
            raise ValidationError("bump support extends past the ground-state support")
        c0 = float(ratio.max())
    return Field(0.0, u, space_grid, trait_grid, c0)


def competition_integral(u: np.ndarray, trait_grid: TraitGrid,
                         kernel: KernelSpec) -> np.ndarray:
    """b(x) = integral of K(z) u(x, z) dz by trapezoid quadrature, per column."""
    return u @ (trait_grid.quad_weights * kernel.sample(trait_grid))


def _implicit_bands(lower, diag, upper, dt):
    m = len(diag)
    ab = np.zeros((3, m))
    ab[0, 1:] = dt * upper
    ab[1, :] = 1.0 + dt * diag
    ab[2, :-1] = dt * lower
    return ab


def step(fld: Field, dt: float, op: DiscreteOperator, kernel: KernelSpec,
         with_competition: bool = True, frame_speed: float = 0.0) -> Field:
    """One IMEX step; returns a new Field at t + dt."""
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    u = fld.u
    sg, tg = fld.space_grid, fld.trait_grid
    hx = sg.spacing

    if with_competition:
        b = competition_integral(u, tg, kernel)
    else:
        b = np.zeros(sg.n_points)
    growth = 1.0 - b
    if dt * float(np.abs(growth).max()) > REACTION_CAP * (1.0 + 1e-9):
        raise NumericsError("explicit reaction stage violates dt * max|1-b| <= 1/2",
                            diagnostics={"dt": dt, "max_abs_growth": float(np.abs(growth).max())})
    if frame_speed < 0:
        raise ValidationError("frame_speed must be nonnegative")
    if frame_speed > 0 and dt * frame_speed > hx * (1.0 + 1e-9):
        raise NumericsError("upwind transport violates its CFL bound dt*c <= h_x",
                            diagnostics={"dt": dt, "frame_speed": frame_speed, "h_x": hx})

    unew = u * (1.0 + dt * growth)[:, None]
    if frame_speed > 0:
        # moving frame adds +c du/dx; information comes from the right
        adv = np.zeros_like(u)
        adv[:-1, :] = (u[1:, :] - u[:-1, :]) / hx
        unew = unew + dt * frame_speed * adv
    unew[0, :] = 0.0
    unew[-1, :] = 0.0

    # implicit trait sweep (operator includes the potential)
    act = op.active
    if op.sym_dense is not None:
        A = op.sym_dense * dt
        A[np.diag_indices(op.n_active)] += 1.0
        scaled = (unew[:, act] * op.scale).T
        sol = np.linalg.solve(A, scaled)
        ynew = (sol / op.scale[:, None]).T
    else:
        lower, diag, upper = op.true_bands()
        ab = _implicit_bands(lower, diag, upper, dt)
        ynew = sla.solve_banded((1, 1), ab, unew[:, act].T, check_finite=False).T
    usw = np.zeros_like(unew)
    usw[:, act] = ynew

    # implicit space sweep (Dirichlet clamps at both x ends)
    m = sg.n_points - 2
    diag_x = np.full(m, 2.0 / hx**2)
    off_x = np.full(m - 1, -1.0 / hx**2)
    ab_x = _implicit_bands(off_x, diag_x, off_x, dt)
    out = np.zeros_like(usw)
    out[1:-1, :] = sla.solve_banded((1, 1), ab_x, usw[1:-1, :], check_finite=False)
    if op.bc == "dirichlet":
        out[:, 0] = 0.0
        out[:, -1] = 0.0

    if not np.all(np.isfinite(out)):
        raise NumericsError("non-finite values in the field; aborting",
                            diagnostics={"t": fld.t, "dt": dt})
    floor = -NEGATIVITY_REL_TOL * max(1.0, float(np.abs(out).max()))
    lowest = float(out.min())
    if lowest < floor:
        raise NumericsError("negativity beyond the roundoff tolerance (scheme instability)",
                            diagnostics={"t": fld.t, "min_u": lowest, "floor": floor})
    if lowest < 0.0:
        np.clip(out, 0.0, None, out=out)
    return Field(fld.t + dt, out, sg, tg, fld.c0)


def mode_amplitudes(fld: Field, basis: SpectralBasis,
                    x_indices=None) -> np.ndarray:
    """Trait-mode coefficients v_i(x) = <u(x, .), psi_i> by quadrature.

    Returns an array of shape (k, n_selected).
    """
    if basis.grid is not fld.trait_grid and basis.grid.n_points != fld.trait_grid.n_points:
        raise ValidationError("basis and field live on different trait grids")
    proj = basis.eigenvectors * fld.trait_grid.quad_weights
    cols = fld.u if x_indices is None else fld.u[np.asarray(x_indices)]
    return (cols @ proj.T).T


@dataclass
class RunSettings:
    """Time-integration controls; dt='auto' applies min(h_x^2, cap/|1-b|)."""

    T: float
    dt: float | str = "auto"
    snapshot_stride: int = 25
    theta: float | None = None
    frame_speed: float = 0.0
    with_competition: bool = True
    alpha_bar: float | None = None
    comparison_gamma: float = 1.0
    margin_width: float = 5.0
    n_modes: int = 8
    check_bounds: bool = True


@dataclass
class Trajectory:
    times: np.ndarray
    fields: list = field(repr=False)
    diag: dict = field(repr=False)
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> Field:
        return self.fields[-1]


def _pick_dt(settings, hx, b_max_abs, frame_speed):
    if settings.dt == "auto":
        dt = hx * hx
    else:
        dt = float(settings.dt)
    dt = min(dt, REACTION_CAP / max(b_max_abs, 1e-30))
    if frame_speed > 0:
        dt = min(dt, 0.9 * hx / frame_speed)
    return dt


def run(field0: Field, op: DiscreteOperator, kernel: KernelSpec,
        basis: SpectralBasis | None, settings: RunSettings) -> Trajectory:
    """Advance the field to time T, recording diagnostics every step.

    Runtime assertions follow the a priori structure of the equation:
    (a) positivity every step (hard abort on violation, inside step);
    (b) the linear comparison envelope c0 * exp((1-lambda0) t) * psi0
        when the initial cap c0 is known;
    (c) in the invasion regime (alpha below the critical intensity,
        kernel bounded below on the core), a time-uniform sup bound,
        calibrated as 3x the maximum over the first quarter of the run;
    (d) at the final time, a trait-direction exponential envelope
        calibrated the same way.
    Violations of (b)-(d) are logged, not fatal.
    """
    if settings.T < 0:
        raise ValidationError("T must be nonnegative")
    sg, tg = field0.space_grid, field0.trait_grid
    fld = field0
    n_modes = min(settings.n_modes, basis.k) if basis is not None else 0
    uniform_bound_applies = False
    if settings.alpha_bar is not None and op.alpha < settings.alpha_bar \
            and settings.with_competition:
        k1, _ = kernel_core_bound(kernel, tg, op.alpha, op.potential_values)
        uniform_bound_applies = k1 > 0

    lam0 = basis.lambda0 if basis is not None else None
    psi0 = basis.psi0 if basis is not None else None
    gamma = settings.comparison_gamma
    env_weights = np.exp(gamma * np.abs(tg.nodes))

    times, fields = [], []
    diag = {k: [] for k in ("t", "sup_u", "max_b", "front_minus", "front_plus")}
    diag["modes"] = []
    violations, warnings = [], []
    sup_history = []
    env_history = []

    def record(f: Field):
        b = competition_integral(f.u, tg, kernel) if settings.with_competition \
            else np.zeros(sg.n_points)
        sup_u = float(f.u.max())
        diag["t"].append(f.t)
        diag["sup_u"].append(sup_u)
        diag["max_b"].append(float(b.max()))
        if settings.theta is not None:
            xm, xp = _tracker.front_position(f, settings.theta)
            diag["front_minus"].append(np.nan if xm is None else xm)
            diag["front_plus"].append(np.nan if xp is None else xp)
        else:
            diag["front_minus"].append(np.nan)
            diag["front_plus"].append(np.nan)
        if n_modes:
            amp = np.abs(mode_amplitudes(f, basis)[:n_modes]).max(axis=1)
            diag["modes"].append(amp)
        sup_history.append(sup_u)
        env_history.append(float((f.u * env_weights[None, :]).max()))
        return b, sup_u

    def check_bounds(f: Field, sup_u: float, quarter_sup: float | None):
        if not settings.check_bounds:
            return
        if f.c0 is not None and lam0 is not None:
            factor = (1.0 - lam0) * f.t
            if factor < 60.0:  # beyond that the envelope is vacuous
                bound = f.c0 * np.exp(factor) * psi0
                excess = f.u - bound[None, :] * (1.0 + 1e-6)
                if float(excess.max()) > 1e-12 * max(1.0, sup_u):
                    violations.append({"t": f.t, "kind": "comparison_envelope",
                                       "excess": float(excess.max())})
        if quarter_sup is not None and sup_u > 3.0 * quarter_sup:
            violations.append({"t": f.t, "kind": "uniform_sup_bound",
                               "sup_u": sup_u, "allowed": 3.0 * quarter_sup})
        edge = sg.nodes >= sg.half_width - settings.margin_width
        edge_max = max(float(f.u[edge, :].max()), float(f.u[edge[::-1], :].max()))
        if edge_max > 1e-6 * max(sup_u, 1e-300):
            warnings.append({"t": f.t, "kind": "front_margin",
                             "edge_max": edge_max, "sup_u": sup_u})

    b, sup_u = record(fld)
    times.append(fld.t)
    fields.append(Field(fld.t, fld.u.copy(), sg, tg, fld.c0))

    t_end = float(settings.T)
    step_idx = 0
    quarter_sup = None
    while fld.t < t_end - 1e-12 * max(t_end, 1.0):
        dt = _pick_dt(settings, sg.spacing, float(np.abs(1.0 - b).max()),
                      settings.frame_speed)
        dt = min(dt, t_end - fld.t)
        fld = step(fld, dt, op, kernel, with_competition=settings.with_competition,
                   frame_speed=settings.frame_speed)
        step_idx += 1
        b, sup_u = record(fld)
        if quarter_sup is None and uniform_bound_applies and fld.t >= 0.25 * t_end:
            quarter_sup = max(sup_history)
        check_bounds(fld, sup_u, quarter_sup)
        if step_idx % settings.snapshot_stride == 0 or fld.t >= t_end - 1e-12:
            times.append(fld.t)
            fields.append(Field(fld.t, fld.u.copy(), sg, tg, fld.c0))

    if fields[-1].t < fld.t - 1e-12:
        times.append(fld.t)
        fields.append(Field(fld.t, fld.u.copy(), sg, tg, fld.c0))

    # (d) trait-envelope check at the final time
    if settings.check_bounds and t_end > 0 and len(env_history) > 4:
        q = max(1, len(env_history) // 4)
        env_ref = max(env_history[:q])
        if env_history[-1] > 3.0 * env_ref and env_ref > 0:
            violations.append({"t": fld.t, "kind": "trait_envelope",
                               "constant": env_history[-1], "allowed": 3.0 * env_ref})

    diag_arrays = {
        "t": np.asarray(diag["t"]),
        "sup_u": np.asarray(diag["sup_u"]),
        "max_b": np.asarray(diag["max_b"]),
        "front_minus": np.asarray(diag["front_minus"]),
        "front_plus": np.asarray(diag["front_plus"]),
        "modes": np.asarray(diag["modes"]) if diag["modes"] else np.zeros((len(diag["t"]), 0)),
    }
    meta = {"steps": step_idx, "theta": settings.theta,
            "frame_speed": settings.frame_speed}
    return Trajectory(np.asarray(times), fields, diag_arrays, violations, warnings, meta)
