"""Front extraction, speed estimation, and spreading diagnostics.

Front positions are level-set readings of a 1-D slice of the field
(the central trait row by default) with linear interpolation between
nodes.  The asymptotic speed estimate is a least-squares slope of the
front position over a late-time window.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


def _slice_of(fld, policy: str) -> np.ndarray:
    if policy == "y0":
        return fld.u[:, fld.trait_grid.center_index]
    if policy == "ymax":
        return fld.u.max(axis=1)
    raise ValidationError(f"unknown slice policy {policy!r}; use 'y0' or 'ymax'")


def front_position(fld, theta: float, policy: str = "y0"):
    """(X_minus, X_plus): outermost level-theta crossings of the slice.

    Returns (None, None) when the slice never reaches theta (a valid
    outcome during extinction).
    """
    if theta <= 0:
        raise ValidationError(f"threshold theta must be positive, got {theta}")
    s = _slice_of(fld, policy)
    x = fld.space_grid.nodes
    h = fld.space_grid.spacing
    above = np.nonzero(s >= theta)[0]
    if len(above) == 0:
        return None, None
    i_hi = int(above[-1])
    if i_hi == len(x) - 1:
        x_plus = float(x[-1])
    else:
        x_plus = float(x[i_hi] + h * (s[i_hi] - theta) / (s[i_hi] - s[i_hi + 1]))
    i_lo = int(above[0])
    if i_lo == 0:
        x_minus = float(x[0])
    else:
        x_minus = float(x[i_lo] - h * (s[i_lo] - theta) / (s[i_lo] - s[i_lo - 1]))
    return x_minus, x_plus


@dataclass
class FrontTrace:
    times: np.ndarray
    x_minus: np.ndarray = field(repr=False)
    x_plus: np.ndarray = field(repr=False)
    theta: float = 0.0
    policy: str = "y0"
    spacing: float = 0.0


def front_trace(trajectory, theta: float, policy: str = "y0") -> FrontTrace:
    """Level-set trace recomputed from the stored snapshots."""
    times, xm, xp = [], [], []
    for f in trajectory.fields:
        a, b = front_position(f, theta, policy)
        times.append(f.t)
        xm.append(np.nan if a is None else a)
        xp.append(np.nan if b is None else b)
    return FrontTrace(np.asarray(times), np.asarray(xm), np.asarray(xp), theta,
                      policy, trajectory.fields[0].space_grid.spacing)


def trace_from_diagnostics(trajectory) -> FrontTrace:
    """Per-step trace recorded during the run (denser than snapshots)."""
    d = trajectory.diag
    return FrontTrace(d["t"].copy(), d["front_minus"].copy(), d["front_plus"].copy(),
                      trajectory.meta.get("theta") or 0.0, "y0",
                      trajectory.fields[0].space_grid.spacing)


@dataclass
class SpeedEstimate:
    c_hat: float
    c_plus: float
    c_minus: float
    window: tuple
    residual: float
    stderr: float
    n_samples: int
    status: str = "ok"
    warnings: list = field(default_factory=list)


def _fit_slope(t, x):
    tbar, xbar = t.mean(), x.mean()
    dt = t - tbar
    denom = float((dt * dt).sum())
    slope = float((dt * (x - xbar)).sum()) / denom
    resid = x - (xbar + slope * dt)
    rss = float((resid * resid).sum())
    dof = max(len(t) - 2, 1)
    stderr = np.sqrt(rss / dof / denom)
    return slope, np.sqrt(rss / len(t)), float(stderr)


def estimate_speed(trace: FrontTrace, window_fraction: float = 0.5,
                   monotone_slack: float | None = None) -> SpeedEstimate:
    """Least-squares front speed over the window [wf*T, T].

    Fits the right and left fronts separately (sign-flipped on the
    left) and reports their average.  A non-monotone trace inside the
    window beyond the slack attaches a warning, not an error.
    """
    if not (0.0 <= window_fraction < 1.0):
        raise ValidationError("window_fraction must lie in [0, 1)")
    t_end = float(trace.times[-1])
    sel = trace.times >= window_fraction * t_end
    ok = sel & np.isfinite(trace.x_plus) & np.isfinite(trace.x_minus)
    if ok.sum() < 10:
        return SpeedEstimate(np.nan, np.nan, np.nan,
                             (window_fraction * t_end, t_end),
                             np.nan, np.nan, int(ok.sum()), status="no front")
    t = trace.times[ok]
    warnings = []
    slack = 2.0 * trace.spacing if monotone_slack is None else monotone_slack
    cp, resid_p, se_p = _fit_slope(t, trace.x_plus[ok])
    cm, resid_m, se_m = _fit_slope(t, -trace.x_minus[ok])
    for name, series in (("x_plus", trace.x_plus[ok]), ("x_minus", -trace.x_minus[ok])):
        drops = np.diff(series)
        if np.any(drops < -(slack + 1e-12)):
            warnings.append(f"{name} not monotone inside the fit window "
                            f"(max drop {float(-drops.min()):.3g})")
    c_hat = 0.5 * (cp + cm)
    return SpeedEstimate(c_hat, cp, cm, (float(t[0]), float(t[-1])),
                         0.5 * (resid_p + resid_m), 0.5 * (se_p + se_m),
                         int(ok.sum()), "ok", warnings)


def _cone_columns(fld, x_abs_max: float, inside: bool):
    """Column values (per y) restricted to |x| <= x_abs_max (inside) or
    |x| >= x_abs_max (outside), with linear interpolation at the edge."""
    x = fld.space_grid.nodes
    if inside:
        mask = np.abs(x) <= x_abs_max
    else:
        mask = np.abs(x) >= x_abs_max
    cols = [fld.u[mask, :]] if np.any(mask) else []
    if 0.0 < x_abs_max < x[-1]:
        for edge in (-x_abs_max, x_abs_max):
            j = int(np.searchsorted(x, edge))
            j = min(max(j, 1), len(x) - 1)
            w = (edge - x[j - 1]) / (x[j] - x[j - 1])
            cols.append(((1 - w) * fld.u[j - 1, :] + w * fld.u[j, :])[None, :])
    if not cols:
        return None
    return np.vstack(cols)


def invasion_profile_error(trajectory, steady, c: float, c_star: float | None = None,
                           margin: float = 5.0):
    """sup over the cone |x| <= c t of the trait-direction distance to V.

    Returns (times, errors, warnings).  The cone is truncated (with a
    warning) where it would cross into the boundary margin.
    """
    if c < 0:
        raise ValidationError("cone speed c must be nonnegative")
    if c_star is not None and c >= c_star:
        raise ValidationError(f"invasion cone requires c < c_star, got c={c} >= {c_star}")
    warnings = []
    times, errors = [], []
    for f in trajectory.fields:
        reach = c * f.t
        safe = f.space_grid.half_width - margin
        if reach > safe:
            warnings.append({"t": f.t, "kind": "cone_truncated", "reach": reach,
                             "safe": safe})
            reach = safe
        cols = _cone_columns(f, reach, inside=True)
        dev = np.abs(cols - steady.V[None, :])
        times.append(f.t)
        errors.append(float(dev.max()))
    return np.asarray(times), np.asarray(errors), warnings


def emptiness_beyond(trajectory, c: float):
    """sup of the field outside the cone |x| >= c t, per snapshot.

    Returns (times, sups, region_empty flags); the sup is 0 where the
    region has left the grid.
    """
    if c <= 0:
        raise ValidationError("cone speed c must be positive")
    times, sups, flags = [], [], []
    for f in trajectory.fields:
        reach = c * f.t
        if reach > f.space_grid.half_width:
            times.append(f.t)
            sups.append(0.0)
            flags.append(True)
            continue
        cols = _cone_columns(f, reach, inside=False)
        times.append(f.t)
        sups.append(float(cols.max()))
        flags.append(False)
    return np.asarray(times), np.asarray(sups), flags


def envelope_forecast(times, sups, c: float, c_star: float, v_max: float,
                      fit_fraction: float = 0.25, tolerance: float = 0.10):
    """Fit-then-forecast check of the exponential emptiness envelope.

    The envelope M3 * exp(-(c_star/2)(c - c_star) t) * v_max is
    calibrated at the first sample past ``fit_fraction`` of the run and
    must dominate the measured sup from there on, within ``tolerance``.
    """
    times = np.asarray(times)
    sups = np.asarray(sups)
    t_end = times[-1]
    i0 = int(np.argmax(times >= fit_fraction * t_end))
    rate = 0.5 * c_star * (c - c_star)
    env0 = np.exp(-rate * times[i0]) * v_max
    if sups[i0] <= 0 or env0 <= 0:
        return {"M3": 0.0, "ok": True, "max_ratio": 0.0, "fit_time": float(times[i0])}
    M3 = sups[i0] / env0
    envelope = M3 * np.exp(-rate * times[i0:]) * v_max
    ratios = sups[i0:] / envelope
    return {"M3": float(M3), "ok": bool(ratios.max() <= 1.0 + tolerance),
            "max_ratio": float(ratios.max()), "fit_time": float(times[i0])}
