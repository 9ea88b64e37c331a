"""Scattering diagnostics: Cauchy defects, weak and modifier overlaps, the
Cook-Kuroda integrability probe, and log-log decay-rate fits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .grid import (
    POSITION,
    PhysicsParams,
    WaveField,
    as_frequency,
    as_position,
    inner_product,
)
from .propagate import TimeSchedule, apply_modifier, free_propagate, wave_operator_state
from .symbols import potential_grid


def fit_loglog_slope(times, values, window) -> tuple[float, float]:
    """Least-squares slope and RMS residual of log(value) vs log(t) in window.

    Needs at least 5 in-window points, all strictly positive.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    t_lo, t_hi = window
    mask = (times >= t_lo * (1 - 1e-12)) & (times <= t_hi * (1 + 1e-12))
    if int(mask.sum()) < 5:
        raise ValueError(
            f"log-log fit needs at least 5 points in [{t_lo}, {t_hi}], "
            f"found {int(mask.sum())}"
        )
    v = values[mask]
    if np.any(v <= 0):
        raise ValueError("log-log fit window contains nonpositive values")
    lt = np.log(times[mask])
    lv = np.log(v)
    slope, intercept = np.polyfit(lt, lv, 1)
    residual = float(np.sqrt(np.mean((lv - (slope * lt + intercept)) ** 2)))
    return float(slope), residual


@dataclass
class DecaySeries:
    """(t, value) pairs with the fitted log-log slope over a stated window."""

    times: np.ndarray
    values: np.ndarray
    fitted_slope: float
    fit_residual: float
    fit_window: tuple[float, float]
    complex_values: np.ndarray | None = field(default=None)

    def value_at(self, t: float) -> float:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-6 * max(1.0, abs(t)):
            raise KeyError(f"no series point at t = {t}")
        return float(self.values[idx])


def make_series(times, values, window=None, complex_values=None) -> DecaySeries:
    """Assemble a DecaySeries, fitting over `window` (default: full range).

    If the fit is impossible (too few points, nonpositive values) the slope
    and residual are recorded as NaN rather than raising; diagnostics often
    legitimately contain zeros (e.g. defect floors).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (float(times[0]), float(times[-1]))
    try:
        slope, residual = fit_loglog_slope(times, values, window)
    except ValueError:
        slope, residual = float("nan"), float("nan")
    return DecaySeries(times=times, values=values, fitted_slope=slope,
                       fit_residual=residual, fit_window=window,
                       complex_values=complex_values)


def cauchy_defect(phi: WaveField, t1: float, t2: float, schedule: TimeSchedule,
                  params: PhysicsParams, modified: bool = False) -> float:
    """|| W(t1) phi - W(t2) phi ||, symmetric in (t1, t2), bounded by 2 ||phi||."""
    w1 = wave_operator_state(phi, t1, schedule, params, modified=modified)
    w2 = wave_operator_state(phi, t2, schedule, params, modified=modified)
    diff = WaveField(w1.grid, w1.values - w2.values, w1.representation)
    return diff.norm()


def _match_representation(psi: WaveField, rep: str) -> WaveField:
    if psi.representation == rep:
        return psi
    return as_position(psi) if rep == POSITION else as_frequency(psi)


def weak_overlap(phi: WaveField, psi: WaveField, t: float, schedule: TimeSchedule,
                 params: PhysicsParams) -> complex:
    """(W(t) phi, psi) for the plain (unmodified) wave-operator approximant."""
    w = wave_operator_state(phi, t, schedule, params, modified=False)
    return inner_product(w, _match_representation(psi, w.representation))


def modifier_overlap(phi: WaveField, psi: WaveField, t: float,
                     params: PhysicsParams) -> complex:
    """(M(t) phi, psi); decays for rho > 1/2, constant modulus at rho = 1/2."""
    m = apply_modifier(phi, t, params)
    return inner_product(m, _match_representation(psi, m.representation))


def cook_kuroda_integrand(phi: WaveField, t: float, params: PhysicsParams) -> float:
    """|| V * exp(-i t omega(D)) phi || in position representation."""
    state = as_position(free_propagate(phi, t, params))
    weighted = potential_grid(state.grid.x_mag, params) * state.values
    w = WaveField(state.grid, weighted, state.representation)
    return w.norm()


def _check_geometric(times: np.ndarray, dt: float, max_ratio: float = 1.2) -> None:
    """Reject grids coarser than max_ratio, tolerating step-lattice snap jitter."""
    lo = times[:-1] + 0.5 * dt
    hi = times[1:] - 0.5 * dt
    ratios = hi / lo
    if ratios.size and float(np.max(ratios)) > max_ratio * (1 + 1e-9):
        raise ValueError(
            f"cook integral needs a geometric grid with ratio <= {max_ratio}, "
            f"got max ratio {float(np.max(ratios)):.4f}"
        )


def cook_kuroda_series(phi: WaveField, schedule: TimeSchedule,
                       params: PhysicsParams) -> tuple[DecaySeries, DecaySeries]:
    """Integrand samples and the cumulative trapezoid integral on the schedule."""
    times = schedule.diagnostic_times
    _check_geometric(times, schedule.dt)
    integrand = np.array([cook_kuroda_integrand(phi, t, params) for t in times])
    cumulative = cumulative_trapezoid(integrand, times, initial=0.0)
    return make_series(times, integrand), make_series(times, cumulative)


def cook_kuroda_integral(phi: WaveField, schedule: TimeSchedule,
                         params: PhysicsParams) -> DecaySeries:
    """Cumulative Cook-Kuroda integral reported at each diagnostic time."""
    _, cumulative = cook_kuroda_series(phi, schedule, params)
    return cumulative


def decade_increments(times, cumulative, anchor: float) -> list[float]:
    """Increments of a cumulative series over consecutive decades [a, 10a, ...].

    Endpoints are interpolated log-linearly between schedule samples.
    """
    times = np.asarray(times, dtype=float)
    cumulative = np.asarray(cumulative, dtype=float)
    if anchor < times[0] * (1 - 1e-9):
        raise ValueError(f"anchor {anchor} precedes first sample {times[0]}")
    edges = []
    edge = anchor
    while edge <= times[-1] * (1 + 1e-9):
        edges.append(edge)
        edge *= 10.0
    if len(edges) < 2:
        raise ValueError("need at least one full decade inside the series")
    vals = np.interp(np.log(edges), np.log(times), cumulative)
    return list(np.diff(vals))
