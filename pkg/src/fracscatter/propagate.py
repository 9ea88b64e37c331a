"""Time evolution: exact free propagator, Strang split-step interacting
propagator, the trajectory-phase modifier, and wave-operator approximants.

Sign conventions: `free_propagate(f, t)` applies exp(-i t omega(D)) and
`full_propagate(f, t)` approximates exp(-i t H) for t > 0; negative t runs
the exact adjoint steps, so `full_propagate(f, -t)` realizes exp(+i t H) and
backward-then-forward stepping is the identity up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as _fft

from .grid import (
    FREQUENCY,
    POSITION,
    ConfigError,
    PhysicsParams,
    SpatialGrid,
    ValidationError,
    WaveField,
    as_frequency,
    as_position,
)
from . import grid as _grid
from .symbols import dollard_phase_grid, omega_grid, potential_grid, speed_grid

# Spectral amplitude below the cutoff is "zero" up to this fraction of the peak.
SUPPORT_TOL = 1e-10
# Dynamic no-wrap threshold: mass fraction allowed in the outer 5% of the box.
OUTER_MASS_TOL = 1e-8
# Effective packet support in frequency: center +/- this many widths.
SUPPORT_SIGMAS = 5.0
# Initial packet extent in position: this many position-space widths (1/width_xi).
EXTENT_SIGMAS = 6.0


def n_steps(t: float, dt: float) -> int:
    """Number of dt steps in |t|; raises if t is off the step lattice."""
    r = abs(t) / dt
    n = round(r)
    if abs(r - n) > 1e-9 * max(1.0, r):
        raise ValueError(f"time {t} is not an integer multiple of dt = {dt}")
    return int(n)


@dataclass(frozen=True)
class TimeSchedule:
    """Splitting step plus geometric diagnostic times, snapped to the step lattice."""

    dt: float
    diagnostic_times: np.ndarray
    t_max: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        times = np.asarray(self.diagnostic_times, dtype=float)
        if times.size == 0:
            raise ConfigError("schedule has no diagnostic times")
        if np.any(np.diff(times) <= 0):
            raise ConfigError("diagnostic times must be strictly ascending")
        for t in times:
            try:
                n_steps(t, self.dt)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        object.__setattr__(self, "diagnostic_times", times)


def geometric_schedule(dt: float, t0: float, ratio: float, t_max: float) -> TimeSchedule:
    """Times t0 * ratio**k snapped to multiples of dt, capped at t_max.

    The snapped t_max itself is always included as the final time.
    """
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if not ratio > 1:
        raise ConfigError(f"ratio must exceed 1, got {ratio}")
    if t0 < dt:
        raise ConfigError(f"t0 must be at least dt = {dt}, got {t0}")
    if t_max < t0:
        raise ConfigError(f"t_max = {t_max} is below t0 = {t0}")
    times = []
    t = t0
    while t <= t_max * (1.0 + 1e-12):
        snapped = round(t / dt) * dt
        if snapped >= dt and (not times or snapped > times[-1] + 0.5 * dt):
            times.append(snapped)
        t *= ratio
    final = round(t_max / dt) * dt
    if not times or final > times[-1] + 0.5 * dt:
        times.append(final)
    return TimeSchedule(dt=dt, diagnostic_times=np.array(times), t_max=final)


def free_propagate(f: WaveField, t: float, params: PhysicsParams) -> WaveField:
    """Apply exp(-i t omega(D)); exact and unitary, any real t."""
    g = as_frequency(f)
    phase = t * omega_grid(f.grid.xi_mag, params.rho)
    out = WaveField(f.grid, g.values * np.exp(-1j * phase), FREQUENCY)
    return out if f.representation == FREQUENCY else as_position(out)


def check_support(f: WaveField, params: PhysicsParams) -> None:
    """Raise unless the spectral mass below the cutoff is zero (to rounding)."""
    g = as_frequency(f)
    below = f.grid.xi_mag < params.epsilon
    if not below.any():
        return
    peak = float(np.max(np.abs(g.values)))
    stray = float(np.max(np.abs(g.values[below]))) if peak > 0 else 0.0
    if stray > SUPPORT_TOL * peak:
        raise ValidationError(
            f"support violation: spectral amplitude {stray:.3e} below "
            f"|xi| = {params.epsilon} (peak {peak:.3e})"
        )


def apply_modifier(f: WaveField, t: float, params: PhysicsParams,
                   conjugate: bool = False) -> WaveField:
    """Multiply frequency bins by exp(-i Theta(t, xi)) (or its conjugate).

    Requires the support condition; the zero-frequency multiplier is 1.
    """
    check_support(f, params)
    g = as_frequency(f)
    phase = dollard_phase_grid(t, f.grid.xi_mag, params)
    phase = np.where(f.grid.xi_mag == 0.0, 0.0, phase)
    sign = 1.0 if conjugate else -1.0
    out = WaveField(f.grid, g.values * np.exp(sign * 1j * phase), FREQUENCY)
    return out if f.representation == FREQUENCY else as_position(out)


class StrangStepper:
    """Precomputed multipliers for second-order split steps on one grid.

    One forward step is exp(-i dt V / 2), exp(-i dt omega(D)), exp(-i dt V / 2);
    a backward step is the exact adjoint.  `run` accepts position-space value
    arrays with optional leading batch dimensions.
    """

    def __init__(self, grid: SpatialGrid, params: PhysicsParams, dt: float,
                 workers: int | None = None):
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.grid = grid
        self.params = params
        self.dt = dt
        self.workers = workers if workers is not None else _grid.fft_workers()
        self.pot_half = np.exp(-0.5j * dt * potential_grid(grid.x_mag, params))
        self.kinetic = np.exp(-1j * dt * omega_grid(grid.xi_mag, params.rho))

    @cached_property
    def pot_half_conj(self) -> np.ndarray:
        return np.conj(self.pot_half)

    @cached_property
    def kinetic_conj(self) -> np.ndarray:
        return np.conj(self.kinetic)

    def _axes(self) -> tuple[int, ...]:
        return tuple(range(-self.grid.dim, 0))

    def run(self, values: np.ndarray, n: int, backward: bool = False) -> np.ndarray:
        """Apply n split steps to position-space values; returns a new array."""
        if n < 0:
            raise ValueError("step count must be nonnegative")
        v = np.array(values, dtype=np.complex128, copy=True)
        if n == 0:
            return v
        pot = self.pot_half_conj if backward else self.pot_half
        kin = self.kinetic_conj if backward else self.kinetic
        axes = self._axes()
        w = self.workers
        for _ in range(n):
            v *= pot
            v = _fft.fftn(v, axes=axes, workers=w, overwrite_x=True)
            v *= kin
            v = _fft.ifftn(v, axes=axes, workers=w, overwrite_x=True)
            v *= pot
        return v

    def run_staggered(self, jobs: list[tuple[int, np.ndarray]],
                      backward: bool = False) -> list[np.ndarray]:
        """Evolve many position-space states with per-state step counts.

        Steps are time-homogeneous, so a state needing n steps joins the
        shared batch when n steps remain; all active states advance together
        through batched transforms.  Results are returned in job order.
        """
        if not jobs:
            return []
        order = sorted(range(len(jobs)), key=lambda i: jobs[i][0], reverse=True)
        n_max = jobs[order[0]][0]
        batch = np.empty((0,) + self.grid.shape, dtype=np.complex128)
        members: list[int] = []
        results: list[np.ndarray | None] = [None] * len(jobs)
        pos = 0
        for remaining in range(n_max, 0, -1):
            joining = []
            while pos < len(order) and jobs[order[pos]][0] == remaining:
                joining.append(order[pos])
                pos += 1
            if joining:
                stack = np.stack([np.asarray(jobs[i][1], dtype=np.complex128)
                                  for i in joining])
                batch = np.concatenate([batch, stack]) if batch.size else stack
                members.extend(joining)
            batch = self.run(batch, 1, backward=backward)
        for row, i in enumerate(members):
            results[i] = batch[row]
        while pos < len(order):  # zero-step jobs
            i = order[pos]
            results[i] = np.array(jobs[i][1], dtype=np.complex128, copy=True)
            pos += 1
        return results  # type: ignore[return-value]


def full_propagate(f: WaveField, t: float, schedule: TimeSchedule,
                   params: PhysicsParams) -> WaveField:
    """Strang split-step approximation of exp(-i t H); |t| on the step lattice."""
    n = n_steps(t, schedule.dt)
    p = as_position(f)
    stepper = StrangStepper(f.grid, params, schedule.dt)
    vals = stepper.run(p.values, n, backward=t < 0)
    out = WaveField(f.grid, vals, POSITION)
    return out if f.representation == POSITION else as_frequency(out)


def wave_operator_state(phi: WaveField, t: float, schedule: TimeSchedule,
                        params: PhysicsParams, modified: bool = False) -> WaveField:
    """exp(i t H) exp(-i t omega(D)) [M(t)] phi, evaluated by composition."""
    if t < 0:
        raise ValueError(f"wave operator approximant needs t >= 0, got {t}")
    state = apply_modifier(phi, t, params) if modified else phi
    state = free_propagate(state, t, params)
    return full_propagate(state, -t, schedule, params)


def packet_support_xi_max(center_xi, width_xi: float) -> float:
    """Effective top of the packet's frequency support (center + 5 widths)."""
    c = float(np.linalg.norm(np.atleast_1d(np.asarray(center_xi, dtype=float))))
    return c + SUPPORT_SIGMAS * width_xi


def packet_extent(width_xi: float) -> float:
    """Initial position-space reach: 6 position widths (1/width_xi each)."""
    return EXTENT_SIGMAS / width_xi


def no_wrap_budget(params: PhysicsParams, t_max: float, center_xi,
                   width_xi: float) -> float:
    """Worst-case distance t_max * v_max + packet_extent for this packet."""
    xi_top = packet_support_xi_max(center_xi, width_xi)
    v_max = float(speed_grid(xi_top, params.rho))
    return t_max * v_max + packet_extent(width_xi)


def validate_no_wrap(grid: SpatialGrid, params: PhysicsParams, t_max: float,
                     center_xi, width_xi: float) -> None:
    """Reject configurations whose packets could wrap around the box."""
    needed = no_wrap_budget(params, t_max, center_xi, width_xi)
    if needed > 0.9 * grid.half_length:
        suggested = math.ceil(needed / 0.9)
        raise ConfigError(
            f"no-wrap violation: t_max * v_max + packet extent = {needed:.1f} "
            f"exceeds 0.9 * half_length = {0.9 * grid.half_length:.1f}; "
            f"use half_length >= {suggested}"
        )


def outer_band_fraction(f: WaveField) -> float:
    """Fraction of position-space mass in the outer 5% of the box."""
    p = as_position(f)
    if f.grid.dim == 1:
        outer = f.grid.x_mag > 0.95 * f.grid.half_length
    else:
        a = np.abs(f.grid.x_axis)
        o1, o2 = np.meshgrid(a, a, indexing="ij")
        outer = np.maximum(o1, o2) > 0.95 * f.grid.half_length
    total = float(np.sum(np.abs(p.values) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(p.values[outer]) ** 2)) / total


def check_no_wrap_mass(f: WaveField, t: float) -> None:
    frac = outer_band_fraction(f)
    if frac > OUTER_MASS_TOL:
        raise ValidationError(
            f"no-wrap violation at t = {t}: outer 5% of the box holds "
            f"{frac:.3e} of the mass (limit {OUTER_MASS_TOL})"
        )
