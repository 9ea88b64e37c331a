"""Closed-form scalar symbols: dispersion, group velocity, potential, and the
phase of the trajectory-corrected (Dollard) propagator.

All `*_grid` functions are vectorized over arrays of magnitudes |xi| or |x|
and are what the propagators consume; the scalar wrappers below them take a
single point (scalar or length-dim vector) and implement the documented
single-point contracts, including their domain errors.

The phase of the modifier at time t and frequency xi is

    Theta(t, xi) = lam * |xi|^(1-2*rho) * Q_gamma(t * |xi|^(2*rho-1)),

where Q_gamma(u) = integral of s^(-gamma) over [1, u] (zero for u <= 1).
The indicator in the potential makes the integrand switch on at the
threshold time t_xi = |xi|^(1-2*rho).  Q is evaluated through expm1 so the
gamma -> 1 limit is seamless and the closed form stays accurate for gamma
arbitrarily close to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import PhysicsParams


@dataclass(frozen=True)
class DollardPhaseResult:
    """Phase (radians) plus the threshold time t_xi where it activates."""

    phase: float
    threshold_time: float


def _power_tail_integral(u, gamma: float):
    """integral of s**(-gamma) ds over [1, max(u, 1)], elementwise.

    Stable for gamma near 1: (u**(1-gamma) - 1)/(1-gamma) via expm1.
    """
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logu = np.log(u)
        if gamma == 1.0:
            raw = logu
        else:
            raw = np.expm1((1.0 - gamma) * logu) / (1.0 - gamma)
    return np.where(u > 1.0, raw, 0.0)


def omega_grid(xi_mag, rho: float):
    """Dispersion |xi|**(2*rho) / (2*rho); equals 0 at xi = 0."""
    xi_mag = np.asarray(xi_mag, dtype=float)
    return xi_mag ** (2.0 * rho) / (2.0 * rho)


def speed_grid(xi_mag, rho: float):
    """Group speed |xi|**(2*rho - 1)."""
    xi_mag = np.asarray(xi_mag, dtype=float)
    return xi_mag ** (2.0 * rho - 1.0)


def potential_grid(x_mag, params: PhysicsParams):
    """lam * |x|**(-gamma) outside the unit ball, exactly 0 inside."""
    x_mag = np.asarray(x_mag, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = params.lam * x_mag ** (-params.gamma)
    return np.where(x_mag >= 1.0, tail, 0.0)


def dollard_phase_grid(t: float, xi_mag, params: PhysicsParams):
    """Modifier phase Theta(t, xi) elementwise over |xi| magnitudes.

    Zero wherever t <= t_xi (including the xi = 0 bin for rho > 1/2, whose
    threshold time is infinite).
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    xi_mag = np.asarray(xi_mag, dtype=float)
    rho, gamma, lam = params.rho, params.gamma, params.lam
    with np.errstate(divide="ignore", invalid="ignore"):
        u = t * xi_mag ** (2.0 * rho - 1.0)
        amp = lam * xi_mag ** (1.0 - 2.0 * rho)
        phase = amp * _power_tail_integral(u, gamma)
    return np.where(np.asarray(u) > 1.0, phase, 0.0)


def r_phase_grid(xi_mag, params: PhysicsParams):
    """Phase exponent of the fixed multiplier R: Theta at t = epsilon**(1-2*rho)."""
    t_split = params.epsilon ** (1.0 - 2.0 * params.rho)
    return dollard_phase_grid(t_split, xi_mag, params)


def _as_point(xi) -> np.ndarray:
    pt = np.atleast_1d(np.asarray(xi, dtype=float))
    if pt.ndim != 1:
        raise ValueError(f"expected a single point, got shape {pt.shape}")
    return pt


def omega_symbol(xi, rho: float) -> float:
    """|xi|**(2*rho)/(2*rho) at a single frequency point."""
    if not 0.5 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0.5, 1], got {rho}")
    r = float(np.linalg.norm(_as_point(xi)))
    return float(omega_grid(r, rho))


def group_velocity(xi, rho: float) -> np.ndarray:
    """|xi|**(2*rho-2) * xi, the classical velocity for the dispersion."""
    pt = _as_point(xi)
    r = float(np.linalg.norm(pt))
    if r == 0.0:
        if rho < 1.0:
            raise ValueError("group velocity is singular at xi = 0 for rho < 1")
        return pt.copy()
    return r ** (2.0 * rho - 2.0) * pt


def potential_at(x, params: PhysicsParams) -> float:
    """lam * |x|**(-gamma) for |x| >= 1, else 0 (boundary included)."""
    r = float(np.linalg.norm(_as_point(x)))
    return float(potential_grid(r, params))


def dollard_phase(t: float, xi, params: PhysicsParams) -> DollardPhaseResult:
    """Accumulated modifier phase at time t >= 0 and frequency point xi != 0."""
    r = float(np.linalg.norm(_as_point(xi)))
    if r == 0.0:
        raise ValueError("dollard phase is singular at xi = 0")
    threshold = r ** (1.0 - 2.0 * params.rho)
    phase = float(dollard_phase_grid(t, r, params))
    return DollardPhaseResult(phase=phase, threshold_time=threshold)


def t_factor(t: float, params: PhysicsParams) -> float:
    """Time factor T(t): the s**(-gamma) integral from epsilon**(1-2*rho) to t.

    Vanishes at the lower limit, grows without bound for gamma <= 1 and
    saturates for gamma > 1.
    """
    t_split = params.epsilon ** (1.0 - 2.0 * params.rho)
    if t < t_split * (1.0 - 1e-12):
        raise ValueError(
            f"t_factor domain starts at epsilon**(1-2*rho) = {t_split}, got t = {t}"
        )
    u = max(t / t_split, 1.0)
    return float(t_split ** (1.0 - params.gamma) * _power_tail_integral(u, params.gamma))


def r_symbol_phase(xi, params: PhysicsParams) -> float:
    """Phase exponent of R at a frequency point with |xi| >= epsilon."""
    r = float(np.linalg.norm(_as_point(xi)))
    if r < params.epsilon * (1.0 - 1e-12):
        raise ValueError(
            f"R phase is only defined on |xi| >= epsilon = {params.epsilon}, got |xi| = {r}"
        )
    return float(r_phase_grid(r, params))


def threshold_time(xi_mag, rho: float):
    """Indicator activation time t_xi = |xi|**(1-2*rho)."""
    xi_mag = np.asarray(xi_mag, dtype=float)
    with np.errstate(divide="ignore"):
        return xi_mag ** (1.0 - 2.0 * rho)


def phase_quadrature_oracle(t: float, xi_mag: float, params: PhysicsParams) -> float:
    """Adaptive quadrature of the defining phase integral (test oracle).

    Integrates lam * |xi|**(-gamma*(2*rho-1)) * s**(-gamma) * F(...) over
    [0, t] directly, independent of the closed forms above.
    """
    from scipy.integrate import quad

    rho, gamma, lam = params.rho, params.gamma, params.lam
    if xi_mag <= 0:
        raise ValueError("oracle needs xi != 0")
    t_thresh = xi_mag ** (1.0 - 2.0 * rho)
    if t <= t_thresh:
        return 0.0
    amp = lam * xi_mag ** (-gamma * (2.0 * rho - 1.0))

    def integrand(s):
        return s**-gamma if s * xi_mag ** (2.0 * rho - 1.0) >= 1.0 else 0.0

    val, _ = quad(integrand, 0.0, t, points=[t_thresh], limit=200,
                  epsabs=1e-13, epsrel=1e-12)
    return amp * val
