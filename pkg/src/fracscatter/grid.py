"""Periodic spectral grids, unitary transforms, and band-limited wavepackets.

The position box is [-L, L) per axis with N samples, and the dual frequency
lattice is xi_j = j * dk with dk = pi / L.  Both representations are stored in
FFT wrap order (0, 1, ..., N/2-1, -N/2, ..., -1 times the spacing), so a plain
FFT maps one to the other without shift bookkeeping.

Discrete sums carry dx**dim (position) or dk**dim (frequency) measure weights,
which makes the discrete l2 norm approximate the continuum L2 norm and makes
the transform pair exactly unitary between the two weighted norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as _fft

POSITION = "position"
FREQUENCY = "frequency"

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Worker count handed to scipy.fft; set once by the CLI, safe to leave at 1.
_fft_workers = 1


def set_fft_workers(n: int) -> None:
    global _fft_workers
    if n < 1:
        raise ValueError(f"fft workers must be >= 1, got {n}")
    _fft_workers = int(n)


def fft_workers() -> int:
    return _fft_workers


class ConfigError(ValueError):
    """Invalid configuration or construction parameters (CLI exit code 1)."""


class ValidationError(RuntimeError):
    """A numerical invariant failed during a run (CLI exit code 2)."""


def _wrap_coords(n: int, spacing: float) -> np.ndarray:
    idx = np.arange(n)
    idx[n // 2:] -= n
    return idx * spacing


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic position/frequency lattice for 1 or 2 dimensions.

    Attributes:
        dim: spatial dimension, 1 or 2.
        points_per_axis: samples per axis, a power of two >= 8.
        half_length: L; the box is [-L, L) per axis.
        dx: position spacing 2L/N.
        dk: frequency spacing pi/L, so dx * dk * N = 2*pi exactly.
    """

    dim: int
    points_per_axis: int
    half_length: float
    dx: float = field(init=False)
    dk: float = field(init=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        n = self.points_per_axis
        if n < 8 or n & (n - 1):
            raise ConfigError(f"points_per_axis must be a power of two >= 8, got {n}")
        if not self.half_length > 0:
            raise ConfigError(f"half_length must be positive, got {self.half_length}")
        object.__setattr__(self, "dx", 2.0 * self.half_length / n)
        object.__setattr__(self, "dk", math.pi / self.half_length)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @cached_property
    def x_axis(self) -> np.ndarray:
        """Wrap-ordered position samples along one axis."""
        return _wrap_coords(self.points_per_axis, self.dx)

    @cached_property
    def xi_axis(self) -> np.ndarray:
        """Wrap-ordered frequency samples along one axis."""
        return _wrap_coords(self.points_per_axis, self.dk)

    @cached_property
    def x_mag(self) -> np.ndarray:
        """|x| at every lattice site, shaped like field values."""
        return self._magnitude(self.x_axis)

    @cached_property
    def xi_mag(self) -> np.ndarray:
        """|xi| at every lattice site, shaped like field values."""
        return self._magnitude(self.xi_axis)

    def _magnitude(self, axis: np.ndarray) -> np.ndarray:
        if self.dim == 1:
            return np.abs(axis)
        a, b = np.meshgrid(axis, axis, indexing="ij")
        return np.hypot(a, b)

    def position_weight(self) -> float:
        return self.dx ** self.dim

    def frequency_weight(self) -> float:
        return self.dk ** self.dim


def make_grid(dim: int, points_per_axis: int, half_length: float) -> SpatialGrid:
    return SpatialGrid(dim=dim, points_per_axis=points_per_axis, half_length=float(half_length))


@dataclass(frozen=True)
class PhysicsParams:
    """Model parameters: dispersion exponent, potential tail, coupling, cutoff.

    rho in [1/2, 1] (1/2 only meaningful for the degeneracy diagnostics),
    gamma > 0 (values > 1 run the short-range control branch), lam is the
    coupling strength (0 allowed for control/floor runs), epsilon > 0 is the
    lower spectral support cutoff imposed on wavepackets.
    """

    rho: float
    gamma: float
    lam: float
    epsilon: float

    def __post_init__(self):
        if not 0.5 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [0.5, 1], got {self.rho}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")


@dataclass
class WaveField:
    """Complex field sampled on a grid, tagged with its current representation."""

    grid: SpatialGrid
    values: np.ndarray
    representation: str

    def __post_init__(self):
        if self.representation not in (POSITION, FREQUENCY):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )
        if self.values.dtype != np.complex128:
            self.values = self.values.astype(np.complex128)

    @property
    def weight(self) -> float:
        if self.representation == POSITION:
            return self.grid.position_weight()
        return self.grid.frequency_weight()

    def norm(self) -> float:
        """Discrete approximation of the continuum L2 norm."""
        return float(np.linalg.norm(self.values.ravel())) * math.sqrt(self.weight)

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.values.copy(), self.representation)


def to_frequency(f: WaveField) -> WaveField:
    """Forward transform with the 1/(2*pi)^{n/2} continuum normalization."""
    if f.representation != POSITION:
        raise ValueError("to_frequency expects a position-representation field")
    scale = (f.grid.dx / _SQRT_2PI) ** f.grid.dim
    vals = _fft.fftn(f.values, workers=_fft_workers) * scale
    return WaveField(f.grid, vals, FREQUENCY)


def to_position(f: WaveField) -> WaveField:
    if f.representation != FREQUENCY:
        raise ValueError("to_position expects a frequency-representation field")
    scale = (_SQRT_2PI / f.grid.dx) ** f.grid.dim
    vals = _fft.ifftn(f.values, workers=_fft_workers) * scale
    return WaveField(f.grid, vals, POSITION)


def as_position(f: WaveField) -> WaveField:
    return f if f.representation == POSITION else to_position(f)


def as_frequency(f: WaveField) -> WaveField:
    return f if f.representation == FREQUENCY else to_frequency(f)


def inner_product(f: WaveField, g: WaveField) -> complex:
    """Discrete (f, g) = integral of conj(f) * g; conjugate-linear in f."""
    if f.grid != g.grid:
        raise ValueError("inner_product requires fields on the same grid")
    if f.representation != g.representation:
        raise ValueError("inner_product requires matching representations")
    return complex(np.vdot(f.values, g.values)) * f.weight


def build_wavepacket(
    grid: SpatialGrid,
    params: PhysicsParams,
    center_xi,
    width_xi: float,
) -> WaveField:
    """Unit-norm frequency-space Gaussian with a hard lower spectral cutoff.

    Every bin with |xi| < params.epsilon is set to exactly zero, then the field
    is normalized; the support condition therefore holds bin-for-bin.
    """
    if not width_xi > 0:
        raise ConfigError(f"width_xi must be positive, got {width_xi}")
    center = np.atleast_1d(np.asarray(center_xi, dtype=float))
    if center.size != grid.dim:
        raise ConfigError(
            f"center_xi has {center.size} components for a {grid.dim}-d grid"
        )
    if grid.dim == 1:
        dist2 = (grid.xi_axis - center[0]) ** 2
    else:
        a, b = np.meshgrid(grid.xi_axis - center[0], grid.xi_axis - center[1], indexing="ij")
        dist2 = a * a + b * b
    vals = np.exp(-dist2 / (2.0 * width_xi**2)).astype(np.complex128)
    full_mass = float(np.sum(np.abs(vals) ** 2))
    vals[grid.xi_mag < params.epsilon] = 0.0
    kept_mass = float(np.sum(np.abs(vals) ** 2))
    if kept_mass < 1e-6 * full_mass:
        raise ConfigError(
            "wavepacket support lies (almost) entirely below the spectral cutoff "
            f"(center {center.tolist()}, width {width_xi}, epsilon {params.epsilon})"
        )
    packet = WaveField(grid, vals, FREQUENCY)
    packet.values /= packet.norm()
    return packet


def shift_position(f: WaveField, offset) -> WaveField:
    """Translate a field by `offset` in position space (exact, via phase ramp)."""
    g = as_frequency(f)
    off = np.atleast_1d(np.asarray(offset, dtype=float))
    if off.size != f.grid.dim:
        raise ValueError(f"offset has {off.size} components for a {f.grid.dim}-d grid")
    if f.grid.dim == 1:
        phase = f.grid.xi_axis * off[0]
    else:
        a, b = np.meshgrid(f.grid.xi_axis * off[0], f.grid.xi_axis * off[1], indexing="ij")
        phase = a + b
    return WaveField(f.grid, g.values * np.exp(-1j * phase), FREQUENCY)


def random_band_limited(
    grid: SpatialGrid,
    params: PhysicsParams,
    xi_max: float,
    seed: int,
) -> WaveField:
    """Seeded random unit-norm field supported on epsilon <= |xi| <= xi_max."""
    rng = np.random.default_rng(seed)
    band = (grid.xi_mag >= params.epsilon) & (grid.xi_mag <= xi_max)
    if not band.any():
        raise ConfigError(f"empty frequency band [{params.epsilon}, {xi_max}]")
    vals = np.zeros(grid.shape, dtype=np.complex128)
    n_band = int(band.sum())
    vals[band] = rng.standard_normal(n_band) + 1j * rng.standard_normal(n_band)
    probe = WaveField(grid, vals, FREQUENCY)
    probe.values /= probe.norm()
    return probe
