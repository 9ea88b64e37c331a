"""Pseudospectral scattering experiments for fractional dispersion relations
with slowly decaying power-law potentials.

The package provides the spectral grid layer (`grid`), closed-form symbols
including the trajectory-corrected propagator phase (`symbols`), free and
split-step time evolution plus wave-operator approximants (`propagate`),
scattering diagnostics (`diagnostics`), and the experiment runners behind the
`fracscatter` command (`config`, `experiments`, `cli`).
"""

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
    build_wavepacket,
    inner_product,
    make_grid,
    random_band_limited,
    set_fft_workers,
    shift_position,
    to_frequency,
    to_position,
)
from .symbols import (
    DollardPhaseResult,
    dollard_phase,
    group_velocity,
    omega_symbol,
    potential_at,
    r_symbol_phase,
    t_factor,
)
from .propagate import (
    StrangStepper,
    TimeSchedule,
    apply_modifier,
    free_propagate,
    full_propagate,
    geometric_schedule,
    validate_no_wrap,
    wave_operator_state,
)
from .diagnostics import (
    DecaySeries,
    cauchy_defect,
    cook_kuroda_integral,
    cook_kuroda_integrand,
    fit_loglog_slope,
    modifier_overlap,
    weak_overlap,
)
from .config import ExperimentConfig, load_config, parse_config, serialize_config

__version__ = "0.1.0"
