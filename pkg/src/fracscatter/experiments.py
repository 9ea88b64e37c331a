"""Experiment orchestration: batched series engines, the per-kind runners
behind the CLI, and CSV/JSON output.

The engines compute the same quantities as the single-point diagnostics but
share work across diagnostic times.  Two exact identities make this possible:

* unitary invariance of norms, so the defect || W(t) phi - W(2t) phi || equals
  || e^(-i t w) M(t) phi  -  e^(+i t H) e^(-2 i t w) M(2t) phi ||, needing one
  backward evolution of length t instead of t + 2t;
* time-homogeneity of the split step, so states needing different step counts
  join one shared batch when their remaining count matches the global counter.

Both reductions agree with the compositional definitions to rounding; the
test suite pins that equality on small grids.
"""

from __future__ import annotations

import csv
import json
import logging
import os

import numpy as np

from .config import ExperimentConfig, params_hash, serialize_config
from .diagnostics import (
    DecaySeries,
    cook_kuroda_series,
    make_series,
    modifier_overlap,
)
from .grid import (
    POSITION,
    PhysicsParams,
    ValidationError,
    WaveField,
    as_position,
    build_wavepacket,
    inner_product,
    random_band_limited,
    shift_position,
)
from .propagate import (
    StrangStepper,
    TimeSchedule,
    apply_modifier,
    check_no_wrap_mass,
    free_propagate,
    n_steps,
    outer_band_fraction,
)
from .symbols import dollard_phase_grid

log = logging.getLogger("fracscatter")

# Position offset of the shifted weak-limit probe, in box length units.
PROBE_SHIFT = 50.0
# Spectral band of the random weak-limit probe: [epsilon, center + BAND_SIGMAS * width].
PROBE_BAND_SIGMAS = 5.0


def _zero_coupling(params: PhysicsParams) -> PhysicsParams:
    return PhysicsParams(rho=params.rho, gamma=params.gamma, lam=0.0,
                         epsilon=params.epsilon)


def defect_pair_times(schedule: TimeSchedule) -> np.ndarray:
    """Diagnostic times t with 2t still inside the schedule; pairs are (t, 2t)."""
    times = schedule.diagnostic_times
    return times[2.0 * times <= schedule.t_max * (1.0 + 1e-9)]


def defect_pair_series(phi: WaveField, schedule: TimeSchedule,
                       params: PhysicsParams, modified: bool = False,
                       check_wrap: bool = True) -> DecaySeries:
    """Cauchy defects || W(t) phi - W(2t) phi || over the pair times.

    Series times are the lower pair member t; the fit window is the full
    pair-time range.
    """
    lows = defect_pair_times(schedule)
    if lows.size == 0:
        raise ValueError("schedule leaves no (t, 2t) pairs; raise t_max or lower t0")
    dt = schedule.dt
    stepper = StrangStepper(phi.grid, params, dt)
    jobs = []
    anchors = []
    for t in lows:
        far = apply_modifier(phi, 2.0 * t, params) if modified else phi
        far = as_position(free_propagate(far, 2.0 * t, params))
        jobs.append((n_steps(t, dt), far.values))
        near = apply_modifier(phi, t, params) if modified else phi
        anchors.append(as_position(free_propagate(near, t, params)))
    log.info("defect series: %d pairs, %d backward steps total",
             len(lows), sum(n for n, _ in jobs))
    evolved = stepper.run_staggered(jobs, backward=True)
    weight = np.sqrt(phi.grid.position_weight())
    defects = []
    for t, near, final in zip(lows, anchors, evolved):
        if check_wrap:
            check_no_wrap_mass(near, t)
            check_no_wrap_mass(WaveField(phi.grid, final, POSITION), t)
        defects.append(float(np.linalg.norm((near.values - final).ravel())) * weight)
    return make_series(lows, np.array(defects))


def waveop_state_series(phi: WaveField, times, schedule: TimeSchedule,
                        params: PhysicsParams, modified: bool = False,
                        check_wrap: bool = True) -> list[WaveField]:
    """W(t) phi for every requested time, via one staggered backward batch."""
    dt = schedule.dt
    stepper = StrangStepper(phi.grid, params, dt)
    jobs = []
    for t in times:
        state = apply_modifier(phi, t, params) if modified else phi
        state = as_position(free_propagate(state, t, params))
        jobs.append((n_steps(t, dt), state.values))
    log.info("wave-operator states: %d times, %d backward steps total",
             len(jobs), sum(n for n, _ in jobs))
    evolved = stepper.run_staggered(jobs, backward=True)
    out = []
    for t, vals in zip(times, evolved):
        w = WaveField(phi.grid, vals, POSITION)
        if check_wrap:
            check_no_wrap_mass(w, t)
        out.append(w)
    return out


def modifier_overlap_series(phi: WaveField, psi: WaveField, times,
                            params: PhysicsParams) -> np.ndarray:
    return np.array([modifier_overlap(phi, psi, t, params) for t in times])


def modifier_phase_span(t: float, params: PhysicsParams, xi_lo: float,
                        xi_hi: float) -> float:
    """Phase spread |Theta(t, xi_lo) - Theta(t, xi_hi)| across a band."""
    lo = float(dollard_phase_grid(t, xi_lo, params))
    hi = float(dollard_phase_grid(t, xi_hi, params))
    return abs(lo - hi)


# ---------------------------------------------------------------------------
# output helpers

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_summary(path: str, summary: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _series_stats(series: DecaySeries) -> dict:
    return {
        "fitted_slope": series.fitted_slope,
        "fit_residual": series.fit_residual,
        "fit_window": list(series.fit_window),
        "first_value": float(series.values[0]),
        "last_value": float(series.values[-1]),
        "max_value": float(np.max(series.values)),
    }


# ---------------------------------------------------------------------------
# per-kind runners

def _out_paths(cfg: ExperimentConfig, out_dir: str | None) -> tuple[str, str, str]:
    directory = out_dir if out_dir is not None else cfg.out_dir
    os.makedirs(directory, exist_ok=True)
    digest = params_hash(cfg)
    csv_path = os.path.join(directory, f"{cfg.kind}_{digest}.csv")
    json_path = os.path.join(directory, f"summary_{digest}.json")
    return directory, csv_path, json_path


def _base_summary(cfg: ExperimentConfig) -> dict:
    return {
        "kind": cfg.kind,
        "params_hash": params_hash(cfg),
        "config": serialize_config(cfg),
    }


def run_defect(cfg: ExperimentConfig, out_dir: str | None = None,
               modified: bool | None = None) -> dict:
    if modified is None:
        modified = cfg.kind == "dollard_cauchy"
    params = cfg.physics()
    grid = cfg.grid()
    schedule = cfg.schedule()
    phi = cfg.packet(grid, params)

    main = defect_pair_series(phi, schedule, params, modified=modified)
    floor = defect_pair_series(phi, schedule, _zero_coupling(params), modified=False)

    directory, csv_path, json_path = _out_paths(cfg, out_dir)
    rows = [(t, 2.0 * t, d) for t, d in zip(main.times, main.values)]
    write_csv(csv_path, ["t1", "t2", "defect"], rows)
    floor_path = csv_path.replace(".csv", "_floor.csv")
    write_csv(floor_path, ["t1", "t2", "defect"],
              [(t, 2.0 * t, d) for t, d in zip(floor.times, floor.values)])

    summary = _base_summary(cfg)
    summary.update({
        "modified": modified,
        "series": _series_stats(main),
        "floor": {
            "max_value": float(np.max(floor.values)),
            "last_value": float(floor.values[-1]),
        },
        "files": {"csv": os.path.basename(csv_path),
                  "floor_csv": os.path.basename(floor_path)},
    })
    write_summary(json_path, summary)
    summary["paths"] = {"csv": csv_path, "floor_csv": floor_path, "json": json_path}
    return summary


def run_weaklimit(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    params = cfg.physics()
    grid = cfg.grid()
    schedule = cfg.schedule()
    phi = cfg.packet(grid, params)

    shift = [PROBE_SHIFT] + [0.0] * (grid.dim - 1)
    psi_shift = as_position(shift_position(phi, shift))
    xi_top = float(np.linalg.norm(cfg.xi_center)) + PROBE_BAND_SIGMAS * cfg.xi_width
    psi_rand = as_position(random_band_limited(grid, params, xi_top, cfg.seed))

    times = schedule.diagnostic_times
    states = waveop_state_series(phi, times, schedule, params, modified=False)

    rows = []
    ov_shift, ov_rand, norms, outer = [], [], [], []
    for t, w in zip(times, states):
        o1 = inner_product(w, psi_shift)
        o2 = inner_product(w, psi_rand)
        nrm = w.norm()
        frac = outer_band_fraction(w)
        ov_shift.append(o1)
        ov_rand.append(o2)
        norms.append(nrm)
        outer.append(frac)
        rows.append((t, o1.real, o1.imag, abs(o1), o2.real, o2.imag, abs(o2), nrm, frac))

    directory, csv_path, json_path = _out_paths(cfg, out_dir)
    write_csv(csv_path, ["t", "shift_re", "shift_im", "shift_abs",
                         "rand_re", "rand_im", "rand_abs",
                         "waveop_norm", "outer_mass"], rows)

    summary = _base_summary(cfg)
    summary.update({
        "probe_shift": PROBE_SHIFT,
        "shift_abs_first": abs(ov_shift[0]),
        "shift_abs_last": abs(ov_shift[-1]),
        "shift_decay_factor": abs(ov_shift[0]) / max(abs(ov_shift[-1]), 1e-300),
        "rand_abs_first": abs(ov_rand[0]),
        "rand_abs_last": abs(ov_rand[-1]),
        "rand_decay_factor": abs(ov_rand[0]) / max(abs(ov_rand[-1]), 1e-300),
        "norm_max_deviation": float(np.max(np.abs(np.array(norms) - phi.norm()))),
        "files": {"csv": os.path.basename(csv_path)},
    })
    write_summary(json_path, summary)
    summary["paths"] = {"csv": csv_path, "json": json_path}
    return summary


def run_cook(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    params = cfg.physics()
    grid = cfg.grid()
    schedule = cfg.schedule()
    phi = cfg.packet(grid, params)

    integrand, cumulative = cook_kuroda_series(phi, schedule, params)
    times = integrand.times

    directory, csv_path, json_path = _out_paths(cfg, out_dir)
    write_csv(csv_path, ["t", "integrand", "cumulative"],
              list(zip(times, integrand.values, cumulative.values)))

    total = float(cumulative.values[-1])
    half_idx = int(np.argmin(np.abs(times - 0.5 * times[-1])))
    tail = total - float(cumulative.values[half_idx])
    summary = _base_summary(cfg)
    summary.update({
        "integrand": _series_stats(integrand),
        "cumulative_total": total,
        "tail_octave_window": [float(times[half_idx]), float(times[-1])],
        "tail_octave_fraction": tail / total if total > 0 else 0.0,
        "files": {"csv": os.path.basename(csv_path)},
    })
    write_summary(json_path, summary)
    summary["paths"] = {"csv": csv_path, "json": json_path}
    return summary


def run_modifier_rl(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    params = cfg.physics()
    grid = cfg.grid()
    schedule = cfg.schedule()
    phi = cfg.packet(grid, params)

    times = schedule.diagnostic_times
    overlaps = modifier_overlap_series(phi, phi, times, params)
    xi_top = float(np.linalg.norm(cfg.xi_center)) + PROBE_BAND_SIGMAS * cfg.xi_width
    spans = np.array([modifier_phase_span(t, params, params.epsilon, xi_top)
                      for t in times])

    directory, csv_path, json_path = _out_paths(cfg, out_dir)
    write_csv(csv_path, ["t", "overlap_re", "overlap_im", "overlap_abs", "phase_span"],
              [(t, o.real, o.imag, abs(o), s)
               for t, o, s in zip(times, overlaps, spans)])

    mods = np.abs(overlaps)
    below = np.nonzero(mods < 0.2)[0]
    summary = _base_summary(cfg)
    summary.update({
        "initial_abs": float(mods[0]),
        "min_abs": float(np.min(mods)),
        "max_abs": float(np.max(mods)),
        "first_time_below_0.2": float(times[below[0]]) if below.size else None,
        "span_band": [params.epsilon, xi_top],
        "final_phase_span": float(spans[-1]),
        "files": {"csv": os.path.basename(csv_path)},
    })
    write_summary(json_path, summary)
    summary["paths"] = {"csv": csv_path, "json": json_path}
    return summary


def run_sweep(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    grid = cfg.grid()
    schedule = cfg.schedule()
    directory, _, json_path = _out_paths(cfg, out_dir)
    digest = params_hash(cfg)

    floors: dict[float, DecaySeries] = {}
    table = []
    files = {}
    for params in cfg.combos():
        phi = build_wavepacket(grid, params, np.array(cfg.xi_center), cfg.xi_width)
        tag = f"rho{params.rho:g}_gamma{params.gamma:g}_lambda{params.lam:g}"
        log.info("sweep combo %s", tag)
        unmod = defect_pair_series(phi, schedule, params, modified=False)
        mod = defect_pair_series(phi, schedule, params, modified=True)
        if params.rho not in floors:
            floors[params.rho] = defect_pair_series(
                phi, schedule, _zero_coupling(params), modified=False)
        floor = floors[params.rho]
        for label, series in (("unmod", unmod), ("mod", mod)):
            path = os.path.join(directory, f"sweep_{digest}_{tag}_{label}.csv")
            write_csv(path, ["t1", "t2", "defect"],
                      [(t, 2.0 * t, d) for t, d in zip(series.times, series.values)])
            files[f"{tag}_{label}"] = os.path.basename(path)
        table.append({
            "rho": params.rho,
            "gamma": params.gamma,
            "lambda": params.lam,
            "unmodified_slope": unmod.fitted_slope,
            "modified_slope": mod.fitted_slope,
            "unmodified_last": float(unmod.values[-1]),
            "modified_last": float(mod.values[-1]),
            "modified_over_unmodified_last": float(mod.values[-1] / unmod.values[-1])
            if unmod.values[-1] > 0 else None,
            "floor_max": float(np.max(floor.values)),
        })

    summary = _base_summary(cfg)
    summary.update({"table": table, "files": files})
    write_summary(json_path, summary)
    summary["paths"] = {"json": json_path}
    return summary


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Dispatch a validated config to its runner; returns the summary dict."""
    if cfg.kind in ("cauchy", "dollard_cauchy"):
        return run_defect(cfg, out_dir)
    if cfg.kind == "weaklimit":
        return run_weaklimit(cfg, out_dir)
    if cfg.kind == "cook":
        return run_cook(cfg, out_dir)
    if cfg.kind == "modifier_rl":
        return run_modifier_rl(cfg, out_dir)
    if cfg.kind == "sweep":
        return run_sweep(cfg, out_dir)
    if cfg.kind == "selftest":
        return run_selftest(cfg, out_dir)
    raise ValueError(f"unhandled kind {cfg.kind!r}")


# ---------------------------------------------------------------------------
# selftest battery

def _selftest_checks() -> list[tuple[str, float, float]]:
    """Run the invariant battery on small grids.

    Returns (name, measured, threshold) triples; a check passes when
    measured <= threshold.
    """
    from .diagnostics import cauchy_defect
    from .grid import make_grid, to_frequency, to_position
    from .propagate import full_propagate, geometric_schedule, wave_operator_state
    from .symbols import (
        dollard_phase,
        phase_quadrature_oracle,
        r_phase_grid,
        r_symbol_phase,
        t_factor,
    )

    checks: list[tuple[str, float, float]] = []
    rng = np.random.default_rng(1234)

    grid = make_grid(1, 256, 40.0)
    params = PhysicsParams(rho=0.75, gamma=1.0, lam=1.0, epsilon=0.5)

    # Transform round trip and Parseval on a random field.
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    f = WaveField(grid, vals, POSITION)
    g = to_frequency(f)
    back = to_position(g)
    checks.append(("transform_round_trip",
                   float(np.max(np.abs(back.values - f.values))) /
                   float(np.max(np.abs(f.values))), 1e-12))
    checks.append(("transform_unitarity", abs(g.norm() - f.norm()) / f.norm(), 1e-12))

    # Wavepacket support and normalization.
    phi = build_wavepacket(grid, params, 1.0, 0.1)
    below = grid.xi_mag < params.epsilon
    checks.append(("packet_support_zero", float(np.max(np.abs(phi.values[below]))), 0.0))
    checks.append(("packet_unit_norm", abs(phi.norm() - 1.0), 1e-12))

    # Closed-form phases against the quadrature oracle.
    worst = 0.0
    for _ in range(100):
        p = PhysicsParams(rho=rng.uniform(0.5, 1.0),
                          gamma=rng.choice([rng.uniform(0.05, 1.0), 1.0,
                                            rng.uniform(1.0, 2.5)]),
                          lam=rng.uniform(-3, 3),
                          epsilon=rng.uniform(0.1, 1.0))
        xi = rng.uniform(0.05, 5.0)
        t = rng.uniform(0.0, 1000.0)
        closed = dollard_phase(t, xi, p).phase
        oracle = phase_quadrature_oracle(t, xi, p)
        worst = max(worst, abs(closed - oracle) / (1.0 + abs(oracle)))
    checks.append(("phase_closed_form_vs_quadrature", worst, 1e-10))

    # Splice identity: Theta(t) = lam |xi|^(-gamma(2rho-1)) T(t) + R-phase.
    worst = 0.0
    for _ in range(200):
        p = PhysicsParams(rho=rng.uniform(0.5, 1.0),
                          gamma=rng.choice([rng.uniform(0.05, 1.0), 1.0,
                                            rng.uniform(1.0, 2.5)]),
                          lam=rng.uniform(-3, 3),
                          epsilon=rng.uniform(0.1, 1.0))
        xi = p.epsilon * rng.uniform(1.0, 8.0)
        t_split = p.epsilon ** (1.0 - 2.0 * p.rho)
        t = t_split * rng.uniform(1.0, 50.0)
        lhs = dollard_phase(t, xi, p).phase
        rhs = (p.lam * xi ** (-p.gamma * (2.0 * p.rho - 1.0)) * t_factor(t, p)
               + r_symbol_phase(xi, p))
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    checks.append(("phase_splice_identity", worst, 1e-12))

    # Free group law on a band-limited state.
    a = free_propagate(free_propagate(phi, 0.7, params), 1.6, params)
    b = free_propagate(phi, 2.3, params)
    checks.append(("free_group_law",
                   float(np.linalg.norm(a.values - b.values)), 1e-12))

    # Modifier factorization and unitarity.
    m = apply_modifier(phi, 7.0, params)
    t_fac = t_factor(7.0, params)
    with np.errstate(divide="ignore"):
        sigma = grid.xi_mag ** (-params.gamma * (2.0 * params.rho - 1.0))
    sigma = np.where(grid.xi_mag == 0.0, 0.0, sigma)
    composed = (np.exp(-1j * params.lam * t_fac * sigma)
                * np.exp(-1j * r_phase_grid(grid.xi_mag, params)) * phi.values)
    composed = np.where(grid.xi_mag == 0.0, phi.values, composed)
    checks.append(("modifier_factorization",
                   float(np.max(np.abs(m.values - composed))), 1e-12))
    undone = apply_modifier(m, 7.0, params, conjugate=True)
    checks.append(("modifier_unitary",
                   float(np.max(np.abs(undone.values - phi.values))), 1e-12))

    # Split-step: collapse at lam = 0 and backward-forward identity.
    sched = geometric_schedule(0.05, 1.0, 2.0, 4.0)
    free_params = _zero_coupling(params)
    split = full_propagate(phi, 2.0, sched, free_params)
    exact = free_propagate(phi, 2.0, free_params)
    checks.append(("split_equals_free_at_zero_coupling",
                   float(np.linalg.norm(split.values - exact.values)), 1e-12))
    there = full_propagate(phi, 2.0, sched, params)
    back2 = full_propagate(there, -2.0, sched, params)
    checks.append(("backward_forward_identity",
                   float(np.linalg.norm(back2.values - phi.values)), 1e-12))

    # Unitarity drift over 2000 split steps.
    stepper = StrangStepper(grid, params, 0.05)
    pos = as_position(phi)
    vals2 = stepper.run(pos.values, 2000)
    drift = abs(float(np.linalg.norm(vals2.ravel())) * np.sqrt(grid.position_weight())
                - phi.norm())
    checks.append(("unitarity_drift_2000_steps", drift, 1e-11))

    # Wave operator basics: t = 0 identity and norm preservation.
    w0 = wave_operator_state(phi, 0.0, sched, params)
    checks.append(("waveop_identity_at_t0",
                   float(np.linalg.norm(w0.values - phi.values)), 1e-12))
    w = wave_operator_state(phi, 3.0, sched, params)
    checks.append(("waveop_norm_preserved", abs(w.norm() - phi.norm()), 1e-10))

    # Engine defect equals compositional defect.
    small_sched = geometric_schedule(0.05, 1.0, 2.0, 8.0)
    series = defect_pair_series(phi, small_sched, params, check_wrap=False)
    direct = cauchy_defect(phi, float(series.times[0]), 2.0 * float(series.times[0]),
                           small_sched, params)
    checks.append(("engine_matches_composed_defect",
                   abs(float(series.values[0]) - direct), 1e-10))

    # Degeneracy: at rho = 1/2 the modifier overlap has constant modulus.
    p_half = PhysicsParams(rho=0.5, gamma=1.0, lam=1.0, epsilon=0.5)
    base = abs(modifier_overlap(phi, phi, 0.0, p_half))
    dev = max(abs(abs(modifier_overlap(phi, phi, t, p_half)) - base)
              for t in (2.0, 10.0, 100.0, 1000.0))
    checks.append(("rho_half_scalar_modifier", dev, 1e-12))

    return checks


def run_selftest(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    checks = _selftest_checks()
    results = [
        {"name": name, "measured": measured, "threshold": threshold,
         "passed": bool(measured <= threshold)}
        for name, measured, threshold in checks
    ]
    ok = all(r["passed"] for r in results)

    directory, csv_path, json_path = _out_paths(cfg, out_dir)
    write_csv(csv_path, ["check", "measured", "threshold", "passed"],
              [(r["name"], r["measured"], r["threshold"], int(r["passed"]))
               for r in results])
    summary = _base_summary(cfg)
    summary.update({"checks": results, "all_passed": ok,
                    "files": {"csv": os.path.basename(csv_path)}})
    write_summary(json_path, summary)
    summary["paths"] = {"csv": csv_path, "json": json_path}
    if not ok:
        failed = ", ".join(r["name"] for r in results if not r["passed"])
        raise ValidationError(f"selftest failures: {failed}")
    return summary
