"""Named parameter sets and the batch runner that turns them into files.

A ``ScenarioConfig`` is a flat, JSON-serializable description of one run:
drive family and numbers, channel probabilities (a pump value or a target
asymptotic population to invert for), the final-time grid, temperatures,
and Monte-Carlo settings.  ``run_scenario`` resolves it (inversion,
reservoir temperature), writes one CSV of results plus a JSON manifest,
and the manifest can be fed back to ``run_scenario`` to reproduce the CSV
byte for byte in deterministic mode.

Output conventions: energies in the CSV are divided by the drive's
omega0, probabilities are dimensionless, times are in ns.  Floats are
written with ``repr`` so files are stable and round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, fields, replace
from importlib import metadata
from pathlib import Path

import numpy as np

from . import channel as channel_mod
from . import montecarlo, oracle, protocol
from .channel import PulseChannelParams
from .core import (AmplitudeModulatedDrive, DriveSpec, PhaseRotatingDrive,
                   ThermalContext, evolve_unitary, free_energy_delta,
                   gibbs_population, instantaneous_eigensystem)


class ConfigError(Exception):
    """Scenario description is invalid; maps to exit code 2."""


class NumericalContractError(Exception):
    """A numeric invariant failed while computing; maps to exit code 3."""


KINDS = ("conditional", "bloch", "energetics", "fr", "rabi")
MODES = ("deterministic", "montecarlo", "both")
FAMILIES = ("amplitude", "phase")

AMPLITUDE_TAU_A = 616.0
AMPLITUDE_OMEGA0 = math.pi / AMPLITUDE_TAU_A
# 800 kHz bare Rabi rate, expressed in rad/ns.
PHASE_OMEGA0 = 2.0 * math.pi * 0.8e-3

DEFAULT_MASTER_SEED = 20260814
DEFAULT_TRAJECTORIES = 100_000
OUTDIR_ENV = "QUBITFR_OUTDIR"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    kind: str
    drive_family: str
    omega0: float
    tau: float
    t_f_grid: tuple[float, ...]
    beta: float
    p_absorb: float
    tau_a: float | None = None
    theta: float | None = None
    p_pump: float | None = None
    target_upper_population: float | None = None
    mode: str = "deterministic"
    n_trajectories: int = DEFAULT_TRAJECTORIES
    master_seed: int = DEFAULT_MASTER_SEED
    mc_grid: str = "final"
    workers: int = 1
    prefix: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("scenario name must be nonempty")
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; choose from {KINDS}")
        if self.drive_family not in FAMILIES:
            raise ConfigError(f"unknown drive family {self.drive_family!r}")
        if self.drive_family == "amplitude" and not self.tau_a:
            raise ConfigError("amplitude drives need tau_a")
        if self.drive_family == "phase" and not self.theta:
            raise ConfigError("phase drives need theta")
        if not (0.0 <= self.p_absorb <= 1.0):
            raise ConfigError(f"p_absorb must be in [0, 1], got {self.p_absorb}")
        if self.p_pump is None and self.target_upper_population is None:
            raise ConfigError("give p_pump or a target asymptotic population")
        if self.p_pump is not None and not (0.0 <= self.p_pump <= 1.0):
            raise ConfigError(f"p_pump must be in [0, 1], got {self.p_pump}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.mc_grid not in ("final", "all"):
            raise ConfigError(f"mc_grid must be 'final' or 'all', got {self.mc_grid}")
        if self.kind == "bloch" and self.mode != "deterministic":
            raise ConfigError("bloch scenarios have no stochastic estimator")
        grid = tuple(float(t) for t in self.t_f_grid)
        if not grid or any(t < 0 for t in grid) or list(grid) != sorted(grid):
            raise ConfigError("t_f_grid must be a nonempty ascending list of "
                              "nonnegative times")
        object.__setattr__(self, "t_f_grid", grid)
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.n_trajectories < 1:
            raise ConfigError("n_trajectories must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            data = dict(data)
            if "t_f_grid" in data:
                data["t_f_grid"] = tuple(data["t_f_grid"])
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ResolvedScenario:
    """Scenario with every derived quantity pinned to numbers."""

    config: ScenarioConfig
    drive: DriveSpec
    channel: PulseChannelParams
    thermal: ThermalContext
    derived: dict

    def protocol_at(self, t_f: float,
                    n_pulses: int | None = None) -> protocol.ProtocolConfig:
        if n_pulses is None:
            n_pulses = 0 if self.config.kind == "rabi" else protocol.pulses_applied(
                t_f, self.config.tau)
        return protocol.ProtocolConfig(self.drive, self.channel, self.config.tau,
                                       n_pulses, self.thermal, t_f=t_f)


def build_drive(config: ScenarioConfig) -> DriveSpec:
    if config.drive_family == "amplitude":
        return AmplitudeModulatedDrive(config.omega0, config.tau_a)
    return PhaseRotatingDrive(config.omega0, config.theta)


def resolve(config: ScenarioConfig) -> ResolvedScenario:
    """Fill in the pump probability and reservoir temperature.

    Inversion targets the exact channel fixed point; the closed-form
    inversions are reported alongside in the derived block for
    comparison, never used to set parameters.
    """
    drive = build_drive(config)
    derived: dict = {"energy_unit": "hbar_omega0", "omega0_rad_per_ns": config.omega0}

    p_pump = config.p_pump
    if p_pump is None:
        target = config.target_upper_population
        if not (0.0 < target < 1.0):
            raise ConfigError(f"target population must lie in (0, 1), got {target}")
        if config.p_absorb == 0.0:
            raise ConfigError("cannot invert the pump with p_absorb = 0")
        if config.drive_family != "phase":
            raise ConfigError("pump inversion targets the rotating-drive "
                              "asymptote; amplitude scenarios must give p_pump")
        try:
            p_pump = channel_mod.invert_pump_probability(
                drive, config.p_absorb, config.tau, target)
        except ValueError as exc:
            raise ConfigError(f"pump inversion failed: {exc}") from exc
        if not (0.0 <= p_pump <= 1.0):
            raise ConfigError(f"inverted p_pump = {p_pump} outside [0, 1]")
        derived["p_up_infinity_target"] = target

    params = PulseChannelParams(config.p_absorb, p_pump)
    derived["p_pump"] = p_pump

    beta_r = 0.0
    if isinstance(drive, PhaseRotatingDrive):
        derived["tau_theta_ns"] = drive.tau_theta
        derived["alpha_rad"] = drive.alpha
        derived["alpha_deg_abs"] = abs(math.degrees(drive.alpha))
        derived["e_theta"] = drive.e_theta / config.omega0
        derived["gap"] = drive.gap / config.omega0
        derived["k_factor"] = oracle.k_factor(p_pump, drive.alpha)
        derived["k_factor_projective"] = oracle.k_factor_projective(
            p_pump, drive.alpha)
        if config.target_upper_population is not None:
            derived["p_pump_closed_form"] = oracle.invert_pump_closed_form(
                config.target_upper_population, drive.alpha)
            derived["p_pump_closed_form_projective"] = oracle.invert_pump_closed_form(
                config.target_upper_population, drive.alpha, projective=True)
        if config.p_absorb > 0.0:
            p_inf = channel_mod.stationary_upper_population(
                drive, params, config.tau)
            beta_r = protocol.beta_reservoir(p_inf, drive.gap)
            derived["p_up_infinity"] = p_inf
            derived["beta_r_gap"] = beta_r * drive.gap
            if config.target_upper_population is not None:
                derived["asymptote_gap_to_target"] = abs(
                    p_inf - config.target_upper_population)
    else:
        derived["tau_a_ns"] = drive.tau_a

    thermal = ThermalContext(config.beta, beta_r)
    derived["beta_omega0"] = config.beta * config.omega0
    derived["beta_r_omega0"] = beta_r * config.omega0
    derived["gamma_omega0"] = (config.beta - beta_r) * config.omega0
    derived["initial_upper_population"] = gibbs_population(config.beta, drive, 0.0)
    return ResolvedScenario(config, drive, params, thermal, derived)


# ---------------------------------------------------------------------------
# presets


def _phase_theta(tau_theta: float) -> float:
    return 2.0 * math.pi / tau_theta


def _strobo_grid(tau: float, n_max: int) -> tuple[float, ...]:
    return tuple(n * tau for n in range(n_max + 1))


def _dense_grid(tau: float, n_max: int, per_interval: int = 8) -> tuple[float, ...]:
    return tuple(np.linspace(0.0, n_max * tau, per_interval * n_max + 1))


def _amplitude_preset(name: str, kind: str, tau: float,
                      grid: tuple[float, ...]) -> ScenarioConfig:
    return ScenarioConfig(
        name=name, kind=kind, drive_family="amplitude",
        omega0=AMPLITUDE_OMEGA0, tau_a=AMPLITUDE_TAU_A, tau=tau,
        t_f_grid=grid, beta=2.0 / AMPLITUDE_OMEGA0, p_absorb=0.25, p_pump=0.0)


def _phase_preset(name: str, kind: str, tau_theta: float, target: float,
                  initial_up: float | None, n_max: int) -> ScenarioConfig:
    theta = _phase_theta(tau_theta)
    gap = math.hypot(PHASE_OMEGA0, theta)
    beta = 0.0 if initial_up is None else protocol.beta_reservoir(initial_up, gap)
    return ScenarioConfig(
        name=name, kind=kind, drive_family="phase",
        omega0=PHASE_OMEGA0, theta=theta, tau=tau_theta,
        t_f_grid=_strobo_grid(tau_theta, n_max), beta=beta,
        p_absorb=0.25, target_upper_population=target)


def _build_presets() -> dict[str, ScenarioConfig]:
    presets = {
        "fig2a": _amplitude_preset("fig2a", "conditional", 410.0,
                                   _dense_grid(410.0, 12)),
        "fig2bcd": _amplitude_preset("fig2bcd", "bloch", 410.0,
                                     _strobo_grid(410.0, 12)),
        "fig3a": _amplitude_preset("fig3a", "energetics", 410.0,
                                   _dense_grid(410.0, 12)),
        "fig3b": _amplitude_preset("fig3b", "energetics", AMPLITUDE_TAU_A,
                                   _dense_grid(AMPLITUDE_TAU_A, 12)),
        "fig4a": _amplitude_preset("fig4a", "fr", 410.0,
                                   tuple(np.linspace(0.0, 12 * 410.0, 50))),
        "fig4b": _amplitude_preset("fig4b", "fr", AMPLITUDE_TAU_A,
                                   tuple(np.linspace(0.0, 12 * AMPLITUDE_TAU_A, 50))),
        # Pulse-free dressed-state oscillations; p_absorb 0 disables pulses.
        "fig5a": ScenarioConfig(
            name="fig5a", kind="rabi", drive_family="phase",
            omega0=PHASE_OMEGA0, theta=_phase_theta(616.0), tau=616.0,
            t_f_grid=tuple(np.linspace(0.0, 2.0 * 616.0, 200)), beta=0.0,
            p_absorb=0.0, p_pump=0.0),
        "fig5b": _phase_preset("fig5b", "conditional", 1296.0, 0.276, None, 50),
        "fig5c": _phase_preset("fig5c", "conditional", 616.0, 0.138, None, 50),
        "fig5d": _phase_preset("fig5d", "conditional", 308.0, 0.050, None, 50),
        "fig6a": _phase_preset("fig6a", "energetics", 1296.0, 0.276, 0.509, 20),
        "fig6b": _phase_preset("fig6b", "energetics", 616.0, 0.138, 0.303, 20),
        "fig6c": _phase_preset("fig6c", "energetics", 308.0, 0.050, 0.126, 20),
        "fig6d": _phase_preset("fig6d", "fr", 1296.0, 0.276, 0.509, 20),
        "fig6e": _phase_preset("fig6e", "fr", 616.0, 0.138, 0.303, 20),
        "fig6f": _phase_preset("fig6f", "fr", 308.0, 0.050, 0.126, 20),
    }
    return presets


PRESETS = _build_presets()


def get_preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; run the presets command "
                          "for the catalog") from None


def list_presets() -> list[str]:
    """Human-readable catalog, one line per preset."""
    lines = []
    for name, cfg in PRESETS.items():
        bits = [f"{name}: {cfg.kind}", f"family={cfg.drive_family}"]
        if cfg.drive_family == "phase":
            tau_theta = 2.0 * math.pi / cfg.theta
            alpha = abs(math.degrees(math.atan2(cfg.omega0, cfg.theta)))
            bits.append(f"tau_theta = {tau_theta:.0f} ns")
            bits.append(f"alpha = {alpha:.1f} deg")
            if cfg.target_upper_population is not None:
                bits.append(f"target P_up_inf = {cfg.target_upper_population}")
            if cfg.beta != 0.0:
                gap = math.hypot(cfg.omega0, cfg.theta)
                p0 = 1.0 / (1.0 + math.exp(cfg.beta * gap))
                bits.append(f"P_up(0) = {p0:.3f}")
        else:
            bits.append(f"tau = {cfg.tau:.0f} ns")
            bits.append(f"tau_a = {cfg.tau_a:.0f} ns")
            bits.append("beta = 2/omega0")
        bits.append(f"grid points = {len(cfg.t_f_grid)}")
        lines.append("  ".join(bits))
    return lines


# ---------------------------------------------------------------------------
# execution


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _mc_points(config: ScenarioConfig) -> list[int]:
    if config.mc_grid == "all":
        return list(range(len(config.t_f_grid)))
    return [len(config.t_f_grid) - 1]


def _conditional_rows(res: ResolvedScenario) -> tuple[list[str], list[list]]:
    cfg = res.config
    rabi = cfg.kind == "rabi"
    header = ["t_f_ns", "n_pulses", "mode", "p_up_given_up", "p_up_given_down",
              "err_up_given_up", "err_up_given_down"]
    if rabi:
        header.append("closed_form_p_up_given_up")
    rows = []
    if cfg.mode in ("deterministic", "both"):
        for t_f in cfg.t_f_grid:
            pc = res.protocol_at(t_f)
            cm = protocol.conditional_matrix(pc)
            row = [t_f, pc.n_pulses, "deterministic",
                   cm.p_up_given_up, cm.p_up_given_down, 0.0, 0.0]
            if rabi:
                row.append(oracle.rabi_conditional(cfg.omega0, cfg.theta, t_f))
            rows.append(row)
    if cfg.mode in ("montecarlo", "both"):
        for i in _mc_points(cfg):
            t_f = cfg.t_f_grid[i]
            pc = res.protocol_at(t_f)
            stats = montecarlo.run_ensemble(pc, cfg.n_trajectories,
                                            cfg.master_seed, workers=cfg.workers)
            est = stats.conditional_estimate()
            err = stats.std_err()
            row = [t_f, pc.n_pulses, "montecarlo",
                   est.p_up_given_up, est.p_up_given_down,
                   err[0, 0], err[0, 1]]
            if rabi:
                row.append(oracle.rabi_conditional(cfg.omega0, cfg.theta, t_f))
            rows.append(row)
    return header, rows


def _bloch_rows(res: ResolvedScenario) -> tuple[list[str], list[list]]:
    cfg = res.config
    header = ["t_f_ns", "n_pulses", "mode", "initial_state",
              "rx", "ry", "rz", "post_pulse"]
    t_max = cfg.t_f_grid[-1]
    pc = res.protocol_at(t_max)
    eig0 = instantaneous_eigensystem(res.drive, 0.0)
    rows = []
    for label, start in (("up", eig0.basis_plus), ("down", eig0.basis_minus)):
        snapshots = protocol.mean_trajectory(pc, start)
        for (t0, s0), (t1, _) in zip(snapshots, snapshots[1:]):
            for t in np.linspace(t0, t1, 17)[:-1]:
                s = evolve_unitary(s0, res.drive, t0, float(t))
                n = protocol.pulses_applied(t0, cfg.tau)
                rows.append([float(t), n, "deterministic", label,
                             s.rx, s.ry, s.rz, int(t == t0 and t0 > 0)])
        t_end, s_end = snapshots[-1]
        n_end = protocol.pulses_applied(t_end, cfg.tau)
        rows.append([t_end, n_end, "deterministic", label,
                     s_end.rx, s_end.ry, s_end.rz, int(t_end > 0)])
    return header, rows


def _energetics_rows(res: ResolvedScenario) -> tuple[list[str], list[list]]:
    if isinstance(res.drive, AmplitudeModulatedDrive):
        return _energetics_rows_amplitude(res)
    return _energetics_rows_phase(res)


def _energetics_rows_amplitude(res: ResolvedScenario) -> tuple[list[str], list[list]]:
    cfg = res.config
    w0 = cfg.omega0
    header = ["t_f_ns", "n_pulses", "mode", "mean_delta_e", "mean_work",
              "mean_heat", "work_plus_heat", "delta_f", "first_law_residual",
              "err_mean_delta_e"]
    rows = []

    def analytic(pc: protocol.ProtocolConfig, t_f: float):
        series = oracle.work_heat_series_amplitude(pc, t_f)
        df = free_energy_delta(cfg.beta, res.drive, t_f) if cfg.beta else 0.0
        return series, df

    if cfg.mode in ("deterministic", "both"):
        for t_f in cfg.t_f_grid:
            pc = res.protocol_at(t_f)
            dist = protocol.energy_change_distribution(
                protocol.conditional_matrix(pc), pc)
            series, df = analytic(pc, t_f)
            residual = protocol.first_law_check(dist, series.mean_w, series.mean_q)
            rows.append([t_f, pc.n_pulses, "deterministic",
                         dist.mean() / w0, series.mean_w / w0, series.mean_q / w0,
                         (series.mean_w + series.mean_q) / w0, df / w0,
                         residual / w0, 0.0])
    if cfg.mode in ("montecarlo", "both"):
        for i in _mc_points(cfg):
            t_f = cfg.t_f_grid[i]
            pc = res.protocol_at(t_f)
            stats = montecarlo.run_ensemble(pc, cfg.n_trajectories,
                                            cfg.master_seed, workers=cfg.workers)
            mean_de, err = montecarlo.mean_energy_mc(stats, pc)
            series, df = analytic(pc, t_f)
            rows.append([t_f, pc.n_pulses, "montecarlo",
                         mean_de / w0, series.mean_w / w0, series.mean_q / w0,
                         (series.mean_w + series.mean_q) / w0, df / w0,
                         (mean_de - series.mean_w - series.mean_q) / w0,
                         err / w0])
    return header, rows


def _energetics_rows_phase(res: ResolvedScenario) -> tuple[list[str], list[list]]:
    cfg = res.config
    w0 = cfg.omega0
    delta_beta = res.thermal.beta - res.thermal.beta_r
    header = ["t_f_ns", "n_pulses", "mode", "mean_delta_e", "mean_heat_recursion",
              "recursion_gap", "delta_beta_mean_delta_e",
              "delta_beta_mean_heat_recursion", "err_mean_delta_e"]
    rows = []
    if cfg.mode in ("deterministic", "both"):
        for t_f in cfg.t_f_grid:
            pc = res.protocol_at(t_f)
            dist = protocol.energy_change_distribution(
                protocol.conditional_matrix(pc), pc)
            heat = oracle.mean_heat_phase(pc)
            rows.append([t_f, pc.n_pulses, "deterministic",
                         dist.mean() / w0, heat / w0,
                         (dist.mean() - heat) / w0,
                         delta_beta * dist.mean(), delta_beta * heat, 0.0])
    if cfg.mode in ("montecarlo", "both"):
        for i in _mc_points(cfg):
            t_f = cfg.t_f_grid[i]
            pc = res.protocol_at(t_f)
            stats = montecarlo.run_ensemble(pc, cfg.n_trajectories,
                                            cfg.master_seed, workers=cfg.workers)
            mean_de, err = montecarlo.mean_energy_mc(stats, pc)
            heat = oracle.mean_heat_phase(pc)
            rows.append([t_f, pc.n_pulses, "montecarlo",
                         mean_de / w0, heat / w0, (mean_de - heat) / w0,
                         delta_beta * mean_de, delta_beta * heat, err / w0])
    return header, rows


def _fr_rows(res: ResolvedScenario) -> tuple[list[str], list[list]]:
    cfg = res.config
    gamma = res.thermal.beta - res.thermal.beta_r
    header = ["t_f_ns", "n_pulses", "mode", "gamma_omega0", "fr_value",
              "fr_target", "fr_deviation", "err_fr_value"]
    rows = []
    if cfg.mode in ("deterministic", "both"):
        for t_f in cfg.t_f_grid:
            pc = res.protocol_at(t_f)
            report = protocol.fr_report(pc)
            rows.append([t_f, pc.n_pulses, "deterministic",
                         gamma * cfg.omega0, report.fr_value,
                         report.fr_target, report.deviation, 0.0])
    if cfg.mode in ("montecarlo", "both"):
        for i in _mc_points(cfg):
            t_f = cfg.t_f_grid[i]
            pc = res.protocol_at(t_f)
            stats = montecarlo.run_ensemble(pc, cfg.n_trajectories,
                                            cfg.master_seed, workers=cfg.workers)
            report = montecarlo.fr_estimate_mc(stats, pc)
            rows.append([t_f, pc.n_pulses, "montecarlo",
                         gamma * cfg.omega0, report.fr_value,
                         report.fr_target, report.deviation, report.std_err])
    return header, rows


_ROW_BUILDERS = {
    "conditional": _conditional_rows,
    "rabi": _conditional_rows,
    "bloch": _bloch_rows,
    "energetics": _energetics_rows,
    "fr": _fr_rows,
}


def _package_versions() -> dict:
    versions = {}
    for pkg in ("qubitfr", "numpy", "scipy"):
        try:
            versions[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            versions[pkg] = "unknown"
    return versions


def run_scenario(config: ScenarioConfig | str | Path,
                 outdir: str | Path | None = None) -> dict:
    """Execute one scenario; returns the manifest that was written.

    ``config`` may be a ScenarioConfig, a preset name, or a path to a
    config/manifest JSON file.  Output directory resolution: explicit
    argument, then the QUBITFR_OUTDIR environment variable, then the
    current directory.
    """
    if isinstance(config, (str, Path)):
        config = (get_preset(str(config)) if str(config) in PRESETS
                  else load_config(config))
    resolved = resolve(config)

    if outdir is None:
        outdir = os.environ.get(OUTDIR_ENV, ".")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    try:
        header, rows = _ROW_BUILDERS[config.kind](resolved)
    except ConfigError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise NumericalContractError(str(exc)) from exc

    prefix = config.prefix or config.name
    csv_path = outdir / f"{prefix}.csv"
    _write_csv(csv_path, header, rows)

    manifest = {
        "scenario": config.name,
        "kind": config.kind,
        "mode": config.mode,
        "csv_files": [csv_path.name],
        "scenario_config": config.to_dict(),
        "derived": resolved.derived,
        "versions": _package_versions(),
    }
    manifest_path = outdir / f"{prefix}_manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest["manifest_path"] = str(manifest_path)
    manifest["csv_paths"] = [str(csv_path)]
    return manifest


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a scenario from a config file or a previously written manifest."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"top level of {path} must be an object")
    if "scenario_config" in data:
        data = data["scenario_config"]
    return ScenarioConfig.from_dict(data)


def with_overrides(config: ScenarioConfig, **overrides) -> ScenarioConfig:
    """Copy a scenario with some fields replaced; validation reruns."""
    try:
        return replace(config, **overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
