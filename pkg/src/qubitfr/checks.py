"""End-to-end numeric acceptance checks, shared by the CLI and the tests.

Each check returns a ``CheckResult`` with the measured numbers in its
detail string, so a failing run documents how far off it was.  Checks
never loosen their own tolerances: a bound that cannot be met fails
loudly and states the best achievable value.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import montecarlo, oracle, protocol, scenarios
from .channel import PulseChannelParams, apply_pulse_map
from .core import (AmplitudeModulatedDrive, QubitState, ThermalContext,
                   bloch_rotation, free_energy_delta, gibbs_population)

# Empirical recursion-vs-propagation bounds for the three rotating-drive
# presets (max absolute population gap over 50 pulses, basis starts).
# Measured once on the preset parameters and frozen.  The projective
# reading differs from the full affine map only through the coherences
# that survive between pulses (measured maxima 0.011 / 0.006 / 0.053);
# the default reading also misses the contraction rate (0.12 / 0.26 /
# 0.42).
RECURSION_GAP_BOUND_DEFAULT = 0.45
RECURSION_GAP_BOUND_PROJECTIVE = 0.06


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.detail}"


def check_closed_cycle_fr() -> CheckResult:
    """<exp(-beta dE)> must equal Z(t_f)/Z(0) on the fixed-axis presets."""
    start = time.perf_counter()
    worst = 0.0
    for name in ("fig4a", "fig4b"):
        res = scenarios.resolve(scenarios.get_preset(name))
        for t_f in res.config.t_f_grid:
            report = protocol.fr_report(res.protocol_at(t_f))
            worst = max(worst, report.deviation)
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-9 and elapsed < 1.0
    return CheckResult("closed-cycle fluctuation identity", passed,
                       f"max |value - Z ratio| = {worst:.3e} (tol 1e-9), "
                       f"{elapsed:.2f} s")


def check_exchange_fr() -> CheckResult:
    """<exp(-(beta - beta_r) dE)> stays near 1 on the rotating presets.

    The sweep uses beta_r from the channel fixed point.  The one-pulse
    clause is exact only against the one-period transition matrix's own
    stationary weight, so that variant is what the 1e-10 bound tests;
    the channel-fixed-point deviation at one pulse is reported next to
    it rather than hidden.
    """
    start = time.perf_counter()
    worst_sweep = 0.0
    worst_one_pulse = 0.0
    worst_one_pulse_channel = 0.0
    for name in ("fig6d", "fig6e", "fig6f"):
        res = scenarios.resolve(scenarios.get_preset(name))
        for n in range(21):
            report = protocol.fr_report(res.protocol_at(n * res.config.tau))
            worst_sweep = max(worst_sweep, abs(report.fr_value - 1.0))
        pc1 = res.protocol_at(res.config.tau)
        cm1 = protocol.conditional_matrix(pc1)
        report_channel = protocol.fr_report(pc1, cm=cm1)
        worst_one_pulse_channel = max(worst_one_pulse_channel,
                                      abs(report_channel.fr_value - 1.0))
        beta_r1 = protocol.beta_reservoir(protocol.conditional_fixed_point(cm1),
                                          res.drive.gap)
        gamma1 = res.thermal.beta - beta_r1
        value1 = protocol.fr_functional(
            protocol.energy_change_distribution(cm1, pc1), gamma1)
        worst_one_pulse = max(worst_one_pulse, abs(value1 - 1.0))
    elapsed = time.perf_counter() - start
    passed = worst_sweep <= 0.02 and worst_one_pulse <= 1e-10 and elapsed < 1.0
    return CheckResult(
        "exchange fluctuation identity", passed,
        f"max |value - 1| = {worst_sweep:.3e} over n <= 20 (tol 0.02); "
        f"one pulse {worst_one_pulse:.3e} (tol 1e-10) vs map stationary "
        f"weight, {worst_one_pulse_channel:.3e} vs channel fixed point; "
        f"{elapsed:.2f} s")


def check_asymptote_anchors() -> CheckResult:
    """Inverted channels must reach the published plateaus by 50 pulses.

    The tightest target (0.050 at the fastest drive rotation) cannot:
    the one-period map's slow eigenvalue stays above 0.94 for every
    admissible absorption probability, leaving the 50-pulse transient
    an order of magnitude above the 0.005 window.  The check reports
    that deviation rather than widening the window.
    """
    failures = []
    details = []
    for name, target in (("fig5b", 0.276), ("fig5c", 0.138), ("fig5d", 0.050)):
        res = scenarios.resolve(scenarios.get_preset(name))
        cm = protocol.conditional_matrix(res.protocol_at(50 * res.config.tau))
        dev = max(abs(cm.p_up_given_up - target), abs(cm.p_up_given_down - target))
        beta_r_gap = res.derived["beta_r_gap"]
        ratio_dev = abs(beta_r_gap - math.log((1.0 - target) / target))
        ok = dev <= 0.005 and ratio_dev <= 1e-6
        if not ok:
            failures.append(name)
        details.append(f"{name}: plateau dev {dev:.3e}, "
                       f"temperature-ratio dev {ratio_dev:.1e}")
    passed = not failures
    return CheckResult("asymptote anchors", passed,
                       "; ".join(details) + " (tol 0.005 / 1e-6)")


def check_first_law() -> CheckResult:
    worst = 0.0
    worst_strobo_w = 0.0
    for name in ("fig3a", "fig3b"):
        res = scenarios.resolve(scenarios.get_preset(name))
        w0 = res.config.omega0
        for t_f in res.config.t_f_grid:
            pc = res.protocol_at(t_f)
            dist = protocol.energy_change_distribution(
                protocol.conditional_matrix(pc), pc)
            series = oracle.work_heat_series_amplitude(pc, t_f)
            residual = protocol.first_law_check(dist, series.mean_w, series.mean_q)
            worst = max(worst, abs(residual) / w0)
        if res.config.tau == res.drive.tau_a:
            for n in range(13):
                series = oracle.work_heat_series_amplitude(
                    res.protocol_at(n * res.config.tau), n * res.config.tau)
                worst_strobo_w = max(worst_strobo_w, abs(series.mean_w) / w0)
    passed = worst <= 1e-9 and worst_strobo_w <= 1e-12
    return CheckResult("first law", passed,
                       f"max |dE - (W+Q)| = {worst:.3e} omega0 (tol 1e-9); "
                       f"max |W| at whole periods = {worst_strobo_w:.1e} omega0")


def check_oracle_equivalence() -> CheckResult:
    """Closed forms against step-by-step map propagation.

    Fixed-axis family on a 10 x 10 x 50 grid of (p_absorb, tau/tau_a, n):
    populations, work and heat all to 1e-10.  Rotating family: the
    recursion gap is measured for the three presets and held to the
    frozen empirical bounds for both k readings.
    """
    drive = AmplitudeModulatedDrive(scenarios.AMPLITUDE_OMEGA0,
                                    scenarios.AMPLITUDE_TAU_A)
    beta = 2.0 / drive.omega0
    thermal = ThermalContext(beta)
    p0 = gibbs_population(beta, drive, 0.0)
    worst_amp = 0.0
    for pa in np.linspace(0.05, 0.95, 10):
        params = PulseChannelParams(float(pa), 0.0)
        for ratio in np.linspace(0.1, 1.3, 10):
            tau = float(ratio) * drive.tau_a
            pc = protocol.ProtocolConfig(drive, params, tau, 50, thermal)
            rots = [bloch_rotation(drive, (n - 1) * tau, n * tau)
                    for n in range(1, 51)]
            r = np.array([2.0 * p0 - 1.0, 0.0, 0.0])
            energy = 0.5 * drive.omega(0.0) * r[0]
            work = heat = 0.0
            series = oracle.work_heat_series_amplitude(pc, 50 * tau)
            for n in range(1, 51):
                e_before = 0.5 * drive.omega(n * tau) * r[0]
                work += e_before - energy
                r = apply_pulse_map(QubitState.from_array(rots[n - 1] @ r),
                                    params).as_array()
                energy = 0.5 * drive.omega(n * tau) * r[0]
                heat += energy - e_before
                pop = 0.5 * (1.0 + r[0])
                worst_amp = max(worst_amp, abs(
                    pop - oracle.population_after_n_pulses(p0, float(pa), n)))
            worst_amp = max(worst_amp,
                            abs(work - series.mean_w) / drive.omega0,
                            abs(heat - series.mean_q) / drive.omega0)

    gap_default = gap_projective = 0.0
    per_preset = []
    for name in ("fig5b", "fig5c", "fig5d"):
        res = scenarios.resolve(scenarios.get_preset(name))
        pc = res.protocol_at(50 * res.config.tau)
        gd = float(oracle.floquet_recursion_gap(pc, 50).max())
        kp = oracle.k_factor_projective(res.channel.p_pump, res.drive.alpha)
        gp = float(oracle.floquet_recursion_gap(pc, 50, k=kp).max())
        gap_default = max(gap_default, gd)
        gap_projective = max(gap_projective, gp)
        per_preset.append(f"{name} {gd:.3f}/{gp:.4f}")
    passed = (worst_amp <= 1e-10
              and gap_default <= RECURSION_GAP_BOUND_DEFAULT
              and gap_projective <= RECURSION_GAP_BOUND_PROJECTIVE)
    return CheckResult(
        "oracle equivalence", passed,
        f"fixed-axis worst dev {worst_amp:.3e} (tol 1e-10); rotating "
        f"recursion gap default/projective: {'; '.join(per_preset)} "
        f"(bounds {RECURSION_GAP_BOUND_DEFAULT}/{RECURSION_GAP_BOUND_PROJECTIVE})")


def check_rabi_oscillation() -> CheckResult:
    res = scenarios.resolve(scenarios.get_preset("fig5a"))
    worst = 0.0
    for t_f in res.config.t_f_grid:
        cm = protocol.conditional_matrix(res.protocol_at(t_f))
        closed = oracle.rabi_conditional(res.config.omega0, res.config.theta, t_f)
        worst = max(worst, abs(cm.p_up_given_up - closed),
                    abs(cm.p_up_given_down - (1.0 - closed)))
    passed = worst <= 1e-9
    return CheckResult("dressed-state oscillation", passed,
                       f"max closed-form deviation {worst:.3e} over "
                       f"{len(res.config.t_f_grid)} points (tol 1e-9)")


def check_monte_carlo(n_trajectories: int = 100_000) -> CheckResult:
    """Estimates vs exact maps at 4 binomial sigma, plus worker invariance."""
    worst_sigma = 0.0
    worst_name = ""
    slowest = 0.0
    for name in scenarios.PRESETS:
        start = time.perf_counter()
        res = scenarios.resolve(scenarios.get_preset(name))
        pc = res.protocol_at(res.config.t_f_grid[-1])
        stats = montecarlo.run_ensemble(pc, n_trajectories,
                                        res.config.master_seed)
        exact = protocol.conditional_matrix(pc)
        est = stats.conditional_estimate()
        err = stats.std_err()
        for i in (0, 1):
            diff = abs(est.matrix[0, i] - exact.matrix[0, i])
            sigma = err[0, i]
            pulls = 0.0 if diff == 0.0 else (math.inf if sigma == 0.0
                                             else diff / sigma)
            if pulls > worst_sigma:
                worst_sigma, worst_name = pulls, name
        slowest = max(slowest, time.perf_counter() - start)

    res = scenarios.resolve(scenarios.get_preset("fig6e"))
    pc = res.protocol_at(res.config.t_f_grid[-1])
    serial = montecarlo.run_ensemble(pc, 20_000, res.config.master_seed,
                                     workers=1)
    threaded = montecarlo.run_ensemble(pc, 20_000, res.config.master_seed,
                                       workers=4)
    identical = serial.to_dict() == threaded.to_dict()
    passed = worst_sigma <= 4.0 and identical and slowest < 30.0
    return CheckResult(
        "monte carlo consistency", passed,
        f"worst pull {worst_sigma:.2f} sigma ({worst_name}, tol 4); "
        f"1 vs 4 workers identical: {identical}; slowest preset "
        f"{slowest:.1f} s (tol 30)")


def check_inequalities() -> CheckResult:
    """Jensen bound <dE> >= dF with a cold start, and w_irr >= 0."""
    worst_jensen = math.inf
    for name in ("fig3a", "fig3b"):
        res = scenarios.resolve(scenarios.get_preset(name))
        w0 = res.config.omega0
        for t_f in np.linspace(0.0, 12 * res.config.tau, 100)[1:]:
            pc = res.protocol_at(float(t_f))
            dist = protocol.energy_change_distribution(
                protocol.conditional_matrix(pc), pc)
            df = free_energy_delta(res.config.beta, res.drive, float(t_f))
            worst_jensen = min(worst_jensen, (dist.mean() - df) / w0)

    drive = AmplitudeModulatedDrive(scenarios.AMPLITUDE_OMEGA0,
                                    scenarios.AMPLITUDE_TAU_A)
    beta = 2.0 / drive.omega0
    worst_wirr = math.inf
    worst_cross = 0.0
    for t_f in np.linspace(0.0, drive.tau_a, 102)[1:-1]:
        value = oracle.w_irr(beta, drive, float(t_f))
        worst_wirr = min(worst_wirr, value / drive.omega0)
        entropic = oracle.irreversible_work_relative_entropy(
            beta, drive, float(t_f))
        worst_cross = max(worst_cross, abs(value - entropic) / drive.omega0)
    passed = (worst_jensen >= -1e-12 and worst_wirr >= -1e-12
              and worst_cross <= 1e-10)
    return CheckResult(
        "inequality suite", passed,
        f"min (<dE> - dF) = {worst_jensen:.3e} omega0, min w_irr = "
        f"{worst_wirr:.3e} omega0 (tol -1e-12); relative-entropy "
        f"cross-check dev {worst_cross:.1e}")


ALL_CHECKS = (
    check_closed_cycle_fr,
    check_exchange_fr,
    check_asymptote_anchors,
    check_first_law,
    check_oracle_equivalence,
    check_rabi_oscillation,
    check_monte_carlo,
    check_inequalities,
)


def run_all(include_mc: bool = True) -> list[CheckResult]:
    results = []
    for check in ALL_CHECKS:
        if not include_mc and check is check_monte_carlo:
            continue
        results.append(check())
    return results
