"""Two-point protocol tests: pulse counting, conditional matrices against
density-matrix propagation, energy-change distributions and functionals."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

import dmtools
from qubitfr.channel import PulseChannelParams
from qubitfr.core import (AmplitudeModulatedDrive, PhaseRotatingDrive,
                          QubitState, ThermalContext, gibbs_population,
                          instantaneous_eigensystem, partition_function)
from qubitfr.oracle import population_after_n_pulses
from qubitfr.protocol import (ConditionalMatrix, EnergyChangeDistribution,
                              FrReport, ProtocolConfig, beta_reservoir,
                              conditional_fixed_point, conditional_matrix,
                              energy_change_distribution, first_law_check,
                              fr_functional, fr_report, fr_target,
                              initial_probabilities, mean_energy_change,
                              mean_trajectory, propagate_mean, pulses_applied)

OMEGA0_A = math.pi / 616.0
OMEGA0_P = 2.0 * math.pi * 0.8e-3


def amplitude_config(tau=410.0, n_pulses=3, t_f=None, beta=None, pa=0.25):
    drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
    beta = 2.0 / OMEGA0_A if beta is None else beta
    return ProtocolConfig(drive, PulseChannelParams(pa, 0.0), tau, n_pulses,
                          ThermalContext(beta), t_f=t_f)


def phase_config(tau_theta=616.0, n_pulses=2, t_f=None, pd=0.45, beta=0.0,
                 beta_r=0.0):
    drive = PhaseRotatingDrive(OMEGA0_P, 2.0 * math.pi / tau_theta)
    return ProtocolConfig(drive, PulseChannelParams(0.25, pd), tau_theta,
                          n_pulses, ThermalContext(beta, beta_r), t_f=t_f)


class TestPulseCounting:
    def test_whole_multiples_are_counted(self):
        assert pulses_applied(0.0, 410.0) == 0
        assert pulses_applied(410.0, 410.0) == 1
        assert pulses_applied(4920.0, 410.0) == 12

    def test_near_multiples_snap(self):
        assert pulses_applied(410.0 * 5 * (1.0 + 1e-12), 410.0) == 5
        assert pulses_applied(410.0 * 5 * (1.0 - 1e-12), 410.0) == 5

    def test_interior_times_floor(self):
        assert pulses_applied(409.0, 410.0) == 0
        assert pulses_applied(411.0, 410.0) == 1
        assert pulses_applied(1050.0, 410.0) == 2

    def test_validation(self):
        with pytest.raises(ValueError):
            pulses_applied(-1.0, 410.0)
        with pytest.raises(ValueError):
            pulses_applied(100.0, 0.0)


class TestProtocolConfig:
    def test_t_f_defaults_to_last_pulse(self):
        pc = amplitude_config(tau=410.0, n_pulses=4)
        assert pc.t_f == pytest.approx(4 * 410.0)

    def test_t_f_before_last_pulse_rejected(self):
        with pytest.raises(ValueError):
            amplitude_config(tau=410.0, n_pulses=4, t_f=1000.0)

    def test_negative_pulses_rejected(self):
        with pytest.raises(ValueError):
            amplitude_config(n_pulses=-1)

    def test_unknown_weighting_rejected(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        with pytest.raises(ValueError):
            ProtocolConfig(drive, PulseChannelParams(0.25, 0.0), 410.0, 1,
                           ThermalContext(0.0), gibbs_weighting="bogus")

    def test_from_final_time_counts_pulses(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        pc = ProtocolConfig.from_final_time(drive, PulseChannelParams(0.25, 0.0),
                                            410.0, 1500.0, ThermalContext(0.0))
        assert pc.n_pulses == 3
        assert pc.t_f == 1500.0


class TestConditionalMatrixClass:
    def test_from_upper_row(self):
        cm = ConditionalMatrix.from_upper_row(0.7, 0.2)
        assert cm.p_up_given_up == 0.7
        assert cm.p_up_given_down == 0.2
        assert cm.prob(1, 0) == pytest.approx(0.3)

    def test_column_sums_enforced(self):
        with pytest.raises(ValueError):
            ConditionalMatrix(np.array([[0.7, 0.2], [0.2, 0.8]]))

    def test_entries_must_be_probabilities(self):
        with pytest.raises(ValueError):
            ConditionalMatrix(np.array([[1.4, 0.2], [-0.4, 0.8]]))

    def test_shape_enforced(self):
        with pytest.raises(ValueError):
            ConditionalMatrix(np.eye(3))


class TestConditionalMatrixAgainstDensityMatrices:
    def test_amplitude_with_tail(self):
        pc = amplitude_config(tau=410.0, n_pulses=3, t_f=3 * 410.0 + 200.0)
        cm = conditional_matrix(pc)
        pa = pc.channel.p_absorb

        ham0 = dmtools.ham_amplitude(OMEGA0_A, 616.0, 0.0)
        hamf = dmtools.ham_amplitude(OMEGA0_A, 616.0, pc.t_f)
        up0, down0, _, _ = dmtools.projectors_from_ham(ham0)
        upf, _, _, _ = dmtools.projectors_from_ham(hamf)

        def segment(t0, t1):
            angle = dmtools.accumulated_angle(OMEGA0_A, 616.0, t0, t1)
            return expm(-0.5j * angle * dmtools.SX)

        for col, rho in ((0, up0), (1, down0)):
            for n in range(1, 4):
                u = segment((n - 1) * 410.0, n * 410.0)
                rho = dmtools.pulse_dm(u @ rho @ u.conj().T, pa, 0.0)
            u = segment(3 * 410.0, pc.t_f)
            rho = u @ rho @ u.conj().T
            expected = np.trace(rho @ upf).real
            assert cm.matrix[0, col] == pytest.approx(expected, abs=1e-12)

    def test_phase_with_tail(self):
        pc = phase_config(tau_theta=616.0, n_pulses=2, t_f=2.3 * 616.0, pd=0.45)
        cm = conditional_matrix(pc)
        theta = 2.0 * math.pi / 616.0
        ham = lambda t: dmtools.ham_phase(OMEGA0_P, theta, t)
        h_eff = 0.5 * (OMEGA0_P * dmtools.SX - theta * dmtools.SZ)
        up_proj, down_proj, _, _ = dmtools.projectors_from_ham(h_eff)

        for col, rho in ((0, up_proj), (1, down_proj)):
            for n in range(1, 3):
                u = dmtools.propagate_unitary(ham, (n - 1) * 616.0, n * 616.0)
                rho = dmtools.pulse_dm(u @ rho @ u.conj().T, 0.25, 0.45)
            u = dmtools.propagate_unitary(ham, 2 * 616.0, pc.t_f)
            rho = u @ rho @ u.conj().T
            expected = np.trace(rho @ up_proj).real
            assert cm.matrix[0, col] == pytest.approx(expected, abs=1e-9)

    def test_amplitude_matrix_is_doubly_stochastic(self):
        # The fixed-axis drive never mixes the measurement populations and
        # pump failures are symmetric, so rows sum to one as well.
        for t_f in (410.0, 1000.0, 2870.0):
            pc = amplitude_config(tau=410.0,
                                  n_pulses=pulses_applied(t_f, 410.0), t_f=t_f)
            cm = conditional_matrix(pc)
            assert cm.matrix.sum(axis=1) == pytest.approx([1.0, 1.0], abs=1e-14)

    def test_no_pulses_is_identity_for_amplitude(self):
        pc = amplitude_config(tau=410.0, n_pulses=0, t_f=333.0)
        cm = conditional_matrix(pc)
        assert np.allclose(cm.as_array(), np.eye(2), atol=1e-14)


class TestMeanPropagation:
    def test_population_decay_matches_closed_form(self):
        pc = amplitude_config(tau=410.0, n_pulses=6)
        eig = instantaneous_eigensystem(pc.drive, 0.0)
        snaps = mean_trajectory(pc, eig.basis_plus)
        assert len(snaps) == 7
        for n, (t_n, state) in enumerate(snaps):
            assert t_n == pytest.approx(n * 410.0)
            pop = state.population_along(eig.basis_plus)
            assert pop == pytest.approx(
                population_after_n_pulses(1.0, 0.25, n), abs=1e-14)

    def test_tail_snapshot_appended(self):
        pc = amplitude_config(tau=410.0, n_pulses=2, t_f=1000.0)
        snaps = mean_trajectory(pc, QubitState(0.0, 0.0, 1.0))
        assert len(snaps) == 4
        assert snaps[-1][0] == pytest.approx(1000.0)

    def test_propagate_mean_matches_trajectory_endpoint(self):
        pc = phase_config(tau_theta=308.0, n_pulses=3, t_f=3.7 * 308.0)
        start = instantaneous_eigensystem(pc.drive, 0.0).basis_minus
        end = propagate_mean(pc, start)
        assert np.allclose(end.as_array(),
                           mean_trajectory(pc, start)[-1][1].as_array(),
                           atol=1e-14)


class TestEnergyChangeDistribution:
    def test_merging_of_coincident_atoms(self):
        dist = EnergyChangeDistribution.from_atoms(
            [(1.0, 0.25), (1.0 + 1e-15, 0.25), (-1.0, 0.5)], merge_tol=1e-12)
        assert len(dist) == 2
        assert dist.probs.tolist() == pytest.approx([0.5, 0.5])

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ValueError):
            EnergyChangeDistribution(np.array([0.0, 1.0]),
                                     np.array([0.5, 0.4]))

    def test_negative_probability_rejected(self):
        with pytest.raises(ValueError):
            EnergyChangeDistribution(np.array([0.0, 1.0]),
                                     np.array([1.1, -0.1]))

    def test_mean(self):
        dist = EnergyChangeDistribution(np.array([-1.0, 0.0, 2.0]),
                                        np.array([0.25, 0.5, 0.25]))
        assert dist.mean() == pytest.approx(0.25)
        assert mean_energy_change(dist) == pytest.approx(0.25)

    def test_cyclic_final_time_gives_three_atoms(self):
        # At whole modulation periods the spectra at 0 and t_f coincide,
        # so the two zero-change outcomes merge.
        pc = amplitude_config(tau=616.0, n_pulses=2, t_f=2 * 616.0)
        dist = energy_change_distribution(conditional_matrix(pc), pc)
        assert len(dist) == 3
        assert dist.values[1] == pytest.approx(0.0, abs=1e-15)

    def test_generic_final_time_gives_four_atoms(self):
        pc = amplitude_config(tau=410.0, n_pulses=2, t_f=2 * 410.0)
        dist = energy_change_distribution(conditional_matrix(pc), pc)
        assert len(dist) == 4


class TestInitialWeights:
    def test_infinite_temperature_is_uniform(self):
        pc = phase_config()
        assert initial_probabilities(pc).tolist() == pytest.approx([0.5, 0.5])

    def test_matches_gibbs_population(self):
        pc = amplitude_config()
        g = gibbs_population(pc.thermal.beta, pc.drive, 0.0)
        assert initial_probabilities(pc).tolist() == pytest.approx([g, 1.0 - g])
        assert g < 0.5


class TestFunctionals:
    def test_fr_functional_by_hand(self):
        dist = EnergyChangeDistribution(np.array([-1.0, 1.0]),
                                        np.array([0.5, 0.5]))
        expected = 0.5 * (math.e + 1.0 / math.e)
        assert fr_functional(dist, 1.0) == pytest.approx(expected)
        assert fr_functional(dist, 0.0) == pytest.approx(1.0)

    def test_fr_target_is_partition_ratio(self):
        pc = amplitude_config(tau=410.0, n_pulses=1, t_f=410.0)
        expected = (partition_function(pc.thermal.beta, pc.drive, 410.0)
                    / partition_function(pc.thermal.beta, pc.drive, 0.0))
        assert fr_target(pc) == pytest.approx(expected, rel=1e-15)

    def test_fr_target_is_one_for_constant_spectrum(self):
        assert fr_target(phase_config(beta=1.0)) == pytest.approx(1.0)
        assert fr_target(amplitude_config(beta=0.0)) == pytest.approx(1.0)

    def test_closed_evolution_satisfies_identity_exactly(self):
        # No pulses: the conditional matrix is the identity and the
        # functional telescopes to the partition ratio.
        pc = amplitude_config(tau=410.0, n_pulses=0, t_f=287.0)
        report = fr_report(pc)
        assert report.deviation <= 1e-14
        assert report.gamma == pytest.approx(pc.thermal.beta)

    def test_one_pulse_exchange_identity_with_matrix_fixed_point(self):
        pc = phase_config(tau_theta=616.0, n_pulses=1, pd=0.45)
        cm = conditional_matrix(pc)
        beta_r = beta_reservoir(conditional_fixed_point(cm), pc.drive.gap)
        dist = energy_change_distribution(cm, pc)
        assert fr_functional(dist, -beta_r) == pytest.approx(1.0, abs=1e-12)

    def test_fr_report_requires_positive_value(self):
        with pytest.raises(ValueError):
            FrReport(mean_delta_e=0.0, fr_value=0.0, fr_target=1.0, gamma=0.0)


class TestReservoirTemperature:
    def test_round_trip_with_gibbs_weight(self):
        gap = 0.0205
        for beta in (-120.0, 0.0, 310.0):
            p = 1.0 / (1.0 + math.exp(beta * gap))
            assert beta_reservoir(p, gap) == pytest.approx(beta, abs=1e-9)

    def test_half_gives_zero(self):
        assert beta_reservoir(0.5, 1.0) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            beta_reservoir(0.0, 1.0)
        with pytest.raises(ValueError):
            beta_reservoir(1.0, 1.0)
        with pytest.raises(ValueError):
            beta_reservoir(0.3, 0.0)


class TestConditionalFixedPoint:
    def test_doubly_stochastic_gives_half(self):
        cm = ConditionalMatrix.from_upper_row(0.7, 0.3)
        assert conditional_fixed_point(cm) == pytest.approx(0.5)

    def test_matches_direct_stationarity(self):
        cm = ConditionalMatrix.from_upper_row(0.62, 0.17)
        p = conditional_fixed_point(cm)
        assert cm.p_up_given_up * p + cm.p_up_given_down * (1 - p) == \
            pytest.approx(p, abs=1e-15)

    def test_identity_has_no_fixed_weight(self):
        with pytest.raises(ValueError):
            conditional_fixed_point(ConditionalMatrix.from_upper_row(1.0, 0.0))


class TestFirstLawCheck:
    def test_zero_residual_for_consistent_numbers(self):
        dist = EnergyChangeDistribution(np.array([-0.5, 0.5]),
                                        np.array([0.3, 0.7]))
        assert first_law_check(dist, dist.mean(), 0.0) == pytest.approx(0.0)

    def test_reports_signed_residual(self):
        dist = EnergyChangeDistribution(np.array([1.0]), np.array([1.0]))
        assert first_law_check(dist, 0.25, 0.5) == pytest.approx(0.25)
