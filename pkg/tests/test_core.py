"""Core state/drive/propagator tests against density-matrix references."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm

import dmtools
from qubitfr.core import (AmplitudeModulatedDrive, PhaseRotatingDrive,
                          QubitState, ThermalContext, bloch_rotation,
                          evolve_unitary, free_energy_delta, gibbs_population,
                          instantaneous_eigensystem, partition_function,
                          phase_integral)

OMEGA0_A = math.pi / 616.0
OMEGA0_P = 2.0 * math.pi * 0.8e-3


def random_bloch(rng, pure=False):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    if not pure:
        v *= rng.uniform(0.0, 1.0)
    return v


class TestQubitState:
    def test_round_trip(self):
        s = QubitState(0.3, -0.2, 0.5)
        assert np.allclose(QubitState.from_array(s.as_array()).as_array(),
                           [0.3, -0.2, 0.5])

    def test_norm_validation(self):
        QubitState(0.6, 0.0, 0.8)  # on the sphere is fine
        with pytest.raises(ValueError):
            QubitState(1.0, 0.0, 0.1)
        with pytest.raises(ValueError):
            QubitState(float("nan"), 0.0, 0.0)

    def test_population_along_matches_trace_formula(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            r = random_bloch(rng)
            u = random_bloch(rng, pure=True)
            rho = dmtools.rho_from_bloch(r)
            proj = dmtools.rho_from_bloch(u)  # pure state projector
            expected = np.trace(rho @ proj).real
            got = QubitState.from_array(r).population_along(
                QubitState.from_array(u))
            assert got == pytest.approx(expected, abs=1e-14)

    def test_poles(self):
        north = QubitState(0.0, 0.0, 1.0)
        assert north.population_along(north) == pytest.approx(1.0)
        assert north.population_along(QubitState(0.0, 0.0, -1.0)) == \
            pytest.approx(0.0)


class TestDriveSpecs:
    def test_amplitude_rate_endpoints(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        assert drive.omega(0.0) == pytest.approx(OMEGA0_A)
        assert drive.omega(308.0) == pytest.approx(0.5 * OMEGA0_A)
        assert drive.omega(616.0) == pytest.approx(OMEGA0_A)

    def test_amplitude_validation(self):
        with pytest.raises(ValueError):
            AmplitudeModulatedDrive(-1.0, 616.0)
        with pytest.raises(ValueError):
            AmplitudeModulatedDrive(OMEGA0_A, 0.0)

    def test_phase_derived_quantities(self):
        theta = 2.0 * math.pi / 616.0
        drive = PhaseRotatingDrive(OMEGA0_P, theta)
        assert drive.tau_theta == pytest.approx(616.0)
        assert drive.alpha == pytest.approx(-math.atan(OMEGA0_P / theta))
        assert drive.alpha < 0.0
        assert drive.gap == pytest.approx(math.hypot(OMEGA0_P, theta))
        assert drive.gap == pytest.approx(2.0 * drive.e_theta)

    def test_phase_validation(self):
        with pytest.raises(ValueError):
            PhaseRotatingDrive(0.0, 1.0)
        with pytest.raises(ValueError):
            PhaseRotatingDrive(OMEGA0_P, -0.5)


class TestPhaseIntegral:
    def test_against_quadrature(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        for t0, t1 in ((0.0, 410.0), (123.4, 2000.0), (616.0, 616.0),
                       (37.0, 38.5)):
            expected, err = quad(drive.omega, t0, t1, epsabs=1e-14)
            assert err < 1e-11
            assert phase_integral(drive, t0, t1) == pytest.approx(
                expected, abs=1e-11)

    def test_wrong_family_rejected(self):
        with pytest.raises(TypeError):
            phase_integral(PhaseRotatingDrive(OMEGA0_P, 0.01), 0.0, 1.0)


class TestBlochRotation:
    def test_rotations_are_special_orthogonal(self):
        drives = (AmplitudeModulatedDrive(OMEGA0_A, 616.0),
                  PhaseRotatingDrive(OMEGA0_P, 2.0 * math.pi / 308.0))
        for drive in drives:
            for t0, t1 in ((0.0, 500.0), (100.0, 730.5)):
                rot = bloch_rotation(drive, t0, t1)
                assert np.allclose(rot @ rot.T, np.eye(3), atol=1e-13)
                assert np.linalg.det(rot) == pytest.approx(1.0, abs=1e-13)

    def test_composition(self):
        drive = PhaseRotatingDrive(OMEGA0_P, 2.0 * math.pi / 616.0)
        full = bloch_rotation(drive, 0.0, 900.0)
        stitched = bloch_rotation(drive, 350.0, 900.0) @ bloch_rotation(
            drive, 0.0, 350.0)
        assert np.allclose(full, stitched, atol=1e-12)

    def test_reversed_interval_rejected(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        with pytest.raises(ValueError):
            bloch_rotation(drive, 10.0, 5.0)

    def test_amplitude_against_density_matrix(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        rng = np.random.default_rng(11)
        for t0, t1 in ((0.0, 410.0), (205.0, 616.0), (50.0, 1100.0)):
            angle = dmtools.accumulated_angle(OMEGA0_A, 616.0, t0, t1)
            u = expm(-0.5j * angle * dmtools.SX)
            rot = bloch_rotation(drive, t0, t1)
            for _ in range(5):
                r = random_bloch(rng)
                rho = u @ dmtools.rho_from_bloch(r) @ u.conj().T
                assert np.allclose(rot @ r, dmtools.bloch_from_rho(rho),
                                   atol=1e-12)

    def test_phase_against_density_matrix(self):
        theta = 2.0 * math.pi / 616.0
        drive = PhaseRotatingDrive(OMEGA0_P, theta)
        rng = np.random.default_rng(13)
        ham = lambda t: dmtools.ham_phase(OMEGA0_P, theta, t)
        for t0, t1 in ((0.0, 616.0), (0.0, 251.7), (151.0, 1000.0)):
            u = dmtools.propagate_unitary(ham, t0, t1)
            rot = bloch_rotation(drive, t0, t1)
            for _ in range(5):
                r = random_bloch(rng)
                rho = u @ dmtools.rho_from_bloch(r) @ u.conj().T
                assert np.allclose(rot @ r, dmtools.bloch_from_rho(rho),
                                   atol=1e-9)

    def test_stroboscopic_shortcut_equals_general_path(self):
        theta = 2.0 * math.pi / 308.0
        drive = PhaseRotatingDrive(OMEGA0_P, theta)
        tau = drive.tau_theta
        direct = bloch_rotation(drive, 0.0, 3.0 * tau)
        # Splitting at a non-integer time forces the generic branch twice.
        stitched = bloch_rotation(drive, 1.4 * tau, 3.0 * tau) @ bloch_rotation(
            drive, 0.0, 1.4 * tau)
        assert np.allclose(direct, stitched, atol=1e-11)

    def test_evolve_unitary_preserves_norm(self):
        drive = PhaseRotatingDrive(OMEGA0_P, 2.0 * math.pi / 1296.0)
        state = QubitState(0.36, 0.48, -0.6)
        out = evolve_unitary(state, drive, 0.0, 777.0)
        assert out.norm() == pytest.approx(state.norm(), abs=1e-13)


class TestEigensystem:
    def test_amplitude_matches_hamiltonian_diagonalization(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        for t in (0.0, 170.0, 308.0, 616.0):
            eig = instantaneous_eigensystem(drive, t)
            upper, lower, e_up, e_dn = dmtools.projectors_from_ham(
                dmtools.ham_amplitude(OMEGA0_A, 616.0, t))
            assert eig.e_plus == pytest.approx(e_up, abs=1e-15)
            assert eig.e_minus == pytest.approx(e_dn, abs=1e-15)
            assert np.allclose(dmtools.rho_from_bloch(
                eig.basis_plus.as_array()), upper, atol=1e-12)
            assert np.allclose(dmtools.rho_from_bloch(
                eig.basis_minus.as_array()), lower, atol=1e-12)

    def test_phase_basis_is_rotating_frame_eigensystem(self):
        theta = 2.0 * math.pi / 616.0
        drive = PhaseRotatingDrive(OMEGA0_P, theta)
        h_eff = 0.5 * (OMEGA0_P * dmtools.SX - theta * dmtools.SZ)
        upper, lower, e_up, e_dn = dmtools.projectors_from_ham(h_eff)
        for t in (0.0, 100.0, 616.0):
            eig = instantaneous_eigensystem(drive, t)
            assert eig.e_plus == pytest.approx(e_up, abs=1e-15)
            assert eig.e_minus == pytest.approx(e_dn, abs=1e-15)
            assert np.allclose(dmtools.rho_from_bloch(
                eig.basis_plus.as_array()), upper, atol=1e-12)

    def test_phase_upper_level_leans_south(self):
        # Pumping toward |0> (north) must depopulate the upper level, so
        # the upper basis state carries a negative z-component.
        drive = PhaseRotatingDrive(OMEGA0_P, 2.0 * math.pi / 1296.0)
        eig = instantaneous_eigensystem(drive, 0.0)
        assert eig.basis_plus.rz < 0.0
        assert eig.basis_minus.rz > 0.0

    def test_basis_states_are_antipodal(self):
        for drive in (AmplitudeModulatedDrive(OMEGA0_A, 616.0),
                      PhaseRotatingDrive(OMEGA0_P, 0.01)):
            eig = instantaneous_eigensystem(drive, 37.0)
            assert np.allclose(eig.basis_plus.as_array(),
                               -eig.basis_minus.as_array(), atol=1e-15)
            assert eig.basis_plus.norm() == pytest.approx(1.0, abs=1e-14)


class TestThermodynamics:
    def test_partition_function_against_matrix_exponential(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        beta = 2.0 / OMEGA0_A
        for t in (0.0, 205.0, 410.0):
            z_matrix = np.trace(expm(
                -beta * dmtools.ham_amplitude(OMEGA0_A, 616.0, t))).real
            assert partition_function(beta, drive, t) == pytest.approx(
                z_matrix, rel=1e-12)

    def test_gibbs_population_against_matrix_exponential(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        beta = 2.0 / OMEGA0_A
        for t in (0.0, 150.0):
            ham = dmtools.ham_amplitude(OMEGA0_A, 616.0, t)
            rho = expm(-beta * ham)
            rho /= np.trace(rho).real
            upper, _, _, _ = dmtools.projectors_from_ham(ham)
            expected = np.trace(rho @ upper).real
            assert gibbs_population(beta, drive, t) == pytest.approx(
                expected, abs=1e-14)

    def test_gibbs_population_limits(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        assert gibbs_population(0.0, drive, 0.0) == pytest.approx(0.5)
        assert gibbs_population(1e6, drive, 0.0) < 1e-10

    def test_free_energy_delta(self):
        drive = AmplitudeModulatedDrive(OMEGA0_A, 616.0)
        beta = 2.0 / OMEGA0_A
        t_f = 205.0
        expected = -math.log(partition_function(beta, drive, t_f)
                             / partition_function(beta, drive, 0.0)) / beta
        assert free_energy_delta(beta, drive, t_f) == pytest.approx(expected)
        # Whole modulation periods restore the spectrum.
        assert free_energy_delta(beta, drive, 616.0) == pytest.approx(
            0.0, abs=1e-15)
        with pytest.raises(ValueError):
            free_energy_delta(0.0, drive, 205.0)

    def test_thermal_context_validation(self):
        ThermalContext(0.0)
        ThermalContext(2.0 / OMEGA0_A, beta_r=-1.0)
        with pytest.raises(ValueError):
            ThermalContext(float("inf"))
