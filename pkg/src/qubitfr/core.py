"""Bloch-vector model of a periodically driven two-level system.

States are Bloch vectors r = (rx, ry, rz) of the density operator
rho = (I + r . sigma)/2, with |0> at the north pole (rz = +1) and |1> at
the south pole.  Units: hbar = 1, time in ns, angular frequencies in
rad/ns, so energies are in rad/ns as well.

Two drive families are supported:

* ``AmplitudeModulatedDrive`` -- H(t) = omega(t)/2 * sigma_x with
  omega(t) = omega0/2 * (1 + cos^2(pi t / tau_a)).  The drive axis is
  fixed, so propagation reduces to a rotation about +x by the accumulated
  phase integral of omega(t).

* ``PhaseRotatingDrive`` -- H(t) = omega0/2 * (sigma_x cos(theta t) +
  sigma_y sin(theta t)).  In the frame co-rotating at theta the generator
  is time independent with splitting 2*e_theta = sqrt(omega0^2 + theta^2),
  and propagation over any window composes two z-rotations with a single
  rotation about the dressed axis.

Everything here is closed form; no differential-equation stepping is used
anywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BLOCH_NORM_TOL = 1e-12

# Relative slack used to recognise stroboscopic times t = n * tau_theta.
_STROBE_RTOL = 1e-9


@dataclass(frozen=True)
class QubitState:
    """Bloch vector of a qubit density operator."""

    rx: float
    ry: float
    rz: float

    def __post_init__(self) -> None:
        n = self.norm()
        if not math.isfinite(n) or n > 1.0 + BLOCH_NORM_TOL:
            raise ValueError(f"Bloch vector ({self.rx}, {self.ry}, {self.rz}) "
                             f"has norm {n!r}, outside the unit ball")

    def norm(self) -> float:
        return math.sqrt(self.rx * self.rx + self.ry * self.ry + self.rz * self.rz)

    def as_array(self) -> np.ndarray:
        return np.array([self.rx, self.ry, self.rz], dtype=float)

    @classmethod
    def from_array(cls, r) -> "QubitState":
        rx, ry, rz = (float(v) for v in r)
        return cls(rx, ry, rz)

    def population_along(self, basis_state: "QubitState") -> float:
        """Probability of finding this state in the given pure basis state.

        Tr[rho |u><u|] = (1 + r . u)/2 for a pure state with Bloch vector u.
        """
        dot = (self.rx * basis_state.rx + self.ry * basis_state.ry
               + self.rz * basis_state.rz)
        return 0.5 * (1.0 + dot)


@dataclass(frozen=True)
class AmplitudeModulatedDrive:
    """Fixed-axis sigma_x drive with a periodically modulated rate.

    omega(t) = omega0/2 * (1 + cos^2(pi t / tau_a)); omega(0) = omega0 and
    omega(tau_a / 2) = omega0 / 2.  ``tau_a`` is the modulation period in ns.
    """

    omega0: float
    tau_a: float

    def __post_init__(self) -> None:
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not (self.tau_a > 0 and math.isfinite(self.tau_a)):
            raise ValueError(f"tau_a must be positive, got {self.tau_a}")

    def omega(self, t: float) -> float:
        c = math.cos(math.pi * t / self.tau_a)
        return 0.5 * self.omega0 * (1.0 + c * c)


@dataclass(frozen=True)
class PhaseRotatingDrive:
    """Constant-amplitude drive whose axis rotates in the equator at rate theta."""

    omega0: float
    theta: float

    def __post_init__(self) -> None:
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ValueError(f"theta must be positive, got {self.theta}")

    @property
    def tau_theta(self) -> float:
        """Rotation period 2*pi/theta of the drive axis (ns)."""
        return 2.0 * math.pi / self.theta

    @property
    def alpha(self) -> float:
        """Dressing angle -arctan(omega0/theta), stored signed (negative)."""
        return -math.atan2(self.omega0, self.theta)

    @property
    def e_theta(self) -> float:
        """Quasi-energy sqrt(omega0^2 + theta^2)/2 of the dressed levels."""
        return 0.5 * math.hypot(self.omega0, self.theta)

    @property
    def gap(self) -> float:
        return 2.0 * self.e_theta


DriveSpec = AmplitudeModulatedDrive | PhaseRotatingDrive


@dataclass(frozen=True)
class EigenSystem:
    """Measurement basis and energies at a given time."""

    e_plus: float
    e_minus: float
    basis_plus: QubitState
    basis_minus: QubitState


@dataclass(frozen=True)
class ThermalContext:
    """Inverse temperatures entering the exchange bookkeeping.

    ``beta`` weights the initial two-outcome measurement; ``beta_r`` is the
    effective inverse temperature assigned to the dissipative pulse train
    (zero for a pulse train that drives the populations to 1/2).
    """

    beta: float
    beta_r: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.beta) or not math.isfinite(self.beta_r):
            raise ValueError("temperatures must be finite")


def phase_integral(drive: AmplitudeModulatedDrive, t0: float, t1: float) -> float:
    """Accumulated rotation angle int_{t0}^{t1} omega(t') dt' for the fixed-axis drive.

    Closed form: the antiderivative of omega is
    (omega0/2) * [ (3/2) t + (tau_a / 4 pi) sin(2 pi t / tau_a) ].
    """
    if not isinstance(drive, AmplitudeModulatedDrive):
        raise TypeError("phase_integral is defined for the amplitude-modulated drive")

    def anti(t: float) -> float:
        return 0.5 * drive.omega0 * (1.5 * t + (drive.tau_a / (4.0 * math.pi))
                                     * math.sin(2.0 * math.pi * t / drive.tau_a))

    return anti(t1) - anti(t0)


def _axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    kx, ky, kz = axis
    c, s = math.cos(angle), math.sin(angle)
    cross = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
    return c * np.eye(3) + s * cross + (1.0 - c) * np.outer(axis, axis)


def _rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _dressed_axis(drive: PhaseRotatingDrive) -> np.ndarray:
    # The +e_theta level must sit on the opposite side of the pump target |0>,
    # so the dressed axis carries a negative z-component.
    e = 2.0 * drive.e_theta
    return np.array([drive.omega0 / e, 0.0, -drive.theta / e])


def _is_stroboscopic(t: float, tau: float) -> bool:
    n = t / tau
    return abs(n - round(n)) <= _STROBE_RTOL * max(1.0, abs(n))


def bloch_rotation(drive: DriveSpec, t0: float, t1: float) -> np.ndarray:
    """3x3 rotation carrying Bloch vectors from time t0 to t1 under the drive.

    For the rotating-axis family the propagator is assembled as
    R_z(theta * t1) . R_dressed(2 e_theta (t1 - t0)) . R_z(-theta * t0);
    when both endpoints are whole drive periods the outer z-rotations are
    dropped exactly instead of being evaluated at large arguments.
    """
    if t1 < t0:
        raise ValueError(f"time interval reversed: t0={t0}, t1={t1}")
    if isinstance(drive, AmplitudeModulatedDrive):
        return _axis_angle(np.array([1.0, 0.0, 0.0]), phase_integral(drive, t0, t1))
    axis = _dressed_axis(drive)
    inner = _axis_angle(axis, 2.0 * drive.e_theta * (t1 - t0))
    tau = drive.tau_theta
    if _is_stroboscopic(t0, tau) and _is_stroboscopic(t1, tau):
        return inner
    return _rot_z(drive.theta * t1) @ inner @ _rot_z(-drive.theta * t0)


def evolve_unitary(state: QubitState, drive: DriveSpec, t0: float, t1: float) -> QubitState:
    """Propagate a state under the bare drive from t0 to t1 (no pulses)."""
    r = bloch_rotation(drive, t0, t1) @ state.as_array()
    return QubitState.from_array(r)


def instantaneous_eigensystem(drive: DriveSpec, t: float) -> EigenSystem:
    """Measurement basis and energies used by the two-point protocol at time t.

    Amplitude family: the +/-x states with energies +/- omega(t)/2.  Rotating
    family: the time-independent dressed basis with energies +/- e_theta.
    """
    if isinstance(drive, AmplitudeModulatedDrive):
        e = 0.5 * drive.omega(t)
        up = QubitState(1.0, 0.0, 0.0)
        down = QubitState(-1.0, 0.0, 0.0)
        return EigenSystem(e, -e, up, down)
    ax = _dressed_axis(drive)
    up = QubitState.from_array(ax)
    down = QubitState.from_array(-ax)
    return EigenSystem(drive.e_theta, -drive.e_theta, up, down)


def partition_function(beta: float, drive: DriveSpec, t: float) -> float:
    """Two-level partition function 2*cosh(beta * e_plus(t))."""
    e_plus = instantaneous_eigensystem(drive, t).e_plus
    return 2.0 * math.cosh(beta * e_plus)


def gibbs_population(beta: float, drive: DriveSpec, t: float) -> float:
    """Upper-level Gibbs weight exp(-beta e_plus) / Z at time t."""
    eig = instantaneous_eigensystem(drive, t)
    x = beta * (eig.e_plus - eig.e_minus)
    # Logistic form stable for any beta; exp never sees a positive argument.
    if x >= 0.0:
        return math.exp(-x) / (1.0 + math.exp(-x))
    return 1.0 / (1.0 + math.exp(x))


def free_energy_delta(beta: float, drive: DriveSpec, t_f: float) -> float:
    """Equilibrium free-energy change -ln(Z(t_f)/Z(0))/beta between 0 and t_f."""
    if beta == 0.0:
        raise ValueError("free energy difference is undefined at beta = 0")
    z0 = partition_function(beta, drive, 0.0)
    zf = partition_function(beta, drive, t_f)
    return -math.log(zf / z0) / beta
