"""Dissipative pulse channel and its steady state under periodic driving.

Each pulse acts on the Bloch vector in two stages.  With probability
``p_absorb`` the pulse is absorbed: the coherences in the z-basis are
erased (rx, ry -> 0) and the projected populations are then pumped toward
|0> with weight ``p_pump`` (rz -> rz + p_pump * (1 - rz)).  With
probability 1 - p_absorb nothing happens.  Averaged over absorption this
is the affine map

    r  ->  A r + b,   A = diag(1-pa, 1-pa, 1-pa*pd),   b = (0, 0, pa*pd).

One drive period of free evolution followed by a pulse is a contraction
whenever pa > 0, so its fixed point exists and is obtained here by a
direct linear solve rather than by iterating the map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import DriveSpec, QubitState, bloch_rotation

FIXED_POINT_RESIDUAL_TOL = 1e-12


class DegenerateChannelError(ValueError):
    """Raised when the pulse channel has no contracting fixed point."""


@dataclass(frozen=True)
class PulseChannelParams:
    """Absorption and pump-success probabilities of one pulse."""

    p_absorb: float
    p_pump: float

    def __post_init__(self) -> None:
        for name, p in (("p_absorb", self.p_absorb), ("p_pump", self.p_pump)):
            if not (0.0 <= p <= 1.0) or not math.isfinite(p):
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class PulseEvent:
    """Outcome record of one stochastically sampled pulse.

    ``projection_outcome`` and ``pumped`` are None when the pulse was not
    absorbed; otherwise the outcome is 0 for |0> and 1 for |1>, and
    ``pumped`` records whether a |1> outcome was transferred to |0>.
    """

    absorbed: bool
    projection_outcome: int | None = None
    pumped: bool | None = None


def apply_pulse_map(state: QubitState, params: PulseChannelParams) -> QubitState:
    """Ensemble-averaged action of one pulse."""
    pa, pd = params.p_absorb, params.p_pump
    rz_pulsed = state.rz + pd * (1.0 - state.rz)
    return QubitState(
        (1.0 - pa) * state.rx,
        (1.0 - pa) * state.ry,
        (1.0 - pa) * state.rz + pa * rz_pulsed,
    )


def sample_pulse(state: QubitState, params: PulseChannelParams,
                 rng: np.random.Generator) -> tuple[QubitState, PulseEvent]:
    """Sample one pulse acting on a pure-state trajectory.

    Consumes exactly three uniform variates (absorption, projection
    outcome, pump success) regardless of which branches fire, so that
    trajectories with a fixed pulse count draw a fixed-length stream.
    """
    u_absorb, u_outcome, u_pump = rng.random(3)
    if u_absorb >= params.p_absorb:
        return state, PulseEvent(absorbed=False)
    p_upper = 0.5 * (1.0 + state.rz)  # population of |0> in the z-basis
    if u_outcome < p_upper:
        return QubitState(0.0, 0.0, 1.0), PulseEvent(True, 0, False)
    if u_pump < params.p_pump:
        return QubitState(0.0, 0.0, 1.0), PulseEvent(True, 1, True)
    return QubitState(0.0, 0.0, -1.0), PulseEvent(True, 1, False)


def _period_map(drive: DriveSpec, params: PulseChannelParams,
                tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Linear part and offset of one period of drive followed by a pulse."""
    rot = bloch_rotation(drive, 0.0, tau)
    pa, pd = params.p_absorb, params.p_pump
    pulse_lin = np.diag([1.0 - pa, 1.0 - pa, 1.0 - pa * pd])
    offset = np.array([0.0, 0.0, pa * pd])
    return pulse_lin @ rot, offset


def channel_fixed_point(drive: DriveSpec, params: PulseChannelParams,
                        tau: float) -> QubitState:
    """Stationary Bloch vector of the period map (drive for tau, then pulse).

    Solves (I - A) r = b exactly and verifies the residual; raises
    ``DegenerateChannelError`` when p_absorb = 0, where the map is a pure
    rotation and generically has only the trivial fixed point.
    """
    if params.p_absorb == 0.0:
        raise DegenerateChannelError("p_absorb = 0: the period map is unitary "
                                     "and has no attracting fixed point")
    lin, offset = _period_map(drive, params, tau)
    r = np.linalg.solve(np.eye(3) - lin, offset)
    residual = float(np.max(np.abs(lin @ r + offset - r)))
    if residual > FIXED_POINT_RESIDUAL_TOL:
        raise DegenerateChannelError(f"fixed-point residual {residual:.3e} exceeds "
                                     f"{FIXED_POINT_RESIDUAL_TOL:.0e}")
    return QubitState.from_array(r)


def stationary_upper_population(drive: DriveSpec, params: PulseChannelParams,
                                tau: float) -> float:
    """Upper-level occupation of the channel fixed point in the measurement basis."""
    from .core import instantaneous_eigensystem

    fp = channel_fixed_point(drive, params, tau)
    return fp.population_along(instantaneous_eigensystem(drive, 0.0).basis_plus)


def invert_pump_probability(drive: DriveSpec, p_absorb: float, tau: float,
                            target_upper_population: float) -> float:
    """Pump probability whose channel fixed point has the requested occupation.

    The occupation is monotone in p_pump at fixed p_absorb, so a bracketing
    root search on [0, 1] suffices.  Raises ValueError when the target is
    outside the reachable range.
    """
    if not (0.0 < target_upper_population < 1.0):
        raise ValueError(f"target population must lie in (0, 1), "
                         f"got {target_upper_population}")

    def gap(pd: float) -> float:
        params = PulseChannelParams(p_absorb, pd)
        return stationary_upper_population(drive, params, tau) - target_upper_population

    lo, hi = 1e-12, 1.0
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if g_lo * g_hi > 0.0:
        raise ValueError(f"target population {target_upper_population} is not "
                         f"reachable at p_absorb={p_absorb}: endpoint occupations "
                         f"{g_lo + target_upper_population:.6f} and "
                         f"{g_hi + target_upper_population:.6f}")
    return float(brentq(gap, lo, hi, xtol=1e-15, rtol=8.9e-16))
