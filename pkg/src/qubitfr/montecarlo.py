"""Reproducible trajectory ensembles for the pulsed protocols.

Reproducibility contract: trajectory i draws from its own counter-based
stream keyed by (master_seed, i), and every aggregate is assembled from
exact integer counts.  Results are therefore bit-identical for a fixed
(config, master_seed, n) no matter how trajectories are chunked or how
many workers run them.

Each trajectory consumes a fixed number of uniforms, 3 per pulse
(absorption, projection outcome, pump success) plus 1 for the final
measurement, whether or not the corresponding branches fire.  The
vectorized engine and the record-keeping scalar engine walk the same
streams and produce identical outcomes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import PulseEvent, sample_pulse
from .core import QubitState, instantaneous_eigensystem
from .protocol import (ConditionalMatrix, FrReport, ProtocolConfig,
                       energy_change_distribution, fr_functional, fr_target,
                       initial_probabilities, segment_rotations)

DEFAULT_CHUNK = 16384


class IncompleteEnsembleError(ValueError):
    """Raised when an estimate needs initializations that were never run."""


def derive_stream(master_seed: int, trajectory_index: int) -> np.random.Generator:
    """Independent random stream for one trajectory.

    Counter-based keying: the stream is a pure function of
    (master_seed, trajectory_index), so any evaluation order yields the
    same draws.
    """
    key = np.array([master_seed, trajectory_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class TrajectoryRecord:
    """One sampled protocol run."""

    initial_index: int
    final_index: int
    pulse_events: tuple[PulseEvent, ...]
    seed_index: int


@dataclass(frozen=True)
class EnsembleStats:
    """Exact-integer tallies of an ensemble of trajectories.

    ``counts[j, i]`` is the number of trajectories initialized in basis
    state i whose final measurement gave j; ``n_per_initial[i]`` the
    number initialized in i.  Stats from disjoint index ranges merge by
    plain addition.
    """

    counts: np.ndarray
    n_per_initial: np.ndarray
    absorbed_pulses: int
    total_pulses: int
    master_seed: int

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=np.int64)
        n = np.asarray(self.n_per_initial, dtype=np.int64)
        if c.shape != (2, 2) or n.shape != (2,):
            raise ValueError("counts must be 2x2 and n_per_initial length 2")
        if np.any(c.sum(axis=0) != n):
            raise ValueError(f"column totals {c.sum(axis=0).tolist()} disagree "
                             f"with trajectory counts {n.tolist()}")
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "n_per_initial", n)

    @property
    def n_trajectories(self) -> int:
        return int(self.n_per_initial.sum())

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        if other.master_seed != self.master_seed:
            raise ValueError("refusing to merge stats from different master seeds")
        return EnsembleStats(self.counts + other.counts,
                             self.n_per_initial + other.n_per_initial,
                             self.absorbed_pulses + other.absorbed_pulses,
                             self.total_pulses + other.total_pulses,
                             self.master_seed)

    def column_estimate(self, initial_index: int) -> float:
        """Empirical P(final = up | initial = initial_index)."""
        n = int(self.n_per_initial[initial_index])
        if n == 0:
            raise IncompleteEnsembleError(
                f"no trajectories were initialized in state {initial_index}")
        return float(self.counts[0, initial_index]) / n

    def conditional_estimate(self) -> ConditionalMatrix:
        return ConditionalMatrix.from_upper_row(self.column_estimate(0),
                                                self.column_estimate(1))

    def std_err(self) -> np.ndarray:
        """Binomial standard errors, entry for entry with the estimate."""
        out = np.zeros((2, 2))
        for i in (0, 1):
            p = self.column_estimate(i)
            err = np.sqrt(p * (1.0 - p) / float(self.n_per_initial[i]))
            out[:, i] = err
        return out

    def to_dict(self) -> dict:
        return {
            "counts": self.counts.tolist(),
            "n_per_initial": self.n_per_initial.tolist(),
            "absorbed_pulses": int(self.absorbed_pulses),
            "total_pulses": int(self.total_pulses),
            "master_seed": int(self.master_seed),
        }


@dataclass(frozen=True)
class _Engine:
    """Precomputed geometry shared by every trajectory of one config."""

    rotations: tuple[np.ndarray, ...]
    tail: np.ndarray
    start_up: np.ndarray
    final_axis: np.ndarray
    p_absorb: float
    p_pump: float

    @classmethod
    def build(cls, config: ProtocolConfig) -> "_Engine":
        rots, tail = segment_rotations(config)
        eig0 = instantaneous_eigensystem(config.drive, 0.0)
        eigf = instantaneous_eigensystem(config.drive, config.t_f)
        return cls(tuple(rots), tail, eig0.basis_plus.as_array(),
                   eigf.basis_plus.as_array(),
                   config.channel.p_absorb, config.channel.p_pump)


def _run_chunk_vectorized(engine: _Engine, initial_index: int, master_seed: int,
                          lo: int, hi: int) -> tuple[int, int]:
    """(final-up count, absorbed-pulse count) for trajectory indices [lo, hi)."""
    m = hi - lo
    n_pulses = len(engine.rotations)
    draws = np.empty((m, 3 * n_pulses + 1))
    for i in range(m):
        draws[i] = derive_stream(master_seed, lo + i).random(3 * n_pulses + 1)

    sign = 1.0 if initial_index == 0 else -1.0
    r = np.tile(sign * engine.start_up, (m, 1))
    absorbed_total = 0
    for n, rot in enumerate(engine.rotations):
        r = r @ rot.T
        col = 3 * n
        absorbed = draws[:, col] < engine.p_absorb
        p_up_z = 0.5 * (1.0 + r[:, 2])
        ends_up = (draws[:, col + 1] < p_up_z) | (draws[:, col + 2] < engine.p_pump)
        r[absorbed, 0] = 0.0
        r[absorbed, 1] = 0.0
        r[absorbed, 2] = np.where(ends_up[absorbed], 1.0, -1.0)
        absorbed_total += int(absorbed.sum())
    r = r @ engine.tail.T
    p_final_up = 0.5 * (1.0 + r @ engine.final_axis)
    ups = int(np.count_nonzero(draws[:, 3 * n_pulses] < p_final_up))
    return ups, absorbed_total


def _run_chunk_records(config: ProtocolConfig, engine: _Engine, initial_index: int,
                       master_seed: int, lo: int,
                       hi: int) -> tuple[int, int, list[TrajectoryRecord]]:
    ups = 0
    absorbed_total = 0
    records = []
    sign = 1.0 if initial_index == 0 else -1.0
    params = config.channel
    for idx in range(lo, hi):
        rng = derive_stream(master_seed, idx)
        state = QubitState.from_array(sign * engine.start_up)
        events = []
        for rot in engine.rotations:
            state = QubitState.from_array(rot @ state.as_array())
            state, event = sample_pulse(state, params, rng)
            events.append(event)
            absorbed_total += int(event.absorbed)
        state = QubitState.from_array(engine.tail @ state.as_array())
        p_up = 0.5 * (1.0 + float(state.as_array() @ engine.final_axis))
        final_index = 0 if rng.random() < p_up else 1
        ups += int(final_index == 0)
        records.append(TrajectoryRecord(initial_index, final_index,
                                        tuple(events), idx))
    return ups, absorbed_total, records


def run_trajectories(config: ProtocolConfig, initial_index: int, n: int,
                     master_seed: int, *, workers: int = 1, index_offset: int = 0,
                     chunk_size: int = DEFAULT_CHUNK, keep_records: bool = False,
                     ) -> tuple[EnsembleStats, list[TrajectoryRecord] | None]:
    """Sample n trajectories from one initial basis state.

    Trajectory i uses stream index ``index_offset + i``; pass disjoint
    offsets to combine ensembles without stream reuse.
    """
    if n < 1:
        raise ValueError(f"need at least one trajectory, got n = {n}")
    if initial_index not in (0, 1):
        raise ValueError(f"initial_index must be 0 or 1, got {initial_index}")
    engine = _Engine.build(config)
    bounds = [(lo, min(lo + chunk_size, index_offset + n))
              for lo in range(index_offset, index_offset + n, chunk_size)]

    records: list[TrajectoryRecord] | None = [] if keep_records else None
    if keep_records:
        def work(span):
            return _run_chunk_records(config, engine, initial_index,
                                      master_seed, *span)
    else:
        def work(span):
            return _run_chunk_vectorized(engine, initial_index, master_seed, *span)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, bounds))
    else:
        results = [work(span) for span in bounds]

    ups = sum(res[0] for res in results)
    absorbed = sum(res[1] for res in results)
    if keep_records:
        for res in results:
            records.extend(res[2])

    counts = np.zeros((2, 2), dtype=np.int64)
    counts[0, initial_index] = ups
    counts[1, initial_index] = n - ups
    n_per_initial = np.zeros(2, dtype=np.int64)
    n_per_initial[initial_index] = n
    stats = EnsembleStats(counts, n_per_initial, absorbed,
                          n * config.n_pulses, master_seed)
    return stats, records


def run_ensemble(config: ProtocolConfig, n_per_initial: int, master_seed: int,
                 *, workers: int = 1,
                 chunk_size: int = DEFAULT_CHUNK) -> EnsembleStats:
    """Both initializations with disjoint stream indices ([0,n) and [n,2n))."""
    up, _ = run_trajectories(config, 0, n_per_initial, master_seed,
                             workers=workers, index_offset=0,
                             chunk_size=chunk_size)
    down, _ = run_trajectories(config, 1, n_per_initial, master_seed,
                               workers=workers, index_offset=n_per_initial,
                               chunk_size=chunk_size)
    return up.merge(down)


def fr_estimate_mc(stats: EnsembleStats, config: ProtocolConfig,
                   gamma: float | None = None) -> FrReport:
    """Fluctuation functional from empirical conditional frequencies.

    Gibbs weights are applied as post-weighting; the standard error
    propagates the two independent binomial column estimates.
    """
    cm = stats.conditional_estimate()  # raises if a column is missing
    if gamma is None:
        gamma = config.thermal.beta - config.thermal.beta_r
    dist = energy_change_distribution(cm, config)
    value = fr_functional(dist, gamma)

    eig0 = instantaneous_eigensystem(config.drive, 0.0)
    eigf = instantaneous_eigensystem(config.drive, config.t_f)
    weights = initial_probabilities(config)
    variance = 0.0
    for i, e_i in enumerate((eig0.e_plus, eig0.e_minus)):
        spread = (np.exp(-gamma * (eigf.e_plus - e_i))
                  - np.exp(-gamma * (eigf.e_minus - e_i)))
        p = stats.column_estimate(i)
        n_i = float(stats.n_per_initial[i])
        variance += (weights[i] * spread) ** 2 * p * (1.0 - p) / n_i
    return FrReport(mean_delta_e=dist.mean(), fr_value=value,
                    fr_target=fr_target(config), gamma=gamma,
                    std_err=float(np.sqrt(variance)))


def mean_energy_mc(stats: EnsembleStats,
                   config: ProtocolConfig) -> tuple[float, float]:
    """Empirical <dE> with its propagated binomial standard error."""
    cm = stats.conditional_estimate()
    dist = energy_change_distribution(cm, config)
    eig0 = instantaneous_eigensystem(config.drive, 0.0)
    eigf = instantaneous_eigensystem(config.drive, config.t_f)
    weights = initial_probabilities(config)
    spread = eigf.e_plus - eigf.e_minus
    variance = 0.0
    for i in (0, 1):
        p = stats.column_estimate(i)
        n_i = float(stats.n_per_initial[i])
        variance += (weights[i] * spread) ** 2 * p * (1.0 - p) / n_i
    return dist.mean(), float(np.sqrt(variance))
