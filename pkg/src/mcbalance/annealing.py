"""Simulated annealing with per-temperature equilibrium detection.

Each temperature level samples pi^(1/T_k) (energies E_i/T_k) and watches the
V_n relative difference; the level ends when consecutive checkpoints agree to
epsilon or the iteration guard trips. Occupancy counts reset at each level so
V_n always refers to the current level's stationary law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .chain import ENUMERATION_CAP, EmpiricalCounts
from .diagnostic import DiagnosticSeries, compute_vn, relative_difference_monitor
from .errors import OutOfDomainError
from .samplers import MAX_CHAIN_ITERS, ProposalSpec, _dispatch, random_state
from .targets import EnergyTarget

DEFAULT_MAX_ITER_PER_LEVEL = 100_000


@dataclass(frozen=True)
class CoolingSchedule:
    """Geometric ladder T_k = t0 * ratio^k for k = 0..levels-1."""

    t0: float
    ratio: float
    levels: int

    def __post_init__(self):
        if not (self.t0 > 0):
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if not (0.0 < self.ratio < 1.0):
            raise ValueError(f"ratio must be in (0, 1), got {self.ratio}")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")

    def temperatures(self) -> np.ndarray:
        return self.t0 * self.ratio ** np.arange(self.levels)


@dataclass
class LevelReport:
    temperature: float
    width: float
    iterations: int
    series: DiagnosticSeries
    equilibrated: bool
    accepted: int


@dataclass
class AnnealResult:
    best_state: np.ndarray
    best_values: np.ndarray
    best_energy: float
    final_state: np.ndarray
    levels: list[LevelReport] = field(default_factory=list)

    @property
    def total_iterations(self) -> int:
        return sum(lv.iterations for lv in self.levels)


def _per_level(value, levels: int, name: str) -> list:
    if np.isscalar(value):
        return [value] * levels
    seq = list(value)
    if len(seq) != levels:
        raise ValueError(f"{name} needs one entry per level ({levels}), got {len(seq)}")
    return seq


def anneal(
    target: EnergyTarget,
    schedule: CoolingSchedule,
    proposal: ProposalSpec,
    epsilon,
    checkpoint_n: int,
    max_iter_per_level: int = DEFAULT_MAX_ITER_PER_LEVEL,
    rng: np.random.Generator | None = None,
    init: np.ndarray | None = None,
    widths=None,
) -> AnnealResult:
    """Run the cooling ladder; the final state of each level seeds the next.

    epsilon and widths may be scalars or per-level sequences. The level-k
    checkpoints compare occupancy against exp(-E_i/T_k), so counts restart at
    every level. A level that exhausts max_iter_per_level is flagged
    non-equilibrated and the ladder simply moves on.
    """
    if rng is None:
        rng = np.random.default_rng()
    if checkpoint_n < 1:
        raise ValueError("checkpoint_n must be >= 1")
    if not (1 <= max_iter_per_level <= MAX_CHAIN_ITERS):
        raise ValueError(f"max_iter_per_level outside [1, {MAX_CHAIN_ITERS}]")
    epsilons = _per_level(epsilon, schedule.levels, "epsilon")
    for eps in epsilons:
        if not (eps > 0):
            raise ValueError("epsilon must be positive")
    width_seq = _per_level(
        widths if widths is not None else proposal.width, schedule.levels, "widths"
    )

    space = target.space
    m = space.m
    if m > ENUMERATION_CAP:
        raise OutOfDomainError(f"state count {m} too large for occupancy tracking")
    counts_sizes = np.asarray(space.n_points, dtype=np.int64)
    strides = np.ones_like(counts_sizes)
    if space.dims > 1:
        strides[:-1] = np.cumprod(counts_sizes[::-1])[::-1][1:]

    state = (
        np.array(init, dtype=np.int64).copy()
        if init is not None
        else random_state(space, rng)
    )
    if not space.contains_multi(state):
        raise OutOfDomainError(f"initial state {state} outside the grid")

    best_state = state.copy()
    best_energy = float(target.energy_multi(best_state))

    result = AnnealResult(
        best_state=best_state,
        best_values=space.values(best_state),
        best_energy=best_energy,
        final_state=state,
    )

    for k, temp in enumerate(schedule.temperatures()):
        level_target = target.with_temperature(float(temp))
        level_prop = replace(proposal, width=float(width_seq[k]))
        series = DiagnosticSeries()
        counts = np.zeros(m, dtype=np.int64)
        done = 0
        accepted = 0
        counter = 0
        equilibrated = False
        while done < max_iter_per_level:
            chunk = min(checkpoint_n, max_iter_per_level - done)
            out = np.empty((chunk, space.dims), dtype=np.int64)
            accepted += _dispatch(
                level_target, level_prop, state, out, rng, start_counter=counter
            )
            counter += chunk * level_prop.updates_per_iter
            done += chunk
            flat = (out * strides[None, :]).sum(axis=1)
            counts += np.bincount(flat, minlength=m)
            energies = target.energy_batch(out)
            j = int(np.argmin(energies))
            if energies[j] < result.best_energy:
                result.best_energy = float(energies[j])
                result.best_state = out[j].copy()
                result.best_values = space.values(out[j])
            vn, st = compute_vn(EmpiricalCounts(counts=counts, n=done), level_target)
            cp = series.append(done, vn, st.log_vn)
            stop = relative_difference_monitor(series, epsilons[k])
            cp.decision = "stop" if stop else "continue"
            if stop:
                equilibrated = True
                break
        result.levels.append(
            LevelReport(
                temperature=float(temp),
                width=float(width_seq[k]),
                iterations=done,
                series=series,
                equilibrated=equilibrated,
                accepted=accepted,
            )
        )
    result.final_state = state.copy()
    return result


def grid_search_minimum(target: EnergyTarget) -> tuple[int, float]:
    """Exact argmin of the energy over every grid state; ties go to the
    smallest flat index."""
    table = target.energy_table()
    idx = int(np.argmin(table))
    return idx, float(table[idx])
