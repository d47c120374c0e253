"""Grid samplers: Metropolis (block cube, univariate truncated-normal) and
univariate slice sampling, plus chain-running helpers."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .chain import ChainTrace
from .errors import OutOfDomainError
from .grid import GridSpace
from .targets import EnergyTarget

MAX_CHAIN_ITERS = 10_000_000

_KINDS = ("cube", "truncnorm", "slice")


@dataclass(frozen=True)
class ProposalSpec:
    """Proposal configuration for one sampler family.

    kind "cube": symmetric block move; width is the cube side in value units,
    so every coordinate shifts by a uniform offset in {-K..K} cells with
    K = floor(width / (2 * grid_width)).

    kind "truncnorm": one-coordinate normal proposal with sd sigma, truncated
    to the axis range and snapped to the grid; corrected=True keeps the
    snap-cell masses in the acceptance ratio (exact reversibility),
    corrected=False uses the bare energy ratio.

    kind "slice": univariate slice sampling; interval is the initial bracket
    in value units, max_expansions < 0 means unlimited stepping-out.

    updates_per_iter univariate updates make up one recorded iteration for
    truncnorm and slice; cube records every block move.
    """

    kind: str
    width: float = 1.0
    sigma: float = 1.0
    interval: float = 1.0
    corrected: bool = True
    updates_per_iter: int = 1
    max_expansions: int = -1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown proposal kind {self.kind!r}")
        if self.kind == "cube" and not (self.width > 0):
            raise ValueError("cube width must be positive")
        if self.kind == "truncnorm" and not (self.sigma > 0):
            raise ValueError("sigma must be positive")
        if self.kind == "slice" and not (self.interval > 0):
            raise ValueError("slice interval must be positive")
        if self.updates_per_iter < 1:
            raise ValueError("updates_per_iter must be at least 1")

    def cube_cells(self, space: GridSpace) -> int:
        """Max per-coordinate offset in cells; at least one cell required."""
        k = int(math.floor(self.width / (2.0 * space.width) + 1e-9))
        if k < 1:
            raise ValueError(
                f"cube width {self.width} spans less than one cell of {space.width}"
            )
        return k

    def slice_cells(self, space: GridSpace) -> int:
        """Initial bracket size in cells, never below one."""
        return max(1, int(round(self.interval / space.width)))


def random_state(space: GridSpace, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random per-dimension indices."""
    return np.array(
        [rng.integers(0, int(n)) for n in space.n_points], dtype=np.int64
    )


def _check_state(space: GridSpace, state) -> np.ndarray:
    multi = np.asarray(state, dtype=np.int64).copy()
    if multi.shape != (space.dims,):
        raise OutOfDomainError(f"state needs {space.dims} indices, got {multi.shape}")
    if not space.contains_multi(multi):
        raise OutOfDomainError(f"state {multi.tolist()} outside the grid")
    return multi


def _dispatch(
    target: EnergyTarget,
    proposal: ProposalSpec,
    state: np.ndarray,
    out: np.ndarray,
    rng: np.random.Generator,
    start_counter: int = 0,
    n_updates: int | None = None,
) -> int:
    """Run the matching kernel in place; returns its accept/move count."""
    space = target.space
    energy = target.kernel_energy()
    temp = target.temperature
    n_points = np.asarray(space.n_points, dtype=np.int64)
    updates = proposal.updates_per_iter if n_updates is None else n_updates
    if proposal.kind == "cube":
        return int(
            _kernels.run_mh_cube(
                energy, temp, state, n_points, proposal.cube_cells(space), out, rng
            )
        )
    if proposal.kind == "truncnorm":
        return int(
            _kernels.run_mh_truncnorm(
                energy,
                temp,
                state,
                n_points,
                np.asarray(space.lower, dtype=float),
                space.width,
                proposal.sigma,
                updates,
                start_counter,
                proposal.corrected,
                out,
                rng,
            )
        )
    return int(
        _kernels.run_slice(
            energy,
            temp,
            state,
            n_points,
            proposal.slice_cells(space),
            proposal.max_expansions,
            updates,
            start_counter,
            out,
            rng,
        )
    )


def mh_step(
    target: EnergyTarget,
    state,
    proposal: ProposalSpec,
    rng: np.random.Generator,
    coord: int = 0,
) -> tuple[np.ndarray, bool]:
    """One Metropolis step; truncnorm updates the given coordinate.

    Returns the next state (a new array) and whether the proposal was accepted.
    """
    if proposal.kind == "slice":
        raise ValueError("use slice_step_univariate for slice proposals")
    multi = _check_state(target.space, state)
    out = np.empty((1, target.space.dims), dtype=np.int64)
    acc = _dispatch(
        target, proposal, multi, out, rng, start_counter=coord, n_updates=1
    )
    return out[0].copy(), acc == 1


def slice_step_univariate(
    target: EnergyTarget,
    state,
    coord: int,
    proposal: ProposalSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """One slice update of the given coordinate; returns the next state."""
    if proposal.kind != "slice":
        raise ValueError(f"expected a slice proposal, got {proposal.kind!r}")
    multi = _check_state(target.space, state)
    out = np.empty((1, target.space.dims), dtype=np.int64)
    _dispatch(target, proposal, multi, out, rng, start_counter=coord, n_updates=1)
    return out[0].copy()


def sweep(
    target: EnergyTarget,
    state,
    proposal: ProposalSpec,
    rng: np.random.Generator,
) -> tuple[np.ndarray, int]:
    """One pass over all coordinates for univariate kinds (one block move for
    cube); returns the next state and the accept/move count."""
    multi = _check_state(target.space, state)
    out = np.empty((1, target.space.dims), dtype=np.int64)
    updates = 1 if proposal.kind == "cube" else target.space.dims
    count = _dispatch(target, proposal, multi, out, rng, n_updates=updates)
    return out[0].copy(), count


def run_chain(
    target: EnergyTarget,
    init,
    proposal: ProposalSpec,
    n: int,
    rng: np.random.Generator,
    burn_in: int = 0,
    seed: int | None = None,
) -> ChainTrace:
    """Run one chain and return its trace.

    The trace holds burn_in + n states with the initial state in row 0, so
    burn_in + n - 1 transitions are simulated; retained() drops the first
    burn_in rows.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    total = burn_in + n
    if total > MAX_CHAIN_ITERS:
        raise ValueError(f"{total} states exceeds the {MAX_CHAIN_ITERS} cap")
    multi = _check_state(target.space, init)
    init_row = multi.copy()
    iters = total - 1
    out = np.empty((iters, target.space.dims), dtype=np.int64)
    accepted = _dispatch(target, proposal, multi, out, rng) if iters else 0
    states = np.vstack([init_row[None, :], out]) if iters else init_row[None, :]
    meta = {
        "kind": proposal.kind,
        "accepted": accepted,
        "temperature": target.temperature,
    }
    if seed is not None:
        meta["seed"] = int(seed)
    return ChainTrace(space=target.space, states=states, burn_in=burn_in, meta=meta)


def run_parallel_chains(
    target: EnergyTarget,
    inits,
    proposal: ProposalSpec,
    n: int,
    seed: int,
    burn_in: int = 0,
    max_workers: int | None = None,
) -> list[ChainTrace]:
    """Run one chain per initial state on a thread pool.

    Chain i draws from its own generator spawned from SeedSequence(seed), so
    results are reproducible and independent of scheduling; the returned list
    follows the order of inits.
    """
    inits = [_check_state(target.space, init) for init in inits]
    children = np.random.SeedSequence(seed).spawn(len(inits))

    def one(i: int) -> ChainTrace:
        rng = np.random.Generator(np.random.PCG64(children[i]))
        trace = run_chain(target, inits[i], proposal, n, rng, burn_in=burn_in)
        trace.meta["seed"] = int(seed)
        trace.meta["chain"] = i
        return trace

    workers = max_workers or min(len(inits), os.cpu_count() or 1)
    if workers <= 1 or len(inits) <= 1:
        return [one(i) for i in range(len(inits))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(len(inits))))
