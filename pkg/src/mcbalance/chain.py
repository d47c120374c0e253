"""Finite-chain building blocks: transition matrices, traces, empirical counts,
and structural checks (detailed balance, stationarity, autocorrelation).

Explicit TransitionMatrix objects are oracle-path tools for small state counts;
production chains never materialize one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import (
    DegenerateVarianceError,
    EmptyTraceError,
    NoUniqueStationaryError,
    OutOfDomainError,
    ShapeError,
)
from .grid import GridSpace

_ROW_TOL = 1e-12
# Dense per-state arrays stop being reasonable around here.
ENUMERATION_CAP = 100_000_000


class TransitionMatrix:
    """Row-stochastic one-step matrix over m states."""

    def __init__(self, entries):
        P = np.asarray(entries, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ShapeError(f"transition matrix must be square, got {P.shape}")
        if np.any(P < -1e-15) or np.any(P > 1 + 1e-15):
            raise ValueError("transition probabilities must lie in [0, 1]")
        rows = P.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > _ROW_TOL):
            worst = int(np.argmax(np.abs(rows - 1.0)))
            raise ValueError(f"row {worst} sums to {rows[worst]!r}, not 1")
        self.entries = np.clip(P, 0.0, 1.0)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        return self.entries @ (other.entries if isinstance(other, TransitionMatrix) else other)


@dataclass
class ChainTrace:
    """Ordered record of visited states (per-dimension indices, one row per state).

    The first row is the initial state. burn_in counts leading states that
    consumers should drop; it is recorded here, not applied.
    """

    space: GridSpace
    states: np.ndarray  # (n_recorded, dims) int64
    burn_in: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.int64)
        if self.states.ndim != 2 or self.states.shape[1] != self.space.dims:
            raise ShapeError(
                f"states must be (n, {self.space.dims}), got {self.states.shape}"
            )
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if np.any(self.states < 0) or np.any(self.states >= self.space.n_points):
            raise OutOfDomainError("trace contains indices outside the grid")

    def __len__(self) -> int:
        return self.states.shape[0]

    def retained(self) -> np.ndarray:
        """States after burn-in removal."""
        return self.states[self.burn_in:]

    def coordinate_values(self, dim: int) -> np.ndarray:
        """Decoded grid values of one coordinate over the whole trace."""
        return self.space.lower[dim] + self.space.width * self.states[:, dim]

    def flat_indices(self) -> Iterator[int]:
        """Row-major flat index per recorded state (Python ints; may be huge)."""
        radices = [int(n) for n in self.space.n_points]
        for row in self.states:
            flat = 0
            for k, n in enumerate(radices):
                flat = flat * n + int(row[k])
            yield flat

    # -- serialization: header line then one flat index per line -------------------

    def save(self, path) -> None:
        meta = self.meta
        with open(path, "w") as fh:
            fh.write(
                f"# dims={self.space.dims} width={self.space.width!r} "
                f"seed={meta.get('seed', 0)} burn_in={self.burn_in}\n"
            )
            for flat in self.flat_indices():
                fh.write(f"{flat}\n")

    @staticmethod
    def load(path, space: GridSpace) -> "ChainTrace":
        with open(path) as fh:
            header = fh.readline()
            if not header.startswith("#"):
                raise ValueError(f"{path}: missing trace header")
            fields = dict(tok.split("=", 1) for tok in header[1:].split())
            if int(fields["dims"]) != space.dims:
                raise ShapeError(
                    f"{path}: trace dims {fields['dims']} != space dims {space.dims}"
                )
            if abs(float(fields["width"]) - space.width) > 1e-12:
                raise ValueError(f"{path}: trace width {fields['width']} != space width")
            flats = [int(line) for line in fh if line.strip()]
        states = np.empty((len(flats), space.dims), dtype=np.int64)
        for r, flat in enumerate(flats):
            states[r] = space.decode_multi(flat)
        return ChainTrace(
            space=space,
            states=states,
            burn_in=int(fields["burn_in"]),
            meta={"seed": int(fields["seed"])},
        )


@dataclass
class EmpiricalCounts:
    """Visit counts over an enumerated state axis and the draws total n."""

    counts: np.ndarray
    n: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")
        if int(self.counts.sum()) != self.n:
            raise ValueError(f"counts sum {int(self.counts.sum())} != n {self.n}")

    @property
    def pi_hat(self) -> np.ndarray:
        return self.counts / self.n


def accumulate(trace: ChainTrace) -> EmpiricalCounts:
    """Visit counts over flat states, after burn-in removal.

    Requires the full state count to be enumerable; use accumulate_marginal for
    product spaces too large to index densely.
    """
    kept = trace.retained()
    if kept.shape[0] == 0:
        raise EmptyTraceError("no draws remain after burn-in removal")
    m = trace.space.m
    if m > ENUMERATION_CAP:
        raise OutOfDomainError(
            f"state count {m} too large for dense counts; use accumulate_marginal"
        )
    radices = trace.space.n_points.astype(np.int64)
    flat = kept[:, 0].astype(np.int64)
    for k in range(1, trace.space.dims):
        flat = flat * radices[k] + kept[:, k]
    counts = np.bincount(flat, minlength=m)
    return EmpiricalCounts(counts=counts.astype(np.int64), n=kept.shape[0])


def accumulate_marginal(trace: ChainTrace, dim: int) -> EmpiricalCounts:
    """Visit counts of a single coordinate's indices, after burn-in removal."""
    kept = trace.retained()
    if kept.shape[0] == 0:
        raise EmptyTraceError("no draws remain after burn-in removal")
    n_pts = int(trace.space.n_points[dim])
    counts = np.bincount(kept[:, dim], minlength=n_pts)
    return EmpiricalCounts(counts=counts.astype(np.int64), n=kept.shape[0])


def check_detailed_balance(P: TransitionMatrix, pi, tol: float):
    """Max |pi_i p_ij - pi_j p_ji| against tol.

    Returns (balanced, (i, j), gap) with (i, j) the worst pair.
    """
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (P.m,):
        raise ShapeError(f"pi has shape {pi.shape}, expected ({P.m},)")
    if abs(pi.sum() - 1.0) > max(tol, _ROW_TOL):
        raise ValueError(f"pi sums to {pi.sum()!r}, not 1")
    flow = pi[:, None] * P.entries
    gaps = np.abs(flow - flow.T)
    ij = np.unravel_index(np.argmax(gaps), gaps.shape)
    gap = float(gaps[ij])
    return gap <= tol, (int(ij[0]), int(ij[1])), gap


def stationary_distribution(P: TransitionMatrix) -> np.ndarray:
    """Solve pi P = pi, sum(pi) = 1 by a dense linear solve.

    Residual above 1e-10 (or a singular system) raises NoUniqueStationaryError.
    Oracle path: intended for small m.
    """
    m = P.m
    A = P.entries.T - np.eye(m)
    A[-1, :] = 1.0  # replace one redundant equation with the normalization
    b = np.zeros(m)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NoUniqueStationaryError(f"stationary solve failed: {exc}") from exc
    residual = float(np.max(np.abs(pi @ P.entries - pi)))
    if not np.isfinite(residual) or residual > 1e-10:
        raise NoUniqueStationaryError(f"stationary residual {residual:.3e} > 1e-10")
    if np.any(pi < -1e-12):
        raise NoUniqueStationaryError("stationary solve produced negative mass")
    # a reducible chain can hand the solver one of its many stationary vectors
    # with a tiny residual; uniqueness needs eigenvalue 1 to be simple
    ones = int(np.sum(np.abs(np.linalg.eigvals(P.entries) - 1.0) < 1e-8))
    if ones != 1:
        raise NoUniqueStationaryError(
            f"eigenvalue 1 has multiplicity {ones}; chain is reducible"
        )
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags 0..max_lag with the biased (1/n) norm.

    The biased estimator keeps the sequence positive semidefinite, the usual
    choice for MCMC output. Lag 0 is exactly 1.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ShapeError(f"series must be 1-d, got shape {x.shape}")
    n = x.shape[0]
    if max_lag < 1 or n <= max_lag:
        raise ValueError(f"need series length > max_lag >= 1, got n={n}, max_lag={max_lag}")
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom <= 0.0 or not np.isfinite(denom):
        raise DegenerateVarianceError("series variance is zero")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(np.dot(x[:-k], x[k:])) / denom
    return out
