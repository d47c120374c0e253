"""Exact one-step transition matrices for the grid samplers.

Restricted to one-dimensional targets with an enumerable state count; used to
verify reversibility and stationarity against closed-form linear algebra
rather than simulation. Assembly runs in log space so that detailed-balance
flows agree to the last few ulps.
"""
from __future__ import annotations

import math

import numpy as np

from ._kernels import _log_cell_mass, _log_interval_mass
from .chain import TransitionMatrix
from .errors import ShapeError
from .samplers import ProposalSpec
from .targets import EnergyTarget


def _require_line(target: EnergyTarget) -> int:
    if target.space.dims != 1:
        raise ShapeError("exact kernels are available for 1-d targets only")
    return int(target.space.n_points[0])


def _log_pi(target: EnergyTarget) -> np.ndarray:
    e = target.tempered_table()
    lo = float(e.min())
    lse = -lo + math.log(float(np.exp(-(e - lo)).sum()))
    return -e - lse


def enumerate_mh_cube(target: EnergyTarget, proposal: ProposalSpec) -> TransitionMatrix:
    """Exact Metropolis kernel for the symmetric cube proposal on a line."""
    n = _require_line(target)
    k_max = proposal.cube_cells(target.space)
    q = 1.0 / (2 * k_max + 1)
    lp = _log_pi(target)
    P = np.zeros((n, n))
    for i in range(n):
        total = 0.0
        for delta in range(-k_max, k_max + 1):
            j = i + delta
            if delta == 0 or j < 0 or j >= n:
                continue
            P[i, j] = q * math.exp(min(0.0, lp[j] - lp[i]))
            total += P[i, j]
        P[i, i] = 1.0 - total
    return TransitionMatrix(P)


def enumerate_mh_truncnorm(
    target: EnergyTarget, proposal: ProposalSpec
) -> TransitionMatrix:
    """Exact Metropolis kernel for the snapped truncated-normal proposal.

    The proposal mass on grid index j from value x is the normal interval over
    j's snap cell divided by the domain mass; with proposal.corrected the
    acceptance ratio includes those masses both ways.
    """
    n = _require_line(target)
    space = target.space
    lower = float(space.lower[0])
    upper = lower + space.width * (n - 1)
    sigma = proposal.sigma
    x = space.axis_values(0)
    lp = _log_pi(target)
    lm = np.empty((n, n))
    for i in range(n):
        log_z = _log_interval_mass((lower - x[i]) / sigma, (upper - x[i]) / sigma)
        for j in range(n):
            lm[i, j] = (
                _log_cell_mass(j, lower, upper, space.width, n, x[i], sigma) - log_z
            )
    P = np.zeros((n, n))
    for i in range(n):
        total = 0.0
        for j in range(n):
            if j == i:
                continue
            if proposal.corrected:
                gain = (lp[j] + lm[j, i]) - (lp[i] + lm[i, j])
            else:
                gain = lp[j] - lp[i]
            P[i, j] = math.exp(lm[i, j] + min(0.0, gain))
            total += P[i, j]
        P[i, i] = 1.0 - total
    return TransitionMatrix(P)


def _shrinkage_law(
    lo: int, hi: int, c: int, inslice: np.ndarray, memo: dict
) -> np.ndarray:
    """Landing distribution of shrinkage started on [lo, hi] around c."""
    key = (lo, hi)
    got = memo.get(key)
    if got is not None:
        return got
    n = inslice.shape[0]
    p = np.zeros(n)
    w = 1.0 / (hi - lo + 1)
    for cand in range(lo, hi + 1):
        if cand == c or inslice[cand]:
            p[cand] += w
        elif cand < c:
            p += w * _shrinkage_law(cand + 1, hi, c, inslice, memo)
        else:
            p += w * _shrinkage_law(lo, cand - 1, c, inslice, memo)
    memo[key] = p
    return p


def _expand_blocks(
    b0: int, n: int, s: int, inslice: np.ndarray, left: int, right: int
) -> tuple[int, int]:
    """Block stepping-out exactly as the sampling kernel performs it: a block
    joins the bracket only when both its end cells lie in the slice. Negative
    budgets mean unlimited."""
    r_lo = max(0, b0)
    r_hi = min(n - 1, b0 + s - 1)
    bb = b0 - s
    while bb + s - 1 >= 0:
        if left == 0:
            break
        lo_cell = max(0, bb)
        hi_cell = bb + s - 1
        if not (inslice[lo_cell] and inslice[hi_cell]):
            break
        r_lo = lo_cell
        bb -= s
        if left > 0:
            left -= 1
    bt = b0 + s
    while bt <= n - 1:
        if right == 0:
            break
        lo_cell = bt
        hi_cell = min(n - 1, bt + s - 1)
        if not (inslice[lo_cell] and inslice[hi_cell]):
            break
        r_hi = hi_cell
        bt += s
        if right > 0:
            right -= 1
    return r_lo, r_hi


def enumerate_slice(target: EnergyTarget, proposal: ProposalSpec) -> TransitionMatrix:
    """Exact one-update slice kernel on a line.

    Marginalizes the exponential slice threshold over the energy bands between
    consecutive distinct levels, the uniform block residue, the stepping-out
    budget split when finite, and the shrinkage recursion. Updates where an
    end cell of the start's own block falls outside the slice stay put, per
    the sampling kernel.
    """
    n = _require_line(target)
    s = proposal.slice_cells(target.space)
    budget = proposal.max_expansions
    e = target.tempered_table()
    P = np.zeros((n, n))
    for c in range(n):
        e_c = float(e[c])
        levels = sorted(set(float(v) for v in e if v > e_c))
        edges = [e_c] + levels
        row = np.zeros(n)
        for b, thr in enumerate(edges):
            p_low = math.exp(-(edges[b] - e_c))
            p_high = math.exp(-(edges[b + 1] - e_c)) if b + 1 < len(edges) else 0.0
            band_p = p_low - p_high
            if band_p <= 0.0:
                continue
            inslice = e <= thr
            law = np.zeros(n)
            for o in range(s):
                r = (c - o) % s
                b0 = c - ((c - r) % s)
                lo0 = max(0, b0)
                hi0 = min(n - 1, b0 + s - 1)
                if not (inslice[lo0] and inslice[hi0]):
                    law[c] += 1.0 / s
                    continue
                if budget >= 0:
                    for left in range(budget + 1):
                        lo, hi = _expand_blocks(
                            b0, n, s, inslice, left, budget - left
                        )
                        memo: dict = {}
                        law += _shrinkage_law(lo, hi, c, inslice, memo) / (
                            s * (budget + 1)
                        )
                else:
                    lo, hi = _expand_blocks(b0, n, s, inslice, -1, -1)
                    memo = {}
                    law += _shrinkage_law(lo, hi, c, inslice, memo) / s
            row += band_p * law
        P[c] = row
    return TransitionMatrix(P)


def one_step_kernel(target: EnergyTarget, proposal: ProposalSpec) -> TransitionMatrix:
    """Exact kernel of a single update of the configured sampler.

    For univariate samplers this is one coordinate update, which is the
    reversible building block; full sweeps compose these and need not satisfy
    detailed balance themselves.
    """
    if proposal.kind == "cube":
        return enumerate_mh_cube(target, proposal)
    if proposal.kind == "truncnorm":
        return enumerate_mh_truncnorm(target, proposal)
    return enumerate_slice(target, proposal)


def sample_matrix_chain(
    P: TransitionMatrix, start: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Simulate n transitions of a finite chain; returns visited states, start
    excluded."""
    if not (0 <= start < P.m):
        raise ValueError(f"start {start} outside 0..{P.m - 1}")
    cum = np.cumsum(P.entries, axis=1)
    out = np.empty(n, dtype=np.int64)
    from ._kernels import run_matrix_chain

    run_matrix_chain(cum, start, out, rng)
    return out
