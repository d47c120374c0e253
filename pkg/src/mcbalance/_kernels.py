"""Hot sampling loops, compiled when the numba backend is active.

Every kernel is a module-level function taking the target's energy callable
(itself jit-compiled under numba) plus plain arrays and scalars, so each
(kernel, target-class) pair compiles once and is reused across temperatures,
proposal widths, and chains. The pure-python fallback runs the identical
source, which keeps random streams bit-identical across backends.
"""
from __future__ import annotations

import math

import numpy as np

from ._jit import maybe_jit

_SQRT2 = math.sqrt(2.0)


@maybe_jit
def _log_interval_mass(a, b):
    """log P(a < Z <= b) for standard normal Z, stable far into either tail."""
    if b <= a:
        return -np.inf
    if a >= 0.0:
        val = 0.5 * (math.erfc(a / _SQRT2) - math.erfc(b / _SQRT2))
    elif b <= 0.0:
        val = 0.5 * (math.erfc(-b / _SQRT2) - math.erfc(-a / _SQRT2))
    else:
        val = 0.5 * (math.erf(b / _SQRT2) - math.erf(a / _SQRT2))
    if val <= 0.0:
        return -np.inf
    return math.log(val)


@maybe_jit
def _snap(v, lower, width, n):
    """Nearest grid index for a value inside the axis range.

    Ties at cell midpoints go to the neighbor with the larger absolute grid
    value; must stay in lockstep with GridSpace.snap_index.
    """
    t = (v - lower) / width
    i0 = int(math.floor(t))
    if i0 >= n - 1:
        return n - 1
    if i0 < 0:
        return 0
    frac = t - i0
    if frac > 0.5:
        return i0 + 1
    if frac < 0.5:
        return i0
    v0 = lower + i0 * width
    v1 = v0 + width
    if abs(v1) > abs(v0):
        return i0 + 1
    return i0


@maybe_jit
def _log_cell_mass(j, lower, upper, width, n, center, sigma):
    """log proposal mass landing on grid index j: the normal interval over j's
    snap preimage, clipped to the domain at the edge cells. Unnormalized (the
    domain truncation constant is applied by the caller)."""
    c_val = lower + j * width
    lo = lower if j == 0 else c_val - 0.5 * width
    hi = upper if j == n - 1 else c_val + 0.5 * width
    return _log_interval_mass((lo - center) / sigma, (hi - center) / sigma)


@maybe_jit
def run_mh_cube(energy, temp, state, n_points, k_max, out, rng):
    """Metropolis block moves: every coordinate shifts by a uniform offset in
    {-k_max..k_max}; proposals leaving the grid are rejected. Records one state
    per move into out (n_iters, dims) and returns the acceptance count."""
    d = state.shape[0]
    n_iters = out.shape[0]
    prop = np.empty(d, dtype=np.int64)
    e_cur = energy(state) / temp
    acc = 0
    for t in range(n_iters):
        ok = True
        for k in range(d):
            prop[k] = state[k] + rng.integers(-k_max, k_max + 1)
            if prop[k] < 0 or prop[k] >= n_points[k]:
                ok = False
        if ok:
            e_prop = energy(prop) / temp
            if e_prop <= e_cur or rng.random() < math.exp(e_cur - e_prop):
                for k in range(d):
                    state[k] = prop[k]
                e_cur = e_prop
                acc += 1
        for k in range(d):
            out[t, k] = state[k]
    return acc


@maybe_jit
def run_mh_truncnorm(
    energy,
    temp,
    state,
    n_points,
    lowers,
    width,
    sigma,
    n_updates,
    start_counter,
    corrected,
    out,
    rng,
):
    """Metropolis with single-coordinate truncated-normal proposals.

    Coordinates cycle with a persistent counter; each recorded iteration is
    n_updates univariate updates. The proposal draws a value from the normal
    centred at the current coordinate truncated to the axis range, then snaps
    it to the grid. With corrected=True the acceptance ratio uses the snapped
    cell masses in both directions, which restores exact reversibility on the
    grid; corrected=False uses the plain energy ratio.
    """
    d = state.shape[0]
    n_iters = out.shape[0]
    counter = start_counter
    e_cur = energy(state) / temp
    acc = 0
    for t in range(n_iters):
        for _u in range(n_updates):
            k = counter % d
            counter += 1
            n_k = n_points[k]
            lower = lowers[k]
            upper = lower + width * (n_k - 1)
            i_old = state[k]
            x = lower + width * i_old
            while True:
                v = x + sigma * rng.standard_normal()
                if lower <= v <= upper:
                    break
            j = _snap(v, lower, width, n_k)
            state[k] = j
            e_prop = energy(state) / temp
            log_r = e_cur - e_prop
            if corrected:
                y = lower + width * j
                log_r += _log_cell_mass(i_old, lower, upper, width, n_k, y, sigma)
                log_r -= _log_interval_mass((lower - y) / sigma, (upper - y) / sigma)
                log_r -= _log_cell_mass(j, lower, upper, width, n_k, x, sigma)
                log_r += _log_interval_mass((lower - x) / sigma, (upper - x) / sigma)
            if log_r >= 0.0 or rng.random() < math.exp(log_r):
                e_cur = e_prop
                acc += 1
            else:
                state[k] = i_old
        for k in range(d):
            out[t, k] = state[k]
    return acc


@maybe_jit
def run_slice(
    energy,
    temp,
    state,
    n_points,
    s_cells,
    max_expansions,
    n_updates,
    start_counter,
    out,
    rng,
):
    """Univariate slice sampling on the grid with stepping-out and shrinkage.

    The axis is partitioned into blocks of s_cells aligned at a uniformly
    random residue. Both end cells of the block holding the current state must
    lie in the slice, or the update stays put; stepping-out then extends the
    bracket a block at a time while both end cells of the next block lie in
    the slice, and shrinkage samples uniformly over the verified block range.
    Verifying block ends this way makes the bracket law identical from every
    in-slice state it covers, which is what gives the one-update kernel exact
    reversibility; naive endpoint stepping on a lattice loses that property.

    max_expansions < 0 means unlimited stepping-out (the grid boundary
    terminates); otherwise the budget is split uniformly at random between the
    two sides. Returns the count of updates that moved the coordinate.
    """
    d = state.shape[0]
    n_iters = out.shape[0]
    counter = start_counter
    moves = 0
    for t in range(n_iters):
        for _u in range(n_updates):
            k = counter % d
            counter += 1
            n_k = n_points[k]
            c = state[k]
            e_c = energy(state) / temp
            v_star = e_c - math.log1p(-rng.random())
            o = rng.integers(0, s_cells)
            r = (c - o) % s_cells
            if r < 0:
                r += s_cells
            off = (c - r) % s_cells
            if off < 0:
                off += s_cells
            b0 = c - off
            lo0 = b0 if b0 > 0 else 0
            hi0 = b0 + s_cells - 1
            if hi0 > n_k - 1:
                hi0 = n_k - 1
            state[k] = lo0
            ok = energy(state) / temp <= v_star
            if ok:
                state[k] = hi0
                ok = energy(state) / temp <= v_star
            state[k] = c
            if not ok:
                continue
            if max_expansions >= 0:
                left_budget = rng.integers(0, max_expansions + 1)
                right_budget = max_expansions - left_budget
            else:
                left_budget = -1
                right_budget = -1
            r_lo = lo0
            r_hi = hi0
            bb = b0 - s_cells
            while bb + s_cells - 1 >= 0:
                if left_budget == 0:
                    break
                lo_cell = bb if bb > 0 else 0
                hi_cell = bb + s_cells - 1
                state[k] = lo_cell
                good = energy(state) / temp <= v_star
                if good:
                    state[k] = hi_cell
                    good = energy(state) / temp <= v_star
                if not good:
                    break
                r_lo = lo_cell
                bb -= s_cells
                if left_budget > 0:
                    left_budget -= 1
            bt = b0 + s_cells
            while bt <= n_k - 1:
                if right_budget == 0:
                    break
                lo_cell = bt
                hi_cell = bt + s_cells - 1
                if hi_cell > n_k - 1:
                    hi_cell = n_k - 1
                state[k] = lo_cell
                good = energy(state) / temp <= v_star
                if good:
                    state[k] = hi_cell
                    good = energy(state) / temp <= v_star
                if not good:
                    break
                r_hi = hi_cell
                bt += s_cells
                if right_budget > 0:
                    right_budget -= 1
            state[k] = c
            lo_s = r_lo
            hi_s = r_hi
            while lo_s <= hi_s:
                cand = rng.integers(lo_s, hi_s + 1)
                if cand == c:
                    break
                state[k] = cand
                if energy(state) / temp <= v_star:
                    moves += 1
                    break
                state[k] = c
                if cand < c:
                    lo_s = cand + 1
                else:
                    hi_s = cand - 1
        for k in range(d):
            out[t, k] = state[k]
    return moves


@maybe_jit
def run_matrix_chain(cum_rows, state, out, rng):
    """Simulate a finite chain from cumulative row sums; fills out with the
    visited states (start excluded) and returns the final state."""
    n_iters = out.shape[0]
    m = cum_rows.shape[0]
    s = state
    for t in range(n_iters):
        u = rng.random()
        j = 0
        while j < m - 1 and cum_rows[s, j] <= u:
            j += 1
        s = j
        out[t] = s
    return s
