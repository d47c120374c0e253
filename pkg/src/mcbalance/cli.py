"""Command-line experiment orchestration.

Verbs: `run` (qualitative chain runs, single or parallel, with the
relative-difference stopping rule), `test` (quantitative stationarity test
with the n-doubling protocol), `anneal` (cooling ladder), `compare`
(efficiency ratio of two sampler configs). All outputs are plain
delimiter-separated files, pure functions of (config, seed).

Exit codes: 0 success, 2 config error, 3 not converged within budget,
4 internal numerical failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import __version__
from .annealing import CoolingSchedule, anneal
from .chain import ENUMERATION_CAP, ChainTrace, EmpiricalCounts
from .diagnostic import (
    DiagnosticSeries,
    compute_vn,
    relative_difference_monitor,
    sigma_full_analytic,
    sigma_iid,
    sigma_plugin,
    stationarity_test,
)
from .enumeration import one_step_kernel
from .errors import (
    ConfigError,
    DegenerateNullError,
    McbalanceError,
    NotConvergedError,
    NumericalConsistencyError,
)
from .grid import GridSpace
from .presets import get_preset, list_presets
from .samplers import MAX_CHAIN_ITERS, ProposalSpec, _dispatch, random_state
from .targets import (
    ChangepointDataset,
    ChangepointTarget,
    EnergyTarget,
    FunnelSpec,
    FunnelTarget,
    simulate_changepoint,
    toy_targets,
)

QUANTITATIVE_STATE_CAP = 2000

_SECTIONS = {
    "target",
    "sampler",
    "sampler-a",
    "sampler-b",
    "diagnostic",
    "schedule",
    "chains",
    "run",
    "compare",
}


# -- config plumbing -------------------------------------------------------------------


def load_config(preset: str | None, path: str | None) -> dict[str, dict[str, str]]:
    """Preset sections overlaid by the config file, file keys winning."""
    merged: dict[str, dict[str, str]] = {}
    if preset is not None:
        merged = get_preset(preset)
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as fh:
                parser.read_file(fh, source=path)
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        for sec in parser.sections():
            if sec not in _SECTIONS:
                raise ConfigError(
                    f"{path}: unknown section [{sec}]; expected one of "
                    + ", ".join(sorted(_SECTIONS))
                )
            merged.setdefault(sec, {}).update(dict(parser[sec]))
    return merged


def _get(cfg, section: str, key: str, default=None, cast=str):
    raw = cfg.get(section, {}).get(key)
    if raw is None:
        return default
    try:
        if cast is bool:
            low = str(raw).strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: expected {cast.__name__}") from exc


def _get_floats(cfg, section: str, key: str, default=None):
    raw = cfg.get(section, {}).get(key)
    if raw is None:
        return default
    try:
        return [float(tok) for tok in str(raw).split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: expected comma-separated reals") from exc


def build_target(cfg) -> EnergyTarget:
    kind = _get(cfg, "target", "kind")
    if kind is None:
        raise ConfigError("[target] kind is required")
    toys = toy_targets()
    if kind in toys:
        target = toys[kind]
    elif kind == "uniform":
        m = _get(cfg, "target", "m", 8, int)
        target = toys["uniform-8"] if m == 8 else _uniform(m)
    elif kind == "changepoint":
        data = _changepoint_data(cfg)
        target = ChangepointTarget(
            data,
            width=_get(cfg, "target", "grid_width", 0.1, float),
            bound=_get(cfg, "target", "bound", 10.0, float),
        )
    elif kind in ("funnel", "funnel-marginal"):
        spec = FunnelSpec(
            x_sd=_get(cfg, "target", "x_sd", 3.0, float),
            dims=_get(cfg, "target", "dims", 10, int),
            bound=_get(cfg, "target", "bound", 30.0, float),
            width=_get(cfg, "target", "width", 0.01, float),
        )
        funnel = FunnelTarget(spec)
        target = funnel.marginal_x_target() if kind == "funnel-marginal" else funnel
    else:
        raise ConfigError(f"[target] kind = {kind!r} is not recognized")
    temp = _get(cfg, "target", "temperature", None, float)
    if temp is not None:
        target = target.with_temperature(temp)
    return target


def _uniform(m: int):
    from .targets import uniform_target

    if m < 2:
        raise ConfigError("[target] m must be >= 2")
    return uniform_target(m)


def _changepoint_data(cfg) -> ChangepointDataset:
    path = _get(cfg, "target", "dataset")
    if path is not None:
        return ChangepointDataset.load(path)
    sim_seed = _get(cfg, "target", "sim_seed", None, int)
    if sim_seed is None:
        raise ConfigError("[target] needs dataset = <path> or sim_seed = <int>")
    return simulate_changepoint(
        sim_seed,
        n_patients=_get(cfg, "target", "n_patients", 100, int),
        n_obs=_get(cfg, "target", "n_obs", 20, int),
    )


def build_proposal(cfg, section: str = "sampler") -> ProposalSpec:
    kind = _get(cfg, section, "kind")
    if kind is None:
        raise ConfigError(f"[{section}] kind is required")
    try:
        return ProposalSpec(
            kind=kind,
            width=_get(cfg, section, "width", 1.0, float),
            sigma=_get(cfg, section, "sigma", 1.0, float),
            interval=_get(cfg, section, "interval", 1.0, float),
            corrected=_get(cfg, section, "corrected", True, bool),
            updates_per_iter=_get(cfg, section, "updates_per_iter", 1, int),
            max_expansions=_get(cfg, section, "max_expansions", -1, int),
        )
    except ValueError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def _diag_route(cfg, target: EnergyTarget):
    """Returns (diag_target, axis). axis None means diagnose the full state
    space; an integer means occupancy of that coordinate against a marginal
    target (only the funnel's X marginal is available)."""
    raw = _get(cfg, "diagnostic", "marginal", "auto")
    if raw in ("auto", "full", None):
        if target.space.m <= ENUMERATION_CAP:
            return target, None
        if raw == "full":
            raise ConfigError("[diagnostic] marginal = full needs an enumerable space")
        if isinstance(target, FunnelTarget):
            return target.marginal_x_target(), 0
        raise ConfigError(
            "[diagnostic] state space too large; set marginal = <axis> on a target "
            "with a computable marginal"
        )
    try:
        axis = int(raw)
    except ValueError:
        raise ConfigError(f"[diagnostic] marginal = {raw!r}: expected axis or full") from None
    if target.space.dims == 1 and axis == 0:
        return target, None
    if isinstance(target, FunnelTarget) and axis == 0:
        return target.marginal_x_target(), 0
    raise ConfigError(f"[diagnostic] no marginal target available for axis {axis}")


def _chain_inits(cfg, target: EnergyTarget, rng: np.random.Generator):
    quantiles = _get_floats(cfg, "chains", "quantiles")
    if quantiles:
        if not isinstance(target, FunnelTarget):
            raise ConfigError("[chains] quantiles apply to the funnel target only")
        for q in quantiles:
            if not (0.0 < q < 1.0):
                raise ConfigError(f"[chains] quantile {q} outside (0, 1)")
        return [target.quantile_start(q) for q in quantiles]
    count = _get(cfg, "chains", "count", 1, int)
    if count < 1:
        raise ConfigError("[chains] count must be >= 1")
    if isinstance(target, FunnelTarget):
        return [target.start_state() for _ in range(count)]
    return [random_state(target.space, rng) for _ in range(count)]


# -- shared chain-running machinery ----------------------------------------------------


def _marginal_counts_size(diag_target) -> int:
    return diag_target.space.m


def _flat_of(states: np.ndarray, space: GridSpace, axis) -> np.ndarray:
    if axis is not None:
        return states[:, axis]
    sizes = np.asarray(space.n_points, dtype=np.int64)
    strides = np.ones_like(sizes)
    if space.dims > 1:
        strides[:-1] = np.cumprod(sizes[::-1])[::-1][1:]
    return (states * strides[None, :]).sum(axis=1)


class _ChainRunner:
    """One chain advanced in checkpoint-sized chunks, keeping its own rng,
    coordinate counter, occupancy counts, and full state record."""

    def __init__(self, target, diag_target, axis, proposal, init, rng):
        self.target = target
        self.axis = axis
        self.proposal = proposal
        self.state = np.array(init, dtype=np.int64).copy()
        self.rng = rng
        self.counter = 0
        self.accepted = 0
        self.counts = np.zeros(_marginal_counts_size(diag_target), dtype=np.int64)
        self.n = 0
        self.rows = [self.state.copy()[None, :]]

    def advance(self, iters: int, count: bool = True) -> None:
        out = np.empty((iters, self.target.space.dims), dtype=np.int64)
        self.accepted += _dispatch(
            self.target, self.proposal, self.state, out, self.rng,
            start_counter=self.counter,
        )
        self.counter += iters * self.proposal.updates_per_iter
        self.rows.append(out)
        if count:
            flat = _flat_of(out, self.target.space, self.axis)
            self.counts += np.bincount(flat, minlength=self.counts.shape[0])
            self.n += iters

    def trace(self, burn_in_rows: int) -> ChainTrace:
        states = np.vstack(self.rows)
        return ChainTrace(
            space=self.target.space,
            states=states,
            burn_in=burn_in_rows,
            meta={"kind": self.proposal.kind, "accepted": self.accepted},
        )


def _pooled_counts(runners) -> EmpiricalCounts:
    total = np.zeros_like(runners[0].counts)
    n = 0
    for r in runners:
        total += r.counts
        n += r.n
    return EmpiricalCounts(counts=total, n=n)


# -- verb: run -------------------------------------------------------------------------


def cmd_run(cfg, out_dir: Path, seed: int) -> int:
    target = build_target(cfg)
    proposal = build_proposal(cfg)
    diag_target, axis = _diag_route(cfg, target)
    epsilon = _get(cfg, "diagnostic", "epsilon", 0.05, float)
    checkpoint = _get(cfg, "diagnostic", "checkpoint", 100, int)
    budget = _get(cfg, "run", "iterations", 100_000, int)
    burn_in = _get(cfg, "chains", "burn_in", 0, int)
    if checkpoint < 1 or budget < 1 or burn_in < 0:
        raise ConfigError("[run] iterations, [diagnostic] checkpoint must be >= 1")
    if budget > MAX_CHAIN_ITERS:
        raise ConfigError(f"[run] iterations exceeds the {MAX_CHAIN_ITERS} cap")

    seq = np.random.SeedSequence(seed)
    init_rng = np.random.default_rng(seq.spawn(1)[0])
    inits = _chain_inits(cfg, target, init_rng)
    chain_seqs = seq.spawn(len(inits))
    runners = [
        _ChainRunner(target, diag_target, axis, proposal, init, np.random.default_rng(s))
        for init, s in zip(inits, chain_seqs)
    ]

    def step_all(iters: int, count: bool) -> None:
        if len(runners) == 1:
            runners[0].advance(iters, count)
            return
        with ThreadPoolExecutor(max_workers=min(8, len(runners))) as pool:
            list(pool.map(lambda r: r.advance(iters, count), runners))

    if burn_in:
        step_all(burn_in, count=False)

    series = DiagnosticSeries()
    chain_series = [DiagnosticSeries() for _ in runners]
    done = 0
    fired = False
    while done < budget:
        chunk = min(checkpoint, budget - done)
        step_all(chunk, count=True)
        done += chunk
        vn, st = compute_vn(_pooled_counts(runners), diag_target)
        cp = series.append(done, vn, st.log_vn)
        fired = relative_difference_monitor(series, epsilon)
        cp.decision = "stop" if fired else "continue"
        for r, cs in zip(runners, chain_series):
            cvn, cst = compute_vn(
                EmpiricalCounts(counts=r.counts.copy(), n=r.n), diag_target
            )
            cs.append(done, cvn, cst.log_vn)
        if fired:
            break

    out_dir.mkdir(parents=True, exist_ok=True)
    series.save(out_dir / "series.csv")
    if len(runners) > 1:
        for i, cs in enumerate(chain_series):
            cs.save(out_dir / f"series_chain{i}.csv")
    _write_run_outputs(cfg, out_dir, target, runners, burn_in, done, fired, epsilon)
    if not fired:
        print(f"no stop signal within {done} iterations (epsilon={epsilon})")
        return 3
    print(f"stopped at iteration {done} (epsilon={epsilon})")
    return 0


def _reference_density(target):
    if isinstance(target, FunnelTarget):
        sd = target.spec.x_sd
        return lambda x: norm.pdf(x, loc=0.0, scale=sd)
    return None


def _write_run_outputs(cfg, out_dir, target, runners, burn_in, done, fired, epsilon):
    hist = _get(cfg, "run", "histogram", False, bool)
    bins = _get(cfg, "run", "hist_bins", 50, int)
    coord = _get(cfg, "run", "hist_coord", 0, int)
    save_trace = _get(cfg, "run", "save_trace", False, bool)
    ref = _reference_density(target)
    traces = [r.trace(burn_in_rows=1 + burn_in) for r in runners]
    if hist:
        if len(traces) > 1:
            for i, tr in enumerate(traces):
                emit_histogram(tr, coord, bins, out_dir / f"hist_chain{i}.csv", ref)
        pooled = np.vstack([tr.retained() for tr in traces])
        pooled_trace = ChainTrace(space=target.space, states=pooled, burn_in=0)
        emit_histogram(pooled_trace, coord, bins, out_dir / "histogram.csv", ref)
    if save_trace:
        for i, tr in enumerate(traces):
            tr.save(out_dir / f"trace_chain{i}.csv")
    with open(out_dir / "summary.txt", "w") as fh:
        fh.write(f"iterations {done}\n")
        fh.write(f"stopped {'yes' if fired else 'no'}\n")
        fh.write(f"epsilon {epsilon!r}\n")
        fh.write(f"chains {len(runners)}\n")
        for i, r in enumerate(runners):
            fh.write(f"chain{i}_accepted {r.accepted}\n")


def emit_histogram(trace: ChainTrace, coordinate: int, bins: int, path, reference=None):
    """Bin the retained values of one coordinate over its full grid range and
    write left,right,count,frequency,reference_density rows."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    kept = trace.retained()
    vals = trace.space.lower[coordinate] + trace.space.width * kept[:, coordinate]
    lo = float(trace.space.lower[coordinate])
    hi = float(trace.space.upper[coordinate])
    counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = kept.shape[0]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["left", "right", "count", "frequency", "reference_density"])
        for b in range(bins):
            ref = "" if reference is None else repr(float(reference(centers[b])))
            writer.writerow(
                [repr(float(edges[b])), repr(float(edges[b + 1])),
                 int(counts[b]), repr(float(counts[b]) / total), ref]
            )


# -- verb: test ------------------------------------------------------------------------


def cmd_test(cfg, out_dir: Path, seed: int) -> int:
    target = build_target(cfg)
    proposal = build_proposal(cfg)
    diag_target, axis = _diag_route(cfg, target)
    m = diag_target.space.m
    if m > QUANTITATIVE_STATE_CAP:
        raise ConfigError(
            f"quantitative test needs at most {QUANTITATIVE_STATE_CAP} states, got {m}"
        )
    alpha = _get(cfg, "diagnostic", "alpha", 0.05, float)
    c_mode = _get(cfg, "diagnostic", "c_mode", "full")
    sigma_mode = _get(cfg, "diagnostic", "sigma_mode", "plugin")
    lag_cap = _get(cfg, "diagnostic", "lag_cap", 100, int)
    n0 = _get(cfg, "run", "n0", 1000, int)
    budget = _get(cfg, "run", "iterations", 1_000_000, int)
    burn_in = _get(cfg, "chains", "burn_in", 0, int)
    if n0 < 1:
        raise ConfigError("[run] n0 must be >= 1")
    if budget > MAX_CHAIN_ITERS:
        raise ConfigError(f"[run] iterations exceeds the {MAX_CHAIN_ITERS} cap")

    seq = np.random.SeedSequence(seed)
    rng = np.random.default_rng(seq.spawn(1)[0])
    init = _chain_inits(cfg, target, rng)[0]
    runner = _ChainRunner(target, diag_target, axis, proposal, init, rng)
    if burn_in:
        runner.advance(burn_in, count=False)

    if sigma_mode == "analytic":
        kernel = one_step_kernel(diag_target, proposal)
        sigma = sigma_full_analytic(kernel, diag_target.pi(), lag_cap=lag_cap)
    elif sigma_mode == "iid":
        sigma = sigma_iid(diag_target.pi())
    elif sigma_mode != "plugin":
        raise ConfigError(f"[diagnostic] sigma_mode = {sigma_mode!r} is not recognized")

    rows = []
    n = n0
    stationary = False
    while True:
        runner.advance(n - runner.n, count=True)
        if sigma_mode == "plugin":
            sigma = sigma_plugin(_diag_trace(runner), lag_cap=lag_cap)
        counts = EmpiricalCounts(counts=runner.counts.copy(), n=runner.n)
        decision = stationarity_test(counts, diag_target, c_mode, sigma, alpha)
        rows.append(
            (
                n,
                decision.v_n,
                decision.v_quantile,
                decision.null.lambda_sum,
                decision.null.lambda_sq_sum,
                decision.null.lyapunov_ratio,
                "stationary" if decision.stationary else "continue",
            )
        )
        if decision.stationary:
            stationary = True
            break
        if 2 * n > budget:
            break
        n = 2 * n

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "test.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n", "V_n", "v_quantile", "lambda_sum", "lambda_sq_sum", "lyapunov_ratio", "decision"]
        )
        for row in rows:
            writer.writerow([row[0]] + [repr(v) for v in row[1:6]] + [row[6]])
    last = rows[-1]
    print(f"n={last[0]} V_n={last[1]:.6g} v={last[2]:.6g} -> {last[6]}")
    return 0 if stationary else 3


def _diag_trace(runner: _ChainRunner) -> ChainTrace:
    """Counted states projected onto the diagnostic space (for plug-in Sigma)."""
    states = np.vstack(runner.rows[1:])
    if runner.axis is None:
        return ChainTrace(space=runner.target.space, states=states)
    sp = runner.target.space
    marg = GridSpace(
        1, float(sp.lower[runner.axis]), float(sp.upper[runner.axis]), sp.width
    )
    return ChainTrace(space=marg, states=states[:, [runner.axis]])


# -- verb: anneal ----------------------------------------------------------------------


def cmd_anneal(cfg, out_dir: Path, seed: int) -> int:
    target = build_target(cfg)
    proposal = build_proposal(cfg)
    schedule = CoolingSchedule(
        t0=_get(cfg, "schedule", "t0", 50.0, float),
        ratio=_get(cfg, "schedule", "ratio", 0.5, float),
        levels=_get(cfg, "schedule", "levels", 6, int),
    )
    widths = _get_floats(cfg, "schedule", "widths")
    eps_list = _get_floats(cfg, "schedule", "epsilon", [0.05])
    epsilon = eps_list[0] if len(eps_list) == 1 else eps_list
    checkpoint = _get(cfg, "schedule", "checkpoint", 25, int)
    max_per_level = _get(cfg, "schedule", "max_iter_per_level", 100_000, int)

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    try:
        result = anneal(
            target,
            schedule,
            proposal,
            epsilon,
            checkpoint,
            max_iter_per_level=max_per_level,
            rng=rng,
            widths=widths,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    out_dir.mkdir(parents=True, exist_ok=True)
    for k, lv in enumerate(result.levels):
        lv.series.save(out_dir / f"level_{k}.csv")
    with open(out_dir / "summary.txt", "w") as fh:
        fh.write("best_state " + " ".join(str(int(v)) for v in result.best_state) + "\n")
        fh.write("best_values " + " ".join(repr(float(v)) for v in result.best_values) + "\n")
        fh.write(f"best_energy {result.best_energy!r}\n")
        fh.write(f"total_iterations {result.total_iterations}\n")
        for k, lv in enumerate(result.levels):
            status = "equilibrated" if lv.equilibrated else "non-equilibrated"
            fh.write(
                f"level{k} T={lv.temperature!r} width={lv.width!r} "
                f"iterations={lv.iterations} {status}\n"
            )
    vals = ", ".join(f"{float(v):.6g}" for v in result.best_values)
    print(f"best energy {result.best_energy:.6f} at ({vals}); "
          f"{result.total_iterations} iterations over {schedule.levels} levels")
    return 0


# -- verb: compare ---------------------------------------------------------------------


def cmd_compare(cfg, out_dir: Path, seed: int) -> int:
    mode = _get(cfg, "compare", "mode", "anneal")
    reps = _get(cfg, "compare", "reps", 1, int)
    if reps < 1:
        raise ConfigError("[compare] reps must be >= 1")
    if mode not in ("anneal", "chain"):
        raise ConfigError(f"[compare] mode = {mode!r}: expected anneal or chain")
    epsilon = _get(cfg, "diagnostic", "epsilon", 0.05, float)

    sec_a = "sampler-a" if "sampler-a" in cfg else "sampler"
    sec_b = "sampler-b" if "sampler-b" in cfg else "sampler"
    results = []
    for r in range(reps):
        rep_cfg = {k: dict(v) for k, v in cfg.items()}
        if _get(cfg, "target", "kind") == "changepoint" and "sim_seed" in cfg.get("target", {}):
            rep_cfg["target"]["sim_seed"] = str(_get(cfg, "target", "sim_seed", 1, int) + r)
        iters = []
        for side, sec in ((0, sec_a), (1, sec_b)):
            rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, r, side)))
            iters.append(_one_side_iterations(rep_cfg, sec, mode, epsilon, rng))
        results.append(iters)

    out_dir.mkdir(parents=True, exist_ok=True)
    ratios = []
    with open(out_dir / "compare.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "iterations_first", "iterations_second", "ratio"])
        for r, (ia, ib) in enumerate(results):
            if ia is not None and ib is not None:
                ratio = ia / ib
                ratios.append(ratio)
                writer.writerow([r, ia, ib, repr(ratio)])
            else:
                writer.writerow(
                    [
                        r,
                        ia if ia is not None else "not-converged",
                        ib if ib is not None else "not-converged",
                        "",
                    ]
                )
    with open(out_dir / "summary.txt", "w") as fh:
        fh.write(f"reps {reps}\n")
        fh.write(f"converged_pairs {len(ratios)}\n")
        if ratios:
            fh.write(f"mean_ratio {sum(ratios) / len(ratios)!r}\n")
    if not ratios:
        print("no rep converged on both sides; no ratio to report")
        return 3
    mean = sum(ratios) / len(ratios)
    print(f"mean efficiency ratio {mean:.4f} over {len(ratios)} converged rep(s)")
    return 0


def _one_side_iterations(cfg, sampler_section, mode, epsilon, rng) -> int | None:
    """Iterations-to-criterion for one sampler config; None if it never met it."""
    target = build_target(cfg)
    proposal = build_proposal(cfg, sampler_section)
    if mode == "anneal":
        schedule = CoolingSchedule(
            t0=_get(cfg, "schedule", "t0", 50.0, float),
            ratio=_get(cfg, "schedule", "ratio", 0.5, float),
            levels=_get(cfg, "schedule", "levels", 6, int),
        )
        eps_list = _get_floats(cfg, "schedule", "epsilon", [epsilon])
        result = anneal(
            target,
            schedule,
            proposal,
            eps_list[0] if len(eps_list) == 1 else eps_list,
            _get(cfg, "schedule", "checkpoint", 25, int),
            max_iter_per_level=_get(cfg, "schedule", "max_iter_per_level", 100_000, int),
            rng=rng,
            widths=_get_floats(cfg, "schedule", "widths"),
        )
        if all(lv.equilibrated for lv in result.levels):
            return result.total_iterations
        return None
    diag_target, axis = _diag_route(cfg, target)
    checkpoint = _get(cfg, "diagnostic", "checkpoint", 100, int)
    budget = _get(cfg, "run", "iterations", 100_000, int)
    init = _chain_inits(cfg, target, rng)[0]
    runner = _ChainRunner(target, diag_target, axis, proposal, init, rng)
    series = DiagnosticSeries()
    done = 0
    while done < budget:
        chunk = min(checkpoint, budget - done)
        runner.advance(chunk, count=True)
        done += chunk
        vn, st = compute_vn(EmpiricalCounts(counts=runner.counts.copy(), n=runner.n), diag_target)
        series.append(done, vn, st.log_vn)
        if relative_difference_monitor(series, epsilon):
            return done
    return None


# -- entry point -----------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mcbalance",
        description="Occupancy-balance MCMC diagnostics, samplers, and annealing runs.",
    )
    parser.add_argument("verb", choices=["run", "compare", "anneal", "test"])
    parser.add_argument("--config", help="INI config file", default=None)
    parser.add_argument("--preset", help=f"one of: {', '.join(list_presets())}", default=None)
    parser.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.preset, args.config)
        seed = args.seed if args.seed is not None else _get(cfg, "run", "seed", None, int)
        if seed is None:
            raise ConfigError("a seed is required: --seed or [run] seed")
        out_raw = args.out if args.out is not None else _get(cfg, "run", "out", "mcbalance-out")
        out_dir = Path(out_raw)
        handler = {
            "run": cmd_run,
            "test": cmd_test,
            "anneal": cmd_anneal,
            "compare": cmd_compare,
        }[args.verb]
        return handler(cfg, out_dir, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NotConvergedError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return 3
    except (NumericalConsistencyError, DegenerateNullError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except McbalanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
