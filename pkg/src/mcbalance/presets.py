"""Named run configurations.

Each preset is a dict of config sections in the same shape the INI parser
produces, so `--preset` and `--config` flow through one code path. The
`paper-*` presets carry the full-resolution experiment settings; the `desk-*`
variants shrink grids and chain lengths to laptop scale while keeping every
structural choice identical.
"""
from __future__ import annotations

from .errors import ConfigError

PRESETS: dict[str, dict[str, dict[str, str]]] = {
    # two-group changepoint energy, annealed with the cube proposal on a
    # (-10,10)^2 grid; six geometric levels from T=50, V_n checked every 25
    # iterations with eps=0.05, at most 1000 iterations per level
    "paper-41": {
        "target": {
            "kind": "changepoint",
            "grid_width": "0.01",
            "bound": "10.0",
            "sim_seed": "1",
        },
        "sampler": {"kind": "cube", "width": "12.0"},
        "schedule": {
            "t0": "50.0",
            "ratio": "0.5",
            "levels": "6",
            "widths": "12,7,4,2.5,1.7,1.2",
            "epsilon": "0.05",
            "checkpoint": "25",
            "max_iter_per_level": "1000",
        },
        "run": {"seed": "1"},
    },
    # same run on a coarser 0.1-width grid: every structural setting intact,
    # exhaustive grid search of the oracle now instant
    "desk-41": {
        "target": {
            "kind": "changepoint",
            "grid_width": "0.1",
            "bound": "10.0",
            "sim_seed": "1",
        },
        "sampler": {"kind": "cube", "width": "12.0"},
        "schedule": {
            "t0": "50.0",
            "ratio": "0.5",
            "levels": "6",
            "widths": "12,7,4,2.5,1.7,1.2",
            "epsilon": "0.05",
            "checkpoint": "25",
            "max_iter_per_level": "1000",
        },
        "run": {"seed": "1"},
    },
    # 10-d funnel, coordinate-wise truncated-normal MH with the corrected
    # acceptance ratio; eleven chains from spread X-quantiles, one iteration
    # bundles 1300 coordinate updates, V_n on the X marginal every 100
    # iterations
    "paper-42-mh": {
        "target": {"kind": "funnel", "x_sd": "3.0", "dims": "10", "bound": "30.0", "width": "0.01"},
        "sampler": {"kind": "truncnorm", "sigma": "1.0", "corrected": "true", "updates_per_iter": "1300"},
        "diagnostic": {"epsilon": "0.01", "checkpoint": "100", "marginal": "0"},
        "chains": {"quantiles": "0.1,0.2,0.3,0.4,0.45,0.5,0.55,0.6,0.7,0.8,0.9"},
        "run": {"iterations": "4600", "histogram": "true", "hist_bins": "50", "seed": "1"},
    },
    # same layout under univariate slice sampling with stepping-out; one
    # iteration makes 120 passes over the ten coordinates (1200 updates)
    "paper-42-slice": {
        "target": {"kind": "funnel", "x_sd": "3.0", "dims": "10", "bound": "30.0", "width": "0.01"},
        "sampler": {"kind": "slice", "interval": "1.0", "updates_per_iter": "1200"},
        "diagnostic": {"epsilon": "0.01", "checkpoint": "100", "marginal": "0"},
        "chains": {"quantiles": "0.1,0.2,0.3,0.4,0.45,0.5,0.55,0.6,0.7,0.8,0.9"},
        "run": {"iterations": "17200", "histogram": "true", "hist_bins": "50", "seed": "1"},
    },
    # single-chain funnel runs cut to 2000 iterations for quick mixing reads
    "desk-42-mh": {
        "target": {"kind": "funnel", "x_sd": "3.0", "dims": "10", "bound": "30.0", "width": "0.01"},
        "sampler": {"kind": "truncnorm", "sigma": "1.0", "corrected": "true", "updates_per_iter": "1300"},
        "diagnostic": {"epsilon": "0.01", "checkpoint": "100", "marginal": "0"},
        "run": {"iterations": "2000", "histogram": "true", "hist_bins": "50", "seed": "1"},
    },
    "desk-42-slice": {
        "target": {"kind": "funnel", "x_sd": "3.0", "dims": "10", "bound": "30.0", "width": "0.01"},
        "sampler": {"kind": "slice", "interval": "1.0", "updates_per_iter": "1200"},
        "diagnostic": {"epsilon": "0.01", "checkpoint": "100", "marginal": "0"},
        "run": {"iterations": "2000", "histogram": "true", "hist_bins": "50", "seed": "1"},
    },
}


def get_preset(name: str) -> dict[str, dict[str, str]]:
    try:
        sections = PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r}; available: {known}") from None
    return {sec: dict(kv) for sec, kv in sections.items()}


def list_presets() -> list[str]:
    return sorted(PRESETS)
