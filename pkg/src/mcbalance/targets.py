"""Energy targets over grid spaces: experiment distributions and analytic toys.

A target exposes untempered energies E_i; the stationary law at temperature T is
proportional to exp(-E_i/T). Kernels receive a jit-compatible energy callable
returning untempered values and apply T at the call site, so one compiled
specialization serves every temperature level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import maybe_jit
from .chain import ENUMERATION_CAP
from .errors import OutOfDomainError, ShapeError
from .grid import GridSpace

_LOG_2PI = math.log(2.0 * math.pi)


class EnergyTarget:
    """Base: a grid space, an energy map over its states, and a temperature."""

    name = "target"

    def __init__(self, space: GridSpace, temperature: float = 1.0):
        if not (temperature > 0):
            raise ValueError(f"temperature must be positive, got {temperature}")
        self.space = space
        self.temperature = float(temperature)
        self._table: np.ndarray | None = None
        self._kernel = None

    # -- energies -------------------------------------------------------------------

    def energy_multi(self, multi) -> float:
        """Untempered energy at per-dimension indices."""
        raise NotImplementedError

    def tempered_energy_multi(self, multi) -> float:
        return self.energy_multi(multi) / self.temperature

    def energy_batch(self, multis: np.ndarray) -> np.ndarray:
        """Untempered energies for an (n, dims) index array."""
        return np.array([self.energy_multi(row) for row in multis])

    def energy_table(self) -> np.ndarray:
        """Untempered energies for every state in flat (row-major) order.

        Cached; requires an enumerable state count.
        """
        if self._table is None:
            m = self.space.m
            if m > ENUMERATION_CAP:
                raise OutOfDomainError(f"state count {m} too large to tabulate")
            grids = np.meshgrid(
                *[np.arange(int(n)) for n in self.space.n_points], indexing="ij"
            )
            multis = np.stack(grids, axis=-1).reshape(m, self.space.dims)
            self._table = self.energy_batch(multis)
        return self._table

    def tempered_table(self) -> np.ndarray:
        return self.energy_table() / self.temperature

    def pi(self) -> np.ndarray:
        """Exact stationary probabilities at the current temperature."""
        e = self.tempered_table()
        w = np.exp(-(e - e.min()))
        return w / w.sum()

    def log_z(self) -> float:
        """log of the normalizer Z = sum_i exp(-E_i/T) over the grid."""
        e = self.tempered_table()
        lo = float(e.min())
        return -lo + math.log(float(np.exp(-(e - lo)).sum()))

    # -- kernels ----------------------------------------------------------------------

    def kernel_energy(self):
        """Jit-compatible (idx: int64[dims]) -> float64 untempered energy."""
        if self._kernel is None:
            self._kernel = self._build_kernel()
        return self._kernel

    def _build_kernel(self):
        raise NotImplementedError

    # -- temperature ------------------------------------------------------------------

    def with_temperature(self, temperature: float) -> "EnergyTarget":
        """Shallow copy at a different temperature, sharing tables and kernels."""
        import copy

        out = copy.copy(self)
        if not (temperature > 0):
            raise ValueError(f"temperature must be positive, got {temperature}")
        out.temperature = float(temperature)
        return out


class TabulatedTarget(EnergyTarget):
    """One-dimensional target given directly by its energy table."""

    def __init__(self, space: GridSpace, energies, temperature: float = 1.0, name: str = "tabulated"):
        if space.dims != 1:
            raise ShapeError("TabulatedTarget requires a 1-d space")
        super().__init__(space, temperature)
        table = np.asarray(energies, dtype=float)
        if table.shape != (int(space.n_points[0]),):
            raise ShapeError(
                f"energies shape {table.shape} != ({int(space.n_points[0])},)"
            )
        if not np.all(np.isfinite(table)):
            raise ValueError("energies must be finite on every grid state")
        self._table = table
        self.name = name

    def energy_multi(self, multi) -> float:
        return float(self._table[int(multi[0])])

    def energy_batch(self, multis) -> np.ndarray:
        return self._table[np.asarray(multis)[:, 0]]

    def _build_kernel(self):
        table = self._table

        @maybe_jit
        def energy(idx):
            return table[idx[0]]

        return energy


# -- toy targets ------------------------------------------------------------------------


def uniform_target(m: int) -> TabulatedTarget:
    """m equally likely states on a unit-width line grid."""
    space = GridSpace(1, 0.0, float(m - 1), 1.0)
    return TabulatedTarget(space, np.zeros(m), name=f"uniform-{m}")


def three_state_target() -> TabulatedTarget:
    """pi = (0.25, 0.5, 0.25) via energies (log 4, log 2, log 4); Z = 1."""
    space = GridSpace(1, 0.0, 2.0, 1.0)
    return TabulatedTarget(
        space, np.array([math.log(4.0), math.log(2.0), math.log(4.0)]), name="three-state"
    )


def two_well_target(barrier: float = 4.0, width: float = 0.25) -> TabulatedTarget:
    """Symmetric double well on [-2, 2]: E(v) = barrier * (v^2 - 1)^2.

    Minima at v = +-1 (E = 0); E(0) = barrier controls the crossing rate.
    """
    space = GridSpace(1, -2.0, 2.0, width)
    v = space.axis_values(0)
    return TabulatedTarget(space, barrier * (v * v - 1.0) ** 2, name="two-well")


def toy_targets() -> dict[str, TabulatedTarget]:
    """Named analytic test targets, each with exact pi available via .pi()."""
    return {
        "uniform-8": uniform_target(8),
        "two-well": two_well_target(),
        "three-state": three_state_target(),
    }


# -- multipath changepoint ---------------------------------------------------------------


@dataclass
class ChangepointDataset:
    """Per-patient series with individual changepoints.

    measurements[i, j] is observation j+1 of patient i; entries up to true_taus[i]
    are N(0,1), later ones N(4,1).
    """

    measurements: np.ndarray  # (n_patients, n_obs)
    true_taus: np.ndarray  # (n_patients,), values in 0..n_obs
    seed: int

    def __post_init__(self):
        self.measurements = np.asarray(self.measurements, dtype=float)
        self.true_taus = np.asarray(self.true_taus, dtype=np.int64)
        n_pat, n_obs = self.measurements.shape
        if self.true_taus.shape != (n_pat,):
            raise ShapeError("one changepoint per patient required")
        if np.any(self.true_taus < 0) or np.any(self.true_taus > n_obs):
            raise ValueError("changepoints must lie in 0..n_obs")

    @property
    def n_patients(self) -> int:
        return self.measurements.shape[0]

    @property
    def n_obs(self) -> int:
        return self.measurements.shape[1]

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# seed={self.seed}\n")
            for row in self.measurements:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")
            fh.write(" ".join(str(int(t)) for t in self.true_taus) + "\n")

    @staticmethod
    def load(path) -> "ChangepointDataset":
        with open(path) as fh:
            header = fh.readline()
            if not header.startswith("# seed="):
                raise ValueError(f"{path}: missing dataset header")
            seed = int(header.split("=", 1)[1])
            rows = [line.split() for line in fh if line.strip()]
        taus = np.array([int(t) for t in rows[-1]], dtype=np.int64)
        meas = np.array([[float(v) for v in row] for row in rows[:-1]])
        return ChangepointDataset(measurements=meas, true_taus=taus, seed=seed)


def simulate_changepoint(
    seed: int,
    n_patients: int = 100,
    n_obs: int = 20,
    tau_law: tuple[int, int] = (1, 19),
) -> ChangepointDataset:
    """Reproducible dataset: tau_i uniform on tau_law (inclusive), observations
    N(0,1) up to tau_i and N(4,1) after."""
    lo, hi = tau_law
    if not (0 <= lo <= hi):
        raise ValueError(f"invalid tau law {tau_law}")
    rng = np.random.Generator(np.random.PCG64(seed))
    taus = rng.integers(lo, hi + 1, size=n_patients)
    noise = rng.standard_normal((n_patients, n_obs))
    post = np.arange(1, n_obs + 1)[None, :] > taus[:, None]
    meas = noise + 4.0 * post
    return ChangepointDataset(measurements=meas, true_taus=taus, seed=seed)


def default_group_coding(n_patients: int) -> np.ndarray:
    """Balanced +-1 covariate: first half +1, second half -1."""
    z = np.ones(n_patients, dtype=np.int64)
    z[n_patients // 2:] = -1
    return z


def _patient_energy_curve(y: np.ndarray, mus: np.ndarray, shift: float) -> np.ndarray:
    """-log of one patient's marginal likelihood at each candidate mean.

    The changepoint is marginalized uniformly over 0..n_obs (both degenerate
    regimes admitted); full normal constants and the uniform prior factor are
    kept so the result is a genuine negative log likelihood.
    """
    n_obs = y.shape[0]
    # prefix sums over tau = 0..n_obs
    s1 = np.concatenate(([0.0], np.cumsum(y)))
    s2 = np.concatenate(([0.0], np.cumsum(y * y)))
    taus = np.arange(n_obs + 1, dtype=float)
    mus = np.asarray(mus, dtype=float)
    pre = s2[:, None] - 2.0 * mus[None, :] * s1[:, None] + taus[:, None] * mus[None, :] ** 2
    post_mu = mus + shift
    post = (
        (s2[-1] - s2)[:, None]
        - 2.0 * post_mu[None, :] * (s1[-1] - s1)[:, None]
        + (n_obs - taus)[:, None] * post_mu[None, :] ** 2
    )
    loglik = -0.5 * (pre + post) - 0.5 * n_obs * _LOG_2PI  # (n_obs+1, n_mu)
    peak = loglik.max(axis=0)
    lse = peak + np.log(np.exp(loglik - peak[None, :]).sum(axis=0))
    return math.log(n_obs + 1) - lse


def changepoint_energy(
    alpha: float,
    beta: float,
    data: ChangepointDataset,
    z: np.ndarray | None = None,
    shift: float = 4.0,
    bound: float = 10.0,
) -> float:
    """Negative log likelihood of the two-group changepoint model at (alpha, beta).

    Patients with covariate +1 have pre-change mean alpha, the -1 group beta;
    post-change means shift by `shift`; each patient's changepoint is
    marginalized uniformly over 0..n_obs. Zero mass outside [-bound, bound]^2.
    """
    if abs(alpha) > bound + 1e-12 or abs(beta) > bound + 1e-12:
        raise OutOfDomainError(f"({alpha}, {beta}) outside [-{bound}, {bound}]^2")
    if z is None:
        z = default_group_coding(data.n_patients)
    z = np.asarray(z)
    if z.shape != (data.n_patients,) or not np.all(np.isin(z, (-1, 1))):
        raise ValueError("z must assign +-1 per patient")
    total = 0.0
    for i in range(data.n_patients):
        mu = alpha if z[i] == 1 else beta
        total += float(_patient_energy_curve(data.measurements[i], np.array([mu]), shift)[0])
    return total


class ChangepointTarget(EnergyTarget):
    """Grid target for the two-group changepoint likelihood.

    The energy separates as E(alpha, beta) = G+(alpha) + G-(beta), so both axis
    tables are precomputed once and evaluation is two lookups.
    """

    name = "changepoint"

    def __init__(
        self,
        data: ChangepointDataset,
        width: float = 0.01,
        bound: float = 10.0,
        shift: float = 4.0,
        z: np.ndarray | None = None,
        temperature: float = 1.0,
    ):
        space = GridSpace(2, -bound, bound, width)
        super().__init__(space, temperature)
        self.data = data
        self.shift = float(shift)
        self.z = default_group_coding(data.n_patients) if z is None else np.asarray(z)
        if self.z.shape != (data.n_patients,) or not np.all(np.isin(self.z, (-1, 1))):
            raise ValueError("z must assign +-1 per patient")
        axis = space.axis_values(0)
        g_plus = np.zeros(axis.shape[0])
        g_minus = np.zeros(axis.shape[0])
        for i in range(data.n_patients):
            curve = _patient_energy_curve(data.measurements[i], axis, self.shift)
            if self.z[i] == 1:
                g_plus += curve
            else:
                g_minus += curve
        self.g_plus = g_plus
        self.g_minus = g_minus

    def energy_multi(self, multi) -> float:
        return float(self.g_plus[int(multi[0])] + self.g_minus[int(multi[1])])

    def energy_batch(self, multis) -> np.ndarray:
        multis = np.asarray(multis)
        return self.g_plus[multis[:, 0]] + self.g_minus[multis[:, 1]]

    def energy_table(self) -> np.ndarray:
        if self._table is None:
            self._table = (self.g_plus[:, None] + self.g_minus[None, :]).ravel()
        return self._table

    def _build_kernel(self):
        gp = self.g_plus
        gm = self.g_minus

        @maybe_jit
        def energy(idx):
            return gp[idx[0]] + gm[idx[1]]

        return energy


# -- funnel -------------------------------------------------------------------------------


@dataclass(frozen=True)
class FunnelSpec:
    """Hierarchy: X ~ N(0, x_sd^2); Y_k | X=x ~ N(0, e^x), k = 1..dims-1."""

    x_sd: float = 3.0
    dims: int = 10
    bound: float = 30.0
    width: float = 0.01

    def __post_init__(self):
        if self.dims < 2:
            raise ValueError("funnel needs at least one y coordinate")
        if not (self.x_sd > 0 and self.bound > 0 and self.width > 0):
            raise ValueError("x_sd, bound, width must be positive")


class FunnelTarget(EnergyTarget):
    """Grid discretization of the funnel; energy drops constant terms."""

    name = "funnel"

    def __init__(self, spec: FunnelSpec = FunnelSpec(), temperature: float = 1.0):
        space = GridSpace(spec.dims, -spec.bound, spec.bound, spec.width)
        super().__init__(space, temperature)
        self.spec = spec

    def energy_multi(self, multi) -> float:
        v = self.space.values(multi)
        x = float(v[0])
        sy2 = float(np.dot(v[1:], v[1:]))
        return (
            x * x / (2.0 * self.spec.x_sd**2)
            + 0.5 * sy2 * math.exp(-x)
            + 0.5 * (self.spec.dims - 1) * x
        )

    def energy_batch(self, multis) -> np.ndarray:
        multis = np.asarray(multis)
        vals = self.space.lower[None, :] + self.space.width * multis
        x = vals[:, 0]
        sy2 = np.sum(vals[:, 1:] ** 2, axis=1)
        return (
            x * x / (2.0 * self.spec.x_sd**2)
            + 0.5 * sy2 * np.exp(-x)
            + 0.5 * (self.spec.dims - 1) * x
        )

    def _build_kernel(self):
        lowers = self.space.lower
        width = self.space.width
        dims = self.space.dims
        inv_two_var = 1.0 / (2.0 * self.spec.x_sd**2)
        half_ny = 0.5 * (dims - 1)

        @maybe_jit
        def energy(idx):
            x = lowers[0] + width * idx[0]
            sy2 = 0.0
            for k in range(1, dims):
                v = lowers[k] + width * idx[k]
                sy2 += v * v
            return x * x * inv_two_var + 0.5 * sy2 * math.exp(-x) + half_ny * x

        return energy

    def start_state(self) -> np.ndarray:
        """The conventional start: x = 0, every y = 1."""
        coords = np.ones(self.spec.dims)
        coords[0] = 0.0
        return self.space.encode_multi(coords)

    def quantile_start(self, q: float) -> np.ndarray:
        """Start with x at the q-quantile of its marginal, y coordinates at 1."""
        from scipy.stats import norm

        coords = np.ones(self.spec.dims)
        coords[0] = self.spec.x_sd * float(norm.ppf(q))
        return self.space.encode_multi(coords)

    def marginal_x_target(self) -> TabulatedTarget:
        """1-d diagnostic target: grid-restricted N(0, x_sd^2) mass for X.

        Normalized over the x axis, so its implied Z is exactly 1 and
        occupancy counts of dim 0 can be diagnosed against it directly.
        """
        axis_space = GridSpace(1, -self.spec.bound, self.spec.bound, self.spec.width)
        x = axis_space.axis_values(0)
        logw = -0.5 * (x / self.spec.x_sd) ** 2
        logw -= logw.max()
        w = np.exp(logw)
        w /= w.sum()
        return TabulatedTarget(axis_space, -np.log(w), name="funnel-x-marginal")


def funnel_energy(state, spec: FunnelSpec, space: GridSpace | None = None) -> float:
    """Energy at a state given as per-dimension indices or a flat index."""
    target = FunnelTarget(spec)
    use_space = target.space if space is None else space
    if np.isscalar(state) or isinstance(state, int):
        multi = use_space.decode_multi(int(state))
    else:
        multi = np.asarray(state, dtype=np.int64)
    if multi.shape != (use_space.dims,):
        raise ShapeError(f"state must have {use_space.dims} indices")
    return target.energy_multi(multi)
