"""Occupancy-balance convergence diagnostic: the V_n statistic, its normal
null approximation, stopping rules, and the sampler-efficiency ratio.

V_n compares empirical state frequencies against exp(-E_i) through the weight
function f_i = pi_hat_i / exp(-E_i): under stationarity all f_i estimate the
same constant, so the centered sum of squares is small. Energies are tempered
by the target's temperature throughout.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .chain import ChainTrace, EmpiricalCounts, TransitionMatrix, check_detailed_balance
from .errors import (
    DegenerateNullError,
    NotConvergedError,
    NumericalConsistencyError,
    OutOfDomainError,
    ReversibilityError,
    ShapeError,
    ZeroProbabilityStateError,
)
from .targets import EnergyTarget

SIGMA_STATE_CAP = 10_000
DEFAULT_LAG_CAP = 100
_TAIL_WARN = 1e-8


@dataclass
class WeightFunctionState:
    """Per-state weights f_i = pi_hat_i / exp(-E_i) behind one V_n value.

    f entries can overflow to inf for very negative log-weights exp(-E_i);
    log_vn is always finite information: decisions downstream use it, never
    the raw overflow.
    """

    f: np.ndarray
    f_bar: float
    n: int
    m: int
    log_vn: float


@dataclass(frozen=True)
class NullApproximation:
    """Normal approximation N(sum lambda, 2 sum lambda^2) to the null law of
    V_n, plus the Lyapunov diagnostic ratio (reported, never enforced)."""

    lambda_sum: float
    lambda_sq_sum: float
    mean: float
    variance: float
    lyapunov_ratio: float


@dataclass(frozen=True)
class StationarityDecision:
    stationary: bool
    v_n: float
    v_quantile: float
    null: NullApproximation


@dataclass
class Checkpoint:
    iteration: int
    vn: float
    rel_diff: float | None
    log_vn: float
    lambda_sum: float | None = None
    lambda_sq_sum: float | None = None
    decision: str | None = None


@dataclass
class DiagnosticSeries:
    """Ordered V_n checkpoints with the running relative difference."""

    checkpoints: list[Checkpoint] = field(default_factory=list)

    def append(
        self,
        iteration: int,
        vn: float,
        log_vn: float,
        lambda_sum: float | None = None,
        lambda_sq_sum: float | None = None,
        decision: str | None = None,
    ) -> Checkpoint:
        if vn < 0:
            raise ValueError("V_n must be nonnegative")
        if self.checkpoints and iteration <= self.checkpoints[-1].iteration:
            raise ValueError("checkpoint iterations must be strictly increasing")
        rel = None
        if self.checkpoints:
            prev = self.checkpoints[-1]
            rel = _relative_difference(prev.vn, prev.log_vn, vn, log_vn)
        cp = Checkpoint(iteration, vn, rel, log_vn, lambda_sum, lambda_sq_sum, decision)
        self.checkpoints.append(cp)
        return cp

    def save(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["iteration", "V_n", "rel_diff", "lambda_sum", "lambda_sq_sum", "decision"]
            )
            for cp in self.checkpoints:
                writer.writerow(
                    [
                        cp.iteration,
                        repr(cp.vn),
                        "" if cp.rel_diff is None else repr(cp.rel_diff),
                        "" if cp.lambda_sum is None else repr(cp.lambda_sum),
                        "" if cp.lambda_sq_sum is None else repr(cp.lambda_sq_sum),
                        "" if cp.decision is None else cp.decision,
                    ]
                )


def _relative_difference(
    prev_vn: float, prev_log: float, vn: float, log_vn: float
) -> float:
    """|(V_prev - V_cur)/V_prev| with the V_prev = 0 convention (0 if V_cur is
    also 0, +inf otherwise) and a log-space route once raw values overflow."""
    if prev_vn == 0.0:
        return 0.0 if vn == 0.0 else math.inf
    if math.isfinite(prev_vn) and math.isfinite(vn):
        return abs((prev_vn - vn) / prev_vn)
    d = log_vn - prev_log
    if d > 700.0:
        return math.inf
    return abs(1.0 - math.exp(d))


# -- the statistic --------------------------------------------------------------------


def compute_vn(
    counts: EmpiricalCounts, target: EnergyTarget
) -> tuple[float, WeightFunctionState]:
    """V_n = (n/m) * sum_i (f_i - f_bar)^2 with f_i = pi_hat_i / exp(-E_i).

    Unvisited states have f_i = 0 and still enter the sum through f_bar. The
    raw statistic may overflow to inf; the returned state carries log V_n,
    evaluated by a shifted sum that never overflows.
    """
    e = target.tempered_table()
    m = target.space.m
    if counts.counts.shape[0] != m:
        raise ShapeError(
            f"counts cover {counts.counts.shape[0]} states, target has {m}"
        )
    if m < 2:
        raise ShapeError("V_n needs at least two states")
    n = counts.n
    vis = np.flatnonzero(counts.counts)
    log_f_vis = np.log(counts.counts[vis]) - math.log(n) + e[vis]
    shift = float(log_f_vis.max())
    g = np.exp(log_f_vis - shift)
    log_f_bar = shift + math.log(float(g.sum())) - math.log(m)
    g_bar = math.exp(log_f_bar - shift)
    bracket = float(((g - g_bar) ** 2).sum()) + (m - vis.size) * g_bar * g_bar
    if bracket > 0.0:
        log_vn = math.log(n) - math.log(m) + 2.0 * shift + math.log(bracket)
        vn = math.exp(log_vn) if log_vn < 709.0 else math.inf
    else:
        log_vn = -math.inf
        vn = 0.0
    f = np.zeros(m)
    with np.errstate(over="ignore"):
        f[vis] = np.exp(log_f_vis)
        f_bar = float(np.exp(log_f_bar))
    state = WeightFunctionState(f=f, f_bar=f_bar, n=n, m=m, log_vn=log_vn)
    return vn, state


def build_c_matrix(
    target: EnergyTarget, mode: str = "full", z: float | None = None
) -> np.ndarray:
    """The linear map C with V_n = |C W_n|^2 under the null, W_n = sqrt(n)(pi_hat - pi).

    full mode: C = A D with A = I - (1/m) 1 1' and D = diag(1/(sqrt(m) Z pi_i));
    with the default Z (the grid normalizer of exp(-E)) the product Z pi_i is
    exactly exp(-E_i), so D carries no normalizer roundoff. paper-diagonal mode
    keeps only the displayed diagonal, (m-1)/(m^{3/2} exp(-E_i)).
    """
    if mode not in ("full", "paper-diagonal"):
        raise ValueError(f"unknown C-matrix mode {mode!r}")
    e = target.tempered_table()
    m = target.space.m
    pi = target.pi()
    if np.any(pi <= 0.0):
        bad = int(np.argmin(pi))
        raise ZeroProbabilityStateError(f"state {bad} has zero probability")
    log_d = e - 0.5 * math.log(m)
    if z is not None:
        if not (z > 0):
            raise ValueError("z must be positive")
        log_d = log_d + target.log_z() - math.log(z)
    with np.errstate(over="raise"):
        try:
            d = np.exp(log_d)
        except FloatingPointError as exc:
            raise NumericalConsistencyError(
                "C-matrix entries overflow; energies too spread for this mode"
            ) from exc
    if mode == "paper-diagonal":
        return np.diag((1.0 - 1.0 / m) * d)
    C = np.full((m, m), -1.0 / m) + np.eye(m)
    return C * d[None, :]


# -- asymptotic covariance routes ------------------------------------------------------


def sigma_iid(pi: np.ndarray) -> np.ndarray:
    """Multinomial covariance diag(pi) - pi pi', the independent-draw case."""
    pi = np.asarray(pi, dtype=float)
    return np.diag(pi) - np.outer(pi, pi)


def sigma_analytic_mb(pi_i: float, p_ii: float) -> float:
    """Asymptotic variance of W_{i,n} from the two-state indicator chain:
    pi_i (1 - pi_i)(1 + p_ii - 2 pi_i)/(1 - p_ii), valid for
    max{0, 2 pi_i - 1} < p_ii < 1."""
    if not (0.0 < pi_i < 1.0):
        raise OutOfDomainError(f"pi_i = {pi_i} outside (0, 1)")
    if not (max(0.0, 2.0 * pi_i - 1.0) < p_ii < 1.0):
        raise OutOfDomainError(
            f"p_ii = {p_ii} outside (max(0, 2 pi_i - 1), 1) for pi_i = {pi_i}"
        )
    return pi_i * (1.0 - pi_i) * (1.0 + p_ii - 2.0 * pi_i) / (1.0 - p_ii)


def _sigma_series(P: np.ndarray, pi: np.ndarray, lag_cap: int) -> np.ndarray:
    """Sigma(i,j) = pi_i d_ij - pi_i pi_j + 2 pi_i sum_{k=2..cap} (P^{k-1}(i,j) - pi_j),
    with a geometric estimate of the truncated tail."""
    sigma = np.diag(pi) - np.outer(pi, pi)
    Pk = P.copy()
    norms = []
    for _k in range(2, lag_cap + 1):
        term = 2.0 * pi[:, None] * (Pk - pi[None, :])
        sigma += term
        Pk = Pk @ P
        norms.append(float(np.abs(term).max()))
    if norms:
        last = norms[-1]
        # terms that have decayed into float rounding noise stop contracting,
        # so only trust a measured ratio while they are clearly above it
        if last <= 1e-14:
            tail = last
        elif len(norms) >= 2 and norms[-2] > 0:
            r = last / norms[-2]
            tail = last * r / (1.0 - r) if r < 1.0 else math.inf
        else:
            tail = math.inf
        if tail > _TAIL_WARN:
            warnings.warn(
                f"covariance series truncated at lag {lag_cap}: tail estimate "
                f"{tail:.3e} exceeds {_TAIL_WARN}",
                RuntimeWarning,
                stacklevel=3,
            )
    return 0.5 * (sigma + sigma.T)


def sigma_full_analytic(
    P: TransitionMatrix, pi: np.ndarray, lag_cap: int = DEFAULT_LAG_CAP
) -> np.ndarray:
    """Asymptotic covariance of W_n for a known reversible kernel, by the
    truncated lag series. Warns if the geometric tail estimate at lag_cap
    exceeds 1e-8."""
    if lag_cap < 1:
        raise ValueError("lag_cap must be at least 1")
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (P.m,):
        raise ShapeError("pi length must match the kernel")
    ok, pair, gap = check_detailed_balance(P, pi, tol=1e-10)
    if not ok:
        raise ReversibilityError(
            f"kernel is not reversible w.r.t. pi: flow gap {gap:.3e} at {pair}"
        )
    return _sigma_series(P.entries, pi, lag_cap)


def sigma_plugin(trace: ChainTrace, lag_cap: int = DEFAULT_LAG_CAP) -> np.ndarray:
    """Plug-in covariance from one trace: symmetrize the observed transition
    flows so the fitted kernel is exactly reversible w.r.t. its own marginal,
    then run the lag series. States never visited get zero rows and columns
    (their W_n coordinate is estimated as exactly degenerate)."""
    m = trace.space.m
    if m > SIGMA_STATE_CAP:
        raise OutOfDomainError(f"state count {m} exceeds plug-in cap {SIGMA_STATE_CAP}")
    states = trace.retained()
    if states.shape[0] < 2:
        raise ShapeError("plug-in covariance needs at least one transition")
    counts = np.asarray(trace.space.n_points, dtype=np.int64)
    strides = np.ones_like(counts)
    if counts.shape[0] > 1:
        strides[:-1] = np.cumprod(counts[::-1])[::-1][1:]
    flat = (states * strides[None, :]).sum(axis=1)
    n_trans = flat.shape[0] - 1
    N = np.zeros((m, m))
    np.add.at(N, (flat[:-1], flat[1:]), 1.0)
    F = (N + N.T) / (2.0 * n_trans)
    marg = F.sum(axis=1)
    vis = np.flatnonzero(marg > 0)
    P_vis = F[np.ix_(vis, vis)] / marg[vis][:, None]
    sigma_vis = _sigma_series(P_vis, marg[vis], lag_cap)
    sigma = np.zeros((m, m))
    sigma[np.ix_(vis, vis)] = sigma_vis
    return sigma


# -- null law and decisions ------------------------------------------------------------


def null_approximation(C: np.ndarray, sigma: np.ndarray) -> NullApproximation:
    """Moments of the null law of V_n from M = C Sigma C'.

    lambda_sum is the trace; the pairwise product sum comes from the 2x2
    principal subdeterminants of M, so lambda_sq_sum needs no eigensolve; the
    Lyapunov ratio sum|lambda|^3 / (2 sum lambda^2)^{3/2} does use one.
    """
    C = np.asarray(C, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if C.ndim != 2 or sigma.shape != (C.shape[1], C.shape[1]):
        raise ShapeError("C and Sigma are not conformable")
    if float(np.abs(sigma - sigma.T).max()) > 1e-10:
        raise OutOfDomainError("Sigma must be symmetric within 1e-10")
    sig_eigs = np.linalg.eigvalsh(sigma)
    if float(sig_eigs.min()) < -1e-10:
        raise OutOfDomainError(
            f"Sigma must be positive semidefinite; min eigenvalue {sig_eigs.min():.3e}"
        )
    M = C @ sigma @ C.T
    lambda_sum = float(np.trace(M))
    # sum over i<j of (M_ii M_jj - M_ij M_ji) for symmetric M
    pair_sum = 0.5 * (lambda_sum**2 - float((M * M.T).sum()))
    lambda_sq_sum = lambda_sum**2 - 2.0 * pair_sum
    if lambda_sq_sum < -1e-10:
        raise NumericalConsistencyError(
            f"negative sum of squared eigenvalues: {lambda_sq_sum:.3e}"
        )
    lambda_sq_sum = max(lambda_sq_sum, 0.0)
    eigs = np.linalg.eigvalsh(0.5 * (M + M.T))
    if lambda_sq_sum > 0.0:
        ratio = float((np.abs(eigs) ** 3).sum() / (2.0 * lambda_sq_sum) ** 1.5)
    else:
        ratio = math.nan
    return NullApproximation(
        lambda_sum=lambda_sum,
        lambda_sq_sum=lambda_sq_sum,
        mean=lambda_sum,
        variance=2.0 * lambda_sq_sum,
        lyapunov_ratio=ratio,
    )


def stationarity_test(
    counts: EmpiricalCounts,
    target: EnergyTarget,
    c_mode: str,
    sigma: np.ndarray,
    alpha: float,
    z: float | None = None,
) -> StationarityDecision:
    """One-sided quantitative check: stationary iff V_n < sum lambda +
    z_{alpha/2} sqrt(2 sum lambda^2)."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    vn, _state = compute_vn(counts, target)
    C = build_c_matrix(target, mode=c_mode, z=z)
    null = null_approximation(C, sigma)
    if null.variance <= 0.0:
        raise DegenerateNullError("null variance is not positive")
    quantile = null.mean + float(norm.ppf(1.0 - alpha / 2.0)) * math.sqrt(null.variance)
    return StationarityDecision(
        stationary=bool(vn < quantile), v_n=vn, v_quantile=quantile, null=null
    )


def relative_difference_monitor(series: DiagnosticSeries, epsilon: float) -> bool:
    """True (stop) iff the latest relative difference exists and is below
    epsilon; fewer than two checkpoints always continue."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if len(series.checkpoints) < 2:
        return False
    rel = series.checkpoints[-1].rel_diff
    return rel is not None and rel < epsilon


def _iterations_to_criterion(series: DiagnosticSeries, epsilon: float) -> int | None:
    for cp in series.checkpoints:
        if cp.rel_diff is not None and cp.rel_diff < epsilon:
            return cp.iteration
    return None


def efficiency_measure(
    series1: DiagnosticSeries, series2: DiagnosticSeries, epsilon: float
) -> float:
    """Iterations-to-criterion of algorithm 1 over algorithm 2; below 1 means
    algorithm 1 reached the relative-difference criterion sooner."""
    it1 = _iterations_to_criterion(series1, epsilon)
    it2 = _iterations_to_criterion(series2, epsilon)
    if it1 is None:
        raise NotConvergedError(
            f"first series never meets epsilon={epsilon}", side="first"
        )
    if it2 is None:
        raise NotConvergedError(
            f"second series never meets epsilon={epsilon}", side="second"
        )
    return it1 / it2


def abs_z2m1_cubed_moment() -> float:
    """E|Z^2 - 1|^3 for standard normal Z by adaptive quadrature (the constant
    in the Lyapunov bound); absolute error well below 1e-6."""

    def integrand(zv: float) -> float:
        return abs(zv * zv - 1.0) ** 3 * math.exp(-0.5 * zv * zv) / math.sqrt(2 * math.pi)

    inner, _ = quad(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12)
    outer, _ = quad(integrand, 1.0, np.inf, epsabs=1e-12, epsrel=1e-12)
    return 2.0 * (inner + outer)
