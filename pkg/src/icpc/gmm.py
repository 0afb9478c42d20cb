"""Two-step GMM for the inference-cost Phillips curve.

The moment condition is

    g_t(kappa, kappa_inf) = z_{t-1} (pi_t - beta pi^e_{t+1} - kappa ygap_t - kappa_inf cinf_t)

with predetermined instruments z_{t-1}. beta is held at its calibrated
value. Because g_t is linear in the two slopes both GMM steps have a
closed-form weighted-IV solution; :func:`gmm_objective` is exposed so the
closed form can be checked against a numerical minimizer.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .core import ModelParams, ShockMoments, SlopePair, algorithmic_slopes, variance_share_bound
from .exceptions import DataError, ParameterError, RankError
from .hac import auto_bandwidth, newey_west
from .simulate import ShockProcessSpec, TimeSeriesDataset, simulate_aggregate

__all__ = [
    "InstrumentSpec",
    "GmmResult",
    "instrument_matrix",
    "moment_vector",
    "gmm_objective",
    "linear_gmm",
    "two_step_linear",
    "two_step_gmm",
    "implied_phi_rho",
    "implied_eta_inf",
    "ConsistencyTable",
    "consistency_study",
    "coverage_study",
]

MIN_OBS = 24


@dataclass(frozen=True)
class InstrumentSpec:
    """Lag depths of the instrument blocks.

    ``pi_lags=2`` contributes pi_{t-1} and pi_{t-2}, and so on. A depth of 0
    drops the block.
    """

    pi_lags: int = 0
    ygap_lags: int = 2
    cinf_lags: int = 2
    constant: bool = True

    def __post_init__(self):
        for name in ("pi_lags", "ygap_lags", "cinf_lags"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ParameterError(f"{name} must be a non-negative integer, got {value!r}")
        if self.n_instruments < 2:
            raise ParameterError("need at least two instruments for two slopes")

    @property
    def max_lag(self) -> int:
        return max(self.pi_lags, self.ygap_lags, self.cinf_lags, 1)

    @property
    def n_instruments(self) -> int:
        return int(self.constant) + self.pi_lags + self.ygap_lags + self.cinf_lags

    def names(self) -> list[str]:
        out = ["const"] if self.constant else []
        for col, lags in (("pi", self.pi_lags), ("ygap", self.ygap_lags), ("cinf", self.cinf_lags)):
            out += [f"{col}_lag{j}" for j in range(1, lags + 1)]
        return out


def instrument_matrix(data: TimeSeriesDataset, spec: InstrumentSpec) -> np.ndarray:
    """(T - max_lag, L) matrix of lagged instruments aligned with rows max_lag..T-1."""
    k = spec.max_lag
    t_len = len(data)
    if t_len - k < MIN_OBS:
        raise DataError(f"need at least {MIN_OBS + k} observations for lag depth {k}, got {t_len}")
    cols = []
    if spec.constant:
        cols.append(np.ones(t_len - k))
    for series, lags in ((data.pi, spec.pi_lags), (data.ygap, spec.ygap_lags), (data.cinf, spec.cinf_lags)):
        for j in range(1, lags + 1):
            cols.append(series[k - j : t_len - j])
    return np.column_stack(cols)


def _design(data: TimeSeriesDataset, spec: InstrumentSpec, beta: float):
    k = spec.max_lag
    z = instrument_matrix(data, spec)
    y = data.pi[k:] - beta * data.pi_e[k:]
    x = np.column_stack([data.ygap[k:], data.cinf[k:]])
    return y, x, z


def moment_vector(
    data: TimeSeriesDataset,
    spec: InstrumentSpec,
    beta: float,
    kappa: float,
    kappa_inf: float,
) -> np.ndarray:
    """Per-period moments z_{t-1} * residual_t, shape (T - max_lag, L)."""
    if not (0.0 < beta < 1.0):
        raise ParameterError(f"beta must lie in (0, 1), got {beta!r}")
    y, x, z = _design(data, spec, beta)
    resid = y - x @ np.array([kappa, kappa_inf])
    return z * resid[:, None]


def gmm_objective(theta, y, x, z, weight) -> float:
    """T-free GMM criterion g_bar' W g_bar."""
    gbar = z.T @ (y - x @ np.asarray(theta)) / len(y)
    return float(gbar @ weight @ gbar)


def linear_gmm(y, x, z, weight) -> np.ndarray:
    """argmin of the linear GMM criterion for weight matrix ``weight``."""
    n = len(y)
    zx = z.T @ x / n
    zy = z.T @ y / n
    a = zx.T @ weight @ zx
    if np.linalg.matrix_rank(zx) < x.shape[1] or np.linalg.cond(a) > 1e14:
        raise RankError("instruments do not identify both slopes (rank-deficient Z'X)")
    return np.linalg.solve(a, zx.T @ weight @ zy)


def _invert_long_run(s: np.ndarray):
    """Inverse of S; adds a small ridge only if S is numerically singular."""
    try:
        np.linalg.cholesky(s)
        if np.linalg.cond(s) < 1e14:
            return np.linalg.inv(s), False
    except np.linalg.LinAlgError:
        pass
    ridge = 1e-10 * np.trace(s) / s.shape[0]
    s_reg = s + ridge * np.eye(s.shape[0])
    try:
        return np.linalg.inv(s_reg), True
    except np.linalg.LinAlgError as exc:
        raise RankError("long-run moment covariance is singular") from exc


@dataclass
class GmmResult:
    kappa_hat: float
    kappa_inf_hat: float
    hac_se: np.ndarray
    vcov: np.ndarray
    j_stat: float
    j_df: int
    j_pvalue: float
    first_step: np.ndarray
    bandwidth: int
    nobs: int
    n_instruments: int
    ridge: bool = False
    instruments: list = field(default_factory=list)
    long_run_cov: np.ndarray | None = None

    @property
    def params(self) -> np.ndarray:
        return np.array([self.kappa_hat, self.kappa_inf_hat])

    def conf_int(self, level: float = 0.95) -> np.ndarray:
        """Normal-approximation intervals, rows (kappa, kappa_inf)."""
        z = stats.norm.ppf(0.5 + level / 2.0)
        return np.column_stack([self.params - z * self.hac_se, self.params + z * self.hac_se])

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("long_run_cov")
        for key, value in out.items():
            if isinstance(value, np.ndarray):
                out[key] = value.tolist()
        return out


def two_step_linear(y, x, z, bandwidth: int, initial_weight: str = "2sls"):
    """Both GMM steps on arrays.

    Returns ``(step1, step2, S_hat, W1, ridge)`` where ``S_hat`` is the
    Newey-West covariance of the step-one moments and ``W1`` its inverse.
    """
    n, n_inst = z.shape
    if initial_weight == "2sls":
        zz = z.T @ z / n
        if np.linalg.matrix_rank(zz) < n_inst:
            raise RankError("instrument matrix is rank deficient")
        w0 = np.linalg.inv(zz)
    elif initial_weight == "identity":
        w0 = np.eye(n_inst)
    else:
        raise ParameterError(f"unknown initial weight {initial_weight!r}")
    step1 = linear_gmm(y, x, z, w0)
    g1 = z * (y - x @ step1)[:, None]
    s_hat = newey_west(g1, bandwidth)
    w1, ridge = _invert_long_run(s_hat)
    step2 = linear_gmm(y, x, z, w1)
    return step1, step2, s_hat, w1, ridge


def two_step_gmm(
    data: TimeSeriesDataset,
    spec: InstrumentSpec | None = None,
    beta: float = 0.996,
    bandwidth: int | None = None,
    initial_weight: str = "2sls",
) -> GmmResult:
    """Two-step efficient GMM with a Newey-West long-run covariance.

    Step one uses ``initial_weight``: ``"2sls"`` (inverse of Z'Z/T, the
    default, invariant to instrument scaling) or ``"identity"``. Step two
    weights by the inverse of the HAC covariance of the step-one moments.
    Standard errors come from (G' S^-1 G)^-1 / T and the J statistic is
    T g_bar' S^-1 g_bar with L - 2 degrees of freedom.
    """
    spec = InstrumentSpec() if spec is None else spec
    if not (0.0 < beta < 1.0):
        raise ParameterError(f"beta must lie in (0, 1), got {beta!r}")
    y, x, z = _design(data, spec, beta)
    n, n_inst = z.shape
    if bandwidth is None:
        bandwidth = auto_bandwidth(n)
    step1, step2, s_hat, w1, ridge = two_step_linear(y, x, z, bandwidth, initial_weight)

    g_jac = -(z.T @ x) / n
    omega = np.linalg.inv(g_jac.T @ w1 @ g_jac)
    vcov = 0.5 * (omega + omega.T) / n
    gbar = z.T @ (y - x @ step2) / n
    j_stat = float(n * gbar @ w1 @ gbar)
    j_df = n_inst - 2
    j_p = float(stats.chi2.sf(j_stat, j_df)) if j_df > 0 else float("nan")
    return GmmResult(
        kappa_hat=float(step2[0]),
        kappa_inf_hat=float(step2[1]),
        hac_se=np.sqrt(np.diag(vcov)),
        vcov=vcov,
        j_stat=j_stat,
        j_df=j_df,
        j_pvalue=j_p,
        first_step=step1,
        bandwidth=int(bandwidth),
        nobs=n,
        n_instruments=n_inst,
        ridge=ridge,
        instruments=spec.names(),
        long_run_cov=s_hat,
    )


def implied_phi_rho(kappa_hat: float, kappa_inf_hat: float, lambda_bar: float) -> float:
    """Algorithmic intensity backed out of estimated slopes.

    With kappa_hat = (1 - x) kappa and kappa_inf_hat = (1 + x) lambda_bar kappa,
    r = kappa_inf_hat / (lambda_bar kappa_hat) gives x = (r - 1) / (r + 1).
    """
    if not lambda_bar > 0 or kappa_hat == 0:
        raise ParameterError("need lambda_bar > 0 and a non-zero kappa estimate")
    r = kappa_inf_hat / (lambda_bar * kappa_hat)
    return (r - 1.0) / (r + 1.0)


def implied_eta_inf(result: GmmResult, data: TimeSeriesDataset, beta: float = 0.996) -> float:
    """Variance-share bound evaluated at the estimates and sample variances.

    The residual variance of the estimated curve stands in for var(u).
    """
    resid = data.pi - beta * data.pi_e - result.kappa_hat * data.ygap - result.kappa_inf_hat * data.cinf
    shocks = ShockMoments(var_inf=float(np.var(data.cinf)), var_ygap=float(np.var(data.ygap)), var_u=float(np.var(resid)))
    return variance_share_bound(SlopePair(result.kappa_hat, result.kappa_inf_hat), shocks)


# ---------------------------------------------------------------------------
# Monte Carlo harnesses


@dataclass
class ConsistencyTable:
    t_grid: np.ndarray
    rmse: np.ndarray  # (len(t_grid), 2): kappa, kappa_inf
    bias: np.ndarray
    rate: np.ndarray  # slope of log RMSE on log T per coefficient
    reps: int
    truth: np.ndarray
    failures: int = 0

    def rows(self):
        for t, r, b in zip(self.t_grid, self.rmse, self.bias):
            yield int(t), r, b


def _log_slope(t_grid, values):
    x = np.log(np.asarray(t_grid, dtype=float))
    return np.polyfit(x, np.log(values), 1)[0]


def _replicate(params, spec, t_len, reps, seed, instruments):
    estimates, ses = [], []
    failures = 0
    for r in range(reps):
        data = simulate_aggregate(params, spec, t_len, seed=seed + r)
        try:
            res = two_step_gmm(data, instruments, beta=params.beta)
        except RankError:
            failures += 1
            continue
        estimates.append(res.params)
        ses.append(res.hac_se)
    return np.array(estimates), np.array(ses), failures


def consistency_study(
    params: ModelParams,
    spec: ShockProcessSpec | None = None,
    t_grid=(500, 2000, 8000),
    reps: int = 200,
    seed: int = 0,
    instruments: InstrumentSpec | None = None,
) -> ConsistencyTable:
    """RMSE of the two-step estimates across sample sizes.

    Replication r at every T uses seed ``seed + r``. The fitted slope of
    log RMSE on log T should be close to -1/2.
    """
    if reps < 1:
        raise ParameterError("reps must be at least 1")
    truth = algorithmic_slopes(params)
    truth = np.array([truth.kappa, truth.kappa_inf])
    rmse, bias = [], []
    failures = 0
    for t_len in t_grid:
        est, _, fail = _replicate(params, spec, int(t_len), reps, seed, instruments)
        failures += fail
        err = est - truth
        rmse.append(np.sqrt(np.mean(err ** 2, axis=0)))
        bias.append(err.mean(axis=0))
    rmse = np.array(rmse)
    rate = np.array([_log_slope(t_grid, rmse[:, k]) for k in range(2)]) if len(t_grid) > 1 else np.full(2, np.nan)
    return ConsistencyTable(
        t_grid=np.asarray(t_grid),
        rmse=rmse,
        bias=np.array(bias),
        rate=rate,
        reps=reps,
        truth=truth,
        failures=failures,
    )


def coverage_study(
    params: ModelParams,
    spec: ShockProcessSpec | None = None,
    t_len: int = 5000,
    reps: int = 500,
    seed: int = 0,
    level: float = 0.95,
    instruments: InstrumentSpec | None = None,
) -> dict:
    """Share of replications whose HAC interval covers the true slopes.

    Also reports the J-test rejection rate at ``1 - level``.
    """
    truth = algorithmic_slopes(params)
    truth = np.array([truth.kappa, truth.kappa_inf])
    z = stats.norm.ppf(0.5 + level / 2.0)
    covered = np.zeros(2)
    j_reject = 0
    n = 0
    estimates = []
    for r in range(reps):
        data = simulate_aggregate(params, spec, t_len, seed=seed + r)
        res = two_step_gmm(data, instruments, beta=params.beta)
        covered += np.abs(res.params - truth) <= z * res.hac_se
        j_reject += res.j_pvalue < 1.0 - level
        estimates.append(res.params)
        n += 1
    estimates = np.array(estimates)
    return {
        "coverage": covered / n,
        "j_rejection_rate": j_reject / n,
        "mean": estimates.mean(axis=0),
        "mc_se": estimates.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.full(2, np.nan),
        "truth": truth,
        "reps": n,
    }
