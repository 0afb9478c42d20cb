"""Country fixed-effects regression with Driscoll-Kraay standard errors.

Model: pi_core[j, t] = alpha_j + b * cinf[j, t-1] + xi * ygap[j, t] + e[j, t].
Estimation is within-group OLS; the covariance applies Newey-West to the
time series of cross-sectionally summed score vectors, which keeps it
robust to arbitrary correlation of errors across countries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .exceptions import DataError, ParameterError, RankError
from .hac import auto_bandwidth, newey_west

__all__ = [
    "PanelDataset",
    "Demeaned",
    "PanelResult",
    "standardized_index",
    "within_transform",
    "driscoll_kraay",
    "pooled_ols_naive",
    "wald_equality",
    "fixed_b_critical_value",
    "simulate_panel",
]


@dataclass
class PanelDataset:
    """Balanced panel stored as (N countries, T periods) arrays.

    ``cinf`` is the contemporaneous inference-cost index; the estimator lags
    it within country. ``dropped_periods`` lists periods removed because at
    least one country had no observation there.
    """

    countries: np.ndarray
    periods: np.ndarray
    pi_core: np.ndarray
    cinf: np.ndarray
    ygap: np.ndarray
    dropped_periods: list = field(default_factory=list)

    def __post_init__(self):
        self.countries = np.asarray(self.countries)
        self.periods = np.asarray(self.periods)
        n, t = len(self.countries), len(self.periods)
        for name in ("pi_core", "cinf", "ygap"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if arr.shape != (n, t):
                raise DataError(f"{name} has shape {arr.shape}, expected {(n, t)}")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"{name} contains missing or non-finite values")
            setattr(self, name, arr)
        if len(set(self.countries.tolist())) != n:
            raise DataError("duplicate country identifiers")

    @property
    def n_units(self) -> int:
        return len(self.countries)

    @property
    def n_periods(self) -> int:
        return len(self.periods)

    @property
    def balanced(self) -> bool:
        return not self.dropped_periods

    @property
    def cinf_lag1(self) -> np.ndarray:
        """cinf[j, t-1]; the first column is NaN."""
        out = np.full_like(self.cinf, np.nan)
        out[:, 1:] = self.cinf[:, :-1]
        return out

    def regression_arrays(self):
        """(y, X) on the estimation sample, shapes (N, T-1) and (N, T-1, 2)."""
        if self.n_periods < 3:
            raise DataError("need at least three periods to lag the inference-cost index")
        y = self.pi_core[:, 1:]
        x = np.stack([self.cinf[:, :-1], self.ygap[:, 1:]], axis=-1)
        return y, x

    def to_long(self):
        """Rows (country, period, pi_core, cinf, ygap) in country-major order."""
        for j, c in enumerate(self.countries):
            for t, p in enumerate(self.periods):
                yield c, p, self.pi_core[j, t], self.cinf[j, t], self.ygap[j, t]


# Bartlett kernel fixed-b quantiles (Kiefer and Vogelsang, 2005), cubic in
# b = M / T with M the number of lags plus one; keyed by two-sided level
_FIXED_B = {
    0.80: (1.2816, 1.3040, 0.5322, -0.4228),
    0.90: (1.6449, 2.1859, 0.3142, -0.3427),
    0.95: (1.9600, 2.9694, 0.4160, -0.5324),
    0.98: (2.3263, 4.1618, 0.5368, -0.9620),
}


def fixed_b_critical_value(b: float, level: float = 0.95) -> float:
    """Two-sided fixed-b critical value for a Bartlett HAC t statistic."""
    key = round(level, 4)
    if key not in _FIXED_B:
        raise ParameterError(f"fixed-b quantiles available for levels {sorted(_FIXED_B)}, got {level!r}")
    if not 0.0 <= b <= 1.0:
        raise ParameterError(f"b must lie in [0, 1], got {b!r}")
    c0, c1, c2, c3 = _FIXED_B[key]
    return c0 + c1 * b + c2 * b ** 2 + c3 * b ** 3


def standardized_index(*series) -> np.ndarray:
    """Average of full-sample standardized series (last axis is time)."""
    z = []
    for s in series:
        s = np.asarray(s, dtype=float)
        sd = s.std(axis=-1, keepdims=True)
        if np.any(sd == 0):
            raise DataError("cannot standardize a constant series")
        z.append((s - s.mean(axis=-1, keepdims=True)) / sd)
    return np.mean(z, axis=0)


@dataclass
class Demeaned:
    """Within-transformed arrays plus the country means that were removed."""

    values: dict
    means: dict

    def restore(self) -> dict:
        return {k: v + self.means[k][:, None] for k, v in self.values.items()}


def within_transform(data: PanelDataset | dict) -> Demeaned:
    """Demean every (N, T) array by its own country mean.

    Accepts a :class:`PanelDataset` (columns pi_core, cinf, ygap) or a dict
    of (N, T) arrays.
    """
    if isinstance(data, PanelDataset):
        arrays = {"pi_core": data.pi_core, "cinf": data.cinf, "ygap": data.ygap}
    else:
        arrays = {k: np.atleast_2d(np.asarray(v, dtype=float)) for k, v in data.items()}
    values, means = {}, {}
    for key, arr in arrays.items():
        if not np.all(np.isfinite(arr)):
            raise DataError(f"{key} has gaps; align the panel before demeaning")
        m = arr.mean(axis=1)
        means[key] = m
        values[key] = arr - m[:, None]
    return Demeaned(values=values, means=means)


@dataclass
class PanelResult:
    b_hat: float
    xi_hat: float
    dk_se: np.ndarray
    vcov: np.ndarray
    r2_within: float
    fixed_effects: dict
    bandwidth: int
    n_units: int
    n_periods: int
    df_resid: int
    balanced: bool = True
    dropped_periods: list = field(default_factory=list)
    wald_p: float | None = None

    @property
    def params(self) -> np.ndarray:
        return np.array([self.b_hat, self.xi_hat])

    def critical_value(self, level: float = 0.95, method: str = "fixed-b") -> float:
        """Two-sided critical value for the DK t statistic.

        ``"fixed-b"`` uses the Bartlett-kernel fixed-b quantiles, which
        account for the noise in the long-run variance when the bandwidth
        is a non-negligible fraction of T; ``"t"`` uses t(T - 1).
        """
        if method == "t":
            return float(stats.t.ppf(0.5 + level / 2.0, self.df_resid))
        if method == "fixed-b":
            return fixed_b_critical_value((self.bandwidth + 1) / self.n_periods, level)
        raise ParameterError(f"unknown critical value method {method!r}")

    def conf_int(self, level: float = 0.95, method: str = "fixed-b") -> np.ndarray:
        crit = self.critical_value(level, method)
        return np.column_stack([self.params - crit * self.dk_se, self.params + crit * self.dk_se])

    def to_dict(self) -> dict:
        return {
            "b_hat": self.b_hat,
            "xi_hat": self.xi_hat,
            "dk_se": self.dk_se.tolist(),
            "vcov": self.vcov.tolist(),
            "r2_within": self.r2_within,
            "fixed_effects": {str(k): v for k, v in self.fixed_effects.items()},
            "bandwidth": self.bandwidth,
            "n_units": self.n_units,
            "n_periods": self.n_periods,
            "balanced": self.balanced,
            "dropped_periods": [str(p) for p in self.dropped_periods],
            "wald_p": self.wald_p,
        }


def _within_ols(y, x):
    n, t, k = x.shape
    ym = y.mean(axis=1, keepdims=True)
    xm = x.mean(axis=1, keepdims=True)
    yd = y - ym
    xd = x - xm
    xf = xd.reshape(n * t, k)
    xtx = xf.T @ xf
    if np.linalg.matrix_rank(xtx) < k:
        raise RankError("within-transformed regressors are collinear")
    beta = np.linalg.solve(xtx, xf.T @ yd.reshape(-1))
    resid = yd - xd @ beta
    return beta, resid, xd, yd, xtx, ym[:, 0], xm[:, 0, :]


def driscoll_kraay(data: PanelDataset, bandwidth: int | None = None) -> PanelResult:
    """Within-group OLS with Driscoll-Kraay covariance.

    With a single country this is time-series OLS with an intercept and a
    Newey-West covariance.
    """
    y, x = data.regression_arrays()
    n, t, k = x.shape
    if bandwidth is None:
        bandwidth = auto_bandwidth(t)
    if bandwidth >= t:
        raise ParameterError(f"bandwidth {bandwidth} must be smaller than T={t}")
    beta, resid, xd, yd, xtx, ym, xm = _within_ols(y, x)
    scores = np.einsum("ntk,nt->tk", xd, resid)
    s = newey_west(scores, bandwidth, center=False)
    bread = np.linalg.inv(xtx)
    vcov = t * bread @ s @ bread
    vcov = 0.5 * (vcov + vcov.T)
    sst = float(np.sum(yd ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / sst if sst > 0 else 0.0
    fe = {c: float(ym[j] - xm[j] @ beta) for j, c in enumerate(data.countries.tolist())}
    return PanelResult(
        b_hat=float(beta[0]),
        xi_hat=float(beta[1]),
        dk_se=np.sqrt(np.diag(vcov)),
        vcov=vcov,
        r2_within=r2,
        fixed_effects=fe,
        bandwidth=int(bandwidth),
        n_units=n,
        n_periods=t,
        df_resid=t - 1,
        balanced=data.balanced,
        dropped_periods=list(data.dropped_periods),
    )


def pooled_ols_naive(data: PanelDataset) -> tuple[np.ndarray, np.ndarray]:
    """Within estimates with the textbook iid covariance, for comparison."""
    y, x = data.regression_arrays()
    n, t, k = x.shape
    beta, resid, _, _, xtx, _, _ = _within_ols(y, x)
    dof = n * t - n - k
    sigma2 = float(np.sum(resid ** 2)) / dof
    return beta, np.sqrt(np.diag(sigma2 * np.linalg.inv(xtx)))


def wald_equality(result: PanelResult, external_coef: float, external_se: float, index: int = 0) -> float:
    """p-value of H0: coefficient ``index`` equals an independent estimate.

    The two estimates are treated as independent, so the variance of the
    difference is the sum of squared standard errors.
    """
    var = float(result.dk_se[index]) ** 2 + float(external_se) ** 2
    if not var > 0:
        raise ParameterError("Wald test needs a positive variance of the difference")
    stat = (float(result.params[index]) - float(external_coef)) ** 2 / var
    return float(stats.chi2.sf(stat, 1))


def simulate_panel(
    b: float = 0.094,
    xi: float = 0.038,
    n_countries: int = 7,
    t_len: int = 52,
    seed=None,
    error_std: float = 0.05,
    common_share: float = 0.0,
    regressor_common_share: float = 0.0,
    cinf_persistence: float = 0.9,
    ygap_persistence: float = 0.8,
) -> PanelDataset:
    """Synthetic panel from the reduced-form country regression.

    ``t_len`` is the estimation sample; one pre-sample period is added so
    the lagged index is available. ``common_share`` is the variance share
    of a shock common to all countries in the regression error, and
    ``regressor_common_share`` the same for the regressors.
    """
    if n_countries < 1 or t_len < 2:
        raise ParameterError("need at least one country and two periods")
    for name, v in (("common_share", common_share), ("regressor_common_share", regressor_common_share)):
        if not 0.0 <= v <= 1.0:
            raise ParameterError(f"{name} must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    total = t_len + 1

    def factor_ar1(persistence, share):
        common = _ar1(rng, persistence, 1, total)
        idio = _ar1(rng, persistence, n_countries, total)
        return np.sqrt(share) * common + np.sqrt(1.0 - share) * idio

    cinf = factor_ar1(cinf_persistence, regressor_common_share)
    ygap = factor_ar1(ygap_persistence, regressor_common_share)
    err = error_std * (
        np.sqrt(common_share) * rng.standard_normal((1, total))
        + np.sqrt(1.0 - common_share) * rng.standard_normal((n_countries, total))
    )
    alpha = rng.normal(0.2, 0.1, size=(n_countries, 1))
    pi = np.empty((n_countries, total))
    pi[:, 1:] = alpha + b * cinf[:, :-1] + xi * ygap[:, 1:] + err[:, 1:]
    pi[:, 0] = alpha[:, 0] + err[:, 0]
    return PanelDataset(
        countries=np.array([f"C{j + 1}" for j in range(n_countries)]),
        periods=np.arange(total),
        pi_core=pi,
        cinf=cinf,
        ygap=ygap,
    )


def _ar1(rng, persistence, n, t):
    e = rng.standard_normal((n, t))
    out = np.empty((n, t))
    out[:, 0] = e[:, 0] / np.sqrt(1.0 - persistence ** 2)
    for s in range(1, t):
        out[:, s] = persistence * out[:, s - 1] + e[:, s]
    return out
