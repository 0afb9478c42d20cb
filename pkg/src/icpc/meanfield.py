"""Fokker-Planck solver for the cross-sectional log-price density.

The density mu_t of firm log prices evolves as

    d mu / dt = -d/dp (b mu) + (sigma_p2 / 2) d^2 mu / dp^2,
    b(p; mu, ygap, cinf) = kappa * ygap + kappa_inf * cinf + beta * E_mu[p] - p,

so the mean price moves with kappa ygap + kappa_inf cinf - (1 - beta) E[p].
The coefficient on -p is exposed as ``reversion`` (1 in the model) so that
pure diffusion and pure advection can be run as checks.
One unit of solver time is one model period; shocks are held fixed within
a period.

The solver is a conservative finite-volume scheme on a bounded grid with
reflecting (zero-flux) walls: upwind fluxes for the drift, central
differences for diffusion, explicit Euler in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .core import ModelParams, algorithmic_slopes, closed_form_slopes
from .exceptions import ParameterError, StabilityError, ValidationError
from .simulate import IntensityDistribution, ShockProcessSpec, sample_intensities, simulate_firm_panel, simulate_shocks

__all__ = [
    "CFL_SAFETY",
    "DensityGrid",
    "MeanFieldConfig",
    "MeanPath",
    "gaussian_grid",
    "point_mass_grid",
    "max_stable_dt",
    "fp_step",
    "mean_path_ode",
    "domain_for",
    "fp_mean_path",
    "simulate_particles",
    "empirical_vs_fp_distance",
    "regress_inflation",
    "calibrate_sigma_p2",
    "ConvergenceResult",
    "convergence_study",
]

CFL_SAFETY = 0.4
W1_NODES = 2048


@dataclass(frozen=True)
class MeanFieldConfig:
    """Drift and diffusion coefficients of the price-density equation."""

    sigma_p2: float
    kappa: float
    kappa_inf: float
    beta: float
    reversion: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma_p2) and self.sigma_p2 >= 0.0):
            raise ParameterError(f"sigma_p2 must be non-negative, got {self.sigma_p2!r}")
        if not (0.0 <= self.beta <= 1.0):
            raise ParameterError(f"beta must lie in [0, 1], got {self.beta!r}")
        if not (math.isfinite(self.reversion) and self.reversion >= 0.0):
            raise ParameterError(f"reversion must be non-negative, got {self.reversion!r}")

    @classmethod
    def from_params(cls, params: ModelParams, sigma_p2: float, algorithmic: bool = False) -> "MeanFieldConfig":
        """Coefficients implied by a calibration.

        The cost coefficient is kappa_inf = lambda_bar * kappa, so the first
        moment reproduces the inflation equation's slopes. With
        ``algorithmic`` the attenuated/amplified slopes are used.
        """
        slopes = algorithmic_slopes(params) if algorithmic else closed_form_slopes(params)
        return cls(sigma_p2=float(sigma_p2), kappa=slopes.kappa, kappa_inf=slopes.kappa_inf, beta=params.beta)

    def forcing(self, ygap: float, cinf: float) -> float:
        return self.kappa * ygap + self.kappa_inf * cinf

    @property
    def mean_decay(self) -> float:
        """Rate at which the mean price decays: reversion - beta."""
        return self.reversion - self.beta

    @property
    def stationary_variance(self) -> float:
        """Cross-sectional variance the spread relaxes to (sigma_p2 / (2 reversion))."""
        return self.sigma_p2 / (2.0 * self.reversion) if self.reversion > 0 else math.inf


@dataclass(frozen=True)
class DensityGrid:
    """Cell-averaged density on [lower, upper] with ``m`` equal cells."""

    lower: float
    upper: float
    values: np.ndarray
    dt: float = 0.0
    sigma_p2: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or len(values) < 16:
            raise ValidationError("density grid needs at least 16 cells")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper) and self.lower < self.upper):
            raise ValidationError("grid bounds must be finite with lower < upper")
        if np.any(values < 0.0) or not np.all(np.isfinite(values)):
            raise ValidationError("density values must be finite and non-negative")

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def width(self) -> float:
        return (self.upper - self.lower) / self.m

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.m + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.lower + (np.arange(self.m) + 0.5) * self.width

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.width)

    def mean(self) -> float:
        return float(np.sum(self.centers * self.values) * self.width)

    def variance(self) -> float:
        """Variance of the piecewise-constant density (includes the h^2/12 cell term)."""
        c = self.centers
        mu = self.mean()
        return float(np.sum((c - mu) ** 2 * self.values) * self.width + self.width ** 2 / 12.0)

    def cdf_at_edges(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.values) * self.width])

    def quantile(self, u) -> np.ndarray:
        """Inverse CDF of the piecewise-linear cumulative distribution."""
        u = np.asarray(u, dtype=float)
        cdf = self.cdf_at_edges()
        cdf = cdf / cdf[-1]
        edges = self.edges
        k = np.clip(np.searchsorted(cdf, u, side="left"), 1, self.m)
        lo, hi = cdf[k - 1], cdf[k]
        frac = np.where(hi > lo, (u - lo) / np.where(hi > lo, hi - lo, 1.0), 0.5)
        return edges[k - 1] + np.clip(frac, 0.0, 1.0) * self.width

    def with_values(self, values) -> "DensityGrid":
        return replace(self, values=values)


def gaussian_grid(mean: float, var: float, lower: float, upper: float, m: int = 512) -> DensityGrid:
    """Cell averages of a normal density, renormalized to unit mass."""
    edges = np.linspace(lower, upper, m + 1)
    cdf = stats.norm.cdf(edges, loc=mean, scale=math.sqrt(var))
    values = np.diff(cdf) / np.diff(edges)
    values /= values.sum() * (upper - lower) / m
    return DensityGrid(lower, upper, values)


def point_mass_grid(location: float, lower: float, upper: float, m: int = 512) -> DensityGrid:
    """All mass in the cell containing ``location``."""
    values = np.zeros(m)
    h = (upper - lower) / m
    j = int(np.clip((location - lower) // h, 0, m - 1))
    values[j] = 1.0 / h
    return DensityGrid(lower, upper, values)


def _face_drift(grid: DensityGrid, cfg: MeanFieldConfig, forcing: float, mean: float) -> np.ndarray:
    inner = grid.edges[1:-1]
    return forcing + cfg.beta * mean - cfg.reversion * inner


def max_stable_dt(width: float, max_drift: float, sigma_p2: float) -> float:
    """Largest explicit step allowed by the CFL rule with safety factor 0.4."""
    limits = []
    if max_drift > 0:
        limits.append(width / max_drift)
    if sigma_p2 > 0:
        limits.append(width ** 2 / sigma_p2)
    return CFL_SAFETY * min(limits) if limits else math.inf


def _step_values(values, width, drift_faces, diff_coef, dt):
    # fluxes through the m-1 interior faces; walls carry zero flux
    upwind = np.where(drift_faces > 0.0, drift_faces * values[:-1], drift_faces * values[1:])
    flux = upwind - diff_coef * (values[1:] - values[:-1]) / width
    div = np.zeros_like(values)
    div[:-1] += flux
    div[1:] -= flux
    return values - dt / width * div


def fp_step(grid: DensityGrid, cfg: MeanFieldConfig, ygap: float, cinf: float, dt: float | None = None) -> DensityGrid:
    """Advance the density by one explicit step of length ``dt``.

    ``dt`` defaults to ``grid.dt``. Raises :class:`StabilityError` when the
    step breaks the CFL rule; shrink ``dt`` and retry.
    """
    dt = grid.dt if dt is None else dt
    if not dt > 0:
        raise ParameterError("time step must be positive")
    b = _face_drift(grid, cfg, cfg.forcing(ygap, cinf), grid.mean())
    limit = max_stable_dt(grid.width, float(np.max(np.abs(b))), cfg.sigma_p2)
    if dt > limit * (1.0 + 1e-12):
        raise StabilityError(f"dt={dt:.3g} exceeds the stable step {limit:.3g}")
    values = _step_values(grid.values, grid.width, b, 0.5 * cfg.sigma_p2, dt)
    return replace(grid, values=values, dt=dt, sigma_p2=cfg.sigma_p2)


def mean_path_ode(cfg: MeanFieldConfig, ygap, cinf, m0: float = 0.0) -> np.ndarray:
    """Exact mean of the continuous equation at period ends (length T + 1)."""
    decay = cfg.mean_decay
    out = np.empty(len(ygap) + 1)
    out[0] = m0
    g = math.exp(-decay)
    gain = -math.expm1(-decay) / decay if decay != 0 else 1.0
    for t, (y, c) in enumerate(zip(ygap, cinf)):
        out[t + 1] = g * out[t] + gain * cfg.forcing(y, c)
    return out


def domain_for(cfg: MeanFieldConfig, ygap, cinf, m0: float = 0.0, var0: float = 0.0, n_sd: float = 6.0):
    """Bounds covering the mean path plus ``n_sd`` stationary standard deviations.

    Deviations from the mean relax at rate ``reversion``, so the stationary
    cross-sectional variance is sigma_p2 / (2 reversion).
    """
    if cfg.reversion <= 0:
        raise ParameterError("domain_for needs a mean-reverting drift")
    path = mean_path_ode(cfg, ygap, cinf, m0)
    sd = math.sqrt(max(cfg.stationary_variance, var0))
    if sd == 0:
        raise ParameterError("degenerate domain: zero diffusion and zero initial variance")
    return float(path.min() - n_sd * sd), float(path.max() + n_sd * sd)


@dataclass
class MeanPath:
    """Solver output: period-end means, implied inflation and snapshots."""

    mean: np.ndarray
    grid: DensityGrid
    substeps: int
    snapshots: np.ndarray | None = None
    mass_error: float = 0.0

    @property
    def inflation(self) -> np.ndarray:
        return np.diff(self.mean)


def fp_mean_path(
    cfg: MeanFieldConfig,
    ygap,
    cinf,
    grid: DensityGrid,
    t_len: int | None = None,
    keep_snapshots: bool = False,
) -> MeanPath:
    """Run the solver over a shock path, one unit of time per period.

    The number of substeps per period is chosen so every step satisfies the
    CFL rule. ``mass_error`` is the largest deviation of total mass from one
    seen at any period end.
    """
    ygap = np.asarray(ygap, dtype=float)
    cinf = np.asarray(cinf, dtype=float)
    if t_len is None:
        t_len = len(ygap)
    if len(ygap) < t_len or len(cinf) < t_len:
        raise ParameterError("shock paths are shorter than t_len")
    width = grid.width
    inner = grid.edges[1:-1]
    centers = grid.centers
    span = grid.upper - grid.lower
    diff = 0.5 * cfg.sigma_p2
    values = grid.values.copy()
    means = np.empty(t_len + 1)
    means[0] = float(np.sum(centers * values) * width)
    snaps = np.empty((t_len, grid.m)) if keep_snapshots else None
    mass_error = abs(values.sum() * width - 1.0)
    substeps = 1
    for t in range(t_len):
        f = cfg.forcing(ygap[t], cinf[t])
        # drift is linear in p, so it peaks at the outer faces; allow for the
        # mean moving by at most |f| + (1 - beta) span within the period
        m_now = np.dot(centers, values) * width
        slack = cfg.beta * (abs(f) + abs(cfg.mean_decay) * span + width)
        centre = f + cfg.beta * m_now
        r = cfg.reversion
        bound = max(abs(centre - r * inner[0]), abs(centre - r * inner[-1])) + slack
        n_sub = max(1, math.ceil(1.0 / max_stable_dt(width, bound, cfg.sigma_p2)))
        substeps = max(substeps, n_sub)
        dt = 1.0 / n_sub
        for _ in range(n_sub):
            mean = np.dot(centers, values) * width
            values = _step_values(values, width, f + cfg.beta * mean - cfg.reversion * inner, diff, dt)
        means[t + 1] = float(np.dot(centers, values) * width)
        mass_error = max(mass_error, abs(values.sum() * width - 1.0))
        if snaps is not None:
            snaps[t] = values
    if np.any(values < 0.0):
        raise StabilityError("density went negative; reduce the grid width or the step")
    out_grid = replace(grid, values=values, dt=1.0 / substeps, sigma_p2=cfg.sigma_p2)
    return MeanPath(mean=means, grid=out_grid, substeps=substeps, snapshots=snaps, mass_error=mass_error)


def simulate_particles(
    cfg: MeanFieldConfig,
    ygap,
    cinf,
    initial,
    cost_loadings=None,
    dt: float = 0.005,
    seed=None,
) -> np.ndarray:
    """N-firm Euler-Maruyama counterpart of the density equation.

    Firm i follows dp_i = (kappa ygap + k_i cinf + beta mean(p) - p_i) dt
    + sigma_p dW_i, where ``cost_loadings`` gives k_i (defaults to
    ``cfg.kappa_inf`` for every firm; pass kappa * lambda_i for
    heterogeneous AI intensity). Returns period-end prices, shape (T, N).
    """
    p = np.array(initial, dtype=float)
    n = len(p)
    k = np.full(n, cfg.kappa_inf) if cost_loadings is None else np.asarray(cost_loadings, dtype=float)
    if k.shape != (n,):
        raise ParameterError("cost_loadings must have one entry per firm")
    n_sub = max(1, round(1.0 / dt))
    h = 1.0 / n_sub
    scale = math.sqrt(cfg.sigma_p2 * h)
    rng = np.random.default_rng(seed)
    ygap = np.asarray(ygap, dtype=float)
    cinf = np.asarray(cinf, dtype=float)
    out = np.empty((len(ygap), n))
    for t in range(len(ygap)):
        base = cfg.kappa * ygap[t]
        cost = k * cinf[t]
        for _ in range(n_sub):
            p += (base + cost + cfg.beta * p.mean() - cfg.reversion * p) * h + scale * rng.standard_normal(n)
        out[t] = p
    return out


def empirical_vs_fp_distance(prices, grid: DensityGrid, n_nodes: int = W1_NODES) -> float:
    """Wasserstein-1 distance between firm prices and a grid density.

    Integrates |F_emp^-1(u) - F_grid^-1(u)| over u on ``n_nodes`` midpoint
    quantile nodes.
    """
    x = np.sort(np.asarray(prices, dtype=float).ravel())
    if x.size == 0:
        raise ValidationError("need at least one firm price")
    u = (np.arange(n_nodes) + 0.5) / n_nodes
    emp = x[np.minimum((u * x.size).astype(int), x.size - 1)]
    return float(np.mean(np.abs(emp - grid.quantile(u))))


def regress_inflation(inflation, ygap, cinf, controls=None) -> np.ndarray:
    """OLS of inflation on a constant, ygap, cinf (and optional controls).

    Returns the coefficients on (ygap, cinf).
    """
    cols = [np.ones(len(inflation)), np.asarray(ygap), np.asarray(cinf)]
    if controls is not None:
        cols += list(np.atleast_2d(np.asarray(controls, dtype=float)))
    x = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(x, np.asarray(inflation, dtype=float), rcond=None)
    return coef[1:3]


def calibrate_sigma_p2(prices: np.ndarray, burn_in: int) -> float:
    """Average cross-sectional price variance over the second half of the burn-in.

    ``prices`` has shape (T, N), e.g. ``FirmPanel.prices``.
    """
    prices = np.asarray(prices, dtype=float)
    if not 2 <= burn_in <= prices.shape[0]:
        raise ParameterError("burn_in must lie between 2 and the number of periods")
    window = prices[burn_in // 2 : burn_in]
    return float(window.var(axis=1).mean())


@dataclass(frozen=True)
class ConvergenceResult:
    """W1 distances between N-firm panels and the density solution.

    ``distances[k]`` holds one row per replication and one column per
    period for ``n_firms[k]``. ``slope_ratio`` is the cinf/ygap coefficient
    ratio from regressing solver inflation on the shocks, and
    ``mean_rel_rmse`` the relative RMSE of solver inflation against the
    inflation equation on the same shocks.
    """

    n_firms: tuple
    distances: np.ndarray
    sigma_p2: float
    slope_coef: np.ndarray
    slope_ratio: float
    mean_rel_rmse: float
    final_grid: DensityGrid | None = None

    @property
    def medians(self) -> np.ndarray:
        return np.median(self.distances.reshape(len(self.n_firms), -1), axis=1)

    @property
    def non_increasing(self) -> bool:
        return bool(np.all(np.diff(self.medians) <= 0.0))

    def to_dict(self) -> dict:
        return {
            "n_firms": [int(n) for n in self.n_firms],
            "median_w1": [float(v) for v in self.medians],
            "non_increasing": self.non_increasing,
            "sigma_p2": self.sigma_p2,
            "slope_ygap": float(self.slope_coef[0]),
            "slope_cinf": float(self.slope_coef[1]),
            "slope_ratio": self.slope_ratio,
            "mean_rel_rmse": self.mean_rel_rmse,
        }


def convergence_study(
    params: ModelParams,
    dist: IntensityDistribution | None = None,
    sigma_p2: float | None = None,
    n_grid=(100, 1_000, 10_000),
    reps: int = 5,
    t_len: int = 10,
    m: int = 256,
    dt: float = 0.01,
    seed: int = 0,
    regression_t_len: int = 120,
) -> ConvergenceResult:
    """Empirical-measure convergence and first-moment recovery.

    For each replication one iid shock path is drawn and shared by the
    density solver and by N-firm panels for every N in ``n_grid``; firm i
    carries cost loading kappa * lambda_i with lambda_i drawn from ``dist``
    (point mass at lambda_bar by default). Initial prices are drawn from
    the stationary Gaussian, which is also the solver's initial density.

    ``sigma_p2=None`` calibrates the diffusion from the burn-in spread of a
    Calvo firm panel, scaled by 2 so the stationary variance sigma_p2 / 2
    equals the measured spread.

    The slope check regresses solver inflation on (ygap, cinf) over a
    separate ``regression_t_len``-period path; ``mean_rel_rmse`` is the
    relative RMSE between solver inflation and the inflation equation on
    that path.
    """
    if reps < 1 or t_len < 1:
        raise ParameterError("reps and t_len must be positive")
    n_grid = tuple(int(n) for n in n_grid)
    if any(n < 2 for n in n_grid):
        raise ParameterError("each panel needs at least two firms")
    if dist is None:
        dist = IntensityDistribution.point_mass(params.lambda_bar)
    if sigma_p2 is None:
        panel = simulate_firm_panel(params, dist, ShockProcessSpec(), n_firms=1_000, t_len=100, seed=seed)
        sigma_p2 = 2.0 * calibrate_sigma_p2(panel.prices, burn_in=100)
    cfg = MeanFieldConfig.from_params(params, sigma_p2)
    var0 = cfg.stationary_variance
    white = ShockProcessSpec.white_noise(u_std=0.0)

    dists = np.empty((len(n_grid), reps, t_len))
    for r in range(reps):
        shocks = simulate_shocks(white, t_len, seed=seed + r)
        lower, upper = domain_for(cfg, shocks.ygap, shocks.cinf, 0.0, var0)
        grid = gaussian_grid(0.0, var0, lower, upper, m)
        sol = fp_mean_path(cfg, shocks.ygap, shocks.cinf, grid, keep_snapshots=True)
        for k, n in enumerate(n_grid):
            rng = np.random.default_rng([seed + r, n])
            lam = sample_intensities(dist, n, seed=rng)
            p0 = rng.normal(0.0, math.sqrt(var0), n)
            prices = simulate_particles(cfg, shocks.ygap, shocks.cinf, p0, cfg.kappa * lam, dt=dt, seed=rng)
            for t in range(t_len):
                dists[k, r, t] = empirical_vs_fp_distance(prices[t], grid.with_values(sol.snapshots[t]))

    shocks = simulate_shocks(white, regression_t_len, seed=seed + reps)
    lower, upper = domain_for(cfg, shocks.ygap, shocks.cinf, 0.0, var0)
    sol = fp_mean_path(cfg, shocks.ygap, shocks.cinf, gaussian_grid(0.0, var0, lower, upper, m))
    coef = regress_inflation(sol.inflation, shocks.ygap, shocks.cinf)
    # with serially uncorrelated shocks and no cost-push term the inflation
    # equation reduces to kappa ygap + kappa_inf cinf
    target = cfg.forcing(shocks.ygap, shocks.cinf)
    rel_rmse = float(np.sqrt(np.mean((sol.inflation - target) ** 2) / np.mean(target**2)))
    return ConvergenceResult(
        n_firms=n_grid,
        distances=dists,
        sigma_p2=float(sigma_p2),
        slope_coef=coef,
        slope_ratio=float(coef[1] / coef[0]),
        mean_rel_rmse=rel_rmse,
        final_grid=sol.grid,
    )
