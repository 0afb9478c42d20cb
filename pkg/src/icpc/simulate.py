"""Synthetic economies that satisfy the inference-cost Phillips curve.

Two generators live here. :func:`simulate_aggregate` builds inflation from
the forward solution of the ICPC under AR(1) forcing, so the generated data
satisfy the inflation equation exactly. :func:`simulate_firm_panel` runs an
N-firm Calvo economy with heterogeneous AI intensities and algorithmic
price setters whose cross-firm mean reproduces the same aggregate.

All randomness flows through ``numpy.random.default_rng(seed)``; identical
seeds give bit-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, stats

from .core import ModelParams, SlopePair, algorithmic_slopes
from .exceptions import DataError, ParameterError

__all__ = [
    "IntensityDistribution",
    "AR1",
    "ShockProcessSpec",
    "ShockPaths",
    "TimeSeriesDataset",
    "FirmPanel",
    "sample_intensities",
    "simulate_shocks",
    "icpc_loadings",
    "simulate_aggregate",
    "simulate_firm_panel",
]


# ---------------------------------------------------------------------------
# intensity distributions


@dataclass(frozen=True)
class IntensityDistribution:
    """Cross-firm distribution of AI intensity on [0, 1].

    Use the constructors :meth:`point_mass`, :meth:`uniform`,
    :meth:`two_point` and :meth:`truncated_beta` rather than building one by
    hand.
    """

    kind: str
    params: tuple

    KINDS = ("point-mass", "uniform", "two-point", "truncated-beta")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown intensity distribution kind {self.kind!r}")
        p = self.params
        if self.kind == "point-mass":
            (value,) = p
            _unit("point mass", value)
        elif self.kind == "uniform":
            a, b = p
            _unit("uniform lower bound", a)
            _unit("uniform upper bound", b)
            if not a <= b:
                raise ParameterError("uniform bounds must satisfy a <= b")
        elif self.kind == "two-point":
            low, high, weight_high = p
            _unit("two-point low", low)
            _unit("two-point high", high)
            _unit("two-point weight", weight_high)
        else:
            a, b, lo, hi = p
            if not (a > 0 and b > 0):
                raise ParameterError("beta shape parameters must be positive")
            _unit("truncation lower bound", lo)
            _unit("truncation upper bound", hi)
            if not lo < hi:
                raise ParameterError("truncation bounds must satisfy lo < hi")

    @classmethod
    def point_mass(cls, value: float) -> "IntensityDistribution":
        return cls("point-mass", (float(value),))

    @classmethod
    def uniform(cls, a: float = 0.0, b: float = 1.0) -> "IntensityDistribution":
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def two_point(cls, low: float, high: float, weight_high: float) -> "IntensityDistribution":
        return cls("two-point", (float(low), float(high), float(weight_high)))

    @classmethod
    def truncated_beta(cls, a: float, b: float, lo: float = 0.0, hi: float = 1.0) -> "IntensityDistribution":
        """Beta(a, b) restricted to [lo, hi]."""
        return cls("truncated-beta", (float(a), float(b), float(lo), float(hi)))

    def mean(self) -> float:
        p = self.params
        if self.kind == "point-mass":
            return p[0]
        if self.kind == "uniform":
            return 0.5 * (p[0] + p[1])
        if self.kind == "two-point":
            low, high, w = p
            return (1.0 - w) * low + w * high
        a, b, lo, hi = p
        # E[X | lo <= X <= hi] for X ~ Beta(a, b) via the Beta(a+1, b) identity
        mass = stats.beta.cdf(hi, a, b) - stats.beta.cdf(lo, a, b)
        upper = stats.beta.cdf(hi, a + 1, b) - stats.beta.cdf(lo, a + 1, b)
        return a / (a + b) * upper / mass

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        p = self.params
        if self.kind == "point-mass":
            return np.full(n, p[0])
        if self.kind == "uniform":
            return rng.uniform(p[0], p[1], size=n)
        if self.kind == "two-point":
            low, high, w = p
            return np.where(rng.random(n) < w, high, low)
        a, b, lo, hi = p
        u_lo, u_hi = stats.beta.cdf([lo, hi], a, b)
        return stats.beta.ppf(rng.uniform(u_lo, u_hi, size=n), a, b)


def _unit(name, value):
    if not (0.0 <= value <= 1.0):
        raise ParameterError(f"{name} must lie in [0, 1], got {value!r}")


def sample_intensities(dist: IntensityDistribution, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` firm AI intensities from ``dist``."""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    return dist.sample(int(n), np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# shock processes


@dataclass(frozen=True)
class AR1:
    """x_t = persistence * x_{t-1} + std * e_t, e_t ~ N(0, 1)."""

    persistence: float
    std: float = 1.0

    def __post_init__(self):
        if not (-1.0 < self.persistence < 1.0):
            raise ParameterError(f"AR(1) persistence must lie in (-1, 1), got {self.persistence!r}")
        if not (math.isfinite(self.std) and self.std >= 0.0):
            raise ParameterError(f"innovation std must be non-negative, got {self.std!r}")

    @property
    def stationary_variance(self) -> float:
        return self.std ** 2 / (1.0 - self.persistence ** 2)


@dataclass(frozen=True)
class ShockProcessSpec:
    """AR(1) laws for the output gap, inference cost and cost push.

    ``expectation_noise`` is the std of Gaussian measurement error added to
    the model-consistent inflation expectation.
    """

    ygap: AR1 = field(default_factory=lambda: AR1(0.90, 1.0))
    cinf: AR1 = field(default_factory=lambda: AR1(0.95, 1.0))
    u: AR1 = field(default_factory=lambda: AR1(0.30, 1.0))
    expectation_noise: float = 0.0

    def __post_init__(self):
        for name in ("ygap", "cinf", "u"):
            if not isinstance(getattr(self, name), AR1):
                raise ParameterError(f"{name} must be an AR1 process")
        if not (math.isfinite(self.expectation_noise) and self.expectation_noise >= 0.0):
            raise ParameterError("expectation_noise must be non-negative")

    @classmethod
    def white_noise(cls, ygap_std=1.0, cinf_std=1.0, u_std=1.0, expectation_noise=0.0) -> "ShockProcessSpec":
        """Serially uncorrelated forcing."""
        return cls(AR1(0.0, ygap_std), AR1(0.0, cinf_std), AR1(0.0, u_std), expectation_noise)


@dataclass(frozen=True)
class ShockPaths:
    ygap: np.ndarray
    cinf: np.ndarray
    u: np.ndarray
    expectation_noise: np.ndarray

    def __len__(self):
        return len(self.ygap)


def _ar1_path(proc: AR1, innovations: np.ndarray, x0: float) -> np.ndarray:
    # x_t = rho x_{t-1} + s e_t with x_{-1} := x0 drawn from the stationary law
    y, _ = signal.lfilter([proc.std], [1.0, -proc.persistence], innovations, zi=[proc.persistence * x0])
    return y


def simulate_shocks(spec: ShockProcessSpec, t_len: int, seed=None) -> ShockPaths:
    """Draw stationary AR(1) paths for every shock.

    Each path starts from a draw of its stationary distribution. The three
    innovation sequences are independent, so the cost-push shock is
    orthogonal to inference cost in population.
    """
    if int(t_len) != t_len or t_len < 1:
        raise ParameterError(f"t_len must be a positive integer, got {t_len!r}")
    t_len = int(t_len)
    rng = np.random.default_rng(seed)
    paths = []
    for proc in (spec.ygap, spec.cinf, spec.u):
        x0 = rng.standard_normal() * math.sqrt(proc.stationary_variance)
        paths.append(_ar1_path(proc, rng.standard_normal(t_len), x0))
    noise = spec.expectation_noise * rng.standard_normal(t_len)
    return ShockPaths(ygap=paths[0], cinf=paths[1], u=paths[2], expectation_noise=noise)


# ---------------------------------------------------------------------------
# datasets


@dataclass
class TimeSeriesDataset:
    """Aligned series for ICPC estimation.

    Row ``t`` holds pi_t, the expectation of pi_{t+1} formed at t, the
    output gap, the inference-cost index and (when known) the cost-push
    shock.
    """

    pi: np.ndarray
    pi_e: np.ndarray
    ygap: np.ndarray
    cinf: np.ndarray
    u: np.ndarray | None = None
    period: np.ndarray | None = None

    COLUMNS = ("pi", "pi_e", "ygap", "cinf")

    def __post_init__(self):
        for name in self.COLUMNS + ("u",):
            value = getattr(self, name)
            if value is None:
                continue
            arr = np.asarray(value, dtype=float)
            if arr.ndim != 1:
                raise DataError(f"column {name!r} must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"column {name!r} contains missing or non-finite values")
            setattr(self, name, arr)
        n = len(self.pi)
        for name in self.COLUMNS[1:] + ("u",):
            value = getattr(self, name)
            if value is not None and len(value) != n:
                raise DataError(f"column {name!r} has length {len(value)}, expected {n}")
        if self.period is None:
            self.period = np.arange(n)
        else:
            self.period = np.asarray(self.period)
            if len(self.period) != n:
                raise DataError(f"period labels have length {len(self.period)}, expected {n}")

    def __len__(self):
        return len(self.pi)

    def slice(self, start=None, stop=None) -> "TimeSeriesDataset":
        s = slice(start, stop)
        return TimeSeriesDataset(
            pi=self.pi[s],
            pi_e=self.pi_e[s],
            ygap=self.ygap[s],
            cinf=self.cinf[s],
            u=None if self.u is None else self.u[s],
            period=self.period[s],
        )


def icpc_loadings(slopes: SlopePair, beta: float, spec: ShockProcessSpec) -> tuple[float, float, float]:
    """Coefficients of the forward solution pi_t = a_y ygap_t + a_c cinf_t + a_u u_t."""
    return (
        slopes.kappa / (1.0 - beta * spec.ygap.persistence),
        slopes.kappa_inf / (1.0 - beta * spec.cinf.persistence),
        1.0 / (1.0 - beta * spec.u.persistence),
    )


def _forward_inflation(slopes, beta, spec, shocks):
    a_y, a_c, a_u = icpc_loadings(slopes, beta, spec)
    pi = a_y * shocks.ygap + a_c * shocks.cinf + a_u * shocks.u
    pi_next = (
        a_y * spec.ygap.persistence * shocks.ygap
        + a_c * spec.cinf.persistence * shocks.cinf
        + a_u * spec.u.persistence * shocks.u
    )
    return pi, pi_next


def simulate_aggregate(
    params: ModelParams,
    spec: ShockProcessSpec | None = None,
    t_len: int = 600,
    seed=None,
) -> TimeSeriesDataset:
    """Generate a dataset from the forward solution of the ICPC.

    With zero expectation noise the data satisfy
    ``pi - beta * pi_e - kappa_alg * ygap - kappa_inf_alg * cinf == u``
    period by period.
    """
    spec = ShockProcessSpec() if spec is None else spec
    if int(t_len) != t_len or t_len < 2:
        raise ParameterError(f"t_len must be an integer >= 2, got {t_len!r}")
    slopes = algorithmic_slopes(params)
    shocks = simulate_shocks(spec, int(t_len), seed)
    pi, pi_next = _forward_inflation(slopes, params.beta, spec, shocks)
    return TimeSeriesDataset(
        pi=pi,
        pi_e=pi_next + shocks.expectation_noise,
        ygap=shocks.ygap,
        cinf=shocks.cinf,
        u=shocks.u,
    )


# ---------------------------------------------------------------------------
# firm panel


@dataclass
class FirmPanel:
    """Output of :func:`simulate_firm_panel`.

    ``prices[t, i]`` is firm i's log price at the end of period t;
    ``initial_prices`` holds the prices before period 0.
    """

    prices: np.ndarray
    initial_prices: np.ndarray
    lambdas: np.ndarray
    algorithmic: np.ndarray
    reset_share: np.ndarray
    shocks: ShockPaths
    dataset: TimeSeriesDataset

    @property
    def mean_price(self) -> np.ndarray:
        return self.prices.mean(axis=1)

    def cross_sectional_variance(self) -> np.ndarray:
        return self.prices.var(axis=1)


def simulate_firm_panel(
    params: ModelParams,
    dist: IntensityDistribution,
    spec: ShockProcessSpec | None = None,
    n_firms: int = 1000,
    t_len: int = 200,
    seed=None,
    shocks: ShockPaths | None = None,
    initial_prices: np.ndarray | None = None,
) -> FirmPanel:
    """Simulate an N-firm Calvo economy with algorithmic price setters.

    Each period every firm re-prices with probability ``1 - theta``. A
    re-setter moves to the previous aggregate price plus its own
    marginal-cost reset gap, ``g_i / (1 - theta)``, where

        g_i = kappa * d_i * ygap / (1 - beta rho_y)
              + kappa * e_i * lambda_i * cinf / (1 - beta rho_c)
              + u / (1 - beta rho_u).

    The output gap stands in for w - a in firm marginal cost. Conventional
    firms have d_i = e_i = 1. A fixed share ``phi`` of firms, chosen at
    t = 0, is algorithmic with d_i = 1 - rho (muted demand response) and
    e_i = 1 + rho (full cost tracking), so the cross-firm mean of g_i is the
    ICPC forward solution with the attenuated and amplified slopes.

    Pass ``shocks`` to drive several panels with the same aggregate paths.
    """
    spec = ShockProcessSpec() if spec is None else spec
    if int(n_firms) != n_firms or n_firms < 2:
        raise ParameterError(f"n_firms must be an integer >= 2, got {n_firms!r}")
    if int(t_len) != t_len or t_len < 2:
        raise ParameterError(f"t_len must be an integer >= 2, got {t_len!r}")
    n_firms, t_len = int(n_firms), int(t_len)
    rng = np.random.default_rng(seed)
    lambdas = dist.sample(n_firms, rng)
    n_alg = int(round(params.phi * n_firms))
    algorithmic = np.zeros(n_firms, dtype=bool)
    algorithmic[rng.permutation(n_firms)[:n_alg]] = True
    if shocks is None:
        shocks = simulate_shocks(spec, t_len, rng)
    elif len(shocks) < t_len:
        raise ParameterError("supplied shock paths are shorter than t_len")

    theta, beta = params.theta, params.beta
    kappa = (1.0 - theta) * (1.0 - beta * theta) / theta
    demand = np.where(algorithmic, 1.0 - params.rho, 1.0)
    cost = np.where(algorithmic, 1.0 + params.rho, 1.0) * lambdas
    a_y = kappa / (1.0 - beta * spec.ygap.persistence)
    a_c = kappa / (1.0 - beta * spec.cinf.persistence)
    a_u = 1.0 / (1.0 - beta * spec.u.persistence)

    if initial_prices is None:
        p = np.zeros(n_firms)
    else:
        p = np.array(initial_prices, dtype=float)
        if p.shape != (n_firms,):
            raise ParameterError("initial_prices must have one entry per firm")
    p0 = p.copy()
    prices = np.empty((t_len, n_firms))
    reset_share = np.empty(t_len)
    for t in range(t_len):
        agg = p.mean()
        gap = a_y * demand * shocks.ygap[t] + a_c * cost * shocks.cinf[t] + a_u * shocks.u[t]
        reset = rng.random(n_firms) < 1.0 - theta
        p = np.where(reset, agg + gap / (1.0 - theta), p)
        prices[t] = p
        reset_share[t] = reset.mean()

    mean_price = prices.mean(axis=1)
    pi = np.diff(mean_price, prepend=p0.mean())
    slopes = algorithmic_slopes(params)
    _, pi_next = _forward_inflation(slopes, beta, spec, _truncate(shocks, t_len))
    dataset = TimeSeriesDataset(
        pi=pi,
        pi_e=pi_next + shocks.expectation_noise[:t_len],
        ygap=shocks.ygap[:t_len],
        cinf=shocks.cinf[:t_len],
        u=shocks.u[:t_len],
    )
    return FirmPanel(
        prices=prices,
        initial_prices=p0,
        lambdas=lambdas,
        algorithmic=algorithmic,
        reset_share=reset_share,
        shocks=shocks,
        dataset=dataset,
    )


def _truncate(shocks: ShockPaths, t_len: int) -> ShockPaths:
    return ShockPaths(
        ygap=shocks.ygap[:t_len],
        cinf=shocks.cinf[:t_len],
        u=shocks.u[:t_len],
        expectation_noise=shocks.expectation_noise[:t_len],
    )
