"""Closed-form quantities of the inference-cost Phillips curve.

Everything here is a pure function of a :class:`ModelParams` calibration
(and, where needed, shock variances). The inflation equation is

    pi_t = beta E_t pi_{t+1} + kappa * ygap_t + kappa_inf * cinf_t + u_t

with kappa = (1 - theta)(1 - beta theta) / theta and kappa_inf = lambda_bar
kappa. Algorithmic price setters (penetration ``phi``, collusion intensity
``rho``) scale the demand slope by (1 - phi rho) and the inference
pass-through by (1 + phi rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import InfeasibleError, ParameterError

__all__ = [
    "ModelParams",
    "SlopePair",
    "ShockMoments",
    "WelfareReport",
    "PolicyReport",
    "BASELINE",
    "DEFAULT_GAMMA",
    "closed_form_slopes",
    "algorithmic_slopes",
    "welfare_decomposition",
    "variance_share_bound",
    "taylor_coefficient",
    "optimal_inflation_target",
    "indexing_cutoff",
    "lucas_welfare_cost",
    "policy_report",
]

DEFAULT_GAMMA = 2.0


def _check_open_unit(name, value):
    if not (0.0 < value < 1.0) or not math.isfinite(value):
        raise ParameterError(f"{name} must lie in (0, 1), got {value!r}")


def _check_closed_unit(name, value):
    if not (0.0 <= value <= 1.0):
        raise ParameterError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Structural calibration of the economy.

    Parameters
    ----------
    theta : float
        Calvo stickiness, probability a firm keeps its price, in (0, 1).
    beta : float
        Discount factor in (0, 1).
    lambda_bar : float
        Mean AI intensity in [0, 1].
    phi : float
        Share of re-setters that delegate pricing to algorithms, in [0, 1].
    rho : float
        Near-collusive responsiveness of algorithmic agents, in [0, 1).
    omega : float
        Output-gap weight in the quadratic loss, in (0, 1].
    gamma : float
        Relative risk aversion, > 0. Only used by the Lucas welfare cost.
    """

    theta: float
    beta: float
    lambda_bar: float
    phi: float = 0.0
    rho: float = 0.0
    omega: float = 0.5
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        for name in ("theta", "beta", "lambda_bar", "phi", "rho", "omega", "gamma"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise ParameterError(f"{name} must be a finite number, got {value!r}")
        _check_open_unit("theta", self.theta)
        _check_open_unit("beta", self.beta)
        _check_closed_unit("lambda_bar", self.lambda_bar)
        _check_closed_unit("phi", self.phi)
        if not (0.0 <= self.rho < 1.0):
            raise ParameterError(f"rho must lie in [0, 1), got {self.rho!r}")
        if not (0.0 < self.omega <= 1.0):
            raise ParameterError(f"omega must lie in (0, 1], got {self.omega!r}")
        if not self.gamma > 0.0:
            raise ParameterError(f"gamma must be positive, got {self.gamma!r}")
        if not self.phi * self.rho < 1.0:
            raise ParameterError("phi * rho must be below 1")

    @property
    def phi_rho(self) -> float:
        """Algorithmic pricing intensity."""
        return self.phi * self.rho

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


#: Baseline calibration (U.S. monthly). gamma is not calibrated there and
#: takes the package default.
BASELINE = ModelParams(theta=0.75, beta=0.996, lambda_bar=0.18, phi=0.32, rho=0.20, omega=0.50)


@dataclass(frozen=True)
class SlopePair:
    """Demand slope ``kappa`` and inference pass-through ``kappa_inf``."""

    kappa: float
    kappa_inf: float


@dataclass(frozen=True)
class ShockMoments:
    """Unconditional variances of inference cost, output gap and cost push."""

    var_inf: float
    var_ygap: float
    var_u: float = 0.0

    def __post_init__(self):
        for name in ("var_inf", "var_ygap", "var_u"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ParameterError(f"{name} must be a non-negative finite number, got {value!r}")


@dataclass(frozen=True)
class WelfareReport:
    w_cl: float
    w_ai: float
    l_inf: float
    l_alg: float
    w_star: float


@dataclass(frozen=True)
class PolicyReport:
    psi_inf_star: float
    pi_target: float
    eta_inf_bound: float


def closed_form_slopes(params: ModelParams) -> SlopePair:
    """Baseline Calvo slopes without algorithmic pricing.

    >>> s = closed_form_slopes(BASELINE)
    >>> round(s.kappa, 7), round(s.kappa_inf, 7)
    (0.0843333, 0.01518)
    """
    theta, beta = params.theta, params.beta
    kappa = (1.0 - theta) * (1.0 - beta * theta) / theta
    return SlopePair(kappa=kappa, kappa_inf=params.lambda_bar * kappa)


def algorithmic_slopes(params: ModelParams, base: SlopePair | None = None) -> SlopePair:
    """Attenuate the demand slope and amplify pass-through by ``phi * rho``.

    ``base`` defaults to :func:`closed_form_slopes` of ``params``.
    """
    phi_rho = params.phi_rho
    if not (0.0 <= phi_rho < 1.0):
        raise ParameterError(f"phi * rho must lie in [0, 1), got {phi_rho!r}")
    if base is None:
        base = closed_form_slopes(params)
    return SlopePair(kappa=(1.0 - phi_rho) * base.kappa, kappa_inf=(1.0 + phi_rho) * base.kappa_inf)


def algorithmic_loss_factor(phi_rho: float) -> float:
    """Multiplier on kappa^2 var(ygap) in the algorithmic welfare loss."""
    return phi_rho * (2.0 - phi_rho) / (2.0 * (1.0 - phi_rho) ** 2)


def welfare_decomposition(
    params: ModelParams,
    shocks: ShockMoments,
    w_cl: float = 0.0,
    w_ai: float = 0.0,
) -> WelfareReport:
    """Split quadratic-loss welfare into benchmark, AI gain and two losses.

    ``w_cl`` and ``w_ai`` are levels supplied by the caller; the model only
    pins down the inference loss and the algorithmic loss.
    """
    if not math.isfinite(w_cl):
        raise ParameterError("w_cl must be finite")
    if not math.isfinite(w_ai) or w_ai < 0.0:
        raise ParameterError(f"w_ai must be a non-negative finite number, got {w_ai!r}")
    base = closed_form_slopes(params)
    l_inf = base.kappa_inf ** 2 * shocks.var_inf
    l_alg = algorithmic_loss_factor(params.phi_rho) * base.kappa ** 2 * shocks.var_ygap
    return WelfareReport(
        w_cl=w_cl,
        w_ai=w_ai,
        l_inf=l_inf,
        l_alg=l_alg,
        w_star=w_cl + w_ai - l_inf - l_alg,
    )


def variance_share_bound(alg: SlopePair, shocks: ShockMoments) -> float:
    """Upper bound on the share of inflation variance due to inference cost."""
    num = alg.kappa_inf ** 2 * shocks.var_inf
    den = alg.kappa ** 2 * shocks.var_ygap + num + shocks.var_u
    if not den > 0.0:
        raise ParameterError("variance share undefined: all variance contributions are zero")
    return num / den


def taylor_coefficient(params: ModelParams) -> float:
    """Welfare-maximizing policy response to the inference-cost index."""
    return algorithmic_slopes(params).kappa_inf


def optimal_inflation_target(params: ModelParams, expected_cinf_next: float) -> float:
    """Time-varying target that leans against expected inference-cost shocks."""
    base = closed_form_slopes(params)
    return -base.kappa_inf * expected_cinf_next / (1.0 - params.beta * params.theta)


def indexing_cutoff(params: ModelParams, shocks: ShockMoments, eta_bar: float) -> float:
    """Smallest indexing coefficient that caps the inference variance share.

    The policy response ``psi`` offsets pass-through one-for-one, so the
    effective loading on the inference-cost index is
    ``max(kappa_inf_alg - psi, 0)``. Solving the variance-share bound for
    equality with ``eta_bar`` gives the cutoff; when the unadjusted share is
    already at or below ``eta_bar`` no indexing is needed and 0 is returned.

    Raises
    ------
    ParameterError
        If ``eta_bar`` is not below 1.
    InfeasibleError
        If ``eta_bar <= 0`` (a zero share is never an interior solution) or
        the non-inference variance is zero, so any positive pass-through
        yields a share of one.
    """
    if not math.isfinite(eta_bar) or eta_bar >= 1.0:
        raise ParameterError(f"eta_bar must lie in (0, 1), got {eta_bar!r}")
    if eta_bar <= 0.0:
        raise InfeasibleError("a zero inference share cannot be attained as an interior cap")
    alg = algorithmic_slopes(params)
    other = alg.kappa ** 2 * shocks.var_ygap + shocks.var_u
    if shocks.var_inf == 0.0 or alg.kappa_inf == 0.0:
        return 0.0
    if other == 0.0:
        raise InfeasibleError(
            "only the inference term carries variance; the share is 1 for any positive pass-through"
        )
    k_eff = math.sqrt(eta_bar / (1.0 - eta_bar) * other / shocks.var_inf)
    return max(alg.kappa_inf - k_eff, 0.0)


def lucas_welfare_cost(params: ModelParams, var_inf: float) -> float:
    """Consumption-equivalent cost of inference-driven inflation volatility."""
    if not math.isfinite(var_inf) or var_inf < 0.0:
        raise ParameterError(f"var_inf must be non-negative, got {var_inf!r}")
    k_inf = algorithmic_slopes(params).kappa_inf
    return 0.5 * params.gamma * k_inf ** 2 * var_inf / (1.0 - params.beta * params.theta) ** 2


def policy_report(params: ModelParams, shocks: ShockMoments, expected_cinf_next: float = 0.0) -> PolicyReport:
    alg = algorithmic_slopes(params)
    return PolicyReport(
        psi_inf_star=taylor_coefficient(params),
        pi_target=optimal_inflation_target(params, expected_cinf_next),
        eta_inf_bound=variance_share_bound(alg, shocks),
    )
