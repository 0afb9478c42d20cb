import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from icpc.core import (
    BASELINE,
    ModelParams,
    ShockMoments,
    SlopePair,
    algorithmic_loss_factor,
    algorithmic_slopes,
    closed_form_slopes,
    indexing_cutoff,
    lucas_welfare_cost,
    optimal_inflation_target,
    policy_report,
    taylor_coefficient,
    variance_share_bound,
    welfare_decomposition,
)
from icpc.exceptions import InfeasibleError, ParameterError

# exact rational arithmetic for the baseline calibration
TH, BE, LB, PHI, RHO = (Fraction(s) for s in ("0.75", "0.996", "0.18", "0.32", "0.20"))
K_EXACT = (1 - TH) * (1 - BE * TH) / TH
KI_EXACT = LB * K_EXACT
PR = PHI * RHO


unit_open = st.floats(0.01, 0.99)
# zero or comfortably normal, so products do not underflow to zero
nonneg = st.one_of(st.just(0.0), st.floats(1e-6, 1.0))


@st.composite
def params(draw):
    phi = draw(nonneg)
    rho = draw(st.one_of(st.just(0.0), st.floats(1e-6, 0.99)))
    return ModelParams(
        theta=draw(unit_open),
        beta=draw(unit_open),
        lambda_bar=draw(nonneg),
        phi=phi,
        rho=rho,
        gamma=draw(st.floats(0.1, 10.0)),
    )


moments = st.builds(
    ShockMoments,
    var_inf=st.one_of(st.just(0.0), st.floats(1e-6, 100.0)),
    var_ygap=st.one_of(st.just(0.0), st.floats(1e-6, 100.0)),
    var_u=st.one_of(st.just(0.0), st.floats(1e-6, 100.0)),
)


class TestModelParams:
    def test_table_one(self):
        assert BASELINE.phi_rho == pytest.approx(0.064, abs=1e-15)
        assert BASELINE.gamma == 2.0

    @pytest.mark.parametrize(
        "changes",
        [
            {"theta": 0.0},
            {"theta": 1.0},
            {"beta": 1.0},
            {"beta": 0.0},
            {"lambda_bar": -0.1},
            {"lambda_bar": 1.1},
            {"rho": 1.0},
            {"omega": 0.0},
            {"gamma": 0.0},
            {"theta": float("nan")},
        ],
    )
    def test_rejects_invalid(self, changes):
        with pytest.raises(ParameterError):
            BASELINE.replace(**changes)

    def test_parameter_error_is_value_error(self):
        with pytest.raises(ValueError):
            BASELINE.replace(beta=2.0)


class TestSlopes:
    def test_table_one_values(self):
        s = closed_form_slopes(BASELINE)
        assert s.kappa == pytest.approx(float(K_EXACT), abs=1e-15)
        assert s.kappa_inf == pytest.approx(float(KI_EXACT), abs=1e-15)
        assert round(s.kappa, 7) == 0.0843333
        assert round(s.kappa_inf, 7) == 0.01518

    def test_zero_intensity(self):
        assert closed_form_slopes(BASELINE.replace(lambda_bar=0.0)).kappa_inf == 0.0

    def test_half_theta(self):
        s = closed_form_slopes(ModelParams(theta=0.5, beta=0.99, lambda_bar=0.2))
        assert s.kappa == pytest.approx(0.505, abs=1e-15)

    def test_algorithmic_table_one(self):
        a = algorithmic_slopes(BASELINE)
        assert a.kappa == pytest.approx(float((1 - PR) * K_EXACT), abs=1e-15)
        assert a.kappa_inf == pytest.approx(float((1 + PR) * KI_EXACT), abs=1e-15)
        assert round(a.kappa, 6) == 0.078936
        assert round(a.kappa_inf, 7) == 0.0161515

    def test_algorithmic_identity_at_zero(self):
        p = BASELINE.replace(phi=0.0)
        base = SlopePair(0.3, 0.07)
        assert algorithmic_slopes(p, base) == base

    @given(params())
    def test_identity_ratios(self, p):
        base = closed_form_slopes(p)
        alg = algorithmic_slopes(p, base)
        assert alg.kappa / base.kappa == pytest.approx(1 - p.phi_rho, abs=1e-12)
        if base.kappa_inf > 0:
            assert alg.kappa_inf / base.kappa_inf == pytest.approx(1 + p.phi_rho, abs=1e-12)

    @given(params())
    def test_kappa_positive(self, p):
        assert closed_form_slopes(p).kappa > 0

    def test_monotone_in_phi_rho(self):
        grid = np.linspace(0.0, 0.99, 120)
        ka = [algorithmic_slopes(BASELINE.replace(phi=1.0, rho=v)).kappa for v in grid]
        ki = [algorithmic_slopes(BASELINE.replace(phi=1.0, rho=v)).kappa_inf for v in grid]
        assert np.all(np.diff(ka) < 0)
        assert np.all(np.diff(ki) > 0)

    @given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8))
    def test_population_scaling_law(self, lams):
        # log10 kappa_inf - log10 lambda_bar does not depend on lambda_bar
        offsets = [
            math.log10(closed_form_slopes(BASELINE.replace(lambda_bar=v)).kappa_inf) - math.log10(v) for v in lams
        ]
        assert np.ptp(offsets) < 1e-12


class TestWelfare:
    def test_benchmark_collapse(self):
        p = BASELINE.replace(phi=0.0, lambda_bar=0.0)
        r = welfare_decomposition(p, ShockMoments(1.0, 1.0), w_cl=-0.3, w_ai=0.1)
        assert r.l_inf == 0.0 and r.l_alg == 0.0
        assert r.w_star == -0.3 + 0.1

    def test_table_one_losses(self):
        r = welfare_decomposition(BASELINE, ShockMoments(1.0, 1.0))
        l_inf = KI_EXACT ** 2
        l_alg = PR * (2 - PR) / (2 * (1 - PR) ** 2) * K_EXACT ** 2
        assert r.l_inf == pytest.approx(float(l_inf), abs=1e-16)
        assert round(r.l_inf, 8) == 2.3043e-4
        assert r.l_alg == pytest.approx(float(l_alg), abs=1e-16)

    def test_linearity_in_var_inf(self):
        a = welfare_decomposition(BASELINE, ShockMoments(1.3, 0.7))
        b = welfare_decomposition(BASELINE, ShockMoments(2.6, 0.7))
        assert b.l_inf == pytest.approx(2 * a.l_inf, rel=1e-14)
        assert b.l_alg == a.l_alg

    @given(params(), moments, st.floats(-10, 10), st.floats(0, 10))
    def test_additivity(self, p, m, w_cl, w_ai):
        r = welfare_decomposition(p, m, w_cl, w_ai)
        assert r.l_inf >= 0 and r.l_alg >= 0
        assert abs(r.w_star - (r.w_cl + r.w_ai - r.l_inf - r.l_alg)) <= 1e-12
        assert (r.l_alg == 0) == (p.phi_rho == 0 or m.var_ygap == 0)

    def test_loss_factor_oracle(self):
        # finite-difference check that the factor is increasing on (0, 1)
        x = np.linspace(0.01, 0.95, 50)
        f = np.array([algorithmic_loss_factor(v) for v in x])
        assert np.all(np.diff(f) > 0)
        assert algorithmic_loss_factor(0.0) == 0.0

    def test_rejects_negative_ai_gain(self):
        with pytest.raises(ParameterError):
            welfare_decomposition(BASELINE, ShockMoments(1, 1), w_ai=-1.0)

    def test_rejects_negative_variance(self):
        with pytest.raises(ParameterError):
            ShockMoments(-1.0, 1.0)


class TestVarianceShare:
    def test_only_inference(self):
        alg = algorithmic_slopes(BASELINE)
        assert variance_share_bound(alg, ShockMoments(2.0, 0.0, 0.0)) == 1.0

    def test_no_inference(self):
        alg = algorithmic_slopes(BASELINE)
        assert variance_share_bound(alg, ShockMoments(0.0, 1.0, 1.0)) == 0.0

    def test_table_one(self):
        ka, ki = (1 - PR) * K_EXACT, (1 + PR) * KI_EXACT
        expected = ki ** 2 / (ka ** 2 + ki ** 2 + 1)
        got = variance_share_bound(algorithmic_slopes(BASELINE), ShockMoments(1, 1, 1))
        assert got == pytest.approx(float(expected), rel=1e-13)

    def test_degenerate(self):
        with pytest.raises(ParameterError):
            variance_share_bound(algorithmic_slopes(BASELINE), ShockMoments(0, 0, 0))

    def test_random_draws_in_unit_interval(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            p = ModelParams(
                theta=rng.uniform(0.01, 0.99),
                beta=rng.uniform(0.01, 0.99),
                lambda_bar=rng.uniform(),
                phi=rng.uniform(),
                rho=rng.uniform(0, 0.99),
            )
            m = ShockMoments(*rng.uniform(0, 5, 3))
            eta = variance_share_bound(algorithmic_slopes(p), m)
            assert 0.0 <= eta <= 1.0


class TestPolicy:
    def test_taylor(self):
        assert taylor_coefficient(BASELINE) == pytest.approx(float((1 + PR) * LB * K_EXACT), abs=1e-16)
        p0 = BASELINE.replace(phi=0.0)
        assert taylor_coefficient(p0) == closed_form_slopes(p0).kappa_inf
        assert taylor_coefficient(BASELINE.replace(lambda_bar=0.0)) == 0.0

    def test_taylor_increasing_in_penetration(self):
        vals = [taylor_coefficient(BASELINE.replace(phi=v)) for v in np.linspace(0, 1, 50)]
        assert np.all(np.diff(vals) > 0)

    def test_target(self):
        got = optimal_inflation_target(BASELINE, 1.0)
        assert got == pytest.approx(float(-KI_EXACT / (1 - BE * TH)), abs=1e-15)
        assert got == pytest.approx(-0.06, abs=1e-12)
        assert optimal_inflation_target(BASELINE, -1.0) == -got
        assert optimal_inflation_target(BASELINE.replace(lambda_bar=0.0), 1.0) == 0.0

    def test_report(self):
        r = policy_report(BASELINE, ShockMoments(1, 1, 1), 1.0)
        assert r.psi_inf_star == taylor_coefficient(BASELINE)
        assert r.pi_target == optimal_inflation_target(BASELINE, 1.0)
        assert 0 <= r.eta_inf_bound <= 1


class TestIndexingCutoff:
    m = ShockMoments(1.0, 1.0, 0.5)

    def test_zero_at_unadjusted_bound(self):
        eta0 = variance_share_bound(algorithmic_slopes(BASELINE), self.m)
        assert indexing_cutoff(BASELINE, self.m, eta0) == pytest.approx(0.0, abs=1e-15)
        assert indexing_cutoff(BASELINE, self.m, min(0.99, eta0 * 2)) == 0.0

    def test_attains_target(self):
        eta0 = variance_share_bound(algorithmic_slopes(BASELINE), self.m)
        target = eta0 / 4
        psi = indexing_cutoff(BASELINE, self.m, target)
        alg = algorithmic_slopes(BASELINE)
        eff = SlopePair(alg.kappa, alg.kappa_inf - psi)
        assert variance_share_bound(eff, self.m) == pytest.approx(target, rel=1e-10)

    def test_zero_target_infeasible(self):
        with pytest.raises(InfeasibleError):
            indexing_cutoff(BASELINE, self.m, 0.0)

    def test_only_inference_variance_infeasible(self):
        with pytest.raises(InfeasibleError):
            indexing_cutoff(BASELINE, ShockMoments(1.0, 0.0, 0.0), 0.5)

    def test_rejects_eta_one(self):
        with pytest.raises(ParameterError):
            indexing_cutoff(BASELINE, self.m, 1.0)

    def test_monotone_grids(self):
        eta = 1e-5
        by_lambda = [indexing_cutoff(BASELINE.replace(lambda_bar=v), self.m, eta) for v in np.linspace(0, 1, 60)]
        by_pr = [indexing_cutoff(BASELINE.replace(phi=1.0, rho=v), self.m, eta) for v in np.linspace(0, 0.95, 60)]
        assert np.all(np.diff(by_lambda) >= 0)
        assert np.all(np.diff(by_pr) >= 0)
        assert indexing_cutoff(BASELINE.replace(lambda_bar=0.3), self.m, eta) >= indexing_cutoff(
            BASELINE.replace(lambda_bar=0.1), self.m, eta
        )


class TestLucas:
    def test_table_one(self):
        ki = (1 + PR) * KI_EXACT
        expected = Fraction(1, 2) * 2 * ki ** 2 / (1 - BE * TH) ** 2
        assert lucas_welfare_cost(BASELINE, 1.0) == pytest.approx(float(expected), abs=1e-15)
        assert lucas_welfare_cost(BASELINE, 1.0) == pytest.approx(4.0755e-3, abs=1e-7)

    def test_zero_intensity(self):
        assert lucas_welfare_cost(BASELINE.replace(lambda_bar=0.0), 1.0) == 0.0

    def test_linear_in_gamma(self):
        a = lucas_welfare_cost(BASELINE, 0.7)
        b = lucas_welfare_cost(BASELINE.replace(gamma=4.0), 0.7)
        assert b == pytest.approx(2 * a, rel=1e-14)

    def test_monotone(self):
        for key, grid in (("lambda_bar", np.linspace(0, 1, 40)), ("phi", np.linspace(0, 1, 40)), ("gamma", np.linspace(0.1, 8, 40))):
            vals = [lucas_welfare_cost(BASELINE.replace(**{key: v}), 1.0) for v in grid]
            assert np.all(np.diff(vals) >= 0), key
