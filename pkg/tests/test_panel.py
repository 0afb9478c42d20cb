import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from icpc.exceptions import DataError, ParameterError
from icpc.hac import newey_west
from icpc.panel import (
    PanelDataset,
    driscoll_kraay,
    fixed_b_critical_value,
    pooled_ols_naive,
    simulate_panel,
    standardized_index,
    wald_equality,
    within_transform,
)


def lsdv(data):
    """Dummy-variable OLS on the stacked estimation sample."""
    y, x = data.regression_arrays()
    n, t, k = x.shape
    dummies = np.kron(np.eye(n), np.ones((t, 1)))
    design = np.column_stack([x.reshape(n * t, k), dummies])
    coef, *_ = np.linalg.lstsq(design, y.reshape(-1), rcond=None)
    return coef[:k], coef[k:]


class TestDataset:
    def test_shape_checks(self):
        with pytest.raises(DataError):
            PanelDataset(["a", "b"], [1, 2, 3], np.ones((2, 3)), np.ones((2, 2)), np.ones((2, 3)))
        with pytest.raises(DataError):
            PanelDataset(["a", "a"], [1, 2, 3], np.ones((2, 3)), np.ones((2, 3)), np.ones((2, 3)))

    def test_lag_alignment(self):
        d = simulate_panel(seed=1, t_len=30)
        y, x = d.regression_arrays()
        assert y.shape == (7, 30)
        assert np.array_equal(x[:, 0, 0], d.cinf[:, 0])
        assert np.array_equal(x[:, :, 1], d.ygap[:, 1:])
        assert np.isnan(d.cinf_lag1[:, 0]).all()


class TestWithin:
    def test_single_country_is_time_demeaning(self):
        a = np.random.default_rng(0).normal(size=(1, 40))
        out = within_transform({"v": a})
        assert np.allclose(out.values["v"], a - a.mean())

    def test_constant_column_vanishes(self):
        out = within_transform({"v": np.repeat([[1.0], [5.0], [-2.0]], 10, axis=1)})
        assert np.all(out.values["v"] == 0)

    @given(st.integers(0, 10_000))
    def test_round_trip(self, seed):
        d = simulate_panel(seed=seed, n_countries=3, t_len=25)
        restored = within_transform(d).restore()
        for key in ("pi_core", "cinf", "ygap"):
            assert np.max(np.abs(restored[key] - getattr(d, key))) < 1e-12


class TestDriscollKraay:
    def test_matches_lsdv(self):
        d = simulate_panel(seed=3)
        r = driscoll_kraay(d)
        coef, alphas = lsdv(d)
        assert np.allclose(r.params, coef, atol=1e-12)
        assert np.allclose(list(r.fixed_effects.values()), alphas, atol=1e-12)

    def test_single_unit_collapse(self):
        d = simulate_panel(seed=4, n_countries=1, t_len=120)
        bw = 4
        r = driscoll_kraay(d, bw)
        y, x = d.regression_arrays()
        ols = sm.OLS(y[0], sm.add_constant(x[0])).fit(cov_type="HAC", cov_kwds={"maxlags": bw, "use_correction": False})
        assert np.allclose(r.params, ols.params[1:], atol=1e-12)
        assert np.allclose(r.vcov, ols.cov_params()[1:, 1:], rtol=1e-10, atol=1e-14)

    def test_dk_meat_is_newey_west_of_summed_scores(self):
        d = simulate_panel(seed=5, common_share=0.5)
        r = driscoll_kraay(d, 3)
        y, x = d.regression_arrays()
        xd = x - x.mean(axis=1, keepdims=True)
        yd = y - y.mean(axis=1, keepdims=True)
        resid = yd - xd @ r.params
        scores = (xd * resid[..., None]).sum(axis=0)
        bread = np.linalg.inv(np.einsum("ntk,ntl->kl", xd, xd))
        t = scores.shape[0]
        assert np.allclose(r.vcov, t * bread @ newey_west(scores, 3, center=False) @ bread, rtol=1e-12)

    @given(st.integers(0, 10_000), st.floats(-5, 5), st.integers(0, 6))
    def test_invariant_to_country_constants(self, seed, shift, unit):
        d = simulate_panel(seed=seed, t_len=30)
        base = driscoll_kraay(d)
        cinf = d.cinf.copy()
        cinf[unit] += shift
        ygap = d.ygap.copy()
        ygap[unit] -= 2 * shift
        moved = driscoll_kraay(PanelDataset(d.countries, d.periods, d.pi_core, cinf, ygap))
        assert np.allclose(base.params, moved.params, atol=1e-10)

    @given(st.integers(0, 10_000))
    def test_result_invariants(self, seed):
        r = driscoll_kraay(simulate_panel(seed=seed, common_share=0.6))
        assert np.array_equal(r.vcov, r.vcov.T)
        assert np.linalg.eigvalsh(r.vcov).min() >= -1e-18
        assert 0 <= r.r2_within <= 1

    def test_bandwidth_too_large(self):
        with pytest.raises(ParameterError):
            driscoll_kraay(simulate_panel(seed=1, t_len=10), 10)

    def test_collinear(self):
        d = simulate_panel(seed=2, t_len=30)
        # a regressor that is constant within country is swept out
        flat = PanelDataset(d.countries, d.periods, d.pi_core, d.cinf, np.repeat(d.ygap[:, :1], 31, axis=1))
        with pytest.raises(Exception):
            driscoll_kraay(flat)

    def test_naive_matches_lsdv_standard_errors(self):
        d = simulate_panel(seed=6)
        beta, se = pooled_ols_naive(d)
        y, x = d.regression_arrays()
        n, t, _ = x.shape
        dummies = np.kron(np.eye(n), np.ones((t, 1)))
        ref = sm.OLS(y.reshape(-1), np.column_stack([x.reshape(n * t, 2), dummies])).fit()
        assert np.allclose(beta, ref.params[:2], atol=1e-12)
        assert np.allclose(se, ref.bse[:2], rtol=1e-10)


class TestCriticalValues:
    def test_limit_is_normal(self):
        for level in (0.8, 0.9, 0.95, 0.98):
            assert fixed_b_critical_value(0.0, level) == pytest.approx(stats.norm.ppf(0.5 + level / 2), abs=1e-3)

    def test_increasing_in_b(self):
        vals = [fixed_b_critical_value(b) for b in np.linspace(0, 0.5, 20)]
        assert np.all(np.diff(vals) > 0)

    def test_methods(self):
        r = driscoll_kraay(simulate_panel(seed=1))
        assert r.critical_value(method="t") == pytest.approx(stats.t.ppf(0.975, r.n_periods - 1))
        assert r.critical_value() > r.critical_value(method="t")
        with pytest.raises(ParameterError):
            r.critical_value(level=0.5)


class TestWald:
    def setup_method(self):
        self.r = driscoll_kraay(simulate_panel(seed=1))

    def test_identical(self):
        assert wald_equality(self.r, self.r.b_hat, 0.01) == 1.0

    def test_five_standard_errors(self):
        se = 0.02
        total = np.hypot(self.r.dk_se[0], se)
        p = wald_equality(self.r, self.r.b_hat - 5 * total, se)
        assert p < 1e-5
        assert p == pytest.approx(stats.chi2.sf(25.0, 1), rel=1e-9)

    def test_formula(self):
        r = self.r
        r.b_hat, r.dk_se = 0.094, np.array([0.026, r.dk_se[1]])
        stat = (0.094 - 0.087) ** 2 / (0.026 ** 2 + 0.021 ** 2)
        assert wald_equality(r, 0.087, 0.021) == pytest.approx(stats.chi2.sf(stat, 1), rel=1e-12)
        assert wald_equality(r, 0.087, 0.021) == pytest.approx(0.8341, abs=1e-4)

    def test_zero_variance(self):
        r = self.r
        r.dk_se = np.zeros(2)
        with pytest.raises(ParameterError):
            wald_equality(r, 0.1, 0.0)


def test_standardized_index():
    rng = np.random.default_rng(0)
    a, b = rng.normal(3, 2, 100), rng.normal(-1, 5, 100)
    idx = standardized_index(a, b)
    za = (a - a.mean()) / a.std()
    zb = (b - b.mean()) / b.std()
    assert np.allclose(idx, (za + zb) / 2)
    with pytest.raises(DataError):
        standardized_index(np.ones(10))


def test_simulate_panel_shape():
    d = simulate_panel(seed=0)
    assert (d.n_units, d.n_periods) == (7, 53)
    assert d.balanced
    y, _ = d.regression_arrays()
    assert y.shape == (7, 52)
