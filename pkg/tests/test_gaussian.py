import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from gclm.errors import DomainError
from gclm.gaussian import (expected_gaussian_order_statistic_power,
                           expected_spacing_gaussian, order_statistic_table,
                           rl_polynomial_constants, rl_transform_constants,
                           rl_weight_polynomial, std_normal_cdf,
                           std_normal_pdf, std_normal_quantile)


class TestCdfQuantile:
    def test_cdf_against_scipy(self):
        x = np.linspace(-8, 8, 101)
        np.testing.assert_allclose(std_normal_cdf(x), stats.norm.cdf(x),
                                   rtol=0, atol=1e-15)

    def test_quantile_against_scipy(self):
        u = np.linspace(1e-12, 1 - 1e-12, 201)
        np.testing.assert_allclose(std_normal_quantile(u), stats.norm.ppf(u),
                                   rtol=1e-12, atol=1e-12)

    @given(st.floats(min_value=1e-300, max_value=1.0, exclude_max=True))
    def test_roundtrip(self, u):
        z = std_normal_quantile(u)
        assert std_normal_cdf(z) == pytest.approx(u, rel=1e-10, abs=1e-14)

    def test_endpoints_rejected(self):
        for bad in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(DomainError):
                std_normal_quantile(bad)

    def test_pdf_normalization(self):
        x = np.linspace(-10, 10, 20001)
        assert np.trapezoid(std_normal_pdf(x), x) == pytest.approx(1.0, abs=1e-12)


class TestOrderStatisticMoments:
    def test_single_observation(self):
        # with n = 1 the order statistic is just a standard Gaussian
        assert expected_gaussian_order_statistic_power(1, 1, 1) == pytest.approx(0.0, abs=1e-12)
        assert expected_gaussian_order_statistic_power(1, 1, 2) == pytest.approx(1.0, abs=1e-10)

    def test_max_of_two(self):
        # E max(Z1, Z2) = 1/sqrt(pi)
        got = expected_gaussian_order_statistic_power(2, 2, 1)
        assert got == pytest.approx(1.0 / math.sqrt(math.pi), abs=1e-10)

    def test_antisymmetry(self):
        a = expected_gaussian_order_statistic_power(2, 5, 1)
        b = expected_gaussian_order_statistic_power(4, 5, 1)
        assert a == pytest.approx(-b, abs=1e-12)

    def test_sum_over_ranks_of_first_power_is_zero(self):
        total = sum(expected_gaussian_order_statistic_power(i, 6, 1)
                    for i in range(1, 7))
        assert total == pytest.approx(0.0, abs=1e-9)

    def test_sum_of_squares_equals_n(self):
        n = 5
        total = sum(expected_gaussian_order_statistic_power(i, n, 2)
                    for i in range(1, n + 1))
        assert total == pytest.approx(n, abs=1e-8)

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(42)
        n = 8
        draws = np.sort(rng.standard_normal((200_000, n)), axis=1)
        for i in (1, 3, 8):
            mc = draws[:, i - 1].mean()
            exact = expected_gaussian_order_statistic_power(i, n, 1)
            assert exact == pytest.approx(mc, abs=5e-3)

    def test_table_round_trip(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GCLM_CACHE_DIR", str(tmp_path))
        t1 = order_statistic_table(6, max_power=2)
        t2 = order_statistic_table(6, max_power=2)  # now from disk
        np.testing.assert_array_equal(t1.power(1), t2.power(1))
        np.testing.assert_array_equal(t1.power(2), t2.power(2))


class TestSpacingsAndConstants:
    def test_first_spacing(self):
        # delta_{1,2:2} = E(Z_{2:2} - Z_{1:2}) = 2/sqrt(pi)
        assert expected_spacing_gaussian(1, 2, 2) == pytest.approx(
            2.0 / math.sqrt(math.pi), abs=1e-10)

    def test_rl_constants_published_values(self):
        c = rl_polynomial_constants()
        assert c["c1"] == pytest.approx(0.8862, abs=1e-4)
        assert c["c2"] == pytest.approx(1.1816, abs=1e-4)
        assert c["c3"] == pytest.approx(3.4658, abs=1e-4)
        assert c["c4"] == pytest.approx(1.3654, abs=1e-4)

    def test_rl_kurtosis_transform_constants(self):
        t = rl_transform_constants()
        assert t["kurt_slope"] == pytest.approx(1.7560, abs=1e-4)
        assert t["skew_factor"] == pytest.approx(4.0 / 3.0, abs=1e-12)

    def test_rl_weight_polynomial_degree(self):
        for r in (1, 2, 3):
            coeffs = rl_weight_polynomial(r)
            assert len(coeffs) == r + 1
