import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aspm.specfun import (QuadratureError, QuadratureSpec, bessel_i0, effective_upper_bound, erf, erfc,
                          integrate, marcum_q1, scaled_i0)

# 40-digit reference values, evaluated with arbitrary-precision arithmetic
ERFC_2 = 0.004677734981047265837930743632747071389108
I0_1 = 1.266065877752008335598244625214717537608


def erf_series(x, terms=80):
    """Maclaurin series of erf, summed in exact rational arithmetic."""
    from fractions import Fraction

    xf = Fraction(x)
    total = Fraction(0)
    for n in range(terms):
        total += Fraction((-1) ** n) * xf ** (2 * n + 1) / (math.factorial(n) * (2 * n + 1))
    return 2.0 / math.sqrt(math.pi) * float(total)


def i0_series(x, terms=40):
    return math.fsum((x / 2.0) ** (2 * k) / math.factorial(k) ** 2 for k in range(terms))


def i0e_asymptotic(x, terms=12):
    """Large-argument expansion e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum ((2k-1)!!)^2 / (k! 8^k x^k)."""
    total, term = 1.0, 1.0
    for k in range(1, terms):
        term *= (2 * k - 1) ** 2 / (k * 8.0 * x)
        total += term
    return total / math.sqrt(2.0 * math.pi * x)


class TestErf:
    def test_erfc_zero(self):
        assert erfc(0.0) == 1.0

    def test_odd_symmetry(self):
        assert erf(-1.5) == -erf(1.5)

    def test_erfc_two_reference(self):
        np.testing.assert_allclose(erfc(2.0), ERFC_2, rtol=1e-14)

    def test_erfc_two_independent_series(self):
        # 1 - erf(2) from the series loses ~3 digits to cancellation
        np.testing.assert_allclose(1.0 - erf_series(2.0), ERFC_2, rtol=1e-11)

    @pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.5])
    def test_erf_matches_series(self, x):
        np.testing.assert_allclose(erf(x), erf_series(x), rtol=1e-14)

    def test_complementarity(self):
        x = np.linspace(-6, 6, 2401)
        np.testing.assert_allclose(erf(x) + erfc(x), 1.0, atol=1e-14, rtol=0)

    @given(st.floats(min_value=0.0, max_value=26.0))
    def test_erfc_tail_relative_accuracy(self, x):
        # erfc(x) = exp(-x^2) * erfcx(x) independently via the scaled function
        from scipy.special import erfcx

        np.testing.assert_allclose(erfc(x), math.exp(-x * x) * erfcx(x), rtol=1e-13)


class TestBessel:
    def test_i0_zero(self):
        assert bessel_i0(0.0) == 1.0

    def test_i0_one(self):
        np.testing.assert_allclose(bessel_i0(1.0), I0_1, rtol=1e-15)
        np.testing.assert_allclose(i0_series(1.0), I0_1, rtol=1e-15)

    @pytest.mark.parametrize("x", [0.25, 2.0, 7.5, 20.0])
    def test_i0_series(self, x):
        np.testing.assert_allclose(bessel_i0(x), i0_series(x, 80), rtol=1e-14)

    def test_scaled_large_argument(self):
        value = scaled_i0(700.0)
        assert np.isfinite(value)
        np.testing.assert_allclose(value, i0e_asymptotic(700.0), rtol=1e-12)

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            bessel_i0(-1.0)
        with pytest.raises(ValueError):
            scaled_i0(-0.5)


class TestIntegrate:
    def test_constant(self):
        value, err = integrate(lambda x: 1.0, QuadratureSpec(upper=1.0))
        assert value == pytest.approx(1.0, abs=1e-14)
        assert err >= 0

    def test_semi_infinite_cutoff(self):
        value, _ = integrate(lambda x: x * math.exp(-x * x / 2))
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_arrival_integrand_at_zero_mean(self):
        # folded-normal density at mu = 0 times erf^(M/2 - 1): integrates to 2/M
        M = 16

        def f(x):
            return 2 / math.sqrt(math.pi) * math.exp(-x * x) * float(erf(x)) ** (M // 2 - 1)

        value, _ = integrate(f, QuadratureSpec(upper=40.0))
        assert value == pytest.approx(2 / M, abs=1e-12)

    @pytest.mark.parametrize(
        "f, upper, exact",
        [
            (lambda x: math.exp(-x), None, 1.0),
            (lambda x: x * x, 3.0, 9.0),
            (lambda x: math.cos(x), math.pi / 2, 1.0),
            (lambda x: 1.0 / (1.0 + x * x), 1.0, math.pi / 4),
            (lambda x: math.exp(-x * x), None, math.sqrt(math.pi) / 2),
        ],
    )
    def test_closed_form_suite(self, f, upper, exact):
        spec = QuadratureSpec(upper=upper)
        value, err = integrate(f, spec)
        assert abs(value - exact) <= max(spec.abs_tol, spec.rel_tol * abs(exact)) * 10

    def test_budget_exhaustion_raises(self):
        spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=1, upper=1.0)
        with pytest.raises(QuadratureError):
            integrate(lambda x: math.sin(1.0 / (x + 1e-3)), spec)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(abs_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(lower=1.0, upper=0.5)

    def test_effective_upper_bound(self):
        upper = effective_upper_bound(lambda x: math.exp(-x), 0.0, 1e-10)
        assert math.exp(-upper) < 1e-10


class TestMarcum:
    def test_zero_threshold(self):
        assert marcum_q1(3.0, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_central_case(self):
        assert marcum_q1(0.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-12)

    def test_nonincreasing_in_b(self):
        values = [marcum_q1(1.0, b) for b in np.arange(0.0, 5.01, 0.5)]
        assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("lam", [0.0, 1.0, 4.0, 16.0])
    def test_derivative_identity(self, lam):
        h = 1e-4
        for x in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
            fd = (marcum_q1(math.sqrt(lam), math.sqrt(x + h)) - marcum_q1(math.sqrt(lam), math.sqrt(x - h))) / (2 * h)
            exact = -0.5 * math.exp(-(lam + x) / 2) * float(bessel_i0(math.sqrt(lam * x)))
            assert abs(fd - exact) <= 1e-6

    def test_against_noncentral_chi2(self):
        from scipy.stats import ncx2

        for a, b in [(1.0, 1.0), (3.0, 2.5), (5.0, 6.0)]:
            np.testing.assert_allclose(marcum_q1(a, b), ncx2.sf(b * b, 2, a * a), rtol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.0, 6.0), st.floats(0.0, 8.0))
    def test_probability_range(self, a, b):
        assert 0.0 <= marcum_q1(a, b) <= 1.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            marcum_q1(-1.0, 1.0)
