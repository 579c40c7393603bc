import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_jacobi, eval_legendre, sph_harm_y

from pdm_dyon.specfun import HalfInt, jacobi_poly, kummer_poly, kummer_poly_derivs, monopole_harmonic
from pdm_dyon.verification import azimuthal_check, harmonic_inner, harmonic_norm, kummer_ode_residual
from pdm_dyon.target_system import QuantumNumbers

half_ints = st.integers(-200, 200).map(HalfInt)


class TestHalfInt:
    def test_parse_forms(self):
        assert HalfInt.of("13/2") == HalfInt(13)
        assert HalfInt.of(6.5) == HalfInt(13)
        assert HalfInt.of(Fraction(-3, 2)).twice_value == -3
        assert HalfInt.of(7) == 7

    @pytest.mark.parametrize("bad", ["1/3", 0.25, "abc", float("nan")])
    def test_rejects_non_half_integers(self, bad):
        with pytest.raises(ValueError):
            HalfInt.of(bad)

    def test_immutable(self):
        with pytest.raises(AttributeError):
            HalfInt(3).twice_value = 5

    @given(half_ints, half_ints)
    def test_arithmetic_is_exact(self, a, b):
        assert (a + b).as_fraction() == a.as_fraction() + b.as_fraction()
        assert (a - b).as_fraction() == a.as_fraction() - b.as_fraction()
        assert float(a + b) == float(a) + float(b)

    def test_integer_queries(self):
        assert HalfInt(14).as_int() == 7
        assert not HalfInt(13).is_integer()
        with pytest.raises(ValueError):
            HalfInt(13).as_int()
        assert str(HalfInt(13)) == "13/2"


class TestJacobi:
    @pytest.mark.parametrize("a,b,x", [(0.3, -0.7, 0.2), (5.0, 1.0, -0.9), (2.5, 2.5, 0.99)])
    def test_degree_zero(self, a, b, x):
        assert jacobi_poly(0, a, b, x) == 1.0

    def test_degree_one_example(self):
        # (a - b)/2 + (a + b + 2) x / 2 summed by hand
        assert jacobi_poly(1, 2, 3, 0.5) == pytest.approx(1.25, abs=1e-15)

    def test_legendre_by_recurrence(self):
        x = np.linspace(-1, 1, 401)
        p_prev, p = np.ones_like(x), x.copy()
        for n in range(1, 11):
            assert np.max(np.abs(jacobi_poly(n, 0, 0, x) - p)) < 1e-12
            p_prev, p = p, ((2 * n + 1) * x * p - n * p_prev) / (n + 1)

    @pytest.mark.parametrize("n,a", [(3, 0), (5, 2), (8, 4)])
    def test_value_at_one(self, n, a):
        assert jacobi_poly(n, a, 1.5, 1.0) == pytest.approx(math.comb(n + a, n), rel=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 8), st.floats(-0.9, 6), st.floats(-0.9, 6), st.floats(-1, 1))
    def test_matches_scipy_for_classical_parameters(self, n, a, b, x):
        assert jacobi_poly(n, a, b, x) == pytest.approx(eval_jacobi(n, a, b, x), rel=1e-9, abs=1e-9)

    def test_negative_integer_parameters(self):
        # Rodrigues-free check: P_n^(a,b)(x) with a = -n reduces to ((x-1)/2)^n * C(n+b, n)
        x = np.linspace(-1, 1, 11)
        n, b = 4, 3.0
        expect = ((x - 1) / 2) ** n * math.comb(n + 3, n)
        assert np.allclose(jacobi_poly(n, -n, b, x), expect, rtol=1e-12, atol=1e-14)

    def test_rejects_bad_degree(self):
        with pytest.raises(ValueError):
            jacobi_poly(-1, 0, 0, 0.1)


class TestKummer:
    def test_examples(self):
        assert kummer_poly(0, 2, 3.7) == 1.0
        x = np.linspace(0, 5, 9)
        assert np.allclose(kummer_poly(1, 2, x), 1 - x / 2, rtol=1e-15)
        assert kummer_poly(2, 2, 1) == Fraction(1, 6)

    def test_pole_rejected(self):
        with pytest.raises(ValueError):
            kummer_poly(2, 0, 1.0)
        with pytest.raises(ValueError):
            kummer_poly(2, -3, 1.0)

    @pytest.mark.parametrize("N", range(7))
    def test_kummer_equation(self, N):
        xs = np.linspace(0.1, 10, 23)
        assert np.max(kummer_ode_residual(N, 2, xs)) < 1e-6

    def test_derivatives_against_exact_polynomial(self):
        N, b = 5, 2
        coeffs = [Fraction(1)]
        for k in range(N):
            coeffs.append(coeffs[-1] * (-N + k) / ((b + k) * (k + 1)))
        poly = np.polynomial.Polynomial([float(c) for c in coeffs])
        x = np.linspace(0.0, 9.0, 31)
        y, dy, d2y = kummer_poly_derivs(N, b, x)
        assert np.allclose(y, poly(x), rtol=1e-12, atol=1e-12)
        assert np.allclose(dy, poly.deriv()(x), rtol=1e-12, atol=1e-12)
        assert np.allclose(d2y, poly.deriv(2)(x), rtol=1e-12, atol=1e-12)


class TestMonopoleHarmonic:
    def test_reduces_to_spherical_harmonics(self):
        rng = np.random.default_rng(1)
        theta = rng.uniform(0.01, math.pi - 0.01, 100)
        phi = rng.uniform(0, 2 * math.pi, 100)
        for l in range(5):
            for m in range(-l, l + 1):
                ours = monopole_harmonic(0, l, m, theta, phi)
                ref = sph_harm_y(l, m, theta, phi)
                assert np.max(np.abs(ours - ref)) < 1e-10

    def test_closed_form_l1(self):
        t, p = 0.8, 1.3
        assert monopole_harmonic(0, 1, 0, t, p) == pytest.approx(math.sqrt(3 / (4 * math.pi)) * math.cos(t))

    @pytest.mark.parametrize("mu,l,m", [(0, 1, 0), (0, 1, 1), (7, 7, 6), (7, 7, -7), (HalfInt(13), HalfInt(13), HalfInt(-1)),
                                        (7, 7, 7), (2, 3, -1)])
    def test_normalized(self, mu, l, m):
        assert abs(harmonic_norm(mu, l, m) - 1.0) < 1e-6

    @pytest.mark.parametrize("m1,m2", [(6, 7), (-7, 0), (3, 4)])
    def test_orthogonal(self, m1, m2):
        assert abs(harmonic_inner(7, 7, m1, m2)) < 1e-6

    def test_azimuthal_eigenvalue(self):
        q = QuantumNumbers(mu=7, m=HalfInt(13))
        rng = np.random.default_rng(4)
        for t, p in zip(rng.uniform(0.2, 2.9, 10), rng.uniform(0, 6.2, 10)):
            assert azimuthal_check(q, t, p, fd_step=5e-4) < 1e-8

    def test_large_indices_finite(self):
        y = monopole_harmonic(20, 20, 19, np.linspace(0.1, 3.0, 50), 0.3)
        assert np.all(np.isfinite(y))

    def test_poles_rejected(self):
        with pytest.raises(ValueError):
            monopole_harmonic(7, 7, 6, 0.0, 0.0)
        with pytest.raises(ValueError):
            monopole_harmonic(7, 7, 6, math.pi, 0.0)

    def test_index_mismatch_rejected(self):
        with pytest.raises(ValueError):
            monopole_harmonic(7, 6, 6, 1.0, 0.0)
        with pytest.raises(ValueError):
            monopole_harmonic(HalfInt(13), 7, 6, 1.0, 0.0)
