import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from scipy import integrate

from virasoro_engine import quantization_checks as qc
from virasoro_engine.quantization_checks import (
    BumpSpec,
    QuadratureError,
    QuadratureResult,
    anomaly_defect_bound,
    anomaly_integral_exact,
    anomaly_integral_numeric,
    anomaly_limit,
    anomaly_limit_defect,
    annulus_moment,
    beta_gamma_central_charge,
    central_term_quadrature,
    composite_gl,
    default_nested_bumps,
    heat_kernel,
    heat_kernel_mass,
)


def sympy_anomaly(eps: Fraction, L: Fraction) -> Fraction:
    t = sympy.Symbol("t", positive=True)
    e = sympy.Rational(eps.numerator, eps.denominator)
    val = sympy.integrate(e**2 * t / (e + t) ** 4, (t, e, sympy.Rational(L.numerator, L.denominator)))
    val = sympy.nsimplify(val)
    return Fraction(int(val.p), int(val.q))


class TestQuadrature:
    def test_composite_polynomial(self):
        r = composite_gl(lambda x: x**5 - 3 * x, 0.0, 2.0)
        assert r.value == pytest.approx(64 / 6 - 6, abs=1e-12)
        assert r.error >= 0

    def test_non_convergence_is_an_error(self):
        with pytest.raises(QuadratureError):
            composite_gl(lambda x: np.sin(1 / np.maximum(x, 1e-300)), 0.0, 1.0, tol=1e-14, max_panels=8)

    def test_result_rejects_negative_error(self):
        with pytest.raises(ValueError):
            QuadratureResult(1.0, -1.0, 1)

    def test_env_tolerance(self, monkeypatch):
        monkeypatch.setenv(qc.TOL_ENV, "1e-6")
        assert qc.default_tolerance() == 1e-6
        monkeypatch.setenv(qc.TOL_ENV, "fast")
        with pytest.raises(ValueError):
            qc.default_tolerance()


class TestBump:
    @pytest.mark.parametrize("family", sorted(qc.BUMP_FAMILIES))
    def test_normalized(self, family):
        b = BumpSpec(0.7, 1.9, family)
        lo, hi = b.s_range
        mass, _ = integrate.quad(b, lo, hi, epsabs=1e-13, limit=200)
        assert math.pi * mass == pytest.approx(1.0, abs=1e-10)

    def test_support(self):
        b = BumpSpec(1.0, 2.0)
        s = np.array([0.5, 1.0, 4.0, 5.0])
        assert np.all(b(s) == 0)
        assert b(np.array([2.5]))[0] > 0

    def test_derivatives_against_finite_differences(self):
        b = BumpSpec(1.0, 2.0, "exp-square")
        s = np.linspace(1.2, 3.8, 9)
        h = 1e-5
        d = b.derivatives(s, 3)
        for k in range(1, 4):
            fd = (b.derivatives(s + h, k - 1)[k - 1] - b.derivatives(s - h, k - 1)[k - 1]) / (2 * h)
            assert np.allclose(d[k], fd, rtol=1e-5, atol=1e-6 * np.abs(d[k]).max())

    @pytest.mark.parametrize("args", [(0.0, 1.0), (2.0, 1.0), (1.0, 1.0)])
    def test_bad_radii(self, args):
        with pytest.raises(ValueError):
            BumpSpec(*args)

    def test_bad_family(self):
        with pytest.raises(ValueError):
            BumpSpec(1.0, 2.0, "gaussian")


class TestAnnulus:
    b = BumpSpec(1.0, 1.6)

    def test_normalization(self):
        assert abs(annulus_moment(self.b, 0).value - 1) < 1e-8

    @pytest.mark.parametrize("k", [k for k in range(-6, 7) if k])
    def test_angular_moments_vanish(self, k):
        r = annulus_moment(self.b, k)
        assert abs(r.value) < 1e-8


class TestCentralTerm:
    def test_diagonal(self):
        r = central_term_quadrature(2, -2)
        assert r.value == pytest.approx(0.5, rel=1e-4)
        assert r.target == Fraction(1, 2)

    @pytest.mark.parametrize("m,n", [(1, -1), (2, 1), (0, 0), (-1, 1)])
    def test_vanishing(self, m, n):
        assert abs(central_term_quadrature(m, n).value) < 1e-6

    def test_measured_constant(self):
        r = central_term_quadrature(3, -3)
        assert r.measured_constant == pytest.approx(-1 / math.pi, rel=1e-8)

    def test_factors_itemized(self):
        r = central_term_quadrature(2, -2)
        assert set(r.factors) == set(qc.CENTRAL_TERM_FACTORS)
        prod = math.prod(r.factors.values())
        assert r.value == pytest.approx(r.raw_integral.real * prod)

    def test_overlapping_supports(self):
        b1, b2, b3 = default_nested_bumps()
        with pytest.raises(ValueError):
            central_term_quadrature(2, -2, (b2, b1, b3))

    def test_family_independence(self):
        base = central_term_quadrature(3, -3).value
        for fam in ("exp-sharp", "exp-square"):
            assert abs(central_term_quadrature(3, -3, default_nested_bumps(fam)).value - base) < 1e-5

    def test_other_nesting(self):
        bumps = (BumpSpec(0.3, 0.6), BumpSpec(0.8, 1.1), BumpSpec(1.5, 3.0, "exp-sharp"))
        assert central_term_quadrature(2, -2, bumps).value == pytest.approx(0.5, rel=1e-6)


class TestHeatKernel:
    def test_coincidence(self):
        assert heat_kernel(1.0, 0.3 + 1j, 0.3 + 1j) == pytest.approx(1 / (4 * math.pi))

    def test_formula(self):
        val = heat_kernel(50.0, 0, 2 + 1j)
        assert val == pytest.approx(math.exp(-5 / 200) / (200 * math.pi))
        assert val < 1 / (200 * math.pi)

    @pytest.mark.parametrize("Lt", [0.01, 1.0, 7.5])
    def test_mass(self, Lt):
        assert abs(heat_kernel_mass(Lt).real - 1) < 1e-6

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError):
            heat_kernel(0, 0, 1)


class TestAnomaly:
    def test_empty_range(self):
        assert anomaly_integral_exact(3, 3) == 0

    def test_example(self):
        assert anomaly_integral_exact(1, 2) == Fraction(13, 324)

    def test_against_sympy(self):
        for eps, L in [("1/10", "10"), ("1", "2"), ("2/7", "3/2")]:
            e, l = Fraction(eps), Fraction(L)
            assert anomaly_integral_exact(e, l) == sympy_anomaly(e, l)

    def test_printed_expansion(self):
        e, L = Fraction(1, 10), Fraction(10)
        v = Fraction(1, 12) - Fraction(1, 200) / (Fraction(101, 10) ** 2) + Fraction(1, 3000) / Fraction(101, 10) ** 3
        assert anomaly_integral_exact(e, L) == v
        assert float(v) == pytest.approx(0.0832846, abs=1e-7)

    def test_numeric_agrees(self):
        rng = random.Random(99)
        for _ in range(20):
            L = Fraction(rng.randint(1, 400), rng.randint(1, 20))
            eps = L * Fraction(rng.randint(1, 1000), 1000)
            r = anomaly_integral_numeric(eps, L)
            assert abs(r.value - float(anomaly_integral_exact(eps, L))) <= max(r.error, 1e-15) + 1e-15

    @pytest.mark.parametrize("eps,L", [(0, 1), (-1, 1), (2, 1)])
    def test_domain(self, eps, L):
        with pytest.raises(ValueError):
            anomaly_integral_exact(eps, L)

    def test_defect_bound_example(self):
        assert anomaly_limit_defect("1/10", 10) < Fraction(1, 20000)
        assert anomaly_limit_defect(5, 5) == Fraction(1, 12)

    def test_defect_bound_holds(self):
        rng = random.Random(1)
        for _ in range(200):
            L = Fraction(rng.randint(1, 50), rng.randint(1, 9))
            eps = L * Fraction(rng.randint(1, 99), 100)
            assert anomaly_limit_defect(eps, L) <= anomaly_defect_bound(eps, L)

    def test_monotone_approach(self):
        vals = [anomaly_limit_defect(Fraction(1, 2**k), 1) for k in range(1, 11)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_limit(self):
        assert anomaly_limit() == Fraction(1, 12)
        assert anomaly_limit(7) == Fraction(1, 12)


class TestCharge:
    @pytest.mark.parametrize("n", range(1, 9))
    def test_charge(self, n):
        out = beta_gamma_central_charge(n)
        assert out["charge"] == n
        assert out["cocycle_coefficient"] == Fraction(n, 12)

    def test_audit_trail(self):
        out = beta_gamma_central_charge(1)
        factors = {s["step"]: s["factor"] for s in out["audit"]}
        assert factors["net y-integration prefactor"] == "1/2*pi^-1"
        assert factors["t-integral limit eps -> 0"] == "1/12"
        assert factors["cocycle coefficient (c/12)"] == "1/12"
        assert out["alpha"] == "1/24*pi^-1"

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            beta_gamma_central_charge(0)
