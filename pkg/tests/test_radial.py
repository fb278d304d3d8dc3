from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest

from qverify.crosscheck import adaptive_radial_quad
from qverify.errors import DivergenceError
from qverify.radial import FPoly, RPoly, energy_constant, poly_radial_integral, radial_master
from qverify.scalars import SymScalar, gamma_ratio, sphere_area


def test_master_elementary():
    assert radial_master(1, 2) == SymScalar(Fraction(1, 2))
    assert radial_master(3, 3) == SymScalar(Fraction(1, 4))


def test_master_against_quadrature():
    for a, b in ((1, 2), (3, 3), (24, 14), (10, Fraction(15, 2))):
        q = adaptive_radial_quad(lambda r: r ** a / (1 + r * r) ** (mpmath.mpf(b.numerator) / b.denominator
                                                                    if isinstance(b, Fraction) else b))
        exact = radial_master(a, b).to_mpf(30)
        assert abs(q - exact) <= 1e-12 * abs(exact)


def test_master_lambda_scaling():
    lam = Fraction(3, 2)
    a, b = 5, 4
    assert radial_master(a, b, lam) == radial_master(a, b) * SymScalar(lam ** (a + 1 - 2 * b))


def test_master_divergence():
    with pytest.raises(DivergenceError):
        radial_master(3, 2)
    with pytest.raises(DivergenceError):
        radial_master(-1, 3)


def test_poly_integral_constant_reduces_to_master():
    got = poly_radial_integral(RPoly.const(1), 5, 4)
    assert got.exponents == [5 + 1 - 8]
    assert got.unit * got.coeff(-2)[0] == radial_master(5, 4)


def test_poly_integral_f_squared_converges_n25():
    N = 25
    f = FPoly().rpoly()
    out = poly_radial_integral(f * f, N + 3, N - 2, N)
    assert len(out.exponents) == 9


def test_poly_integral_f_squared_diverges_n12():
    N = 12
    f = FPoly().rpoly()
    with pytest.raises(DivergenceError):
        poly_radial_integral(f * f, N + 3, N - 2, N)


def test_energy_constant_n5():
    E = energy_constant(5)
    assert E.expand_sphere() == SymScalar(Fraction(1, 160), 6)
    q = adaptive_radial_quad(lambda r: r ** 4 / (1 + r * r) ** 5)
    via_quad = Fraction(1, 5) * float(sphere_area(5).expand_sphere()) * q
    assert abs(via_quad - math.pi ** 3 / 160) < 1e-12 * math.pi ** 3 / 160


def test_energy_constant_n25_gamma_form():
    N = 25
    expect = SymScalar.sphere(N) * Fraction(21, 25) * gamma_ratio([Fraction(25, 2), Fraction(25, 2)], [25]) / 2
    assert energy_constant(N) == expect


def test_energy_positive():
    assert all(energy_constant(N).sign() > 0 for N in range(5, 61))
