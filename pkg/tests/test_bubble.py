from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np
import pytest

from qverify.bubble import (BubbleParams, flat_residual, ijkk_identity, rescale, u0_derivative,
                            u0_jet, u0_value)
from qverify.crosscheck import finite_difference
from qverify.errors import JetOrderError


def _mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def _point(rng, N, scale=1000, span=3000):
    return [Fraction(int(v), scale) for v in rng.integers(-span, span + 1, N)]


def test_gradient_vanishes_at_centre():
    N = 7
    xi = tuple(Fraction(k, 5) for k in range(N))
    jet = u0_jet(list(xi), BubbleParams(N, Fraction(3, 4), xi), order=2)
    assert all(v == 0 for v in jet.d1)


def test_hessian_at_centre():
    N, lam = 25, Fraction(4, 5)
    p = BubbleParams(N, lam, tuple([Fraction(0)] * N))
    x = [Fraction(0)] * N
    with mpmath.workdps(64):
        u = u0_value(x, p)
        for i, j in ((0, 0), (3, 3), (0, 1)):
            expect = -(N - 4) * u / _mp(lam) ** 2 * (1 if i == j else 0)
            assert abs(u0_derivative(x, p, (i, j)) - expect) < 1e-50 * abs(u)


def test_gradient_against_finite_differences():
    rng = np.random.default_rng(3)
    N = 6
    p = BubbleParams(N, Fraction(6, 5), tuple(_point(rng, N, span=1000)))
    x = _point(rng, N)
    for i in range(N):
        num = finite_difference(lambda z: u0_value(z, p, dps=60), x, (i,))
        ex = u0_derivative(x, p, (i,))
        assert abs(num - ex) <= 1e-8 * abs(ex)


@pytest.mark.parametrize("N", [5, 25])
def test_fourth_derivatives_against_finite_differences(N):
    rng = np.random.default_rng(N)
    p = BubbleParams(N, Fraction(1), tuple([Fraction(0)] * N))
    x = [Fraction(int(v), 100) for v in rng.integers(-150, 151, N)]
    for idx in ((0, 1, 1, 2), (2, 2, 2, 2), (0, 1, 3, 4)):
        num = finite_difference(lambda z: u0_value(z, p, dps=60), x, idx)
        ex = u0_derivative(x, p, idx)
        assert abs(num - ex) <= 1e-6 * abs(ex)


def test_jet_matches_entrywise():
    N = 5
    p = BubbleParams(N, Fraction(1), tuple([Fraction(1, 3)] * N))
    x = [Fraction(1, 2), Fraction(-1), Fraction(0), Fraction(2), Fraction(1, 7)]
    jet = u0_jet(x, p, order=3)
    assert abs(jet.d3[0, 1, 1] - u0_derivative(x, p, (0, 1, 1))) < 1e-55
    with pytest.raises(JetOrderError):
        jet.tensor(4)


def test_flat_equation_centre_n25():
    N = 25
    p = BubbleParams(N, Fraction(1), tuple([Fraction(0)] * N))
    assert flat_residual([Fraction(0)] * N, p).relative <= 1e-9


@pytest.mark.parametrize("lam", [Fraction(1, 2), Fraction(1), Fraction(3, 2)])
def test_flat_equation_scale_family(lam):
    N = 9
    p = BubbleParams(N, lam, tuple([Fraction(0)] * N))
    x = [lam * Fraction(k, 7) for k in range(N)]
    assert flat_residual(x, p).relative <= 1e-9


def test_flat_equation_far_field():
    N = 5
    p = BubbleParams(N, Fraction(1), tuple([Fraction(0)] * N))
    x = [Fraction(100)] + [Fraction(0)] * (N - 1)
    assert flat_residual(x, p).relative <= 1e-8


def test_printed_normalisation_fails_flat_equation():
    N = 25
    p = BubbleParams(N, Fraction(1), tuple([Fraction(0)] * N), normalization="printed")
    assert flat_residual([Fraction(0)] * N, p).relative > 1


def test_rescale_roundtrip_and_values():
    N = 7
    eps = Fraction(1, 2 ** 50)
    p = BubbleParams(N, eps, tuple([Fraction(0)] * N), eps=eps)
    q = rescale(p)
    assert q.lam == 1 and rescale(q) == p
    unit = BubbleParams(N, Fraction(1))
    assert rescale(unit).lam == unit.lam and rescale(unit).xi == unit.xi
    rng = np.random.default_rng(5)
    eps = Fraction(1, 8)
    px = BubbleParams(N, Fraction(1, 10), tuple(_point(rng, N, 10000, 1000)), eps=eps)
    py = rescale(px)
    a = Fraction(N - 4, 2)
    for _ in range(20):
        y = _point(rng, N)
        with mpmath.workdps(64):
            lhs = _mp(eps) ** _mp(a) * u0_value([eps * t for t in y], px)
            rhs = u0_value(y, py)
            assert abs(lhs - rhs) < 1e-50 * abs(rhs)


def test_ijkk_identity_holds_with_lambda_squared():
    N = 9
    p = BubbleParams(N, Fraction(6, 5), tuple([Fraction(0)] * N))
    x = [Fraction(k, 3) for k in range(N)]
    lhs, rhs = ijkk_identity(x, p, 0, 1)
    assert abs(lhs - rhs) <= 1e-40 * abs(lhs)
    lhs, rhs = ijkk_identity(x, p, 2, 2)
    assert abs(lhs - rhs) <= 1e-40 * abs(lhs)


def test_ijkk_identity_fails_with_other_scale():
    N = 9
    p = BubbleParams(N, Fraction(6, 5), tuple([Fraction(0)] * N))
    x = [Fraction(k + 1, 3) for k in range(N)]
    lhs, rhs = ijkk_identity(x, p, 2, 2, scale2=Fraction(1, 4))
    assert abs(lhs - rhs) > 1e-2 * abs(lhs)
    lhs, rhs = ijkk_identity(x, p, 1, 2, scale2=Fraction(1, 4))
    assert abs(lhs - rhs) <= 1e-40 * abs(lhs)
