from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np
import pytest

from qverify.errors import DimensionError, PoleError
from qverify.reduced_energy import (assemble_F0, assemble_F0_from_lemmas, assemble_hessian,
                                    f0_prefactor, gluing_decreasing_from, gluing_schedule_check,
                                    hessian_matrix, hessian_prefactor, paper_I, paper_J1, scan_F0,
                                    solve_tau, verify_lemma81)
from qverify.weyl import default_weyl, project_weyl, random_weyl


@pytest.mark.parametrize("N", [25, 26])
def test_derived_I_equals_printed(N):
    assert assemble_F0(N).poly == paper_I(N)


def test_wrong_linear_coefficient_breaks_identity():
    assert assemble_F0(25, c1=-1200).poly != paper_I(25)


def test_lemma_route_equals_closed_route():
    a = assemble_F0(25)
    b = assemble_F0_from_lemmas(25)
    assert a.poly == b.poly
    vanishing = {t.name for t in b.terms if t.vanishes}
    assert "b_N commutator bracket" in vanishing
    assert {"HH d3u du cross term", "H d2u H d2u term"} <= vanishing


def test_tau_grading():
    with_tau = assemble_F0(25).poly
    without = assemble_F0(25, tau_slot=False).poly
    assert without.tau_degree() == 0
    assert with_tau.tau_part(0) == without


def test_hessian_structure():
    h = assemble_hessian(25)
    assert h.mixed_zero
    assert h.J2.tau_degree() <= 1


def test_prefactor_positive():
    for N in range(25, 61):
        assert f0_prefactor(N).sign() > 0 and hessian_prefactor(N).sign() > 0


def test_prefactor_poles():
    with pytest.raises(PoleError):
        f0_prefactor(18)


def test_small_dimension_rejected():
    with pytest.raises(DimensionError):
        assemble_F0(24)


def test_solve_tau_n25():
    sol = solve_tau(25)
    assert sol.discriminant > 0
    assert sol.exact_match and sol.agreement_digits >= 50
    with mpmath.workdps(64):
        for v in sol.values:
            res = sum(mpmath.mpf(c.numerator) / c.denominator * v ** k for k, c in enumerate(sol.quadratic))
            assert abs(res) < mpmath.mpf(10) ** -30 * max(abs(v), 1) ** 2
    assert mpmath.nstr(sol.printed_value, 15) == "17005.1339106255"


@pytest.mark.parametrize("N", [25, 40])
def test_lemma_sign_conditions(N):
    rep = verify_lemma81(N)
    assert rep.passed
    assert all(rep.accepted.conditions.values())


def test_hessian_default_weyl():
    rep = verify_lemma81(25)
    H = hessian_matrix(25, rep.accepted.root, default_weyl(25))
    A = np.array(H.matrix.tolist(), dtype=float)
    assert np.allclose(A, A.T)
    assert H.positive_definite and H.F01 < 0 and H.block_diagonal


def test_hessian_zero_weyl_rejected():
    W = project_weyl(np.zeros((25,) * 4, dtype=int))
    with pytest.raises(ValueError):
        hessian_matrix(25, 17005, W)


def test_scan_local_minimum():
    rep = verify_lemma81(25)
    sc = scan_F0(25, rep.accepted.root)
    assert sc.local_min_at_one and sc.F01 < 0


def test_scan_is_not_monotone_on_wide_window():
    # F(0, l') rises only on a narrow window around 1; recorded as a finding
    rep = verify_lemma81(25)
    sc = scan_F0(25, rep.accepted.root)
    assert sc.monotone_radius < 0.1
    assert not sc.monotone_on_grid


def test_gluing_exact_step():
    # at N=25 the quantity still grows at n=50; see the onset test
    rep = gluing_schedule_check(50, 25)
    assert rep.cube > 0 and not rep.decreasing
    assert gluing_schedule_check(10, 25).disjoint


def test_gluing_onset():
    assert gluing_decreasing_from(25) == 182
    assert gluing_schedule_check(182, 25).decreasing
    assert not gluing_schedule_check(181, 25).decreasing
