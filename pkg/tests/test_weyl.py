from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from qverify.crosscheck import mc_sphere, sphere_integrand
from qverify.scalars import SymScalar
from qverify.weyl import (SPHERE_KINDS, WeylForm, default_weyl, h_matrix, m_matrix, project_weyl,
                          random_weyl, sphere_quadratic_integral, sphere_quadratic_matrix,
                          weyl_quad_norm)


def test_zero_projects_to_zero():
    W = project_weyl(np.zeros((5,) * 4, dtype=int))
    assert W.is_zero() and W.is_valid()


def test_projection_invariants_and_idempotence():
    W = random_weyl(5, 7)
    assert W.is_antisymmetric() and W.has_pair_symmetry()
    assert W.satisfies_bianchi() and W.is_trace_free()
    assert project_weyl(W.entries) == W


def test_h_matrix_trace_free_and_annihilates_y():
    W = random_weyl(5, 3)
    rng = np.random.default_rng(0)
    y = [Fraction(int(v), 7) for v in rng.integers(-20, 20, 5)]
    H = h_matrix(W, y)
    assert sum(H[i, i] for i in range(5)) == 0
    assert all(sum(H[i, j] * y[j] for j in range(5)) == 0 for i in range(5))
    assert not np.any(h_matrix(W, [0] * 5))
    H3 = h_matrix(W, [3 * v for v in y])
    assert np.all(H3 == 9 * H)


def test_h_matrix_divergence_free():
    # d_i H_ij = sum_i (W_iijq + W_iqji) y_q vanishes; check via the polynomial coefficients
    W = random_weyl(6, 2)
    w = W.entries
    div = np.einsum("iijq->jq", w) + np.einsum("iqji->jq", w)
    assert not np.any(div)


def test_quad_norm_scaling_and_positivity():
    W = random_weyl(5, 1)
    assert weyl_quad_norm(W.scale(3)) == 9 * weyl_quad_norm(W)
    assert weyl_quad_norm(project_weyl(np.zeros((5,) * 4, dtype=int))) == 0
    W25 = default_weyl(25)
    z = W25.to_float() + W25.to_float().transpose(0, 3, 2, 1)
    direct = float((z * z).sum())
    assert weyl_quad_norm(W25) > 0
    assert abs(float(weyl_quad_norm(W25)) - direct) < 1e-9 * direct


def test_m_matrix_trace_is_quad_norm():
    W = random_weyl(6, 4)
    M = m_matrix(W)
    assert sum(M[i, i] for i in range(6)) == weyl_quad_norm(W)


@pytest.mark.parametrize("kind", SPHERE_KINDS)
def test_sphere_identities_exact_n5(kind):
    lhs, rhs = sphere_quadratic_matrix(random_weyl(5, 11), kind)
    assert all(a == b for a, b in zip(lhs.flat, rhs.flat))


def test_sphere_h2_closed_form_n25():
    W = random_weyl(25, 5)
    si = sphere_quadratic_integral(W, "H^2")
    expect = SymScalar.sphere(25) * (weyl_quad_norm(W) / (2 * 25 * 27))
    assert si.lhs == expect == si.rhs


def test_zero_weyl_sphere_integral():
    W = project_weyl(np.zeros((5,) * 4, dtype=int))
    si = sphere_quadratic_integral(W, "(dH)^2")
    assert si.lhs.is_zero() and si.rhs.is_zero()


def test_dh2_monte_carlo():
    W = random_weyl(5, 9)
    exact = float(sphere_quadratic_integral(W, "(dH)^2").rhs)
    est = mc_sphere(5, 1_000_000, sphere_integrand(W, "(dH)^2"), seed=1)
    assert est.agrees(exact)


def test_unknown_kind():
    with pytest.raises(Exception):
        sphere_quadratic_integral(random_weyl(5, 1), "H^3")
