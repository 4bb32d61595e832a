import numpy as np
import pytest

from ncpoisson.freealg import Tensor, TracePoly, tensor_star, xinv
from ncpoisson.nccalc import expand_u
from ncpoisson.polyvec import Bivector, RTensor, biv_apply, random_trace_poly
from ncpoisson.projective import (
    AffineBracket, biv_equiv, chart_consistency, chart_substitution, chart_transform, descend,
    descent_defect, euler_defect, jacobi_affine, jacobi_homogeneous, monomial_battery,
)

from conftest import elliptic_r


def T(w):
    return TracePoly({w: 1.0})


def test_descend_zero_tensor():
    A = descend(RTensor(np.zeros((3, 3, 3, 3))))
    assert A.theta == {} and A.chart == 2 and A.n == 2


def test_descend_pure_chart_term():
    # only r[c,c,c,c] set: theta_pq = u_q (x) u_p
    r = np.zeros((3, 3, 3, 3))
    r[2, 2, 2, 2] = 1.0
    A = descend(RTensor(r))
    for p in range(2):
        for q in range(2):
            assert A.entry(p, q) == Tensor.pair((q,), (p,))


@pytest.mark.parametrize("n,k,chart", [(3, 1, 2), (3, 2, 0), (4, 1, 3), (4, 3, 1)])
def test_descent_commutes_with_expansion(n, k, chart, rng):
    r = elliptic_r(n, k)
    for _ in range(4):
        f = random_trace_poly(rng, n - 1, 3)
        g = random_trace_poly(rng, n - 1, 3)
        assert descent_defect(r, f, g, chart) < 1e-9


def test_euler_relations_hold_for_u_functions(rng):
    for _ in range(5):
        f = random_trace_poly(rng, 3, 3)
        assert euler_defect(f, 4, 1) < 1e-12


def test_chart_transform_rules():
    A = descend(elliptic_r(3, 1))
    assert chart_transform(A, 2) is A
    assert chart_transform(A, 0).chart == 0
    with pytest.raises(ValueError):
        chart_transform(A, 3)
    with pytest.raises(ValueError):
        chart_transform(A.scale(2.0), 0)


def test_chart_substitution_images():
    im = chart_substitution(3, 0, 2)
    # chart 0 uses x1, x2; chart 2 uses x0, x1; u_{1,0} = u_{0,2}^-1 u_{1,2}, u_{2,0} = u_{0,2}^-1
    assert im[0].terms == {(xinv(0), 1): 1.0}
    assert im[1].terms == {(xinv(0),): 1.0}


@pytest.mark.parametrize("n,k,other", [(3, 1, 0), (3, 2, 1), (4, 1, 0)])
def test_chart_consistency(n, k, other, rng):
    A = descend(elliptic_r(n, k))
    for f, g in [(T((0,)), T((1,))), (T((0, 1)), T((1, 1)))]:
        assert chart_consistency(A, other, f, g) < 1e-9
    f, g = random_trace_poly(rng, n - 1, 2), random_trace_poly(rng, n - 1, 2)
    assert chart_consistency(A, other, f, g) < 1e-9


def test_biv_equiv_relation():
    A = descend(elliptic_r(3, 1))
    assert biv_equiv(A, A, degree=3, n_random=5)[0]
    ok, defect = biv_equiv(A, A.scale(1 + 1e-6), degree=3, n_random=5)
    assert not ok and defect > 1e-9
    with pytest.raises(ValueError):
        biv_equiv(A, descend(elliptic_r(4, 1)))


def test_biv_equiv_ignores_tensor_layout():
    # the same bracket written through the cached bivector and through descend agrees
    r = elliptic_r(3, 2)
    A = descend(r)
    B = AffineBracket(2, {k: Tensor(dict(v.terms)) for k, v in A.theta.items()}, n_total=3)
    ok, defect = biv_equiv(A, B, degree=3, n_random=5)
    assert ok and defect == 0


def test_affine_bracket_validation():
    with pytest.raises(ValueError):
        AffineBracket(2, {}, n_total=4, chart=0)
    with pytest.raises(ValueError):
        AffineBracket(2, {}, n_total=3, chart=5)
    assert AffineBracket(2, {}, n_total=3).chart == 2


@pytest.mark.parametrize("n,k", [(3, 1), (3, 2)])
def test_jacobi_affine(n, k):
    assert jacobi_affine(descend(elliptic_r(n, k)), degree=2, n_random=10) < 1e-9


def test_jacobi_affine_detects_perturbation():
    A = descend(elliptic_r(3, 1))
    theta = dict(A.theta)
    # constant and u0 (x) u0 shifts stay Poisson on two variables; a cubic one does not
    P = Tensor.pair((0, 0), (1,)).scale(0.1)
    theta[(0, 1)] = theta[(0, 1)] + P
    theta[(1, 0)] = theta[(1, 0)] - tensor_star(P)
    assert jacobi_affine(A.with_theta(theta), degree=2, n_random=0) > 1e-3


def test_jacobi_homogeneous():
    assert jacobi_homogeneous(elliptic_r(3, 1), degree=2) < 1e-9
    assert jacobi_homogeneous(elliptic_r(4, 1), degree=1) < 1e-9


def test_path_independence(rng):
    # bracket in chart 2 then expand == bracket in chart 0 then expand, on homogeneous arguments
    r = elliptic_r(3, 1)
    for _ in range(3):
        f, g = random_trace_poly(rng, 2, 2), random_trace_poly(rng, 2, 2)
        fx, gx = expand_u(f, 3, 2), expand_u(g, 3, 2)
        direct = biv_apply(r, fx, gx)
        via2 = expand_u(biv_apply(descend(r, 2), f, g), 3, 2)
        assert (direct - via2).max_abs() < 1e-9


def test_monomial_battery_counts():
    assert len(monomial_battery(2, 3)) == 2 + 3 + 4
