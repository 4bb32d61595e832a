import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncpoisson.freealg import NcPoly, Tensor, TracePoly, poly_mul, xinv
from ncpoisson.nccalc import affine_partials, cyclic_diff, double_diff, expand_u, gradient

from conftest import nc_polys, trace_polys

# the word x1^2 x2 x1 x2, relabelled x1 -> 0, x2 -> 1
EX_WORD = (0, 0, 1, 0, 1)


def test_example1_cyclic_partials():
    f = TracePoly({EX_WORD: 1})
    assert cyclic_diff(f, 0) == NcPoly({(0, 1, 0, 1): 1, (1, 0, 1, 0): 1, (1, 0, 0, 1): 1})
    assert cyclic_diff(f, 1) == NcPoly({(0, 1, 0, 0): 1, (0, 0, 1, 0): 1})


def test_example2_double_partials():
    f = NcPoly({EX_WORD: 1})
    assert double_diff(f, 0) == Tensor({((), (0, 1, 0, 1)): 1, ((0,), (1, 0, 1)): 1, ((0, 0, 1), (1,)): 1})
    assert double_diff(f, 1) == Tensor({((0, 0), (0, 1)): 1, ((0, 0, 1, 0), ()): 1})


def test_simple_partials():
    assert cyclic_diff(TracePoly({(0,): 1}), 0) == NcPoly.const(1)
    assert cyclic_diff(TracePoly({(0, 0, 0): 1}), 1).is_zero()
    assert double_diff(NcPoly.gen(0), 0) == Tensor.identity()
    assert double_diff(NcPoly({(1, 0, 1): 1}), 0) == Tensor.pair((1,), (1,))


def test_inverse_letter_partial():
    f = TracePoly({(xinv(1), 0): 1})
    assert cyclic_diff(f, 1) == NcPoly({(xinv(1), 0, xinv(1)): -1})


def test_index_out_of_range():
    with pytest.raises(IndexError):
        cyclic_diff(TracePoly({(0,): 1}), 3, n=3)
    with pytest.raises(IndexError):
        double_diff(NcPoly.gen(0), -1)


@given(trace_polys(n=3, max_len=8, max_terms=5))
@settings(max_examples=200, deadline=None)
def test_commutator_identity(f):
    # sum_i [x_i, df/dx_i] = 0
    total = NcPoly({})
    for i, d in enumerate(gradient(f, 3)):
        xi = NcPoly.gen(i)
        total = total + xi * d - d * xi
    assert total.is_zero()


@given(nc_polys(n=3, max_len=6, laurent=True))
@settings(max_examples=100, deadline=None)
def test_double_derivative_reconstructs_differential(f):
    # apply D f/D x_i to a formal symbol and compare with the positional expansion of df
    marker = 7
    via_tensors = NcPoly({})
    for i in range(3):
        via_tensors = via_tensors + double_diff(f, i)(NcPoly.gen(marker))
    direct: dict = {}
    for w, v in f.terms.items():
        for p, c in enumerate(w):
            if c < 3:
                k = w[:p] + (marker,) + w[p + 1:]
                direct[k] = direct.get(k, 0) + v
            elif c >= 10_000 and c - 10_000 < 3:
                # d(x^-1) = -x^-1 dx x^-1
                k = w[:p + 1] + (marker,) + w[p:]
                direct[k] = direct.get(k, 0) - v
    assert via_tensors == NcPoly(direct)


def test_affine_partials_examples():
    x1inv = xinv(1)
    parts = affine_partials(TracePoly({(0,): 1}), 2)
    assert parts[0] == NcPoly({(x1inv,): 1})
    assert parts[1] == NcPoly({(x1inv, 0, x1inv): -1})
    assert all(p.is_zero() for p in affine_partials(TracePoly({(): 1}), 3))


def test_affine_partials_match_expanded():
    f = TracePoly({(0, 1): 1})
    fx = expand_u(f, 3)
    assert fx == TracePoly({(xinv(2), 0, xinv(2), 1): 1})
    for i, p in enumerate(affine_partials(f, 3)):
        assert p == cyclic_diff(fx, i)


def test_affine_partials_reject_non_u_letters():
    with pytest.raises(ValueError):
        affine_partials(TracePoly({(2,): 1}), 3)


@pytest.mark.parametrize("n", [2, 3, 4])
@given(data=st.data())
@settings(max_examples=35, deadline=None)
def test_euler_and_chain_rule(n, data):
    # homogeneous f: a trace Laurent polynomial in u_j = x_{n-1}^-1 x_j
    f = data.draw(trace_polys(n=n - 1, max_len=5, max_terms=4, laurent=True))
    fx = expand_u(f, n)
    left = right = NcPoly({})
    for i, p in enumerate(affine_partials(f, n)):
        assert p == cyclic_diff(fx, i)
        left = left + poly_mul(NcPoly.gen(i), p)
        right = right + poly_mul(p, NcPoly.gen(i))
    assert left.is_zero() and right.is_zero()
