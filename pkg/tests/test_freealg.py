import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncpoisson.freealg import (
    AUX, AUX_INV, EMPTY, NcPoly, Tensor, TracePoly, cyclic_canon, dilate, inverse, necklaces,
    parse_terms, parse_word, poly_mul, reduce_word, render_terms, render_word, tensor_apply,
    tensor_mul, tensor_star, trace, trace_product, xinv,
)

from conftest import nc_polys, trace_polys, words


def test_reduce_word_examples():
    assert reduce_word([0, xinv(0)]) == EMPTY
    assert reduce_word([1, 0, xinv(0), 2]) == (1, 2)
    assert reduce_word([AUX_INV, AUX, 0]) == (0,)


@given(st.lists(st.integers(0, 2).map(lambda i: i) | st.integers(0, 2).map(xinv), max_size=12),
       st.randoms(use_true_random=False))
@settings(max_examples=500, deadline=None)
def test_reduce_word_confluent(seq, rnd):
    # cancel adjacent inverse pairs in a random order until none remain
    w = list(seq)
    while True:
        spots = [i for i in range(len(w) - 1) if w[i + 1] == inverse(w[i])]
        if not spots:
            break
        i = rnd.choice(spots)
        del w[i:i + 2]
    assert tuple(w) == reduce_word(seq)


def test_poly_mul_examples():
    x0, x1 = NcPoly.gen(0), NcPoly.gen(1)
    assert x0 * x1 == NcPoly({(0, 1): 1})
    assert (x0 + x1) * NcPoly({(xinv(0),): 1}) == NcPoly({(): 1, (1, xinv(0)): 1})


@given(nc_polys(laurent=True), nc_polys(laurent=True), nc_polys(laurent=True))
@settings(max_examples=100, deadline=None)
def test_poly_mul_associative(f, g, h):
    assert f * (g * h) == (f * g) * h
    assert f * NcPoly.const(1) == f


def test_trace_examples():
    assert trace(NcPoly({(0, 1): 1, (1, 0): -1})).is_zero()
    # all five rotations of x0 x0 x1 x0 x1; the lexicographic minimum starts with x0 x0
    w = (0, 0, 1, 0, 1)
    rots = [w[i:] + w[:i] for i in range(5)]
    assert trace(NcPoly({w: 1})) == TracePoly({min(rots): 1}, canonical=True)
    assert min(rots) == (0, 0, 1, 0, 1)


@given(nc_polys(laurent=True), nc_polys(laurent=True))
@settings(max_examples=200, deadline=None)
def test_trace_cyclic(f, g):
    assert trace(f * g) == trace(g * f)
    assert trace_product(f, g) == trace(f * g)


@given(words(3, 8, laurent=True), st.integers(0, 8))
@settings(max_examples=200, deadline=None)
def test_canonical_rotation_invariant(w, s):
    s = s % max(len(w), 1)
    assert cyclic_canon(w[s:] + w[:s]) == cyclic_canon(w)


def test_laurent_seam_cancellation():
    # x0 x1 x0^-1 is conjugate to x1
    assert cyclic_canon((0, 1, xinv(0))) == (1,)
    assert cyclic_canon((xinv(2), 0, 2)) == (0,)


@pytest.mark.parametrize("nvars,deg", [(2, 5), (3, 4)])
def test_trace_image_dimension_equals_necklaces(nvars, deg):
    # words of length L span F_L; the image has one basis element per necklace
    for L in range(1, deg + 1):
        images = set()
        for idx in np.ndindex(*(nvars,) * L):
            images.add(next(iter(trace(NcPoly({tuple(idx): 1})).terms)))
        assert len(images) == len(necklaces(nvars, L, L))


def test_tensor_apply_examples():
    T = Tensor.pair((0,), (1,))
    assert T(NcPoly.gen(2)) == NcPoly({(0, 2, 1): 1})
    f = NcPoly({(0, 1): 2, (2,): -1})
    assert Tensor.identity()(f) == f
    assert T(NcPoly.gen(2) + NcPoly.gen(3)) == NcPoly({(0, 2, 1): 1, (0, 3, 1): 1})


def test_tensor_star_examples():
    assert tensor_star(Tensor.pair((0,), (1,))) == Tensor.pair((1,), (0,))
    assert tensor_star(Tensor.identity()) == Tensor.identity()


tensors = st.dictionaries(st.tuples(words(3, 3), words(3, 3)), st.integers(-2, 2).filter(bool),
                          max_size=3).map(Tensor)


@given(tensors, nc_polys(), nc_polys())
@settings(max_examples=100, deadline=None)
def test_tensor_star_trace_identity(T, a, b):
    assert tensor_star(tensor_star(T)) == T
    assert trace(a * T(b)) == trace(tensor_star(T)(a) * b)


@given(tensors, tensors, nc_polys())
@settings(max_examples=100, deadline=None)
def test_tensor_mul_composition(S, T, f):
    # (b (x) c)(b' (x) c') acts as f -> b b' f c' c
    assert tensor_apply(tensor_mul(S, T), f) == S(T(f))


def test_dilate_examples():
    assert dilate(NcPoly({(0, 1): 1})) == NcPoly({(AUX, 0, AUX, 1): 1})
    u = TracePoly({(xinv(1), 0): 1})
    assert dilate(u) == u


@given(nc_polys(laurent=True), nc_polys(laurent=True))
@settings(max_examples=100, deadline=None)
def test_dilate_homomorphism(f, g):
    assert dilate(f * g) == dilate(f) * dilate(g)


def test_zero_threshold_prunes_dust():
    p = NcPoly({(0,): 1.0, (1,): 1e-15})
    assert list(p.terms) == [(0,)]


def test_render_and_parse_roundtrip():
    w = (0, xinv(1), AUX)
    assert render_word(w) == "x0.x1^-1.a"
    assert parse_word("x0.x1^-1.a") == w
    assert render_word(EMPTY) == "1"
    p = NcPoly({(0, 1): 1 + 2j, (): -0.5})
    assert parse_terms(render_terms(p)) == p
    T = Tensor({((0,), (1, 1)): 3.0, ((), ()): 1j})
    assert parse_terms(render_terms(T), Tensor) == T


@given(trace_polys(laurent=True))
@settings(max_examples=50, deadline=None)
def test_trace_poly_render_roundtrip(f):
    assert parse_terms(render_terms(f), TracePoly) == f


def test_parse_word_rejects_garbage():
    with pytest.raises(ValueError):
        parse_word("x0.y")
