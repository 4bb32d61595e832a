"""Cyclic and double derivatives on the free Laurent algebra, and the chart chain rule."""

from __future__ import annotations

from .freealg import (
    AUX,
    INV_BASE,
    NcPoly,
    Tensor,
    TracePoly,
    concat,
    inverse,
    poly_mul,
)


def _check_index(i: int, n: int | None) -> None:
    if i < 0 or (n is not None and i >= n):
        raise IndexError(f"generator index {i} out of range for n={n}")


def cyclic_diff(f: TracePoly, i: int, n: int | None = None) -> NcPoly:
    """Cyclic partial derivative of a trace polynomial with respect to x_i.

    Each occurrence of x_i is rotated to the end and removed.  An occurrence of
    x_i^-1 contributes -x_i^-1 (rotation without it) x_i^-1, which is what
    d(u^-1) = -u^-1 du u^-1 gives after cycling du to the end.  The auxiliary
    letter is a constant.
    """
    _check_index(i, n)
    xi, xi_inv = i, i + INV_BASE
    d: dict = {}
    for w, v in f.terms.items():
        L = len(w)
        for p in range(L):
            c = w[p]
            if c == xi:
                k = w[p + 1:] + w[:p]
                d[k] = d.get(k, 0) + v
            elif c == xi_inv:
                k = concat(concat((xi_inv,), w[p + 1:] + w[:p]), (xi_inv,))
                d[k] = d.get(k, 0) - v
    return NcPoly(d)


def gradient(f: TracePoly, n: int) -> list[NcPoly]:
    return [cyclic_diff(f, i) for i in range(n)]


def double_diff(f: NcPoly, i: int, n: int | None = None) -> Tensor:
    """D f / D x_i: split each occurrence of x_i into prefix (x) suffix."""
    _check_index(i, n)
    xi, xi_inv = i, i + INV_BASE
    d: dict = {}
    for w, v in f.terms.items():
        for p, c in enumerate(w):
            if c == xi:
                k = (w[:p], w[p + 1:])
                d[k] = d.get(k, 0) + v
            elif c == xi_inv:
                k = (w[: p + 1], w[p:])
                d[k] = d.get(k, 0) - v
    return Tensor(d)


def double_gradient(f: NcPoly, n: int) -> list[Tensor]:
    return [double_diff(f, i) for i in range(n)]


# ------------------------------------------------------------ affine charts


def chart_vars(n: int, chart: int) -> list[int]:
    """x-indices of the affine coordinates u_m = x_chart^-1 x_{vars[m]}."""
    if not 0 <= chart < n:
        raise ValueError(f"chart index {chart} out of range for n={n}")
    return [i for i in range(n) if i != chart]


def u_images(n: int, chart: int | None = None) -> dict[int, NcPoly]:
    """Letter images for expanding u-words into homogeneous x-words."""
    chart = n - 1 if chart is None else chart
    ci = inverse(chart)
    images = {}
    for m, i in enumerate(chart_vars(n, chart)):
        images[m] = NcPoly({(ci, i): 1.0})
        images[inverse(m)] = NcPoly({(inverse(i), chart): 1.0})
    return images


def _expand_word(w, images):
    out = ()
    for c in w:
        (img,) = images[c].terms
        out = concat(out, img)
    return out


def expand_u(f, n: int, chart: int | None = None):
    """Rewrite an NcPoly/TracePoly in u-variables as a homogeneous x-expression."""
    from .freealg import cyclic_canon

    images = u_images(n, chart)
    _check_u_letters(f, n)
    d: dict = {}
    for w, v in f.terms.items():
        k = _expand_word(w, images)
        if isinstance(f, TracePoly):
            k = cyclic_canon(k)
        d[k] = d.get(k, 0) + v
    return type(f)(d)


def _check_u_letters(f, n: int) -> None:
    for w in f.terms:
        for c in w:
            if c >= AUX or (c % INV_BASE) >= n - 1:
                raise ValueError(f"letter code {c} is not a u-variable for n={n}")


def affine_partials(f: TracePoly, n: int, chart: int | None = None) -> list[NcPoly]:
    """x-partials of a function written in affine coordinates u_m = x_c^-1 x_{i_m}.

    d f/d x_{i_m} = (d f/d u_m) x_c^-1 and
    d f/d x_c     = -sum_m x_c^-1 x_{i_m} (d f/d u_m) x_c^-1,
    with every u inside the results expanded into x-letters.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    chart = n - 1 if chart is None else chart
    _check_u_letters(f, n)
    cvars = chart_vars(n, chart)
    cinv = NcPoly({(inverse(chart),): 1.0})
    out = [NcPoly({}) for _ in range(n)]
    acc_c = NcPoly({})
    for m, i in enumerate(cvars):
        du = expand_u(cyclic_diff(f, m), n, chart)
        if du.is_zero():
            continue
        out[i] = poly_mul(du, cinv)
        left = NcPoly({(inverse(chart), i): 1.0})
        acc_c = acc_c - poly_mul(poly_mul(left, du), cinv)
    out[chart] = acc_c
    return out
