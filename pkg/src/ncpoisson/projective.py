"""Descent of homogeneous quadratic bivectors to affine charts of noncommutative CP^{n-1}."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .freealg import EMPTY, NcPoly, Tensor, TracePoly, inverse, necklaces, substitute
from .nccalc import affine_partials, chart_vars, expand_u
from .polyvec import Bivector, RTensor, as_bivector, biv_apply, jacobiator, random_trace_poly

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AffineBracket(Bivector):
    """Bracket on C<u_0..u_{n_total-2}> with u_m = x_chart^-1 x_{vars[m]}.

    ``source`` keeps the homogeneous RTensor it was descended from, if any.
    """

    n_total: int = 0
    chart: int = -1
    source: RTensor | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.n_total != self.n + 1:
            raise ValueError(f"affine bracket on {self.n} u-variables needs n_total={self.n + 1}")
        if self.chart == -1:
            object.__setattr__(self, "chart", self.n_total - 1)
        chart_vars(self.n_total, self.chart)

    def scale(self, s: complex) -> "AffineBracket":
        return AffineBracket(self.n, {k: v.scale(s) for k, v in self.theta.items()},
                             n_total=self.n_total, chart=self.chart, source=None)

    def with_theta(self, theta: dict) -> "AffineBracket":
        return AffineBracket(self.n, theta, n_total=self.n_total, chart=self.chart, source=None)


def descend(r: RTensor, chart: int | None = None) -> AffineBracket:
    """Rewrite tr(sum r x_a df_i x_b dg_j) in the coordinates u = x_chart^-1 x.

    With u_chart = 1:
        theta_pq = sum_{a,b}  r[i,j,a,b]   u_b (x) u_a
                            - r[c,j,a,b]   u_b (x) u_a u_p
                            - r[i,c,a,b]   u_b u_q (x) u_a
                            + r[c,c,a,b]   u_b u_q (x) u_a u_p
    where i, j are the x-indices of u_p, u_q.
    """
    n = r.n
    if n < 2:
        raise ValueError("descent needs n >= 2")
    c = n - 1 if chart is None else chart
    cv = chart_vars(n, c)
    m_of = {x_idx: m for m, x_idx in enumerate(cv)}

    def U(a):
        return EMPTY if a == c else (m_of[a],)

    R = r.r
    theta = {}
    for p, i in enumerate(cv):
        for q, j in enumerate(cv):
            d: dict = {}
            for a in range(n):
                for b in range(n):
                    ua, ub = U(a), U(b)
                    for coef, left, right in (
                        (R[i, j, a, b], ub, ua),
                        (-R[c, j, a, b], ub, ua + (p,)),
                        (-R[i, c, a, b], ub + (q,), ua),
                        (R[c, c, a, b], ub + (q,), ua + (p,)),
                    ):
                        if coef != 0:
                            k = (left, right)
                            d[k] = d.get(k, 0) + coef
            if d:
                theta[(p, q)] = Tensor(dict(sorted(d.items())))  # fixed order keeps sums reproducible
    return AffineBracket(n - 1, theta, n_total=n, chart=c, source=r)


def chart_transform(B: AffineBracket, new_chart: int) -> AffineBracket:
    """Re-descend the stored homogeneous tensor in another chart."""
    if B.source is None:
        raise ValueError("chart_transform needs a bracket produced by descend()")
    chart_vars(B.n_total, new_chart)
    if new_chart == B.chart:
        return B
    return descend(B.source, new_chart)


def chart_substitution(n: int, src_chart: int, dst_chart: int) -> dict[int, NcPoly]:
    """Letter images sending chart-`src_chart` u-variables to chart-`dst_chart` ones.

    u_{i,src} = u_{src,dst}^-1 u_{i,dst}, with u_{dst,dst} = 1.
    """
    src_vars = chart_vars(n, src_chart)
    dst_index = {x_idx: m for m, x_idx in enumerate(chart_vars(n, dst_chart))}
    s = dst_index[src_chart]
    images = {}
    for m, i in enumerate(src_vars):
        if i == dst_chart:
            w = (inverse(s),)
        else:
            w = (inverse(s), dst_index[i])
        images[m] = NcPoly({w: 1.0})
        inv_w = tuple(inverse(ch) for ch in reversed(w))
        images[inverse(m)] = NcPoly({inv_w: 1.0})
    return images


def monomial_battery(nvars: int, degree: int) -> list[TracePoly]:
    return [TracePoly({w: 1.0}, canonical=True) for w in necklaces(nvars, degree)]


def biv_equiv(B1, B2, degree: int = 4, n_random: int = 100, seed: int = 0,
              tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Semantic equality: compare brackets on all monomial pairs up to `degree` and random pairs.

    Returns (equivalent, max coefficient defect).
    """
    B1, B2 = as_bivector(B1), as_bivector(B2)
    if B1.n != B2.n:
        raise ValueError(f"variable count mismatch: {B1.n} vs {B2.n}")
    monos = monomial_battery(B1.n, degree)
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations_with_replacement(monos, 2))
    pairs += [(random_trace_poly(rng, B1.n, degree + 2), random_trace_poly(rng, B1.n, degree + 2))
              for _ in range(n_random)]
    defect = 0.0
    for f, g in pairs:
        d = biv_apply(B1, f, g) - biv_apply(B2, f, g)
        defect = max(defect, d.max_abs())
        if f is not g:
            d = biv_apply(B1, g, f) - biv_apply(B2, g, f)
            defect = max(defect, d.max_abs())
    return defect <= tol, defect


class _MemoBracket:
    """Bracket evaluation with per-monomial memoisation of the second slot."""

    def __init__(self, B: Bivector):
        self.B = B
        self.memo: dict = {}

    def mono(self, w, v) -> dict:
        key = (w, v)
        out = self.memo.get(key)
        if out is None:
            out = biv_apply(self.B, TracePoly({w: 1.0}, canonical=True),
                            TracePoly({v: 1.0}, canonical=True)).terms
            self.memo[key] = out
        return out

    def __call__(self, f: TracePoly, g: TracePoly) -> TracePoly:
        d: dict = {}
        for w, a in f.terms.items():
            for v, b in g.terms.items():
                ab = a * b
                for k, c in self.mono(w, v).items():
                    d[k] = d.get(k, 0) + ab * c
        return TracePoly(d, canonical=True)


def jacobi_battery(B, functions: list[TracePoly], extra_triples=()) -> tuple[float, list]:
    """Max Jacobiator coefficient over all distinct triples of `functions` plus `extra_triples`.

    Pair brackets are computed once; the outer brackets are memoised per monomial pair
    and the memo is cleared per outer argument to bound memory.
    """
    B = as_bivector(B)
    m = len(functions)
    pair: dict = {}
    for a, b in itertools.combinations(range(m), 2):
        pair[(a, b)] = biv_apply(B, functions[a], functions[b])

    def P(a, b):
        return pair[(a, b)] if a < b else -pair[(b, a)]

    # outer[(a, b), c] = {{f_a, f_b}, f_c}; accumulate per triple
    triples = list(itertools.combinations(range(m), 3))
    acc = {t: {} for t in triples}
    for c in range(m):
        ev = _MemoBracket(B)
        gc = functions[c]
        for t in triples:
            if c not in t:
                continue
            i, j, k = t
            # cyclic term whose outer argument is f_c
            if c == k:
                inner = P(i, j)
            elif c == i:
                inner = P(j, k)
            else:
                inner = P(k, i)
            out = acc[t]
            for key, val in ev(inner, gc).items():
                out[key] = out.get(key, 0) + val
    worst = 0.0
    details = []
    for t in triples:
        res = TracePoly(acc[t], canonical=True).max_abs()
        details.append((t, res))
        worst = max(worst, res)
    for f, g, h in extra_triples:
        res = jacobiator(B, f, g, h).max_abs()
        details.append(((f, g, h), res))
        worst = max(worst, res)
    return worst, details


def jacobi_affine(B, degree: int = 3, n_random: int = 50, seed: int = 0) -> float:
    """Max coefficient of the Jacobiator over monomial triples of degree <= `degree`
    (distinct triples; the Jacobiator is alternating) plus random triples of degree <= degree+2."""
    B = as_bivector(B)
    monos = monomial_battery(B.n, degree)
    rng = np.random.default_rng(seed)
    extra = [tuple(random_trace_poly(rng, B.n, degree + 2, n_terms=2) for _ in range(3))
             for _ in range(n_random)]
    worst, _ = jacobi_battery(B, monos, extra)
    return worst


def homogeneous_battery(n: int, degree: int, chart: int | None = None) -> list[TracePoly]:
    """Trace monomials in u of degree <= `degree`, expanded into homogeneous x-expressions."""
    return [expand_u(f, n, chart) for f in monomial_battery(n - 1, degree)]


def jacobi_homogeneous(r: RTensor, degree: int = 2, chart: int | None = None,
                       functions: list[TracePoly] | None = None) -> float:
    """Jacobiator of the homogeneous bivector evaluated directly in the Laurent x-algebra.

    Arguments are homogeneous (u-monomials expanded via u_m = x_c^-1 x_m), so the
    Euler relations hold automatically; the chart bracket is never built.
    """
    if functions is None:
        functions = homogeneous_battery(r.n, degree, chart)
    worst, _ = jacobi_battery(r.bivector, functions)
    return worst


def descent_defect(r: RTensor, f: TracePoly, g: TracePoly, chart: int | None = None) -> float:
    """|expand(chart bracket(f, g)) - homogeneous bracket(expand f, expand g)|, max coefficient."""
    A = descend(r, chart)
    lhs = expand_u(biv_apply(A, f, g), r.n, A.chart)
    rhs = biv_apply(r, expand_u(f, r.n, A.chart), expand_u(g, r.n, A.chart))
    return (lhs - rhs).max_abs()


def chart_consistency(B: AffineBracket, other_chart: int, f: TracePoly, g: TracePoly) -> float:
    """Compare the brackets of two charts on a pair of functions written in `other_chart`.

    The pair and the other chart's bracket are pushed through the substitution
    u_{i,other} = u_{other,chart}^-1 u_{i,chart} and compared with B's bracket there.
    """
    C = chart_transform(B, other_chart)
    images = chart_substitution(B.n_total, other_chart, B.chart)
    lhs = substitute(biv_apply(C, f, g), images)
    rhs = biv_apply(B, substitute(f, images), substitute(g, images))
    return (lhs - rhs).max_abs()


def euler_defect(f: TracePoly, n: int, chart: int | None = None) -> float:
    """max of |sum x_i df/dx_i| and |sum df/dx_i x_i| for f given in u-variables."""
    parts = affine_partials(f, n, chart)
    left = NcPoly({})
    right = NcPoly({})
    for i, p in enumerate(parts):
        xi = NcPoly.gen(i)
        left = left + xi * p
        right = right + p * xi
    return max(left.max_abs(), right.max_abs())
