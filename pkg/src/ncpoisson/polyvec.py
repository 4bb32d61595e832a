"""Nonabelian vector fields and bivectors acting on trace polynomials."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .freealg import (
    EMPTY,
    NcPoly,
    Tensor,
    TracePoly,
    concat,
    cyclic_canon,
    dilate,
    necklaces,
    trace_product,
)
from .nccalc import cyclic_diff


@dataclass(frozen=True)
class VectorField:
    """Derivation data: coeffs[i] is the image of x_i."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @classmethod
    def euler(cls, n: int) -> "VectorField":
        return cls(tuple(NcPoly.gen(i) for i in range(n)))


@dataclass(frozen=True, eq=False)
class Bivector:
    """Grid of tensors theta[(i, j)] in A (x) A^op; missing entries are zero.

    Evaluates as  mu(f, g) = tr( sum_{i,j} df/dx_i . theta_ij(dg/dx_j) ).
    """

    n: int
    theta: dict
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        clean = {k: v for k, v in self.theta.items() if not v.is_zero()}
        for i, j in clean:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"theta index {(i, j)} out of range for n={self.n}")
        object.__setattr__(self, "theta", clean)

    def entry(self, i: int, j: int) -> Tensor:
        return self.theta.get((i, j), Tensor({}))

    def scale(self, s: complex) -> "Bivector":
        return Bivector(self.n, {k: v.scale(s) for k, v in self.theta.items()})

    def __add__(self, other: "Bivector") -> "Bivector":
        _same_n(self.n, other.n)
        keys = set(self.theta) | set(other.theta)
        return Bivector(self.n, {k: self.entry(*k) + other.entry(*k) for k in keys})

    def __sub__(self, other: "Bivector") -> "Bivector":
        return self + other.scale(-1.0)


@dataclass(frozen=True, eq=False)
class RTensor:
    """Quadratic bivector data r[i, j, a, b]:  mu(f,g) = tr(sum r x_a df/dx_i x_b dg/dx_j)."""

    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=complex)
        n = r.shape[0]
        if r.shape != (n, n, n, n):
            raise ValueError(f"RTensor needs shape (n,n,n,n), got {r.shape}")
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.r.shape[0]

    @cached_property
    def bivector(self) -> Bivector:
        return self.as_bivector()

    def as_bivector(self) -> Bivector:
        """theta_ij = sum_{a,b} r[i,j,a,b] x_b (x) x_a."""
        n = self.n
        theta = {}
        for i in range(n):
            for j in range(n):
                d = {}
                for a in range(n):
                    for b in range(n):
                        v = self.r[i, j, a, b]
                        if v != 0:
                            d[((b,), (a,))] = v
                if d:
                    theta[(i, j)] = Tensor(d)
        return Bivector(n, theta)


def _same_n(a: int, b: int) -> None:
    if a != b:
        raise ValueError(f"generator count mismatch: {a} vs {b}")


def as_bivector(B) -> Bivector:
    if isinstance(B, Bivector):
        return B
    if isinstance(B, RTensor):
        return B.bivector
    raise TypeError(f"expected Bivector or RTensor, got {type(B).__name__}")


# ----------------------------------------------------------- vector fields


def vf_apply(v: VectorField, f: TracePoly) -> TracePoly:
    """nu(f) = tr(sum_i a_i df/dx_i)."""
    d: dict = {}
    for i, a in enumerate(v.coeffs):
        if a.is_zero():
            continue
        for k, c in trace_product(a, cyclic_diff(f, i)).items():
            d[k] = d.get(k, 0) + c
    _check_vars(f, v.n)
    return TracePoly(d, canonical=True)


def _check_vars(f, n: int) -> None:
    for w in f.terms:
        for c in w:
            if c < 10_000 and c >= n:
                raise ValueError(f"x{c} outside generator range n={n}")


def derivation_apply(v: VectorField, p: NcPoly) -> NcPoly:
    """Apply the derivation D with D(x_i) = v.coeffs[i] to a polynomial in x."""
    d: dict = {}
    for w, c in p.terms.items():
        for pos, letter in enumerate(w):
            if letter >= v.n:
                if letter < 10_000:
                    raise ValueError(f"x{letter} outside generator range n={v.n}")
                raise ValueError("derivation_apply supports plain x-words only")
            img = v.coeffs[letter]
            if img.is_zero():
                continue
            pre, post = w[:pos], w[pos + 1:]
            for u, a in img.terms.items():
                k = concat(concat(pre, u), post)
                d[k] = d.get(k, 0) + c * a
    return NcPoly(d)


def vf_commutator(v: VectorField, w: VectorField) -> VectorField:
    """[v, w] with coefficients D_v(w_i) - D_w(v_i)."""
    _same_n(v.n, w.n)
    return VectorField(tuple(
        derivation_apply(v, w.coeffs[i]) - derivation_apply(w, v.coeffs[i]) for i in range(v.n)
    ))


# --------------------------------------------------------------- bivectors


def _partials(f: TracePoly, n: int) -> list[NcPoly]:
    return [cyclic_diff(f, i) for i in range(n)]


def _contract(B: Bivector, dg: list[NcPoly]) -> list[dict]:
    """G_i = sum_j theta_ij(dg_j) as raw dicts."""
    out = [dict() for _ in range(B.n)]
    for (i, j), T in B.theta.items():
        g = dg[j]
        if g.is_zero():
            continue
        acc = out[i]
        for (b, e), t in T.terms.items():
            for w, a in g.terms.items():
                k = concat(concat(b, w), e)
                acc[k] = acc.get(k, 0) + t * a
    return out


def _pair(df: list[NcPoly], G: list[dict]) -> dict:
    d: dict = {}
    for i, p in enumerate(df):
        gi = G[i]
        if p.is_zero() or not gi:
            continue
        for u, a in p.terms.items():
            for w, b in gi.items():
                k = cyclic_canon(concat(u, w))
                d[k] = d.get(k, 0) + a * b
    return d


def biv_apply(B, f: TracePoly, g: TracePoly) -> TracePoly:
    """mu(f, g) = tr(sum_{i,j} df/dx_i . theta_ij(dg/dx_j))."""
    B = as_bivector(B)
    _check_vars(f, B.n)
    _check_vars(g, B.n)
    if f.is_zero() or g.is_zero():
        return TracePoly({})
    d = _pair(_partials(f, B.n), _contract(B, _partials(g, B.n)))
    return TracePoly(d, canonical=True)


def jacobiator(B, f: TracePoly, g: TracePoly, h: TracePoly) -> TracePoly:
    """nu(nu(f,g),h) + nu(nu(g,h),f) + nu(nu(h,f),g)."""
    B = as_bivector(B)
    return (
        biv_apply(B, biv_apply(B, f, g), h)
        + biv_apply(B, biv_apply(B, g, h), f)
        + biv_apply(B, biv_apply(B, h, f), g)
    )


def jacobiator_terms(B, f, g, h) -> list[TracePoly]:
    """The three cyclic terms of the Jacobiator, separately."""
    B = as_bivector(B)
    return [
        biv_apply(B, biv_apply(B, f, g), h),
        biv_apply(B, biv_apply(B, g, h), f),
        biv_apply(B, biv_apply(B, h, f), g),
    ]


def _proof_convention(r: RTensor) -> np.ndarray:
    # R[i, j, i1, j1] multiplies tr(df_i x_i1 dg_j x_j1)
    return r.r.transpose(0, 1, 3, 2)


def jacobi_coefficients(r: RTensor) -> tuple[np.ndarray, np.ndarray]:
    """Index coefficients of the Jacobiator of an antisymmetric quadratic bivector.

    K1[i,i1,j,j1,k,k1] multiplies tr(df_i x_i1 dh_j x_j1 dg_k x_k1) and
    K2[i,i1,j,j1,k,k1] multiplies tr(df_i x_i1 dg_j x_j1 dh_k x_k1).
    """
    R = _proof_convention(r)
    es = np.einsum
    K1 = (es("ajxy,ikaz->ixjykz", R, R)
          + es("akyz,jiax->ixjykz", R, R)
          + es("aizx,kjay->ixjykz", R, R))
    K2 = (es("akyz,ijxa->ixjykz", R, R)
          + es("aizx,jkya->ixjykz", R, R)
          + es("ajxy,kiza->ixjykz", R, R))
    return K1, K2


def jacobiator_rtensor(r: RTensor, f: TracePoly, g: TracePoly, h: TracePoly,
                       coeffs: tuple[np.ndarray, np.ndarray] | None = None) -> TracePoly:
    """Jacobiator from the explicit index formula; no nested brackets are formed.

    Valid for antisymmetric r (the second-derivative terms cancel only then).
    """
    n = r.n
    K1, K2 = coeffs if coeffs is not None else jacobi_coefficients(r)
    df, dg, dh = _partials(f, n), _partials(g, n), _partials(h, n)
    d: dict = {}
    scale = max(np.abs(K1).max(initial=0.0), np.abs(K2).max(initial=0.0))
    cut = 1e-14 * scale
    for K, (P, Q, S) in ((K1, (df, dh, dg)), (K2, (df, dg, dh))):
        for idx in zip(*np.nonzero(np.abs(K) > cut)):
            i, i1, j, j1, k, k1 = (int(t) for t in idx)
            p, q, s = P[i], Q[j], S[k]
            if p.is_zero() or q.is_zero() or s.is_zero():
                continue
            c = K[idx]
            for u, a in p.terms.items():
                ua = u + (i1,)
                for v, b in q.terms.items():
                    uv = concat(concat(ua, v), (j1,))
                    for w, e in s.terms.items():
                        key = cyclic_canon(concat(concat(uv, w), (k1,)))
                        d[key] = d.get(key, 0) + c * a * b * e
    return TracePoly(d, canonical=True)


# ------------------------------------------------------------- Schouten


def _arity(P) -> int:
    if isinstance(P, VectorField):
        return 1
    if isinstance(P, (Bivector, RTensor)):
        return 2
    raise TypeError(f"unsupported polyvector {type(P).__name__}")


def _evaluate(P, args) -> TracePoly:
    if isinstance(P, VectorField):
        return vf_apply(P, args[0])
    return biv_apply(P, args[0], args[1])


def _perm_sign(p) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def schouten_eval(mu, nu, args) -> TracePoly:
    """Schouten bracket [mu, nu] of a p- and a q-vector field, p, q in {1, 2}.

    [mu,nu](a_1..a_{p+q-1}) = sum_s sign(s) mu(nu(a_s1..a_sq), a_s(q+1)..)
                              - (-1)^{(p-1)(q-1)} sum_s sign(s) nu(mu(a_s1..a_sp), a_s(p+1)..)
    """
    p, q = _arity(mu), _arity(nu)
    m = p + q - 1
    if len(args) != m:
        raise ValueError(f"[{p}-vector, {q}-vector] takes {m} arguments, got {len(args)}")
    first = TracePoly({})
    second = TracePoly({})
    for perm in itertools.permutations(range(m)):
        s = _perm_sign(perm)
        a = [args[t] for t in perm]
        first = first + _evaluate(mu, [_evaluate(nu, a[:q])] + a[q:]).scale(s)
        second = second + _evaluate(nu, [_evaluate(mu, a[:p])] + a[p:]).scale(s)
    sign = (-1) ** ((p - 1) * (q - 1))
    return first - second.scale(sign)


# ------------------------------------------------------------ homogeneity


def random_trace_poly(rng: np.random.Generator, n: int, max_degree: int, n_terms: int = 3,
                      integer: bool = False) -> TracePoly:
    d: dict = {}
    for _ in range(n_terms):
        L = int(rng.integers(1, max_degree + 1))
        w = tuple(int(c) for c in rng.integers(0, n, size=L))
        if integer:
            c = complex(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        else:
            c = complex(rng.normal(), rng.normal())
        k = cyclic_canon(w)
        d[k] = d.get(k, 0) + c
    return TracePoly(d, canonical=True)


def is_homogeneous_biv(B, degree: int = 3, n_random: int = 20, seed: int = 0,
                       tol: float = 1e-9) -> tuple[bool, float]:
    """Check nu(f^a, g^a) == nu(f, g)^a on monomial pairs and random pairs.

    Returns (homogeneous, max coefficient defect).
    """
    B = as_bivector(B)
    monos = [TracePoly({w: 1.0}, canonical=True) for w in necklaces(B.n, degree)]
    rng = np.random.default_rng(seed)
    pairs = [(f, g) for f in monos for g in monos]
    pairs += [(random_trace_poly(rng, B.n, degree + 1), random_trace_poly(rng, B.n, degree + 1))
              for _ in range(n_random)]
    defect = 0.0
    for f, g in pairs:
        lhs = biv_apply(B, dilate(f), dilate(g))
        rhs = dilate(biv_apply(B, f, g))
        defect = max(defect, (lhs - rhs).max_abs())
    return defect <= tol, defect


def constant_bivector(n: int, i: int = 0, j: int = 0) -> Bivector:
    return Bivector(n, {(i, j): Tensor({(EMPTY, EMPTY): 1.0})})
