"""Evaluation of trace polynomials and brackets on tuples of N x N complex matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .freealg import AUX, INV_BASE, NcPoly, TracePoly, necklaces
from .nccalc import cyclic_diff
from .polyvec import Bivector, as_bivector, biv_apply, jacobiator, jacobiator_terms

COND_BOUND = 1e8


class SingularPointError(ValueError):
    """A Laurent letter needs the inverse of an ill-conditioned matrix."""


@dataclass(frozen=True, eq=False)
class MatPoint:
    """One matrix per variable; inverses are computed on demand and screened by condition number."""

    mats: np.ndarray
    cond_bound: float = COND_BOUND
    _inv: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        mats = np.asarray(self.mats, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"expected an array of square matrices, got shape {mats.shape}")
        object.__setattr__(self, "mats", mats)

    @classmethod
    def random(cls, n_vars: int, N: int, rng: np.random.Generator, **kw) -> "MatPoint":
        z = rng.standard_normal((n_vars, N, N)) + 1j * rng.standard_normal((n_vars, N, N))
        return cls(z / np.sqrt(2), **kw)

    @property
    def n_vars(self) -> int:
        return self.mats.shape[0]

    @property
    def N(self) -> int:
        return self.mats.shape[1]

    def inverse(self, i: int) -> np.ndarray:
        inv = self._inv.get(i)
        if inv is None:
            m = self.mats[i]
            cond = np.linalg.cond(m)
            if not np.isfinite(cond) or cond > self.cond_bound:
                raise SingularPointError(f"matrix {i} has condition number {cond:.3g} > {self.cond_bound:.3g}")
            inv = np.linalg.solve(m, np.eye(self.N))
            self._inv[i] = inv
        return inv

    def letter(self, c: int) -> np.ndarray:
        if c >= AUX:
            raise ValueError("the auxiliary letter has no matrix value")
        i = c % INV_BASE
        if i >= self.n_vars:
            raise ValueError(f"letter for variable {i} but the point has {self.n_vars} matrices")
        return self.inverse(i) if c >= INV_BASE else self.mats[i]

    def conjugate(self, g: np.ndarray) -> "MatPoint":
        ginv = np.linalg.inv(g)
        return MatPoint(np.einsum("ab,vbc,cd->vad", g, self.mats, ginv), self.cond_bound)


def eval_word(w, pt: MatPoint) -> np.ndarray:
    out = np.eye(pt.N, dtype=complex)
    for c in w:
        out = out @ pt.letter(c)
    return out


def eval_nc(p: NcPoly, pt: MatPoint) -> np.ndarray:
    out = np.zeros((pt.N, pt.N), dtype=complex)
    for w, v in p.terms.items():
        out += v * eval_word(w, pt)
    return out


def eval_trace_poly(f: TracePoly, pt: MatPoint) -> complex:
    return complex(sum(v * np.trace(eval_word(w, pt)) for w, v in f.terms.items()))


def trace_magnitude(f: TracePoly, pt: MatPoint) -> float:
    """Largest single-term contribution |c tr(w)|; the scale used for relative residuals."""
    return max((abs(v * np.trace(eval_word(w, pt))) for w, v in f.terms.items()), default=0.0)


def bracket_value(B, f: TracePoly, g: TracePoly, pt: MatPoint) -> complex:
    """Evaluate the symbolic bracket {f, g} at the point."""
    return eval_trace_poly(biv_apply(B, f, g), pt)


def bracket_value_direct(B, f: TracePoly, g: TracePoly, pt: MatPoint) -> complex:
    """Substitute matrices into the partials and theta before tracing:
    sum_{i,j} sum_{b (x) c} coeff tr(df_i b dg_j c)."""
    B = as_bivector(B)
    df = [eval_nc(cyclic_diff(f, i), pt) for i in range(B.n)]
    dg = [eval_nc(cyclic_diff(g, j), pt) for j in range(B.n)]
    total = 0j
    for (i, j), T in B.theta.items():
        for (b, c), v in T.terms.items():
            total += v * np.trace(df[i] @ eval_word(b, pt) @ dg[j] @ eval_word(c, pt))
    return complex(total)


def jacobi_matrix_test(B, N: int, samples: int = 100, degree: int = 3, seed: int = 0) -> float:
    """Max over random points and random monomial triples of |J(pt)| / (largest intermediate term).

    One distinct triple of trace monomials of degree <= `degree` is drawn per sample.
    """
    B = as_bivector(B)
    rng = np.random.default_rng(seed)
    monos = [TracePoly({w: 1.0}, canonical=True) for w in necklaces(B.n, degree)]
    if len(monos) < 3:
        raise ValueError("not enough trace monomials for a triple")
    cache: dict = {}
    worst = 0.0
    for _ in range(samples):
        pt = MatPoint.random(B.n, N, rng)
        idx = tuple(sorted(rng.choice(len(monos), size=3, replace=False)))
        if idx not in cache:
            cache[idx] = jacobiator_terms(B, *(monos[a] for a in idx))
        terms = cache[idx]
        J = sum(eval_trace_poly(t, pt) for t in terms)
        scale = max(trace_magnitude(t, pt) for t in terms)
        if scale > 0:
            worst = max(worst, abs(J) / scale)
    return worst


def jacobi_value(B, f, g, h, pt: MatPoint) -> complex:
    return eval_trace_poly(jacobiator(B, f, g, h), pt)


# ------------------------------------------------------- N = 1 reduction


def comm_chart_bracket(cb, chart: int | None = None):
    """Commutative chart bracket {u_a, u_b} as a function of the scalar point u.

    With u_a = x_{i_a}/x_c and x_c = 1:
        {u_a, u_b} = P_{i_a i_b} - u_b P_{i_a c} - u_a P_{c i_b}
    where P = {x, x} of the commutative bracket `cb` evaluated at x = (u, 1).
    """
    n = cb.n
    c = n - 1 if chart is None else chart
    vars_ = [i for i in range(n) if i != c]

    def P(i, j, x):
        return sum(cb.b[i, j, a, b] * x[a] * x[b] for a in range(n) for b in range(a, n))

    def bracket(u):
        x = np.ones(n, dtype=complex)
        for m, i in enumerate(vars_):
            x[i] = u[m]
        out = np.zeros((n - 1, n - 1), dtype=complex)
        for a, ia in enumerate(vars_):
            for b, ib in enumerate(vars_):
                out[a, b] = P(ia, ib, x) - u[b] * P(ia, c, x) - u[a] * P(c, ib, x)
        return out

    return bracket


def comm_bracket_value(cb, f: TracePoly, g: TracePoly, u, chart: int | None = None) -> complex:
    """{f, g} for the commutative chart bracket at the scalar point u (f, g in u-variables)."""
    u = np.asarray(u, dtype=complex)
    pt = MatPoint(u.reshape(-1, 1, 1))
    m = len(u)
    df = [eval_trace_poly(TracePoly(cyclic_diff(f, a).terms), pt) for a in range(m)]
    dg = [eval_trace_poly(TracePoly(cyclic_diff(g, b).terms), pt) for b in range(m)]
    br = comm_chart_bracket(cb, chart)(u)
    return complex(sum(df[a] * dg[b] * br[a, b] for a in range(m) for b in range(m)))


@dataclass(frozen=True)
class CubicFit:
    """{u_0, u_1} = alpha (u_0^3 + u_1^3 + 1) + beta u_0 u_1 at N = 1, with t = beta / (3 alpha)."""

    alpha: complex
    beta: complex
    t: complex
    residual: float


def cubic_affine_fit(B: Bivector, samples: int = 30, seed: int = 0) -> CubicFit:
    """Fit the N = 1 bracket of tr(u_0), tr(u_1) to the cubic pattern on random scalar points."""
    B = as_bivector(B)
    if B.n != 2:
        raise ValueError("the cubic pattern applies to brackets on two affine variables")
    rng = np.random.default_rng(seed)
    f = TracePoly({(0,): 1.0}, canonical=True)
    g = TracePoly({(1,): 1.0}, canonical=True)
    br = biv_apply(B, f, g)
    rows, rhs = [], []
    for _ in range(samples):
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        pt = MatPoint(u.reshape(2, 1, 1))
        rows.append([u[0] ** 3 + u[1] ** 3 + 1, u[0] * u[1]])
        rhs.append(eval_trace_poly(br, pt))
    M, y = np.array(rows), np.array(rhs)
    (alpha, beta), *_ = np.linalg.lstsq(M, y, rcond=None)
    res = float(np.abs(M @ np.array([alpha, beta]) - y).max() / max(np.abs(y).max(), 1e-300))
    t = beta / (3 * alpha) if alpha != 0 else complex("nan")
    return CubicFit(complex(alpha), complex(beta), complex(t), res)
