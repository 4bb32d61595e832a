"""Elliptic coefficient matrix, the quadratic bivector built from it, and its commutative shadow."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .freealg import Tensor, TracePoly, generator_index, is_inverse_letter
from .polyvec import RTensor, as_bivector, biv_apply
from .projective import AffineBracket, biv_equiv, monomial_battery
from .theta import ThetaCtx

DEFAULT_TAU = 0.3 + 1.1j
DENOM_TOL = 1e-12


@dataclass(frozen=True)
class EllipticParams:
    n: int
    k: int
    tau: complex = DEFAULT_TAU
    tol: float = 1e-10
    truncation: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not 1 <= self.k < self.n:
            raise ValueError(f"k must satisfy 1 <= k < n, got k={self.k}, n={self.n}")
        if math.gcd(self.n, self.k) != 1:
            raise ValueError(f"n and k must be coprime, got n={self.n}, k={self.k}")
        tau = complex(self.tau)
        if tau.imag <= 0:
            raise ValueError(f"Im(tau) must be positive, got tau={tau}")
        object.__setattr__(self, "tau", tau)

    @property
    def ctx(self) -> ThetaCtx:
        return ThetaCtx(self.tau, self.n, self.truncation)


# ------------------------------------------------------------ coefficients


def coefficient_matrix(ctx: ThetaCtx, k: int) -> np.ndarray:
    """c[i, r] for (i, r) in (Z/nZ)^2 from the theta constants cached on `ctx`."""
    n = ctx.n
    th, dth = ctx.th, ctx.dth

    def ratio(num, den, where):
        if abs(den) < DENOM_TOL * max(1.0, abs(num)):
            raise ZeroDivisionError(f"near-zero theta denominator at (i, r) = {where}")
        return num / den

    c = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for r in range(n):
            if i == 0 and r == 0:
                continue
            if r == 0:
                c[i, r] = ratio(dth(i), th(i), (i, r))
            elif r == i:
                c[i, r] = ratio(dth(k * i), th(k * i), (i, r))
            else:
                c[i, r] = ratio(dth(0) * th(i + r * (k - 1)), th(k * r) * th(i - r), (i, r))
    return c


def c_coeffs(params: EllipticParams) -> np.ndarray:
    return coefficient_matrix(params.ctx, params.k)


def antisymmetry_defect(c: np.ndarray) -> float:
    n = c.shape[0]
    return max(abs(c[(-i) % n, (-r) % n] + c[i, r]) for i in range(n) for r in range(n))


def r_tensor_from_c(c: np.ndarray) -> RTensor:
    """r[i, j, a, b] = c[i-j, i-b] when a + b = i + j (mod n).

    In the product form this is tr(c_{i-j, r} df_i x_{i-r} dg_j x_{j+r}).
    """
    n = c.shape[0]
    r = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            for b in range(n):
                a = (i + j - b) % n
                r[i, j, a, b] = c[(i - j) % n, (i - b) % n]
    return RTensor(r)


def build_r_tensor(params: EllipticParams) -> RTensor:
    return r_tensor_from_c(c_coeffs(params))


# ------------------------------------------------------ commutative brackets


@dataclass(frozen=True, eq=False)
class CommBracket:
    """{x_i, x_j} = sum_{a <= b} b[i, j, a, b] x_a x_b in the commutative polynomial ring."""

    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=complex)
        n = b.shape[0]
        if b.shape != (n, n, n, n):
            raise ValueError(f"CommBracket needs shape (n,n,n,n), got {b.shape}")
        lower = np.tril_indices(n, -1)
        if np.any(b[:, :, lower[0], lower[1]] != 0):
            raise ValueError("only entries with a <= b may be nonzero")
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def poly(self, i: int, j: int) -> dict:
        """{x_i, x_j} as {exponent tuple: coefficient}."""
        out = {}
        n = self.n
        for a in range(n):
            for b in range(a, n):
                v = self.b[i, j, a, b]
                if v != 0:
                    e = [0] * n
                    e[a] += 1
                    e[b] += 1
                    out[tuple(e)] = out.get(tuple(e), 0) + v
        return out

    def antisymmetry_defect(self) -> float:
        return float(np.abs(self.b + self.b.transpose(1, 0, 2, 3)).max(initial=0.0))

    def max_abs(self) -> float:
        return float(np.abs(self.b).max(initial=0.0))


def _sorted_add(b: np.ndarray, i: int, j: int, a: int, c: int, v: complex) -> None:
    lo, hi = (a, c) if a <= c else (c, a)
    b[i, j, lo, hi] += v


def q_commutative(params: EllipticParams) -> CommBracket:
    """Quadratic Poisson brackets of q_{n,k}(tau) from the theta constants.

    With d = j - i:
        {x_i, x_j} = (th'_d/th_d + th'_{kd}/th_{kd}) x_i x_j
                     + sum_{r != 0, d} th'_0 th_{d + r(k-1)} / (th_{kr} th_{d-r}) x_{j-r} x_{i+r}
    The value given by this formula for the pair (i, j) is stored as {x_j, x_i}: with the
    trace pairing tr(df . theta(dg)) used here, that is the orientation abelianize()
    of the nonabelian bivector reproduces.
    """
    ctx, k, n = params.ctx, params.k, params.n
    th, dth = ctx.th, ctx.dth
    b = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = (j - i) % n
            _sorted_add(b, j, i, i, j, dth(d) / th(d) + dth(k * d) / th(k * d))
            for r in range(1, n):
                if r == d:
                    continue
                v = dth(0) * th(d + r * (k - 1)) / (th(k * r) * th(d - r))
                _sorted_add(b, j, i, (j - r) % n, (i + r) % n, v)
    return CommBracket(b)


def abelianize(B) -> CommBracket:
    """Commutative image of a quadratic bivector: {x_i, x_j} = tr(theta_ij(1)) with letters sorted."""
    if isinstance(B, RTensor):
        n = B.n
        b = np.zeros((n, n, n, n), dtype=complex)
        for i, j, a, c in zip(*np.nonzero(B.r)):
            _sorted_add(b, i, j, a, c, B.r[i, j, a, c])
        return CommBracket(b)
    B = as_bivector(B)
    n = B.n
    b = np.zeros((n, n, n, n), dtype=complex)
    for (i, j), T in B.theta.items():
        for (left, right), v in T.terms.items():
            letters = left + right
            for ch in letters:
                if is_inverse_letter(ch) or generator_index(ch) is None:
                    raise ValueError(f"abelianization needs polynomial entries, found letter {ch}")
            if len(letters) != 2:
                raise ValueError(f"abelianization expects quadratic entries, found degree {len(letters)}")
            _sorted_add(b, i, j, letters[0], letters[1], v)
    return CommBracket(b)


# ----------------------------------------- commutative Jacobi (symbolic)


def _cpoly_add(acc: dict, p: dict, s: complex = 1.0) -> None:
    for e, v in p.items():
        acc[e] = acc.get(e, 0) + s * v


def _cpoly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for e1, v1 in p.items():
        for e2, v2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + v1 * v2
    return out


def _cpoly_diff(p: dict, i: int) -> dict:
    out: dict = {}
    for e, v in p.items():
        if e[i]:
            f = list(e)
            f[i] -= 1
            out[tuple(f)] = out.get(tuple(f), 0) + v * e[i]
    return out


def comm_bracket(cb: CommBracket, f: dict, g: dict) -> dict:
    """{f, g} = sum_{i,j} {x_i, x_j} df/dx_i dg/dx_j for commutative polynomials as exponent dicts."""
    n = cb.n
    df = [_cpoly_diff(f, i) for i in range(n)]
    dg = [_cpoly_diff(g, j) for j in range(n)]
    out: dict = {}
    for i in range(n):
        if not df[i]:
            continue
        for j in range(n):
            if not dg[j] or i == j:
                continue
            _cpoly_add(out, _cpoly_mul(cb.poly(i, j), _cpoly_mul(df[i], dg[j])))
    return out


def comm_jacobiator(cb: CommBracket, f: dict, g: dict, h: dict) -> dict:
    out: dict = {}
    _cpoly_add(out, comm_bracket(cb, comm_bracket(cb, f, g), h))
    _cpoly_add(out, comm_bracket(cb, comm_bracket(cb, g, h), f))
    _cpoly_add(out, comm_bracket(cb, comm_bracket(cb, h, f), g))
    return out


def comm_monomials(n: int, degree: int) -> list[dict]:
    out = []
    for combo in itertools.combinations_with_replacement(range(n), degree):
        e = [0] * n
        for a in combo:
            e[a] += 1
        out.append({tuple(e): 1.0})
    return out


def comm_jacobi_residual(cb: CommBracket, degree: int = 3, max_triples: int | None = None,
                         seed: int = 0) -> float:
    """Max coefficient of the Jacobiator over distinct triples of degree-`degree` monomials.

    With `max_triples` set, a seeded random subset of the triples is used.
    """
    monos = comm_monomials(cb.n, degree)
    triples = list(itertools.combinations(range(len(monos)), 3))
    if max_triples is not None and len(triples) > max_triples:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(triples), size=max_triples, replace=False)
        triples = [triples[p] for p in sorted(pick)]
    worst = 0.0
    for a, b, c in triples:
        J = comm_jacobiator(cb, monos[a], monos[b], monos[c])
        worst = max(worst, max((abs(v) for v in J.values()), default=0.0))
    return worst


# ------------------------------------------------------------- (jac2)


@dataclass(frozen=True, eq=False)
class Jac2Certificate:
    p: np.ndarray
    q: np.ndarray
    residual: float
    lhs_scale: float = field(default=0.0)


def _jac2_lhs(c: np.ndarray, A: int, B: int, r: int, s: int) -> complex:
    n = c.shape[0]

    def C(i, j):
        return c[i % n, j % n]

    G = -A - B
    return C(B - r, -r - s) * C(A, -r) + C(G - s, r) * C(B, -s) + C(A + r + s, s) * C(G, r + s)


def _jac2_rhs_terms(n: int, A: int, B: int, r: int, s: int):
    """(kind, row, col) for the delta terms that survive at this index tuple."""
    G = -A - B
    out = []
    if r % n == 0:
        out.append(("p", B % n, (-r - s) % n))
    if s % n == 0:
        out.append(("p", G % n, r % n))
    if (-r - s) % n == 0:
        out.append(("p", A % n, s % n))
    if (G - r - s) % n == 0:
        out.append(("q", B % n, (-G + r) % n))
    if (A + r) % n == 0:
        out.append(("q", G % n, (-A + s) % n))
    if (B + s) % n == 0:
        out.append(("q", A % n, (-B - r - s) % n))
    return out


def jac2_system(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Linear system M [p; q] = lhs over index tuples (alpha-beta, beta-gamma, r, s)."""
    c = np.asarray(c, dtype=complex)
    n = c.shape[0]
    N = n * n
    rows, rhs = [], []
    for A, B, r, s in itertools.product(range(n), repeat=4):
        row = np.zeros(2 * N, dtype=complex)
        for kind, a, b in _jac2_rhs_terms(n, A, B, r, s):
            row[(N if kind == "q" else 0) + a * n + b] += 1.0
        rows.append(row)
        rhs.append(_jac2_lhs(c, A, B, r, s))
    return np.array(rows), np.array(rhs)


def jac2_residual(c: np.ndarray, p: np.ndarray, q: np.ndarray) -> float:
    """Max violation of (jac2), evaluated index tuple by index tuple."""
    c = np.asarray(c, dtype=complex)
    n = c.shape[0]
    worst = 0.0
    for A, B, r, s in itertools.product(range(n), repeat=4):
        right = sum((p if kind == "p" else q)[a, b] for kind, a, b in _jac2_rhs_terms(n, A, B, r, s))
        worst = max(worst, abs(_jac2_lhs(c, A, B, r, s) - right))
    return float(worst)


def jac2_certificate(c: np.ndarray) -> Jac2Certificate:
    """Least-squares (SVD) solve for p, q; the residual is re-evaluated independently."""
    c = np.asarray(c, dtype=complex)
    n = c.shape[0]
    if c.shape != (n, n):
        raise ValueError(f"coefficient matrix must be square, got {c.shape}")
    M, lhs = jac2_system(c)
    sol, *_ = np.linalg.lstsq(M, lhs, rcond=None)
    p = sol[: n * n].reshape(n, n)
    q = sol[n * n:].reshape(n, n)
    return Jac2Certificate(p, q, jac2_residual(c, p, q), float(np.abs(lhs).max(initial=0.0)))


# ---------------------------------------------------- continued fractions


def tridiag_det(seq) -> int:
    """Determinant of the tridiagonal matrix with `seq` on the diagonal and -1 beside it."""
    prev, cur = 1, 1
    first = True
    for m in seq:
        if first:
            prev, cur = 1, m
            first = False
        else:
            prev, cur = cur, m * cur - prev
    return cur


def contfrac(n: int, k: int) -> list[int]:
    """n/k = n_1 - 1/(n_2 - 1/(... - 1/n_p)) with every n_i >= 2."""
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got n={n}, k={k}")
    if math.gcd(n, k) != 1:
        raise ValueError(f"n and k must be coprime, got n={n}, k={k}")
    out = []
    a, b = n, k
    while b:
        m = -(-a // b)
        out.append(m)
        a, b = b, m * b - a
    if tridiag_det(out) != n or tridiag_det(out[1:]) != k:
        raise ArithmeticError(f"continued fraction {out} fails the determinant check")
    return out


# ------------------------------------------------------- n = 3 fixtures


def _t(terms) -> Tensor:
    return Tensor({(tuple(b), tuple(c)): v for b, c, v in terms})


def example_fixture(k: int, t: complex, literal: bool = False) -> AffineBracket:
    """Affine grids on CP^2 for k = 1, 2 with u_1 -> index 0, u_2 -> index 1.

    For k = 2 the printed theta_21 carries -t/2 u_1 (x) u_2; that grid is not antisymmetric
    and violates Jacobi for t != 0.  The default flips this one sign, which makes the grid
    equivalent to the descended x-form; ``literal=True`` returns the grid as printed.
    """
    u1, u2 = 0, 1
    one = ()
    if k == 1:
        theta = {
            (0, 0): _t([((u1, u2), (u2,), -1), ((u2,), (u1, u2), 1)]),
            (0, 1): _t([((u1, u1), (u1,), 1), ((u2,), (u2, u2), 1), ((u2,), (u1,), t / 4),
                        ((u1,), (u2,), t / 4), (one, one, 1)]),
            (1, 0): _t([((u1,), (u1, u1), -1), ((u2, u2), (u2,), -1), ((u2,), (u1,), -t / 4),
                        ((u1,), (u2,), -t / 4), (one, one, -1)]),
            (1, 1): _t([((u2, u1), (u1,), 1), ((u1,), (u2, u1), -1)]),
        }
    elif k == 2:
        theta = {
            (0, 0): _t([((u2, u1), (u1, u1), 1), ((u1, u1), (u2, u1), -1), (one, (u2,), 1),
                        ((u2,), one, -1)]),
            (0, 1): _t([((u2, u2), (u1, u1), 1), ((u1, u2), (u2, u1), -1), ((u1,), (u2,), t / 2),
                        ((u2,), (u1,), -t / 2)]),
            (1, 0): _t([((u2, u1), (u1, u2), 1), ((u1, u1), (u2, u2), -1),
                        ((u1,), (u2,), -t / 2 if literal else t / 2),
                        ((u2,), (u1,), -t / 2)]),
            (1, 1): _t([((u2, u2), (u1, u2), 1), ((u1, u2), (u2, u2), -1), ((u1,), one, 1),
                        (one, (u1,), -1)]),
        }
    else:
        raise ValueError(f"fixtures exist only for k in {{1, 2}}, got k={k}")
    return AffineBracket(2, theta, n_total=3, chart=2)


def example_rtensor(k: int, t: complex) -> RTensor:
    """The homogeneous x-forms on CP^2 written as r-tensors (indices mod 3).

    A term tr(df_P x_A dg_Q x_B) is stored at r[P, Q, B, A].
    """
    r = np.zeros((3, 3, 3, 3), dtype=complex)

    def add(P, A, Q, B, v):
        r[P % 3, Q % 3, B % 3, A % 3] += v

    for i in range(3):
        if k == 1:
            add(i + 1, i + 1, i + 2, i + 2, t / 2)
            add(i + 1, i + 2, i + 2, i + 1, t / 2)
            add(i + 1, i, i + 2, i, 1)
            add(i + 2, i + 1, i + 1, i + 2, -t / 2)
            add(i + 2, i + 2, i + 1, i + 1, -t / 2)
            add(i + 2, i, i + 1, i, -1)
        elif k == 2:
            add(i + 1, i + 1, i + 2, i + 2, t / 2)
            add(i + 1, i + 2, i + 2, i + 1, -t / 2)
            add(i + 2, i + 1, i + 1, i + 2, t / 2)
            add(i + 2, i + 2, i + 1, i + 1, -t / 2)
            add(i, i + 1, i, i + 2, 1)
            add(i, i + 2, i, i + 1, -1)
        else:
            raise ValueError(f"fixtures exist only for k in {{1, 2}}, got k={k}")
    return RTensor(r)


def _eval_vector(B, pairs, keys=None):
    vals: dict = {}
    for idx, (f, g) in enumerate(pairs):
        for w, v in biv_apply(B, f, g).terms.items():
            vals[(idx, w)] = v
    return vals


@dataclass(frozen=True)
class FixtureMatch:
    scale: complex
    t: complex
    fit_residual: float
    defect: float
    equivalent: bool


def match_fixture(B, k: int, fit_degree: int | None = None, check_degree: int = 4,
                  n_random: int = 100, tol: float = 1e-9) -> FixtureMatch:
    """Find (lambda, t*) with B ~ lambda * example_fixture(k, t*), then check equivalence.

    The fixture is affine in t, F(t) = F0 + t F1, so B = lambda F0 + mu F1 is a linear
    least-squares problem over bracket values on monomial pairs; t* = mu / lambda.
    The k = 2 grid at t = 0 vanishes on all pairs of degree <= 3, so its fit uses degree 4.
    """
    if fit_degree is None:
        fit_degree = 3 if k == 1 else 4
    B = as_bivector(B)
    monos = monomial_battery(2, fit_degree)
    pairs = [(f, g) for f in monos for g in monos]
    F0 = example_fixture(k, 0.0)
    F1 = example_fixture(k, 1.0) - F0
    vb, v0, v1 = (_eval_vector(X, pairs) for X in (B, F0, F1))
    keys = sorted(set(vb) | set(v0) | set(v1))
    M = np.array([[v0.get(key, 0), v1.get(key, 0)] for key in keys], dtype=complex)
    y = np.array([vb.get(key, 0) for key in keys], dtype=complex)
    if not np.any(np.abs(M[:, 0]) > 0):
        raise ValueError("fit battery too small: the fixture vanishes on it")
    (lam, mu), *_ = np.linalg.lstsq(M, y, rcond=None)
    fit_res = float(np.abs(M @ np.array([lam, mu]) - y).max(initial=0.0))
    if abs(lam) < 1e-14:
        return FixtureMatch(complex(lam), complex("nan"), fit_res, math.inf, False)
    t_star = mu / lam
    cand = example_fixture(k, t_star).scale(lam)
    ok, defect = biv_equiv(B, cand, degree=check_degree, n_random=n_random, tol=tol)
    return FixtureMatch(complex(lam), complex(t_star), fit_res, defect, ok)


def elliptic_affine(params: EllipticParams, chart: int | None = None) -> AffineBracket:
    from .projective import descend

    return descend(build_r_tensor(params), chart)


def trace_gen(i: int) -> TracePoly:
    return TracePoly({(i,): 1.0}, canonical=True)


__all__ = [
    "EllipticParams", "CommBracket", "Jac2Certificate", "FixtureMatch",
    "coefficient_matrix", "c_coeffs", "antisymmetry_defect", "r_tensor_from_c", "build_r_tensor",
    "q_commutative", "abelianize", "comm_bracket", "comm_jacobiator", "comm_jacobi_residual",
    "jac2_system", "jac2_residual", "jac2_certificate", "tridiag_det", "contfrac",
    "example_fixture", "example_rtensor", "match_fixture", "elliptic_affine", "trace_gen",
]
