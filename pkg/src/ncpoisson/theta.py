"""Odd theta function, its log-derivative and theta functions with characteristics."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

TWO_PI_I = 2j * math.pi
PI_I = 1j * math.pi

#: Im(tau) below this is rejected as ill-conditioned for plain series summation.
MIN_IM_TAU = 0.05


class LatticePoleError(ZeroDivisionError):
    """rho(z) was requested at (numerically) a zero of theta."""


def default_truncation(tau: complex) -> int:
    return math.ceil(math.sqrt(40.0 / (math.pi * tau.imag))) + 4


@dataclass(frozen=True)
class ThetaCtx:
    """Modular parameter, characteristic modulus and cached theta constants.

    theta_alpha(0) and theta'_alpha(0) for alpha in Z/nZ are computed eagerly.
    """

    tau: complex
    n: int = 1
    M: int | None = None
    th0: np.ndarray = field(init=False, repr=False)
    dth0: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tau = complex(self.tau)
        if tau.imag <= 0:
            raise ValueError(f"Im(tau) must be positive, got tau={tau}")
        if tau.imag < MIN_IM_TAU:
            raise ValueError(f"Im(tau)={tau.imag} < {MIN_IM_TAU}: series too ill-conditioned")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "tau", tau)
        M = self.M
        if M is None:
            env = os.environ.get("NCPOISSON_TRUNCATION")
            M = int(env) if env else default_truncation(tau)
        object.__setattr__(self, "M", int(M))
        vals = [theta_char(self, a, 0.0) for a in range(self.n)]
        object.__setattr__(self, "th0", np.array([v for v, _ in vals]))
        object.__setattr__(self, "dth0", np.array([d for _, d in vals]))

    def with_truncation(self, M: int) -> "ThetaCtx":
        return ThetaCtx(self.tau, self.n, M)

    def th(self, a: int) -> complex:
        return complex(self.th0[a % self.n])

    def dth(self, a: int) -> complex:
        return complex(self.dth0[a % self.n])


def theta_derivatives(ctx: ThetaCtx, z: complex, order: int = 1) -> list[complex]:
    """[theta(z), theta'(z), ..., theta^(order)(z)] by termwise differentiation.

    theta(z) = sum_a (-1)^a exp(2 pi i (a z + a(a-1) tau / 2)).
    """
    z = complex(z)
    tau = ctx.tau
    shift = math.ceil(abs(z.imag) / tau.imag)
    M = ctx.M + shift
    a = np.arange(-M, M + 1)
    terms = np.where(a % 2 == 0, 1.0, -1.0) * np.exp(TWO_PI_I * (a * z + a * (a - 1) / 2 * tau))
    out = [complex(terms.sum())]
    fac = TWO_PI_I * a
    for _ in range(order):
        terms = terms * fac
        out.append(complex(terms.sum()))
    return out


def theta(ctx: ThetaCtx, z: complex) -> tuple[complex, complex]:
    v, d = theta_derivatives(ctx, z, 1)
    return v, d


def rho(ctx: ThetaCtx, z: complex, tol: float = 1e-13) -> complex:
    """theta'(z)/theta(z) - pi i."""
    v, d = theta(ctx, z)
    if abs(v) <= tol * max(1.0, abs(d)):
        raise LatticePoleError(f"rho has a pole at z={z} (|theta(z)|={abs(v):.2e})")
    return d / v - PI_I


def rho_prime(ctx: ThetaCtx, z: complex) -> complex:
    v, d, dd = theta_derivatives(ctx, z, 2)
    if v == 0:
        raise LatticePoleError(f"rho' has a pole at z={z}")
    return (dd * v - d * d) / (v * v)


def rho_prime_fd(ctx: ThetaCtx, z: complex, h: float = 1e-5) -> complex:
    """Central difference of rho, kept only as a cross-check of rho_prime."""
    return (rho(ctx, z + h) - rho(ctx, z - h)) / (2 * h)


def theta_char(ctx: ThetaCtx, alpha: int, z: complex) -> tuple[complex, complex]:
    """theta_alpha(z) and its derivative, for the integer characteristic alpha.

    theta_alpha(z) = prod_{j<n} theta(z + j/n + alpha tau/n)
                     * exp(pi i ((2 alpha - n) z - alpha/n + alpha (alpha - n) tau / n))
    """
    n = ctx.n
    tau = ctx.tau
    z = complex(z)
    vals, ders = [], []
    for j in range(n):
        v, d = theta(ctx, z + j / n + alpha * tau / n)
        vals.append(v)
        ders.append(d)
    e = np.exp(PI_I * ((2 * alpha - n) * z - alpha / n + alpha * (alpha - n) * tau / n))
    prod = complex(np.prod(vals))
    dprod = 0j
    for m in range(n):
        p = ders[m]
        for j in range(n):
            if j != m:
                p *= vals[j]
        dprod += p
    value = prod * e
    deriv = (dprod + PI_I * (2 * alpha - n) * prod) * e
    return complex(value), complex(deriv)


# ------------------------------------------------------------- self-tests


def _rel(diff: complex, *parts: complex) -> float:
    scale = max((abs(p) for p in parts), default=0.0)
    return abs(diff) / scale if scale > 0 else abs(diff)


def _sample_point(rng: np.random.Generator, tau: complex, margin: float = 0.08) -> complex:
    u, v = rng.uniform(margin, 1 - margin, size=2)
    return complex(u + v * tau)


def _off_lattice(z: complex, tau: complex, margin: float = 0.05) -> bool:
    v = z.imag / tau.imag
    u = z.real - v * tau.real
    du = abs(u - round(u))
    dv = abs(v - round(v))
    return du > margin or dv > margin


def theta_selftest(ctx: ThetaCtx, samples: int = 20, seed: int = 0) -> dict[str, float]:
    """Max relative residual of each quasi-periodicity / addition identity.

    Identities: theta periodicity, quasi-periodicity and oddness; rho oddness and
    quasi-periodicity; the three-point rho identity (analytic rho' and a central
    difference); theta_alpha periodicity in alpha, (thcr), (th1); the generating
    identity for sum_r c_{b-a,r} theta_{b-r}(y) theta_{a+r}(z) with k = 1
    (generic points and the diagonal alpha = beta, y = z); the closed form for
    theta'_0(0); and stability under doubling the truncation.
    """
    from .elliptic import coefficient_matrix  # circular at import time

    rng = np.random.default_rng(seed)
    tau, n = ctx.tau, ctx.n
    out: dict[str, float] = {}

    def record(name, val):
        out[name] = max(out.get(name, 0.0), float(val))

    d1 = theta_derivatives(ctx, 0.0, 3)
    th1p, th3p = d1[1], d1[3]
    ro_const = 1.5 * math.pi ** 2 + th3p / (2 * th1p)
    c1 = coefficient_matrix(ctx, 1)

    for _ in range(samples):
        z = _sample_point(rng, tau)
        t0 = theta(ctx, z)[0]
        record("theta(z+1)=theta(z)", _rel(theta(ctx, z + 1)[0] - t0, t0))
        ez = np.exp(-TWO_PI_I * z)
        record("theta(z+tau)=-e^{-2pi i z}theta(z)", _rel(theta(ctx, z + tau)[0] + ez * t0, t0, ez * t0))
        record("theta(-z)=-e^{-2pi i z}theta(z)", _rel(theta(ctx, -z)[0] + ez * t0, ez * t0))

        r = rho(ctx, z)
        record("rho(-z)=-rho(z)", _rel(rho(ctx, -z) + r, r))
        record("rho(z+1)=rho(z)", _rel(rho(ctx, z + 1) - r, r))
        record("rho(z+tau)=rho(z)-2pi i", _rel(rho(ctx, z + tau) - (r - TWO_PI_I), r, TWO_PI_I))

        # three-point identity
        while True:
            x_, y_ = _sample_point(rng, tau), _sample_point(rng, tau)
            w_ = -x_ - y_
            if _off_lattice(w_, tau):
                break
        rx, ry, rw = rho(ctx, x_), rho(ctx, y_), rho(ctx, w_)
        lhs = rx * ry + rx * rw + ry * rw
        sq = -0.5 * (rx * rx + ry * ry + rw * rw)
        for name, der in (("rho three-point identity", rho_prime),
                          ("rho three-point identity (finite difference)", rho_prime_fd)):
            dsum = -0.5 * (der(ctx, x_) + der(ctx, y_) + der(ctx, w_))
            rhs = sq + dsum + ro_const
            record(name, _rel(lhs - rhs, rx * ry, rx * rw, ry * rw, sq, dsum, ro_const))

        a = int(rng.integers(0, n))
        ta, dta = theta_char(ctx, a, z)
        record("theta_{a+n}=theta_a", _rel(theta_char(ctx, a + n, z)[0] - ta, ta))
        record("theta_a(z+1)=(-1)^n theta_a(z)", _rel(theta_char(ctx, a, z + 1)[0] - (-1) ** n * ta, ta))
        fac = -np.exp(-TWO_PI_I * n * (z + tau / 2))
        record("theta_a(z+tau)=-e^{-2pi i n(z+tau/2)}theta_a(z)",
               _rel(theta_char(ctx, a, z + tau)[0] - fac * ta, fac * ta))
        tma = theta_char(ctx, -a, z)[0]
        fac = -np.exp(-TWO_PI_I * a / n)
        record("theta_a(-z)=-e^{-2pi i a/n}theta_{-a}(z)",
               _rel(theta_char(ctx, a, -z)[0] - fac * tma, fac * tma))

        y = _sample_point(rng, tau)
        if _off_lattice(y - z, tau):
            al, be = int(rng.integers(0, n)), int(rng.integers(0, n))
            lhs, rhs, parts = genf1_sides(ctx, c1, al, be, y, z)
            record("genf1", _rel(lhs - rhs, lhs, *parts))
        al, be = int(rng.integers(0, n)), int(rng.integers(0, n))
        lhs, rhs, parts = genf1_sides(ctx, c1, al, be, z, z)
        record("genf1 diagonal", _rel(lhs - rhs, lhs, *parts, 1.0))

    prod = th1p * np.prod([theta(ctx, j / n)[0] for j in range(1, n)])
    record("theta'_0(0) product rule", _rel(ctx.dth(0) - prod, prod))
    record("theta_0(0)=0", abs(ctx.th(0)) / max(abs(ctx.dth(0)), 1.0))

    big = ctx.with_truncation(2 * ctx.M)
    z = _sample_point(rng, tau)
    worst = 0.0
    for a in range(n):
        v1, d1_ = theta_char(ctx, a, z)
        v2, d2_ = theta_char(big, a, z)
        worst = max(worst, _rel(v1 - v2, v2), _rel(d1_ - d2_, d2_))
    record("truncation doubling", worst)
    return out


def genf1_sides(ctx: ThetaCtx, c: np.ndarray, alpha: int, beta: int, y: complex, z: complex):
    """Both sides of the k=1 generating identity and the magnitudes of its summands.

    LHS = sum_r c_{beta-alpha, r} theta_{beta-r}(y) theta_{alpha+r}(z)
    RHS = n rho(y-z) th_a(y) th_b(z) + n rho(z-y) th_a(z) th_b(y)
          + th_a(y) th'_b(z) - th'_a(y) th_b(z) + th_a(z) th'_b(y) - th'_a(z) th_b(y)
    On the diagonal y = z the two rho terms are replaced by their limit
    n (th'_a th_b - th_a th'_b)(y).
    """
    n = ctx.n
    lhs = 0j
    parts = []
    for r in range(n):
        t = c[(beta - alpha) % n, r % n] * theta_char(ctx, beta - r, y)[0] * theta_char(ctx, alpha + r, z)[0]
        lhs += t
        parts.append(t)
    ay, day = theta_char(ctx, alpha, y)
    az, daz = theta_char(ctx, alpha, z)
    by, dby = theta_char(ctx, beta, y)
    bz, dbz = theta_char(ctx, beta, z)
    if abs(y - z) < 1e-12:
        pole = n * (day * by - ay * dby)
        rest = [pole]
    else:
        r1 = n * rho(ctx, y - z) * ay * bz
        r2 = n * rho(ctx, z - y) * az * by
        pole = r1 + r2
        rest = [r1, r2]
    tail = [ay * dbz, -day * bz, az * dby, -daz * by]
    rhs = pole + sum(tail)
    return lhs, rhs, parts + rest + tail
