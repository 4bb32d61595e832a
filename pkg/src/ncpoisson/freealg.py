"""Free associative Laurent algebra, its trace space and the tensor algebra A (x) A^op.

Letters are encoded as small integers so that words are plain tuples of ints:

    x_i       -> i                (0 <= i < INV_BASE)
    x_i^-1    -> INV_BASE + i
    a         -> AUX
    a^-1      -> AUX_INV

The integer order is the letter order used for canonical cyclic words:
x_0 < x_1 < ... < x_0^-1 < x_1^-1 < ... < a < a^-1.
"""

from __future__ import annotations

import os
import re
from functools import lru_cache
from typing import Iterable, Mapping

INV_BASE = 10_000
AUX = 20_000
AUX_INV = 20_001

Word = tuple  # tuple[int, ...]
EMPTY: Word = ()

#: Coefficients below ZERO_REL * (max |coefficient| of the expression) are pruned.
ZERO_REL = float(os.environ.get("NCPOISSON_ZERO_REL", "1e-12"))


def x(i: int) -> int:
    return i


def xinv(i: int) -> int:
    return INV_BASE + i


def inverse(c: int) -> int:
    if c < INV_BASE:
        return c + INV_BASE
    if c < AUX:
        return c - INV_BASE
    return AUX_INV if c == AUX else AUX


def is_inverse_letter(c: int) -> bool:
    return INV_BASE <= c < AUX or c == AUX_INV


def generator_index(c: int) -> int | None:
    """Index i of x_i or x_i^-1, or None for the auxiliary letter."""
    if c < INV_BASE:
        return c
    if c < AUX:
        return c - INV_BASE
    return None


def letter_parts(c: int) -> tuple[str | int, int]:
    """Return (symbol, exponent) where symbol is a generator index or "a"."""
    if c < INV_BASE:
        return c, 1
    if c < AUX:
        return c - INV_BASE, -1
    return "a", (1 if c == AUX else -1)


def reduce_word(letters: Iterable[int]) -> Word:
    """Cancel adjacent inverse pairs until none remain."""
    out: list[int] = []
    for c in letters:
        if out and out[-1] == inverse(c):
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def _is_reduced(w: Word) -> bool:
    return all(w[i + 1] != inverse(w[i]) for i in range(len(w) - 1))


def concat(u: Word, v: Word) -> Word:
    """Product of two reduced words; only the seam can cancel."""
    if not u:
        return v
    if not v:
        return u
    if u[-1] != inverse(v[0]):
        return u + v
    k = 0
    lu, lv = len(u), len(v)
    while k < lu and k < lv and u[lu - 1 - k] == inverse(v[k]):
        k += 1
    return u[: lu - k] + v[k:]


def word_inverse(w: Word) -> Word:
    return tuple(inverse(c) for c in reversed(w))


@lru_cache(maxsize=1 << 20)
def cyclic_canon(w: Word) -> Word:
    """Canonical representative of the cyclic class of a reduced word.

    The word is reduced and cyclically reduced first (cancellations across the
    seam), then the lexicographically smallest rotation is returned.
    """
    if not _is_reduced(w):
        w = reduce_word(w)
    lo, hi = 0, len(w)
    while hi - lo >= 2 and w[lo] == inverse(w[hi - 1]):
        lo += 1
        hi -= 1
    if lo:
        w = w[lo:hi]
    if len(w) <= 1:
        return w
    return min(w[i:] + w[:i] for i in range(len(w)))


def _clean(d: dict) -> dict:
    if not d:
        return d
    mx = max(abs(v) for v in d.values())
    if mx == 0.0:
        return {}
    thr = ZERO_REL * mx
    return {k: v for k, v in d.items() if abs(v) > thr}


class _Linear:
    """Shared behaviour of finitely supported linear combinations."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None, *, clean: bool = True):
        d = dict(terms) if terms else {}
        self.terms = _clean(d) if clean else d

    def _new(self, terms, clean=True):
        return type(self)(terms, clean=clean)

    def __iter__(self):
        return iter(self.terms.items())

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def max_abs(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __neg__(self):
        return self._new({k: -v for k, v in self.terms.items()}, clean=False)

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        d = dict(self.terms)
        for k, v in other.terms.items():
            d[k] = d.get(k, 0) + v
        return self._new(d)

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        d = dict(self.terms)
        for k, v in other.terms.items():
            d[k] = d.get(k, 0) - v
        return self._new(d)

    def scale(self, s: complex):
        if s == 0:
            return self._new({})
        return self._new({k: s * v for k, v in self.terms.items()}, clean=False)

    def __rmul__(self, s):
        if isinstance(s, (int, float, complex)):
            return self.scale(s)
        return NotImplemented

    def close_to(self, other, tol: float) -> bool:
        return (self - other).max_abs() <= tol

    def __repr__(self):
        return f"{type(self).__name__}({render_terms(self)})"


class NcPoly(_Linear):
    """Element of the free Laurent algebra: {reduced word: coefficient}.

    Unreduced keys are reduced (and merged) on construction.
    """

    __slots__ = ()

    def __init__(self, terms: Mapping | None = None, *, clean: bool = True):
        if terms and not all(_is_reduced(k) for k in terms):
            d: dict = {}
            for k, v in dict(terms).items():
                k = reduce_word(k)
                d[k] = d.get(k, 0) + v
            terms = d
        super().__init__(terms, clean=clean)

    @classmethod
    def word(cls, w: Iterable[int], coeff: complex = 1.0) -> "NcPoly":
        return cls({reduce_word(w): coeff})

    @classmethod
    def const(cls, c: complex = 1.0) -> "NcPoly":
        return cls({EMPTY: c})

    @classmethod
    def gen(cls, i: int) -> "NcPoly":
        return cls({(i,): 1.0})

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        if not isinstance(other, NcPoly):
            return NotImplemented
        return poly_mul(self, other)

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=-1)

    def letters(self) -> set[int]:
        return {c for w in self.terms for c in w}


class TracePoly(_Linear):
    """Element of F = A/[A,A]: {canonical cyclic word: coefficient}.

    Keys are canonicalised on construction unless ``canonical=True`` promises
    they already are.
    """

    __slots__ = ()

    def __init__(self, terms: Mapping | None = None, *, clean: bool = True, canonical: bool = False):
        if terms and not canonical:
            d: dict = {}
            for k, v in dict(terms).items():
                k = cyclic_canon(reduce_word(k))
                d[k] = d.get(k, 0) + v
            terms = d
        super().__init__(terms, clean=clean)

    def _new(self, terms, clean=True):
        return TracePoly(terms, clean=clean, canonical=True)

    @classmethod
    def word(cls, w: Iterable[int], coeff: complex = 1.0) -> "TracePoly":
        return cls({tuple(w): coeff})

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        return NotImplemented

    def letters(self) -> set[int]:
        return {c for w in self.terms for c in w}

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=-1)


class Tensor(_Linear):
    """Element of A (x) A^op: {(left word, right word): coefficient}.

    (b (x) c) acts on A by f -> b f c.  Unreduced keys are reduced on construction.
    """

    __slots__ = ()

    def __init__(self, terms: Mapping | None = None, *, clean: bool = True):
        if terms and not all(_is_reduced(b) and _is_reduced(c) for b, c in terms):
            d: dict = {}
            for (b, c), v in dict(terms).items():
                k = (reduce_word(b), reduce_word(c))
                d[k] = d.get(k, 0) + v
            terms = d
        super().__init__(terms, clean=clean)

    @classmethod
    def pair(cls, b: Iterable[int], c: Iterable[int], coeff: complex = 1.0) -> "Tensor":
        return cls({(reduce_word(b), reduce_word(c)): coeff})

    @classmethod
    def identity(cls) -> "Tensor":
        return cls({(EMPTY, EMPTY): 1.0})

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        if not isinstance(other, Tensor):
            return NotImplemented
        return tensor_mul(self, other)

    def __call__(self, c: NcPoly) -> NcPoly:
        return tensor_apply(self, c)


def poly_mul(f: NcPoly, g: NcPoly) -> NcPoly:
    d: dict = {}
    for u, a in f.terms.items():
        for v, b in g.terms.items():
            w = concat(u, v)
            d[w] = d.get(w, 0) + a * b
    return NcPoly(d)


def trace(f: NcPoly) -> TracePoly:
    d: dict = {}
    for w, a in f.terms.items():
        k = cyclic_canon(w)
        d[k] = d.get(k, 0) + a
    return TracePoly(d, canonical=True)


def trace_product(f: NcPoly, g: NcPoly) -> TracePoly:
    """tr(f g) without materialising the product."""
    d: dict = {}
    for u, a in f.terms.items():
        for v, b in g.terms.items():
            k = cyclic_canon(concat(u, v))
            d[k] = d.get(k, 0) + a * b
    return TracePoly(d, canonical=True)


def representative(f: TracePoly) -> NcPoly:
    return NcPoly(f.terms, clean=False)


def tensor_apply(T: Tensor, c: NcPoly) -> NcPoly:
    d: dict = {}
    for (b, e), t in T.terms.items():
        for w, a in c.terms.items():
            k = concat(concat(b, w), e)
            d[k] = d.get(k, 0) + t * a
    return NcPoly(d)


def tensor_mul(S: Tensor, T: Tensor) -> Tensor:
    """Product in A (x) A^op: (b (x) c)(b' (x) c') = b b' (x) c' c."""
    d: dict = {}
    for (b, c), s in S.terms.items():
        for (b2, c2), t in T.terms.items():
            k = (concat(b, b2), concat(c2, c))
            d[k] = d.get(k, 0) + s * t
    return Tensor(d)


def tensor_star(T: Tensor) -> Tensor:
    return Tensor({(c, b): t for (b, c), t in T.terms.items()}, clean=False)


def _dilate_word(w: Word) -> Word:
    out: list[int] = []
    for c in w:
        if c < INV_BASE:
            out.append(AUX)
            out.append(c)
        elif c < AUX:
            out.append(c)
            out.append(AUX_INV)
        else:
            out.append(c)
    return reduce_word(out)


def dilate(f):
    """Apply the homomorphism x_i -> a x_i (so x_i^-1 -> x_i^-1 a^-1, a -> a)."""
    if isinstance(f, TracePoly):
        d: dict = {}
        for w, v in f.terms.items():
            k = cyclic_canon(_dilate_word(w))
            d[k] = d.get(k, 0) + v
        return TracePoly(d, canonical=True)
    if isinstance(f, NcPoly):
        d = {}
        for w, v in f.terms.items():
            k = _dilate_word(w)
            d[k] = d.get(k, 0) + v
        return NcPoly(d)
    raise TypeError(f"cannot dilate {type(f).__name__}")


def substitute(f, images: Mapping[int, NcPoly]):
    """Algebra homomorphism sending each letter code in `images` to a polynomial.

    Letters missing from `images` are kept. Inverse letters must be given
    explicitly (only monomial images can be inverted in general).
    """
    cache: dict[Word, NcPoly] = {}

    def word_image(w: Word) -> NcPoly:
        if w in cache:
            return cache[w]
        acc = NcPoly.const(1.0)
        for c in w:
            img = images.get(c)
            acc = poly_mul(acc, img if img is not None else NcPoly({(c,): 1.0}))
        cache[w] = acc
        return acc

    if isinstance(f, TracePoly):
        d: dict = {}
        for w, v in f.terms.items():
            for u, a in word_image(w).terms.items():
                k = cyclic_canon(u)
                d[k] = d.get(k, 0) + v * a
        return TracePoly(d, canonical=True)
    d = {}
    for w, v in f.terms.items():
        for u, a in word_image(w).terms.items():
            d[u] = d.get(u, 0) + v * a
    return NcPoly(d)


def necklaces(nvars: int, max_degree: int, min_degree: int = 1) -> list[Word]:
    """Canonical cyclic words over x_0..x_{nvars-1} with min_degree <= length <= max_degree."""
    out: list[Word] = []
    for L in range(min_degree, max_degree + 1):
        seen = set()
        layer = [()]
        for _ in range(L):
            layer = [w + (c,) for w in layer for c in range(nvars)]
        for w in layer:
            k = cyclic_canon(w)
            if k not in seen:
                seen.add(k)
        out.extend(sorted(seen))
    return out


# ---------------------------------------------------------------- rendering


def render_letter(c: int, prefix: str = "x") -> str:
    sym, e = letter_parts(c)
    name = "a" if sym == "a" else f"{prefix}{sym}"
    return name if e == 1 else f"{name}^-1"


def render_word(w: Word, prefix: str = "x") -> str:
    if not w:
        return "1"
    return ".".join(render_letter(c, prefix) for c in w)


_LETTER_RE = re.compile(r"^(?:([a-z])(\d+)|(a))(\^-1)?$")


def parse_word(s: str) -> Word:
    s = s.strip()
    if s in ("", "1"):
        return EMPTY
    out = []
    for tok in s.split("."):
        m = _LETTER_RE.match(tok.strip())
        if not m:
            raise ValueError(f"bad letter {tok!r}")
        if m.group(3):
            c = AUX
        elif m.group(1) == "a":
            raise ValueError(f"bad letter {tok!r}")
        else:
            c = int(m.group(2))
        if m.group(4):
            c = inverse(c)
        out.append(c)
    return reduce_word(out)


def _fmt(v: complex) -> str:
    v = complex(v)
    return f"({v.real!r},{v.imag!r})"


def render_terms(p, prefix: str = "x") -> str:
    if not p.terms:
        return "0"
    parts = []
    for k in sorted(p.terms, key=lambda k: (len(k), k) if not isinstance(p, Tensor) else k):
        v = p.terms[k]
        if isinstance(p, Tensor):
            key = f"{render_word(k[0], prefix)}(x){render_word(k[1], prefix)}"
        else:
            key = render_word(k, prefix)
        parts.append(f"{_fmt(v)}*{key}")
    return " + ".join(parts)


_TERM_RE = re.compile(r"\(([^,()]+),([^,()]+)\)\*(\S+)")


def parse_terms(s: str, kind: type = NcPoly):
    """Inverse of render_terms for NcPoly / TracePoly / Tensor."""
    d: dict = {}
    s = s.strip()
    if s == "0":
        return kind({})
    for m in _TERM_RE.finditer(s):
        v = complex(float(m.group(1)), float(m.group(2)))
        key = m.group(3)
        if kind is Tensor:
            left, right = key.split("(x)")
            k = (parse_word(left), parse_word(right))
        elif kind is TracePoly:
            k = cyclic_canon(parse_word(key))
        else:
            k = parse_word(key)
        d[k] = d.get(k, 0) + v
    return kind(d)
