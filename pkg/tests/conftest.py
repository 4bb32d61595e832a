import functools

import numpy as np
import pytest
from hypothesis import strategies as st

from ncpoisson.elliptic import EllipticParams, build_r_tensor
from ncpoisson.freealg import NcPoly, TracePoly, cyclic_canon, inverse

TAU = 0.3 + 1.1j


@functools.lru_cache(maxsize=None)
def elliptic_r(n, k, tau=TAU):
    return build_r_tensor(EllipticParams(n, k, tau))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def letters(n, laurent=False):
    base = st.integers(0, n - 1)
    if not laurent:
        return base
    return st.one_of(base, base.map(inverse))


def words(n, max_len=6, laurent=False):
    return st.lists(letters(n, laurent), max_size=max_len).map(tuple)


small_ints = st.integers(-3, 3).filter(lambda v: v != 0)


def nc_polys(n=3, max_len=5, max_terms=4, laurent=False):
    return st.dictionaries(words(n, max_len, laurent), small_ints, max_size=max_terms).map(NcPoly)


def trace_polys(n=3, max_len=6, max_terms=4, laurent=False):
    return st.dictionaries(words(n, max_len, laurent), small_ints, max_size=max_terms).map(TracePoly)


def canon(w):
    return cyclic_canon(tuple(w))


# acceptance lines, echoed in the terminal summary so they survive output capture
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
