import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpmpdc.roots import bisect_rows, polish, scan, sign_change_brackets


def test_brackets_of_a_sampled_sine():
    x, y = scan(np.sin, 0.5, 10.0, 96)
    brackets = sign_change_brackets(x, y)
    assert len(brackets) == 3
    for (a, b), k in zip(brackets, (1, 2, 3)):
        assert x[a] < k * math.pi < x[b]


def test_exact_zero_counts_once():
    y = np.array([-1.0, 0.0, 1.0, 2.0])
    assert sign_change_brackets(np.arange(4.0), y) == [(1, 1)]
    assert sign_change_brackets(np.arange(3.0), np.array([1.0, 2.0, 0.0])) == [(2, 2)]


def test_nonfinite_samples_break_the_scan():
    y = np.array([-1.0, np.nan, 1.0, -1.0])
    assert sign_change_brackets(np.arange(4.0), y) == [(2, 3)]


def test_polish_reaches_the_tolerance():
    r = polish(lambda x: x**3 - 2.0, 2.0, 1.0, xtol=1e-14)
    assert r == pytest.approx(2 ** (1 / 3), abs=1e-13)
    assert polish(math.sin, 3.0, 3.0, 1e-12) == 3.0


@settings(max_examples=40)
@given(st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=1, max_size=8))
def test_bisect_rows_solves_each_problem(targets):
    t = np.array(targets)
    roots = bisect_rows(lambda x: x * x - t, np.zeros_like(t), np.full_like(t, 4.0), iterations=60)
    assert np.allclose(roots, np.sqrt(t), rtol=1e-12)
