import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from snlab.circle import CircleInterval, ccw_offset, circle_dist, wrap

finite = st.floats(-1e6, 1e6, allow_nan=False)
unit = st.floats(0, 1, exclude_max=True)


@pytest.mark.parametrize("x, expected", [(1.25, 0.25), (-0.25, 0.75), (0.0, 0.0), (1.0, 0.0), (-1e-18, 0.0)])
def test_wrap_examples(x, expected):
    assert wrap(x) == pytest.approx(expected, abs=1e-15)


def test_wrap_rejects_nonfinite():
    with pytest.raises(ValueError):
        wrap(float("nan"))
    with pytest.raises(ValueError):
        wrap(np.array([0.1, np.inf]))


@given(finite)
def test_wrap_range(x):
    y = wrap(x)
    assert 0.0 <= y < 1.0


@pytest.mark.parametrize("x, y, d", [(0.1, 0.9, 0.2), (0.3, 0.3, 0.0), (0.25, 0.5, 0.25)])
def test_circle_dist_examples(x, y, d):
    assert circle_dist(x, y) == pytest.approx(d, abs=1e-15)


@given(unit, unit, unit)
def test_circle_dist_is_a_metric(x, y, z):
    assert circle_dist(x, y) == pytest.approx(circle_dist(y, x), abs=1e-15)
    assert 0 <= circle_dist(x, y) <= 0.5
    assert circle_dist(x, z) <= circle_dist(x, y) + circle_dist(y, z) + 1e-15


@given(unit, unit)
def test_ccw_offset_consistent_with_dist(x, y):
    off = ccw_offset(x, y)
    assert 0 <= off < 1
    assert min(off, 1 - off) == pytest.approx(circle_dist(x, y), abs=1e-12)


def test_interval_wraps_through_zero():
    arc = CircleInterval.from_endpoints(0.9, 0.1)
    assert arc.length == pytest.approx(0.2)
    assert arc.contains(0.95) and arc.contains(0.05)
    assert not arc.contains(0.5)
    assert arc.end == pytest.approx(0.1)


def test_interval_intersects():
    a = CircleInterval(0.8, 0.3)
    assert a.intersects(CircleInterval(0.05, 0.01))
    assert not a.intersects(CircleInterval(0.3, 0.2))


def test_interval_rejects_bad_length():
    with pytest.raises(ValueError):
        CircleInterval(0.1, 1.5)
    with pytest.raises(ValueError):
        CircleInterval(0.1, -0.1)
