import numpy as np
from hypothesis import given, strategies as st

from coaglab.interp import monotone_cubic, shape_safe_quintic


@given(st.lists(st.floats(0.01, 10.0), min_size=5, max_size=40))
def test_monotone_data_gives_monotone_interpolant(steps):
    y = np.cumsum(steps)
    x = np.arange(y.size, dtype=float)
    xq = np.linspace(0, y.size - 1, 20 * y.size)
    for interp in (monotone_cubic(x, y), shape_safe_quintic(x, y)):
        v = interp(xq)
        assert np.all(np.diff(v) >= -1e-12 * np.max(np.abs(y)))


def test_smooth_peak_is_resolved():
    x = np.linspace(-1.0, 1.0, 41)
    y = -x * x
    xq = np.linspace(-0.99, 0.99, 1001)
    assert np.max(np.abs(monotone_cubic(x, y)(xq) + xq * xq)) < 1e-12
    assert np.max(np.abs(shape_safe_quintic(x, y)(xq) + xq * xq)) < 1e-12


def test_interpolates_nodes():
    x = np.linspace(0.0, 3.0, 30)
    y = np.exp(-x) * np.cos(2 * x)
    assert np.allclose(monotone_cubic(x, y)(x), y, rtol=0, atol=1e-15)
    assert np.allclose(shape_safe_quintic(x, y)(x), y, rtol=0, atol=1e-14)


def test_step_does_not_overshoot():
    x = np.arange(20, dtype=float)
    y = np.where(x < 10, 0.0, 1.0)
    xq = np.linspace(0, 19, 2000)
    for interp in (monotone_cubic(x, y), shape_safe_quintic(x, y)):
        v = interp(xq)
        assert v.min() >= -1e-14 and v.max() <= 1 + 1e-14
