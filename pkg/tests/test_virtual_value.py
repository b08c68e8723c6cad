import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from infosell import model
from infosell import virtual_value as vv
from infosell.model import TypeGrid

C_SAMPLES = (0.0, 0.25, 0.5, 0.75, 1.0)


def equal_grid(n):
    return TypeGrid(np.arange(1.0, n + 1), np.full(n, 1.0 / n))


def test_inst_d_curves(inst_d):
    g = inst_d.types
    np.testing.assert_allclose(vv.lower_virtual(g), [1, 3, 5], atol=1e-12)
    np.testing.assert_allclose(vv.upper_virtual(g), [3, 5, 7], atol=1e-12)
    np.testing.assert_allclose(vv.mixed_virtual(g, 0.5), [2, 4, 6], atol=1e-12)
    np.testing.assert_allclose(vv.mixed_virtual(g, 1.0), vv.lower_virtual(g))
    np.testing.assert_allclose(vv.mixed_virtual(g, 0.0), vv.upper_virtual(g))


def test_split_curve_endpoints_and_example(inst_d):
    g = inst_d.types
    np.testing.assert_allclose(vv.split_virtual(g, 1.0), vv.lower_virtual(g), atol=1e-12)
    np.testing.assert_allclose(vv.split_virtual(g, 0.0), vv.upper_virtual(g), atol=1e-12)
    # c = 1/2: t1 pays (1/2 - 1/3)/(1/3) of a gap, t2 is the crossing type,
    # t3 gets (2/3 - 1/2)/(1/3) of a gap
    np.testing.assert_allclose(vv.split_virtual(g, 0.5), [2.5, 4, 5.5], atol=1e-12)


def test_single_type_curves():
    g = TypeGrid([2.0], [1.0])
    assert vv.lower_virtual(g).tolist() == [2.0]
    assert vv.upper_virtual(g).tolist() == [2.0]


def test_bad_weight(inst_d):
    with pytest.raises(vv.BadMixWeight):
        vv.mixed_virtual(inst_d.types, 1.5)
    with pytest.raises(vv.BadMixWeight):
        vv.split_virtual(inst_d.types, -0.1)


def test_continuum_limits():
    n = 1000
    c1 = model.generate_family("inst_c1", n=n, m=2)
    t = c1.types.t
    interior = slice(1, n - 1)
    err = np.abs(vv.lower_virtual(c1.types) - (2 * t - 3))[interior]
    assert err.max() <= 2 / n
    c2 = model.generate_family("inst_c2", n=n, m=2)
    t = c2.types.t
    err = np.abs(vv.upper_virtual(c2.types) - (2 * t - 3))[interior]
    assert err.max() <= 3 * 2 / n


@pytest.mark.parametrize("raw, expected", [
    ([3, 1, 4], [2, 2, 4]),
    ([3, 1, 2], [2, 2, 2]),
    ([1, 2, 3], [1, 2, 3]),
])
def test_iron_hand_cases(raw, expected):
    curve = vv.iron(raw, equal_grid(3))
    np.testing.assert_allclose(curve.ironed, expected, atol=1e-12)


def test_crossing_type(inst_d):
    g = inst_d.types
    assert vv.crossing_type(g, 0.0) == 0
    assert vv.crossing_type(g, 1.0) == 2
    assert vv.crossing_type(g, 0.5) == 1


def test_curve_csv(inst_d):
    text = vv.curve_to_csv(vv.lower_curve(inst_d.types), inst_d.types)
    lines = text.strip().splitlines()
    assert lines[0] == "t,F,raw,ironed"
    assert lines[1].split(",")[0] == "3"
    assert len(lines) == 4


def check_hull(curve, f):
    ironed, H, L = curve.ironed, curve.H, curve.L
    assert np.all(np.diff(ironed) >= -1e-12)
    assert L[0] == H[0] == 0
    assert abs(L[-1] - H[-1]) <= 1e-9
    assert np.all(L <= H + 1e-9)
    slopes = np.diff(L) / f
    assert np.all(np.diff(slopes) >= -1e-9)
    assert abs(f @ ironed - f @ curve.raw) <= 1e-9


@st.composite
def grids(draw, equal_spacing=False):
    n = draw(st.integers(1, 12))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    if equal_spacing:
        t = np.linspace(0.0, 10.0, n) if n > 1 else np.array([1.0])
    else:
        t = np.sort(rng.uniform(0, 10, n))
        if np.any(np.diff(t) <= 0):
            t = np.arange(n, dtype=float)
    f = rng.dirichlet(np.ones(n))
    return TypeGrid(t, f)


@settings(max_examples=200, deadline=None)
@given(grids(), st.lists(st.floats(-50, 50), min_size=12, max_size=12))
def test_iron_properties(grid, values):
    raw = np.array(values[:grid.n])
    check_hull(vv.iron(raw, grid), grid.f)


@settings(max_examples=100, deadline=None)
@given(grids(), st.floats(0, 1))
def test_named_curves_are_hulls(grid, c):
    for curve in (vv.lower_curve(grid), vv.upper_curve(grid),
                  vv.mixed_curve(grid, c), vv.split_curve(grid, c)):
        check_hull(curve, grid.f)
    np.testing.assert_allclose(vv.mixed_curve(grid, c).raw,
                               c * vv.lower_virtual(grid) + (1 - c) * vv.upper_virtual(grid))


def check_ordering(grid, make):
    curves = [make(grid, c).ironed for c in C_SAMPLES]
    for a, b in zip(curves, curves[1:]):
        assert np.all(a >= b - 1e-9)


def check_crossing(grid, make):
    for c in C_SAMPLES:
        phi = make(grid, c).ironed
        below = grid.cdf <= c
        above = grid.cdf_before >= c
        assert np.all(phi[below] <= grid.t[below] + 1e-9)
        assert np.all(phi[above] >= grid.t[above] - 1e-9)


@settings(max_examples=100, deadline=None)
@given(grids())
def test_ordering_in_c(grid):
    check_ordering(grid, vv.mixed_curve)
    check_ordering(grid, vv.split_curve)


@settings(max_examples=100, deadline=None)
@given(grids())
def test_split_crossing_any_grid(grid):
    check_crossing(grid, vv.split_curve)


@settings(max_examples=100, deadline=None)
@given(grids(equal_spacing=True))
def test_mixed_crossing_equal_spacing(grid):
    check_crossing(grid, vv.mixed_curve)


def test_mixed_crossing_can_fail_on_uneven_spacing():
    # Why the solver uses the split curve: with unequal gaps the convex
    # combination can push a type with F(t_{i-1}) >= c below its own value.
    grid = TypeGrid([0.0, 0.1, 10.0], [1 / 3] * 3)
    c = 1 / 3
    assert grid.cdf_before[1] >= c
    assert vv.mixed_curve(grid, c).ironed[1] < grid.t[1] - 1.0
    assert vv.split_curve(grid, c).ironed[1] >= grid.t[1] - 1e-12
