import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invident import gsf
from invident.exceptions import ClassificationError, ConfigurationError, ParameterError


@pytest.fixture(scope="module")
def fsi():
    return gsf.load_curve("fsi_voltvar")


@pytest.fixture(scope="module")
def scheme():
    return gsf.load_scheme("fsi_voltvar")


def test_fsi_breakpoints_and_setpoints(fsi):
    assert fsi.x_breaks == (0.88, 0.92, 0.98, 1.02, 1.08, 1.10)
    assert gsf.setpoint(fsi, 0.88) == 3.3
    assert gsf.setpoint(fsi, 1.00) == 0.0
    assert gsf.setpoint(fsi, 1.10) == -3.3


def test_setpoint_flat_below_first_knee(fsi):
    # Q1 applies from V_L up to V1, so 0.90 sits on the flat part
    assert gsf.setpoint(fsi, 0.90) == pytest.approx(3.3)


def test_setpoint_interpolates_on_slope(fsi):
    # halfway between (0.92, 3.3) and (0.98, 0)
    assert gsf.setpoint(fsi, 0.95) == pytest.approx(1.65)
    assert gsf.setpoint(fsi, 1.05) == pytest.approx(-1.65)


def test_setpoint_clamps_and_counts(fsi):
    flag = {}
    y = gsf.setpoint(fsi, np.array([0.80, 0.95, 1.20]), flag)
    assert flag["clamped"] == 2
    assert y[0] == 3.3 and y[2] == -3.3


def test_classify_examples(scheme):
    assert gsf.classify(scheme, 0.90)[0] == "R1"
    assert gsf.classify(scheme, 0.92) == ("R2", "r21")
    assert gsf.classify(scheme, 0.95) == ("R2", "r24")
    assert gsf.classify(scheme, 1.10) == ("R5", "r52")


def test_classify_outside_names_nearest(scheme):
    with pytest.raises(ClassificationError) as exc:
        gsf.classify(scheme, 1.2)
    assert exc.value.nearest == "R5"


def test_uniform_ranges_examples():
    r1 = gsf.uniform_ranges(gsf.Interval("R1", 0.88, 0.92), 3)
    np.testing.assert_allclose([r.width for r in r1], [0.04 / 3] * 3)
    r5 = gsf.uniform_ranges(gsf.Interval("R5", 1.08, 1.10), 2)
    assert r5[0].hi == pytest.approx(1.09) and r5[1].lo == pytest.approx(1.09)
    one = gsf.uniform_ranges(gsf.Interval("R3", 0.98, 1.02), 1)
    assert (one[0].lo, one[0].hi) == (0.98, 1.02)
    with pytest.raises(ParameterError):
        gsf.uniform_ranges(gsf.Interval("R1", 0.88, 0.92), 0)


def test_fsi_scheme_layout(scheme):
    assert [len(r) for r in scheme.ranges] == [3, 7, 3, 5, 2]
    assert scheme.active_flags == (True, True, False, True, True)


def test_curve_validation():
    with pytest.raises(ConfigurationError):
        gsf.GsfCurve("volt_var", (), ())
    with pytest.raises(ConfigurationError):
        gsf.GsfCurve("volt_var", (1.0, 0.9), (0, 1))
    with pytest.raises(ConfigurationError):
        gsf.GsfCurve("volt_var", (0.9, 1.0), (0, 1))
    with pytest.raises(ConfigurationError):
        gsf.GsfCurve("power_factor", (0.9, 1.0), (1, 0))


@pytest.mark.parametrize("name", sorted(gsf.FIXTURES))
def test_shipped_fixtures_load(name):
    curve = gsf.load_curve(name)
    scheme = gsf.load_scheme(name)
    assert scheme.span == curve.span
    assert gsf.load_curve(name + ".json") == curve


def test_curve_dict_round_trip(fsi):
    assert gsf.curve_from_dict(gsf.curve_to_dict(fsi)) == fsi


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(sorted(gsf.FIXTURES)), st.data())
def test_breakpoints_exact_and_continuous(name, data):
    curve = gsf.load_curve(name)
    for x, y in zip(curve.x_breaks, curve.y_values):
        assert gsf.setpoint(curve, x) == y
    lo, hi = curve.span
    x = data.draw(st.floats(lo, hi))
    h = 1e-9
    slopes = np.abs(np.diff(curve.y_values) / np.diff(curve.x_breaks))
    assert abs(gsf.setpoint(curve, min(x + h, hi)) - gsf.setpoint(curve, x)) <= slopes.max() * h + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0.80, 1.20), st.floats(0.80, 1.20))
def test_volt_var_monotone(x1, x2):
    curve = gsf.load_curve("fsi_voltvar")
    a, b = sorted((x1, x2))
    assert gsf.setpoint(curve, a) >= gsf.setpoint(curve, b)


@settings(max_examples=100, deadline=None)
@given(
    lo=st.floats(0.5, 1.5),
    width=st.floats(0.001, 0.5),
    n=st.integers(1, 12),
    data=st.data(),
)
def test_classify_uniform_ranges_round_trip(lo, width, n, data):
    region = gsf.Interval("R1", lo, lo + width)
    rngs = tuple(gsf.uniform_ranges(region, n))
    scheme = gsf.RegionScheme((region,), (rngs,))
    j = data.draw(st.integers(0, n - 1))
    r = rngs[j]
    # interior point, away from the shared edges
    frac = data.draw(st.floats(0.01, 0.99))
    x = r.lo + frac * r.width
    assert gsf.classify(scheme, x) == ("R1", r.label)
