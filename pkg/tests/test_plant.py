import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invident import gsf, plant
from invident.exceptions import ConfigurationError, FixtureLookupError
from invident.series import SampledSeries
from invident.sysid import ContinuousTF

DT = 1e-3


def series(u, level=None):
    ch = {"excitation": np.asarray(u, float)}
    if level is not None:
        ch["amplitude_level"] = np.asarray(level, float)
    return SampledSeries(0.0, DT, ch)


def test_published_coefficients():
    r1 = plant.published_fixture("R1")
    assert r1.num == (-511.5, 9.886e4) and r1.den == (1.0, 121.8, 7098.0)
    r5 = plant.published_fixture("R5")
    assert r5.num == (548.7, -1.193e5) and r5.den == (1.0, 187.8, 1.187e4)
    r2 = plant.published_fixture("R2")
    assert r2.num == (-1667.0, 9.49e4) and r2.den == (1.0, 31.84, 456.3)


def test_deactivated_and_unknown_labels():
    with pytest.raises(FixtureLookupError, match="deactivated"):
        plant.published_fixture("R3")
    with pytest.raises(FixtureLookupError, match="unknown"):
        plant.published_fixture("R9")


@pytest.mark.parametrize("label", plant.FIXTURE_LABELS)
def test_fixtures_are_stable(label):
    assert np.all(np.roots(plant.published_fixture(label).den).real < 0)


def test_r1_step_settles_to_final_value():
    tf = plant.published_fixture("R1")
    u = np.r_[np.zeros(100), np.full(3000, 0.01)]
    y = plant.simulate(plant.PlantSpec(tfs={"R1": tf}), series(1.0 + u))["current"]
    dev = y[-1] - y[0]
    # final-value theorem on the published coefficients
    assert dev == pytest.approx(0.01 * 9.886e4 / 7098, rel=1e-6)
    assert dev == pytest.approx(0.1393, abs=5e-5)


def test_constant_input_gives_operating_point():
    tf = plant.published_fixture("R2").with_offsets(input_mean=1.0, output_mean=5.0)
    y = plant.simulate(plant.PlantSpec(tfs={"R2": tf}), series(np.full(500, 1.0)))["current"]
    np.testing.assert_allclose(y, 5.0, atol=1e-12)


def test_noise_is_seeded():
    spec = plant.PlantSpec(tfs={"R1": plant.published_fixture("R1")}, noise=0.1, seed=7)
    u = series(np.sin(np.arange(1000) * 0.05))
    a, b = plant.simulate(spec, u)["current"], plant.simulate(spec, u)["current"]
    assert a.tobytes() == b.tobytes()
    other = plant.simulate(plant.PlantSpec(tfs={"R1": plant.published_fixture("R1")}, noise=0.1, seed=8), u)["current"]
    assert not np.array_equal(a, other)


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        plant.PlantSpec(tfs={})
    with pytest.raises(ConfigurationError):
        plant.PlantSpec(tfs={"x": ContinuousTF((1.0,), (1.0, -1.0))})
    with pytest.raises(ConfigurationError):
        plant.PlantSpec(mode="piecewise", tfs={"R1": plant.published_fixture("R1")})


def test_piecewise_anchor_and_clamp():
    curve = gsf.load_curve("fsi_voltvar")
    spec = plant.PlantSpec(mode="piecewise", tfs={"R1": plant.published_fixture("R1")}, curve=curve)
    out = plant.simulate(spec, series(np.full(200, 0.88), np.full(200, 0.88)))
    np.testing.assert_allclose(out["current"], plant.setpoint_current(curve, 0.88), rtol=1e-12)
    # deadband region has no model: static setpoint (zero)
    out = plant.simulate(spec, series(np.full(50, 1.0), np.full(50, 1.0)))
    np.testing.assert_allclose(out["current"], 0.0)
    out = plant.simulate(spec, series(np.full(50, 1.3), np.full(50, 1.3)))
    assert out.meta["clamped"] == 50


def test_plant_file_round_trip(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"mode": "piecewise", "curve": "fsi_voltvar", "tfs": {"R1": "R1", "R2": {"fixture": "R2"}}}))
    spec = plant.load_plant(path)
    assert spec.mode == "piecewise" and set(spec.tfs) == {"R1", "R2"}
    assert spec.scheme.active_flags[2] is False
    again = plant.plant_from_dict(plant.plant_to_dict(spec))
    assert again.tfs["R2"] == spec.tfs["R2"]


@settings(max_examples=20, deadline=None)
@given(
    label=st.sampled_from(plant.FIXTURE_LABELS),
    seed=st.integers(0, 2**16),
    k=st.floats(-3, 3).filter(lambda v: abs(v) > 1e-3),
)
def test_superposition(label, seed, k):
    tf = plant.published_fixture(label).with_offsets(input_mean=1.0)
    du = np.random.default_rng(seed).normal(0, 0.01, 800)
    spec = plant.PlantSpec(tfs={label: tf})
    y1 = plant.simulate(spec, series(1.0 + du))["current"]
    y2 = plant.simulate(spec, series(1.0 + k * du))["current"]
    np.testing.assert_allclose(y2, k * y1, rtol=1e-9, atol=1e-9 * np.max(np.abs(k * y1)))


@settings(max_examples=20, deadline=None)
@given(label=st.sampled_from(plant.FIXTURE_LABELS), alpha=st.floats(0.05, 2.0), seed=st.integers(0, 100))
def test_gain_scale_multiplies_deviation(label, alpha, seed):
    tf = plant.published_fixture(label).with_offsets(input_mean=1.0, output_mean=3.0)
    u = series(1.0 + np.random.default_rng(seed).normal(0, 0.01, 500))
    base = plant.simulate(plant.PlantSpec(tfs={label: tf}), u)["current"] - 3.0
    scaled = plant.simulate(plant.PlantSpec(tfs={label: tf}, gain_scale=alpha), u)["current"] - 3.0
    np.testing.assert_allclose(scaled, alpha * base, rtol=1e-12, atol=1e-12)
