import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import signal as sps

from invident.exceptions import ParameterError
from invident.signals import ProbingSpec, generate, instantaneous_frequency, staircase_schedule, sweep_phase


def test_chirp_frequency_endpoints():
    assert instantaneous_frequency(0.0, 1, 5, 5) == pytest.approx(1.0)
    assert instantaneous_frequency(5.0, 1, 5, 5) == pytest.approx(5.0)


def test_square_takes_two_values():
    spec = ProbingSpec(kind="square", f0=1, f1=1, amp_start=1.0, amp_end=1.0, dwell=3, fs=1000, depth=0.01, bias=1.0)
    vals = np.unique(np.round(generate(spec)["excitation"], 12))
    np.testing.assert_allclose(vals, [0.99, 1.01])


def test_table_spec_spans_amplitudes_and_sweeps_upward():
    # 0.8884 -> 1.0884 p.u. in 0.001 steps every 6 s, 1 -> 5 Hz over 5 s
    spec = ProbingSpec(
        kind="square_chirp", f0=1, f1=5, sweep_time=5, amp_start=0.8884, amp_step=0.001, amp_end=1.0884, dwell=6, fs=200
    )
    sig = generate(spec)
    lv = sig["amplitude_level"]
    assert lv.min() == pytest.approx(0.8884) and lv.max() == pytest.approx(1.0884)
    exc = sig["excitation"]
    assert exc.min() == pytest.approx(0.8884 - spec.effective_depth)
    assert exc.max() == pytest.approx(1.0884 + spec.effective_depth)
    for k in (0, 100, spec.n_levels - 1):
        a = int(k * spec.dwell * spec.fs)
        w = exc[a:a + int(spec.sweep_time * spec.fs)] - lv[a]
        f, t, S = sps.spectrogram(w, fs=spec.fs, nperseg=200, noverlap=100, window="boxcar")
        peaks = f[np.argmax(S, axis=0)]
        assert np.all(np.diff(peaks) >= 0)
        assert peaks[0] <= 2 and peaks[-1] >= 4


def test_sine_chirp_depth_dense_oracle():
    kw = dict(kind="sine_chirp", f0=1, f1=20, sweep_time=4, amp_start=1.0, amp_end=1.0, dwell=4, depth=0.02)
    coarse = generate(ProbingSpec(fs=1000, **kw))
    dense = generate(ProbingSpec(fs=100_000, **kw))
    dev_c = np.max(np.abs(coarse["excitation"] - coarse["amplitude_level"]))
    dev_d = np.max(np.abs(dense["excitation"] - dense["amplitude_level"]))
    assert dev_d == pytest.approx(0.02, rel=1e-6)
    # a sample lands within half a step of the peak: phase error <= pi*f1/fs
    assert dev_d - dev_c <= 0.02 * (1 - np.cos(np.pi * 20 / 1000)) + 1e-12


def test_staircase_counts():
    sched = staircase_schedule(ProbingSpec(amp_start=0.88, amp_step=0.01, amp_end=1.10, dwell=15))
    assert len(sched) == 23
    assert sched[0] == (0.0, 0.88) and sched[1] == (15.0, 0.89)
    assert staircase_schedule(ProbingSpec(amp_start=1.0, amp_end=1.0)) == [(0.0, 1.0)]
    fine = ProbingSpec(amp_start=0.88, amp_step=0.001, amp_end=1.10, dwell=6)
    assert len(staircase_schedule(fine)) == int(np.floor((1.10 - 0.88) / 0.001 + 1e-9)) + 1 == 221


@pytest.mark.parametrize(
    "kw, word",
    [
        (dict(f0=0), "f0"),
        (dict(f0=5, f1=1), "f1"),
        (dict(fs=8, f1=5), "Nyquist"),
        (dict(dwell=0), "dwell"),
        (dict(amp_step=0), "amp_step"),
        (dict(kind="triangle"), "kind"),
        (dict(sweep_time=0), "sweep_time"),
    ],
)
def test_invalid_spec_names_invariant(kw, word):
    with pytest.raises(ParameterError, match=word):
        ProbingSpec(**kw)


def test_flat_sweep_degenerates_to_tone():
    tau = np.linspace(0, 2, 50)
    np.testing.assert_allclose(sweep_phase(tau, 3.0, 3.0, 1.0), 2 * np.pi * 3.0 * tau)


@settings(max_examples=25, deadline=None)
@given(
    f0=st.floats(0.5, 5),
    ratio=st.floats(1, 8),
    T=st.floats(0.5, 10),
    fs=st.sampled_from([200.0, 1000.0]),
)
def test_phase_continuity(f0, ratio, T, fs):
    f1 = f0 * ratio
    if fs <= 2 * f1:
        fs = 4 * f1
    tau = np.arange(int(T * fs) + 10) / fs
    phi = sweep_phase(tau, f0, f1, T)
    assert np.all(np.abs(np.diff(phi)) < 2 * np.pi * f1 / fs + 1e-9)


@settings(max_examples=15, deadline=None)
@given(f0=st.floats(1, 4), ratio=st.floats(1.5, 4), T=st.floats(20, 40))
def test_zero_crossing_frequency_endpoints(f0, ratio, T):
    f1 = f0 * ratio
    fs = 200 * f1
    spec = ProbingSpec(kind="sine_chirp", f0=f0, f1=f1, sweep_time=T, amp_start=1, amp_end=1, dwell=T, fs=fs, depth=1)
    w = generate(spec)["excitation"] - 1.0
    z = np.flatnonzero(np.diff(np.signbit(w)))
    est_start = 1.0 / (2 * (z[1] - z[0]) / fs)
    est_end = 1.0 / (2 * (z[-1] - z[-2]) / fs)
    assert est_start == pytest.approx(f0, rel=0.05)
    assert est_end == pytest.approx(f1, rel=0.05)


@settings(max_examples=15, deadline=None)
@given(
    kind=st.sampled_from(["square", "square_chirp"]),
    depth=st.floats(0.001, 0.05),
    n=st.integers(1, 4),
)
def test_square_two_values_per_dwell(kind, depth, n):
    spec = ProbingSpec(kind=kind, f0=1, f1=5, sweep_time=2, amp_start=0.9, amp_step=0.01, amp_end=0.9 + 0.01 * (n - 1),
                       dwell=2, fs=500, depth=depth)
    sig = generate(spec)
    for _, level in staircase_schedule(spec):
        sel = sig["amplitude_level"] == level
        vals = np.unique(sig["excitation"][sel])
        assert len(vals) == 2
        np.testing.assert_allclose(vals, [level - depth, level + depth], atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(kind=st.sampled_from(["sine", "square", "sine_chirp", "square_chirp"]), f1=st.floats(1, 20))
def test_generate_is_deterministic(kind, f1):
    spec = ProbingSpec(kind=kind, f0=1, f1=f1, sweep_time=1, amp_start=1, amp_end=1, dwell=1.5, fs=100)
    a, b = generate(spec), generate(spec)
    for ch in a.channels:
        assert a[ch].tobytes() == b[ch].tobytes()
