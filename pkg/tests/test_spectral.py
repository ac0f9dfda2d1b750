"""Embedding traces, DFT stable values, convergence monitoring."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from guirepair.spectral import (
    SignalConfig,
    SignalMonitor,
    SignalTrace,
    dft,
    parseval_gap,
    project,
    stable_signal,
    traces_csv,
)


def naive_dft(series):
    """Direct O(N^2) summation of the same normalized transform."""
    x = np.asarray(series, dtype=np.float64)
    n = len(x)
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        for t in range(n):
            out[k] += x[t] * np.exp(-2j * np.pi * k * t / n)
    return out / n


def test_project_is_l2_norm():
    v = np.array([3.0, 4.0])
    assert project(v) == 5.0
    assert project(np.zeros(7)) == 0.0


def test_dft_matches_naive_reference():
    rng = np.random.default_rng(0)
    for _ in range(25):
        n = int(rng.integers(4, 65))
        series = rng.normal(size=n)
        assert np.allclose(dft(series), naive_dft(series), atol=1e-9)


def test_dft_constant_series():
    coeffs = dft([2.5] * 8)
    # c_0 of a constant is the constant itself under 1/N normalization
    assert abs(coeffs[0]) == pytest.approx(2.5, abs=1e-12)
    assert np.allclose(coeffs[1:], 0, atol=1e-12)


def test_dft_rejects_bad_input():
    with pytest.raises(ValueError):
        dft([])
    with pytest.raises(ValueError):
        dft([[1.0, 2.0], [3.0, 4.0]])


def test_parseval_gap_small():
    rng = np.random.default_rng(1)
    for _ in range(20):
        series = rng.normal(size=int(rng.integers(4, 65)))
        assert parseval_gap(series) < 1e-9


def trace_from(values, start=1):
    t = SignalTrace("n", start_iteration=start)
    for i, v in enumerate(values):
        t.append(start + i, v)
    return t


def test_trace_append_guards_iteration_order():
    t = SignalTrace("n")
    t.append(1, 0.5)
    t.append(2, 0.6)
    with pytest.raises(ValueError):
        t.append(2, 0.7)
    with pytest.raises(ValueError):
        t.append(9, 0.7)


def test_stable_signal_requires_full_window():
    with pytest.raises(ValueError):
        stable_signal(trace_from([1.0] * 9))


def test_constant_trace_converges_at_window_end():
    sig = stable_signal(trace_from([3.0] * 12))
    assert sig.converged
    assert sig.converged_at == 10  # first full window; iterations are 1-based
    assert sig.value == pytest.approx(3.0, abs=1e-12)


def test_stable_value_uses_configured_coefficient():
    cfg = SignalConfig(coefficient_index=1)
    values = [5.0 + np.cos(2 * np.pi * t / 10) for t in range(10)]
    sig = stable_signal(trace_from(values), cfg)
    # one cosine period across the window: |c_1| = amplitude / 2
    assert sig.value == pytest.approx(0.5, abs=1e-9)


def test_never_converging_trace_uses_final_window():
    values = [2.0 ** i for i in range(15)]
    sig = stable_signal(trace_from(values), SignalConfig(tol=1e-4, window=10))
    assert not sig.converged
    assert sig.converged_at is None
    # mean of the last 10 samples
    assert sig.value == pytest.approx(np.mean(values[-10:]))


def test_convergence_detects_late_settling():
    values = [float(10 - i) for i in range(5)] + [6.0] * 14
    sig = stable_signal(trace_from(values), SignalConfig(tol=1e-4, window=10))
    assert sig.converged
    # last big step lands on iteration 5, so the first window whose checked
    # steps are all quiet ends at 15
    assert sig.converged_at == 15
    assert sig.value == pytest.approx(6.0, abs=1e-12)


def test_start_iteration_offsets_convergence():
    sig = stable_signal(trace_from([1.0] * 10, start=7))
    assert sig.converged_at == 16


@given(st.lists(st.floats(0.1, 100), min_size=4, max_size=32))
def test_parseval_identity_property(values):
    coeffs = dft(values)
    assert float(np.mean(np.square(values))) == pytest.approx(
        float(np.sum(np.abs(coeffs) ** 2)), rel=1e-9
    )


def test_monitor_callback_protocol():
    mon = SignalMonitor(SignalConfig(window=4))
    for t in range(1, 5):
        mon("a", t, np.array([1.0, 0.0]))
        mon("b", t, np.array([0.0, float(t)]))
    assert mon.watched == {"a", "b"}
    assert not mon.all_converged()  # b keeps growing
    sigs = mon.stable_signals()
    assert sigs["a"].value == pytest.approx(1.0)
    assert sigs["a"].converged and sigs["a"].converged_at == 4
    assert sigs["b"].value == pytest.approx(2.5)
    assert not sigs["b"].converged


def test_monitor_explicit_watch_list():
    mon = SignalMonitor(SignalConfig(window=3), watch=["a", "b"])
    for t in range(1, 4):
        mon("a", t, np.array([1.0]))
    assert mon.watched == {"a", "b"}
    assert not mon.all_converged()  # b never reported


def test_monitor_all_converged_constant_embeddings():
    mon = SignalMonitor(SignalConfig(window=4))
    for t in range(1, 6):
        mon("a", t, np.array([2.0, 0.0]))
    assert mon.all_converged()
    assert mon.initial_values()["a"] == pytest.approx(2.0)
    assert mon.stable_signals()["a"].converged_at == 4


def test_traces_csv_layout():
    text = traces_csv({"n": trace_from([1.0, 2.0])})
    lines = text.splitlines()
    assert lines[0] == "node_id,iteration,sample"
    assert lines[1] == "n,1,1.0"
    assert len(lines) == 3
