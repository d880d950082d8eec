"""Windows, SRER, interpolation and track synthesis."""
import numpy as np
import pytest

from sinemodel.core import (SRER_MAX_DB, FrameGrid, PartialTrack, SampledSignal,
                            interp_amplitude_linear, interp_frequency_spline,
                            make_window, phase_by_freq_integration,
                            phase_cubic_mq, sample_track, srer,
                            synthesize_tracks, wrap_phase)
from sinemodel.errors import UsageError

FS = 16000.0


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

def test_sampled_signal_validation():
    with pytest.raises(UsageError):
        SampledSignal(samples=np.zeros((4, 2)), fs=FS)
    with pytest.raises(UsageError):
        SampledSignal(samples=np.array([]), fs=FS)
    with pytest.raises(UsageError):
        SampledSignal(samples=np.array([0.0, np.nan]), fs=FS)
    with pytest.raises(UsageError):
        SampledSignal(samples=np.zeros(4), fs=0.0)
    sig = SampledSignal(samples=[0, 1, 0, -1], fs=4.0)
    assert len(sig) == 4
    assert sig.duration == pytest.approx(1.0)
    assert sig.samples.dtype == np.float64


def test_partial_track_validation():
    with pytest.raises(UsageError):
        PartialTrack(times=np.array([]), amps=np.array([]),
                     freqs=np.array([]), phases=np.array([]))
    with pytest.raises(UsageError):  # non-increasing times
        PartialTrack(times=[0.0, 0.0], amps=[1, 1], freqs=[100, 100], phases=[0, 0])
    with pytest.raises(UsageError):  # negative amplitude
        PartialTrack(times=[0.0, 1.0], amps=[1, -1], freqs=[100, 100], phases=[0, 0])
    with pytest.raises(UsageError):  # zero frequency
        PartialTrack(times=[0.0, 1.0], amps=[1, 1], freqs=[0, 100], phases=[0, 0])
    tr = PartialTrack(times=[0.5, 1.0], amps=[1, 1], freqs=[100, 100], phases=[0, 0])
    assert tr.birth == 0.5 and tr.death == 1.0


def test_frame_grid():
    grid = FrameGrid(centers=[10, 30], half_lengths=[8, 8], hop=20)
    assert len(grid) == 2
    assert grid.bounds(0, 100) == (2, 19)
    assert grid.bounds(0, 15) == (2, 15)  # clipped at the signal end
    with pytest.raises(UsageError):
        FrameGrid(centers=[30, 10], half_lengths=[8, 8], hop=20)
    with pytest.raises(UsageError):
        FrameGrid(centers=[10], half_lengths=[8], hop=0)


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

def test_make_window_rectangular():
    w = make_window("rectangular", 5)
    np.testing.assert_array_equal(w.values, np.ones(5))


def test_make_window_hamming_shape():
    w = make_window("hamming", 5).values
    assert w[2] == pytest.approx(1.0)
    assert w[0] == pytest.approx(0.08, abs=1e-12)
    assert w[0] == w[4]


def test_make_window_symmetry_and_range():
    for kind in ("hamming", "hann", "blackman", "rectangular"):
        w = make_window(kind, 7).values
        np.testing.assert_allclose(w, w[::-1], atol=1e-15)
        assert np.all(w >= -1e-15) and np.all(w <= 1.0 + 1e-15)
    assert make_window("hann", 7).values[1] == pytest.approx(make_window("hann", 7).values[5])


def test_make_window_errors():
    with pytest.raises(UsageError):
        make_window("kaiser", 5)
    with pytest.raises(UsageError):
        make_window("hann", 0)


# ---------------------------------------------------------------------------
# srer
# ---------------------------------------------------------------------------

def test_srer_zero_reconstruction_of_zero_mean_signal():
    x = np.sin(np.linspace(0, 20, 1000))
    x -= x.mean()
    assert srer(x, np.zeros_like(x)) == pytest.approx(0.0, abs=1e-9)


def test_srer_exact_reconstruction_sentinel():
    x = np.sin(np.linspace(0, 20, 1000))
    assert srer(x, x.copy()) == SRER_MAX_DB


def test_srer_matches_direct_formula():
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.normal(size=500)
        s = x + rng.normal(scale=10 ** rng.uniform(-6, -1), size=500)
        expect = 20.0 * np.log10(np.std(x) / np.std(x - s))
        assert srer(x, s) == pytest.approx(expect, abs=1e-9)


def test_srer_accepts_signals_and_checks_lengths():
    sig = SampledSignal(samples=np.sin(np.arange(100)), fs=FS)
    assert srer(sig, sig) == SRER_MAX_DB
    with pytest.raises(UsageError):
        srer(np.zeros(10), np.zeros(11))


def test_wrap_phase_range():
    phi = wrap_phase(np.array([0.0, np.pi, -np.pi, 7 * np.pi, -9.5]))
    assert np.all(phi > -np.pi - 1e-12) and np.all(phi <= np.pi + 1e-12)
    assert wrap_phase(7 * np.pi) == pytest.approx(np.pi)


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------

def test_interp_amplitude_linear():
    t = np.array([0.0, 1.0])
    a = np.array([1.0, 3.0])
    assert interp_amplitude_linear(t, a, np.array([0.5]))[0] == pytest.approx(2.0)
    # constant extension outside the span
    np.testing.assert_allclose(interp_amplitude_linear(t, a, np.array([-1.0, 2.0])),
                               [1.0, 3.0])
    assert interp_amplitude_linear([0.0], [0.7], np.array([5.0]))[0] == 0.7
    with pytest.raises(UsageError):
        interp_amplitude_linear(np.array([]), np.array([]), np.array([0.0]))


def test_interp_frequency_spline_reproduces_linear_and_constant():
    t = np.linspace(0, 1, 11)
    line = 100.0 + 50.0 * t
    te = np.linspace(0, 1, 101)
    np.testing.assert_allclose(interp_frequency_spline(t, line, te),
                               100.0 + 50.0 * te, atol=1e-9)
    np.testing.assert_allclose(interp_frequency_spline(t, np.full(11, 440.0), te),
                               440.0, atol=1e-12)
    assert interp_frequency_spline([0.0], [440.0], np.array([9.0]))[0] == 440.0


def test_interp_frequency_spline_exact_at_anchors():
    rng = np.random.default_rng(3)
    t = np.sort(rng.uniform(0, 1, 9))
    f = rng.uniform(100, 200, 9)
    np.testing.assert_allclose(interp_frequency_spline(t, f, t), f, atol=1e-10)


def test_interp_frequency_spline_sinusoidal_law():
    """1 ms anchors resolve a slow sinusoidal frequency law to under 1% of
    its modulation depth; a 300 Hz law (3.3 anchors per cycle) is beyond
    cubic-spline reach and is held to the measured 20% ceiling instead."""
    for f_mod, bound in ((20.0, 0.01), (300.0, 0.20)):
        anchors = np.arange(0.0, 0.5, 0.001)
        depth_half = 3.0 * 0.01 * f_mod
        law = lambda t: 450.0 - depth_half * np.sin(2 * np.pi * f_mod * t)
        te = np.arange(0.0, 0.499, 1.0 / FS)
        est = interp_frequency_spline(anchors, law(anchors), te)
        err = np.max(np.abs(est - law(te))) / (2 * depth_half)
        assert err < bound


# ---------------------------------------------------------------------------
# phase models
# ---------------------------------------------------------------------------

def test_phase_integration_constant_frequency():
    freq = np.full(161, 100.0)
    ph = phase_by_freq_integration(freq, FS, phi0=0.0)
    assert ph[160] == pytest.approx(2 * np.pi, abs=1e-10)


def test_phase_integration_zero_frequency():
    ph = phase_by_freq_integration(np.zeros(100), FS, phi0=0.4)
    np.testing.assert_allclose(ph, 0.4)


def test_phase_integration_chirp_matches_closed_form():
    n = 16001
    t = np.arange(n) / FS
    freq = 100.0 + 900.0 * t
    ph = phase_by_freq_integration(freq, FS)
    exact = 2 * np.pi * (100.0 * t + 450.0 * t * t)
    assert np.max(np.abs(ph - exact)) < 1e-3


def test_phase_integration_anchor_reconciliation():
    n = 400
    freq = np.full(n, 123.0)
    idx = np.array([0, 150, 399])
    # anchors deliberately offset from the pure integral
    tgt = np.array([0.2, 1.0, 2.5])
    ph = phase_by_freq_integration(freq, FS, phi0=0.0,
                                   anchor_idx=idx, anchor_phases=tgt)
    for i, p in zip(idx, tgt):
        assert wrap_phase(ph[i] - p) == pytest.approx(0.0, abs=1e-9)
    # continuity: no sample-to-sample jump beyond the reconciliation slope
    assert np.max(np.abs(np.diff(ph))) < 0.1


def test_phase_integration_anchor_validation():
    with pytest.raises(UsageError):
        phase_by_freq_integration(np.zeros(10), FS, anchor_idx=np.array([3]),
                                  anchor_phases=np.array([0.0, 1.0]))
    with pytest.raises(UsageError):
        phase_by_freq_integration(np.zeros(10), FS, anchor_idx=np.array([99]),
                                  anchor_phases=np.array([0.0]))


def test_phase_cubic_degenerates_to_linear():
    f = 100.0
    dt = 0.01
    phi2 = 2 * np.pi * f * dt  # consistent with constant-frequency advance
    tau = np.linspace(0, dt, 50)
    ph = phase_cubic_mq(dt, 0.0, f, phi2, f, tau)
    np.testing.assert_allclose(ph, 2 * np.pi * f * tau, atol=1e-9)


def test_phase_cubic_endpoint_conditions():
    dt = 0.005
    phi1, f1, phi2, f2 = 0.3, 100.0, 2.0, 140.0
    tau = np.array([0.0, dt])
    ph = phase_cubic_mq(dt, phi1, f1, phi2, f2, tau)
    assert ph[0] == pytest.approx(phi1)
    assert wrap_phase(ph[1] - phi2) == pytest.approx(0.0, abs=1e-9)
    # endpoint derivatives: finite differences at both ends
    eps = 1e-7
    d0 = np.diff(phase_cubic_mq(dt, phi1, f1, phi2, f2, np.array([0.0, eps])))[0] / eps
    d1 = np.diff(phase_cubic_mq(dt, phi1, f1, phi2, f2, np.array([dt - eps, dt])))[0] / eps
    assert d0 == pytest.approx(2 * np.pi * f1, rel=1e-4)
    assert d1 == pytest.approx(2 * np.pi * f2, rel=1e-4)
    with pytest.raises(UsageError):
        phase_cubic_mq(0.0, phi1, f1, phi2, f2, tau)


def test_cubic_resynthesis_of_stationary_tone():
    n = 8000
    t = np.arange(n) / FS
    x = 0.7 * np.cos(2 * np.pi * 100.0 * t + 0.3)
    anchor_t = np.arange(0, n, 160) / FS
    track = PartialTrack(times=anchor_t, amps=np.full(anchor_t.size, 0.7),
                         freqs=np.full(anchor_t.size, 100.0),
                         phases=0.3 + 2 * np.pi * 100.0 * anchor_t)
    y = synthesize_tracks([track], n, FS, phase_mode="cubic")
    assert srer(x, y) > 60.0


# ---------------------------------------------------------------------------
# track sampling / synthesis
# ---------------------------------------------------------------------------

def _stationary_track(n, f=100.0, a=0.7, phi=0.3, hop=160):
    t = np.arange(0, n, hop) / FS
    return PartialTrack(times=t, amps=np.full(t.size, a), freqs=np.full(t.size, f),
                        phases=phi + 2 * np.pi * f * t)


def test_sample_track_matches_truth():
    n = 4000
    track = _stationary_track(n)
    amp, freq, phase = sample_track(track, FS, 0, n - 1)
    t = np.arange(n) / FS
    np.testing.assert_allclose(amp, 0.7, atol=1e-12)
    np.testing.assert_allclose(freq, 100.0, atol=1e-9)
    x = 0.7 * np.cos(2 * np.pi * 100.0 * t + 0.3)
    assert srer(x, amp * np.cos(phase)) > 100.0


def test_sample_track_beyond_span_advances_at_endpoint_frequency():
    track = PartialTrack(times=[0.0, 0.01], amps=[1.0, 1.0],
                         freqs=[100.0, 100.0], phases=[0.0, 2 * np.pi])
    # a range entirely after the last anchor
    amp, freq, phase = sample_track(track, FS, 320, 480)
    t = np.arange(320, 481) / FS
    np.testing.assert_allclose(phase, 2 * np.pi + 2 * np.pi * 100.0 * (t - 0.01),
                               atol=1e-9)
    # and entirely before the first anchor
    track2 = PartialTrack(times=[0.02, 0.03], amps=[1.0, 1.0],
                          freqs=[100.0, 100.0], phases=[0.0, 2 * np.pi])
    _, _, ph2 = sample_track(track2, FS, 0, 100)
    t2 = np.arange(0, 101) / FS
    np.testing.assert_allclose(ph2, -2 * np.pi * 100.0 * (0.02 - t2), atol=1e-9)


def test_sample_track_interior_gap():
    # evaluation range strictly between two anchors
    track = PartialTrack(times=[0.0, 0.1], amps=[1.0, 1.0],
                         freqs=[100.0, 100.0],
                         phases=[0.0, 2 * np.pi * 100.0 * 0.1])
    amp, freq, phase = sample_track(track, FS, 300, 500)
    t = np.arange(300, 501) / FS
    np.testing.assert_allclose(phase, 2 * np.pi * 100.0 * t, atol=1e-6)
    with pytest.raises(UsageError):
        sample_track(track, FS, 10, 9)


def test_synthesize_tracks_edge_extension():
    n = 4000
    # anchors only in the middle; nonzero boundary amps extend to the edges
    t = np.arange(1000, 3000, 160) / FS
    track = PartialTrack(times=t, amps=np.full(t.size, 1.0),
                         freqs=np.full(t.size, 100.0),
                         phases=2 * np.pi * 100.0 * t)
    y = synthesize_tracks([track], n, FS)
    assert np.max(np.abs(y[:100])) > 0.5  # covered before the first anchor
    assert np.max(np.abs(y[-100:])) > 0.5
    # zero boundary amps (ramp anchors) keep the track inside its span
    track0 = PartialTrack(times=[0.1, 0.11, 0.12], amps=[0.0, 1.0, 0.0],
                          freqs=[100.0] * 3, phases=[0.0, 1.0, 2.0])
    y0 = synthesize_tracks([track0], n, FS)
    assert np.max(np.abs(y0[:1500])) == 0.0
    assert np.max(np.abs(y0[2000:])) == 0.0


def test_synthesize_tracks_rejects_unknown_phase_mode():
    with pytest.raises(UsageError):
        synthesize_tracks([], 100, FS, phase_mode="hermite")


def test_synthesize_tracks_sums_components():
    n = 2000
    tr1 = _stationary_track(n, f=100.0, a=0.5, phi=0.0)
    tr2 = _stationary_track(n, f=317.0, a=0.3, phi=1.0)
    t = np.arange(n) / FS
    x = (0.5 * np.cos(2 * np.pi * 100.0 * t)
         + 0.3 * np.cos(2 * np.pi * 317.0 * t + 1.0))
    for mode in ("freq_integration", "cubic"):
        assert srer(x, synthesize_tracks([tr1, tr2], n, FS, phase_mode=mode)) > 60.0
