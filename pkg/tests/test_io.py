"""WAV, CSV and JSON round trips."""
import json

import numpy as np
import pytest
from scipy.io import wavfile

from sinemodel import audio_io
from sinemodel.core import PartialTrack, SampledSignal
from sinemodel.edsm import DampedSinusoid, EDSMFrame
from sinemodel.errors import AudioIOError
from sinemodel.pitch import F0Track

FS = 16000.0


# ---------------------------------------------------------------------------
# WAV
# ---------------------------------------------------------------------------

def test_wav_roundtrip_quantization_bound(tmp_path):
    rng = np.random.default_rng(0)
    x = np.clip(rng.normal(0, 0.3, 5000), -1.0, 1.0)
    sig = SampledSignal(samples=x, fs=FS)
    path = tmp_path / "x.wav"
    audio_io.write_wav(path, sig)
    back = audio_io.read_wav(path)
    assert back.fs == FS
    assert np.max(np.abs(back.samples - x)) <= 1.0 / 32768.0
    assert np.max(np.abs(back.samples)) <= 1.0


def test_wav_float32_read(tmp_path):
    x = np.linspace(-0.5, 0.5, 100, dtype=np.float32)
    path = tmp_path / "f32.wav"
    wavfile.write(path, 22050, x)
    sig = audio_io.read_wav(path)
    assert sig.fs == 22050.0
    np.testing.assert_allclose(sig.samples, x.astype(np.float64), atol=0)


def test_wav_error_paths(tmp_path):
    with pytest.raises(AudioIOError):
        audio_io.read_wav(tmp_path / "missing.wav")
    stereo = tmp_path / "stereo.wav"
    wavfile.write(stereo, 16000, np.zeros((100, 2), dtype=np.int16))
    with pytest.raises(AudioIOError):
        audio_io.read_wav(stereo)
    wide = tmp_path / "wide.wav"
    wavfile.write(wide, 16000, np.zeros(100, dtype=np.int32))
    with pytest.raises(AudioIOError):
        audio_io.read_wav(wide)
    with pytest.raises(AudioIOError):
        audio_io.write_wav(tmp_path / "no" / "dir.wav",
                           SampledSignal(samples=np.zeros(10), fs=FS))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def test_csv_six_significant_digits(tmp_path):
    path = tmp_path / "t.csv"
    audio_io.write_csv(path, ("a", "b"), [(0.123456789, 1234567.0)])
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "0.123457,1.23457e+06"


def test_f0_csv_roundtrip(tmp_path):
    track = F0Track(times=np.array([0.0, 0.005, 0.01]),
                    f0=np.array([150.0, 151.0, 150.5]),
                    voiced=np.array([True, False, True]))
    path = tmp_path / "f0.csv"
    audio_io.write_f0_csv(path, track)
    back = audio_io.read_f0_csv(path)
    np.testing.assert_array_equal(back.voiced, track.voiced)
    np.testing.assert_allclose(back.times, track.times, atol=1e-9)
    # voiced rows keep their value; the unvoiced row is re-filled positive
    np.testing.assert_allclose(back.f0[back.voiced], [150.0, 150.5], atol=1e-3)
    assert back.f0[1] > 0


def test_f0_csv_malformed(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(AudioIOError):
        audio_io.read_f0_csv(empty)
    header_only = tmp_path / "h.csv"
    header_only.write_text("time_s,f0_hz\n")
    with pytest.raises(AudioIOError):
        audio_io.read_f0_csv(header_only)
    bad = tmp_path / "bad.csv"
    bad.write_text("time_s,f0_hz\nnot,numbers\n")
    with pytest.raises(AudioIOError):
        audio_io.read_f0_csv(bad)


def test_tracks_csv(tmp_path):
    tr = PartialTrack(times=[0.0, 0.01], amps=[1.0, 0.5], freqs=[100.0, 101.0],
                      phases=[0.0, 0.3])
    path = tmp_path / "tr.csv"
    audio_io.write_tracks_csv(path, [tr, tr])
    lines = path.read_text().splitlines()
    assert lines[0] == "track,time_s,amp,freq_hz,phase_rad"
    assert len(lines) == 5


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def test_tracks_json_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(1)
    tracks = [PartialTrack(times=np.sort(rng.uniform(0, 1, 5)),
                           amps=rng.uniform(0, 1, 5),
                           freqs=rng.uniform(50, 4000, 5),
                           phases=rng.uniform(-np.pi, np.pi, 5))
              for _ in range(3)]
    path = tmp_path / "tracks.json"
    audio_io.write_tracks_json(path, tracks, fs=FS)
    back = audio_io.read_tracks_json(path)
    assert len(back) == 3
    for a, b in zip(tracks, back):
        # JSON carries full double precision; anchors return bit-identical
        np.testing.assert_array_equal(a.times, b.times)
        np.testing.assert_array_equal(a.amps, b.amps)
        np.testing.assert_array_equal(a.freqs, b.freqs)
        np.testing.assert_array_equal(a.phases, b.phases)


def test_frames_json_roundtrip(tmp_path):
    frames = [EDSMFrame(start=0, length=300, k_eff=4, components=(
        DampedSinusoid(a=0.5, delta=-0.001, freq_hz=440.0, phase=0.2),
        DampedSinusoid(a=0.25, delta=0.0004, freq_hz=880.0, phase=-1.0))),
        EDSMFrame(start=300, length=100, k_eff=0, components=())]
    path = tmp_path / "frames.json"
    audio_io.write_frames_json(path, frames, fs=FS)
    back, fs = audio_io.read_frames_json(path)
    assert fs == FS
    assert back == frames


def test_model_dumps_have_schema_keys(tmp_path):
    tr = PartialTrack(times=[0.0, 0.01], amps=[1.0, 1.0], freqs=[100.0, 100.0],
                      phases=[0.0, 0.3])
    sm_path = tmp_path / "sm.json"
    audio_io.write_sm_json(sm_path, [tr], np.array([0.0]), [[]], FS)
    obj = json.loads(sm_path.read_text())
    assert obj["type"] == "sm_analysis"
    assert obj["frames"][0]["peaks"] == []
    ea_path = tmp_path / "ea.json"
    audio_io.write_eaqhm_json(ea_path, [tr], [10.0, 20.0], 1, FS)
    obj = json.loads(ea_path.read_text())
    assert obj["type"] == "eaqhm_analysis"
    assert obj["iterations"] == 1
    assert obj["srer_history"] == [10.0, 20.0]


def test_json_error_paths(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(AudioIOError):
        audio_io.read_tracks_json(bad)
    wrong = tmp_path / "wrong.json"
    wrong.write_text('{"type": "partial_tracks"}')
    with pytest.raises(AudioIOError):
        audio_io.read_tracks_json(wrong)
    with pytest.raises(AudioIOError):
        audio_io.read_frames_json(tmp_path / "missing.json")
