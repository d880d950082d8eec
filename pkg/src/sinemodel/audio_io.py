"""WAV, CSV, and JSON serialization.

JSON schemas (all floats are plain JSON numbers, round-trip exact):

  partial tracks   {"type": "partial_tracks", "fs": <Hz or null>,
                    "tracks": [{"times": [...], "amps": [...],
                                "freqs": [...], "phases": [...]}, ...]}
  damped frames    {"type": "edsm_frames", "fs": <Hz>,
                    "frames": [{"start": i, "length": n, "k_eff": k,
                                "components": [{"a":, "delta_per_sample":,
                                                "freq_hz":, "phase":}, ...]}]}
  adaptive run     {"type": "eaqhm_analysis", "fs": <Hz>, "iterations": n,
                    "srer_history": [...], "tracks": <as partial_tracks>}
"""
from __future__ import annotations

import csv
import json
from typing import Iterable, Sequence

import numpy as np
from scipy.io import wavfile

from .core import PartialTrack, SampledSignal
from .edsm import DampedSinusoid, EDSMFrame
from .errors import AudioIOError
from .pitch import F0Track

_INT16_FULL = 32767.0


# ---------------------------------------------------------------------------
# WAV
# ---------------------------------------------------------------------------

def read_wav(path) -> SampledSignal:
    """Read a mono 16-bit PCM or 32-bit float WAV as float64 in [-1, 1)."""
    try:
        fs, data = wavfile.read(path)
    except FileNotFoundError as exc:
        raise AudioIOError(f"cannot open WAV file: {exc}") from exc
    except Exception as exc:  # wavfile raises ValueError on unsupported codecs
        raise AudioIOError(f"cannot parse WAV file {path}: {exc}") from exc
    if data.ndim != 1:
        raise AudioIOError(
            f"{path}: expected mono audio, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        x = np.maximum(data.astype(np.float64) / _INT16_FULL, -1.0)
    elif data.dtype == np.float32:
        x = data.astype(np.float64)
    else:
        raise AudioIOError(
            f"{path}: unsupported sample format {data.dtype}; "
            "need 16-bit PCM or 32-bit float")
    return SampledSignal(samples=x, fs=float(fs))


def write_wav(path, signal: SampledSignal) -> None:
    """Write 16-bit PCM: samples clipped to [-1, 1] and scaled by 32767 with
    round-to-nearest, so a read-back differs by less than 1/32768."""
    x = np.clip(signal.samples, -1.0, 1.0)
    pcm = np.round(x * _INT16_FULL).astype(np.int16)
    try:
        wavfile.write(path, int(round(signal.fs)), pcm)
    except OSError as exc:
        raise AudioIOError(f"cannot write WAV file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Comma-separated, header row first, floats at 6 significant digits."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise AudioIOError(f"cannot write CSV file {path}: {exc}") from exc


def write_f0_csv(path, track: F0Track) -> None:
    """Two columns (time s, f0 Hz); unvoiced frames carry f0 = 0."""
    rows = [(t, f if v else 0.0)
            for t, f, v in zip(track.times, track.f0, track.voiced)]
    write_csv(path, ("time_s", "f0_hz"), rows)


def read_f0_csv(path) -> F0Track:
    """Inverse of write_f0_csv; any row with f0 > 0 counts as voiced."""
    times: list[float] = []
    f0: list[float] = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise AudioIOError(f"{path}: empty f0 CSV")
            for row in reader:
                if not row:
                    continue
                times.append(float(row[0]))
                f0.append(float(row[1]))
    except OSError as exc:
        raise AudioIOError(f"cannot read f0 CSV {path}: {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise AudioIOError(f"{path}: malformed f0 CSV: {exc}") from exc
    if not times:
        raise AudioIOError(f"{path}: f0 CSV has no data rows")
    f0_arr = np.asarray(f0, dtype=np.float64)
    voiced = f0_arr > 0
    # unvoiced rows need a positive placeholder to satisfy track validation
    if voiced.any():
        fill = float(f0_arr[voiced].mean())
    else:
        fill = 1.0
    f0_arr = np.where(voiced, f0_arr, fill)
    return F0Track(times=np.asarray(times), f0=f0_arr, voiced=voiced)


def write_tracks_csv(path, tracks: Sequence[PartialTrack]) -> None:
    rows = []
    for i, tr in enumerate(tracks):
        for t, a, f, p in zip(tr.times, tr.amps, tr.freqs, tr.phases):
            rows.append((i, t, a, f, p))
    write_csv(path, ("track", "time_s", "amp", "freq_hz", "phase_rad"), rows)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _track_obj(track: PartialTrack) -> dict:
    return {"times": track.times.tolist(), "amps": track.amps.tolist(),
            "freqs": track.freqs.tolist(), "phases": track.phases.tolist()}


def _track_from_obj(obj: dict) -> PartialTrack:
    return PartialTrack(times=np.asarray(obj["times"], dtype=np.float64),
                        amps=np.asarray(obj["amps"], dtype=np.float64),
                        freqs=np.asarray(obj["freqs"], dtype=np.float64),
                        phases=np.asarray(obj["phases"], dtype=np.float64))


def write_tracks_json(path, tracks: Sequence[PartialTrack], fs: float = None,
                      extra: dict = None) -> None:
    payload = {"type": "partial_tracks",
               "fs": None if fs is None else float(fs),
               "tracks": [_track_obj(tr) for tr in tracks]}
    if extra:
        payload.update(extra)
    _dump_json(path, payload)


def read_tracks_json(path) -> list[PartialTrack]:
    obj = _load_json(path)
    try:
        return [_track_from_obj(t) for t in obj["tracks"]]
    except (KeyError, TypeError) as exc:
        raise AudioIOError(f"{path}: malformed track JSON: {exc}") from exc


def write_sm_json(path, tracks: Sequence[PartialTrack], frame_times,
                  peak_lists, fs: float) -> None:
    """Spectral-model dump: partial tracks plus the raw per-frame peak lists."""
    payload = {
        "type": "sm_analysis",
        "fs": float(fs),
        "tracks": [_track_obj(tr) for tr in tracks],
        "frames": [{
            "time": float(t),
            "peaks": [{"freq_hz": p.freq_hz, "amp": p.amp, "phase": p.phase}
                      for p in peaks],
        } for t, peaks in zip(frame_times, peak_lists)],
    }
    _dump_json(path, payload)


def write_eaqhm_json(path, tracks: Sequence[PartialTrack],
                     srer_history: Sequence[float], iterations: int,
                     fs: float) -> None:
    """Adaptive-model dump: final tracks plus the per-iteration SRER history."""
    payload = {
        "type": "eaqhm_analysis",
        "fs": float(fs),
        "iterations": int(iterations),
        "srer_history": [float(s) for s in srer_history],
        "tracks": [_track_obj(tr) for tr in tracks],
    }
    _dump_json(path, payload)


def write_frames_json(path, frames: Sequence[EDSMFrame], fs: float) -> None:
    payload = {
        "type": "edsm_frames",
        "fs": float(fs),
        "frames": [{
            "start": fr.start,
            "length": fr.length,
            "k_eff": fr.k_eff,
            "components": [{"a": c.a, "delta_per_sample": c.delta,
                            "freq_hz": c.freq_hz, "phase": c.phase}
                           for c in fr.components],
        } for fr in frames],
    }
    _dump_json(path, payload)


def read_frames_json(path) -> tuple[list[EDSMFrame], float]:
    obj = _load_json(path)
    try:
        frames = [EDSMFrame(start=int(fr["start"]), length=int(fr["length"]),
                            k_eff=int(fr["k_eff"]),
                            components=tuple(
                                DampedSinusoid(a=c["a"], delta=c["delta_per_sample"],
                                               freq_hz=c["freq_hz"], phase=c["phase"])
                                for c in fr["components"]))
                  for fr in obj["frames"]]
        return frames, float(obj["fs"])
    except (KeyError, TypeError) as exc:
        raise AudioIOError(f"{path}: malformed frame JSON: {exc}") from exc


def _dump_json(path, payload: dict) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise AudioIOError(f"cannot write JSON file {path}: {exc}") from exc


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise AudioIOError(f"cannot read JSON file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise AudioIOError(f"{path}: invalid JSON: {exc}") from exc
