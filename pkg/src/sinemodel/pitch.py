"""Autocorrelation fundamental-frequency tracking.

Per frame: remove the mean, compute the normalized autocorrelation over the
lag range [fs/f_max, fs/f_min], and take the smallest lag whose local
maximum comes within 10% of the global peak (this prefers the true period
over its multiples).  The lag is refined parabolically.  Frames whose peak
correlation falls below the voicing threshold are unvoiced; unvoiced frames
inherit the nearest voiced f0 so windowing decisions downstream always have
a usable value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import medfilt

from . import _kernels
from .core import SampledSignal
from .errors import AnalysisError, UsageError

VOICING_THRESHOLD = 0.3
_PEAK_KEEP = 0.9        # local maxima within this fraction of the global peak compete
_MEDFILT_FRAMES = 5


@dataclass(frozen=True)
class F0Track:
    times: np.ndarray   # frame centers, s
    f0: np.ndarray      # Hz; unvoiced frames carry the nearest voiced value
    voiced: np.ndarray  # bool per frame

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        f0 = np.asarray(self.f0, dtype=np.float64)
        voiced = np.asarray(self.voiced, dtype=bool)
        if not (times.shape == f0.shape == voiced.shape) or times.ndim != 1:
            raise UsageError("time/f0/voiced arrays must be matching 1-D arrays")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "voiced", voiced)

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def any_voiced(self) -> bool:
        return bool(np.any(self.voiced))

    def f0_at(self, t) -> np.ndarray:
        """Linear interpolation of the filled f0 curve at arbitrary times."""
        return np.interp(np.asarray(t, dtype=np.float64), self.times, self.f0)


def _pick_lag(r: np.ndarray, lo: int) -> tuple[float, float]:
    """Smallest-lag local maximum within _PEAK_KEEP of the global peak,
    parabolically refined.  Returns (lag, correlation)."""
    n = r.shape[0]
    g = float(np.max(r))
    if g <= 0:
        return 0.0, g
    keep = _PEAK_KEEP * g
    for j in range(1, n - 1):
        if r[j] > r[j - 1] and r[j] > r[j + 1] and r[j] >= keep:
            a, b, c = r[j - 1], r[j], r[j + 1]
            den = a - 2.0 * b + c
            p = 0.0 if den == 0.0 else float(np.clip(0.5 * (a - c) / den, -0.5, 0.5))
            return lo + j + p, float(b - 0.25 * (a - c) * p)
    j = int(np.argmax(r))
    return float(lo + j), g


def estimate_f0(signal: SampledSignal, f_min: float = 60.0, f_max: float = 500.0,
                hop_ms: float = 5.0,
                voicing_threshold: float = VOICING_THRESHOLD) -> F0Track:
    """Frame-wise autocorrelation pitch track.

    Needs at least 2/f_min seconds of signal.  The returned track is
    median-filtered over 5 frames and never locks onto a frequency outside
    [f_min, f_max].
    """
    if not (0 < f_min < f_max):
        raise UsageError(f"need 0 < f_min < f_max, got {f_min}, {f_max}")
    x = signal.samples
    fs = signal.fs
    if f_max >= fs / 2:
        raise UsageError(f"f_max {f_max} must be below Nyquist")
    lag_min = max(1, int(np.floor(fs / f_max)))
    lag_max = int(np.ceil(fs / f_min))
    frame_len = 2 * lag_max
    if x.shape[0] < frame_len:
        raise UsageError(f"signal too short for f_min={f_min} Hz "
                         f"(need {frame_len} samples, got {x.shape[0]})")
    hop = max(1, int(round(hop_ms * fs / 1000.0)))
    # widen the search two lags each side so edge peaks stay interior
    lo = max(1, lag_min - 2)
    hi = min(frame_len - 2, lag_max + 2)
    starts = np.arange(0, x.shape[0] - frame_len + 1, hop)
    times = (starts + frame_len / 2.0) / fs
    f0 = np.zeros(starts.shape[0])
    voiced = np.zeros(starts.shape[0], dtype=bool)
    for i, s in enumerate(starts):
        frame = x[s:s + frame_len]
        frame = frame - np.mean(frame)
        r = _kernels.autocorr_norm(frame, lo, hi)
        lag, corr = _pick_lag(r, lo)
        if corr >= voicing_threshold and lag > 0:
            cand = fs / lag
            if f_min <= cand <= f_max:
                f0[i] = cand
                voiced[i] = True
    if np.any(voiced):
        vi = np.flatnonzero(voiced)
        # unvoiced frames inherit the nearest voiced estimate
        nearest = vi[np.argmin(np.abs(np.arange(f0.shape[0])[:, None] - vi[None, :]),
                               axis=1)]
        f0 = f0[nearest]
        if f0.shape[0] >= _MEDFILT_FRAMES:
            f0 = medfilt(f0, _MEDFILT_FRAMES)
        f0 = np.clip(f0, f_min, f_max)
    return F0Track(times=times, f0=f0, voiced=voiced)


def average_pitch_period(track: F0Track) -> float:
    """Mean voiced pitch period in seconds."""
    if not track.any_voiced:
        raise AnalysisError("average pitch period undefined: no voiced frames")
    return float(np.mean(1.0 / track.f0[track.voiced]))
