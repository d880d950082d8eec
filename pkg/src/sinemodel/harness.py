"""Benchmark harness: SRER-vs-window sweeps and multi-model comparisons.

Window sizes in a sweep are expressed as multiples of the signal's minimum
period T_min (the period of its lowest-frequency component) and converted to
odd sample counts, rounding up so a multiple of exactly 2 still clears the
adaptive model's two-period window guard.
"""
from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import PartialTrack, SampledSignal, srer, synthesize_tracks
from .eaqhm import EaQHMConfig, adapt, init_harmonic
from .edsm import EDSMConfig, EDSMFrame, edsm_analyze, edsm_synthesize
from .errors import IllConditionedError, UsageError
from .generators import AMFMSpec, ChirpSpec, gen_amfm, gen_stationary_plus_chirp
from .pitch import F0Track, average_pitch_period, estimate_f0
from .sm import SMConfig, sm_analyze, sm_synthesize

MODELS = ("sm", "edsm", "eaqhm")
CELL_STATUSES = ("ok", "ill_conditioned", "failed")


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    source: str                       # "chirp", "amfm", or a WAV path
    models: tuple[str, ...] = MODELS
    multiples: tuple[float, ...] = tuple(np.arange(1, 11) * 0.5)
    t_min_s: float = None             # inferred for the named generators
    hop_ms: float = 1.0
    partials: dict = field(default_factory=dict)  # per-model counts; None = full band
    seed: int = 0
    fs: float = 16000.0
    max_workers: int = 4

    def __post_init__(self):
        if self.t_min_s is not None and self.t_min_s <= 0:
            raise UsageError("t_min_s must be positive")
        mult = tuple(float(m) for m in self.multiples)
        if not mult or any(m <= 0 for m in mult) or list(mult) != sorted(mult):
            raise UsageError("multiples must be positive and ascending")
        object.__setattr__(self, "multiples", mult)
        bad = [m for m in self.models if m not in MODELS]
        if bad:
            raise UsageError(f"unknown model(s): {', '.join(bad)}")


@dataclass(frozen=True)
class SweepCell:
    model: str
    multiple: float
    srer_db: float          # None when the cell did not produce a result
    status: str

    def __post_init__(self):
        if self.status not in CELL_STATUSES:
            raise UsageError(f"invalid cell status {self.status!r}")


@dataclass(frozen=True)
class SRERCurve:
    rows: tuple[SweepCell, ...]

    def cell(self, model: str, multiple: float) -> SweepCell:
        for row in self.rows:
            if row.model == model and math.isclose(row.multiple, multiple):
                return row
        raise KeyError((model, multiple))


def parse_multiples(text: str) -> tuple[float, ...]:
    """Either "start:step:stop" (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start_s, step_s, stop_s = text.split(":")
            start, step, stop = float(start_s), float(step_s), float(stop_s)
            if step <= 0:
                raise ValueError("step must be positive")
            return tuple(np.arange(start, stop + step / 2, step).tolist())
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"cannot parse window multiples {text!r}: {exc}") from exc


def sweep_window_samples(multiple: float, t_min_s: float, fs: float) -> int:
    """Odd sample count covering at least `multiple` minimum periods."""
    return 2 * math.ceil(multiple * t_min_s * fs / 2.0) + 1


_GENERATOR_DEFAULTS = {
    # t_min (s), pitch search band (Hz), per-model partial counts
    "chirp": (1.0 / 100.0, (80.0, 1050.0), {"sm": 1, "edsm": 1, "eaqhm": 1}),
    "amfm": (1.0 / 150.0, (70.0, 400.0), {"sm": 10, "edsm": None, "eaqhm": None}),
}


def _resolve_source(spec: SweepSpec):
    if spec.source in _GENERATOR_DEFAULTS:
        t_min, band, counts = _GENERATOR_DEFAULTS[spec.source]
        if spec.source == "chirp":
            signal, _ = gen_stationary_plus_chirp(ChirpSpec(fs=spec.fs))
        else:
            signal, _ = gen_amfm(AMFMSpec(fs=spec.fs, seed=spec.seed))
    else:
        from .audio_io import read_wav
        signal = read_wav(spec.source)
        t_min, band, counts = spec.t_min_s, (70.0, 400.0), {}
        if t_min is None:
            raise UsageError("t_min_s is required for WAV sweep sources")
    if spec.t_min_s is not None:
        t_min = spec.t_min_s
    counts = dict(counts)
    counts.update(spec.partials)
    return signal, t_min, band, counts


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def _full_band_orders(f0track: F0Track, signal: SampledSignal,
                      window: int) -> list[int]:
    n = signal.samples.shape[0]
    orders = []
    for start in range(0, n, window):
        center = min(start + window // 2, n - 1)
        f0 = max(float(f0track.f0_at(center / signal.fs)), 1.0)
        orders.append(max(1, int(signal.fs / (2.0 * f0))))
    return orders


def _sweep_cell(signal: SampledSignal, f0track: F0Track, model: str,
                multiple: float, t_min: float, spec: SweepSpec,
                counts: dict) -> SweepCell:
    w = sweep_window_samples(multiple, t_min, spec.fs)
    n = signal.samples.shape[0]
    count = counts.get(model)
    try:
        if model == "sm":
            cfg = SMConfig(window_samples=w, window_kind="hamming",
                           hop_ms=spec.hop_ms,
                           fft_size=max(2048, _next_pow2(w)),
                           max_peaks=count if count else 100)
            tracks = sm_analyze(signal, cfg)
            y = sm_synthesize(tracks, n, signal.fs)
        elif model == "edsm":
            order = count if count else _full_band_orders(f0track, signal, w)
            # sweeps follow the known-order convention: the requested order
            # is used as-is, with no rank-based trimming
            cfg = EDSMConfig(window_samples=w, order=order, rank_rtol=0.0)
            frames = edsm_analyze(signal, cfg)
            y = edsm_synthesize(frames, n, signal.fs)
        else:
            cfg = EaQHMConfig(hop_ms=spec.hop_ms, window_samples=w,
                              init_window_kind="hamming",
                              adapt_window_kind="hamming",
                              max_partials=count,
                              f_guard_hz=1.0 / t_min)
            state = adapt(signal, init_harmonic(signal, f0track, cfg), f0track, cfg)
            y = synthesize_tracks(state.tracks, n, signal.fs)
        return SweepCell(model=model, multiple=multiple,
                         srer_db=srer(signal.samples, y), status="ok")
    except IllConditionedError:
        return SweepCell(model=model, multiple=multiple, srer_db=None,
                         status="ill_conditioned")
    except Exception:
        return SweepCell(model=model, multiple=multiple, srer_db=None,
                         status="failed")


def run_window_sweep(spec: SweepSpec) -> SRERCurve:
    """One SRER cell per (model, window multiple).

    Cells run on a bounded worker pool; assembly order follows the spec
    (model-major, then multiples ascending) regardless of completion order.
    A failing cell never aborts the sweep: it carries status
    "ill_conditioned" (window below the adaptive model's conditioning
    bound) or "failed".
    """
    signal, t_min, band, counts = _resolve_source(spec)
    f0track = None
    if "eaqhm" in spec.models or "edsm" in spec.models:
        f0track = estimate_f0(signal, f_min=band[0], f_max=band[1])
    jobs = [(model, multiple) for model in spec.models
            for multiple in spec.multiples]
    # warning filters are process-global, so suppress per-frame conditioning
    # chatter here rather than racing catch_warnings across worker threads
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", category=RuntimeWarning)
        with ThreadPoolExecutor(max_workers=spec.max_workers) as pool:
            futures = [pool.submit(_sweep_cell, signal, f0track, model, multiple,
                                   t_min, spec, counts)
                       for model, multiple in jobs]
            rows = tuple(f.result() for f in futures)
    return SRERCurve(rows=rows)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    file_id: str
    status: str                      # "ok" or "unanalyzable"
    srer_db: dict = field(default_factory=dict)      # model -> dB
    param_counts: dict = field(default_factory=dict)  # model -> synthesis params
    wall_time_s: dict = field(default_factory=dict)   # model -> seconds


def _track_param_count(tracks: Sequence[PartialTrack]) -> int:
    # 3 per anchor: amplitude, frequency, phase
    return sum(3 * tr.times.shape[0] for tr in tracks)


def _frame_param_count(frames: Sequence[EDSMFrame]) -> int:
    # 4 per component: amplitude, damping, frequency, phase
    return sum(4 * len(fr.components) for fr in frames)


def compare_configs(signal: SampledSignal, f0track: F0Track):
    """Per-model analysis settings for the comparison protocol: SM with a
    30 ms Hann window, 1 ms hop, 2048-point FFT and up to 100 peaks; the
    adaptive model on 3 local pitch periods, Blackman initialization and
    Hamming adaptation, at most 10 adaptations, full-band harmonics; the
    damped model on non-overlapping rectangular windows of 0.75 average
    pitch periods with full-band order fs/(2 f0_local)."""
    sm_cfg = SMConfig(window_ms=30.0, window_kind="hann", hop_ms=1.0,
                      fft_size=2048, max_peaks=100)
    ea_cfg = EaQHMConfig(hop_ms=1.0, window_periods=3.0,
                         init_window_kind="blackman",
                         adapt_window_kind="hamming",
                         max_partials=None, max_adaptations=10)
    period_s = average_pitch_period(f0track)
    window = max(8, int(round(0.75 * period_s * signal.fs)))
    orders = _full_band_orders(f0track, signal, window)
    ed_cfg = EDSMConfig(window_samples=window, order=orders)
    return sm_cfg, ed_cfg, ea_cfg


def _run_model(model: str, signal: SampledSignal, f0track: F0Track,
               sm_cfg, ed_cfg, ea_cfg) -> tuple[float, int, float]:
    n = signal.samples.shape[0]
    t0 = time.perf_counter()
    if model == "sm":
        tracks = sm_analyze(signal, sm_cfg)
        y = sm_synthesize(tracks, n, signal.fs)
        params = _track_param_count(tracks)
    elif model == "edsm":
        frames = edsm_analyze(signal, ed_cfg)
        y = edsm_synthesize(frames, n, signal.fs)
        params = _frame_param_count(frames)
    else:
        state = adapt(signal, init_harmonic(signal, f0track, ea_cfg), f0track, ea_cfg)
        y = synthesize_tracks(state.tracks, n, signal.fs)
        params = _track_param_count(state.tracks)
    elapsed = time.perf_counter() - t0
    return srer(signal.samples, y), params, elapsed


def run_comparison(files: Sequence, models: Sequence[str] = MODELS,
                   f_min: float = 70.0, f_max: float = 400.0) -> list[ComparisonRow]:
    """SRER/parameter-count/wall-time table, one row per input file.

    A file whose pitch cannot be tracked is kept in the table with status
    "unanalyzable" instead of aborting the run.
    """
    from .audio_io import read_wav
    rows: list[ComparisonRow] = []
    for path in files:
        file_id = str(path)
        signal = read_wav(path)
        try:
            f0track = estimate_f0(signal, f_min=f_min, f_max=f_max)
            if not f0track.any_voiced:
                raise UsageError("no voiced frames")
            sm_cfg, ed_cfg, ea_cfg = compare_configs(signal, f0track)
        except Exception:
            rows.append(ComparisonRow(file_id=file_id, status="unanalyzable"))
            continue
        srer_db: dict = {}
        params: dict = {}
        times: dict = {}
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", category=RuntimeWarning)
            for model in models:
                try:
                    s, p, dt = _run_model(model, signal, f0track, sm_cfg, ed_cfg, ea_cfg)
                except Exception:
                    s, p, dt = None, None, None
                srer_db[model] = s
                params[model] = p
                times[model] = dt
        rows.append(ComparisonRow(file_id=file_id, status="ok", srer_db=srer_db,
                                  param_counts=params, wall_time_s=times))
    return rows


def generate_standins(dir_path, fs: float = 16000.0, seed: int = 0) -> list[str]:
    """Write the three local quasi-harmonic stand-in WAVs used when no
    comparison file list is supplied: a harmonic tone with vibrato, the
    default AM-FM sum, and a decaying damped-sinusoid stack.  Returns the
    file paths."""
    import os

    from .audio_io import write_wav
    from .generators import default_damped_spec, gen_damped_sum

    def _norm(signal: SampledSignal) -> SampledSignal:
        # peak-normalize to 0.5 so 16-bit storage never clips; SRER is
        # scale-invariant so the comparison is unaffected
        peak = float(np.max(np.abs(signal.samples)))
        return SampledSignal(samples=signal.samples * (0.5 / peak), fs=signal.fs)

    vibrato, _ = gen_amfm(AMFMSpec(n_partials=8, f0=220.0, f_c=5.0, rho=0.8,
                                   fs=fs, seed=seed))
    amfm, _ = gen_amfm(AMFMSpec(fs=fs, seed=seed))
    damped, _ = gen_damped_sum(default_damped_spec(seed=seed, fs=fs))
    paths = []
    for name, signal in (("vibrato.wav", vibrato), ("amfm_default.wav", amfm),
                         ("damped_sum.wav", damped)):
        path = os.path.join(dir_path, name)
        write_wav(path, _norm(signal))
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def export(data, path, fmt: str = "csv") -> None:
    """Write an SRERCurve, comparison table, or track list as CSV or JSON.

    CSV output renders a missing SRER (ill-conditioned cell) as 0 so curve
    files plot directly; JSON keeps it as null.
    """
    from . import audio_io
    if fmt not in ("csv", "json"):
        raise UsageError(f"unsupported export format {fmt!r}")
    if isinstance(data, SRERCurve):
        if fmt == "csv":
            if not data.rows:
                raise UsageError("cannot export an empty curve as CSV")
            audio_io.write_csv(
                path, ("model", "multiple", "srer_db", "status"),
                [(r.model, r.multiple, 0.0 if r.srer_db is None else r.srer_db,
                  r.status) for r in data.rows])
        else:
            audio_io._dump_json(path, {
                "type": "srer_curve",
                "rows": [{"model": r.model, "multiple": r.multiple,
                          "srer_db": r.srer_db, "status": r.status}
                         for r in data.rows]})
        return
    if isinstance(data, (list, tuple)) and data and isinstance(data[0], ComparisonRow):
        models = sorted({m for r in data for m in r.srer_db})
        header = ["file", "status"]
        for m in models:
            header += [f"{m}_srer_db", f"{m}_params", f"{m}_time_s"]
        table = []
        for r in data:
            row = [r.file_id, r.status]
            for m in models:
                row += [_blank(r.srer_db.get(m)), _blank(r.param_counts.get(m)),
                        _blank(r.wall_time_s.get(m))]
            table.append(row)
        if fmt == "csv":
            audio_io.write_csv(path, header, table)
        else:
            audio_io._dump_json(path, {
                "type": "comparison_table",
                "rows": [{"file": r.file_id, "status": r.status,
                          "srer_db": r.srer_db, "param_counts": r.param_counts,
                          "wall_time_s": r.wall_time_s} for r in data]})
        return
    if isinstance(data, (list, tuple)) and (
            not data or isinstance(data[0], PartialTrack)):
        if fmt == "csv":
            if not data:
                raise UsageError("cannot export empty tracks as CSV")
            audio_io.write_tracks_csv(path, data)
        else:
            audio_io.write_tracks_json(path, data)
        return
    raise UsageError(f"cannot export object of type {type(data).__name__}")


def _blank(value):
    return "" if value is None else value
