"""Extended adaptive quasi-harmonic analysis.

Each frame is fit by weighted least squares against time-modulated basis
functions psi_k(t) = amp_k(t) * exp(i*phase_k(t)) together with their
slope-carrying twins t * psi_k(t); the complex pair (a_k, b_k) then yields a
frequency-mismatch correction eta_k.  Analysis alternates between solving
frames against the basis sampled from the current partial tracks and
re-anchoring the tracks from the solutions, keeping the best-SRER iterate.

Basis columns are normalized per frame: amplitude is divided by its value
at the frame center and phase is zeroed there, so |a_k| and arg(a_k) are
directly the frame-center amplitude and phase anchors.  The LS time
variable is in seconds, which makes eta_k come out in Hz.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .core import (PartialTrack, SampledSignal, make_window, sample_track, srer,
                   synthesize_tracks, wrap_phase)
from .errors import AnalysisError, IllConditionedError, UsageError
from .pitch import F0Track

_AMP_EPS = 1e-10  # guards the per-frame center normalization of dead partials


@dataclass(frozen=True)
class EaQHMConfig:
    hop_ms: float = 1.0
    window_periods: float = 3.0      # pitch-adaptive window span, local f0 periods
    window_samples: int = None       # fixed window (overrides window_periods)
    init_window_kind: str = "blackman"
    adapt_window_kind: str = "hamming"
    max_partials: int = None         # None: full band from the local f0
    max_adaptations: int = 10
    srer_threshold_db: float = 0.1   # stop once an iterate improves by less
    srer_ceiling_db: float = 150.0   # past this, residual is numerical noise
    f_guard_hz: float = None         # conditioning guard; None: local f0
    cond_bound: float = 1e10
    nyquist_margin_hz: float = 200.0
    col_ratio: float = 2.0 / 3.0     # LS columns capped at this fraction of the frame

    def __post_init__(self):
        if self.max_adaptations < 0:
            raise UsageError("max_adaptations must be >= 0")
        if self.window_samples is None and self.window_periods <= 0:
            raise UsageError("window_periods must be positive")


@dataclass(frozen=True)
class BasisFunctionSet:
    """Sampled instantaneous amplitude/phase per component, one column each."""

    amp: np.ndarray    # (n_samples, n_components)
    phase: np.ndarray

    def __post_init__(self):
        if self.amp.shape != self.phase.shape or self.amp.ndim != 2:
            raise UsageError("basis amp/phase must be matching 2-D arrays")


@dataclass(frozen=True)
class QHMFrameSolution:
    """Per-frame complex amplitudes/slopes and frequency corrections, k=0..K."""

    a: np.ndarray    # complex
    b: np.ndarray    # complex
    eta: np.ndarray  # Hz; eta[0] == 0 (the DC component gets no correction)


@dataclass
class AdaptationState:
    iteration: int
    srer_history: list[float] = field(default_factory=list)
    tracks: list[PartialTrack] = field(default_factory=list)


# ---------------------------------------------------------------------------
# least-squares machinery
# ---------------------------------------------------------------------------

def build_ls_system(frame: np.ndarray, basis: BasisFunctionSet, window: np.ndarray,
                    t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Assemble E_e = [E_e0 | E_e1] with (E_e0)_{n,k} = amp_k(t_n) e^{i phase_k(t_n)}
    and E_e1 = t_n * E_e0.  Returns (E_e, window, frame) validated and aligned;
    t is the frame-local time axis in seconds."""
    frame = np.asarray(frame, dtype=np.float64)
    w = window.values if hasattr(window, "values") else np.asarray(window, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    n = frame.shape[0]
    if basis.amp.shape[0] != n or w.shape[0] != n or t.shape[0] != n:
        raise UsageError("frame, basis, window and time axis must share sample count")
    e0 = basis.amp * np.exp(1j * basis.phase)
    return np.hstack([e0, t[:, None] * e0]), w, frame


def ls_solve(e: np.ndarray, window: np.ndarray, target: np.ndarray,
             cond_bound: float = 1e10) -> tuple[np.ndarray, np.ndarray]:
    """Weighted LS solve of target ~ E [a; b] via the normal equations.

    Columns are equilibrated to unit norm first (exact algebra, keeps the
    condition check about basis structure, not units).  Raises
    IllConditionedError carrying LAPACK's condition estimate of the normal
    matrix when it exceeds cond_bound.
    """
    w = window.values if hasattr(window, "values") else np.asarray(window, dtype=np.float64)
    ew = e * w[:, None]
    yw = (np.asarray(target, dtype=np.float64) * w).astype(np.complex128)
    scale = np.linalg.norm(ew, axis=0)
    scale[scale == 0.0] = 1.0
    es = ew / scale
    r = es.conj().T @ es
    rhs = es.conj().T @ yw
    chol, info = lapack.zpotrf(r, lower=1)
    if info != 0:
        raise IllConditionedError("normal equations not positive definite", np.inf)
    anorm = float(np.max(np.sum(np.abs(r), axis=0)))
    rcond, info = lapack.zpocon(chol, anorm, uplo=b"L")
    cond = np.inf if rcond == 0.0 else 1.0 / float(rcond)
    if info != 0 or not np.isfinite(cond) or cond > cond_bound:
        raise IllConditionedError(
            f"normal equations condition {cond:.3e} exceeds bound {cond_bound:.1e}", cond)
    c, info = lapack.zpotrs(chol, rhs[:, None], lower=1)
    if info != 0:
        raise IllConditionedError("normal-equations solve failed", cond)
    c = c[:, 0] / scale
    m = e.shape[1] // 2
    return c[:m], c[m:]


def freq_correction(a, b):
    """Frequency-mismatch estimate (Re a Im b - Im a Re b) / (2 pi |a|^2), Hz.

    With the frame time axis in seconds this is directly the correction to
    add to the component's frequency.  Components with |a| = 0 get 0.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    den = np.abs(a) ** 2
    num = a.real * b.imag - a.imag * b.real
    out = np.divide(num, 2.0 * np.pi * den, out=np.zeros_like(num),
                    where=den > 0)
    if np.isscalar(a) or out.ndim == 0:
        return float(out)
    return out


def _solve_mirrored(seg: np.ndarray, amp_cols: np.ndarray, phase_cols: np.ndarray,
                    window, t: np.ndarray, cond_bound: float) -> QHMFrameSolution:
    """Solve one frame against components k=1..m plus DC, mirroring each
    component to its conjugate so the fit of the real target is two-sided.
    Returns the k=0..m half; conjugate coefficients are implicit."""
    n, m = amp_cols.shape
    amp_full = np.empty((n, 2 * m + 1))
    phase_full = np.empty((n, 2 * m + 1))
    amp_full[:, :m] = amp_cols[:, ::-1]
    amp_full[:, m] = 1.0
    amp_full[:, m + 1:] = amp_cols
    phase_full[:, :m] = -phase_cols[:, ::-1]
    phase_full[:, m] = 0.0
    phase_full[:, m + 1:] = phase_cols
    e, w, y = build_ls_system(seg, BasisFunctionSet(amp=amp_full, phase=phase_full),
                              window, t)
    a_full, b_full = ls_solve(e, w, y, cond_bound)
    a = a_full[m:]
    b = b_full[m:]
    eta = np.concatenate(([0.0], freq_correction(a[1:], b[1:])))
    return QHMFrameSolution(a=a, b=b, eta=eta)


# ---------------------------------------------------------------------------
# frame layout
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Frame:
    center: int
    lo: int
    hi: int
    f0: float
    k_budget: int


def _frame_layout(n: int, fs: float, f0track: F0Track,
                  config: EaQHMConfig) -> list[_Frame]:
    hop = max(1, int(round(config.hop_ms * fs / 1000.0)))
    frames: list[_Frame] = []
    for c in range(0, n, hop):
        f0_l = float(f0track.f0_at(c / fs))
        if f0_l <= 0:
            continue
        if config.window_samples is not None:
            w = int(config.window_samples)
        else:
            w = int(round(config.window_periods * fs / f0_l))
        if w % 2 == 0:
            w += 1
        half = w // 2
        lo = max(0, c - half)
        hi = min(n - 1, c + half)
        w_eff = hi - lo + 1
        guard_f = config.f_guard_hz if config.f_guard_hz is not None else f0_l
        if w_eff < 2.0 * fs / guard_f:
            continue  # shorter than two periods of the guard frequency
        k_budget = int((config.col_ratio * w_eff / 2.0 - 1.0) // 2)
        if k_budget < 1:
            continue
        frames.append(_Frame(center=c, lo=lo, hi=hi, f0=f0_l, k_budget=k_budget))
    return frames


# ---------------------------------------------------------------------------
# initialization and adaptation
# ---------------------------------------------------------------------------

def init_harmonic(signal: SampledSignal, f0track: F0Track,
                  config: EaQHMConfig = EaQHMConfig()) -> list[PartialTrack]:
    """Initial tracks from per-frame stationary-harmonic LS fits at k*f0.

    Anchors carry (2|a_k|, k*f0_local, arg a_k) per solved frame.
    Ill-conditioned frames are skipped with a warning; failing every frame
    is an error.
    """
    if not f0track.any_voiced:
        raise AnalysisError("cannot initialize harmonics: no voiced frames")
    x = signal.samples
    fs = signal.fs
    n = x.shape[0]
    frames = _frame_layout(n, fs, f0track, config)
    if not frames:
        # the window guard is a conditioning bound: surface it as such
        raise IllConditionedError(
            "no analysis frame satisfies the two-period window-length guard",
            float("inf"))
    windows: dict[int, np.ndarray] = {}
    anchors: dict[int, list[tuple[float, float, float, float]]] = {}
    skipped = 0
    for fr in frames:
        k_max = _partial_count(fr, fs, config)
        if k_max < 1:
            continue
        idx = np.arange(fr.lo, fr.hi + 1)
        t = (idx - fr.center) / fs
        seg = x[fr.lo:fr.hi + 1]
        w = windows.get(fr.hi - fr.lo + 1)
        if w is None:
            w = make_window(config.init_window_kind, fr.hi - fr.lo + 1).values
            windows[fr.hi - fr.lo + 1] = w
        ks = np.arange(1, k_max + 1, dtype=np.float64)
        phase_cols = 2.0 * np.pi * fr.f0 * t[:, None] * ks[None, :]
        amp_cols = np.ones_like(phase_cols)
        try:
            sol = _solve_mirrored(seg, amp_cols, phase_cols, w, t, config.cond_bound)
        except IllConditionedError:
            skipped += 1
            continue
        t_c = fr.center / fs
        for k in range(1, k_max + 1):
            a_k = sol.a[k]
            anchors.setdefault(k, []).append(
                (t_c, 2.0 * abs(a_k), k * fr.f0, float(np.angle(a_k))))
    if skipped:
        warnings.warn(f"harmonic initialization skipped {skipped} ill-conditioned "
                      f"frame(s) of {len(frames)}", RuntimeWarning, stacklevel=2)
    if not anchors:
        raise AnalysisError("harmonic initialization failed on every frame")
    tracks: list[PartialTrack] = []
    for k in sorted(anchors):
        vals = np.asarray(anchors[k], dtype=np.float64)
        tracks.append(PartialTrack(times=vals[:, 0], amps=vals[:, 1],
                                   freqs=vals[:, 2], phases=vals[:, 3]))
    return tracks


def _partial_count(fr: _Frame, fs: float, config: EaQHMConfig) -> int:
    band = int((fs / 2.0 - config.nyquist_margin_hz) / fr.f0)
    k = band if config.max_partials is None else min(config.max_partials, band)
    return min(k, fr.k_budget)


def _adaptation_pass(x: np.ndarray, fs: float, tracks: list[PartialTrack],
                     f0track: F0Track, config: EaQHMConfig) -> list[PartialTrack]:
    n = x.shape[0]
    n_tracks = len(tracks)
    amp_all = np.empty((n_tracks, n))
    freq_all = np.empty((n_tracks, n))
    phase_all = np.empty((n_tracks, n))
    for k, tr in enumerate(tracks):
        amp_all[k], freq_all[k], phase_all[k] = sample_track(tr, fs, 0, n - 1)
    frames = _frame_layout(n, fs, f0track, config)
    windows: dict[int, np.ndarray] = {}
    f_ceiling = fs / 2.0 - config.nyquist_margin_hz
    anchors: dict[int, list[tuple[float, float, float, float]]] = {}
    solved_any = False
    for fr in frames:
        eligible = [k for k in range(n_tracks) if freq_all[k, fr.center] < f_ceiling]
        eligible.sort(key=lambda k: freq_all[k, fr.center])
        budget = fr.k_budget if config.max_partials is None \
            else min(config.max_partials, fr.k_budget)
        eligible = eligible[:budget]
        if not eligible:
            continue
        idx = np.asarray(eligible)
        t = (np.arange(fr.lo, fr.hi + 1) - fr.center) / fs
        seg = x[fr.lo:fr.hi + 1]
        w_len = fr.hi - fr.lo + 1
        w = windows.get(w_len)
        if w is None:
            w = make_window(config.adapt_window_kind, w_len).values
            windows[w_len] = w
        ci = fr.center - fr.lo
        amp_cols = amp_all[idx, fr.lo:fr.hi + 1].T
        amp_cols = (amp_cols + _AMP_EPS) / (amp_cols[ci] + _AMP_EPS)
        phase_cols = phase_all[idx, fr.lo:fr.hi + 1].T - phase_all[idx, fr.center]
        t_c = fr.center / fs
        try:
            sol = _solve_mirrored(seg, amp_cols, phase_cols, w, t, config.cond_bound)
        except IllConditionedError:
            # keep the previous iterate's values at this frame
            for k in eligible:
                anchors.setdefault(k, []).append(
                    (t_c, amp_all[k, fr.center], freq_all[k, fr.center],
                     float(wrap_phase(phase_all[k, fr.center]))))
            continue
        solved_any = True
        eta = np.clip(sol.eta[1:], -fr.f0 / 2.0, fr.f0 / 2.0)
        for j, k in enumerate(eligible):
            a_k = sol.a[j + 1]
            new_f = float(np.clip(freq_all[k, fr.center] + eta[j], 1.0, fs / 2.0 - 1.0))
            anchors.setdefault(k, []).append(
                (t_c, 2.0 * abs(a_k), new_f, float(np.angle(a_k))))
    if not solved_any:
        raise AnalysisError("adaptation pass failed on every frame")
    out: list[PartialTrack] = []
    for k, tr in enumerate(tracks):
        vals = anchors.get(k)
        if not vals:
            out.append(tr)  # never eligible this pass; carry unchanged
            continue
        arr = np.asarray(vals, dtype=np.float64)
        out.append(PartialTrack(times=arr[:, 0], amps=arr[:, 1],
                                freqs=arr[:, 2], phases=arr[:, 3]))
    return out


def adapt(signal: SampledSignal, tracks: list[PartialTrack], f0track: F0Track,
          config: EaQHMConfig = EaQHMConfig()) -> AdaptationState:
    """Adaptation loop: re-fit frames against the current tracks, apply the
    frequency corrections, and keep the best-SRER iterate.

    The SRER history records the initial synthesis and every improving
    iterate, so it is non-decreasing by construction; an iterate that fails
    to improve (or improves by less than the threshold) stops the loop.
    """
    x = signal.samples
    n = x.shape[0]
    fs = signal.fs
    current = list(tracks)
    best_srer = srer(x, synthesize_tracks(current, n, fs))
    state = AdaptationState(iteration=0, srer_history=[best_srer], tracks=current)
    if best_srer >= config.srer_ceiling_db:
        return state  # already at the double-precision noise floor
    for it in range(1, config.max_adaptations + 1):
        new_tracks = _adaptation_pass(x, fs, current, f0track, config)
        s = srer(x, synthesize_tracks(new_tracks, n, fs))
        state.iteration = it
        if s <= best_srer:
            break
        improvement = s - best_srer
        best_srer = s
        current = new_tracks
        state.srer_history.append(s)
        state.tracks = new_tracks
        if improvement < config.srer_threshold_db or s >= config.srer_ceiling_db:
            break
    return state


def eaqhm_analyze(signal: SampledSignal, f0track: F0Track,
                  config: EaQHMConfig = EaQHMConfig()) -> AdaptationState:
    """Harmonic initialization followed by the adaptation loop."""
    return adapt(signal, init_harmonic(signal, f0track, config), f0track, config)


def eaqhm_synthesize(tracks, n_samples: int, fs: float) -> np.ndarray:
    """Resynthesis by frequency integration with anchor-phase reconciliation."""
    return synthesize_tracks(tracks, n_samples, fs, phase_mode="freq_integration")
