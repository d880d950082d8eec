"""Shared fixtures plus the acceptance summary hook.

The acceptance tests register one line per criterion; the hook prints them
in a dedicated section of the terminal summary so the pass/fail ledger is
visible without -s.
"""
import numpy as np
import pytest

from sinemodel.core import SampledSignal

ACCEPTANCE_LINES: list = []

FS = 16000.0


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def tone():
    """0.5 s, 150 Hz unit cosine at 16 kHz."""
    t = np.arange(8000) / FS
    return SampledSignal(samples=np.cos(2 * np.pi * 150.0 * t), fs=FS)


@pytest.fixture
def tone_wav(tone, tmp_path):
    from sinemodel.audio_io import write_wav

    path = tmp_path / "tone.wav"
    write_wav(path, tone)
    return path
