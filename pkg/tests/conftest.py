"""Shared signal builders for the test suite."""

import numpy as np

from ispa.audio import Waveform


def make_tone(freq_hz, duration_s, sample_rate=16000, amplitude=0.3):
    t = np.arange(int(round(duration_s * sample_rate))) / sample_rate
    return Waveform(
        samples=amplitude * np.sin(2 * np.pi * freq_hz * t), sample_rate=sample_rate
    )


def make_log_chirp(f_start_hz, log2_ratio, duration_s, sample_rate=16000, amplitude=0.3):
    """Exponential sweep from f_start to f_start * 2**log2_ratio."""
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    if log2_ratio == 0:
        phase = 2 * np.pi * f_start_hz * t
    else:
        k = log2_ratio / duration_s
        phase = 2 * np.pi * f_start_hz * (2 ** (k * t) - 1) / (k * np.log(2))
    return Waveform(samples=amplitude * np.sin(phase), sample_rate=sample_rate)


def make_noise(duration_s, sample_rate=16000, amplitude=0.1, seed=0):
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    return Waveform(
        samples=np.clip(amplitude * rng.standard_normal(n), -0.999, 0.999),
        sample_rate=sample_rate,
    )


def make_silence(duration_s, sample_rate=16000):
    return Waveform(
        samples=np.zeros(int(round(duration_s * sample_rate))), sample_rate=sample_rate
    )
