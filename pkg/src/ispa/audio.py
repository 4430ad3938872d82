"""WAV loading, resampling, framing, and per-frame energy."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

DEFAULT_SAMPLE_RATE = 16000

# Floor for dB computations; RMS below 1e-6 of full scale reads as -120 dBFS.
ENERGY_FLOOR_DB = -120.0

_PCM = 0x0001
_IEEE_FLOAT = 0x0003
_EXTENSIBLE = 0xFFFE


class AudioError(ValueError):
    """Raised for unreadable or unsupported audio files."""


@dataclass(frozen=True)
class Waveform:
    """Mono audio: float64 samples in [-1, 1] plus a sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise ValueError("Waveform is mono: samples must be 1-D")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain non-finite values")

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class EnergyTrack:
    """Per-frame RMS energy in dB relative to full scale (0 dBFS = RMS 1.0)."""

    hop_seconds: float
    values: np.ndarray

    def __post_init__(self):
        if self.hop_seconds <= 0:
            raise ValueError("hop_seconds must be positive")


def _read_chunks(data: bytes):
    """Yield (chunk id, payload) pairs from a RIFF body."""
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        payload = data[pos + 8 : pos + 8 + size]
        yield cid, payload
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def load_audio(path) -> Waveform:
    """Load a PCM WAV file as a mono Waveform.

    Accepts 8/16/24/32-bit integer and 32-bit float encodings. Multichannel
    input is averaged down to mono; integer samples are scaled by the type's
    full-scale value (e.g. 16-bit 32767 -> 32767/32768).
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise AudioError(f"cannot read {path}: {exc}") from exc
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    for cid, chunk in _read_chunks(data):
        if cid == b"fmt ":
            fmt = chunk
        elif cid == b"data":
            payload = chunk
    if fmt is None or payload is None:
        raise AudioError(f"{path}: missing fmt or data chunk")

    tag, n_channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if tag == _EXTENSIBLE:
        if len(fmt) < 26:
            raise AudioError(f"{path}: truncated WAVE_FORMAT_EXTENSIBLE header")
        tag = struct.unpack_from("<H", fmt, 24)[0]

    if tag == _PCM and bits == 8:
        raw = np.frombuffer(payload, dtype=np.uint8)
        samples = (raw.astype(np.float64) - 128.0) / 128.0
    elif tag == _PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif tag == _PCM and bits == 24:
        usable = len(payload) // 3 * 3
        b = np.frombuffer(payload[:usable], dtype=np.uint8).reshape(-1, 3)
        raw = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        raw = np.where(raw >= 1 << 23, raw - (1 << 24), raw)
        samples = raw.astype(np.float64) / float(1 << 23)
    elif tag == _PCM and bits == 32:
        raw = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<i4")
        samples = raw.astype(np.float64) / float(1 << 31)
    elif tag == _IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4").astype(
            np.float64
        )
    else:
        raise AudioError(
            f"{path}: unsupported encoding (format tag {tag}, {bits}-bit)"
        )

    if n_channels < 1:
        raise AudioError(f"{path}: invalid channel count {n_channels}")
    if n_channels > 1:
        usable = len(samples) // n_channels * n_channels
        samples = samples[:usable].reshape(-1, n_channels).mean(axis=1)
    if len(samples) == 0:
        raise AudioError(f"{path}: zero-length audio")
    return Waveform(samples=samples, sample_rate=int(sample_rate))


def save_wav(path, w: Waveform) -> None:
    """Write a Waveform as 16-bit PCM WAV, clipping to [-1, 1]."""
    clipped = np.clip(w.samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype("<i2")
    payload = pcm.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        _PCM,
        1,
        w.sample_rate,
        w.sample_rate * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    Path(path).write_bytes(header + payload)


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Band-limited polyphase resampling to target_rate Hz."""
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == w.sample_rate:
        return w
    g = np.gcd(w.sample_rate, target_rate)
    out = resample_poly(w.samples, target_rate // g, w.sample_rate // g)
    return Waveform(samples=np.asarray(out, dtype=np.float64), sample_rate=target_rate)


def frame_grid(n_samples: int, sample_rate: int, hop_seconds: float) -> int:
    """Number of frames covering the signal: ceil(duration / hop)."""
    duration = n_samples / sample_rate
    return max(1, int(np.ceil(duration / hop_seconds - 1e-9)))


def frame_signal(
    samples: np.ndarray, sample_rate: int, hop_seconds: float, win_seconds: float
) -> np.ndarray:
    """Slice a signal into overlapping frames centered on the hop grid.

    Frame i is a win_seconds window centered at i * hop_seconds; the edges
    are reflection-padded. Returns an (n_frames, win_samples) array.
    """
    hop = int(round(hop_seconds * sample_rate))
    win = int(round(win_seconds * sample_rate))
    if hop < 1 or win < 1:
        raise ValueError("hop and window must span at least one sample")
    n_frames = frame_grid(len(samples), sample_rate, hop_seconds)
    half = win // 2
    pad_right = (n_frames - 1) * hop + (win - half) - len(samples)
    mode = "reflect" if len(samples) > 1 else "edge"
    padded = np.pad(samples, (half, max(half, pad_right, 0)), mode=mode)
    starts = np.arange(n_frames) * hop
    idx = starts[:, None] + np.arange(win)[None, :]
    return padded[idx]


def frame_energy(
    w: Waveform, hop_seconds: float, win_seconds: float | None = None
) -> EnergyTrack:
    """Per-frame RMS energy in dBFS, floored at -120 dB.

    The RMS is Hann-weighted over a window of win_seconds (default 2 * hop)
    centered at each hop point.
    """
    if win_seconds is None:
        win_seconds = 2.0 * hop_seconds
    if not (0 < hop_seconds <= win_seconds):
        raise ValueError("require 0 < hop_seconds <= win_seconds")
    frames = frame_signal(w.samples, w.sample_rate, hop_seconds, win_seconds)
    window = np.hanning(frames.shape[1])
    wsum = window.sum()
    if wsum <= 0:  # window of one sample
        window = np.ones(frames.shape[1])
        wsum = window.sum()
    mean_sq = (frames * frames * window).sum(axis=1) / wsum
    rms = np.sqrt(mean_sq)
    db = 20.0 * np.log10(np.maximum(rms, 1e-6))
    return EnergyTrack(hop_seconds=hop_seconds, values=np.maximum(db, ENERGY_FLOOR_DB))
