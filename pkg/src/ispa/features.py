"""Per-frame representations: MFCC, pitch, spectral bandwidth, interchange I/O."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.fft import dct

from .audio import Waveform, frame_energy, frame_signal

DEFAULT_PITCH_HOP = 0.03125  # one 32nd note at 60 bpm
DEFAULT_MFCC_HOP = 0.020
DEFAULT_MFCC_COEFFS = 40
DEFAULT_MEL_BANDS = 64

ISPF_MAGIC = b"ISPF"
ISPF_VERSION = 1
_ISPF_HEADER = struct.Struct("<4sIddIQ")

PITCH_CSV_COLUMNS = ("time_s", "f0_hz", "confidence", "energy_db")


class FormatError(ValueError):
    """Raised for malformed interchange files."""


@dataclass(frozen=True)
class FeatureSequence:
    """Per-frame feature vectors on a uniform hop grid."""

    hop_seconds: float
    frames: np.ndarray  # (n_frames, dim)
    start_time_s: float = 0.0

    def __post_init__(self):
        if self.hop_seconds <= 0:
            raise ValueError("hop_seconds must be positive")
        if self.frames.ndim != 2 or self.frames.shape[1] < 1:
            raise ValueError("frames must be a (n_frames, dim>=1) array")
        if not np.all(np.isfinite(self.frames)):
            raise ValueError("frames contain non-finite values")

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    def __len__(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class PitchTrack:
    """Per-frame f0 estimates; f0_hz == 0 marks an unvoiced frame."""

    hop_seconds: float
    f0_hz: np.ndarray
    confidence: np.ndarray
    energy_db: np.ndarray

    def __post_init__(self):
        n = len(self.f0_hz)
        if len(self.confidence) != n or len(self.energy_db) != n:
            raise ValueError("f0, confidence, and energy tracks differ in length")
        voiced = self.f0_hz > 0
        if np.any((self.f0_hz[voiced] < 20) | (self.f0_hz[voiced] > 16000)):
            raise ValueError("voiced f0 values must lie in [20, 16000] Hz")

    def __len__(self) -> int:
        return len(self.f0_hz)


@dataclass(frozen=True)
class BandwidthTrack:
    """Per-frame second-moment spectral bandwidth in Hz."""

    hop_seconds: float
    values: np.ndarray

    def __post_init__(self):
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("bandwidth values must be finite and non-negative")

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class PitchConfig:
    # window just over two hops: events only smear into the single frame
    # whose center they straddle, yet 30 Hz lags still fit at 16 kHz
    hop_seconds: float = DEFAULT_PITCH_HOP
    win_seconds: float = 0.064
    f_min: float = 30.0
    f_max: float = 8000.0
    voicing_threshold: float = 0.5
    cmnd_threshold: float = 0.1


# ---------------------------------------------------------------------------
# MFCC


def _mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(n_bands: int, n_fft: int, sample_rate: int) -> np.ndarray:
    """Triangular mel filters spanning 0..Nyquist, shape (n_bands, n_fft//2+1)."""
    freqs = np.fft.rfftfreq(n_fft, 1.0 / sample_rate)
    edges = _mel_to_hz(np.linspace(0.0, _mel(sample_rate / 2.0), n_bands + 2))
    fb = np.zeros((n_bands, len(freqs)))
    for j in range(n_bands):
        lo, mid, hi = edges[j], edges[j + 1], edges[j + 2]
        up = (freqs - lo) / max(mid - lo, 1e-12)
        down = (hi - freqs) / max(hi - mid, 1e-12)
        fb[j] = np.maximum(0.0, np.minimum(up, down))
    return fb


def compute_mfcc(
    w: Waveform,
    n_coeffs: int = DEFAULT_MFCC_COEFFS,
    hop_seconds: float = DEFAULT_MFCC_HOP,
    n_mels: int = DEFAULT_MEL_BANDS,
) -> FeatureSequence:
    """MFCC features: Hann window (2 * hop), mel filterbank, log, DCT-II.

    Coefficient 0 is included; dim == n_coeffs.
    """
    if not (1 <= n_coeffs <= 64):
        raise ValueError(f"n_coeffs must lie in [1, 64], got {n_coeffs}")
    if n_coeffs > n_mels:
        raise ValueError("n_coeffs cannot exceed the mel band count")
    win_seconds = 2.0 * hop_seconds
    if w.duration_seconds < win_seconds:
        raise ValueError(
            f"audio of {w.duration_seconds:.4f}s is shorter than one "
            f"{win_seconds:.4f}s analysis window"
        )
    frames = frame_signal(w.samples, w.sample_rate, hop_seconds, win_seconds)
    window = np.hanning(frames.shape[1])
    n_fft = 1 << int(np.ceil(np.log2(frames.shape[1])))
    spec = np.fft.rfft(frames * window, n_fft)
    power = spec.real**2 + spec.imag**2
    fb = mel_filterbank(n_mels, n_fft, w.sample_rate)
    mel_power = power @ fb.T
    log_mel = np.log(np.maximum(mel_power, 1e-10))
    coeffs = dct(log_mel, type=2, norm="ortho", axis=1)[:, :n_coeffs]
    return FeatureSequence(hop_seconds=hop_seconds, frames=np.ascontiguousarray(coeffs))


# ---------------------------------------------------------------------------
# Pitch (cumulative-mean-normalized difference, a.k.a. YIN-style)


def _difference_function(frames: np.ndarray, tau_max: int) -> np.ndarray:
    """d[t, tau] = sum_j (x[j] - x[j+tau])^2 for tau in [0, tau_max]."""
    n = frames.shape[1]
    fft_len = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(frames, fft_len)
    acorr = np.fft.irfft(spec * spec.conj(), fft_len)[:, : tau_max + 1]
    sq = frames**2
    csum = np.concatenate(
        [np.zeros((frames.shape[0], 1)), np.cumsum(sq, axis=1)], axis=1
    )
    total = csum[:, -1:]
    taus = np.arange(tau_max + 1)
    # head = sum of x[0 : n - tau]^2, tail = sum of x[tau : n]^2
    head = csum[:, n - taus]
    tail = total - csum[:, taus]
    return np.maximum(head + tail - 2.0 * acorr, 0.0)


def _cmnd(diff: np.ndarray) -> np.ndarray:
    """Cumulative-mean-normalized difference; lag 0 defined as 1."""
    taus = np.arange(1, diff.shape[1])
    cum = np.cumsum(diff[:, 1:], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = diff[:, 1:] * taus / cum
    norm = np.where(cum > 0, norm, 1.0)
    return np.concatenate([np.ones((diff.shape[0], 1)), norm], axis=1)


def estimate_pitch(w: Waveform, config: PitchConfig | None = None) -> PitchTrack:
    """Classical per-frame pitch estimation.

    Each frame's fundamental period minimizes the cumulative-mean-normalized
    difference function; the first dip below the CMND threshold wins, refined
    by parabolic interpolation. Confidence is 1 - CMND at the chosen lag;
    frames below the voicing threshold are marked unvoiced (f0 = 0).
    """
    cfg = config or PitchConfig()
    f_max = min(cfg.f_max, 0.95 * w.sample_rate / 2.0)
    if cfg.f_min >= f_max:
        raise ValueError(f"f_min {cfg.f_min} must be below f_max {f_max}")

    frames = frame_signal(w.samples, w.sample_rate, cfg.hop_seconds, cfg.win_seconds)
    win = frames.shape[1]
    tau_min = max(2, int(np.floor(w.sample_rate / f_max)))
    tau_max = min(win - 2, int(np.ceil(w.sample_rate / cfg.f_min)))
    if tau_max <= tau_min + 1:
        raise ValueError("analysis window too short for the requested f_min")

    diff = _difference_function(frames, tau_max + 1)
    cmnd = _cmnd(diff)

    n_frames = frames.shape[0]
    search = cmnd[:, tau_min : tau_max + 1]
    # Parabolic refinement of every interior lag first: at short periods the
    # true minimum falls between integer lags and the raw grid value can sit
    # well above the threshold, which would otherwise hand the decision to a
    # better-aligned subharmonic.
    a, mid, c = search[:, :-2], search[:, 1:-1], search[:, 2:]
    denom = a - 2.0 * mid + c
    shift = np.where(np.abs(denom) > 1e-30, 0.5 * (a - c) / np.where(denom == 0, 1, denom), 0.0)
    shift = np.clip(shift, -1.0, 1.0)
    refined = mid - 0.25 * (a - c) * shift

    trough = (mid < a) & (mid <= c)
    # first refined trough below the threshold wins; otherwise the best trough
    dip = trough & (refined < cfg.cmnd_threshold)
    has_dip = dip.any(axis=1)
    first_dip = dip.argmax(axis=1)
    trough_vals = np.where(trough, refined, np.inf)
    has_trough = trough.any(axis=1)
    best_trough = trough_vals.argmin(axis=1)
    j = np.where(has_dip, first_dip, best_trough)

    rows = np.arange(n_frames)
    tau_ref = np.where(
        has_trough, tau_min + 1 + j + shift[rows, j], tau_min + search.argmin(axis=1)
    )
    value = np.where(has_trough, refined[rows, j], search[rows, search.argmin(axis=1)])

    conf = np.clip(1.0 - value, 0.0, 1.0)
    freq = w.sample_rate / tau_ref
    voiced = (conf >= cfg.voicing_threshold) & (freq >= cfg.f_min) & (freq <= f_max)
    f0 = np.where(voiced, freq, 0.0)

    energy = frame_energy(w, cfg.hop_seconds, cfg.win_seconds)
    f0 = np.where(f0 > 0, np.clip(f0, 20.0, 16000.0), 0.0)
    return PitchTrack(
        hop_seconds=cfg.hop_seconds,
        f0_hz=f0,
        confidence=conf,
        energy_db=energy.values,
    )


# ---------------------------------------------------------------------------
# Spectral bandwidth


def spectral_bandwidth(
    w: Waveform, hop_seconds: float = DEFAULT_PITCH_HOP
) -> BandwidthTrack:
    """Second-moment bandwidth around the spectral centroid, per frame.

    bandwidth = sqrt(sum |S_k|^2 (f_k - centroid)^2 / sum |S_k|^2) from a
    Hann-windowed FFT with window = 2 * hop. A zero spectrum yields 0.
    """
    if hop_seconds <= 0:
        raise ValueError("hop_seconds must be positive")
    frames = frame_signal(w.samples, w.sample_rate, hop_seconds, 2.0 * hop_seconds)
    window = np.hanning(frames.shape[1])
    spec = np.fft.rfft(frames * window)
    power = spec.real**2 + spec.imag**2
    freqs = np.fft.rfftfreq(frames.shape[1], 1.0 / w.sample_rate)
    total = power.sum(axis=1)
    safe = np.maximum(total, 1e-30)
    centroid = (power * freqs).sum(axis=1) / safe
    spread = (power * (freqs[None, :] - centroid[:, None]) ** 2).sum(axis=1) / safe
    values = np.where(total > 1e-20, np.sqrt(np.maximum(spread, 0.0)), 0.0)
    return BandwidthTrack(hop_seconds=hop_seconds, values=values)


# ---------------------------------------------------------------------------
# Interchange formats


def write_features(path, seq: FeatureSequence) -> None:
    """Write a FeatureSequence as an ISPF v1 binary file (float32, row-major)."""
    header = _ISPF_HEADER.pack(
        ISPF_MAGIC,
        ISPF_VERSION,
        seq.hop_seconds,
        seq.start_time_s,
        seq.dim,
        len(seq),
    )
    body = np.ascontiguousarray(seq.frames, dtype="<f4").tobytes()
    Path(path).write_bytes(header + body)


def import_features(path) -> FeatureSequence:
    """Read an ISPF v1 feature file."""
    data = Path(path).read_bytes()
    if len(data) < _ISPF_HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, hop, start, dim, n_frames = _ISPF_HEADER.unpack_from(data, 0)
    if magic != ISPF_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != ISPF_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = _ISPF_HEADER.size + 4 * dim * n_frames
    if len(data) != expected:
        raise FormatError(
            f"{path}: payload size mismatch, expected {expected} bytes, "
            f"got {len(data)}"
        )
    flat = np.frombuffer(data, dtype="<f4", offset=_ISPF_HEADER.size)
    frames = flat.reshape(n_frames, dim).astype(np.float64)
    return FeatureSequence(hop_seconds=hop, frames=frames, start_time_s=start)


def import_pitch(path) -> PitchTrack:
    """Read a pitch CSV (time_s,f0_hz,confidence,energy_db).

    Rows must be time-sorted with uniform spacing (tolerance 1e-4 s); the hop
    is inferred from that spacing. An empty or zero f0 field marks the frame
    unvoiced.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        missing = [c for c in PITCH_CSV_COLUMNS if c not in cols]
        if missing:
            raise FormatError(f"{path}: missing columns {', '.join(missing)}")
        rows = list(reader)
    if len(rows) < 2:
        raise FormatError(f"{path}: need at least two rows to infer the hop")

    times = np.array([float(r["time_s"]) for r in rows])
    diffs = np.diff(times)
    hop = float(np.median(diffs))
    if hop <= 0 or np.any(np.abs(diffs - hop) > 1e-4):
        raise FormatError(f"{path}: non-uniform hop (spacings {diffs[:5]}...)")

    def _field(row, key, default):
        text = (row.get(key) or "").strip()
        return float(text) if text else default

    f0 = np.array([_field(r, "f0_hz", 0.0) for r in rows])
    conf = np.array([_field(r, "confidence", 0.0) for r in rows])
    energy = np.array([_field(r, "energy_db", -120.0) for r in rows])
    f0 = np.where(f0 > 0, np.clip(f0, 20.0, 16000.0), 0.0)
    return PitchTrack(
        hop_seconds=hop,
        f0_hz=f0,
        confidence=np.clip(conf, 0.0, 1.0),
        energy_db=energy,
    )


def write_pitch(path, track: PitchTrack) -> None:
    """Write a PitchTrack in the pitch CSV interchange format."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PITCH_CSV_COLUMNS)
        for i in range(len(track)):
            f0 = track.f0_hz[i]
            writer.writerow(
                [
                    f"{i * track.hop_seconds:.6f}",
                    f"{f0:.4f}" if f0 > 0 else "0",
                    f"{track.confidence[i]:.4f}",
                    f"{track.energy_db[i]:.2f}",
                ]
            )
