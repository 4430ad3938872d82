"""Acoustics-based transcription: pitch/bandwidth tokens over Viterbi segments.

Tokens read like N5/2= : bandwidth letter, octave digit, length code, slope
code. Rest spans are R plus a length code.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .audio import Waveform, resample
from .features import (
    DEFAULT_PITCH_HOP,
    BandwidthTrack,
    PitchConfig,
    PitchTrack,
    estimate_pitch,
    spectral_bandwidth,
)
from .segmenter import Segment, SegmentationConfig, viterbi_segment

BANDWIDTH_LETTERS = "UNMWX"
# Hz boundaries between U|N, N|M, M|W, W|X. A Hann-windowed pure tone
# measures ~9 Hz of second-moment bandwidth, so the narrowest class keeps a
# small threshold; everything tonal-but-real lands in N.
DEFAULT_BANDWIDTH_THRESHOLDS = (5.0, 500.0, 1200.0, 3000.0)

# (code, seconds); the empty code is a whole note. Durations anchor to a
# half note = 2 s at 60 bpm.
LENGTH_CLASSES = (
    ("/32", 0.125),
    ("/16", 0.25),
    ("/8", 0.5),
    ("/4", 1.0),
    ("/2", 2.0),
    ("", 4.0),
    ("x2", 8.0),
    ("x4", 16.0),
)
LENGTH_SECONDS = {code: secs for code, secs in LENGTH_CLASSES}

# Slope class -> center log2 pitch ratio across the segment. Class +3 is a
# doubling (100% increase), -3 a halving (50% decrease); interior classes
# are uniform in log2.
SLOPE_CENTERS = {
    -3: -1.0,
    -2: -2.0 / 3.0,
    -1: -1.0 / 3.0,
    0: 0.0,
    1: 1.0 / 3.0,
    2: 2.0 / 3.0,
    3: 1.0,
}
_SLOPE_ORDER = (-3, -2, -1, 0, 1, 2, 3)

REST_DB_THRESHOLD = -50.0

_SEMITONES_PER_OCTAVE = 12.0


class _RestLabel:
    def __repr__(self):
        return "REST"


REST = _RestLabel()


class TokenSyntaxError(ValueError):
    """Parse failure; `position` is the character offset in the input."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class IspaAToken:
    """One transcription token: either a rest or a pitched segment."""

    length_code: str
    rest: bool = False
    bandwidth: str | None = None
    octave: int | None = None
    slope: int | None = None

    def __post_init__(self):
        if self.length_code not in LENGTH_SECONDS:
            raise ValueError(f"unknown length code {self.length_code!r}")
        if self.rest:
            if not (self.bandwidth is None and self.octave is None and self.slope is None):
                raise ValueError("rest tokens carry only a length")
        else:
            if self.bandwidth not in BANDWIDTH_LETTERS:
                raise ValueError(f"bad bandwidth class {self.bandwidth!r}")
            if self.octave is None or not (0 <= self.octave <= 9):
                raise ValueError(f"octave must be 0-9, got {self.octave}")
            if self.slope not in SLOPE_CENTERS:
                raise ValueError(f"bad slope class {self.slope}")

    @property
    def duration_seconds(self) -> float:
        return LENGTH_SECONDS[self.length_code]


@dataclass(frozen=True)
class PitchSegmentModel:
    """Fitted pitch trajectory: 2**(base + ratio * position-in-segment)."""

    base_log2_hz: float
    slope_class: int

    def log2_at(self, fraction: float) -> float:
        return self.base_log2_hz + SLOPE_CENTERS[self.slope_class] * fraction

    @property
    def midpoint_hz(self) -> float:
        return 2.0 ** self.log2_at(0.5)


@dataclass
class AcousticConfig:
    # 32 kHz keeps short pitch periods (octave 7 sits near 3-4 kHz) on a
    # fine enough lag grid that the period beats its subharmonics
    sample_rate: int = 32000
    hop_seconds: float = DEFAULT_PITCH_HOP
    lam: float = 8.0
    voiced_mismatch_penalty: float = 1.0
    unvoiced_mismatch_penalty: float = 12.0
    rest_db: float = REST_DB_THRESHOLD
    bandwidth_thresholds: tuple = DEFAULT_BANDWIDTH_THRESHOLDS
    distance_domain: str = "semitones"  # or "hz", the literal reading
    median_filter: bool = True
    pitch: PitchConfig = field(default_factory=PitchConfig)

    def __post_init__(self):
        if self.distance_domain not in ("semitones", "hz"):
            raise ValueError("distance_domain must be 'semitones' or 'hz'")

    def allowed_lengths(self) -> tuple[int, ...]:
        frames = sorted(
            {max(1, round(secs / self.hop_seconds)) for _, secs in LENGTH_CLASSES}
        )
        return tuple(frames)


def classify_bandwidth(median_bw_hz: float, thresholds=DEFAULT_BANDWIDTH_THRESHOLDS) -> str:
    """Map a median bandwidth in Hz to one of U, N, M, W, X."""
    if median_bw_hz < 0:
        raise ValueError("bandwidth cannot be negative")
    idx = int(np.searchsorted(np.asarray(thresholds), median_bw_hz, side="right"))
    return BANDWIDTH_LETTERS[idx]


def hz_to_octave(f0_hz: float) -> int:
    """MIDI octave number of a frequency, clamped to 0-9 (middle C is 4)."""
    if f0_hz <= 0:
        raise ValueError("frequency must be positive")
    midi = 69.0 + _SEMITONES_PER_OCTAVE * math.log2(f0_hz / 440.0)
    return int(np.clip(math.floor(midi / 12.0) - 1, 0, 9))


def quantize_length(length_frames: int, hop_seconds: float) -> str:
    """Length code whose duration is nearest in log2; ties go longer."""
    if length_frames < 1:
        raise ValueError("length must be at least one frame")
    target = math.log2(length_frames * hop_seconds)
    best = None
    best_err = math.inf
    for code, secs in LENGTH_CLASSES:  # later = longer, <= keeps the longer
        err = abs(math.log2(secs) - target)
        if err <= best_err:
            best, best_err = code, err
    return best


def octave_center_hz(octave: int) -> float:
    """Log-center frequency of a MIDI octave (the F#/G boundary)."""
    midi = 12.0 * (octave + 1) + 6.0
    return 440.0 * 2.0 ** ((midi - 69.0) / 12.0)


class AcousticCostModel:
    """Best pitch-trajectory (or rest) hypothesis per candidate span.

    The label space is REST plus the seven slope classes; for each slope the
    base pitch is the median of the slope-compensated log2 track (the exact
    L1 minimizer). Distances are semitones summed over voiced frames, plus
    a fixed penalty per frame that contradicts the hypothesis (voiced frames
    under REST, unvoiced frames under a pitched model). Hypothesis order for
    exact ties: REST first, then slopes ascending.
    """

    def __init__(self, track: PitchTrack, config: AcousticConfig | None = None):
        self.config = config or AcousticConfig()
        self.track = track
        f0 = np.asarray(track.f0_hz, dtype=np.float64)
        self.voiced = f0 > 0
        self.log2f = np.where(self.voiced, np.log2(np.maximum(f0, 1e-12)), np.nan)
        self.f0 = f0
        self.n_frames = len(f0)
        self._tables: dict[int, tuple] = {}

    # -- vectorized per-length tables ------------------------------------

    def _build_table(self, length: int):
        n_spans = self.n_frames - length + 1
        if n_spans < 1:
            raise ValueError(f"span length {length} exceeds track")
        windows = np.lib.stride_tricks.sliding_window_view(self.log2f, length)
        voiced = np.lib.stride_tricks.sliding_window_view(self.voiced, length)
        n_voiced = voiced.sum(axis=1)
        n_unvoiced = length - n_voiced

        cfg = self.config
        costs = np.empty((1 + len(_SLOPE_ORDER), n_spans))
        bases = np.zeros((len(_SLOPE_ORDER), n_spans))
        costs[0] = n_voiced * cfg.voiced_mismatch_penalty  # REST hypothesis
        frac = np.arange(length) / length
        for si, slope in enumerate(_SLOPE_ORDER):
            ramp = SLOPE_CENTERS[slope] * frac
            if cfg.distance_domain == "semitones":
                shifted = windows - ramp[None, :]
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    base = np.nanmedian(shifted, axis=1)
                base = np.where(n_voiced > 0, base, 0.0)
                resid = np.nansum(np.abs(shifted - base[:, None]), axis=1)
                dist = resid * _SEMITONES_PER_OCTAVE
            else:
                base_hz, dist = self._hz_fit(length, ramp)
                base = np.where(
                    base_hz > 0, np.log2(np.maximum(base_hz, 1e-12)), 0.0
                )
            costs[1 + si] = dist + n_unvoiced * cfg.unvoiced_mismatch_penalty
            bases[si] = base
        winner = np.argmin(costs, axis=0)  # ties: REST, then ascending slope
        best_cost = costs[winner, np.arange(n_spans)]
        return winner, best_cost, bases

    def _hz_fit(self, length: int, ramp: np.ndarray):
        """L1 fit in plain hertz: weighted median of gain-compensated f0."""
        f_windows = np.lib.stride_tricks.sliding_window_view(self.f0, length)
        v_windows = np.lib.stride_tricks.sliding_window_view(self.voiced, length)
        gain = 2.0**ramp
        with np.errstate(all="ignore"):
            ratios = np.where(v_windows, f_windows / gain[None, :], np.nan)
        order = np.argsort(ratios, axis=1)
        sorted_ratios = np.take_along_axis(ratios, order, axis=1)
        sorted_gain = np.take_along_axis(
            np.where(v_windows, gain[None, :], 0.0), order, axis=1
        )
        cum = np.cumsum(sorted_gain, axis=1)
        half = cum[:, -1:] / 2.0
        idx = (cum >= half).argmax(axis=1)
        base = np.take_along_axis(sorted_ratios, idx[:, None], axis=1)[:, 0]
        base = np.where(np.isfinite(base), base, 0.0)
        model = base[:, None] * gain[None, :]
        dist = np.nansum(
            np.where(v_windows, np.abs(f_windows - model), 0.0), axis=1
        )
        return base, dist

    def _table(self, length: int):
        if length not in self._tables:
            self._tables[length] = self._build_table(length)
        return self._tables[length]

    def segment_cost(self, start_frame: int, length_frames: int):
        winner, cost, bases = self._table(length_frames)
        w = int(winner[start_frame])
        d = float(cost[start_frame])
        if w == 0:
            return REST, d
        slope = _SLOPE_ORDER[w - 1]
        return (
            PitchSegmentModel(
                base_log2_hz=float(bases[w - 1, start_frame]), slope_class=slope
            ),
            d,
        )


def acoustic_segment_cost(
    track: PitchTrack,
    start_frame: int,
    length_frames: int,
    config: AcousticConfig | None = None,
):
    """Best (label, distance) for one span; label is REST or a pitch model."""
    return AcousticCostModel(track, config).segment_cost(start_frame, length_frames)


def median_filter_f0(track: PitchTrack) -> PitchTrack:
    """3-point median over f0 where a voiced frame has voiced neighbors.

    The identity on monotone stretches, so sweeps pass through unchanged;
    only single-frame flips (a window straddling an attack can lock onto a
    subharmonic that both sides share) get replaced by the local consensus.
    Voicing decisions are never altered.
    """
    f0 = np.asarray(track.f0_hz, dtype=np.float64)
    if len(f0) < 3:
        return track
    voiced = f0 > 0
    inner = voiced[1:-1] & voiced[:-2] & voiced[2:]
    med = np.median(np.stack([f0[:-2], f0[1:-1], f0[2:]]), axis=0)
    out = f0.copy()
    out[1:-1] = np.where(inner, med, f0[1:-1])
    return replace(track, f0_hz=out)


def transcribe_a(
    w: Waveform,
    config: AcousticConfig | None = None,
    pitch_track: PitchTrack | None = None,
) -> list[IspaAToken]:
    """Full acoustics-based transcription of one clip.

    Pipeline: pitch estimation (or an externally supplied track), spectral
    bandwidth, Viterbi segmentation under the pitch cost model, then token
    emission per segment. A segment whose median energy falls below the rest
    threshold is forced to rest regardless of its fitted pitch.
    """
    cfg = config or AcousticConfig()
    if w.sample_rate != cfg.sample_rate:
        w = resample(w, cfg.sample_rate)

    if pitch_track is None:
        pitch_cfg = replace(cfg.pitch, hop_seconds=cfg.hop_seconds)
        pitch_track = estimate_pitch(w, pitch_cfg)
    if cfg.median_filter:
        pitch_track = median_filter_f0(pitch_track)
    bw = spectral_bandwidth(w, cfg.hop_seconds)

    n = min(len(pitch_track), len(bw))
    segments = segment_acoustic(pitch_track, cfg, n_frames=n)
    return emit_tokens(segments, pitch_track, bw, cfg)


def segment_acoustic(
    track: PitchTrack, config: AcousticConfig, n_frames: int | None = None
) -> list[Segment]:
    """Viterbi segmentation of a pitch track under the acoustic cost model."""
    n = len(track) if n_frames is None else n_frames
    model = AcousticCostModel(track, config)
    seg_cfg = SegmentationConfig(lam=config.lam, allowed_lengths=config.allowed_lengths())
    return viterbi_segment(n, model, seg_cfg)


def emit_tokens(
    segments: list[Segment],
    track: PitchTrack,
    bw: BandwidthTrack,
    config: AcousticConfig,
) -> list[IspaAToken]:
    """Classify each segment into a token."""
    tokens = []
    for seg in segments:
        sl = slice(seg.start_frame, min(seg.end_frame, len(track)))
        length_code = quantize_length(seg.length, config.hop_seconds)
        median_db = float(np.median(track.energy_db[sl]))
        if seg.label is REST or median_db < config.rest_db:
            tokens.append(IspaAToken(length_code=length_code, rest=True))
            continue
        model: PitchSegmentModel = seg.label
        bw_slice = bw.values[seg.start_frame : min(seg.end_frame, len(bw))]
        letter = classify_bandwidth(
            float(np.median(bw_slice)) if len(bw_slice) else 0.0,
            config.bandwidth_thresholds,
        )
        tokens.append(
            IspaAToken(
                length_code=length_code,
                bandwidth=letter,
                octave=hz_to_octave(model.midpoint_hz),
                slope=model.slope_class,
            )
        )
    return tokens


# ---------------------------------------------------------------------------
# Token text grammar


def _slope_text(slope: int) -> str:
    if slope == 0:
        return "="
    return f"{slope:+d}"


def encode_tokens(tokens) -> str:
    """Render tokens as space-separated text; inverse of parse_tokens."""
    parts = []
    for tok in tokens:
        if tok.rest:
            parts.append(f"R{tok.length_code}")
        else:
            parts.append(
                f"{tok.bandwidth}{tok.octave}{tok.length_code}{_slope_text(tok.slope)}"
            )
    return " ".join(parts)


_LENGTH_CODES_BY_PREFIX = ("/32", "/16", "/8", "/4", "/2", "x2", "x4")


def _parse_length(text: str, pos: int, offset: int) -> tuple[str, int]:
    rest = text[pos:]
    if rest.startswith("/"):
        for code in _LENGTH_CODES_BY_PREFIX:
            if code[0] == "/" and rest.startswith(code):
                return code, pos + len(code)
        raise TokenSyntaxError(f"bad length code in {text!r}", offset + pos)
    if rest.startswith("x"):
        for code in ("x2", "x4"):
            if rest.startswith(code):
                return code, pos + len(code)
        raise TokenSyntaxError(f"bad length code in {text!r}", offset + pos)
    return "", pos  # whole note


def _parse_token(text: str, offset: int) -> IspaAToken:
    if not text:
        raise TokenSyntaxError("empty token", offset)
    head = text[0]
    if head == "R":
        code, pos = _parse_length(text, 1, offset)
        if pos != len(text):
            raise TokenSyntaxError(
                f"trailing characters {text[pos:]!r} after rest token", offset + pos
            )
        return IspaAToken(length_code=code, rest=True)
    if head not in BANDWIDTH_LETTERS:
        raise TokenSyntaxError(f"unknown leading character {head!r}", offset)
    if len(text) < 2 or not text[1].isdigit():
        raise TokenSyntaxError(f"expected octave digit in {text!r}", offset + 1)
    octave = int(text[1])
    code, pos = _parse_length(text, 2, offset)
    if pos >= len(text):
        raise TokenSyntaxError(f"missing slope in {text!r}", offset + len(text))
    s = text[pos]
    if s == "=":
        slope = 0
        pos += 1
    elif s in "+-" and pos + 1 < len(text) and text[pos + 1] in "123":
        slope = int(text[pos : pos + 2])
        pos += 2
    else:
        raise TokenSyntaxError(f"bad slope in {text!r}", offset + pos)
    if pos != len(text):
        raise TokenSyntaxError(
            f"trailing characters {text[pos:]!r}", offset + pos
        )
    return IspaAToken(
        length_code=code, bandwidth=head, octave=octave, slope=slope
    )


def parse_tokens(text: str) -> list[IspaAToken]:
    """Parse one utterance of space-separated tokens.

    Raises TokenSyntaxError with the character position of the first
    offending input.
    """
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        end = pos
        while end < n and not text[end].isspace():
            end += 1
        tokens.append(_parse_token(text[pos:end], pos))
        pos = end
    return tokens


# ---------------------------------------------------------------------------
# Resynthesis


def synthesize(tokens, sample_rate: int = 16000) -> Waveform:
    """Render tokens as pure tones (rests as silence) for verification.

    Pitched tokens sweep exponentially around their octave's center so the
    segment midpoint sits exactly on the center pitch; amplitude 0.3 with
    10 ms cosine edge ramps. Bandwidth letters are ignored.
    """
    pieces = []
    for tok in tokens:
        n = int(round(tok.duration_seconds * sample_rate))
        if tok.rest:
            pieces.append(np.zeros(n))
            continue
        center = octave_center_hz(tok.octave)
        ratio = SLOPE_CENTERS[tok.slope]
        t = np.arange(n) / sample_rate
        duration = n / sample_rate
        if ratio == 0.0:
            phase = 2.0 * np.pi * center * t
        else:
            f_start = center * 2.0 ** (-ratio / 2.0)
            k = ratio / duration
            phase = (
                2.0
                * np.pi
                * f_start
                * (2.0 ** (k * t) - 1.0)
                / (k * np.log(2.0))
            )
        tone = 0.3 * np.sin(phase)
        ramp = min(int(0.010 * sample_rate), n // 2)
        if ramp > 0:
            env = 0.5 * (1.0 - np.cos(np.pi * np.arange(ramp) / ramp))
            tone[:ramp] *= env
            tone[-ramp:] *= env[::-1]
        pieces.append(tone)
    samples = np.concatenate(pieces) if pieces else np.zeros(1)
    return Waveform(samples=samples, sample_rate=sample_rate)
