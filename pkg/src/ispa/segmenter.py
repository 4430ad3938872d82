"""Minimum-cost segmentation of frame sequences into variable-length spans.

The engine minimizes sum over segments of D(s) + lambda * LP(s), where D
comes from a pluggable cost model and LP(len) = 1 / (1 + ln(len)) penalizes
short segments. A brute-force enumerator provides an exact oracle for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

BRUTE_FORCE_MAX_FRAMES = 20


class CostModel(Protocol):
    """Provider of the best label and distance for a candidate span."""

    def segment_cost(self, start_frame: int, length_frames: int) -> tuple[object, float]:
        """Return (best_label, D) for the span [start, start + length)."""
        ...


@dataclass(frozen=True)
class Segment:
    """A labeled span of frames; end_frame is exclusive."""

    start_frame: int
    end_frame: int
    label: object
    cost: float  # D + lambda * LP for this span
    padded: bool = False

    def __post_init__(self):
        if not (0 <= self.start_frame < self.end_frame):
            raise ValueError(
                f"invalid span [{self.start_frame}, {self.end_frame})"
            )

    @property
    def length(self) -> int:
        return self.end_frame - self.start_frame


@dataclass(frozen=True)
class SegmentationConfig:
    """Penalty weight and the candidate segment lengths, in frames."""

    lam: float
    allowed_lengths: tuple[int, ...]

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        lengths = tuple(self.allowed_lengths)
        if not lengths:
            raise ValueError("allowed_lengths must be non-empty")
        if any(l < 1 for l in lengths):
            raise ValueError("allowed lengths must be positive")
        if list(lengths) != sorted(set(lengths)):
            raise ValueError("allowed_lengths must be strictly ascending")
        object.__setattr__(self, "allowed_lengths", lengths)

    def nearest_length(self, length_frames: int) -> int:
        """The allowed length closest to length_frames (ties to the longer)."""
        return min(
            reversed(self.allowed_lengths),
            key=lambda l: abs(l - length_frames),
        )


def length_penalty(length_frames: int) -> float:
    """LP(len) = 1 / (1 + ln(len)); strictly decreasing, LP(1) = 1."""
    if length_frames < 1:
        raise ValueError("segment length must be at least one frame")
    return 1.0 / (1.0 + math.log(length_frames))


def viterbi_segment(
    n_frames: int,
    model: CostModel,
    config: SegmentationConfig,
    pad_tail: bool = True,
) -> list[Segment]:
    """Optimal tiling of [0, n_frames) by dynamic programming.

    best[t] = min over allowed lengths l <= t of
        best[t - l] + D(t - l, l) + lambda * LP(l).
    Ties prefer the longer final segment (the cost model breaks label ties).

    When no combination of allowed lengths reaches n_frames exactly, the
    longest reachable prefix is tiled and the residue becomes one extra
    segment flagged `padded` (or ValueError when pad_tail is false).
    """
    if n_frames < 1:
        raise ValueError("n_frames must be at least 1")
    lengths = config.allowed_lengths
    penalties = {l: config.lam * length_penalty(l) for l in lengths}

    inf = math.inf
    best = [inf] * (n_frames + 1)
    best[0] = 0.0
    back = [0] * (n_frames + 1)
    for t in range(1, n_frames + 1):
        best_cost = inf
        best_len = 0
        for l in reversed(lengths):  # longer lengths win ties
            if l > t or best[t - l] == inf:
                continue
            _, dist = model.segment_cost(t - l, l)
            cost = best[t - l] + dist + penalties[l]
            if cost < best_cost:
                best_cost = cost
                best_len = l
        best[t] = best_cost
        back[t] = best_len

    end = n_frames
    residue = 0
    if best[end] == inf:
        if not pad_tail:
            raise ValueError(
                f"{n_frames} frames cannot be tiled by lengths {lengths}"
            )
        while end > 0 and best[end] == inf:
            end -= 1
        residue = n_frames - end

    segments: list[Segment] = []
    t = end
    while t > 0:
        l = back[t]
        label, dist = model.segment_cost(t - l, l)
        segments.append(
            Segment(
                start_frame=t - l,
                end_frame=t,
                label=label,
                cost=dist + penalties[l],
            )
        )
        t -= l
    segments.reverse()

    if residue:
        label, dist = model.segment_cost(end, residue)
        segments.append(
            Segment(
                start_frame=end,
                end_frame=n_frames,
                label=label,
                cost=dist + config.lam * length_penalty(residue),
                padded=True,
            )
        )
    return segments


def brute_force_segment(
    n_frames: int,
    model: CostModel,
    config: SegmentationConfig,
    pad_tail: bool = True,
) -> list[Segment]:
    """Exhaustive minimum over all tilings; test oracle for viterbi_segment.

    Uses the same tie-break as the DP: among minimum-cost tilings, prefer
    the one whose reversed length sequence is lexicographically largest
    (longest last segment, then longest second-to-last, and so on). Mirrors
    the DP's tail handling: the longest tileable prefix plus one padded
    residue segment.
    """
    if n_frames > BRUTE_FORCE_MAX_FRAMES:
        raise ValueError(
            f"brute force limited to {BRUTE_FORCE_MAX_FRAMES} frames, "
            f"got {n_frames}"
        )
    if n_frames < 1:
        raise ValueError("n_frames must be at least 1")
    lengths = config.allowed_lengths
    penalties = {l: config.lam * length_penalty(l) for l in lengths}

    reachable = {0}
    for t in range(1, n_frames + 1):
        if any(t - l in reachable for l in lengths):
            reachable.add(t)
    target = max(r for r in reachable if r <= n_frames)
    if target < n_frames and not pad_tail:
        raise ValueError(
            f"{n_frames} frames cannot be tiled by lengths {lengths}"
        )

    best_cost = math.inf
    best_key: tuple[int, ...] | None = None
    best_tiling: list[int] | None = None

    def recurse(t: int, acc: float, tiling: list[int]):
        nonlocal best_cost, best_key, best_tiling
        if t == target:
            key = tuple(reversed(tiling))
            if acc < best_cost or (acc == best_cost and key > best_key):
                best_cost = acc
                best_key = key
                best_tiling = list(tiling)
            return
        for l in lengths:
            if t + l > target:
                break
            _, dist = model.segment_cost(t, l)
            tiling.append(l)
            recurse(t + l, acc + dist + penalties[l], tiling)
            tiling.pop()

    recurse(0, 0.0, [])

    segments = []
    t = 0
    for l in best_tiling:
        label, dist = model.segment_cost(t, l)
        segments.append(
            Segment(
                start_frame=t,
                end_frame=t + l,
                label=label,
                cost=dist + penalties[l],
            )
        )
        t += l
    if target < n_frames:
        residue = n_frames - target
        label, dist = model.segment_cost(target, residue)
        segments.append(
            Segment(
                start_frame=target,
                end_frame=n_frames,
                label=label,
                cost=dist + config.lam * length_penalty(residue),
                padded=True,
            )
        )
    return segments


@dataclass
class TableCostModel:
    """Cost model backed by explicit per-span tables; used in tests.

    table[(start, length)] = (label, distance).
    """

    table: dict = field(default_factory=dict)

    def segment_cost(self, start_frame: int, length_frames: int):
        return self.table[(start_frame, length_frames)]
