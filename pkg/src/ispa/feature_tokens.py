"""Feature-based transcription: k-means codebook over frame features.

Three output variants: raw (one cluster ID per frame), seg (Viterbi
segments with punctuation length codes), phn (seg with centroids relabeled
by their nearest phones).
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .features import FeatureSequence
from .segmenter import SegmentationConfig, viterbi_segment

DEFAULT_K = 64
DEFAULT_SEG_LAMBDA = 4.0
KMEANS_MAX_ITER = 300
KMEANS_REL_TOL = 1e-4
TRAIN_SUBSAMPLE_LIMIT = 200_000

# segment length in frames -> punctuation suffix
LENGTH_PUNCTUATION = {1: "", 2: ",", 5: ":", 10: ";", 20: ".", 50: ".."}
SEG_ALLOWED_LENGTHS = tuple(sorted(LENGTH_PUNCTUATION))

CODEBOOK_VERSION = 1


@dataclass(frozen=True)
class Codebook:
    """A trained set of centroids plus enough metadata to apply it."""

    centroids: np.ndarray  # (K, dim) float64
    feature_kind: str
    hop_seconds: float
    phone_labels: tuple | None = None

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 2:
            raise ValueError("need at least 2 centroids in a (K, dim) array")
        if not np.all(np.isfinite(c)):
            raise ValueError("centroids must be finite")
        object.__setattr__(self, "centroids", c)
        if self.phone_labels is not None:
            labels = tuple(self.phone_labels)
            if len(labels) != c.shape[0]:
                raise ValueError(
                    f"{len(labels)} labels for {c.shape[0]} centroids"
                )
            if len(set(labels)) != len(labels):
                raise ValueError("centroid labels must be distinct")
            object.__setattr__(self, "phone_labels", labels)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def symbol(self, cluster_id: int) -> str:
        if self.phone_labels is not None:
            return self.phone_labels[cluster_id]
        return f"c{cluster_id}"


@dataclass(frozen=True)
class PhoneTable:
    """Per-phone mean feature vectors with frame support counts."""

    phones: tuple
    vectors: np.ndarray  # (P, dim)
    support: np.ndarray  # (P,) ints

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        s = np.asarray(self.support, dtype=np.int64)
        if len(set(self.phones)) != len(self.phones):
            raise ValueError("phone symbols must be distinct")
        if v.shape[0] != len(self.phones) or s.shape[0] != len(self.phones):
            raise ValueError("phones, vectors and support must align")
        if not np.all(np.isfinite(v)):
            raise ValueError("phone vectors must be finite")
        if np.any(s < 1):
            raise ValueError("each phone needs support of at least one frame")
        object.__setattr__(self, "phones", tuple(self.phones))
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "support", s)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


# ---------------------------------------------------------------------------
# Codebook serialization


def save_codebook(cb: Codebook, path) -> None:
    payload = {
        "version": CODEBOOK_VERSION,
        "dim": cb.dim,
        "hop_seconds": cb.hop_seconds,
        "feature_kind": cb.feature_kind,
        "centroids": [[float(x) for x in row] for row in cb.centroids],
        "phone_labels": list(cb.phone_labels) if cb.phone_labels else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_codebook(path) -> Codebook:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("version")
    if version != CODEBOOK_VERSION:
        raise ValueError(f"unsupported codebook version {version!r}")
    cb = Codebook(
        centroids=np.asarray(payload["centroids"], dtype=np.float64),
        feature_kind=payload["feature_kind"],
        hop_seconds=float(payload["hop_seconds"]),
        phone_labels=payload.get("phone_labels"),
    )
    if cb.dim != payload["dim"]:
        raise ValueError("codebook dim field disagrees with centroid shape")
    return cb


# ---------------------------------------------------------------------------
# k-means


def _pairwise_sq(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (n, k)."""
    # ||p - c||^2 = ||p||^2 - 2 p.c + ||c||^2; clip the cancellation noise
    d = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    return np.maximum(d, 0.0)


def _kmeans_pp_init(points: np.ndarray, k: int, rng) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = _pairwise_sq(points, centers[:1])[:, 0]
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[i] = points[rng.integers(n)]
            continue
        centers[i] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, _pairwise_sq(points, centers[i : i + 1])[:, 0])
    return centers


def kmeans(points: np.ndarray, k: int, seed: int):
    """Lloyd's algorithm with k-means++ seeding.

    Returns (centroids, inertia_trace); the trace holds the inertia after
    every assignment step, so it is non-increasing by construction. Empty
    clusters are reseeded to the currently worst-served point.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array")
    n = points.shape[0]
    if n < k:
        raise ValueError(f"{n} frames cannot seed {k} clusters")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(points, k, rng)

    trace = []
    prev = np.inf
    for _ in range(KMEANS_MAX_ITER):
        d2 = _pairwise_sq(points, centers)
        assign = np.argmin(d2, axis=1)
        best = d2[np.arange(n), assign]
        inertia = float(best.sum())
        trace.append(inertia)

        counts = np.bincount(assign, minlength=k)
        while np.any(counts == 0):
            # move each empty cluster onto a fresh worst-served point; the
            # -1 sentinel keeps argmax from re-picking a donated point, and
            # the loop re-runs in case a donor cluster lost its only member
            for empty in np.flatnonzero(counts == 0):
                worst = int(np.argmax(best))
                centers[empty] = points[worst]
                best[worst] = -1.0
                assign[worst] = empty
            counts = np.bincount(assign, minlength=k)

        sums = np.zeros_like(centers)
        np.add.at(sums, assign, points)
        centers = sums / counts[:, None]

        if prev - inertia < KMEANS_REL_TOL * max(prev, 1e-30) and np.isfinite(prev):
            break
        prev = inertia
    return centers, trace


def train_codebook(
    corpus,
    k: int = DEFAULT_K,
    seed: int = 0,
    feature_kind: str | None = None,
) -> Codebook:
    """Fit a codebook on the pooled frames of a feature corpus."""
    seqs = list(corpus)
    if not seqs:
        raise ValueError("empty corpus")
    dim = seqs[0].dim
    hop = seqs[0].hop_seconds
    for s in seqs:
        if s.dim != dim:
            raise ValueError(f"mixed feature dims in corpus: {s.dim} vs {dim}")
    points = np.concatenate([s.frames for s in seqs], axis=0)
    if points.shape[0] < k:
        raise ValueError(f"corpus has {points.shape[0]} frames, fewer than K={k}")
    if points.shape[0] > TRAIN_SUBSAMPLE_LIMIT:
        rng = np.random.default_rng(seed)
        idx = rng.choice(points.shape[0], TRAIN_SUBSAMPLE_LIMIT, replace=False)
        points = points[np.sort(idx)]
    centers, _ = kmeans(points, k, seed)
    kind = feature_kind if feature_kind is not None else f"dim-{dim}"
    return Codebook(centroids=centers, feature_kind=kind, hop_seconds=hop)


# ---------------------------------------------------------------------------
# Assignment and segment costs


def assign_frames(features: FeatureSequence, cb: Codebook) -> np.ndarray:
    """Nearest centroid ID per frame; ties go to the smaller ID."""
    if features.dim != cb.dim:
        raise ValueError(f"feature dim {features.dim} != codebook dim {cb.dim}")
    return np.argmin(_pairwise_sq(features.frames, cb.centroids), axis=1)


def corpus_inertia(corpus, cb: Codebook) -> float:
    """Sum of squared distances of every frame to its nearest centroid."""
    total = 0.0
    for features in corpus:
        d2 = _pairwise_sq(features.frames, cb.centroids)
        total += float(d2.min(axis=1).sum())
    return total


class FeatureCostModel:
    """Segment cost D_k = sum over the span of ||f(t) - c_k||^2.

    Prefix sums make any span's cost O(K): with S1 = cumulative frame sums
    and S2 = cumulative squared norms, D_k = S2 span - 2 c_k . S1 span +
    n ||c_k||^2. `normalize` divides by dim so one lambda default serves
    40-dim and 768-dim features alike.
    """

    def __init__(self, features: FeatureSequence, cb: Codebook, normalize: bool = False):
        if features.dim != cb.dim:
            raise ValueError(f"feature dim {features.dim} != codebook dim {cb.dim}")
        f = features.frames
        self._s1 = np.concatenate([np.zeros((1, f.shape[1])), np.cumsum(f, axis=0)])
        self._s2 = np.concatenate([[0.0], np.cumsum(np.sum(f**2, axis=1))])
        self._centroids = cb.centroids
        self._cnorm = np.sum(cb.centroids**2, axis=1)
        self._scale = 1.0 / cb.dim if normalize else 1.0

    def costs(self, start_frame: int, length_frames: int) -> np.ndarray:
        end = start_frame + length_frames
        s1 = self._s1[end] - self._s1[start_frame]
        s2 = self._s2[end] - self._s2[start_frame]
        d = s2 - 2.0 * (self._centroids @ s1) + length_frames * self._cnorm
        return np.maximum(d, 0.0) * self._scale

    def segment_cost(self, start_frame: int, length_frames: int):
        d = self.costs(start_frame, length_frames)
        k = int(np.argmin(d))
        return k, float(d[k])


def feature_segment_cost(
    features: FeatureSequence, cb: Codebook, start_frame: int, length_frames: int
):
    """Best (cluster ID, unnormalized distance) for one span."""
    return FeatureCostModel(features, cb).segment_cost(start_frame, length_frames)


# ---------------------------------------------------------------------------
# Token text


def encode_length_punct(length_frames: int) -> str:
    try:
        return LENGTH_PUNCTUATION[length_frames]
    except KeyError:
        raise ValueError(
            f"no punctuation code for a {length_frames}-frame segment"
        ) from None


def decode_length_punct(token: str) -> tuple[str, int]:
    """Split a seg/phn token into (symbol, length in frames).

    Assumes the symbol itself does not end in one of the punctuation marks.
    """
    for suffix, length in (("..", 50), (".", 20), (";", 10), (":", 5), (",", 2)):
        if token.endswith(suffix):
            return token[: -len(suffix)], length
    return token, 1


def transcribe_f(
    features: FeatureSequence,
    cb: Codebook,
    variant: str = "seg",
    lam: float = DEFAULT_SEG_LAMBDA,
) -> str:
    """Feature-based transcription of one clip as token text."""
    if variant not in ("raw", "seg", "phn"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "phn" and cb.phone_labels is None:
        raise ValueError("phn variant needs a codebook with phone labels")
    if variant == "raw":
        return " ".join(f"c{i}" for i in assign_frames(features, cb))

    model = FeatureCostModel(features, cb, normalize=True)
    seg_cfg = SegmentationConfig(lam=lam, allowed_lengths=SEG_ALLOWED_LENGTHS)
    segments = viterbi_segment(len(features), model, seg_cfg)
    parts = []
    for seg in segments:
        length = seg.length if not seg.padded else seg_cfg.nearest_length(seg.length)
        symbol = cb.symbol(seg.label) if variant == "phn" else f"c{seg.label}"
        parts.append(symbol + encode_length_punct(length))
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Phone mapping


def read_phone_alignment(path) -> list:
    """Rows of (start_s, end_s, phone) from a start_s,end_s,phone CSV."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"start_s", "end_s", "phone"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise ValueError(f"{path}: alignment CSV needs columns start_s,end_s,phone")
        for i, row in enumerate(reader):
            try:
                start, end = float(row["start_s"]), float(row["end_s"])
            except ValueError:
                raise ValueError(f"{path}: bad number on data row {i}") from None
            phone = (row["phone"] or "").strip()
            if not phone:
                raise ValueError(f"{path}: empty phone symbol on data row {i}")
            if end < start:
                raise ValueError(f"{path}: interval ends before it starts on row {i}")
            rows.append((start, end, phone))
    return rows


def phone_mean_vectors(corpus) -> PhoneTable:
    """Mean feature vector per phone over aligned intervals.

    `corpus` yields (FeatureSequence, alignment rows). A frame belongs to a
    phone when its center time falls inside one of the phone's intervals.
    Phones that cover no frame centers are dropped with a warning.
    """
    sums: dict = {}
    counts: dict = {}
    seen = set()
    for features, alignment in corpus:
        n = len(features)
        times = features.start_time_s + np.arange(n) * features.hop_seconds
        stream_end = features.start_time_s + n * features.hop_seconds
        for start, end, phone in alignment:
            seen.add(phone)
            if start > stream_end:
                warnings.warn(
                    f"alignment for {phone!r} starts at {start:.3f}s, past the "
                    f"feature stream end at {stream_end:.3f}s; clipped"
                )
            covered = (times >= start) & (times < end)
            if not covered.any():
                continue
            if phone not in sums:
                sums[phone] = np.zeros(features.dim)
                counts[phone] = 0
            sums[phone] += features.frames[covered].sum(axis=0)
            counts[phone] += int(covered.sum())
    phones = sorted(sums)
    for phone in sorted(seen - set(phones)):
        warnings.warn(f"phone {phone!r} covers no frame centers; dropped")
    if not phones:
        raise ValueError("no phone gathered any frames")
    vectors = np.stack([sums[p] / counts[p] for p in phones])
    support = np.array([counts[p] for p in phones])
    return PhoneTable(phones=tuple(phones), vectors=vectors, support=support)


def solve_assignment(cost: np.ndarray) -> list:
    """Minimum-cost one-to-one pairing of rows to columns.

    Returns min(n, m) (row, column) pairs. Among equal-cost optima the
    lexicographically smallest pair list wins, fixed by re-solving with each
    candidate pair forced in turn.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise ValueError("cost must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must be finite")
    n, m = cost.shape
    quota = min(n, m)
    rows_opt, cols_opt = linear_sum_assignment(cost)
    base = float(cost[rows_opt, cols_opt].sum())
    eps = 1e-9 * max(1.0, abs(base))

    pairs = []
    used_cols: list = []
    acc = 0.0
    for r in range(n):
        if len(pairs) == quota:
            break
        remaining_rows = np.arange(r + 1, n)
        assigned = None
        for c in range(m):
            if c in used_cols:
                continue
            keep = [cc for cc in range(m) if cc != c and cc not in used_cols]
            if len(pairs) + 1 < quota:
                sub = cost[np.ix_(remaining_rows, keep)]
                ri, ci = linear_sum_assignment(sub)
                rest = float(sub[ri, ci].sum())
            else:
                rest = 0.0
            if abs(acc + cost[r, c] + rest - base) <= eps:
                assigned = c
                break
        if assigned is None:
            continue  # this row stays unmatched in every optimal solution
        pairs.append((r, assigned))
        used_cols.append(assigned)
        acc += cost[r, assigned]
    return pairs


def map_phones(cb: Codebook, table: PhoneTable) -> Codebook:
    """Relabel centroids with their assigned phones.

    Builds the phone-by-centroid Euclidean distance matrix, solves the
    assignment, and labels each matched centroid with its phone; leftovers
    keep synthesized c<ID> labels.
    """
    if table.dim != cb.dim:
        raise ValueError(f"phone dim {table.dim} != codebook dim {cb.dim}")
    diff = table.vectors[:, None, :] - cb.centroids[None, :, :]
    cost = np.sqrt(np.sum(diff**2, axis=2))
    pairs = solve_assignment(cost)
    labels = [f"c{j}" for j in range(cb.k)]
    for phone_i, centroid_j in pairs:
        labels[centroid_j] = table.phones[phone_i]
    if len(set(labels)) != len(labels):
        raise ValueError(
            "phone symbols collide with synthesized centroid labels"
        )
    return replace(cb, phone_labels=tuple(labels))
