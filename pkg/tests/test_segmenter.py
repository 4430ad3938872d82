"""Viterbi segmentation against exhaustive enumeration."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ispa.segmenter import (
    Segment,
    SegmentationConfig,
    TableCostModel,
    brute_force_segment,
    length_penalty,
    viterbi_segment,
)


def random_model(rng, n_frames, lengths, n_labels=3):
    """Cost tables with continuous random distances (ties measure-zero).

    Fills every span, not just allowed lengths, so that padded residue
    lookups also hit the table.
    """
    table = {}
    for start in range(n_frames):
        for length in range(1, n_frames - start + 1):
            label = int(rng.integers(n_labels))
            table[(start, length)] = (label, float(rng.uniform(0, 10)))
    return TableCostModel(table)


class TestLengthPenalty:
    def test_known_values(self):
        assert length_penalty(1) == 1.0
        assert length_penalty(math.e) == pytest.approx(0.5)
        assert length_penalty(50) == pytest.approx(1 / (1 + math.log(50)))

    def test_strictly_decreasing(self):
        values = [length_penalty(n) for n in range(1, 100)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestConfig:
    def test_rejects_bad_lengths(self):
        with pytest.raises(ValueError):
            SegmentationConfig(lam=1.0, allowed_lengths=())
        with pytest.raises(ValueError):
            SegmentationConfig(lam=1.0, allowed_lengths=(2, 2))
        with pytest.raises(ValueError):
            SegmentationConfig(lam=1.0, allowed_lengths=(3, 1))
        with pytest.raises(ValueError):
            SegmentationConfig(lam=-0.5, allowed_lengths=(1,))

    def test_nearest_length_ties_to_longer(self):
        cfg = SegmentationConfig(lam=1.0, allowed_lengths=(2, 4, 8))
        assert cfg.nearest_length(3) == 4
        assert cfg.nearest_length(6) == 8
        assert cfg.nearest_length(100) == 8
        assert cfg.nearest_length(1) == 2


class TestAgainstBruteForce:
    def test_matches_on_random_instances(self):
        rng = np.random.default_rng(42)
        sets = [(1, 2, 5), (2, 3), (1, 4), (1, 2, 5, 10), (3,)]
        for trial in range(200):
            lengths = sets[trial % len(sets)]
            n = int(rng.integers(1, 13))
            model = random_model(rng, n, lengths)
            lam = float(rng.uniform(0, 5))
            cfg = SegmentationConfig(lam=lam, allowed_lengths=lengths)
            got = viterbi_segment(n, model, cfg)
            want = brute_force_segment(n, model, cfg)
            assert got == want, f"trial {trial}, n={n}, lengths={lengths}"

    def test_matches_with_engineered_ties(self):
        # every span costs the same, so tie-breaking does all the work
        for n in range(1, 11):
            lengths = (1, 2, 5)
            table = {
                (s, l): (0, 1.0)
                for s in range(n)
                for l in lengths
                if s + l <= n
            }
            model = TableCostModel(table)
            cfg = SegmentationConfig(lam=0.0, allowed_lengths=lengths)
            assert viterbi_segment(n, model, cfg) == brute_force_segment(n, model, cfg)

    @given(
        n=st.integers(min_value=1, max_value=12),
        lam=st.floats(min_value=0, max_value=8, allow_nan=False),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    @settings(max_examples=60, deadline=None)
    def test_property_random_tables(self, n, lam, seed):
        rng = np.random.default_rng(seed)
        lengths = (1, 2, 5)
        model = random_model(rng, n, lengths)
        cfg = SegmentationConfig(lam=lam, allowed_lengths=lengths)
        assert viterbi_segment(n, model, cfg) == brute_force_segment(n, model, cfg)


class TestTiling:
    def test_segments_tile_input(self):
        rng = np.random.default_rng(1)
        for n in (1, 7, 23, 50):
            model = random_model(rng, n, (1, 2, 5, 10))
            cfg = SegmentationConfig(lam=2.0, allowed_lengths=(1, 2, 5, 10))
            segs = viterbi_segment(n, model, cfg)
            assert segs[0].start_frame == 0
            assert segs[-1].end_frame == n
            for a, b in zip(segs, segs[1:]):
                assert a.end_frame == b.start_frame

    def test_padded_tail(self):
        rng = np.random.default_rng(2)
        model = random_model(rng, 7, (4, 8))
        cfg = SegmentationConfig(lam=1.0, allowed_lengths=(4, 8))
        segs = viterbi_segment(7, model, cfg)
        assert [s.length for s in segs] == [4, 3]
        assert not segs[0].padded and segs[1].padded

    def test_unexpressible_without_padding_raises(self):
        rng = np.random.default_rng(3)
        model = random_model(rng, 7, (4, 8))
        cfg = SegmentationConfig(lam=1.0, allowed_lengths=(4, 8))
        with pytest.raises(ValueError):
            viterbi_segment(7, model, cfg, pad_tail=False)

    def test_all_frames_unreachable_pads_everything(self):
        rng = np.random.default_rng(4)
        model = random_model(rng, 3, (4,))
        cfg = SegmentationConfig(lam=1.0, allowed_lengths=(4,))
        segs = viterbi_segment(3, model, cfg)
        assert len(segs) == 1 and segs[0].padded and segs[0].length == 3


class TestLambdaBehavior:
    def test_total_length_penalty_non_increasing_in_lambda(self):
        # raising lambda can only push the optimum toward smaller total LP
        rng = np.random.default_rng(7)
        lengths = (1, 2, 5, 10)
        for _ in range(30):
            n = int(rng.integers(5, 40))
            model = random_model(rng, n, lengths)
            prev = None
            for lam in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
                cfg = SegmentationConfig(lam=lam, allowed_lengths=lengths)
                segs = viterbi_segment(n, model, cfg)
                total_lp = sum(length_penalty(s.length) for s in segs)
                if prev is not None:
                    assert total_lp <= prev + 1e-12
                prev = total_lp

    def test_segment_count_non_increasing_in_lambda_on_random_instances(self):
        # Not a theorem: only the total-LP version above is guaranteed, and
        # a crafted table can trade a short+long split for three mid-length
        # segments with *lower* total LP as lambda grows, raising the count.
        # On random tables that inversion needs a conspiracy of costs that
        # has probability ~0, so the count ordering is asserted empirically.
        rng = np.random.default_rng(11)
        lengths = (1, 2, 5, 10)
        for _ in range(60):
            n = int(rng.integers(5, 40))
            model = random_model(rng, n, lengths)
            prev = None
            for lam in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
                cfg = SegmentationConfig(lam=lam, allowed_lengths=lengths)
                count = len(viterbi_segment(n, model, cfg))
                if prev is not None:
                    assert count <= prev
                prev = count

    def test_segment_count_shrinks_on_constant_signal(self):
        # a flat signal coalesces into one maximal segment once lambda > 0
        lengths = (1, 2, 5, 10, 20, 50)
        table = {
            (s, l): (0, 0.0) for s in range(50) for l in lengths if s + l <= 50
        }
        model = TableCostModel(table)
        cfg = SegmentationConfig(lam=1.0, allowed_lengths=lengths)
        segs = viterbi_segment(50, model, cfg)
        assert len(segs) == 1 and segs[0].length == 50


class TestBruteForceGuard:
    def test_too_many_frames_rejected(self):
        model = TableCostModel({})
        cfg = SegmentationConfig(lam=1.0, allowed_lengths=(1,))
        with pytest.raises(ValueError):
            brute_force_segment(21, model, cfg)


class TestRuntimeScaling:
    def test_roughly_linear_in_frame_count(self):
        # coarse guard against superlinear regressions: 10x the frames may
        # cost at most 15x the time (generous for scheduler noise)
        import time

        lengths = (1, 2, 5, 10, 20, 50)
        cfg = SegmentationConfig(lam=2.0, allowed_lengths=lengths)

        def build(n, seed):
            rng = np.random.default_rng(seed)
            table = {}
            for s in range(n):
                for l in lengths:
                    if s + l <= n:
                        table[(s, l)] = (0, float(rng.uniform(0, 10)))
            return TableCostModel(table)

        def clock(n, model):
            best = float("inf")
            for _ in range(3):
                t0 = time.perf_counter()
                viterbi_segment(n, model, cfg)
                best = min(best, time.perf_counter() - t0)
            return best

        small_model = build(1_000, 5)
        big_model = build(10_000, 6)
        clock(1_000, small_model)  # warm caches
        small = clock(1_000, small_model)
        big = clock(10_000, big_model)
        assert big <= 15.0 * small, f"10k frames took {big / small:.1f}x of 1k"


class TestSegment:
    def test_validation(self):
        with pytest.raises(ValueError):
            Segment(start_frame=5, end_frame=5, label=0, cost=0.0)
        with pytest.raises(ValueError):
            Segment(start_frame=-1, end_frame=3, label=0, cost=0.0)
        s = Segment(start_frame=2, end_frame=7, label="x", cost=1.5)
        assert s.length == 5
