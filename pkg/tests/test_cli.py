"""End-to-end tests of the command-line interface via subprocess."""

import json
import subprocess
import sys

import numpy as np
import pytest

from ispa.audio import save_wav
from ispa.feature_tokens import decode_length_punct, load_codebook
from ispa.features import FeatureSequence, write_features

from conftest import make_silence, make_tone


def run_cli(*argv, input_text=None):
    return subprocess.run(
        [sys.executable, "-m", "ispa.cli", *argv],
        capture_output=True,
        text=True,
        input=input_text,
        timeout=120,
    )


def write_feature_file(path, frames, hop=0.02):
    seq = FeatureSequence(
        hop_seconds=hop, frames=np.asarray(frames, dtype=np.float64)
    )
    write_features(path, seq)
    return path


@pytest.fixture()
def tone_wav(tmp_path):
    path = tmp_path / "tone.wav"
    save_wav(path, make_tone(700.0, 2.0))
    return path


class TestTranscribeCommand:
    def test_tone_to_token_text(self, tone_wav):
        proc = run_cli("--jobs", "1", "transcribe", "--method", "ispa-a", str(tone_wav))
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.strip() == "N5/2="

    def test_multiple_files_preserve_order(self, tmp_path):
        a = tmp_path / "a.wav"
        b = tmp_path / "b.wav"
        c = tmp_path / "c.wav"
        save_wav(a, make_tone(700.0, 1.0))
        save_wav(b, make_silence(1.0))
        save_wav(c, make_tone(700.0, 1.0))
        proc = run_cli(
            "--jobs", "2", "transcribe", "--method", "ispa-a",
            str(a), str(b), str(c),
        )
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.splitlines() == ["N5/4=", "R/4", "N5/4="]

    def test_output_file(self, tone_wav, tmp_path):
        out = tmp_path / "tokens.txt"
        proc = run_cli(
            "--jobs", "1", "transcribe", "--method", "ispa-a",
            "--out", str(out), str(tone_wav),
        )
        assert proc.returncode == 0, proc.stderr
        assert out.read_text().strip() == "N5/2="

    def test_missing_file_is_runtime_error(self, tmp_path):
        proc = run_cli(
            "--jobs", "1", "transcribe", "--method", "ispa-a",
            str(tmp_path / "nope.wav"),
        )
        assert proc.returncode == 1
        assert "nope.wav" in proc.stderr

    def test_feature_method_on_ispf_file(self, tmp_path):
        rng = np.random.default_rng(0)
        frames = np.concatenate([np.zeros((20, 2)), np.full((20, 2), 9.0)])
        feat = write_feature_file(tmp_path / "clip.ispf", frames)
        train = write_feature_file(
            tmp_path / "train.ispf",
            np.concatenate([rng.normal(0, 0.1, (50, 2)), rng.normal(9, 0.1, (50, 2))]),
        )
        cb_path = tmp_path / "cb.json"
        proc = run_cli(
            "train-codebook", "--k", "2", "--out", str(cb_path), str(train)
        )
        assert proc.returncode == 0, proc.stderr
        assert "codebook K=2 dim=2" in proc.stdout

        raw = run_cli(
            "--jobs", "1", "transcribe", "--method", "ispa-f",
            "--codebook", str(cb_path), "--variant", "raw", str(feat),
        )
        assert raw.returncode == 0, raw.stderr
        assert len(raw.stdout.split()) == 40

        seg = run_cli(
            "--jobs", "1", "transcribe", "--method", "ispa-f",
            "--codebook", str(cb_path), "--variant", "seg", str(feat),
        )
        assert seg.returncode == 0, seg.stderr
        tokens = seg.stdout.split()
        assert len(tokens) < 40
        assert sum(decode_length_punct(t)[1] for t in tokens) == 40


class TestUsageErrors:
    def test_missing_method_exits_two(self, tone_wav):
        proc = run_cli("transcribe", str(tone_wav))
        assert proc.returncode == 2

    def test_variant_with_acoustic_method(self, tone_wav):
        proc = run_cli(
            "transcribe", "--method", "ispa-a", "--variant", "seg", str(tone_wav)
        )
        assert proc.returncode == 2
        assert "--variant" in proc.stderr

    def test_feature_method_needs_codebook(self, tone_wav):
        proc = run_cli("transcribe", "--method", "ispa-f", str(tone_wav))
        assert proc.returncode == 2
        assert "--codebook" in proc.stderr

    def test_pitch_with_many_inputs(self, tone_wav, tmp_path):
        other = tmp_path / "other.wav"
        save_wav(other, make_tone(440.0, 1.0))
        proc = run_cli(
            "transcribe", "--method", "ispa-a", "--pitch", "x.csv",
            str(tone_wav), str(other),
        )
        assert proc.returncode == 2

    def test_unknown_command(self):
        proc = run_cli("frobnicate")
        assert proc.returncode == 2


class TestTrainCodebook:
    def test_deterministic_across_runs(self, tmp_path):
        rng = np.random.default_rng(1)
        feat = write_feature_file(
            tmp_path / "train.ispf", rng.standard_normal((200, 3))
        )
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (out_a, out_b):
            proc = run_cli(
                "train-codebook", "--k", "4", "--seed", "3",
                "--out", str(out), str(feat),
            )
            assert proc.returncode == 0, proc.stderr
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_seed_changes_result(self, tmp_path):
        rng = np.random.default_rng(2)
        feat = write_feature_file(
            tmp_path / "train.ispf", rng.standard_normal((200, 3))
        )
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        run_cli("train-codebook", "--k", "4", "--seed", "0", "--out", str(out_a), str(feat))
        run_cli("train-codebook", "--k", "4", "--seed", "9", "--out", str(out_b), str(feat))
        assert out_a.read_bytes() != out_b.read_bytes()


class TestMapPhones:
    def test_full_pipeline(self, tmp_path):
        rng = np.random.default_rng(3)
        # two well-separated feature clusters, 20 frames each at 20 ms
        frames = np.concatenate(
            [rng.normal(0, 0.05, (20, 2)), rng.normal(8, 0.05, (20, 2))]
        )
        feat = write_feature_file(tmp_path / "clip.ispf", frames)
        cb_path = tmp_path / "cb.json"
        run_cli("train-codebook", "--k", "2", "--out", str(cb_path), str(feat))

        align = tmp_path / "align.csv"
        align.write_text(
            "start_s,end_s,phone\n0.0,0.4,aa\n0.4,0.8,ii\n"
        )
        mapped_path = tmp_path / "mapped.json"
        proc = run_cli(
            "map-phones", "--codebook", str(cb_path),
            "--features", str(feat), "--alignment", str(align),
            "--out", str(mapped_path),
        )
        assert proc.returncode == 0, proc.stderr
        assert "mapped 2 phones" in proc.stdout
        mapped = load_codebook(mapped_path)
        assert set(mapped.phone_labels) == {"aa", "ii"}

        phn = run_cli(
            "--jobs", "1", "transcribe", "--method", "ispa-f",
            "--codebook", str(mapped_path), "--variant", "phn", str(feat),
        )
        assert phn.returncode == 0, phn.stderr
        symbols = {decode_length_punct(t)[0] for t in phn.stdout.split()}
        assert symbols == {"aa", "ii"}

    def test_mismatched_pairs_rejected(self, tmp_path):
        proc = run_cli(
            "map-phones", "--codebook", "cb.json",
            "--features", "a.ispf", "b.ispf", "--alignment", "a.csv",
            "--out", "out.json",
        )
        assert proc.returncode == 2


class TestEvalCommand:
    def test_end_to_end_report(self, tmp_path):
        rows = ["path,label,split"]
        for i in range(3):
            for freq, label in ((440.0, "low"), (3520.0, "high")):
                name = f"{label}_{i}.wav"
                save_wav(tmp_path / name, make_tone(freq, 1.0))
                split = ["train", "train", "valid"][i] if i < 3 else "train"
                rows.append(f"{name},{label},{split}")
        for freq, label in ((440.0, "low"), (3520.0, "high")):
            name = f"{label}_test.wav"
            save_wav(tmp_path / name, make_tone(freq, 1.0))
            rows.append(f"{name},{label},test")
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("\n".join(rows) + "\n")

        out = tmp_path / "report.json"
        proc = run_cli(
            "--jobs", "1", "eval", "--manifest", str(manifest),
            "--method", "ispa-a", "--ngram", "1", "--out", str(out),
        )
        assert proc.returncode == 0, proc.stderr
        report = json.loads(out.read_text())
        assert report["accuracy"]["test"] == 1.0
        assert report["config"]["method"] == "ispa-a"
        assert report["tokens_per_second"] > 0


class TestSynthCommand:
    def test_synth_then_transcribe_round_trip(self, tmp_path):
        text_file = tmp_path / "tokens.txt"
        text_file.write_text("N5/2= R/4\n")
        wav = tmp_path / "out.wav"
        proc = run_cli("synth", "--out", str(wav), str(text_file))
        assert proc.returncode == 0, proc.stderr
        assert wav.exists()

        back = run_cli("--jobs", "1", "transcribe", "--method", "ispa-a", str(wav))
        assert back.returncode == 0, back.stderr
        assert back.stdout.strip() == "N5/2= R/4"

    def test_reads_stdin(self, tmp_path):
        wav = tmp_path / "out.wav"
        proc = run_cli("synth", "--out", str(wav), input_text="R/8\n")
        assert proc.returncode == 0, proc.stderr
        assert wav.exists()

    def test_bad_token_text_is_runtime_error(self, tmp_path):
        proc = run_cli(
            "synth", "--out", str(tmp_path / "out.wav"), input_text="N5q=\n"
        )
        assert proc.returncode == 1
        assert "ispa: error:" in proc.stderr
