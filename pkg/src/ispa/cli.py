"""Command-line front end: transcribe, train-codebook, map-phones, eval, synth.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .acoustic import (
    AcousticConfig,
    encode_tokens,
    parse_tokens,
    synthesize,
    transcribe_a,
)
from .audio import load_audio, save_wav
from .evaluate import TokenDocument, read_manifest, run_eval
from .feature_tokens import (
    DEFAULT_K,
    DEFAULT_SEG_LAMBDA,
    corpus_inertia,
    load_codebook,
    map_phones,
    phone_mean_vectors,
    read_phone_alignment,
    save_codebook,
    train_codebook,
    transcribe_f,
)
from .features import (
    DEFAULT_MFCC_HOP,
    compute_mfcc,
    import_features,
    import_pitch,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ispa",
        description="Transcribe audio into discrete, human-readable tokens",
    )
    parser.add_argument(
        "--jobs",
        type=int,
        default=os.cpu_count() or 1,
        help="files processed in parallel (default: CPU count)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transcribe", help="audio files to token text")
    p.add_argument("--method", required=True, choices=("ispa-a", "ispa-f"))
    p.add_argument("--variant", choices=("raw", "seg", "phn"))
    p.add_argument("--codebook")
    p.add_argument("--pitch", help="external pitch CSV (single input only)")
    p.add_argument("--features", help="external ISPF file (single input only)")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--hop", type=float)
    p.add_argument("--out")
    p.add_argument("paths", nargs="+")

    p = sub.add_parser("train-codebook", help="fit k-means centroids")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hop", type=float, default=DEFAULT_MFCC_HOP)
    p.add_argument("--out", required=True)
    p.add_argument("paths", nargs="+", help="audio or ISPF feature files")

    p = sub.add_parser("map-phones", help="label centroids with phones")
    p.add_argument("--codebook", required=True)
    p.add_argument("--features", nargs="+", required=True)
    p.add_argument("--alignment", nargs="+", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="manifest-driven classification report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--method", required=True, choices=("ispa-a", "ispa-f"))
    p.add_argument("--variant", choices=("raw", "seg", "phn"))
    p.add_argument("--codebook")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--ngram", type=int, default=2)
    p.add_argument("--seed", type=int, action="append")
    p.add_argument("--out")

    p = sub.add_parser("synth", help="render token text to a WAV file")
    p.add_argument("--out", required=True)
    p.add_argument("--rate", type=int, default=16000)
    p.add_argument("text", nargs="?", help="token file (default: stdin)")

    return parser


def _is_ispf(path: str) -> bool:
    if path.endswith(".ispf"):
        return True
    try:
        with open(path, "rb") as fh:
            return fh.read(4) == b"ISPF"
    except OSError:
        return False


def _transcribe_one(path: str, args) -> str:
    if args.method == "ispa-a":
        cfg = AcousticConfig()
        if args.hop is not None:
            cfg.hop_seconds = args.hop
        if args.lam is not None:
            cfg.lam = args.lam
        pitch = import_pitch(args.pitch) if args.pitch else None
        w = load_audio(path)
        return encode_tokens(transcribe_a(w, cfg, pitch_track=pitch))

    cb = load_codebook(args.codebook)
    if args.features:
        feats = import_features(args.features)
    elif _is_ispf(path):
        feats = import_features(path)
    else:
        hop = args.hop if args.hop is not None else cb.hop_seconds
        feats = compute_mfcc(load_audio(path), hop_seconds=hop)
    lam = args.lam if args.lam is not None else DEFAULT_SEG_LAMBDA
    return transcribe_f(feats, cb, variant=args.variant or "seg", lam=lam)


def _run_many(paths, worker, jobs: int):
    """Apply worker to each path, preserving order; collect per-file errors."""
    results = [None] * len(paths)
    errors = []
    if jobs <= 1 or len(paths) <= 1:
        for i, path in enumerate(paths):
            try:
                results[i] = worker(path)
            except Exception as exc:  # keep going; report at the end
                errors.append((path, exc))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(worker, p) for p in paths]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except Exception as exc:
                    errors.append((paths[i], exc))
    return results, errors


class _TranscribeWorker:
    """Top-level callable so ProcessPoolExecutor can pickle it."""

    def __init__(self, args):
        self.args = args

    def __call__(self, path):
        return _transcribe_one(path, self.args)


def cmd_transcribe(args, parser) -> int:
    if args.method == "ispa-a":
        if args.variant:
            parser.error("--variant only applies to --method ispa-f")
        if args.codebook:
            parser.error("--codebook only applies to --method ispa-f")
        if args.features:
            parser.error("--features only applies to --method ispa-f")
    else:
        if not args.codebook:
            parser.error("--method ispa-f requires --codebook")
        if args.pitch:
            parser.error("--pitch only applies to --method ispa-a")
    if (args.pitch or args.features) and len(args.paths) != 1:
        parser.error("--pitch/--features accept exactly one input file")

    results, errors = _run_many(args.paths, _TranscribeWorker(args), args.jobs)
    sink = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for line in results:
            if line is not None:
                print(line, file=sink)
    finally:
        if args.out:
            sink.close()
    for path, exc in errors:
        print(f"ispa: {path}: {exc}", file=sys.stderr)
    return 1 if errors else 0


def cmd_train_codebook(args, parser) -> int:
    corpus = []
    kinds = set()
    for path in args.paths:
        if _is_ispf(path):
            feats = import_features(path)
            kinds.add(f"ispf-{feats.dim}")
        else:
            feats = compute_mfcc(load_audio(path), hop_seconds=args.hop)
            kinds.add(f"mfcc-{feats.dim}")
        corpus.append(feats)
    cb = train_codebook(corpus, k=args.k, seed=args.seed, feature_kind=sorted(kinds)[0])
    save_codebook(cb, args.out)
    n_frames = sum(len(f) for f in corpus)
    inertia = corpus_inertia(corpus, cb)
    print(f"codebook K={cb.k} dim={cb.dim} frames={n_frames} inertia={inertia:.6g}")
    return 0


def cmd_map_phones(args, parser) -> int:
    if len(args.features) != len(args.alignment):
        parser.error("--features and --alignment lists must pair up")
    cb = load_codebook(args.codebook)
    corpus = []
    for fpath, apath in zip(args.features, args.alignment):
        feats = (
            import_features(fpath)
            if _is_ispf(fpath)
            else compute_mfcc(load_audio(fpath), hop_seconds=cb.hop_seconds)
        )
        corpus.append((feats, read_phone_alignment(apath)))
    table = phone_mean_vectors(corpus)
    mapped = map_phones(cb, table)
    save_codebook(mapped, args.out)
    assigned = sum(1 for s in mapped.phone_labels if not s.startswith("c"))
    diff = table.vectors[:, None, :] - cb.centroids[None, :, :]
    cost = np.sqrt(np.sum(diff**2, axis=2))
    label_of = {p: j for j, p in enumerate(mapped.phone_labels)}
    total = sum(
        cost[i, label_of[p]] for i, p in enumerate(table.phones) if p in label_of
    )
    print(
        f"mapped {assigned} phones onto {cb.k} centroids, "
        f"total distance {total:.6g}"
    )
    return 0


class _EvalWorker:
    def __init__(self, args):
        self.args = args

    def __call__(self, path):
        text = _transcribe_one(path, self.args)
        duration = load_audio(path).duration_seconds
        return text, duration


def cmd_eval(args, parser) -> int:
    if args.method == "ispa-f" and not args.codebook:
        parser.error("--method ispa-f requires --codebook")
    manifest = read_manifest(args.manifest)
    manifest.require_splits()
    base = os.path.dirname(os.path.abspath(args.manifest))
    paths = [
        row.path if os.path.isabs(row.path) else os.path.join(base, row.path)
        for row in manifest.rows
    ]
    args.pitch = None
    args.features = None
    args.hop = None
    results, errors = _run_many(paths, _EvalWorker(args), args.jobs)
    if errors:
        for path, exc in errors:
            print(f"ispa: {path}: {exc}", file=sys.stderr)
        return 1
    docs_by_split = {name: [] for name in ("train", "valid", "test")}
    for row, (text, duration) in zip(manifest.rows, results):
        docs_by_split[row.split].append(
            TokenDocument(
                tokens=tuple(text.split()), duration_seconds=duration, label=row.label
            )
        )
    seeds = args.seed if args.seed else [0]
    report = run_eval(docs_by_split, n_max=args.ngram, seeds=seeds)
    report["config"]["method"] = args.method
    report["config"]["variant"] = args.variant
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_synth(args, parser) -> int:
    if args.text:
        with open(args.text, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    tokens = parse_tokens(text)
    save_wav(args.out, synthesize(tokens, args.rate))
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "transcribe": cmd_transcribe,
    "train-codebook": cmd_train_codebook,
    "map-phones": cmd_map_phones,
    "eval": cmd_eval,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except Exception as exc:
        print(f"ispa: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
