"""Desk-scale evaluation: token-rate metric and an n-gram bag classifier.

The classifier is a plain multinomial logistic regression over token n-gram
counts, trained by full-batch gradient descent. It answers one question:
do the token texts carry enough signal to separate the labels?
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

SPLITS = ("train", "valid", "test")
REG_GRID = (0.01, 0.1, 1.0)
MAX_EPOCHS = 500
LOSS_TOL = 1e-6


@dataclass(frozen=True)
class ManifestRow:
    path: str
    label: str
    split: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")


@dataclass(frozen=True)
class DatasetManifest:
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    def split(self, name: str) -> list:
        return [r for r in self.rows if r.split == name]

    @property
    def labels(self) -> list:
        return sorted({r.label for r in self.rows})

    def require_splits(self):
        for name in SPLITS:
            if not self.split(name):
                raise ValueError(f"manifest has an empty {name} split")


def read_manifest(path) -> DatasetManifest:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"path", "label", "split"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise ValueError(f"{path}: manifest needs columns path,label,split")
        for row in reader:
            rows.append(ManifestRow(row["path"], row["label"], row["split"]))
    if not rows:
        raise ValueError(f"{path}: empty manifest")
    return DatasetManifest(rows=tuple(rows))


@dataclass(frozen=True)
class TokenDocument:
    tokens: tuple
    duration_seconds: float
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.duration_seconds <= 0:
            raise ValueError("document duration must be positive")


def tokens_per_second(docs) -> float:
    docs = list(docs)
    if not docs:
        raise ValueError("no documents")
    total_tokens = sum(len(d.tokens) for d in docs)
    total_seconds = sum(d.duration_seconds for d in docs)
    if total_seconds <= 0:
        raise ValueError("zero total duration")
    return total_tokens / total_seconds


# ---------------------------------------------------------------------------
# N-gram featurization


def _ngrams(tokens, n_max: int):
    for n in range(1, n_max + 1):
        for i in range(len(tokens) - n + 1):
            yield "_".join(tokens[i : i + n])


def ngram_featurize(docs, n_max: int, vocab: dict | None = None):
    """Count matrix over token n-grams, n = 1..n_max.

    Without a vocabulary one is built from `docs` (the train split); with
    one, unseen n-grams are ignored. Returns (csr matrix, vocabulary).
    """
    if not 1 <= n_max <= 3:
        raise ValueError("n_max must be in [1, 3]")
    docs = list(docs)
    if vocab is None:
        grams = set()
        for d in docs:
            grams.update(_ngrams(d.tokens, n_max))
        if not grams:
            raise ValueError("no n-grams in the vocabulary split")
        vocab = {g: i for i, g in enumerate(sorted(grams))}

    rows, cols, vals = [], [], []
    for i, d in enumerate(docs):
        counts: dict = {}
        for g in _ngrams(d.tokens, n_max):
            j = vocab.get(g)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j, v in counts.items():
            rows.append(i)
            cols.append(j)
            vals.append(v)
    x = sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (rows, cols)),
        shape=(len(docs), len(vocab)),
    )
    return x, vocab


# ---------------------------------------------------------------------------
# Multinomial logistic regression


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _augment(x: sp.csr_matrix) -> sp.csr_matrix:
    ones = sp.csr_matrix(np.ones((x.shape[0], 1)))
    return sp.hstack([x, ones], format="csr")


def _spectral_norm_sq(x: sp.csr_matrix, seed: int) -> float:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=x.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(30):
        v = x.T @ (x @ v)
        norm = np.linalg.norm(v)
        if norm <= 0:
            return 1.0
        v /= norm
    return float(norm)


def _fit_softmax(x: sp.csr_matrix, y: np.ndarray, n_classes: int, reg: float, seed: int):
    n = x.shape[0]
    rng = np.random.default_rng(seed)
    w = rng.normal(scale=0.01, size=(x.shape[1], n_classes))
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0

    lip = 0.5 * _spectral_norm_sq(x, seed) / n + reg
    lr = 1.0 / lip
    prev = np.inf
    for _ in range(MAX_EPOCHS):
        p = _softmax(x @ w)
        # bias column (the last) stays unregularized
        loss = -np.mean(np.log(np.maximum(p[np.arange(n), y], 1e-300))) + (
            0.5 * reg * float(np.sum(w[:-1] ** 2))
        )
        grad = x.T @ (p - onehot) / n
        grad[:-1] += reg * w[:-1]
        w -= lr * grad
        if abs(prev - loss) <= LOSS_TOL * max(abs(loss), 1e-30):
            break
        prev = loss
    return w


def _accuracy(x, y, w) -> float:
    pred = np.argmax(x @ w, axis=1)
    return float(np.mean(pred == y))


def train_eval_classifier(train, valid, test, seed: int = 0, reg_grid=REG_GRID):
    """Fit on train, select L2 strength on valid, report all three splits.

    Each split is an (X, y) pair over a shared vocabulary; y holds integer
    class indices. Returns (report dict, weights) with the confusion matrix
    taken on the test split (rows true, columns predicted).
    """
    x_train, y_train = train
    x_valid, y_valid = valid
    x_test, y_test = test
    n_classes = int(max(y_train.max(), y_valid.max(), y_test.max())) + 1
    if len(np.unique(y_train)) < 2:
        raise ValueError("training split has a single class")

    x_train_a, x_valid_a, x_test_a = map(_augment, (x_train, x_valid, x_test))
    best = None
    for reg in reg_grid:
        w = _fit_softmax(x_train_a, y_train, n_classes, reg, seed)
        acc = _accuracy(x_valid_a, y_valid, w)
        if best is None or acc > best[0]:
            best = (acc, reg, w)
    _, reg, w = best

    pred_test = np.argmax(x_test_a @ w, axis=1)
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(confusion, (y_test, pred_test), 1)
    report = {
        "accuracy": {
            "train": _accuracy(x_train_a, y_train, w),
            "valid": _accuracy(x_valid_a, y_valid, w),
            "test": float(np.mean(pred_test == y_test)),
        },
        "confusion": confusion.tolist(),
        "selected_reg": reg,
    }
    return report, w


def run_eval(docs_by_split: dict, n_max: int = 2, seeds=(0,)) -> dict:
    """Full harness over transcribed documents, aggregated across seeds.

    tokens_per_second is measured on the train split, matching how the
    conciseness numbers are reported.
    """
    for name in SPLITS:
        if not docs_by_split.get(name):
            raise ValueError(f"empty {name} split")
    train_docs = docs_by_split["train"]
    labels = sorted({d.label for split in SPLITS for d in docs_by_split[split]})
    label_ix = {v: i for i, v in enumerate(labels)}

    x_train, vocab = ngram_featurize(train_docs, n_max)
    xs = {"train": x_train}
    ys = {"train": np.array([label_ix[d.label] for d in train_docs])}
    for name in ("valid", "test"):
        xs[name], _ = ngram_featurize(docs_by_split[name], n_max, vocab)
        ys[name] = np.array([label_ix[d.label] for d in docs_by_split[name]])

    per_seed = []
    for seed in seeds:
        report, _ = train_eval_classifier(
            (xs["train"], ys["train"]),
            (xs["valid"], ys["valid"]),
            (xs["test"], ys["test"]),
            seed=seed,
        )
        per_seed.append(report)

    def agg(split):
        vals = [r["accuracy"][split] for r in per_seed]
        return float(np.mean(vals))

    report = {
        "accuracy": {s: agg(s) for s in SPLITS},
        "accuracy_std": {
            s: float(np.std([r["accuracy"][s] for r in per_seed])) for s in SPLITS
        },
        "tokens_per_second": tokens_per_second(train_docs),
        "confusion": per_seed[0]["confusion"],
        "config": {
            "n_max": n_max,
            "seeds": list(seeds),
            "labels": labels,
            "vocabulary_size": len(vocab),
            "selected_reg": per_seed[0]["selected_reg"],
        },
    }
    return report
