"""Typology probing: logistic regression over language-embedding snapshots.

For a categorical feature and an embedding snapshot at fine-tuning epoch
``e``, a multinomial logistic-regression probe predicts each language's
class from its vector.  Stratified cross-validated accuracy traced across
epochs, compared against the majority baseline, yields one of four
patterns: already present at epoch 0, gained during fine-tuning, never
present, or lost during fine-tuning.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import LanguageEmbeddingTable, WalsFeatureTable, filter_feature

logger = logging.getLogger(__name__)

__all__ = [
    "UnusableFeatureError",
    "ProbeDataset",
    "LogRegModel",
    "PatternRule",
    "ProbeResult",
    "HeldoutResult",
    "PATTERNS",
    "build_probe_dataset",
    "train_logreg",
    "cv_probe",
    "majority_class",
    "majority_baseline",
    "classify_pattern",
    "probe_trajectory",
    "predict_heldout",
    "run_probe",
    "run_heldout",
    "write_probe_csv",
    "write_heldout_csv",
]

PATTERN_PRE_ENCODED = "pre-encoded"
PATTERN_ENCODED_BY_FINE_TUNING = "encoded by fine-tuning"
PATTERN_NOT_PRE_ENCODED = "not pre-encoded"
PATTERN_LOST_BY_FINE_TUNING = "lost by fine-tuning"
PATTERNS = (
    PATTERN_PRE_ENCODED,
    PATTERN_ENCODED_BY_FINE_TUNING,
    PATTERN_NOT_PRE_ENCODED,
    PATTERN_LOST_BY_FINE_TUNING,
)

DEFAULT_URALIC = ("fin", "est", "hun", "sme")


class UnusableFeatureError(ValueError):
    """The feature cannot support probing on the given sample."""


@dataclass
class PatternRule:
    """Margin over the baseline that counts as 'encoded'."""

    delta: float = 0.05

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")


@dataclass
class ProbeDataset:
    feature_id: str
    epoch: int
    languages: list[str]
    x: np.ndarray
    labels: list[str]
    classes: list[str]

    def __len__(self) -> int:
        return len(self.languages)


@dataclass
class ProbeResult:
    feature_id: str
    epochs: list[int]
    accuracies: list[float]
    baseline: float
    pattern: str


@dataclass
class HeldoutResult:
    feature_id: str
    epochs: list[int]
    accuracies: list[float]


def build_probe_dataset(
    feature: str,
    table: LanguageEmbeddingTable,
    wals: WalsFeatureTable,
    sample: list[str] | None = None,
) -> ProbeDataset:
    """Rows for languages in the sample that have both a vector and a value.

    Rare classes are dropped per ``filter_feature``; raises
    UnusableFeatureError when fewer than two classes survive.
    """
    if feature not in wals.features:
        raise UnusableFeatureError(f"feature {feature!r} is not in the table")
    covered = [code for code in table.languages() if sample is None or code in sample]
    valued = set(wals.features[feature])
    if sample is not None:
        valued &= set(sample)
    no_vector = valued - set(covered)
    if no_vector:
        logger.debug(
            "feature %s: dropping %d language(s) without embedding vectors", feature, len(no_vector)
        )
    kept = filter_feature(wals, feature, covered)
    if not kept.usable:
        raise UnusableFeatureError(
            f"feature {feature!r}: fewer than two classes survive filtering"
        )
    languages = kept.languages()
    return ProbeDataset(
        feature_id=feature,
        epoch=table.epoch,
        languages=languages,
        x=np.stack([table.vectors[code] for code in languages]),
        labels=[kept.assignment[code] for code in languages],
        classes=kept.classes,
    )


@dataclass
class LogRegModel:
    """Multinomial logistic regression with L2-regularized weights."""

    weights: np.ndarray
    bias: np.ndarray
    l2: float
    classes: list[str]

    def scores(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights.T + self.bias

    def predict(self, x: np.ndarray) -> list[str]:
        return [self.classes[i] for i in np.argmax(self.scores(x), axis=1)]


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _objective_and_grad(x, y_onehot, w, b, l2):
    n = x.shape[0]
    probs = _softmax_rows(x @ w.T + b)
    eps = np.finfo(np.float64).tiny
    ce = -np.log(np.maximum((probs * y_onehot).sum(axis=1), eps)).mean()
    obj = ce + 0.5 * l2 * float((w * w).sum())
    delta = (probs - y_onehot) / n
    grad_w = delta.T @ x + l2 * w
    grad_b = delta.sum(axis=0)
    return obj, grad_w, grad_b


def train_logreg(
    x: np.ndarray,
    labels: list[str],
    l2: float = 1e-2,
    max_iters: int = 10_000,
    grad_tol: float = 1e-6,
) -> LogRegModel:
    """Full-batch gradient descent from zero init with backtracking line search.

    Minimizes mean cross-entropy plus (l2/2)*||W||^2; the bias is not
    regularized.  Deterministic: no randomness anywhere.
    """
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValueError("train_logreg: need at least two classes")
    index = {c: i for i, c in enumerate(classes)}
    y = np.zeros((x.shape[0], len(classes)))
    for r, label in enumerate(labels):
        y[r, index[label]] = 1.0
    w = np.zeros((len(classes), x.shape[1]))
    b = np.zeros(len(classes))
    obj, gw, gb = _objective_and_grad(x, y, w, b, l2)
    for _ in range(max_iters):
        gnorm2 = float((gw * gw).sum() + (gb * gb).sum())
        if np.sqrt(gnorm2) < grad_tol:
            break
        step = 1.0
        accepted = False
        while step >= 1e-12:
            w_new = w - step * gw
            b_new = b - step * gb
            obj_new, gw_new, gb_new = _objective_and_grad(x, y, w_new, b_new, l2)
            if obj_new <= obj - 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        w, b, obj, gw, gb = w_new, b_new, obj_new, gw_new, gb_new
    return LogRegModel(weights=w, bias=b, l2=l2, classes=classes)


def _stratified_folds(ds: ProbeDataset, folds: int, seed: int) -> list[np.ndarray]:
    counts = {c: ds.labels.count(c) for c in ds.classes}
    k = min(folds, min(counts.values()))
    if k < 2:
        raise UnusableFeatureError(
            f"feature {ds.feature_id!r}: smallest class has {min(counts.values())} rows"
        )
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(ds), dtype=np.int64)
    for cls in ds.classes:
        idx = np.array([i for i, label in enumerate(ds.labels) if label == cls])
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            assignment[i] = pos % k
    return [np.flatnonzero(assignment == f) for f in range(k)]


def cv_probe(ds: ProbeDataset, folds: int = 3, l2: float = 1e-2, seed: int = 0) -> float:
    """Mean held-out accuracy over stratified folds (reduced if a class is small)."""
    fold_indices = _stratified_folds(ds, folds, seed)
    labels = np.array(ds.labels)
    accuracies = []
    for held in fold_indices:
        train_mask = np.ones(len(ds), dtype=bool)
        train_mask[held] = False
        model = train_logreg(ds.x[train_mask], labels[train_mask].tolist(), l2=l2)
        predicted = model.predict(ds.x[held])
        accuracies.append(float(np.mean(predicted == labels[held])))
    return float(np.mean(accuracies))


def majority_class(ds: ProbeDataset) -> str:
    """Most frequent class; ties break toward the lexicographically smallest."""
    best = None
    best_count = -1
    for cls in ds.classes:  # classes are sorted
        count = ds.labels.count(cls)
        if count > best_count:
            best, best_count = cls, count
    return best


def majority_baseline(ds: ProbeDataset) -> float:
    return ds.labels.count(majority_class(ds)) / len(ds)


def classify_pattern(
    trajectory: list[float], baseline: float, rule: PatternRule = PatternRule()
) -> str:
    """Map a per-epoch accuracy trajectory to one of the four patterns."""
    if len(trajectory) < 2:
        raise ValueError("classify_pattern: trajectory needs at least two points")
    pre = trajectory[0] > baseline + rule.delta
    post = trajectory[-1] > baseline + rule.delta
    if pre and post:
        return PATTERN_PRE_ENCODED
    if not pre and post:
        return PATTERN_ENCODED_BY_FINE_TUNING
    if not pre and not post:
        return PATTERN_NOT_PRE_ENCODED
    return PATTERN_LOST_BY_FINE_TUNING


def probe_trajectory(
    feature: str,
    snapshots: list[LanguageEmbeddingTable],
    wals: WalsFeatureTable,
    sample: list[str] | None = None,
    folds: int = 3,
    l2: float = 1e-2,
    seed: int = 0,
    rule: PatternRule = PatternRule(),
) -> ProbeResult:
    """Cross-validated probe accuracy at every snapshot epoch, plus the pattern."""
    if not snapshots:
        raise ValueError("probe_trajectory: no snapshots")
    ordered = sorted(snapshots, key=lambda t: t.epoch)
    datasets = [build_probe_dataset(feature, table, wals, sample) for table in ordered]
    baseline = majority_baseline(datasets[0])
    accuracies = [cv_probe(ds, folds=folds, l2=l2, seed=seed) for ds in datasets]
    return ProbeResult(
        feature_id=feature,
        epochs=[t.epoch for t in ordered],
        accuracies=accuracies,
        baseline=baseline,
        pattern=classify_pattern(accuracies, baseline, rule),
    )


def predict_heldout(
    feature: str,
    snapshots: list[LanguageEmbeddingTable],
    wals: WalsFeatureTable,
    heldout: tuple[str, ...] = DEFAULT_URALIC,
    l2: float = 1e-2,
) -> HeldoutResult:
    """Train on every non-held-out language, evaluate on the held-out set per epoch."""
    if not snapshots:
        raise ValueError("predict_heldout: no snapshots")
    ordered = sorted(snapshots, key=lambda t: t.epoch)
    missing = [code for code in heldout if wals.value(feature, code) is None]
    if missing:
        raise UnusableFeatureError(f"feature {feature!r}: no value for held-out {missing}")
    absent = [code for code in heldout if code not in ordered[0]]
    if absent:
        raise UnusableFeatureError(f"feature {feature!r}: no embedding for held-out {absent}")
    gold = [wals.value(feature, code) for code in heldout]
    accuracies = []
    for table in ordered:
        rest = [code for code in table.languages() if code not in heldout]
        ds = build_probe_dataset(feature, table, wals, rest)
        model = train_logreg(ds.x, ds.labels, l2=l2)
        x_heldout = np.stack([table.vectors[code] for code in heldout])
        predicted = model.predict(x_heldout)
        accuracies.append(sum(p == g for p, g in zip(predicted, gold)) / len(heldout))
    return HeldoutResult(feature_id=feature, epochs=[t.epoch for t in ordered], accuracies=accuracies)


def run_probe(
    features: list[str],
    snapshots: list[LanguageEmbeddingTable],
    wals: WalsFeatureTable,
    sample: list[str] | None = None,
    folds: int = 3,
    l2: float = 1e-2,
    seed: int = 0,
    rule: PatternRule = PatternRule(),
) -> tuple[list[ProbeResult], list[tuple[str, str]]]:
    """Probe each feature; unusable ones come back as (feature, reason) records."""
    results = []
    skipped = []
    for feature in features:
        try:
            results.append(
                probe_trajectory(feature, snapshots, wals, sample, folds=folds, l2=l2, seed=seed, rule=rule)
            )
        except UnusableFeatureError as err:
            skipped.append((feature, str(err)))
    return results, skipped


def run_heldout(
    features: list[str],
    snapshots: list[LanguageEmbeddingTable],
    wals: WalsFeatureTable,
    heldout: tuple[str, ...] = DEFAULT_URALIC,
    l2: float = 1e-2,
) -> tuple[list[HeldoutResult], list[tuple[str, str]]]:
    results = []
    skipped = []
    for feature in features:
        try:
            results.append(predict_heldout(feature, snapshots, wals, heldout, l2=l2))
        except UnusableFeatureError as err:
            skipped.append((feature, str(err)))
    return results, skipped


def write_probe_csv(results: list[ProbeResult], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_id", "epoch", "cv_accuracy", "baseline", "pattern"])
        for res in sorted(results, key=lambda r: r.feature_id):
            for epoch, acc in zip(res.epochs, res.accuracies):
                writer.writerow([res.feature_id, epoch, repr(acc), repr(res.baseline), res.pattern])


def write_heldout_csv(results: list[HeldoutResult], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_id", "epoch", "uralic_accuracy"])
        for res in sorted(results, key=lambda r: r.feature_id):
            for epoch, acc in zip(res.epochs, res.accuracies):
                writer.writerow([res.feature_id, epoch, repr(acc)])
