"""Monolingual and bilingual transfer grids with significance testing.

Every grid cell trains its own model (seeded, init from the pretrained
language table) and is evaluated on each requested test language; results
are averaged over seeds.  Failed cells (missing corpora) are recorded
explicitly so grids always keep their full shape.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .data import Corpus, LanguageEmbeddingTable, build_char_vocab
from .tagger import (
    TaggerConfig,
    TaggerModel,
    evaluate,
    init_language_rows,
    sentence_accuracies,
    train,
)

__all__ = [
    "RunSpec",
    "TransferResult",
    "average_over_seeds",
    "significance_test",
    "run_monolingual_grid",
    "run_bilingual_grid",
    "write_per_seed_csv",
    "write_aggregate_csv",
    "aggregate_rows_monolingual",
    "aggregate_rows_bilingual",
]

DEFAULT_SEEDS = (1, 2, 3, 4, 5)


@dataclass
class RunSpec:
    """One training run: one or two training languages, a test language, a seed."""

    train_langs: tuple[str, ...]
    test_lang: str
    use_lang_emb: bool
    seed: int
    config: TaggerConfig


@dataclass
class TransferResult:
    """Seed-averaged accuracy for one grid cell, with per-sentence scores kept."""

    train_langs: tuple[str, ...]
    test_lang: str
    use_lang_emb: bool
    seeds: tuple[int, ...]
    per_seed: list[float] = field(default_factory=list)
    mean: float | None = None
    stddev: float | None = None
    sentence_scores: list[float] = field(default_factory=list)
    error: str | None = None

    @property
    def key(self) -> tuple:
        return ("+".join(self.train_langs), self.test_lang, self.use_lang_emb)


def average_over_seeds(values: list[float]) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation."""
    if not values:
        raise ValueError("average_over_seeds: empty list")
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def significance_test(
    scores_a: list[float],
    scores_b: list[float],
    permutations: int = 10_000,
    seed: int = 0,
    exhaustive_limit: int = 1 << 20,
) -> float:
    """Two-sided paired sign-flip randomization test on per-sentence scores.

    The statistic is |sum(a_i - b_i)|.  When 2**n fits under
    ``exhaustive_limit`` every sign assignment is enumerated and the
    p-value is exact; otherwise ``permutations`` random assignments are
    drawn and the add-one-smoothed estimate (r+1)/(m+1) is returned.
    """
    if len(scores_a) != len(scores_b):
        raise ValueError(
            f"significance_test: length mismatch ({len(scores_a)} vs {len(scores_b)})"
        )
    if not scores_a:
        raise ValueError("significance_test: empty samples")
    diffs = np.asarray(scores_a, dtype=np.float64) - np.asarray(scores_b, dtype=np.float64)
    n = diffs.shape[0]
    if 2**n <= exhaustive_limit:
        total = 1 << n
        sums = np.zeros(total)
        ids = np.arange(total)
        # accumulate d_0, d_1, ... in index order so every assignment sums
        # in the same order as a sequential loop would
        for i in range(n):
            flip = ((ids >> i) & 1).astype(bool)
            sums += np.where(flip, -diffs[i], diffs[i])
        observed = abs(sums[0])
        return float(np.count_nonzero(np.abs(sums) >= observed) / total)
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(permutations, n)) * 2 - 1
    sums = signs @ diffs
    observed = abs(diffs.sum())
    r = int(np.count_nonzero(np.abs(sums) >= observed))
    return (r + 1) / (permutations + 1)


def _train_model(
    train_corpora: list[Corpus],
    dev_corpora: list[Corpus],
    row_langs: list[str],
    pretrained: LanguageEmbeddingTable | None,
    cfg: TaggerConfig,
    seed: int,
    use_lang_emb: bool,
) -> TaggerModel:
    run_cfg = replace(cfg, seed=seed, use_lang_emb=use_lang_emb)
    vocab = build_char_vocab(train_corpora)
    tags = sorted({t.upos for c in train_corpora for s in c.sentences for t in s.tokens})
    model = TaggerModel(tags, vocab, run_cfg)
    init_language_rows(model, pretrained, row_langs, seed=seed)
    model, _ = train(model, train_corpora, dev_corpora, run_cfg)
    return model


def _failed(train_langs, test_langs, setting, seeds, message) -> list[TransferResult]:
    return [
        TransferResult(
            train_langs=tuple(train_langs),
            test_lang=test_lang,
            use_lang_emb=setting,
            seeds=tuple(seeds),
            error=message,
        )
        for test_lang in test_langs
    ]


def _run_cell_group(
    train_langs: list[str],
    test_langs: list[str],
    data_train: Mapping[str, Corpus],
    data_dev: Mapping[str, Corpus],
    data_test: Mapping[str, Corpus],
    pretrained: LanguageEmbeddingTable | None,
    cfg: TaggerConfig,
    seeds: tuple[int, ...],
    setting: bool,
) -> list[TransferResult]:
    """Train per seed on ``train_langs`` and evaluate each model on every test language."""
    missing = [l for l in train_langs if l not in data_train or l not in data_dev]
    if missing:
        return _failed(train_langs, test_langs, setting, seeds, f"missing train/dev corpus for {missing}")
    row_langs = sorted(set(train_langs) | set(test_langs))
    results = {
        t: TransferResult(
            train_langs=tuple(train_langs), test_lang=t, use_lang_emb=setting, seeds=tuple(seeds)
        )
        for t in test_langs
    }
    for seed in seeds:
        model = _train_model(
            [data_train[l] for l in train_langs],
            [data_dev[l] for l in train_langs],
            row_langs,
            pretrained,
            cfg,
            seed,
            setting,
        )
        for test_lang in test_langs:
            cell = results[test_lang]
            if cell.error is not None:
                continue
            if test_lang not in data_test:
                cell.error = f"missing test corpus for {test_lang!r}"
                continue
            cell.per_seed.append(evaluate(model, data_test[test_lang]))
            cell.sentence_scores.extend(sentence_accuracies(model, data_test[test_lang]))
    for cell in results.values():
        if cell.error is None:
            cell.mean, cell.stddev = average_over_seeds(cell.per_seed)
    return [results[t] for t in test_langs]


def _run_groups(groups, workers: int) -> list[list[TransferResult]]:
    if workers <= 1:
        return [job() for job in groups]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in groups]
        return [f.result() for f in futures]


def run_monolingual_grid(
    langs: list[str],
    data_train: Mapping[str, Corpus],
    data_dev: Mapping[str, Corpus],
    data_test: Mapping[str, Corpus],
    pretrained: LanguageEmbeddingTable | None,
    cfg: TaggerConfig,
    seeds: tuple[int, ...] = DEFAULT_SEEDS,
    settings: tuple[bool, ...] = (True, False),
    test_langs: list[str] | None = None,
    workers: int = 1,
) -> list[TransferResult]:
    """Train on each single language; evaluate on every test language."""
    test_langs = list(test_langs if test_langs is not None else langs)
    groups = [
        (
            lambda train_lang=train_lang, setting=setting: _run_cell_group(
                [train_lang], test_langs, data_train, data_dev, data_test,
                pretrained, cfg, tuple(seeds), setting,
            )
        )
        for train_lang in langs
        for setting in settings
    ]
    out = _run_groups(groups, workers)
    results = [cell for group in out for cell in group]
    results.sort(key=lambda c: (c.train_langs, c.test_lang, not c.use_lang_emb))
    return results


def run_bilingual_grid(
    targets: list[str],
    helpers: list[str],
    data_train: Mapping[str, Corpus],
    data_dev: Mapping[str, Corpus],
    data_test: Mapping[str, Corpus],
    pretrained: LanguageEmbeddingTable | None,
    cfg: TaggerConfig,
    seeds: tuple[int, ...] = DEFAULT_SEEDS,
    settings: tuple[bool, ...] = (True, False),
    workers: int = 1,
) -> list[TransferResult]:
    """Train on target + helper pairs; evaluate on the target language."""
    groups = [
        (
            lambda target=target, helper=helper, setting=setting: _run_cell_group(
                [target, helper], [target], data_train, data_dev, data_test,
                pretrained, cfg, tuple(seeds), setting,
            )
        )
        for target in targets
        for helper in helpers
        if helper != target
        for setting in settings
    ]
    out = _run_groups(groups, workers)
    results = [cell for group in out for cell in group]
    results.sort(key=lambda c: (c.train_langs, c.test_lang, not c.use_lang_emb))
    return results


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_per_seed_csv(results: list[TransferResult], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["train_langs", "test_lang", "use_lang_emb", "seed", "accuracy"])
        for cell in sorted(results, key=lambda c: c.key):
            train = "+".join(cell.train_langs)
            if cell.error is not None:
                for seed in cell.seeds:
                    writer.writerow([train, cell.test_lang, _fmt(cell.use_lang_emb), seed, ""])
                continue
            for seed, acc in zip(cell.seeds, cell.per_seed):
                writer.writerow([train, cell.test_lang, _fmt(cell.use_lang_emb), seed, _fmt(acc)])


def _aggregate_rows(results, reference_of, permutations, seed):
    by_key = {c.key: c for c in results}
    rows = []
    for cell in sorted(results, key=lambda c: c.key):
        p_value = None
        p_reference = ""
        ref_key = reference_of(cell)
        if ref_key is not None and ref_key in by_key and ref_key != cell.key:
            ref = by_key[ref_key]
            if cell.error is None and ref.error is None and len(ref.sentence_scores) == len(
                cell.sentence_scores
            ):
                p_value = significance_test(
                    cell.sentence_scores, ref.sentence_scores, permutations=permutations, seed=seed
                )
                p_reference = f"train={ref_key[0]},use_lang_emb={_fmt(ref_key[2])}"
        rows.append(
            [
                "+".join(cell.train_langs),
                cell.test_lang,
                _fmt(cell.use_lang_emb),
                _fmt(cell.mean),
                _fmt(cell.stddev),
                _fmt(p_value),
                p_reference,
                cell.error or "",
            ]
        )
    return rows


def aggregate_rows_monolingual(
    results: list[TransferResult],
    baseline_lang: str | None,
    permutations: int = 10_000,
    seed: int = 0,
) -> list[list[str]]:
    """Aggregate rows; p-values compare each cell to the baseline-source cell."""

    def reference_of(cell):
        if baseline_lang is None or cell.train_langs == (baseline_lang,):
            return None
        return (baseline_lang, cell.test_lang, cell.use_lang_emb)

    return _aggregate_rows(results, reference_of, permutations, seed)


def aggregate_rows_bilingual(
    results: list[TransferResult], permutations: int = 10_000, seed: int = 0
) -> list[list[str]]:
    """Aggregate rows; p-values compare with- vs without-embedding settings."""

    def reference_of(cell):
        return ("+".join(cell.train_langs), cell.test_lang, not cell.use_lang_emb)

    return _aggregate_rows(results, reference_of, permutations, seed)


AGGREGATE_HEADER = [
    "train_langs",
    "test_lang",
    "use_lang_emb",
    "mean",
    "stddev",
    "p_value",
    "p_reference",
    "error",
]


def write_aggregate_csv(rows: list[list[str]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_HEADER)
        writer.writerows(rows)
