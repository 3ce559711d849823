"""Pipeline orchestration: ingest, train, grids, probes, figures.

Every invocation writes into a fresh timestamped directory under the
configured output root (nothing is ever overwritten; a ``latest`` symlink
tracks the newest run).  Per-cell and per-feature failures are collected
into ``error_manifest.json`` rather than aborting the run; an empty
manifest means success.
"""
from __future__ import annotations

import csv
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import ConfigError, RunConfig, require_paths, resolved_text
from .data import (
    Corpus,
    FormatError,
    LanguageEmbeddingTable,
    build_char_vocab,
    downsample,
    load_corpus_file,
    load_embeddings_file,
    load_wals_file,
    save_embeddings,
)
from .figures import FigureSpec, render_figure
from .probe import PatternRule, run_heldout, run_probe, write_heldout_csv, write_probe_csv
from .tagger import TaggerModel, init_language_rows, save_checkpoint, train
from .transfer import (
    aggregate_rows_bilingual,
    aggregate_rows_monolingual,
    run_bilingual_grid,
    run_monolingual_grid,
    write_aggregate_csv,
    write_per_seed_csv,
)

__all__ = ["PipelineResult", "STAGES", "run_pipeline", "create_run_dir", "load_snapshots", "ingest_summary"]

STAGES = ("ingest", "train", "grid-mono", "grid-bi", "probe", "heldout", "render")
SPLITS = ("train", "dev", "test")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


@dataclass
class PipelineResult:
    exit_code: int
    run_dir: Path | None
    manifest: list[dict] = field(default_factory=list)


def create_run_dir(output_dir: str | Path) -> Path:
    """Timestamped run directory plus a ``latest`` symlink; never reused."""
    root = Path(output_dir)
    root.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S", time.gmtime())
    run_dir = root / f"run-{stamp}"
    counter = 1
    while run_dir.exists():
        run_dir = root / f"run-{stamp}-{counter}"
        counter += 1
    run_dir.mkdir()
    latest = root / "latest"
    try:
        if latest.is_symlink() or latest.exists():
            latest.unlink()
        latest.symlink_to(run_dir.name)
    except OSError:
        pass  # symlinks unsupported on some filesystems; not fatal
    return run_dir


@dataclass
class _LoadedData:
    train: dict[str, Corpus]
    dev: dict[str, Corpus]
    test: dict[str, Corpus]


def _load_corpora(cfg: RunConfig, manifest: list[dict]) -> _LoadedData:
    require_paths(cfg, ["data_dir"])
    if not cfg.languages:
        raise ConfigError("languages is not set")
    data = _LoadedData(train={}, dev={}, test={})
    wanted = sorted(set(cfg.languages) | set(cfg.grid_langs()) | set(cfg.grid_test_langs()))
    for code in wanted:
        for split in SPLITS:
            path = Path(cfg.data_dir) / f"{code}-{split}.conllu"
            if not path.exists():
                manifest.append(
                    {"stage": "ingest", "item": f"{code}-{split}", "reason": f"missing file {path}"}
                )
                continue
            corpus = load_corpus_file(path, code, split)
            if split == "train":
                corpus = downsample(corpus, cfg.downsample, seed=cfg.seed_list[0])
            getattr(data, split)[code] = corpus
    return data


def ingest_summary(cfg: RunConfig) -> list[str]:
    """Human-readable per-corpus counts (the ``ingest-check`` report)."""
    manifest: list[dict] = []
    data = _load_corpora(cfg, manifest)
    lines = []
    for split in SPLITS:
        table = getattr(data, split)
        for code in sorted(table):
            corpus = table[code]
            lines.append(
                f"{code}-{split}: {len(corpus)} sentences, {corpus.token_count()} tokens"
            )
    for entry in manifest:
        lines.append(f"missing: {entry['item']} ({entry['reason']})")
    if cfg.embeddings is not None and Path(cfg.embeddings).exists():
        table = load_embeddings_file(cfg.embeddings)
        lines.append(f"embeddings: {len(table.vectors)} languages, dim {table.dim}")
    if cfg.wals is not None and Path(cfg.wals).exists():
        wals = load_wals_file(cfg.wals)
        lines.append(f"wals: {len(wals.features)} features")
    return lines


def _load_pretrained(cfg: RunConfig) -> LanguageEmbeddingTable:
    require_paths(cfg, ["embeddings"])
    return load_embeddings_file(cfg.embeddings)


_SNAPSHOT_RE = re.compile(r"^langemb\.e(\d+)\.vec$")


def load_snapshots(directory: str | Path) -> list[LanguageEmbeddingTable]:
    """Load every ``langemb.e{N}.vec`` under a directory, ordered by epoch."""
    directory = Path(directory)
    found = []
    for path in directory.iterdir():
        match = _SNAPSHOT_RE.match(path.name)
        if match:
            found.append((int(match.group(1)), path))
    if not found:
        raise FormatError(f"no langemb.e*.vec snapshots in {directory}")
    return [load_embeddings_file(path, epoch=epoch) for epoch, path in sorted(found)]


def _stage_train(cfg: RunConfig, run_dir: Path, data: _LoadedData, manifest: list[dict]) -> None:
    pretrained = _load_pretrained(cfg)
    langs = [l for l in cfg.languages if l in data.train and l in data.dev]
    skipped = [l for l in cfg.languages if l not in langs]
    for code in skipped:
        manifest.append({"stage": "train", "item": code, "reason": "missing train or dev corpus"})
    if not langs:
        raise FormatError("train stage: no language has both train and dev corpora")
    train_corpora = [data.train[l] for l in langs]
    dev_corpora = [data.dev[l] for l in langs]
    tagger_cfg = cfg.tagger_config()
    vocab = build_char_vocab(train_corpora)
    tags = sorted({t.upos for c in train_corpora for s in c.sentences for t in s.tokens})
    model = TaggerModel(tags, vocab, tagger_cfg)
    init_language_rows(model, pretrained, langs, seed=tagger_cfg.seed)
    model, log = train(model, train_corpora, dev_corpora, tagger_cfg)

    snap_dir = run_dir / "snapshots"
    snap_dir.mkdir()
    for table in log.snapshots:
        save_embeddings(table, snap_dir / f"langemb.e{table.epoch}.vec")
    save_checkpoint(model, run_dir / "tagger-checkpoint.json")
    with open(run_dir / "train_log.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "language", "dev_accuracy"])
        for epoch, accs in enumerate(log.dev_accuracy, start=1):
            for code in sorted(accs):
                writer.writerow([epoch, code, repr(accs[code])])
            writer.writerow([epoch, "macro", repr(log.macro_dev_accuracy[epoch - 1])])
        writer.writerow(["best", "macro", repr(float(log.best_epoch))])


def _record_failures(results, stage: str, manifest: list[dict]) -> None:
    for cell in results:
        if cell.error is not None:
            item = f"{'+'.join(cell.train_langs)}->{cell.test_lang}/emb={cell.use_lang_emb}"
            manifest.append({"stage": stage, "item": item, "reason": cell.error})


def _stage_grid_mono(cfg: RunConfig, run_dir: Path, data: _LoadedData, manifest: list[dict]) -> None:
    pretrained = _load_pretrained(cfg)
    results = run_monolingual_grid(
        cfg.grid_langs(),
        data.train,
        data.dev,
        data.test,
        pretrained,
        cfg.tagger_config(),
        seeds=tuple(cfg.seed_list),
        test_langs=cfg.grid_test_langs(),
        workers=cfg.workers,
    )
    _record_failures(results, "grid-mono", manifest)
    write_per_seed_csv(results, run_dir / "grid_mono_per_seed.csv")
    rows = aggregate_rows_monolingual(
        results, cfg.baseline_language, permutations=cfg.permutations, seed=cfg.seed_list[0]
    )
    write_aggregate_csv(rows, run_dir / "grid_mono_aggregate.csv")


def _stage_grid_bi(cfg: RunConfig, run_dir: Path, data: _LoadedData, manifest: list[dict]) -> None:
    pretrained = _load_pretrained(cfg)
    results = run_bilingual_grid(
        cfg.bilingual_targets(),
        cfg.bilingual_helpers(),
        data.train,
        data.dev,
        data.test,
        pretrained,
        cfg.tagger_config(),
        seeds=tuple(cfg.seed_list),
        workers=cfg.workers,
    )
    _record_failures(results, "grid-bi", manifest)
    write_per_seed_csv(results, run_dir / "grid_bi_per_seed.csv")
    rows = aggregate_rows_bilingual(results, permutations=cfg.permutations, seed=cfg.seed_list[0])
    write_aggregate_csv(rows, run_dir / "grid_bi_aggregate.csv")


def _snapshots_for_probe(cfg: RunConfig, run_dir: Path) -> list[LanguageEmbeddingTable]:
    if cfg.snapshots_dir is not None:
        return load_snapshots(cfg.snapshots_dir)
    local = run_dir / "snapshots"
    if local.is_dir():
        return load_snapshots(local)
    raise ConfigError("probe stage needs snapshots: run the train stage or set snapshots_dir")


def _stage_probe(cfg: RunConfig, run_dir: Path, manifest: list[dict]) -> None:
    require_paths(cfg, ["wals"])
    wals = load_wals_file(cfg.wals)
    snapshots = _snapshots_for_probe(cfg, run_dir)
    features = cfg.probe_features if cfg.probe_features is not None else wals.feature_ids()
    results, skipped = run_probe(
        features,
        snapshots,
        wals,
        l2=cfg.l2_lambda,
        seed=cfg.seed_list[0],
        rule=PatternRule(delta=cfg.delta),
    )
    for feature, reason in skipped:
        manifest.append({"stage": "probe", "item": feature, "reason": reason})
    write_probe_csv(results, run_dir / "probe_trajectories.csv")


def _stage_heldout(cfg: RunConfig, run_dir: Path, manifest: list[dict]) -> None:
    require_paths(cfg, ["wals"])
    wals = load_wals_file(cfg.wals)
    snapshots = _snapshots_for_probe(cfg, run_dir)
    features = cfg.probe_features if cfg.probe_features is not None else wals.feature_ids()
    results, skipped = run_heldout(
        features, snapshots, wals, heldout=tuple(cfg.heldout_languages), l2=cfg.l2_lambda
    )
    for feature, reason in skipped:
        manifest.append({"stage": "heldout", "item": feature, "reason": reason})
    write_heldout_csv(results, run_dir / "heldout_uralic.csv")


_RENDER_MAP = (
    ("grid_mono_aggregate.csv", "grid-bars", "grid_mono.svg"),
    ("grid_bi_aggregate.csv", "grid-bars", "grid_bi.svg"),
    ("probe_trajectories.csv", "trajectory-lines", "probe_trajectories.svg"),
    ("heldout_uralic.csv", "trajectory-lines", "heldout_uralic.svg"),
)


def _stage_render(run_dir: Path, manifest: list[dict]) -> None:
    for csv_name, kind, svg_name in _RENDER_MAP:
        source = run_dir / csv_name
        if not source.exists():
            continue
        try:
            render_figure(FigureSpec(kind=kind, source=source, output=run_dir / svg_name))
        except ValueError as err:
            manifest.append({"stage": "render", "item": csv_name, "reason": str(err)})


def run_pipeline(cfg: RunConfig, stages: tuple[str, ...]) -> PipelineResult:
    """Execute the selected stages in order, collecting failures as it goes."""
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        raise ConfigError(f"unknown stages: {unknown}")
    run_dir = create_run_dir(cfg.output_dir)
    (run_dir / "config.resolved").write_text(resolved_text(cfg), encoding="utf-8")
    manifest: list[dict] = []
    exit_code = EXIT_OK
    data: _LoadedData | None = None
    needs_data = [s for s in stages if s in ("ingest", "train", "grid-mono", "grid-bi")]
    try:
        if needs_data:
            data = _load_corpora(cfg, manifest)
        if "train" in stages:
            _stage_train(cfg, run_dir, data, manifest)
        if "grid-mono" in stages:
            _stage_grid_mono(cfg, run_dir, data, manifest)
        if "grid-bi" in stages:
            _stage_grid_bi(cfg, run_dir, data, manifest)
        if "probe" in stages:
            _stage_probe(cfg, run_dir, manifest)
        if "heldout" in stages:
            _stage_heldout(cfg, run_dir, manifest)
        if "render" in stages:
            _stage_render(run_dir, manifest)
    except ConfigError as err:
        manifest.append({"stage": "pipeline", "item": "config", "reason": str(err)})
        exit_code = EXIT_CONFIG
    except (FormatError, FileNotFoundError) as err:
        manifest.append({"stage": "pipeline", "item": "data", "reason": str(err)})
        exit_code = EXIT_DATA
    except Exception as err:  # record the failure, keep partial artifacts
        manifest.append({"stage": "pipeline", "item": "runtime", "reason": f"{type(err).__name__}: {err}"})
        exit_code = EXIT_RUNTIME
    if exit_code == EXIT_OK and manifest:
        exit_code = EXIT_DATA
    (run_dir / "error_manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return PipelineResult(exit_code=exit_code, run_dir=run_dir, manifest=manifest)
