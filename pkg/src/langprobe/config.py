"""Run configuration: a flat key-value file overridable by CLI flags.

The config file holds one ``key = value`` pair per line (``#`` comments
allowed); keys match :class:`RunConfig` field names.  Command-line flags
with the same names (dashes for underscores) take precedence.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .tagger import TaggerConfig

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config_file",
    "build_config",
    "require_paths",
    "resolved_text",
]


class ConfigError(Exception):
    """Bad or missing configuration; maps to exit code 1."""


@dataclass
class RunConfig:
    # paths
    data_dir: Path | None = None
    embeddings: Path | None = None
    wals: Path | None = None
    output_dir: Path = Path("runs")
    snapshots_dir: Path | None = None
    # language selections
    languages: list[str] = field(default_factory=list)
    grid_languages: list[str] | None = None
    test_languages: list[str] | None = None
    baseline_language: str | None = None
    bi_targets: list[str] | None = None
    bi_helpers: list[str] | None = None
    heldout_languages: list[str] = field(default_factory=lambda: ["fin", "est", "hun", "sme"])
    probe_features: list[str] | None = None
    # experiment controls
    seed_list: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    downsample: int = 1500
    delta: float = 0.05
    l2_lambda: float = 1e-2
    permutations: int = 10000
    workers: int = 1
    # tagger hyperparameters
    char_emb_dim: int = 100
    char_lstm_hidden: int = 100
    word_lstm_hidden: int = 100
    word_lstm_layers: int = 2
    lang_emb_dim: int = 64
    epochs: int = 10
    patience: int = 2
    use_lang_emb: bool = True
    lr: float = 1e-3

    def tagger_config(self, seed: int | None = None) -> TaggerConfig:
        return TaggerConfig(
            char_emb_dim=self.char_emb_dim,
            char_lstm_hidden=self.char_lstm_hidden,
            word_lstm_hidden=self.word_lstm_hidden,
            word_lstm_layers=self.word_lstm_layers,
            lang_emb_dim=self.lang_emb_dim,
            max_epochs=self.epochs,
            early_stop_patience=self.patience,
            seed=self.seed_list[0] if seed is None else seed,
            use_lang_emb=self.use_lang_emb,
            lr=self.lr,
        )

    def grid_langs(self) -> list[str]:
        return list(self.grid_languages if self.grid_languages is not None else self.languages)

    def grid_test_langs(self) -> list[str]:
        if self.test_languages is not None:
            return list(self.test_languages)
        langs = self.grid_langs()
        if self.baseline_language is not None:
            langs = [l for l in langs if l != self.baseline_language]
        return langs

    def bilingual_targets(self) -> list[str]:
        return list(self.bi_targets if self.bi_targets is not None else self.grid_test_langs())

    def bilingual_helpers(self) -> list[str]:
        return list(self.bi_helpers if self.bi_helpers is not None else self.grid_test_langs())


_PATH_FIELDS = {"data_dir", "embeddings", "wals", "output_dir", "snapshots_dir"}
_LIST_STR_FIELDS = {
    "languages",
    "grid_languages",
    "test_languages",
    "bi_targets",
    "bi_helpers",
    "heldout_languages",
    "probe_features",
}
_LIST_INT_FIELDS = {"seed_list"}
_BOOL_FIELDS = {"use_lang_emb"}
_FLOAT_FIELDS = {"delta", "l2_lambda", "lr"}
_INT_FIELDS = {
    "downsample",
    "permutations",
    "workers",
    "char_emb_dim",
    "char_lstm_hidden",
    "word_lstm_hidden",
    "word_lstm_layers",
    "lang_emb_dim",
    "epochs",
    "patience",
}

_KNOWN_KEYS = {f.name for f in fields(RunConfig)}


def _convert(key: str, value: str):
    value = value.strip()
    if key in _PATH_FIELDS:
        return Path(value)
    if key in _LIST_STR_FIELDS:
        return [v.strip() for v in value.split(",") if v.strip()]
    if key in _LIST_INT_FIELDS:
        return [int(v) for v in value.split(",") if v.strip()]
    if key in _BOOL_FIELDS:
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"key {key!r}: expected true/false, got {value!r}")
    if key in _FLOAT_FIELDS:
        return float(value)
    if key in _INT_FIELDS:
        return int(value)
    return value


def parse_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(key, value)
        except (ValueError, TypeError) as err:
            raise ConfigError(f"{path}:{lineno}: {err}") from None
    return values


def build_config(file_values: dict, overrides: dict) -> RunConfig:
    """Merge a parsed config file with CLI overrides (overrides win)."""
    merged = dict(file_values)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    unknown = set(merged) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        cfg = RunConfig(**merged)
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None
    if not cfg.seed_list:
        raise ConfigError("seed_list must not be empty")
    return cfg


def require_paths(cfg: RunConfig, names: list[str]) -> None:
    """Check that the named path fields are set and exist on disk."""
    missing = []
    for name in names:
        value = getattr(cfg, name)
        if value is None:
            missing.append(f"{name} is not set")
        elif not Path(value).exists():
            missing.append(f"{name} does not exist: {value}")
    if missing:
        raise ConfigError("; ".join(missing))


def resolved_text(cfg: RunConfig) -> str:
    """Flat, sorted echo of every resolved setting (the run record)."""
    lines = []
    for f in sorted(fields(RunConfig), key=lambda f: f.name):
        value = getattr(cfg, f.name)
        if isinstance(value, list):
            rendered = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            rendered = "true" if value else "false"
        elif value is None:
            rendered = ""
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"
