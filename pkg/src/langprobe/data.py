"""Corpus, embedding-table and typology-table ingestion.

Covers the three external file formats:

* CoNLL-U treebanks (10 tab-separated columns, ``#`` comments, blank-line
  sentence separators; multiword ranges and empty nodes are dropped),
* language-embedding files (``<code> <v1> ... <vd>`` per line, optional
  ``<count> <dim>`` header),
* normalized WALS CSV (``language_code,feature_id,value``).
"""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FormatError",
    "Token",
    "Sentence",
    "Corpus",
    "CharVocab",
    "LanguageEmbeddingTable",
    "WalsFeatureTable",
    "FeatureFilter",
    "UNK_CHAR",
    "parse_conllu",
    "corpus_to_conllu",
    "load_corpus_file",
    "downsample",
    "build_char_vocab",
    "load_embeddings",
    "dump_embeddings",
    "save_embeddings",
    "load_embeddings_file",
    "load_wals",
    "load_wals_file",
    "filter_feature",
]

UNK_CHAR = "<unk>"

_RANGE_ID = re.compile(r"^\d+-\d+$")
_EMPTY_NODE_ID = re.compile(r"^\d+\.\d+$")
_TOKEN_ID = re.compile(r"^\d+$")


class FormatError(ValueError):
    """Malformed input file; the message carries the 1-based line number."""


@dataclass
class Token:
    form: str
    upos: str


@dataclass
class Sentence:
    tokens: list[Token]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class Corpus:
    language: str
    split: str
    sentences: list[Sentence]

    def __len__(self) -> int:
        return len(self.sentences)

    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)


def parse_conllu(text: str, language: str, split: str = "train") -> Corpus:
    """Parse CoNLL-U text into a Corpus of (form, upos) tokens.

    Keeps only plain token lines (integer ID); range lines like ``1-2`` and
    empty nodes like ``1.1`` are validated then dropped.
    """
    sentences: list[Sentence] = []
    current: list[Token] = []

    def flush() -> None:
        if current:
            sentences.append(Sentence(tokens=list(current)))
            current.clear()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if line.strip() == "":
            flush()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise FormatError(f"line {lineno}: expected 10 tab-separated columns, got {len(cols)}")
        token_id = cols[0]
        if _RANGE_ID.match(token_id) or _EMPTY_NODE_ID.match(token_id):
            continue
        if not _TOKEN_ID.match(token_id):
            raise FormatError(f"line {lineno}: unrecognized token ID {token_id!r}")
        form = cols[1]
        if form == "":
            raise FormatError(f"line {lineno}: empty token form")
        current.append(Token(form=form, upos=cols[3]))
    flush()
    if not sentences:
        raise FormatError("no sentences found")
    return Corpus(language=language, split=split, sentences=sentences)


def corpus_to_conllu(corpus: Corpus) -> str:
    """Serialize back to the supported CoNLL-U subset (inverse of parse_conllu)."""
    blocks = []
    for sentence in corpus.sentences:
        lines = [
            "\t".join([str(i), tok.form, "_", tok.upos, "_", "_", "_", "_", "_", "_"])
            for i, tok in enumerate(sentence.tokens, start=1)
        ]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def load_corpus_file(path: str | Path, language: str, split: str) -> Corpus:
    return parse_conllu(Path(path).read_text(encoding="utf-8"), language, split)


def downsample(corpus: Corpus, n: int, seed: int) -> Corpus:
    """Uniform sample of at most ``n`` sentences without replacement, order kept."""
    if n < 1:
        raise ValueError(f"downsample: cap must be >= 1, got {n}")
    if len(corpus.sentences) <= n:
        return corpus
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(len(corpus.sentences), size=n, replace=False))
    return Corpus(
        language=corpus.language,
        split=corpus.split,
        sentences=[corpus.sentences[i] for i in keep],
    )


@dataclass
class CharVocab:
    """Character-to-index map with UNK reserved at index 0."""

    index: dict[str, int]

    def lookup(self, ch: str) -> int:
        return self.index.get(ch, 0)

    @property
    def size(self) -> int:
        return len(self.index)


def build_char_vocab(corpora: Sequence[Corpus]) -> CharVocab:
    """Map every character in the corpora, sorted by codepoint, after UNK."""
    if not corpora:
        raise ValueError("build_char_vocab: empty corpus list")
    chars: set[str] = set()
    for corpus in corpora:
        for sentence in corpus.sentences:
            for token in sentence.tokens:
                chars.update(token.form)
    index = {UNK_CHAR: 0}
    for i, ch in enumerate(sorted(chars), start=1):
        index[ch] = i
    return CharVocab(index=index)


@dataclass
class LanguageEmbeddingTable:
    """Language code -> dense vector, tagged with the fine-tuning epoch."""

    epoch: int
    vectors: dict[str, np.ndarray]

    @property
    def dim(self) -> int:
        if not self.vectors:
            raise ValueError("empty embedding table has no dimension")
        return next(iter(self.vectors.values())).shape[0]

    def languages(self) -> list[str]:
        return sorted(self.vectors)

    def __contains__(self, code: str) -> bool:
        return code in self.vectors


def load_embeddings(text: str, epoch: int = 0) -> LanguageEmbeddingTable:
    """Parse a word2vec-style text table of per-language vectors.

    A first line of exactly two integers is treated as a ``<count> <dim>``
    header and skipped.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if lines:
        parts = lines[0][1].split()
        if len(parts) == 2:
            try:
                int(parts[0]), int(parts[1])
            except ValueError:
                pass
            else:
                lines = lines[1:]
    for lineno, line in lines:
        parts = line.split()
        if len(parts) < 2:
            raise FormatError(f"line {lineno}: expected a code and at least one value")
        code = parts[0]
        if code in vectors:
            raise FormatError(f"line {lineno}: duplicate language code {code!r}")
        try:
            values = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError as err:
            raise FormatError(f"line {lineno}: {err}") from None
        if dim is None:
            dim = values.shape[0]
        elif values.shape[0] != dim:
            raise FormatError(f"line {lineno}: expected {dim} values, got {values.shape[0]}")
        vectors[code] = values
    if not vectors:
        raise FormatError("no embedding rows found")
    return LanguageEmbeddingTable(epoch=epoch, vectors=vectors)


def dump_embeddings(table: LanguageEmbeddingTable) -> str:
    """Serialize with a header line; floats use repr so loads are bit-exact."""
    rows = [f"{len(table.vectors)} {table.dim}"]
    for code in table.languages():
        values = " ".join(repr(float(v)) for v in table.vectors[code])
        rows.append(f"{code} {values}")
    return "\n".join(rows) + "\n"


def save_embeddings(table: LanguageEmbeddingTable, path: str | Path) -> None:
    Path(path).write_text(dump_embeddings(table), encoding="utf-8")


def load_embeddings_file(path: str | Path, epoch: int = 0) -> LanguageEmbeddingTable:
    return load_embeddings(Path(path).read_text(encoding="utf-8"), epoch=epoch)


@dataclass
class WalsFeatureTable:
    """feature id -> (language code -> categorical value)."""

    features: dict[str, dict[str, str]] = field(default_factory=dict)

    def feature_ids(self) -> list[str]:
        return sorted(self.features)

    def value(self, feature: str, language: str) -> str | None:
        return self.features.get(feature, {}).get(language)


WALS_HEADER = ("language_code", "feature_id", "value")


def load_wals(text: str) -> WalsFeatureTable:
    """Parse the normalized 3-column WALS CSV; rows with empty values are skipped."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty WALS file") from None
    if tuple(h.strip() for h in header) != WALS_HEADER:
        raise FormatError(f"line 1: expected header {','.join(WALS_HEADER)}, got {','.join(header)}")
    features: dict[str, dict[str, str]] = {}
    for lineno, cols in enumerate(reader, start=2):
        if not cols or all(c.strip() == "" for c in cols):
            continue
        if len(cols) != 3:
            raise FormatError(f"line {lineno}: expected 3 columns, got {len(cols)}")
        language, feature, value = (c.strip() for c in cols)
        if language == "" or feature == "":
            raise FormatError(f"line {lineno}: empty language or feature id")
        if value == "":
            continue
        existing = features.setdefault(feature, {}).get(language)
        if existing is not None and existing != value:
            raise FormatError(
                f"line {lineno}: conflicting value for ({language}, {feature}): "
                f"{existing!r} vs {value!r}"
            )
        features[feature][language] = value
    return WalsFeatureTable(features=features)


def load_wals_file(path: str | Path) -> WalsFeatureTable:
    return load_wals(Path(path).read_text(encoding="utf-8"))


@dataclass
class FeatureFilter:
    """Surviving (language, class) assignment for one feature over a sample.

    Classes with one or zero examples in the sample are dropped together
    with their languages; ``usable`` is False when fewer than two classes
    survive.
    """

    feature_id: str
    assignment: dict[str, str]
    classes: list[str]
    usable: bool

    def languages(self) -> list[str]:
        return sorted(self.assignment)


def filter_feature(
    table: WalsFeatureTable, feature: str, languages: Iterable[str]
) -> FeatureFilter:
    """Restrict a feature to the sample and drop rare classes (<= 1 example)."""
    if feature not in table.features:
        raise KeyError(f"unknown feature {feature!r}")
    rows = table.features[feature]
    present = {lang: rows[lang] for lang in languages if lang in rows}
    counts: dict[str, int] = {}
    for value in present.values():
        counts[value] = counts.get(value, 0) + 1
    kept_classes = sorted(c for c, n in counts.items() if n >= 2)
    assignment = {lang: val for lang, val in present.items() if val in kept_classes}
    return FeatureFilter(
        feature_id=feature,
        assignment=assignment,
        classes=kept_classes,
        usable=len(kept_classes) >= 2,
    )
