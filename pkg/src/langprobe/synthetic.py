"""Synthetic language construction for desk-scale experiments.

Languages are defined by a lexicon mapping each tag to a word list;
sentences are drawn from shared tag-sequence templates, so two languages
built from the same lexicon shape follow identical tagging rules.  A
lexicon can be translated into a disjoint character inventory (a "twin"
language) or have two tags swapped (a "conflicting" language that assigns
incompatible tags to the same word forms).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import Corpus, LanguageEmbeddingTable, Sentence, Token

__all__ = [
    "TEMPLATES",
    "CONFLICT_TEMPLATES",
    "make_lexicon",
    "translate_lexicon",
    "swap_tags",
    "generate_corpus",
    "planted_embedding_table",
    "write_fixture_dataset",
]

TEMPLATES = (
    ("DET", "NOUN", "VERB"),
    ("DET", "ADJ", "NOUN", "VERB"),
    ("NOUN", "VERB"),
    ("DET", "NOUN", "VERB", "NOUN"),
    ("NOUN", "VERB", "ADJ"),
    ("DET", "ADJ", "NOUN", "VERB", "NOUN"),
)

# Both orders of every NOUN/VERB pair appear, so token position carries no
# information about which of the two tags a word gets; only word identity
# (plus the language) decides.  Needed when two languages assign
# conflicting tags to the same forms.
CONFLICT_TEMPLATES = (
    ("NOUN", "VERB"),
    ("VERB", "NOUN"),
    ("DET", "NOUN", "VERB"),
    ("DET", "VERB", "NOUN"),
    ("NOUN", "VERB", "ADJ"),
    ("VERB", "NOUN", "ADJ"),
)

DEFAULT_TAGS = ("DET", "NOUN", "VERB", "ADJ")


def make_lexicon(
    alphabet: str,
    seed: int,
    words_per_tag: int = 6,
    tags: tuple[str, ...] = DEFAULT_TAGS,
    word_lengths: tuple[int, int] = (2, 4),
) -> dict[str, list[str]]:
    """Random unique words per tag, drawn from the given character inventory."""
    rng = np.random.default_rng(seed)
    chars = list(alphabet)
    seen: set[str] = set()
    lexicon: dict[str, list[str]] = {}
    for tag in tags:
        words = []
        while len(words) < words_per_tag:
            length = int(rng.integers(word_lengths[0], word_lengths[1] + 1))
            word = "".join(rng.choice(chars, size=length))
            if word not in seen:
                seen.add(word)
                words.append(word)
        lexicon[tag] = words
    return lexicon


def translate_lexicon(lexicon: dict[str, list[str]], mapping: dict[str, str]) -> dict[str, list[str]]:
    """Map every character; with a bijection to fresh characters this builds a twin."""
    table = str.maketrans(mapping)
    return {tag: [w.translate(table) for w in words] for tag, words in lexicon.items()}


def swap_tags(lexicon: dict[str, list[str]], a: str = "NOUN", b: str = "VERB") -> dict[str, list[str]]:
    """Same word forms, conflicting rules: the ``a`` and ``b`` word lists trade places."""
    out = dict(lexicon)
    out[a], out[b] = lexicon[b], lexicon[a]
    return out


def generate_corpus(
    language: str,
    lexicon: dict[str, list[str]],
    n_sentences: int,
    seed: int,
    split: str = "train",
    templates: tuple[tuple[str, ...], ...] = TEMPLATES,
) -> Corpus:
    rng = np.random.default_rng(seed)
    sentences = []
    for _ in range(n_sentences):
        template = templates[int(rng.integers(len(templates)))]
        tokens = [Token(form=str(rng.choice(lexicon[tag])), upos=tag) for tag in template]
        sentences.append(Sentence(tokens=tokens))
    return Corpus(language=language, split=split, sentences=sentences)


def planted_embedding_table(
    codes: list[str], dim: int, seed: int, planted_coord: int = 0
) -> LanguageEmbeddingTable:
    """Random vectors with a +-1 class signal planted in one coordinate.

    Codes at even positions get +1, odd positions -1, plus small noise, so
    a downstream classifier can recover the split from that coordinate.
    """
    rng = np.random.default_rng(seed)
    vectors = {}
    for i, code in enumerate(codes):
        vec = rng.normal(0.0, 0.5, size=dim)
        vec[planted_coord] = (1.0 if i % 2 == 0 else -1.0) + rng.normal(0.0, 0.05)
        vectors[code] = vec
    return LanguageEmbeddingTable(epoch=0, vectors=vectors)


FIXTURE_ALPHABETS = {
    "aa": "abcdefgh",
    "bb": "ijklmnop",
    "cc": "qrstuvwx",
    "dd": "yzABCDEF",
    "ee": "GHIJKLMN",
    "ff": "OPQRSTUV",
}


def write_fixture_dataset(
    root: str | Path,
    *,
    seed: int = 7,
    n_train: int = 24,
    n_dev: int = 8,
    n_test: int = 8,
    lang_emb_dim: int = 8,
) -> dict[str, Path]:
    """Write a six-language synthetic dataset: treebanks, embeddings, WALS CSV.

    Languages ``aa`` and ``bb`` are twins (identical rules, disjoint
    characters); the rest have independent lexicons.  The embedding table
    plants a two-class signal in coordinate 0 and the WALS file carries
    three features: one aligned with that signal, one assigned by position
    parity, and one split so the last two languages hold one value each
    (usable as a held-out evaluation set).
    """
    from .data import corpus_to_conllu, dump_embeddings

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    codes = sorted(FIXTURE_ALPHABETS)
    base = make_lexicon(FIXTURE_ALPHABETS["aa"], seed=seed)
    mapping = dict(zip(FIXTURE_ALPHABETS["aa"], FIXTURE_ALPHABETS["bb"]))
    lexicons = {"aa": base, "bb": translate_lexicon(base, mapping)}
    for i, code in enumerate(c for c in codes if c not in lexicons):
        lexicons[code] = make_lexicon(FIXTURE_ALPHABETS[code], seed=seed + 11 * (i + 1))

    paths: dict[str, Path] = {}
    for i, code in enumerate(codes):
        for j, (split, count) in enumerate((("train", n_train), ("dev", n_dev), ("test", n_test))):
            corpus = generate_corpus(code, lexicons[code], count, seed=seed + 101 * i + 13 * j, split=split)
            path = root / f"{code}-{split}.conllu"
            path.write_text(corpus_to_conllu(corpus), encoding="utf-8")
            paths[f"{code}-{split}"] = path

    table = planted_embedding_table(codes, dim=lang_emb_dim, seed=seed + 5)
    emb_path = root / "langemb.vec"
    emb_path.write_text(dump_embeddings(table), encoding="utf-8")
    paths["embeddings"] = emb_path

    rows = ["language_code,feature_id,value"]
    for i, code in enumerate(codes):
        planted = "head-first" if table.vectors[code][0] > 0 else "head-final"
        rows.append(f"{code},100A,{planted}")
        rows.append(f"{code},101A,{'wet' if i % 2 == 0 else 'dry'}")
        rows.append(f"{code},102A,{'north' if i % 2 == 0 else 'south'}")
    wals_path = root / "wals.csv"
    wals_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    paths["wals"] = wals_path
    return paths
