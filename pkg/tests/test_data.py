"""Ingestion tests: CoNLL-U, down-sampling, vocab, embeddings, WALS."""
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from langprobe.data import (
    UNK_CHAR,
    Corpus,
    FormatError,
    Sentence,
    Token,
    build_char_vocab,
    corpus_to_conllu,
    downsample,
    dump_embeddings,
    filter_feature,
    load_embeddings,
    load_wals,
    parse_conllu,
)

FIXTURE = Path(__file__).parent / "fixtures" / "mini.conllu"


def corpus_of(forms_tags, language="xx", split="train"):
    sentences = [Sentence([Token(f, t) for f, t in sent]) for sent in forms_tags]
    return Corpus(language=language, split=split, sentences=sentences)


class TestParseConllu:
    def test_two_tokens_one_sentence(self):
        text = "1\thello\t_\tINTJ\t_\t_\t_\t_\t_\t_\n2\t!\t_\tPUNCT\t_\t_\t_\t_\t_\t_\n\n"
        corpus = parse_conllu(text, "xx")
        assert len(corpus) == 1
        assert [t.form for t in corpus.sentences[0].tokens] == ["hello", "!"]
        assert [t.upos for t in corpus.sentences[0].tokens] == ["INTJ", "PUNCT"]

    def test_range_line_dropped(self):
        text = (
            "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
            "1\tde\t_\tADP\t_\t_\t_\t_\t_\t_\n"
            "2\tel\t_\tDET\t_\t_\t_\t_\t_\t_\n\n"
        )
        corpus = parse_conllu(text, "es")
        assert len(corpus.sentences[0]) == 2

    def test_empty_node_dropped(self):
        text = (
            "1\tsaw\t_\tVERB\t_\t_\t_\t_\t_\t_\n"
            "1.1\tghost\t_\tNOUN\t_\t_\t_\t_\t_\t_\n\n"
        )
        corpus = parse_conllu(text, "en")
        assert [t.form for t in corpus.sentences[0].tokens] == ["saw"]

    def test_wrong_column_count_reports_line(self):
        text = "1\thello\t_\tINTJ\n\n"
        with pytest.raises(FormatError, match="line 1"):
            parse_conllu(text, "xx")

    def test_zero_sentences_rejected(self):
        with pytest.raises(FormatError, match="no sentences"):
            parse_conllu("# only a comment\n", "xx")

    def test_fixture_hand_counts(self):
        corpus = parse_conllu(FIXTURE.read_text(encoding="utf-8"), "en", "train")
        assert len(corpus) == 20
        assert corpus.token_count() == 84
        tags = [t.upos for s in corpus.sentences for t in s.tokens]
        assert tags.count("NOUN") == 20
        assert tags.count("VERB") == 20
        assert tags.count("PUNCT") == 20
        assert tags.count("PRON") == 9
        assert tags.count("DET") == 6
        assert tags.count("ADV") == 6
        assert tags.count("ADJ") == 3

    def test_roundtrip_identity(self):
        corpus = parse_conllu(FIXTURE.read_text(encoding="utf-8"), "en", "train")
        again = parse_conllu(corpus_to_conllu(corpus), "en", "train")
        assert again == corpus


class TestDownsample:
    def test_under_cap_unchanged(self):
        corpus = corpus_of([[("a", "X")]] * 1000)
        assert downsample(corpus, 1500, seed=1) is corpus

    def test_over_cap_exact(self):
        corpus = corpus_of([[(f"w{i}", "X")] for i in range(2000)])
        sampled = downsample(corpus, 1500, seed=1)
        assert len(sampled) == 1500

    def test_deterministic_in_seed(self):
        corpus = corpus_of([[(f"w{i}", "X")] for i in range(50)])
        a = downsample(corpus, 10, seed=42)
        b = downsample(corpus, 10, seed=42)
        assert a == b

    def test_cap_must_be_positive(self):
        corpus = corpus_of([[("a", "X")]])
        with pytest.raises(ValueError):
            downsample(corpus, 0, seed=1)

    @settings(max_examples=30, deadline=None)
    @given(size=st.integers(1, 60), cap=st.integers(1, 60), seed=st.integers(0, 2**31))
    def test_subset_order_and_size(self, size, cap, seed):
        corpus = corpus_of([[(f"w{i}", "X")] for i in range(size)])
        sampled = downsample(corpus, cap, seed)
        assert len(sampled) == min(size, cap)
        forms = [s.tokens[0].form for s in sampled.sentences]
        indices = [int(f[1:]) for f in forms]
        assert indices == sorted(indices)
        assert set(indices) <= set(range(size))


class TestCharVocab:
    def test_two_forms(self):
        vocab = build_char_vocab([corpus_of([[("ab", "X"), ("ba", "X")]])])
        assert vocab.index == {UNK_CHAR: 0, "a": 1, "b": 2}

    def test_union_of_disjoint_inventories(self):
        a = corpus_of([[("abc", "X")]], language="aa")
        b = corpus_of([[("xyz", "X")]], language="bb")
        vocab = build_char_vocab([a, b])
        assert set(vocab.index) == {UNK_CHAR, "a", "b", "c", "x", "y", "z"}

    def test_fixture_distinct_characters(self):
        corpus = parse_conllu(FIXTURE.read_text(encoding="utf-8"), "en")
        # independent count over raw forms
        distinct = set()
        for sentence in corpus.sentences:
            for token in sentence.tokens:
                distinct.update(token.form)
        assert len(distinct) == 35
        vocab = build_char_vocab([corpus])
        assert vocab.size == 36

    def test_unknown_maps_to_unk(self):
        vocab = build_char_vocab([corpus_of([[("ab", "X")]])])
        assert vocab.lookup("Z") == 0
        assert vocab.lookup("a") == 1

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.text(alphabet="abcdefgh", min_size=1, max_size=5), min_size=1, max_size=8))
    def test_permutation_invariant(self, forms):
        corpora = [corpus_of([[(f, "X")]]) for f in forms]
        a = build_char_vocab(corpora)
        b = build_char_vocab(list(reversed(corpora)))
        assert a == b


class TestEmbeddings:
    def test_basic_parse(self):
        table = load_embeddings("aa 1.0 2.0 3.0\nbb 4.0 5.0 6.0\n")
        assert table.epoch == 0
        assert table.languages() == ["aa", "bb"]
        assert table.dim == 3
        assert np.array_equal(table.vectors["bb"], [4.0, 5.0, 6.0])

    def test_header_line_skipped(self):
        table = load_embeddings("2 3\naa 1 2 3\nbb 4 5 6\n")
        assert table.languages() == ["aa", "bb"]

    def test_inconsistent_dimension_names_line(self):
        lines = ["aa " + " ".join(["0.0"] * 64), "bb " + " ".join(["0.0"] * 63)]
        with pytest.raises(FormatError, match="line 2"):
            load_embeddings("\n".join(lines))

    def test_duplicate_code_rejected(self):
        with pytest.raises(FormatError, match="duplicate"):
            load_embeddings("aa 1 2\naa 3 4\n")

    def test_roundtrip_bit_exact(self):
        rng = np.random.default_rng(12)
        table = load_embeddings(
            "\n".join(
                f"l{i} " + " ".join(repr(float(v)) for v in rng.normal(size=64)) for i in range(10)
            )
        )
        again = load_embeddings(dump_embeddings(table))
        assert again.languages() == table.languages()
        for code in table.languages():
            assert np.array_equal(again.vectors[code], table.vectors[code])


class TestWals:
    def test_basic_parse(self):
        table = load_wals(
            "language_code,feature_id,value\n"
            "fin,86A,Genitive-Noun\n"
            "est,86A,Genitive-Noun\n"
            "fin,81A,SVO\n"
        )
        assert table.feature_ids() == ["81A", "86A"]
        assert table.value("86A", "est") == "Genitive-Noun"

    def test_empty_value_skipped(self):
        table = load_wals("language_code,feature_id,value\nfin,86A,\nest,86A,X\n")
        assert table.value("86A", "fin") is None
        assert table.value("86A", "est") == "X"

    def test_conflicting_duplicate_rejected(self):
        text = "language_code,feature_id,value\nfin,86A,X\nfin,86A,Y\n"
        with pytest.raises(FormatError, match="conflicting"):
            load_wals(text)

    def test_identical_duplicate_allowed(self):
        text = "language_code,feature_id,value\nfin,86A,X\nfin,86A,X\n"
        assert load_wals(text).value("86A", "fin") == "X"

    def test_bad_header_rejected(self):
        with pytest.raises(FormatError, match="header"):
            load_wals("lang,feat,val\nfin,86A,X\n")

    def test_uralic_sample_feature(self):
        # mirrors the genitive-noun order rows for the four target languages
        rows = ["language_code,feature_id,value"]
        for code in ("fin", "est", "hun", "sme"):
            rows.append(f"{code},86A,Genitive-Noun")
        rows.append("spa,86A,Noun-Genitive")
        table = load_wals("\n".join(rows))
        for code in ("fin", "est", "hun", "sme"):
            assert table.value("86A", code) is not None


class TestFilterFeature:
    def _table(self, assignment):
        rows = ["language_code,feature_id,value"]
        rows += [f"{lang},F,{value}" for lang, value in assignment.items()]
        return load_wals("\n".join(rows))

    def test_rare_class_dropped(self):
        assignment = {f"a{i}": "A" for i in range(5)}
        assignment.update({f"b{i}": "B" for i in range(3)})
        assignment["c0"] = "C"
        table = self._table(assignment)
        result = filter_feature(table, "F", assignment)
        assert result.classes == ["A", "B"]
        assert len(result.assignment) == 8
        assert result.usable

    def test_two_singletons_unusable(self):
        table = self._table({"x": "A", "y": "B"})
        result = filter_feature(table, "F", ["x", "y"])
        assert not result.usable
        assert result.classes == []

    def test_unknown_feature_rejected(self):
        table = self._table({"x": "A"})
        with pytest.raises(KeyError):
            filter_feature(table, "missing", ["x"])

    def test_hand_enumerated_mixed_coverage(self):
        # 20 languages: A x6, B x2, C x1, D x3; languages l12..l19 lack a value
        values = {}
        for i in range(6):
            values[f"l{i:02d}"] = "A"
        values["l06"] = "B"
        values["l07"] = "B"
        values["l08"] = "C"
        for i in range(9, 12):
            values[f"l{i:02d}"] = "D"
        table = self._table(values)
        sample = [f"l{i:02d}" for i in range(20)]
        result = filter_feature(table, "F", sample)
        # hand enumeration: C is a singleton, so 6 + 2 + 3 = 11 languages survive
        assert result.classes == ["A", "B", "D"]
        assert sorted(result.assignment) == sorted(
            [f"l{i:02d}" for i in range(6)] + ["l06", "l07"] + [f"l{i:02d}" for i in range(9, 12)]
        )

    def test_restricted_to_sample(self):
        table = self._table({"x": "A", "y": "A", "z": "B", "w": "B"})
        result = filter_feature(table, "F", ["x", "y", "z"])
        assert result.classes == ["A"]
        assert not result.usable

    @settings(max_examples=30, deadline=None)
    @given(
        st.dictionaries(
            st.text(alphabet="lmnop", min_size=1, max_size=3),
            st.sampled_from(["A", "B", "C"]),
            min_size=1,
            max_size=12,
        )
    )
    def test_surviving_classes_have_two_members(self, values):
        table = self._table(values)
        result = filter_feature(table, "F", list(values))
        counts = {}
        for v in result.assignment.values():
            counts[v] = counts.get(v, 0) + 1
        assert all(n >= 2 for n in counts.values())
        assert set(result.assignment.values()) == set(result.classes)
