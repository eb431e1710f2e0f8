import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topicembed.corpus import (STOPWORDS, Corpus, Document, Vocabulary, build_vocabulary,
                               corpus_from_texts, load_corpus, load_stopwords, load_unigrams,
                               preprocess, tokenize)


class TestPreprocess:
    def test_drops_stopwords_and_lowercases(self):
        assert preprocess("The CAT sat", {"the"}, {"cat", "sat"}) == ["cat", "sat"]

    def test_empty_input(self):
        assert preprocess("", {"the"}, {"cat"}) == []

    def test_out_of_keep_set_removed(self):
        assert preprocess("Zyzzyva runs", set(), {"runs"}) == ["runs"]

    def test_no_keep_set_keeps_everything_but_stopwords(self):
        assert preprocess("a dog, a DOG!", {"a"}) == ["dog", "dog"]

    def test_splits_on_punctuation_and_underscores(self):
        assert tokenize("e-mail snake_case x2") == ["e", "mail", "snake", "case", "x2"]

    def test_shipped_stopword_list_size(self):
        assert 120 <= len(STOPWORDS) <= 200
        assert "the" in STOPWORDS and "cat" not in STOPWORDS

    @settings(max_examples=200, deadline=None)
    @given(st.text())
    def test_idempotent(self, text):
        once = preprocess(text)
        assert preprocess(" ".join(once)) == once

    @settings(max_examples=100, deadline=None)
    @given(st.text(), st.sets(st.sampled_from(["a", "b", "the", "x1"])))
    def test_idempotent_with_keep_set(self, text, keep):
        once = preprocess(text, {"the"}, keep)
        assert preprocess(" ".join(once), {"the"}, keep) == once


class TestBuildVocabulary:
    def test_add_half_smoothing(self):
        vocab = build_vocabulary([["a", "b"], ["a"]])
        assert vocab.words == ("a", "b")
        # hand count: (2 + 0.5) / (3 + 1) and (1 + 0.5) / (3 + 1)
        np.testing.assert_allclose(vocab.unigram_probs, [2.5 / 4, 1.5 / 4], rtol=0, atol=1e-15)

    def test_single_word(self):
        vocab = build_vocabulary([["a", "a", "a", "a"]])
        assert vocab.words == ("a",)
        assert vocab.unigram_probs[0] == 1.0

    def test_external_restricted_and_renormalized(self):
        vocab = build_vocabulary([["a", "b"]], {"a": 0.9, "b": 0.1, "c": 0.0})
        np.testing.assert_allclose(vocab.unigram_probs, [0.9, 0.1], atol=1e-15)
        vocab = build_vocabulary([["a", "b"]], {"a": 0.3, "b": 0.1, "c": 0.6})
        np.testing.assert_allclose(vocab.unigram_probs, [0.75, 0.25], atol=1e-15)

    def test_external_missing_word_is_an_error(self):
        with pytest.raises(ValueError, match="no positive probability"):
            build_vocabulary([["a", "z"]], {"a": 1.0})

    def test_empty(self):
        with pytest.raises(ValueError, match="empty vocabulary"):
            build_vocabulary([[], []])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.lists(st.sampled_from("abcdefghij"), max_size=20), min_size=1)
           .filter(lambda seqs: any(seqs)))
    def test_invariants(self, seqs):
        vocab = build_vocabulary(seqs)
        for w in vocab.words:
            assert vocab.words[vocab.index[w]] == w
        assert np.all(vocab.unigram_probs > 0)
        assert abs(vocab.unigram_probs.sum() - 1) <= 1e-12

    def test_encode_decode(self):
        vocab = build_vocabulary([["b", "a"]])
        ids = vocab.encode(["a", "zz", "b"])
        assert ids.tolist() == [0, 1]
        assert vocab.decode(ids) == ["a", "b"]
        with pytest.raises(KeyError):
            vocab.encode(["zz"], skip_unknown=False)

    def test_content_hash_depends_on_words(self):
        a = build_vocabulary([["a", "b"]])
        b = build_vocabulary([["a", "b", "b"]])
        c = build_vocabulary([["a", "c"]])
        assert a.content_hash() == b.content_hash()
        assert a.content_hash() != c.content_hash()


class TestTypes:
    def test_vocabulary_rejects_duplicates(self):
        with pytest.raises(ValueError):
            Vocabulary(("a", "a"), np.array([0.5, 0.5]))

    def test_document_tokens_read_only(self):
        doc = Document("d", [1, 2])
        with pytest.raises(ValueError):
            doc.tokens[0] = 5

    def test_corpus_checks_ids(self):
        vocab = build_vocabulary([["a"]])
        with pytest.raises(ValueError, match="outside"):
            Corpus((Document("d", [3]),), vocab)

    def test_corpus_from_texts(self):
        c = corpus_from_texts(["the cat", "a dog"], labels=["x", "y"])
        assert len(c) == 2 and c.labels == ["x", "y"]
        assert c.vocabulary.words == ("cat", "dog")


class TestLoadCorpus:
    def test_dir_per_category(self, tmp_path):
        for label in ("sport", "tech"):
            (tmp_path / label).mkdir()
            for i in range(3):
                (tmp_path / label / f"{i}.txt").write_text(f"{label} words number{i}")
        c = load_corpus(tmp_path)
        assert len(c) == 6
        assert c.labels == ["sport", "tech"]

    def test_labeled_lines(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("x\thello world\n")
        c = load_corpus(p)
        assert len(c) == 1
        assert c.documents[0].label == "x"
        assert c.vocabulary.decode(c.documents[0].tokens) == ["hello", "world"]

    def test_empty_directory(self, tmp_path):
        with pytest.raises(ValueError, match="empty vocabulary"):
            load_corpus(tmp_path)

    def test_missing_tab(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("no tab here\n")
        with pytest.raises(ValueError, match="label<TAB>text"):
            load_corpus(p)

    def test_missing_path(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_corpus(tmp_path / "nope.txt", fmt="labeled-lines")

    def test_fixed_vocabulary_drops_unknown_words(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("x\thello there world\n")
        vocab = build_vocabulary([["hello", "world"]])
        c = load_corpus(p, vocabulary=vocab)
        assert c.vocabulary is vocab
        assert c.documents[0].tokens.tolist() == [0, 1]

    def test_stopword_and_unigram_files(self, tmp_path):
        (tmp_path / "stop.txt").write_text("Hello\n\nfoo\n")
        assert load_stopwords(tmp_path / "stop.txt") == {"hello", "foo"}
        (tmp_path / "uni.txt").write_text("a 0.25\nb 0.75\n")
        assert load_unigrams(tmp_path / "uni.txt") == {"a": 0.25, "b": 0.75}
        (tmp_path / "bad.txt").write_text("a\n")
        with pytest.raises(ValueError, match="word prob"):
            load_unigrams(tmp_path / "bad.txt")
