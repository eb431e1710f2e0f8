import gzip

import numpy as np
import pytest

from topicembed.corpus import Vocabulary, build_vocabulary
from topicembed.embeddings import EmbeddingMatrix, align, load_embeddings, save_embeddings


def test_two_line_file(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("a 1.0 0.0\nb 0.0 1.0\n")
    words, V = load_embeddings(p)
    assert words == ["a", "b"]
    np.testing.assert_array_equal(V, np.eye(2))


def test_header_sets_dimension(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("2 3\na 1 2 3\nb 4 5 6\n")
    words, V = load_embeddings(p)
    assert V.shape == (2, 3)


def test_mixed_lengths_fail_on_second_row(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("a 1 2 3\nb 1 2 3 4\n")
    with pytest.raises(ValueError, match=r":2: word 'b'"):
        load_embeddings(p)


def test_empty_file(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("")
    with pytest.raises(ValueError, match="no embeddings"):
        load_embeddings(p)


def test_duplicate_keeps_first(tmp_path, caplog):
    p = tmp_path / "e.txt"
    p.write_text("a 1 2\na 3 4\n")
    words, V = load_embeddings(p)
    assert words == ["a"] and V.tolist() == [[1, 2]]
    assert "duplicate" in caplog.text


def test_gzip_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    V = rng.standard_normal((4, 3))
    save_embeddings(tmp_path / "e.txt.gz", ["w", "x", "y", "z"], V)
    with gzip.open(tmp_path / "e.txt.gz", "rt") as f:
        assert f.readline() == "4 3\n"
    words, back = load_embeddings(tmp_path / "e.txt.gz")
    assert words == ["w", "x", "y", "z"]
    np.testing.assert_array_equal(back, V)


def test_align_permutes_rows():
    vocab = Vocabulary(("b", "a"), np.array([0.5, 0.5]))
    E = align(vocab, ["a", "b"], np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_array_equal(E.V, [[0.0, 1.0], [1.0, 0.0]])


def test_align_identity():
    vocab = build_vocabulary([["a", "b", "c"]])
    V = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(align(vocab, ["a", "b", "c"], V).V, V)


def test_align_missing_word():
    vocab = build_vocabulary([["a", "q"]])
    with pytest.raises(ValueError, match="no embedding.*'q'"):
        align(vocab, ["a"], np.ones((1, 2)))


def test_lookup_after_load_is_bit_exact(tmp_path):
    # decimal strings that are not exactly representable in binary
    p = tmp_path / "e.txt"
    p.write_text("zeta 0.1 -2.675\nalpha 1e-300 3.3333333333333335\n")
    words, V = load_embeddings(p)
    E = align(build_vocabulary([["alpha", "zeta"]]), words, V)
    assert E.V[0].tolist() == [float("1e-300"), float("3.3333333333333335")]
    assert E.V[1].tolist() == [float("0.1"), float("-2.675")]


def test_matrix_rejects_non_finite():
    with pytest.raises(ValueError):
        EmbeddingMatrix(np.array([[np.nan, 1.0]]))
    assert EmbeddingMatrix(np.zeros((3, 5))).dim == 5
