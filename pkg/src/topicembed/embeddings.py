"""Loading pre-trained word embeddings and aligning them to a vocabulary."""

import gzip
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Rows are word embeddings in vocabulary id order."""

    V: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.V, dtype=np.float64)
        if V.ndim != 2:
            raise ValueError("embedding matrix must be 2-D")
        if not np.all(np.isfinite(V)):
            raise ValueError("embedding matrix contains non-finite entries")
        V.setflags(write=False)
        object.__setattr__(self, "V", V)

    @property
    def dim(self) -> int:
        return self.V.shape[1]

    def __len__(self):
        return self.V.shape[0]


def _open_text(path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def load_embeddings(path):
    """Read a text embedding file.

    Each line is ``word f1 ... fN``; an optional first line ``W N`` is a
    header. Duplicate words keep their first row. Files ending in ``.gz`` are
    decompressed transparently.

    Returns
    -------
    words : list of str
    V : ndarray of shape (len(words), N)
    """
    words, rows, seen = [], [], set()
    dim = None
    with _open_text(path) as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                dim = int(parts[1])
                continue
            word, vals = parts[0], parts[1:]
            if dim is None:
                dim = len(vals)
            if len(vals) != dim or dim == 0:
                raise ValueError(
                    f"{path}:{lineno}: word {word!r} has {len(vals)} values, expected {dim}")
            if word in seen:
                logger.warning("%s:%d: duplicate word %r ignored", path, lineno, word)
                continue
            seen.add(word)
            words.append(word)
            rows.append([float(v) for v in vals])
    if not rows:
        raise ValueError(f"{path}: no embeddings found")
    return words, np.array(rows, dtype=np.float64)


def save_embeddings(path, words, V, header=True):
    V = np.asarray(V, dtype=np.float64)
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wt", encoding="utf-8") as f:
        if header:
            f.write(f"{V.shape[0]} {V.shape[1]}\n")
        for w, row in zip(words, V):
            f.write(w + " " + " ".join(repr(float(x)) for x in row) + "\n")


def align(vocab, words, V) -> EmbeddingMatrix:
    """Permute embedding rows into the vocabulary's id order."""
    pos = {w: i for i, w in enumerate(words)}
    missing = [w for w in vocab.words if w not in pos]
    if missing:
        raise ValueError(
            f"{len(missing)} vocabulary words have no embedding: {missing[:10]}")
    order = np.fromiter((pos[w] for w in vocab.words), dtype=np.int64, count=len(vocab))
    return EmbeddingMatrix(np.asarray(V, dtype=np.float64)[order])
