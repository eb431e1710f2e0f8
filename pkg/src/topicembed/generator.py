"""Sampling synthetic corpora from the topic embedding generative process.

Each topic is drawn uniformly from the radius-gamma ball (topic 0 is the
null topic), each document draws mixing proportions from Dir(alpha), and
each token draws a topic and then a word from ``P(w | k)``. Context words
play no part in generation.
"""

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Document, Vocabulary
from .model import TopicSet, word_topic_log_probs


@dataclass(frozen=True)
class SyntheticSpec:
    K: int = 5
    N: int = 10
    W: int = 50
    M: int = 200
    doc_length: int = 100
    alpha: float = 0.1
    gamma: float = 7.0
    seed: int = 0

    def __post_init__(self):
        for name in ("K", "N", "W", "M", "doc_length"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not np.all(np.asarray(self.alpha) > 0):
            raise ValueError("alpha must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @property
    def alpha_vector(self):
        a = np.asarray(self.alpha, dtype=np.float64)
        return np.full(self.K, float(a)) if a.ndim == 0 else a


def word_names(W):
    width = len(str(W - 1))
    return tuple(f"w{i:0{width}d}" for i in range(W))


def sample_from_hyperball(N, gamma, rng) -> np.ndarray:
    """Uniform draw from the solid N-ball of radius gamma."""
    x = rng.standard_normal(N)
    while not np.any(x):
        x = rng.standard_normal(N)
    radius = gamma * rng.uniform() ** (1.0 / N)
    return radius * x / np.linalg.norm(x)


def sample_topic_set(K, N, gamma, V, u, rng, owner="global") -> TopicSet:
    T = np.zeros((N, K))
    for k in range(1, K):
        T[:, k] = sample_from_hyperball(N, gamma, rng)
    return TopicSet.from_topics(T, V, u, owner)


def topic_word_probs(topic_set, V, u) -> np.ndarray:
    """W x K matrix whose column k is the distribution ``P(. | k)``."""
    probs = np.exp(word_topic_log_probs(topic_set, V, u))
    return probs / probs.sum(axis=0)


def sample_words(topic_set, V, u, k, size, rng) -> np.ndarray:
    """Draw `size` word indices from topic `k`."""
    probs = topic_word_probs(topic_set, V, u)
    return rng.choice(probs.shape[0], size=size, p=probs[:, k])


def sample_document(phi, word_probs, length, rng):
    """Sample one document given its mixing proportions.

    Returns ``(words, z)``: the word indices and the topic assignment of
    each token.
    """
    K = word_probs.shape[1]
    z = rng.choice(K, size=length, p=phi)
    words = np.empty(length, dtype=np.int64)
    for k in np.unique(z):
        idx = np.flatnonzero(z == k)
        words[idx] = rng.choice(word_probs.shape[0], size=idx.size, p=word_probs[:, k])
    return words, z


def _sample_documents(spec, topic_set, V, u, rng, label=None, start=0):
    probs = topic_word_probs(topic_set, V, u)
    alpha = spec.alpha_vector
    docs, phis = [], []
    for i in range(spec.M):
        phi = rng.dirichlet(alpha)
        words, _ = sample_document(phi, probs, spec.doc_length, rng)
        doc_id = f"syn{start + i}" if label is None else f"{label}/syn{start + i}"
        docs.append(Document(doc_id, words, label))
        phis.append(phi)
    return docs, phis


def _embeddings(spec, V, rng):
    if V is None:
        # unit expected squared norm per word
        return rng.standard_normal((spec.W, spec.N)) / np.sqrt(spec.N)
    V = np.asarray(getattr(V, "V", V), dtype=np.float64)
    if V.shape != (spec.W, spec.N):
        raise ValueError(f"V has shape {V.shape}, spec wants {(spec.W, spec.N)}")
    return V


def generate_synthetic_corpus(spec: SyntheticSpec, V=None, label=None):
    """Sample a corpus with one planted topic set.

    Returns
    -------
    corpus : Corpus
        Vocabulary ``w0..w{W-1}`` with uniform unigram probabilities.
    planted : TopicSet
    phis : list of ndarray
        The per-document mixing proportions that were drawn.
    V : ndarray
        The embeddings used, sampled when not supplied.
    """
    rng = np.random.default_rng(spec.seed)
    V = _embeddings(spec, V, rng)
    u = np.full(spec.W, 1.0 / spec.W)
    planted = sample_topic_set(spec.K, spec.N, spec.gamma, V, u, rng,
                               owner=label or "global")
    docs, phis = _sample_documents(spec, planted, V, u, rng, label)
    return Corpus(tuple(docs), Vocabulary(word_names(spec.W), u)), planted, phis, V


def generate_labeled_corpus(spec: SyntheticSpec, n_classes: int, V=None):
    """Sample `n_classes` categories, each from its own planted topic set.

    All classes share the embeddings and vocabulary; `spec.M` documents are
    drawn per class. Labels are ``c0, c1, ...``.

    Returns ``(corpus, planted_sets, phis, V)`` where `planted_sets` maps
    label to TopicSet.
    """
    root = np.random.SeedSequence(spec.seed)
    rngs = [np.random.default_rng(s) for s in root.spawn(n_classes + 1)]
    V = _embeddings(spec, V, rngs[0])
    u = np.full(spec.W, 1.0 / spec.W)
    docs, phis, planted = [], [], {}
    for c in range(n_classes):
        label = f"c{c}"
        planted[label] = sample_topic_set(spec.K, spec.N, spec.gamma, V, u,
                                          rngs[c + 1], owner=label)
        d, p = _sample_documents(spec, planted[label], V, u, rngs[c + 1], label, start=len(docs))
        docs.extend(d)
        phis.extend(p)
    corpus = Corpus(tuple(docs), Vocabulary(word_names(spec.W), u))
    return corpus, planted, phis, V
