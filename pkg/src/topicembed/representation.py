"""Document features from trained topic sets."""

import logging
from dataclasses import dataclass

import numpy as np

from .model import TopicSet, compute_topic_residuals

logger = logging.getLogger(__name__)

ESTIMATORS = ("dirichlet_mean", "pi_mean")


@dataclass(frozen=True)
class MergedTopicSpace:
    """All categories' topics side by side, sharing a single null topic.

    ``origin[k]`` is the ``(category, local index)`` a merged topic came from;
    the null topic is attributed to the first category.
    """

    topics: np.ndarray
    residuals: np.ndarray
    origin: tuple
    alpha: np.ndarray

    @property
    def K_total(self):
        return self.topics.shape[1]

    def topic_set(self) -> TopicSet:
        return TopicSet(self.topics, self.residuals, "merged")


def merge_topic_sets(state, V, u) -> MergedTopicSpace:
    """Concatenate non-null topics of every set after one shared null column."""
    names = list(state.topic_sets)
    if not names:
        raise ValueError("model has no topic sets")
    N = state.topic_sets[names[0]].N
    alpha = state.hyper.alpha
    cols, origin, alphas = [np.zeros(N)], [(names[0], 0)], [alpha[0]]
    for name in names:
        ts = state.topic_sets[name]
        for k in range(1, ts.K):
            cols.append(ts.T[:, k])
            origin.append((name, k))
            alphas.append(alpha[k])
    T = np.column_stack(cols)
    return MergedTopicSpace(T, compute_topic_residuals(V, u, T), tuple(origin),
                            np.asarray(alphas, dtype=np.float64))


def merged_topic_count(n_sets, K):
    return n_sets * (K - 1) + 1


def doc_topic_proportions(state, estimator="dirichlet_mean") -> np.ndarray:
    """Point estimate of a document's topic mixture.

    ``dirichlet_mean`` is theta / sum(theta). ``pi_mean`` averages the word
    responsibilities and falls back to the Dirichlet mean for empty documents.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}")
    if estimator == "pi_mean" and state.pi.shape[0] > 0:
        return state.pi.mean(axis=0)
    theta = np.asarray(state.theta, dtype=np.float64)
    return theta / theta.sum()


def mean_word_vector(tokens, V) -> np.ndarray:
    V = np.asarray(getattr(V, "V", V))
    tokens = np.asarray(getattr(tokens, "tokens", tokens), dtype=np.int64)
    if tokens.shape[0] == 0:
        logger.warning("mean word vector of an empty document is the zero vector")
        return np.zeros(V.shape[1])
    return V[tokens].mean(axis=0)


def combined_features(proportions, mean_wv) -> np.ndarray:
    return np.concatenate([np.asarray(proportions, dtype=np.float64).ravel(),
                           np.asarray(mean_wv, dtype=np.float64).ravel()])


def topic_similarity_matrix(space) -> np.ndarray:
    """Pairwise cosine similarity of topic embeddings.

    `space` is a MergedTopicSpace, a TopicSet or an N x K topic matrix.

    Zero topics have similarity 0 with every other topic and 1 with
    themselves.
    """
    if isinstance(space, MergedTopicSpace):
        T = space.topics
    elif isinstance(space, TopicSet):
        T = space.T
    else:
        T = np.asarray(space, dtype=np.float64)
    norms = np.linalg.norm(T, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    U = T / safe
    S = U.T @ U
    np.fill_diagonal(S, 1.0)
    return S


def adjusted_doc_similarity(p, q, S) -> float:
    """Similarity of two topic mixtures that credits overlapping topics."""
    return float(np.asarray(p) @ np.asarray(S) @ np.asarray(q))
