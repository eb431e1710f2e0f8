"""Topic embedding model: residuals, variational E-step, gradient M-step, GEM loop.

Topics live in the word embedding space. Under topic ``k`` a word ``w`` has
probability ``u_w * exp(v_w . t_k + r_k)`` where ``u`` is the unigram
distribution and the residual ``r_k`` normalizes the distribution.

Topic indices are 0-based in code; topic 0 is the null topic, whose
embedding is pinned at zero so that it reproduces the unigram distribution.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.special import digamma, gammaln, xlogy

logger = logging.getLogger(__name__)


class EmbeddingOverflowError(FloatingPointError):
    pass


def _as_matrix(V):
    return np.asarray(getattr(V, "V", V), dtype=np.float64)


@dataclass(frozen=True)
class Hyperparams:
    K: int = 15
    alpha: np.ndarray = 0.1
    gamma: float = 7.0
    lambda0: float = 0.1
    L0: int = 500
    gem_iters: int = 100
    e_tol: float = 1e-4
    e_max: int = 100

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if alpha.ndim == 0:
            alpha = np.full(int(self.K), float(alpha))
        if alpha.shape != (self.K,):
            raise ValueError(f"alpha must be a scalar or a {self.K}-vector")
        if not np.all(alpha > 0):
            raise ValueError("alpha must be strictly positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        if self.L0 < 1:
            raise ValueError("L0 must be >= 1")
        if self.gem_iters < 0 or self.e_max < 1 or not self.e_tol > 0:
            raise ValueError("gem_iters must be >= 0, e_max >= 1, e_tol > 0")
        alpha.setflags(write=False)
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class TopicSet:
    """Topic embeddings as columns of `T` (N x K), with matching residuals `r`."""

    T: np.ndarray
    r: np.ndarray
    owner: str = "global"

    @property
    def N(self):
        return self.T.shape[0]

    @property
    def K(self):
        return self.T.shape[1]

    @classmethod
    def zeros(cls, N, K, owner="global"):
        return cls(np.zeros((N, K)), np.zeros(K), owner)

    @classmethod
    def from_topics(cls, T, V, u, owner="global"):
        T = np.array(T, dtype=np.float64)
        return cls(T, compute_topic_residuals(V, u, T), owner)


@dataclass
class DocVariational:
    """Variational state of one document.

    ``pi`` holds per-word topic responsibilities (L x K) and ``theta`` the
    Dirichlet parameter of the document's topic mixture.
    """

    pi: np.ndarray
    theta: np.ndarray
    n_iter: int = 0
    converged: bool = True


@dataclass
class ModelState:
    topic_sets: dict
    hyper: Hyperparams
    elbo_trace: list = field(default_factory=list)
    # final variational states per topic set, in partition order; not persisted
    doc_states: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        shapes = {ts.T.shape for ts in self.topic_sets.values()}
        if len(shapes) > 1:
            raise ValueError(f"topic sets disagree on (N, K): {sorted(shapes)}")


# -- link function ----------------------------------------------------------

def compute_topic_residuals(V, u, T) -> np.ndarray:
    """Residuals ``r_k = -log sum_s u_s exp(v_s . t_k)`` for every column of T.

    Evaluated with a max-shifted log-sum-exp. All-zero columns get exactly 0.
    """
    V = _as_matrix(V)
    u = np.asarray(u, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        scores = V @ T
    if not np.all(np.isfinite(scores)):
        raise EmbeddingOverflowError("embedding overflow")
    shift = scores.max(axis=0)
    r = -(shift + np.log(u @ np.exp(scores - shift)))
    r[~T.any(axis=0)] = 0.0
    return r


def word_topic_log_probs(topic_set, V, u) -> np.ndarray:
    """W x K matrix of ``log P(w | k)``."""
    V = _as_matrix(V)
    return np.log(np.asarray(u))[:, None] + V @ topic_set.T + topic_set.r


def log_word_topic_prob(w, k, topic_set, V, u) -> float:
    V = _as_matrix(V)
    return float(np.log(u[w]) + V[w] @ topic_set.T[:, k] + topic_set.r[k])


def residual_gradient(topic_set, V, u, k) -> np.ndarray:
    """Gradient of ``r_k`` with respect to ``t_k``.

    This is minus the mean embedding under ``P(w | k)``:
    ``-(sum_s u_s e^{v_s.t_k} v_s) / (sum_s u_s e^{v_s.t_k})``.
    """
    return residual_gradients(topic_set.T[:, [k]], V, u)[:, 0]


def residual_gradients(T, V, u) -> np.ndarray:
    """Column k is the gradient of ``r_k`` w.r.t. ``t_k``."""
    V = _as_matrix(V)
    scores = V @ T
    w = np.asarray(u)[:, None] * np.exp(scores - scores.max(axis=0))
    return -(V.T @ w) / w.sum(axis=0)


# -- E-step -----------------------------------------------------------------

def _doc_scores(tokens, topic_set, V):
    """L x K matrix of ``v_w . t_k + r_k``."""
    return V[tokens] @ topic_set.T + topic_set.r


def _check_active(active, K):
    if active is None:
        return None
    active = np.asarray(active, dtype=bool)
    if active.shape != (K,):
        raise ValueError(f"active mask must have length {K}")
    if not active.any():
        raise ValueError("all topics are inactive")
    return None if active.all() else active


def _responsibilities(scores, theta, active):
    logits = scores + digamma(theta)
    if active is not None:
        logits = np.where(active, logits, -np.inf)
    logits = logits - logits.max(axis=1, keepdims=True)
    pi = np.exp(logits)
    pi /= pi.sum(axis=1, keepdims=True)
    return pi


def update_pi(tokens, theta, topic_set, V, active=None) -> np.ndarray:
    """Optimal responsibilities given theta; inactive topics get exactly 0."""
    V = _as_matrix(V)
    tokens = np.asarray(getattr(tokens, "tokens", tokens), dtype=np.int64)
    active = _check_active(active, topic_set.K)
    return _responsibilities(_doc_scores(tokens, topic_set, V), np.asarray(theta), active)


def update_theta(pi, alpha) -> np.ndarray:
    return np.asarray(alpha, dtype=np.float64) + np.asarray(pi).sum(axis=0)


def _doc_elbo(scores, pi, theta, alpha):
    theta0 = theta.sum()
    K = theta.shape[0]
    mbar = pi.sum(axis=0)
    elog_phi = digamma(theta) - digamma(theta0)
    value = ((mbar + alpha - 1.0) * elog_phi).sum() + (scores * pi).sum()
    entropy = (gammaln(theta).sum() - gammaln(theta0)
               - ((theta - 1.0) * digamma(theta)).sum()
               + (theta0 - K) * digamma(theta0)
               - xlogy(pi, pi).sum())
    return float(value + entropy)


def _fast_alternations(scores, theta, alpha, active, hyper):
    """Same alternations as the reference loop, without re-exponentiating scores.

    ``pi = E * w / (E @ w)`` with ``E = exp(scores - rowmax)`` fixed for the
    whole E-step and ``w = exp(psi(theta) - max psi(theta))``. Returns None
    when a row underflows, leaving the log-space loop to handle it.
    """
    E = np.exp(scores - scores.max(axis=1, keepdims=True))
    if active is not None:
        E[:, ~active] = 0.0
    converged = False
    for it in range(1, hyper.e_max + 1):
        psi = digamma(theta)
        w = np.exp(psi - psi.max())
        if active is not None:
            w[~active] = 0.0
        norm = E @ w
        # E and w are bounded by 1, so only underflow (or NaN) can go wrong
        if not norm.min() > 0:
            return None
        new_theta = alpha + w * (E.T @ (1.0 / norm))
        delta = np.abs(new_theta - theta).max()
        theta = new_theta
        if delta < hyper.e_tol:
            converged = True
            break
    if not converged:
        logger.debug("E-step hit e_max=%d (last delta %.3g)", hyper.e_max, delta)
    # the returned pi is the one theta was computed from
    pi = E * w
    pi /= norm[:, None]
    return DocVariational(pi, theta, it, converged)


def e_step_document(doc, topic_set, V, hyper, active=None, theta0=None,
                    alpha=None, trace: Optional[list] = None) -> DocVariational:
    """Coordinate ascent on one document's ``(pi, theta)`` with topics fixed.

    Starts from ``theta = alpha + L / K_active`` on active topics unless
    `theta0` is given, then alternates the closed-form pi and theta updates
    until ``max |delta theta| < hyper.e_tol`` or ``hyper.e_max`` rounds.
    If `trace` is a list, the document's ELBO contribution is appended after
    every half-update.
    """
    V = _as_matrix(V)
    tokens = np.asarray(getattr(doc, "tokens", doc), dtype=np.int64)
    K = topic_set.K
    alpha = hyper.alpha if alpha is None else np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (K,):
        raise ValueError(f"alpha has length {alpha.shape[0]}, topic set has {K} topics")
    active = _check_active(active, K)
    L = tokens.shape[0]
    if L == 0:
        return DocVariational(np.zeros((0, K)), alpha.copy(), 0, True)

    if theta0 is not None:
        theta = np.array(theta0, dtype=np.float64)
    else:
        on = np.ones(K, dtype=bool) if active is None else active
        theta = alpha + on * (L / on.sum())

    scores = _doc_scores(tokens, topic_set, V)
    if trace is None:
        fast = _fast_alternations(scores, theta, alpha, active, hyper)
        if fast is not None:
            return fast

    converged = False
    for it in range(1, hyper.e_max + 1):
        pi = _responsibilities(scores, theta, active)
        if trace is not None:
            trace.append(_doc_elbo(scores, pi, theta, alpha))
        new_theta = alpha + pi.sum(axis=0)
        delta = np.abs(new_theta - theta).max()
        theta = new_theta
        if trace is not None:
            trace.append(_doc_elbo(scores, pi, theta, alpha))
        if delta < hyper.e_tol:
            converged = True
            break
    if not converged:
        logger.debug("E-step hit e_max=%d (last delta %.3g)", hyper.e_max, delta)
    return DocVariational(pi, theta, it, converged)


def document_elbo(doc, state, topic_set, V, alpha) -> float:
    """ELBO contribution of one document, up to additive constants."""
    tokens = np.asarray(getattr(doc, "tokens", doc), dtype=np.int64)
    scores = _doc_scores(tokens, topic_set, _as_matrix(V))
    return _doc_elbo(scores, state.pi, state.theta, np.asarray(alpha, dtype=np.float64))


def elbo_core(docs, states, topic_sets, V, alpha) -> float:
    """Variational lower bound over documents, dropping terms constant in (q, T).

    `topic_sets` is either one TopicSet shared by every document or a
    sequence giving each document's set.
    """
    if isinstance(topic_sets, TopicSet):
        topic_sets = [topic_sets] * len(docs)
    V = _as_matrix(V)
    return float(sum(document_elbo(d, s, ts, V, alpha)
                     for d, s, ts in zip(docs, states, topic_sets)))


# -- M-step -----------------------------------------------------------------

def topic_gradient(docs, states, topic_set, V, u) -> np.ndarray:
    """Gradient of the ELBO w.r.t. the topic matrix of a shared topic set.

    Sums ``sum_j v_{w_j} pi_j^T`` over all documents and adds each column's
    expected count times its residual gradient. The null column is zeroed.
    """
    V = _as_matrix(V)
    G = np.zeros_like(topic_set.T)
    mbar = np.zeros(topic_set.K)
    for doc, st in zip(docs, states):
        tokens = np.asarray(getattr(doc, "tokens", doc), dtype=np.int64)
        if tokens.shape[0] == 0:
            continue
        G += V[tokens].T @ st.pi
        mbar += st.pi.sum(axis=0)
    G += residual_gradients(topic_set.T, V, u) * mbar
    G[:, 0] = 0.0
    return G


def learning_rate(l, L, L0, lambda0) -> float:
    return L0 * lambda0 / (l * max(L, L0))


def project_to_ball(T, gamma) -> np.ndarray:
    T = np.array(T, dtype=np.float64)
    norms = np.linalg.norm(T, axis=0)
    over = norms > gamma
    T[:, over] *= gamma / norms[over]
    return T


def m_step(topic_set, gradient, l, L_total, hyper, V, u) -> TopicSet:
    """One projected gradient ascent step; returns a new TopicSet."""
    if l < 1:
        raise ValueError("iteration index l starts at 1")
    lr = learning_rate(l, L_total, hyper.L0, hyper.lambda0)
    T = project_to_ball(topic_set.T + lr * gradient, hyper.gamma)
    T[:, 0] = 0.0
    return replace(topic_set, T=T, r=compute_topic_residuals(V, u, T))


# -- GEM loop ---------------------------------------------------------------

def partition_corpus(corpus, per_category: Optional[bool] = None) -> dict:
    """Group documents by the topic set that owns them.

    With `per_category` on, each label gets its own set (labels sorted);
    otherwise every document shares the "global" set. ``None`` means on
    exactly when every document carries a label.
    """
    docs = list(corpus)
    if per_category is None:
        per_category = bool(docs) and all(d.label is not None for d in docs)
    if not per_category:
        return {"global": docs}
    groups = {}
    for d in docs:
        if d.label is None:
            raise ValueError(f"document {d.doc_id!r} has no label for per-category sharing")
        groups.setdefault(d.label, []).append(d)
    return {k: groups[k] for k in sorted(groups)}


def _nudge(topic_set, scale, rng, V, u):
    """Add a random direction of norm `scale` to every non-null topic."""
    N, K = topic_set.T.shape
    T = topic_set.T.copy()
    if K > 1 and scale > 0:
        D = rng.standard_normal((N, K - 1))
        T[:, 1:] += scale * D / np.linalg.norm(D, axis=0)
    return TopicSet.from_topics(T, V, u, topic_set.owner)


def gem_fit(partitions: Mapping[str, Sequence], V, u, hyper: Hyperparams, seed: int = 0,
            break_symmetry: bool = True, init_scale: float = 0.3,
            callback: Optional[Callable] = None) -> ModelState:
    """Fit topic embeddings with variational generalized EM.

    Every topic set starts at zero. Each outer iteration runs the E-step on
    every document against its own topic set, then one projected gradient
    step per topic set using the gradient summed over the set's documents,
    and records the ELBO of the new topics under the E-step's q.

    Zero topics are exchangeable: without intervention the non-null topics
    of a set stay identical forever. With `break_symmetry` set, the first
    iteration moves each non-null topic to a seeded random direction of norm
    `init_scale` and starts its E-step from a seeded random theta. A single
    document needs the nudge, because with T = 0 every one of its words has
    the same responsibilities and all topic gradients are parallel.

    `callback(l, topic_sets, states, elbo)` is invoked after every iteration.
    """
    V = _as_matrix(V)
    u = np.asarray(u, dtype=np.float64)
    N, K = V.shape[1], hyper.K
    rng = np.random.default_rng(seed)
    sets = {name: TopicSet.zeros(N, K, name) for name in partitions}
    trace = []

    for l in range(1, hyper.gem_iters + 1):
        if l == 1 and break_symmetry:
            sets = {name: _nudge(ts, min(init_scale, hyper.gamma), rng, V, u)
                    for name, ts in sets.items()}
        states = {}
        for name, docs in partitions.items():
            ts = sets[name]
            sts = []
            for doc in docs:
                theta0 = None
                if l == 1 and break_symmetry and len(doc):
                    theta0 = hyper.alpha + len(doc) * rng.dirichlet(np.ones(K))
                sts.append(e_step_document(doc, ts, V, hyper, theta0=theta0))
            states[name] = sts

        elbo = 0.0
        for name, docs in partitions.items():
            G = topic_gradient(docs, states[name], sets[name], V, u)
            L_total = sum(len(d) for d in docs)
            sets[name] = m_step(sets[name], G, l, L_total, hyper, V, u)
            elbo += elbo_core(docs, states[name], sets[name], V, hyper.alpha)
        trace.append(elbo)
        logger.info("GEM iteration %d: elbo %.6f", l, elbo)
        if callback is not None:
            callback(l, sets, states, elbo)

    final = {name: [e_step_document(d, sets[name], V, hyper) for d in docs]
             for name, docs in partitions.items()}
    return ModelState(sets, hyper, trace, final)


def infer_new_document(doc, topic_set, V, hyper, alpha=None) -> DocVariational:
    """One E-step for an unseen document against frozen topics."""
    return e_step_document(doc, topic_set, V, hyper, alpha=alpha)
