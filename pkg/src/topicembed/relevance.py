"""Word-topic relevance and topic cloud export."""

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .representation import doc_topic_proportions


def _cosine(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def word_topic_relevance(word, k, V, topic_set, freq) -> float:
    """Within-document frequency times cosine(v_word, t_k)."""
    V = np.asarray(getattr(V, "V", V))
    return freq * _cosine(V[word], topic_set.T[:, k])


@dataclass
class CloudTopic:
    topic_id: int
    proportion: float
    words: list = field(default_factory=list)  # (word, relevance), descending


@dataclass
class TopicCloud:
    topics: list

    def to_dict(self):
        return {"topics": [
            {"topic_id": t.topic_id, "proportion": t.proportion,
             "words": [{"word": w, "relevance": r} for w, r in t.words]}
            for t in self.topics]}

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        return cls([CloudTopic(t["topic_id"], t["proportion"],
                               [(w["word"], w["relevance"]) for w in t["words"]])
                    for t in data["topics"]])


def build_topic_cloud(doc, state, V, topic_set, top_n_topics=6, top_n_words=10,
                      words=None, include_null=False) -> TopicCloud:
    """Top topics of a document with their most relevant document words.

    Topics are ranked by inferred proportion; their proportions are
    renormalized over the selection. The null topic is left out unless
    `include_null`, since every word has zero relevance to it. `words` maps
    ids to strings (ids are reported otherwise).
    """
    V = np.asarray(getattr(V, "V", V))
    tokens = np.asarray(getattr(doc, "tokens", doc), dtype=np.int64)
    props = doc_topic_proportions(state)
    candidates = np.arange(topic_set.K) if include_null else np.arange(1, topic_set.K)
    # stable sort keeps lower topic ids first among ties
    order = candidates[np.argsort(-props[candidates], kind="stable")][:top_n_topics]
    total = props[order].sum()

    counts = sorted(Counter(tokens.tolist()).items())
    ids = np.array([w for w, _ in counts], dtype=np.int64)
    freqs = np.array([c for _, c in counts], dtype=np.float64)
    vnorm = np.linalg.norm(V[ids], axis=1) if ids.size else np.zeros(0)

    topics = []
    for k in order:
        t = topic_set.T[:, k]
        tn = np.linalg.norm(t)
        ranked = []
        if top_n_words > 0 and ids.size and tn > 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                cos = np.where(vnorm > 0, (V[ids] @ t) / (vnorm * tn), 0.0)
            rel = freqs * cos
            top = np.argsort(-rel, kind="stable")[:top_n_words]
            ranked = [(words[ids[i]] if words is not None else int(ids[i]), float(rel[i]))
                      for i in top]
        topics.append(CloudTopic(int(k), float(props[k] / total), ranked))
    return TopicCloud(topics)
