"""Corpus ingestion: tokenization, vocabulary and unigram distribution."""

import hashlib
import logging
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

# English stopwords, lowercase.
STOPWORDS = frozenset("""
a about above after again against all am an and any are aren as at be because
been before being below between both but by can cannot could couldn did didn do
does doesn doing don down during each few for from further had hadn has hasn
have haven having he her here hers herself him himself his how i if in into is
isn it its itself just let ll me more most mustn my myself no nor not now of
off on once only or other ought our ours ourselves out over own re s same shan
she should shouldn so some such t than that the their theirs them themselves
then there these they this those through to too under until up ve very was
wasn we were weren what when where which while who whom why will with won would
wouldn you your yours yourself yourselves also however may might must shall
upon us via yet would d m o y ain ma mightn needn wouldn thus hence else
""".split())

_TOKEN_RE = re.compile(r"[^\W_]+")

FORMATS = ("dir-per-category", "labeled-lines")


def tokenize(text: str) -> list:
    """Lowercase and split on non-alphanumeric boundaries."""
    return _TOKEN_RE.findall(text.lower())


def preprocess(raw_text: str, stopwords: Iterable[str] = STOPWORDS,
               keep_set: Optional[Iterable[str]] = None) -> list:
    """Tokenize `raw_text`, dropping stopwords and tokens outside `keep_set`.

    `keep_set` is normally the embedding vocabulary; ``None`` keeps every
    non-stopword token.
    """
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    if keep_set is not None and not isinstance(keep_set, (set, frozenset, dict)):
        keep_set = set(keep_set)
    out = []
    for tok in tokenize(raw_text):
        if tok in stop:
            continue
        if keep_set is not None and tok not in keep_set:
            continue
        out.append(tok)
    return out


@dataclass(frozen=True)
class Vocabulary:
    words: tuple
    unigram_probs: np.ndarray
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        words = tuple(self.words)
        probs = np.asarray(self.unigram_probs, dtype=np.float64)
        if probs.shape != (len(words),):
            raise ValueError("unigram_probs must have one entry per word")
        if len(set(words)) != len(words):
            raise ValueError("vocabulary words must be unique")
        probs.setflags(write=False)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "unigram_probs", probs)
        object.__setattr__(self, "index", {w: i for i, w in enumerate(words)})

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def encode(self, tokens: Iterable[str], skip_unknown: bool = True) -> np.ndarray:
        ids = []
        for tok in tokens:
            i = self.index.get(tok)
            if i is None:
                if not skip_unknown:
                    raise KeyError(tok)
                continue
            ids.append(i)
        return np.asarray(ids, dtype=np.int64)

    def decode(self, ids: Iterable[int]) -> list:
        return [self.words[i] for i in ids]

    def content_hash(self) -> str:
        """SHA-256 over the ordered word list; identifies the id layout."""
        h = hashlib.sha256()
        for w in self.words:
            h.update(w.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        toks = np.asarray(self.tokens, dtype=np.int64).reshape(-1)
        toks.setflags(write=False)
        object.__setattr__(self, "tokens", toks)

    def __len__(self):
        return int(self.tokens.shape[0])


@dataclass(frozen=True)
class Corpus:
    documents: tuple
    vocabulary: Vocabulary

    def __post_init__(self):
        docs = tuple(self.documents)
        W = len(self.vocabulary)
        for d in docs:
            if len(d) and (d.tokens.min() < 0 or d.tokens.max() >= W):
                raise ValueError(f"document {d.doc_id!r} has token ids outside [0, {W})")
        object.__setattr__(self, "documents", docs)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def labels(self) -> list:
        return sorted({d.label for d in self.documents if d.label is not None})


def build_vocabulary(token_sequences: Iterable[Sequence[str]],
                     external_unigrams: Optional[Mapping[str, float]] = None) -> Vocabulary:
    """Vocabulary over all observed tokens, sorted, with a unigram distribution.

    Without `external_unigrams` the probabilities are corpus frequencies with
    add-0.5 smoothing. With it, the external probabilities are restricted to
    the observed words and renormalized.
    """
    counts = Counter()
    for seq in token_sequences:
        counts.update(seq)
    if not counts:
        raise ValueError("empty vocabulary")
    words = tuple(sorted(counts))

    if external_unigrams is None:
        c = np.array([counts[w] for w in words], dtype=np.float64) + 0.5
    else:
        c = np.array([float(external_unigrams.get(w, 0.0)) for w in words])
        bad = [w for w, p in zip(words, c) if not p > 0]
        if bad:
            raise ValueError(
                f"external unigrams give no positive probability for {len(bad)} "
                f"observed words, e.g. {bad[:10]}")
    probs = c / c.sum()
    return Vocabulary(words, probs)


def load_stopwords(path) -> frozenset:
    with open(path, encoding="utf-8") as f:
        return frozenset(line.strip().lower() for line in f if line.strip())


def load_unigrams(path) -> dict:
    """Read "word prob" lines."""
    probs = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'word prob'")
            probs.setdefault(parts[0], float(parts[1]))
    return probs


def _read_raw(path, fmt):
    """Yield (doc_id, label, text) triples."""
    if fmt == "dir-per-category":
        if not os.path.isdir(path):
            raise FileNotFoundError(f"not a readable directory: {path}")
        for label in sorted(os.listdir(path)):
            sub = os.path.join(path, label)
            if not os.path.isdir(sub):
                continue
            for name in sorted(os.listdir(sub)):
                fpath = os.path.join(sub, name)
                if not os.path.isfile(fpath):
                    continue
                with open(fpath, encoding="utf-8", errors="replace") as f:
                    yield f"{label}/{name}", label, f.read()
    elif fmt == "labeled-lines":
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                label, sep, text = line.partition("\t")
                if not sep:
                    raise ValueError(f"{path}:{lineno}: expected 'label<TAB>text'")
                yield f"{os.path.basename(path)}:{lineno}", label, text
    else:
        raise ValueError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")


def detect_format(path) -> str:
    return "dir-per-category" if os.path.isdir(path) else "labeled-lines"


def load_corpus(path, fmt: str = "auto", stopwords: Iterable[str] = STOPWORDS,
                keep_set=None, external_unigrams=None,
                vocabulary: Optional[Vocabulary] = None) -> Corpus:
    """Read and preprocess a labeled corpus.

    If `vocabulary` is given (e.g. the training vocabulary when loading a
    test split) tokens outside it are dropped and no new vocabulary is built.
    """
    if fmt == "auto":
        fmt = detect_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
    if not os.path.exists(path):
        raise FileNotFoundError(f"corpus path does not exist: {path}")
    stop = frozenset(stopwords)
    raw = [(doc_id, label, preprocess(text, stop, keep_set))
           for doc_id, label, text in _read_raw(path, fmt)]
    if vocabulary is None:
        vocabulary = build_vocabulary((toks for _, _, toks in raw), external_unigrams)
    docs = [Document(doc_id, vocabulary.encode(toks), label) for doc_id, label, toks in raw]
    logger.info("loaded %d documents, %d word types from %s", len(docs), len(vocabulary), path)
    return Corpus(tuple(docs), vocabulary)


def corpus_from_texts(texts, labels=None, stopwords=STOPWORDS, keep_set=None,
                      external_unigrams=None) -> Corpus:
    labels = [None] * len(texts) if labels is None else list(labels)
    toks = [preprocess(t, stopwords, keep_set) for t in texts]
    vocab = build_vocabulary(toks, external_unigrams)
    docs = [Document(str(i), vocab.encode(t), lab) for i, (t, lab) in enumerate(zip(toks, labels))]
    return Corpus(tuple(docs), vocab)
