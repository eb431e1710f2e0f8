"""Command line interface: train, features, topics, eval, synth.

Exit status is 0 on success, 1 for invalid configuration and 2 for errors
raised while running.
"""

import argparse
import contextlib
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import corpus as corpus_mod
from .checkpoint import load_checkpoint, save_checkpoint
from .config import FIELD_TYPES, ConfigError, RunConfig, load_config
from .embeddings import align, load_embeddings, save_embeddings
from .evaluation import (export_features, load_features, macro_metrics, save_report,
                         train_linear_classifier)
from .generator import SyntheticSpec, generate_labeled_corpus, generate_synthetic_corpus
from .model import ModelState, gem_fit, infer_new_document, partition_corpus
from .relevance import build_topic_cloud
from .representation import (combined_features, doc_topic_proportions, mean_word_vector,
                             merge_topic_sets)

logger = logging.getLogger("topicembed")


class StageError(RuntimeError):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


@contextlib.contextmanager
def stage(name):
    try:
        yield
    except (ConfigError, StageError):
        raise
    except Exception as e:
        raise StageError(name, e) from e


def _out(cfg, name):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, name)


def _checkpoint_path(cfg):
    return cfg.checkpoint or _out(cfg, "checkpoint.json")


def _load_training_data(cfg):
    """Embeddings, training corpus and aligned embedding matrix."""
    with stage("embeddings"):
        words, V_raw = load_embeddings(cfg.embeddings)
    with stage("corpus"):
        stop = corpus_mod.load_stopwords(cfg.stopwords) if cfg.stopwords else corpus_mod.STOPWORDS
        unigrams = corpus_mod.load_unigrams(cfg.unigrams) if cfg.unigrams else None
        train = corpus_mod.load_corpus(cfg.corpus, cfg.corpus_format, stop, set(words), unigrams)
    with stage("embeddings"):
        E = align(train.vocabulary, words, V_raw)
    return words, V_raw, stop, train, E


def cmd_train(cfg: RunConfig):
    cfg.require_files("corpus", "embeddings")
    _, _, _, train, E = _load_training_data(cfg)
    hyper = cfg.hyperparams()
    with stage("topic_model"):
        parts = partition_corpus(train, cfg.sharing())
        state = gem_fit(parts, E.V, train.vocabulary.unigram_probs, hyper, seed=cfg.seed)
    ckpt = _checkpoint_path(cfg)
    with stage("checkpoint"):
        save_checkpoint(state, ckpt, train.vocabulary.content_hash())
        trace_path = _out(cfg, "elbo_trace.txt")
        with open(trace_path, "w", encoding="utf-8") as f:
            f.writelines(repr(float(x)) + "\n" for x in state.elbo_trace)
    print(f"wrote {ckpt} ({len(state.topic_sets)} topic sets) and {trace_path}")
    return state


def _represent(cfg, docs, space, E, W):
    ts, rows = space.topic_set(), []
    hyper = replace(cfg, K=space.K_total).hyperparams() if cfg.representation != "bow" else None
    for doc in docs:
        if cfg.representation == "bow":
            rows.append(np.bincount(doc.tokens, minlength=W).astype(np.float64))
            continue
        props = None
        if cfg.representation in ("topicvec", "tv+meanwv"):
            st = infer_new_document(doc, ts, E.V, hyper, alpha=space.alpha)
            props = doc_topic_proportions(st, cfg.estimator)
        if cfg.representation == "topicvec":
            rows.append(props)
        elif cfg.representation == "meanwv":
            rows.append(mean_word_vector(doc, E.V))
        else:
            rows.append(combined_features(props, mean_word_vector(doc, E.V)))
    width = {"bow": W, "topicvec": space.K_total, "meanwv": E.dim,
             "tv+meanwv": space.K_total + E.dim}[cfg.representation]
    return np.array(rows).reshape(len(rows), width)


def cmd_features(cfg: RunConfig, split="train"):
    if split not in ("train", "test"):
        raise ConfigError(f"split must be train or test, got {split!r}")
    needed = ["corpus", "embeddings"] + (["test_corpus"] if split == "test" else [])
    cfg.require_files(*needed)
    ckpt = _checkpoint_path(cfg)
    if not os.path.exists(ckpt):
        raise ConfigError(f"checkpoint does not exist: {ckpt}")
    words, V_raw, stop, train, E = _load_training_data(cfg)
    with stage("checkpoint"):
        state, _ = load_checkpoint(ckpt, train.vocabulary)
    docs = train
    if split == "test":
        with stage("corpus"):
            docs = corpus_mod.load_corpus(cfg.test_corpus, cfg.corpus_format, stop,
                                          set(words), vocabulary=train.vocabulary)
    with stage("representation"):
        space = merge_topic_sets(state, E.V, train.vocabulary.unigram_probs)
        X = _represent(cfg, list(docs), space, E, len(train.vocabulary))
    labels = [d.label if d.label is not None else "_" for d in docs]
    path = _out(cfg, f"features_{split}.txt")
    with stage("eval"):
        export_features(X, labels, path)
        with open(path + ".json", "w", encoding="utf-8") as f:
            json.dump({"dim": X.shape[1], "representation": cfg.representation,
                       "n_docs": X.shape[0]}, f, sort_keys=True)
            f.write("\n")
    print(f"wrote {path}: {X.shape[0]} documents x {X.shape[1]} features")
    return path


def cmd_topics(cfg: RunConfig, doc_path, single_doc=None):
    cfg.require_files("embeddings")
    if not doc_path or not os.path.exists(doc_path):
        raise ConfigError(f"document path does not exist: {doc_path}")
    if single_doc is None:
        single_doc = not (cfg.checkpoint and os.path.exists(cfg.checkpoint))
    with stage("embeddings"):
        words, V_raw = load_embeddings(cfg.embeddings)
    with stage("corpus"):
        stop = corpus_mod.load_stopwords(cfg.stopwords) if cfg.stopwords else corpus_mod.STOPWORDS
        with open(doc_path, encoding="utf-8", errors="replace") as f:
            tokens = corpus_mod.preprocess(f.read(), stop, set(words))
        if not tokens:
            raise ValueError(f"{doc_path}: document is empty after preprocessing")

    if single_doc:
        with stage("corpus"):
            unigrams = corpus_mod.load_unigrams(cfg.unigrams) if cfg.unigrams else None
            vocab = corpus_mod.build_vocabulary([tokens], unigrams)
            doc = corpus_mod.Document(os.path.basename(doc_path), vocab.encode(tokens))
        with stage("embeddings"):
            E = align(vocab, words, V_raw)
        with stage("topic_model"):
            state = gem_fit({"global": [doc]}, E.V, vocab.unigram_probs, cfg.hyperparams(),
                            seed=cfg.seed)
        ts, var = state.topic_sets["global"], state.doc_states["global"][0]
    else:
        cfg.require_files("corpus")
        with stage("corpus"):
            unigrams = corpus_mod.load_unigrams(cfg.unigrams) if cfg.unigrams else None
            train = corpus_mod.load_corpus(cfg.corpus, cfg.corpus_format, stop, set(words), unigrams)
            vocab = train.vocabulary
            doc = corpus_mod.Document(os.path.basename(doc_path), vocab.encode(tokens))
            if len(doc) == 0:
                raise ValueError(f"{doc_path}: no words from the training vocabulary")
        with stage("embeddings"):
            E = align(vocab, words, V_raw)
        with stage("checkpoint"):
            state, _ = load_checkpoint(cfg.checkpoint, vocab)
        with stage("representation"):
            space = merge_topic_sets(state, E.V, vocab.unigram_probs)
            ts = space.topic_set()
            var = infer_new_document(doc, ts, E.V, replace(cfg, K=space.K_total).hyperparams(),
                                     alpha=space.alpha)
    with stage("relevance"):
        cloud = build_topic_cloud(doc, var, E.V, ts, cfg.top_n_topics, cfg.top_n_words,
                                  words=vocab.words)
        path = _out(cfg, "topic_cloud.json")
        cloud.save(path)
    for t in cloud.topics:
        print(f"topic {t.topic_id:3d} {100 * t.proportion:5.1f}%  "
              + " ".join(w for w, _ in t.words))
    return cloud


def _feature_dim(path):
    meta = path + ".json"
    if os.path.exists(meta):
        with open(meta, encoding="utf-8") as f:
            return json.load(f)["dim"]
    return None


def cmd_eval(cfg: RunConfig, train_path, test_path):
    for p in (train_path, test_path):
        if not p or not os.path.exists(p):
            raise ConfigError(f"feature file does not exist: {p}")
    d_train, d_test = _feature_dim(train_path), _feature_dim(test_path)
    with stage("eval"):
        Xtr, ytr = load_features(train_path, d_train)
        Xte, yte = load_features(test_path, d_test)
        if d_train is None or d_test is None:
            width = max(Xtr.shape[1], Xte.shape[1])
            Xtr = np.pad(Xtr, ((0, 0), (0, width - Xtr.shape[1])))
            Xte = np.pad(Xte, ((0, 0), (0, width - Xte.shape[1])))
        if Xtr.shape[1] != Xte.shape[1]:
            raise ValueError(f"feature dimension mismatch: train {Xtr.shape[1]}, "
                             f"test {Xte.shape[1]}")
        clf = train_linear_classifier(Xtr, ytr, cfg.l1_penalty, cfg.epochs, cfg.seed)
        report = macro_metrics(clf.predict(Xte), yte)
        path = _out(cfg, "report.json")
        save_report(report, path)
    print(report.format())
    return report


def cmd_synth(cfg: RunConfig, N=10, W=50, M=200, doc_length=100, classes=1, test_docs=0):
    spec = SyntheticSpec(K=cfg.K, N=N, W=W, M=M + test_docs, doc_length=doc_length,
                         alpha=cfg.alpha, gamma=cfg.gamma, seed=cfg.seed)
    with stage("generator"):
        if classes > 1:
            corpus, planted, _, V = generate_labeled_corpus(spec, classes)
        else:
            corpus, ts, _, V = generate_synthetic_corpus(spec, label="c0")
            planted = {"c0": ts}
    words = corpus.vocabulary.words
    docs = list(corpus)
    per_class = {}
    for d in docs:
        per_class.setdefault(d.label, []).append(d)
    train, test = [], []
    for group in per_class.values():
        train.extend(group[:M])
        test.extend(group[M:])

    def write(path, subset):
        with open(path, "w", encoding="utf-8") as f:
            for d in subset:
                f.write(d.label + "\t" + " ".join(words[i] for i in d.tokens) + "\n")

    write(_out(cfg, "train.txt"), train)
    if test:
        write(_out(cfg, "test.txt"), test)
    save_embeddings(_out(cfg, "embeddings.txt"), words, V)
    with open(_out(cfg, "unigrams.txt"), "w", encoding="utf-8") as f:
        for w, p in zip(words, corpus.vocabulary.unigram_probs):
            f.write(f"{w} {float(p)!r}\n")
    planted_state = ModelState(planted, replace(cfg, K=spec.K).hyperparams())
    save_checkpoint(planted_state, _out(cfg, "planted.json"), corpus.vocabulary.content_hash())
    print(f"wrote synthetic corpus ({len(train)} train, {len(test)} test documents) "
          f"to {cfg.output_dir}")


def build_parser():
    p = argparse.ArgumentParser(prog="topicembed",
                                description="Topic embeddings learned over fixed word embeddings.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", help="flat 'key = value' config file")
        for name, typ in FIELD_TYPES.items():
            kind = typ if typ in (int, float) else str
            flag = "--" + name
            alias = "--" + name.replace("_", "-")
            names = [flag] if alias == flag else [flag, alias]
            sp.add_argument(*names, dest=name, type=kind, default=None)
        return sp

    with_config(sub.add_parser("train", help="fit topic embeddings and write a checkpoint"))
    sp = with_config(sub.add_parser("features", help="write document features"))
    sp.add_argument("--split", choices=("train", "test"), default="train")
    sp = with_config(sub.add_parser("topics", help="export a topic cloud for one document"))
    sp.add_argument("--doc", required=True)
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--single-doc", dest="single_doc", action="store_true", default=None)
    mode.add_argument("--use-checkpoint", dest="single_doc", action="store_false")
    sp = with_config(sub.add_parser("eval", help="classify with train/test feature files"))
    sp.add_argument("--train-features", required=True)
    sp.add_argument("--test-features", required=True)
    sp = with_config(sub.add_parser("synth", help="sample a synthetic corpus"))
    sp.add_argument("--N", type=int, default=10)
    sp.add_argument("--W", type=int, default=50)
    sp.add_argument("--M", type=int, default=200, help="training documents per class")
    sp.add_argument("--doc-length", type=int, default=100)
    sp.add_argument("--classes", type=int, default=1)
    sp.add_argument("--test-docs", type=int, default=0, help="test documents per class")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in FIELD_TYPES}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "train":
            cmd_train(cfg)
        elif args.command == "features":
            cmd_features(cfg, args.split)
        elif args.command == "topics":
            cmd_topics(cfg, args.doc, args.single_doc)
        elif args.command == "eval":
            cmd_eval(cfg, args.train_features, args.test_features)
        elif args.command == "synth":
            cmd_synth(cfg, args.N, args.W, args.M, args.doc_length, args.classes, args.test_docs)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
