"""Model checkpoints as self-describing JSON.

Floats are written in shortest round-trip form, so a load reproduces the
saved arrays bit for bit and equal models give byte-identical files.
"""

import json

import numpy as np

from .model import Hyperparams, ModelState, TopicSet

FORMAT = "topicembed-checkpoint"
VERSION = 1


class VocabularyMismatchError(ValueError):
    pass


def _floats(a):
    return [float(x) for x in np.asarray(a, dtype=np.float64).ravel()]


def checkpoint_dict(state: ModelState, vocab_hash: str) -> dict:
    h = state.hyper
    sets = list(state.topic_sets.values())
    N, K = sets[0].T.shape if sets else (0, h.K)
    return {
        "format": FORMAT,
        "version": VERSION,
        "N": N,
        "K": K,
        "vocab_hash": vocab_hash,
        "alpha": _floats(h.alpha),
        "gamma": float(h.gamma),
        "hyper": {"lambda0": float(h.lambda0), "L0": int(h.L0), "gem_iters": int(h.gem_iters),
                  "e_tol": float(h.e_tol), "e_max": int(h.e_max)},
        "topic_sets": [{"owner": name, "T": _floats(ts.T), "r": _floats(ts.r)}
                       for name, ts in state.topic_sets.items()],
        "elbo_trace": [float(x) for x in state.elbo_trace],
    }


def save_checkpoint(state: ModelState, path, vocab_hash: str):
    """Write `state` to `path`; topic matrices are stored row-major."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(checkpoint_dict(state, vocab_hash), f, sort_keys=True)
        f.write("\n")


def load_checkpoint(path, vocabulary=None):
    """Read a checkpoint, verifying the vocabulary hash when one is given.

    Returns ``(state, vocab_hash)``.
    """
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if data.get("format") != FORMAT:
        raise ValueError(f"{path}: not a {FORMAT} file")
    if data.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {data.get('version')}")
    if vocabulary is not None and vocabulary.content_hash() != data["vocab_hash"]:
        raise VocabularyMismatchError(
            f"{path}: checkpoint was trained against a different vocabulary")
    N, K = data["N"], data["K"]
    hp = data["hyper"]
    hyper = Hyperparams(K=K, alpha=np.array(data["alpha"]), gamma=data["gamma"],
                        lambda0=hp["lambda0"], L0=hp["L0"], gem_iters=hp["gem_iters"],
                        e_tol=hp["e_tol"], e_max=hp["e_max"])
    sets = {}
    for entry in data["topic_sets"]:
        T = np.array(entry["T"], dtype=np.float64).reshape(N, K)
        sets[entry["owner"]] = TopicSet(T, np.array(entry["r"], dtype=np.float64), entry["owner"])
    return ModelState(sets, hyper, list(data.get("elbo_trace", []))), data["vocab_hash"]
