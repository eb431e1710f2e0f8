"""Classification harness: L1 one-vs-rest logistic regression, macro metrics,
and sparse feature files."""

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class LinearClassifier:
    classes: tuple
    weights: np.ndarray  # (n_classes, n_features), in standardized units
    bias: np.ndarray
    mean: np.ndarray
    scale: np.ndarray

    def decision_function(self, X):
        Z = (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
        return Z @ self.weights.T + self.bias

    def predict(self, X):
        return [self.classes[i] for i in np.argmax(self.decision_function(X), axis=1)]


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def train_linear_classifier(features, labels, l1_penalty=1e-4, epochs=100, seed=0,
                            learning_rate=0.5, batch_size=32) -> LinearClassifier:
    """One-vs-rest logistic regression with an L1 penalty.

    Each binary problem runs mini-batch proximal gradient descent: a logistic
    loss gradient step followed by soft-thresholding, which drives weights to
    exact zeros. Features are standardized with training statistics. The
    epoch orderings come from `seed` and are shared by all classes, so equal
    inputs give bit-identical weights.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("features must be (M, F) with one label per row")
    classes = tuple(sorted(set(y.tolist())))
    if len(classes) < 2:
        raise ValueError("need at least two classes to train a classifier")

    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale
    M, F = Z.shape

    rng = np.random.default_rng(seed)
    orders = [rng.permutation(M) for _ in range(epochs)]
    W = np.zeros((len(classes), F))
    b = np.zeros(len(classes))
    for c, cls in enumerate(classes):
        target = (y == cls).astype(np.float64)
        w, bc = W[c], 0.0
        for epoch, order in enumerate(orders):
            eta = learning_rate / np.sqrt(1.0 + epoch)
            for start in range(0, M, batch_size):
                idx = order[start:start + batch_size]
                err = _sigmoid(Z[idx] @ w + bc) - target[idx]
                w = w - eta * (Z[idx].T @ err) / idx.size
                w = np.sign(w) * np.maximum(np.abs(w) - eta * l1_penalty, 0.0)
                bc -= eta * err.mean()
        W[c], b[c] = w, bc
    return LinearClassifier(classes, W, b, mean, scale)


@dataclass
class ClassificationReport:
    classes: list
    precision: dict
    recall: dict
    f1: dict
    macro_precision: float
    macro_recall: float
    macro_f1: float
    support: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class": {c: {"precision": self.precision[c], "recall": self.recall[c],
                              "f1": self.f1[c], "support": self.support.get(c, 0)}
                          for c in self.classes},
        }

    @classmethod
    def from_dict(cls, d):
        pc = d["per_class"]
        classes = list(pc)
        return cls(classes,
                   {c: pc[c]["precision"] for c in classes},
                   {c: pc[c]["recall"] for c in classes},
                   {c: pc[c]["f1"] for c in classes},
                   d["macro_precision"], d["macro_recall"], d["macro_f1"],
                   {c: pc[c]["support"] for c in classes})

    def format(self):
        lines = [f"{'class':<20} {'prec':>7} {'rec':>7} {'f1':>7} {'n':>6}"]
        for c in self.classes:
            lines.append(f"{str(c):<20} {self.precision[c]:7.4f} {self.recall[c]:7.4f} "
                         f"{self.f1[c]:7.4f} {self.support.get(c, 0):6d}")
        lines.append(f"{'macro':<20} {self.macro_precision:7.4f} {self.macro_recall:7.4f} "
                     f"{self.macro_f1:7.4f}")
        return "\n".join(lines)


def _safe_div(a, b):
    return a / b if b else 0.0


def macro_metrics(predicted, true) -> ClassificationReport:
    """Per-class precision/recall/F1 and their unweighted means.

    Averages run over the classes present in `true`; 0/0 counts as 0.
    """
    predicted, true = list(predicted), list(true)
    if len(predicted) != len(true) or not true:
        raise ValueError("predicted and true labels must be non-empty and equal length")
    classes = sorted(set(true))
    P, R, F, support = {}, {}, {}, {}
    for c in classes:
        tp = sum(1 for p, t in zip(predicted, true) if p == c and t == c)
        fp = sum(1 for p, t in zip(predicted, true) if p == c and t != c)
        fn = sum(1 for p, t in zip(predicted, true) if p != c and t == c)
        P[c] = _safe_div(tp, tp + fp)
        R[c] = _safe_div(tp, tp + fn)
        F[c] = _safe_div(2 * P[c] * R[c], P[c] + R[c])
        support[c] = tp + fn
    n = len(classes)
    return ClassificationReport(classes, P, R, F,
                                sum(P.values()) / n, sum(R.values()) / n, sum(F.values()) / n,
                                support)


def format_value(v) -> str:
    """Shortest decimal that reads back to the same float; integers bare."""
    v = float(v)
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def export_features(features, labels, path):
    """Write ``label idx:value ...`` lines with 1-based indices, zeros omitted."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != len(labels):
        raise ValueError("features must be (M, F) with one label per row")
    with open(path, "w", encoding="utf-8") as f:
        for row, label in zip(X, labels):
            label = str(label)
            if not label or any(ch.isspace() for ch in label):
                raise ValueError(f"label {label!r} must be non-empty without whitespace")
            nz = np.flatnonzero(row)
            f.write(" ".join([label] + [f"{i + 1}:{format_value(row[i])}" for i in nz]) + "\n")


def load_features(path, n_features=None):
    """Inverse of :func:`export_features`. Returns ``(X, labels)``."""
    labels, rows = [], []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            labels.append(parts[0])
            entries = []
            for item in parts[1:]:
                idx, sep, val = item.partition(":")
                if not sep:
                    raise ValueError(f"{path}:{lineno}: bad entry {item!r}")
                entries.append((int(idx) - 1, float(val)))
            rows.append(entries)
    width = max((i + 1 for r in rows for i, _ in r), default=0)
    if n_features is None:
        n_features = width
    elif width > n_features:
        raise ValueError(f"{path}: index {width} exceeds n_features={n_features}")
    X = np.zeros((len(rows), n_features))
    for r, entries in enumerate(rows):
        for i, v in entries:
            X[r, i] = v
    return X, labels


def save_report(report, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2)
        f.write("\n")


def load_report(path) -> ClassificationReport:
    with open(path, encoding="utf-8") as f:
        return ClassificationReport.from_dict(json.load(f))
