"""Run configuration: defaults < config file < environment < command line."""

import os
from dataclasses import dataclass, fields, replace
from typing import Optional

from .model import Hyperparams

ENV_PREFIX = "TOPICEMBED_"

REPRESENTATIONS = ("topicvec", "meanwv", "tv+meanwv", "bow")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    # model
    K: int = 15
    alpha: float = 0.1
    gamma: float = 7.0
    lambda0: float = 0.1
    L0: int = 500
    gem_iters: int = 100
    e_tol: float = 1e-4
    e_max: int = 100
    seed: int = 0
    per_category: str = "auto"  # auto | on | off
    # paths
    corpus: Optional[str] = None
    test_corpus: Optional[str] = None
    corpus_format: str = "auto"
    embeddings: Optional[str] = None
    stopwords: Optional[str] = None
    unigrams: Optional[str] = None
    checkpoint: Optional[str] = None
    output_dir: str = "."
    # features / topics / eval
    representation: str = "topicvec"
    estimator: str = "dirichlet_mean"
    top_n_topics: int = 6
    top_n_words: int = 10
    l1_penalty: float = 1e-4
    epochs: int = 100

    def hyperparams(self) -> Hyperparams:
        return Hyperparams(K=self.K, alpha=self.alpha, gamma=self.gamma, lambda0=self.lambda0,
                           L0=self.L0, gem_iters=self.gem_iters, e_tol=self.e_tol,
                           e_max=self.e_max)

    def sharing(self) -> Optional[bool]:
        return {"auto": None, "on": True, "off": False}[self.per_category]

    def validate(self):
        try:
            self.hyperparams()
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.per_category not in ("auto", "on", "off"):
            raise ConfigError("per_category must be auto, on or off")
        if self.representation not in REPRESENTATIONS:
            raise ConfigError(f"unknown representation {self.representation!r}; "
                              f"expected one of {REPRESENTATIONS}")
        if self.estimator not in ("dirichlet_mean", "pi_mean"):
            raise ConfigError(f"unknown estimator {self.estimator!r}")
        if self.top_n_topics < 1 or self.top_n_words < 0 or self.epochs < 1 or self.l1_penalty < 0:
            raise ConfigError("top_n_topics >= 1, top_n_words >= 0, epochs >= 1, l1_penalty >= 0")
        return self

    def require_files(self, *names):
        for name in names:
            path = getattr(self, name)
            if not path:
                raise ConfigError(f"{name} path is not set")
            if not os.path.exists(path):
                raise ConfigError(f"{name} path does not exist: {path}")


FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, value):
    if key not in FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    if value is None:
        return None
    typ = FIELD_TYPES[key]
    try:
        if typ in (int, "int"):
            return int(value)
        if typ in (float, "float"):
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r}") from None
    return str(value)


def parse_config_text(text, source="<config>") -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key = key.strip().replace("-", "_")
        values[key] = _coerce(key, value.strip())
    return values


def env_overrides(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    for name in FIELD_TYPES:
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            out[name] = _coerce(name, raw)
    return out


def load_config(path=None, overrides=None, environ=None) -> RunConfig:
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                values.update(parse_config_text(f.read(), path))
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}") from None
    values.update(env_overrides(environ))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = _coerce(k, v)
    return replace(RunConfig(), **values).validate()
