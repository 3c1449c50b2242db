"""One-vs-rest logistic argument-type classifier.

Four binary logistic regressions, one per argument type, trained by
full-batch gradient descent on the L2-regularized mean negative
log-likelihood. Step halving on any objective increase keeps the recorded
objective sequence non-increasing, which makes training deterministic and
easy to verify.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.special import expit

from .corpus import ARGUMENT_TYPES, ArgumentType, Corpus, QueryGroup
from .features import FeatureVector

__all__ = [
    "TrainConfig",
    "LogLinearModel",
    "train_type_classifier",
    "predict_proba",
    "predict_type",
    "annotate_corpus_types",
    "save_model",
    "load_model",
]

MODEL_FORMAT = "argsupport-typeclf-v1"


@dataclass(frozen=True)
class TrainConfig:
    l2: float = 1e-3
    learning_rate: float = 0.1
    max_epochs: int = 2000
    tolerance: float = 1e-7
    standardize: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")


@dataclass
class LogLinearModel:
    """Per-type weight vectors over a shared feature index.

    ``means``/``stds`` hold the training z-score statistics when
    standardization was on, else None. ``objectives`` keeps the accepted
    objective value per epoch for each type, for monotonicity checks.
    """

    feature_names: list[str]
    weights: dict[ArgumentType, np.ndarray]
    biases: dict[ArgumentType, float]
    means: Optional[np.ndarray]
    stds: Optional[np.ndarray]
    config: TrainConfig
    epochs_run: dict[ArgumentType, int] = field(default_factory=dict)
    objectives: dict[ArgumentType, list[float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._index = {name: i for i, name in enumerate(self.feature_names)}
        self._effective: dict[ArgumentType, tuple[dict[str, float], float]] = {}
        for t in self.weights:
            self._effective[t] = self._effective_form(t)

    def _effective_form(self, t: ArgumentType) -> tuple[dict[str, float], float]:
        # Fold the scaling into the weights so prediction is a sparse dot:
        # w.(x - mu)/sigma + b  ==  (w/sigma).x + (b - w.mu/sigma)
        w = self.weights[t]
        b = self.biases[t]
        if self.means is not None and self.stds is not None:
            scaled = w / self.stds
            b = b - float(scaled @ self.means)
            w = scaled
        return {name: float(w[i]) for name, i in self._index.items() if w[i] != 0.0}, float(b)

    def decision_value(self, t: ArgumentType, fv: Mapping[str, float]) -> float:
        w, b = self._effective[t]
        return b + sum(w.get(name, 0.0) * value for name, value in sorted(fv.items()))


def _objective(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float) -> float:
    z = X @ w + b
    # mean softplus(z) - y*z is the logistic NLL, stable for large |z|
    nll = float(np.mean(np.logaddexp(0.0, z) - y * z))
    return nll + 0.5 * l2 * float(w @ w)


def _gradient(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float,
              l2: float) -> tuple[np.ndarray, float]:
    residual = expit(X @ w + b) - y
    gw = X.T @ residual / X.shape[0] + l2 * w
    gb = float(np.mean(residual))
    return gw, gb


def _fit_binary(X: np.ndarray, y: np.ndarray,
                config: TrainConfig) -> tuple[np.ndarray, float, int, list[float]]:
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    eta = config.learning_rate
    current = _objective(X, y, w, b, config.l2)
    history = [current]
    epochs = 0
    for _ in range(config.max_epochs):
        gw, gb = _gradient(X, y, w, b, config.l2)
        accepted = False
        for _ in range(60):
            w_new = w - eta * gw
            b_new = b - eta * gb
            candidate = _objective(X, y, w_new, b_new, config.l2)
            if candidate <= current:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break
        w, b = w_new, b_new
        epochs += 1
        history.append(candidate)
        if current - candidate < config.tolerance:
            current = candidate
            break
        current = candidate
    return w, b, epochs, history


def _densify(instances: Sequence[Mapping[str, float]],
             index: Mapping[str, int]) -> np.ndarray:
    X = np.zeros((len(instances), len(index)))
    for i, fv in enumerate(instances):
        for name, value in fv.items():
            if not math.isfinite(value):
                raise ValueError(f"non-finite value for feature {name!r}")
            j = index.get(name)
            if j is not None:
                X[i, j] = value
    return X


def train_type_classifier(
    instances: Sequence[tuple[FeatureVector, ArgumentType]],
    config: TrainConfig = TrainConfig(),
) -> LogLinearModel:
    """Fit the four type-vs-rest models on gold-typed instances.

    Requires at least two distinct types. Types missing from the data still
    get a model (trained against all-negative labels), so prediction stays
    total over the four types.
    """
    if not instances:
        raise ValueError("no training instances")
    present = {t for _, t in instances}
    if len(present) < 2:
        raise ValueError(
            f"single-class input: every instance is {next(iter(present)).value!r}"
        )
    names = sorted({name for fv, _ in instances for name in fv})
    index = {name: i for i, name in enumerate(names)}
    X = _densify([fv for fv, _ in instances], index)

    means = stds = None
    if config.standardize and names:
        means = X.mean(axis=0)
        stds = X.std(axis=0)
        stds = np.where(stds == 0.0, 1.0, stds)
        X = (X - means) / stds

    weights: dict[ArgumentType, np.ndarray] = {}
    biases: dict[ArgumentType, float] = {}
    epochs_run: dict[ArgumentType, int] = {}
    objectives: dict[ArgumentType, list[float]] = {}
    for t in ARGUMENT_TYPES:
        y = np.array([1.0 if label is t else 0.0 for _, label in instances])
        w, b, epochs, history = _fit_binary(X, y, config)
        weights[t] = w
        biases[t] = b
        epochs_run[t] = epochs
        objectives[t] = history
    return LogLinearModel(
        feature_names=names,
        weights=weights,
        biases=biases,
        means=means,
        stds=stds,
        config=config,
        epochs_run=epochs_run,
        objectives=objectives,
    )


def predict_proba(model: LogLinearModel, fv: Mapping[str, float]) -> dict[ArgumentType, float]:
    """Per-type sigmoid scores; one-vs-rest, so they need not sum to 1.

    Feature names the model never saw are ignored.
    """
    return {
        t: float(expit(model.decision_value(t, fv))) for t in ARGUMENT_TYPES
    }


def predict_type(model: LogLinearModel, fv: Mapping[str, float]) -> ArgumentType:
    """Argmax type, ties broken by the canonical type order."""
    probs = predict_proba(model, fv)
    best = ARGUMENT_TYPES[0]
    for t in ARGUMENT_TYPES[1:]:
        if probs[t] > probs[best]:
            best = t
    return best


def annotate_corpus_types(
    corpus: Corpus,
    model: LogLinearModel,
    featurize,
    policy: str = "predicted",
) -> Corpus:
    """Return a copy of the corpus with predicted_type set on every sentence.

    ``featurize(group, sentence) -> FeatureVector`` supplies classifier
    features. Policy "predicted" uses the model everywhere; "gold" keeps
    gold annotations where they exist and predicts elsewhere.
    """
    if policy not in ("predicted", "gold"):
        raise ValueError(f"unknown annotation policy {policy!r}")
    new_groups = []
    for group in corpus.groups:
        new_sentences = []
        for sentence in group.sentences:
            if policy == "gold" and sentence.gold_type is not None:
                assigned = sentence.gold_type
            else:
                assigned = predict_type(model, featurize(group, sentence))
            new_sentences.append(sentence.with_predicted_type(assigned))
        new_groups.append(
            QueryGroup(claim=group.claim, article_id=group.article_id,
                       sentences=tuple(new_sentences))
        )
    return Corpus(groups=tuple(new_groups))


# --------------------------------------------------------------------------
# Model persistence
# --------------------------------------------------------------------------


def save_model(model: LogLinearModel, path: str | Path,
               extra: Optional[dict] = None) -> None:
    record = {
        "format": MODEL_FORMAT,
        "feature_names": model.feature_names,
        "types": {
            t.value: {
                "weights": {
                    name: float(model.weights[t][i])
                    for i, name in enumerate(model.feature_names)
                    if model.weights[t][i] != 0.0
                },
                "bias": model.biases[t],
                "epochs": model.epochs_run.get(t, 0),
            }
            for t in ARGUMENT_TYPES
        },
        "scaling": (
            None
            if model.means is None
            else {"means": model.means.tolist(), "stds": model.stds.tolist()}
        ),
        "config": {
            "l2": model.config.l2,
            "learning_rate": model.config.learning_rate,
            "max_epochs": model.config.max_epochs,
            "tolerance": model.config.tolerance,
            "standardize": model.config.standardize,
            "seed": model.config.seed,
        },
    }
    if extra:
        record.update(extra)
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> LogLinearModel:
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    if record.get("format") != MODEL_FORMAT:
        raise ValueError(f"unexpected model format {record.get('format')!r}")
    names = list(record["feature_names"])
    index = {name: i for i, name in enumerate(names)}
    weights: dict[ArgumentType, np.ndarray] = {}
    biases: dict[ArgumentType, float] = {}
    epochs: dict[ArgumentType, int] = {}
    for t in ARGUMENT_TYPES:
        entry = record["types"][t.value]
        w = np.zeros(len(names))
        for name, value in entry["weights"].items():
            w[index[name]] = value
        weights[t] = w
        biases[t] = float(entry["bias"])
        epochs[t] = int(entry.get("epochs", 0))
    scaling = record.get("scaling")
    means = stds = None
    if scaling is not None:
        means = np.asarray(scaling["means"], dtype=np.float64)
        stds = np.asarray(scaling["stds"], dtype=np.float64)
    cfg = record["config"]
    config = TrainConfig(
        l2=cfg["l2"],
        learning_rate=cfg["learning_rate"],
        max_epochs=cfg["max_epochs"],
        tolerance=cfg["tolerance"],
        standardize=cfg["standardize"],
        seed=cfg["seed"],
    )
    return LogLinearModel(
        feature_names=names,
        weights=weights,
        biases=biases,
        means=means,
        stds=stds,
        config=config,
        epochs_run=epochs,
    )
