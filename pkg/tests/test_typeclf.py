import math

import numpy as np
import pytest

from argsupport.corpus import ARGUMENT_TYPES, ArgumentType
from argsupport.typeclf import (
    LogLinearModel,
    TrainConfig,
    _gradient,
    _objective,
    annotate_corpus_types,
    load_model,
    predict_proba,
    predict_type,
    save_model,
    train_type_classifier,
)

from conftest import make_corpus, make_group, sent


def separable_instances(n_per_class=10):
    """Two-type toy set split cleanly by one feature's sign."""
    instances = []
    for i in range(n_per_class):
        instances.append(
            ({"f:sig": 1.0 + 0.05 * i, "f:noise": 0.3}, ArgumentType.STUDY)
        )
        instances.append(
            ({"f:sig": -1.0 - 0.05 * i, "f:noise": 0.3}, ArgumentType.FACTUAL)
        )
    return instances


class TestGradient:
    def test_matches_central_finite_differences(self):
        rng = np.random.default_rng(12)
        h = 1e-6
        for _ in range(20):
            n, d = 10, 5
            X = rng.standard_normal((n, d))
            y = rng.integers(0, 2, n).astype(float)
            w = rng.standard_normal(d) * 0.5
            b = float(rng.standard_normal())
            l2 = float(rng.uniform(0, 0.2))
            gw, gb = _gradient(X, y, w, b, l2)
            numeric = np.empty(d)
            for j in range(d):
                bump = np.zeros(d)
                bump[j] = h
                numeric[j] = (
                    _objective(X, y, w + bump, b, l2)
                    - _objective(X, y, w - bump, b, l2)
                ) / (2 * h)
            numeric_b = (
                _objective(X, y, w, b + h, l2) - _objective(X, y, w, b - h, l2)
            ) / (2 * h)
            rel = np.linalg.norm(gw - numeric) / max(np.linalg.norm(numeric), 1e-12)
            assert rel <= 1e-5
            assert abs(gb - numeric_b) / max(abs(numeric_b), 1e-12) <= 1e-5


class TestTraining:
    def test_separable_training_accuracy(self):
        instances = separable_instances()
        model = train_type_classifier(instances, TrainConfig())
        predictions = [predict_type(model, fv) for fv, _ in instances]
        gold = [label for _, label in instances]
        assert predictions == gold

    def test_objective_non_increasing(self):
        model = train_type_classifier(separable_instances(), TrainConfig())
        for history in model.objectives.values():
            assert all(b <= a + 1e-15 for a, b in zip(history, history[1:]))

    def test_huge_regularization_shrinks_weights(self):
        model = train_type_classifier(
            separable_instances(), TrainConfig(l2=1e6, max_epochs=500)
        )
        for w in model.weights.values():
            assert np.all(np.abs(w) < 1e-3)

    def test_single_class_rejected(self):
        instances = [({"f:x": 1.0}, ArgumentType.STUDY) for _ in range(5)]
        with pytest.raises(ValueError, match="single-class"):
            train_type_classifier(instances)

    def test_non_finite_feature_rejected(self):
        instances = [
            ({"f:x": float("nan")}, ArgumentType.STUDY),
            ({"f:x": 1.0}, ArgumentType.FACTUAL),
        ]
        with pytest.raises(ValueError, match="non-finite"):
            train_type_classifier(instances)

    def test_scaling_choice_keeps_separable_predictions(self):
        instances = separable_instances()
        scaled = train_type_classifier(instances, TrainConfig(standardize=True))
        unscaled = train_type_classifier(instances, TrainConfig(standardize=False))
        for fv, _ in instances:
            assert predict_type(scaled, fv) is predict_type(unscaled, fv)

    def test_deterministic(self):
        a = train_type_classifier(separable_instances(), TrainConfig())
        b = train_type_classifier(separable_instances(), TrainConfig())
        for t in a.weights:
            np.testing.assert_array_equal(a.weights[t], b.weights[t])
            assert a.biases[t] == b.biases[t]


def zero_model(feature_names=("f:x",)) -> LogLinearModel:
    names = list(feature_names)
    return LogLinearModel(
        feature_names=names,
        weights={t: np.zeros(len(names)) for t in ARGUMENT_TYPES},
        biases={t: 0.0 for t in ARGUMENT_TYPES},
        means=None,
        stds=None,
        config=TrainConfig(),
    )


class TestPrediction:
    def test_zero_model_gives_half(self):
        probs = predict_proba(zero_model(), {"f:x": 3.0})
        assert all(p == 0.5 for p in probs.values())

    def test_unseen_features_ignored(self):
        model = zero_model()
        assert predict_proba(model, {"brand:new": 9.0}) == predict_proba(model, {})

    def test_single_feature_log_odds(self):
        model = zero_model()
        model.weights[ArgumentType.OPINION] = np.array([math.log(3)])
        model.__post_init__()  # rebuild the cached effective weights
        probs = predict_proba(model, {"f:x": 1.0})
        assert probs[ArgumentType.OPINION] == pytest.approx(0.75, abs=1e-12)

    def test_tie_break_canonical_order(self):
        assert predict_type(zero_model(), {}) is ArgumentType.STUDY

    def test_argmax(self):
        model = zero_model()
        model.biases[ArgumentType.FACTUAL] = 2.0
        model.__post_init__()
        assert predict_type(model, {}) is ArgumentType.FACTUAL


class TestAnnotation:
    def _corpus(self):
        sentences = [
            sent(i, ["w", f"x{i}"], relevance=1 if i < 2 else 0,
                 gold_type=ArgumentType.OPINION if i < 2 else None)
            for i in range(10)
        ]
        return make_corpus(make_group(sentences))

    def test_predicted_everywhere(self):
        corpus = self._corpus()
        annotated = annotate_corpus_types(
            corpus, zero_model(), lambda g, s: {}, policy="predicted"
        )
        types = [s.predicted_type for _, s in annotated.sentences()]
        assert all(t is ArgumentType.STUDY for t in types)
        # original untouched
        assert all(s.predicted_type is None for _, s in corpus.sentences())

    def test_gold_when_available(self):
        annotated = annotate_corpus_types(
            self._corpus(), zero_model(), lambda g, s: {}, policy="gold"
        )
        types = [s.predicted_type for _, s in annotated.sentences()]
        assert types[:2] == [ArgumentType.OPINION, ArgumentType.OPINION]
        assert all(t is ArgumentType.STUDY for t in types[2:])

    def test_idempotent(self):
        corpus = self._corpus()
        once = annotate_corpus_types(corpus, zero_model(), lambda g, s: {})
        twice = annotate_corpus_types(once, zero_model(), lambda g, s: {})
        assert once == twice

    def test_unknown_policy(self):
        with pytest.raises(ValueError, match="policy"):
            annotate_corpus_types(self._corpus(), zero_model(), lambda g, s: {},
                                  policy="oracle")


class TestPersistence:
    def test_round_trip_predictions(self, tmp_path):
        model = train_type_classifier(separable_instances(), TrainConfig())
        path = tmp_path / "typeclf.json"
        save_model(model, path)
        loaded = load_model(path)
        for fv, _ in separable_instances():
            assert predict_proba(loaded, fv) == predict_proba(model, fv)

    def test_format_tag_checked(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "something-else"}', encoding="utf-8")
        with pytest.raises(ValueError, match="format"):
            load_model(path)
