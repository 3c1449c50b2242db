"""Acceptance suite: one test per release criterion.

Run with ``pytest -v -s tests/test_acceptance.py`` to see one line per
criterion. Every tolerance is pinned here; a red test means the criterion
is not met.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from argsupport.cli import run_command
from argsupport.corpus import ARGUMENT_TYPES, ArgumentType, save_corpus
from argsupport.experiment import cross_validate, evaluate_type_protocol
from argsupport.features import (
    FeatureConfig,
    IdfTable,
    bleu,
    compose_with_type,
    embedding_cosine,
    rouge_l,
    tfidf_cosine,
)
from argsupport.lexicons import EmbeddingTable, load_resource_bundle
from argsupport.metrics import bonferroni, cohen_kappa, mrr, ndcg, welch_t_test
from argsupport.ranker import (
    RankerConfig,
    RankInstance,
    ensemble_to_record,
    lambda_gradients,
    train_lambdamart,
)
from argsupport.synth import SynthConfig, generate_corpus, write_resources
from argsupport.typeclf import TrainConfig, _gradient, _objective, train_type_classifier


def report(number: int, title: str) -> None:
    print(f"ACCEPTANCE {number:02d} PASS - {title}")


@pytest.fixture(scope="module")
def synth_world(tmp_path_factory):
    config = SynthConfig()  # 25 debates x 4 claims x 20 sentences = 100 claims
    corpus = generate_corpus(config)
    directory = tmp_path_factory.mktemp("acceptance-resources")
    bundle = load_resource_bundle(write_resources(directory, config))
    return corpus, bundle


# -------------------------------------------------------------------------
# 1. Metric oracle equivalence
# -------------------------------------------------------------------------


def test_01_metric_oracle_equivalence():
    start = time.perf_counter()

    def oracle_rr(labels):
        for position, label in enumerate(labels, start=1):
            if label:
                return 1.0 / position
        return None

    def oracle_ndcg(labels, k=None):
        limit = len(labels) if k is None else min(k, len(labels))
        gain = sum((2 ** labels[i] - 1) / math.log2(i + 2) for i in range(limit))
        ideal = sorted(labels, reverse=True)
        best = sum((2 ** ideal[i] - 1) / math.log2(i + 2) for i in range(limit))
        return None if best == 0 else gain / best

    checked = 0
    for n in range(1, 7):
        for labels in itertools.product((0, 1), repeat=n):
            labels = list(labels)
            expected_rr = oracle_rr(labels)
            if expected_rr is None:
                with pytest.raises(ValueError):
                    mrr([labels])
            else:
                assert abs(mrr([labels]) - expected_rr) <= 1e-12
            for k in (None, 1, 3):
                expected = oracle_ndcg(labels, k)
                if expected is None:
                    continue
                assert abs(ndcg(labels, k) - expected) <= 1e-12
            checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    report(1, f"MRR/NDCG match brute force on {checked} rankings "
              f"({elapsed:.2f}s)")


# -------------------------------------------------------------------------
# 2. Similarity-metric fixtures
# -------------------------------------------------------------------------


def test_02_similarity_fixtures():
    # Derived values to 1e-4.
    assert abs(rouge_l(["the", "cat", "sat"], ["the", "dog", "sat"]) - 2 / 3) <= 1e-4
    assert abs(bleu(["the", "cat", "slept"], ["the", "cat", "sat"], max_n=2)
               - 2 / 3) <= 1e-4
    idf_flat = IdfTable(idf={"gun": 1.0, "control": 1.0, "ban": 1.0}, n_docs=1)
    assert abs(tfidf_cosine(["gun", "control"], ["gun", "ban"], idf_flat) - 0.5) <= 1e-4
    table = EmbeddingTable(
        dimension=2,
        vectors={"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0])},
    )
    assert abs(embedding_cosine(["a"], ["a", "b"], table) - math.sqrt(0.5)) <= 1e-4
    # Identity cases to 1e-12.
    assert abs(rouge_l(["x", "y"], ["x", "y"]) - 1.0) <= 1e-12
    assert abs(bleu(["x", "y"], ["x", "y"], max_n=1) - 1.0) <= 1e-12
    assert abs(tfidf_cosine(["x", "y"], ["y", "x"], idf_flat) - 1.0) <= 1e-12
    assert abs(embedding_cosine(["a", "b"], ["a", "b"], table) - 1.0) <= 1e-12
    report(2, "rouge_l / bleu / tfidf / embedding fixtures at 1e-4, "
              "identities at 1e-12")


# -------------------------------------------------------------------------
# 3. Composite-feature contract
# -------------------------------------------------------------------------


def test_03_composite_contract():
    composed = compose_with_type({"sim:rouge_l": 0.2}, ArgumentType.STUDY)
    assert composed == {"cmp:study:sim:rouge_l": 0.2}
    for other in (ArgumentType.FACTUAL, ArgumentType.OPINION, ArgumentType.REASONING):
        assert composed.get(f"cmp:{other.value}:sim:rouge_l", 0.0) == 0.0
    report(3, "type gating produces exactly one nonzero composed entry")


# -------------------------------------------------------------------------
# 4. Logistic gradient check
# -------------------------------------------------------------------------


def test_04_logistic_gradient_check():
    rng = np.random.default_rng(2024)
    h = 1e-6
    for _ in range(20):
        X = rng.standard_normal((10, 5))
        y = rng.integers(0, 2, 10).astype(float)
        w = rng.standard_normal(5) * 0.8
        b = float(rng.standard_normal())
        l2 = float(rng.uniform(0, 0.3))
        gw, gb = _gradient(X, y, w, b, l2)
        numeric = np.empty(5)
        for j in range(5):
            bump = np.zeros(5)
            bump[j] = h
            numeric[j] = (
                _objective(X, y, w + bump, b, l2) - _objective(X, y, w - bump, b, l2)
            ) / (2 * h)
        rel = np.linalg.norm(gw - numeric) / max(np.linalg.norm(numeric), 1e-12)
        assert rel <= 1e-5
        numeric_b = (
            _objective(X, y, w, b + h, l2) - _objective(X, y, w, b - h, l2)
        ) / (2 * h)
        assert abs(gb - numeric_b) / max(abs(numeric_b), 1e-12) <= 1e-5

    instances = []
    for i in range(30):
        label = ARGUMENT_TYPES[i % 4]
        fv = {f"f:{j}": float(rng.standard_normal()) for j in range(4)}
        fv[f"f:marker{label.value}"] = 2.0
        instances.append((fv, label))
    model = train_type_classifier(instances, TrainConfig())
    for history in model.objectives.values():
        assert all(b <= a + 1e-15 for a, b in zip(history, history[1:]))
    report(4, "analytic gradient matches central differences at 1e-5; "
              "objective non-increasing")


# -------------------------------------------------------------------------
# 5. Lambda-gradient fixture
# -------------------------------------------------------------------------


def test_05_lambda_gradient_fixture():
    lambdas, hessians = lambda_gradients([0.0, 0.0], [1, 0], 1.0)
    assert abs(lambdas[0] - 0.1845) <= 1e-4
    assert abs(lambdas[1] + 0.1845) <= 1e-4
    assert abs(hessians[0] - 0.0923) <= 1e-4
    assert abs(hessians[1] - 0.0923) <= 1e-4
    rng = np.random.default_rng(555)
    for _ in range(100):
        n = int(rng.integers(2, 15))
        scores = rng.standard_normal(n).tolist()
        labels = rng.integers(0, 2, n).tolist()
        lambdas, _ = lambda_gradients(scores, labels, float(rng.uniform(0.5, 2)))
        assert abs(sum(lambdas)) <= 1e-10
    report(5, "two-document lambdas +/-0.1845, hessians 0.0923; "
              "lambda sums vanish on 100 random groups")


# -------------------------------------------------------------------------
# 6. Ranker capacity on the planted corpus
# -------------------------------------------------------------------------


def _planted_groups():
    rng = np.random.default_rng(31)
    groups = []
    for g in range(3):
        group = []
        for i in range(5):
            relevant = i in (0, 2)
            value = (0.8 if relevant else 0.2) + 0.05 * float(rng.standard_normal())
            group.append(
                RankInstance(
                    features={"f:signal": value,
                              "f:noise": float(rng.standard_normal())},
                    relevance=1 if relevant else 0,
                    claim_id=f"c{g}",
                    index=i,
                )
            )
        groups.append(group)
    return groups


def test_06_ranker_capacity():
    start = time.perf_counter()
    config = RankerConfig(n_trees=50, learning_rate=0.1, max_leaves=4, min_leaf=1)
    model = train_lambdamart(_planted_groups(), config)
    rounds_to_perfect = next(
        (i + 1 for i, h in enumerate(model.history) if h["mrr"] == 1.0), None
    )
    assert rounds_to_perfect is not None and rounds_to_perfect <= 50
    assert model.history[-1]["mrr"] == 1.0
    again = train_lambdamart(_planted_groups(), config)
    assert json.dumps(ensemble_to_record(model)) == json.dumps(ensemble_to_record(again))
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"took {elapsed:.1f}s"
    report(6, f"planted corpus reaches training MRR 1.0 in "
              f"{rounds_to_perfect} trees, deterministic ({elapsed:.2f}s)")


# -------------------------------------------------------------------------
# 7. Relative ordering of feature sets under cross-validation
# -------------------------------------------------------------------------


def test_07_relative_ordering(synth_world):
    corpus, bundle = synth_world
    start = time.perf_counter()
    cv = cross_validate(
        corpus,
        ["sen", "sen+ngr+simi", "full"],
        bundle,
        feature_config=FeatureConfig(vocab_cap=500),
        type_config=TrainConfig(),
        ranker_config=RankerConfig(n_trees=40, max_leaves=6, min_leaf=10),
        k=5,
        seed=11,
        jobs=1,
    )
    elapsed = time.perf_counter() - start
    scores = {name: 100 * cv.pooled[name].mean_mrr for name in cv.row_names}
    baselines = max(scores["tfidf-baseline"], scores["w2v-baseline"])
    assert scores["full"] >= scores["sen+ngr+simi"] + 1.0, scores
    for supervised in ("sen", "sen+ngr+simi", "full"):
        assert scores[supervised] >= scores["tfidf-baseline"], scores
        assert scores[supervised] >= scores["w2v-baseline"], scores
    assert elapsed < 300.0, f"took {elapsed:.1f}s"
    report(7, "5-fold CV MRR ordering full "
              f"({scores['full']:.2f}) >= sen+ngr+simi "
              f"({scores['sen+ngr+simi']:.2f}) + 1.0, supervised >= baselines "
              f"({baselines:.2f}) ({elapsed:.0f}s)")


# -------------------------------------------------------------------------
# 8. Statistics fixtures
# -------------------------------------------------------------------------


def test_08_statistics_fixtures():
    assert cohen_kappa(["A", "A", "B", "B"], ["A", "B", "B", "B"]) == 0.5
    result = welch_t_test([1, 2, 3], [2, 3, 4])
    assert abs(result.t + 1.2247) <= 1e-4
    assert abs(result.df - 4.0) <= 1e-9
    assert abs(result.p - 0.288) <= 0.002
    rng = np.random.default_rng(4242)
    for _ in range(1000):
        p = float(rng.uniform(0, 1))
        m = int(rng.integers(1, 1000))
        corrected = bonferroni(p, m)
        assert p <= corrected <= 1.0
    report(8, "kappa fixture exact 0.5; Welch t=-1.2247 df=4 p=0.288+/-0.002; "
              "Bonferroni monotone on 1000 draws")


# -------------------------------------------------------------------------
# 9. Type-classifier protocol
# -------------------------------------------------------------------------


def test_09_type_protocol(synth_world):
    corpus, bundle = synth_world
    result = evaluate_type_protocol(
        corpus,
        bundle,
        feature_config=FeatureConfig(vocab_cap=500),
        type_config=TrainConfig(),
        seed=0,
    )
    classifier = result.test_rows["logistic-all"]
    for baseline in ("majority", "random"):
        other = result.test_rows[baseline]
        assert classifier.accuracy > other.accuracy, (baseline, classifier, other)
        assert classifier.macro_f1 > other.macro_f1, (baseline, classifier, other)
    report(9, f"50/25/25 protocol: classifier acc {classifier.accuracy:.3f} / "
              f"F1 {classifier.macro_f1:.3f} strictly beats majority and random")


# -------------------------------------------------------------------------
# 10. Determinism of the cv pipeline across --jobs
# -------------------------------------------------------------------------


def test_10_jobs_determinism(tmp_path):
    config = SynthConfig(n_debates=8, claims_per_debate=2,
                         sentences_per_article=12, seed=9)
    corpus_path = tmp_path / "corpus.jsonl"
    save_corpus(generate_corpus(config), corpus_path)
    resources = write_resources(tmp_path / "resources", config)
    run_config = {
        "corpus": str(corpus_path),
        "resources": resources,
        "seed": 3,
        "k": 4,
        "feature_sets": ["simi", "full"],
        "features": {"vocab_cap": 200},
        "typeclf": {"max_epochs": 300},
        "ranker": {"n_trees": 8, "max_leaves": 4, "min_leaf": 2},
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(run_config), encoding="utf-8")

    outputs = {}
    for jobs in (1, 4):
        out = tmp_path / f"jobs{jobs}"
        code = run_command(["cv", "--config", str(config_path),
                            "--output", str(out), "--jobs", str(jobs)])
        assert code == 0
        outputs[jobs] = {
            p.name: p.read_bytes() for p in sorted((out / "reports").iterdir())
        }
    assert outputs[1].keys() == outputs[4].keys()
    for name in outputs[1]:
        assert outputs[1][name] == outputs[4][name], f"{name} differs across --jobs"
    report(10, f"cv reports byte-identical for --jobs 1 vs 4 "
               f"({sorted(outputs[1])})")
