import pytest

from argsupport.experiment import (
    BASELINE_ROWS,
    cross_validate,
    evaluate_type_protocol,
)
from argsupport.features import FeatureConfig
from argsupport.lexicons import load_resource_bundle
from argsupport.ranker import RankerConfig
from argsupport.synth import SynthConfig, generate_corpus, write_resources
from argsupport.typeclf import TrainConfig


SMALL = SynthConfig(n_debates=8, claims_per_debate=2, sentences_per_article=10,
                    seed=4)


@pytest.fixture(scope="module")
def small_world(tmp_path_factory):
    directory = tmp_path_factory.mktemp("resources")
    corpus = generate_corpus(SMALL)
    bundle = load_resource_bundle(write_resources(directory, SMALL))
    return corpus, bundle


def run_small_cv(corpus, bundle, jobs=1, seed=2):
    return cross_validate(
        corpus,
        ["simi", "full"],
        bundle,
        feature_config=FeatureConfig(vocab_cap=200),
        type_config=TrainConfig(max_epochs=300),
        ranker_config=RankerConfig(n_trees=8, max_leaves=4, min_leaf=2),
        k=4,
        seed=seed,
        jobs=jobs,
    )


class TestCrossValidate:
    def test_rows_and_claim_coverage(self, small_world):
        corpus, bundle = small_world
        report = run_small_cv(corpus, bundle)
        assert report.row_names[:2] == list(BASELINE_ROWS)
        assert set(report.row_names) == {"tfidf-baseline", "w2v-baseline",
                                         "simi", "full"}
        for name in report.row_names:
            assert report.pooled[name].n_claims == len(corpus.groups)
            assert len(report.per_fold[name]) == 4
            fold_total = sum(r.n_claims for r in report.per_fold[name])
            assert fold_total == len(corpus.groups)

    def test_deterministic_rerun(self, small_world):
        corpus, bundle = small_world
        a = run_small_cv(corpus, bundle)
        b = run_small_cv(corpus, bundle)
        assert a.tsv_rows() == b.tsv_rows()

    def test_jobs_parallel_identical(self, small_world):
        corpus, bundle = small_world
        serial = run_small_cv(corpus, bundle, jobs=1)
        parallel = run_small_cv(corpus, bundle, jobs=3)
        assert serial.tsv_rows() == parallel.tsv_rows()
        for name in serial.row_names:
            assert serial.pooled[name].rankings == parallel.pooled[name].rankings

    def test_different_seed_changes_folds(self, small_world):
        corpus, bundle = small_world
        a = run_small_cv(corpus, bundle, seed=2)
        b = run_small_cv(corpus, bundle, seed=3)
        assert a.tsv_rows() != b.tsv_rows()

    def test_tsv_has_fold_and_aggregate_rows(self, small_world):
        corpus, bundle = small_world
        report = run_small_cv(corpus, bundle)
        rows = report.tsv_rows()
        assert rows[0] == ["row", "fold", "mrr", "ndcg", "claims_scored",
                           "claims_total"]
        body = rows[1:]
        per_row = [r for r in body if r[0] == "full"]
        assert len(per_row) == 5  # 4 folds + aggregate
        assert per_row[-1][1] == "all"

    def test_unknown_feature_set_propagates(self, small_world):
        corpus, bundle = small_world
        with pytest.raises(ValueError, match="unknown feature set"):
            cross_validate(corpus, ["bogus"], bundle, k=2, seed=0,
                           ranker_config=RankerConfig(n_trees=1, min_leaf=1))


class TestTypeProtocol:
    def test_splits_and_rows(self, small_world):
        corpus, bundle = small_world
        report = evaluate_type_protocol(
            corpus, bundle,
            feature_config=FeatureConfig(vocab_cap=300, ngram_min_df=1),
            type_config=TrainConfig(max_epochs=500),
            seed=0,
        )
        n = report.n_train + report.n_validation + report.n_test
        assert report.n_train == n // 2
        assert set(report.test_rows) == {"majority", "random", "logistic-ngrams",
                                         "logistic-all"}
        for row in report.test_rows.values():
            assert 0.0 <= row.accuracy <= 1.0
            assert 0.0 <= row.macro_f1 <= 1.0

    def test_deterministic(self, small_world):
        corpus, bundle = small_world
        kwargs = dict(
            feature_config=FeatureConfig(vocab_cap=300, ngram_min_df=1),
            type_config=TrainConfig(max_epochs=300),
            seed=5,
        )
        a = evaluate_type_protocol(corpus, bundle, **kwargs)
        b = evaluate_type_protocol(corpus, bundle, **kwargs)
        assert a.tsv_rows() == b.tsv_rows()

    def test_too_few_instances_rejected(self, small_world):
        _, bundle = small_world
        tiny = generate_corpus(SynthConfig(n_debates=2, claims_per_debate=1,
                                           sentences_per_article=6, n_relevant=1))
        with pytest.raises(ValueError, match="at least 8"):
            evaluate_type_protocol(tiny, bundle)
