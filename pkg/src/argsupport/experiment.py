"""Experiment harnesses: k-fold ranking evaluation and type prediction.

Each fold is self-contained: the ngram vocabulary, the IDF table, and the
type classifier are built on the fold's training corpus only, then every
requested feature set is ranked on the held-out groups alongside the two
unsupervised similarity baselines. Folds are independent, so they may run
in parallel; outputs are merged in fold order either way.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import ARGUMENT_TYPES, ArgumentType, Corpus, split_folds
from .evaluation import RankingResult, ranking_result
from .features import (
    FeatureConfig,
    FeatureExtractor,
    FeatureVector,
    assemble_from_base,
    build_idf_table,
    build_vocabulary_from_sentences,
    extract_sentence_features,
    select_namespaces,
)
from .lexicons import ResourceBundle
from .metrics import ClassificationReport, classification_metrics
from .ranker import (
    RankInstance,
    RankerConfig,
    rank_by_similarity,
    score_group,
    train_lambdamart,
)
from .typeclf import (
    LogLinearModel,
    TrainConfig,
    annotate_corpus_types,
    predict_type,
    train_type_classifier,
)

logger = logging.getLogger(__name__)

__all__ = [
    "CLASSIFIER_NAMESPACES",
    "BASELINE_ROWS",
    "classifier_features",
    "CVReport",
    "cross_validate",
    "TypeEvalReport",
    "evaluate_type_protocol",
]

# The classifier sees the per-sentence lexical families but no position or
# similarity information; position enters only on the ranking side.
CLASSIFIER_NAMESPACES = ("bas", "sen", "dis", "sty", "ngr")

BASELINE_ROWS = ("tfidf-baseline", "w2v-baseline")

GroupKey = tuple[str, str]


def classifier_features(base: FeatureVector) -> FeatureVector:
    return select_namespaces(base, CLASSIFIER_NAMESPACES)


# --------------------------------------------------------------------------
# Cross-validated ranking
# --------------------------------------------------------------------------


@dataclass
class FoldOutput:
    fold: int
    entries: dict[str, list[tuple[GroupKey, list[int]]]]


def _base_feature_cache(
    corpus: Corpus, extractor: FeatureExtractor
) -> dict[GroupKey, list[FeatureVector]]:
    cache: dict[GroupKey, list[FeatureVector]] = {}
    for group in corpus.groups:
        n = len(group.sentences)
        cache[group.key] = [
            extractor.base_features(group.claim, s, n) for s in group.sentences
        ]
    return cache


def _ranked_relevance(
    ranked: Sequence[tuple[int, float]], labels: Sequence[int]
) -> list[int]:
    return [labels[i] for i, _ in ranked]


def _run_fold(args: tuple) -> FoldOutput:
    (
        fold_idx,
        train,
        test,
        bundle,
        feature_config,
        type_config,
        ranker_config,
        feature_sets,
        policy,
    ) = args
    vocab = build_vocabulary_from_sentences(
        (s for _, s in train.sentences()), feature_config
    )
    idf = build_idf_table(train)
    extractor = FeatureExtractor(bundle, vocab, idf, feature_config)
    base = _base_feature_cache(train, extractor)
    base.update(_base_feature_cache(test, extractor))

    clf_instances = [
        (classifier_features(base[group.key][s.index]), s.gold_type)
        for group, s in train.sentences()
        if s.relevance == 1 and s.gold_type is not None
    ]
    model = train_type_classifier(clf_instances, type_config)

    def featurize(group, sentence):
        return classifier_features(base[group.key][sentence.index])

    annotated_train = annotate_corpus_types(train, model, featurize, policy)
    annotated_test = annotate_corpus_types(test, model, featurize, policy)

    entries: dict[str, list[tuple[GroupKey, list[int]]]] = {}
    for feature_set in feature_sets:
        train_groups = [
            [
                RankInstance(
                    features=assemble_from_base(
                        base[group.key][s.index], feature_set, s.effective_type
                    ),
                    relevance=s.relevance,
                    claim_id=group.claim.claim_id,
                    index=s.index,
                )
                for s in group.sentences
            ]
            for group in annotated_train.groups
        ]
        ensemble = train_lambdamart(train_groups, ranker_config)
        rows: list[tuple[GroupKey, list[int]]] = []
        for group in annotated_test.groups:
            features = [
                assemble_from_base(base[group.key][s.index], feature_set,
                                   s.effective_type)
                for s in group.sentences
            ]
            ranked = score_group(ensemble, features)
            rows.append((group.key, _ranked_relevance(ranked, group.relevance_labels())))
        entries[feature_set] = rows

    for metric, row_name in (("tfidf", "tfidf-baseline"), ("w2v", "w2v-baseline")):
        if metric == "w2v" and bundle.embeddings is None:
            continue
        rows = []
        for group in test.groups:
            ranked = rank_by_similarity(group, metric, idf=idf,
                                        embeddings=bundle.embeddings)
            rows.append((group.key, _ranked_relevance(ranked, group.relevance_labels())))
        entries[row_name] = rows
    return FoldOutput(fold=fold_idx, entries=entries)


@dataclass
class CVReport:
    """Pooled and per-fold ranking metrics for every requested row."""

    row_names: list[str]
    pooled: dict[str, RankingResult]
    per_fold: dict[str, list[RankingResult]]
    k: int
    seed: int
    policy: str
    ndcg_k: Optional[int] = None

    def format_text(self) -> str:
        lines = [f"{'row':<18} {'MRR':>6} {'NDCG':>6}"]
        for name in self.row_names:
            lines.append(self.pooled[name].display_row())
        lines.append(
            f"(k={self.k}, seed={self.seed}, policy={self.policy}, "
            f"ndcg_at={self.ndcg_k if self.ndcg_k is not None else 'full'})"
        )
        return "\n".join(lines)

    def tsv_rows(self) -> list[list[str]]:
        rows = [["row", "fold", "mrr", "ndcg", "claims_scored", "claims_total"]]
        for name in self.row_names:
            for fold_idx, result in enumerate(self.per_fold[name]):
                rows.append([
                    name, str(fold_idx),
                    f"{100 * result.mean_mrr:.2f}", f"{100 * result.mean_ndcg:.2f}",
                    str(result.n_scored), str(result.n_claims),
                ])
            pooled = self.pooled[name]
            rows.append([
                name, "all",
                f"{100 * pooled.mean_mrr:.2f}", f"{100 * pooled.mean_ndcg:.2f}",
                str(pooled.n_scored), str(pooled.n_claims),
            ])
        return rows


def cross_validate(
    corpus: Corpus,
    feature_sets: Sequence[str],
    bundle: ResourceBundle,
    feature_config: FeatureConfig = FeatureConfig(),
    type_config: TrainConfig = TrainConfig(),
    ranker_config: RankerConfig = RankerConfig(),
    k: int = 5,
    seed: int = 0,
    policy: str = "predicted",
    ndcg_k: Optional[int] = None,
    jobs: int = 1,
) -> CVReport:
    """Debate-level k-fold evaluation of the requested feature sets.

    Every supervised row and both unsupervised baselines share the same
    folds. Claims are pooled across test folds before averaging, so the
    report is independent of fold ordering and of ``jobs``.
    """
    folds = split_folds(corpus, k, seed)
    tasks = [
        (
            fold_idx,
            train,
            test,
            bundle,
            feature_config,
            type_config,
            ranker_config,
            tuple(feature_sets),
            policy,
        )
        for fold_idx, (train, test) in enumerate(folds)
    ]
    if jobs <= 1:
        outputs = [_run_fold(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_run_fold, tasks))
    outputs.sort(key=lambda out: out.fold)

    row_names = [
        name for name in BASELINE_ROWS if all(name in out.entries for out in outputs)
    ]
    row_names.extend(feature_sets)
    pooled: dict[str, RankingResult] = {}
    per_fold: dict[str, list[RankingResult]] = {}
    for name in row_names:
        all_entries: list[tuple[GroupKey, list[int]]] = []
        fold_results = []
        for out in outputs:
            fold_entries = out.entries[name]
            all_entries.extend(fold_entries)
            fold_results.append(
                ranking_result(f"{name}/fold{out.fold}", fold_entries, ndcg_k)
            )
        pooled[name] = ranking_result(name, all_entries, ndcg_k)
        per_fold[name] = fold_results
    return CVReport(
        row_names=row_names,
        pooled=pooled,
        per_fold=per_fold,
        k=k,
        seed=seed,
        policy=policy,
        ndcg_k=ndcg_k,
    )


# --------------------------------------------------------------------------
# Argument-type prediction protocol
# --------------------------------------------------------------------------


@dataclass
class TypeEvalReport:
    """Accuracy / macro-F1 rows for the baselines and both classifiers."""

    test_rows: dict[str, ClassificationReport]
    validation_rows: dict[str, ClassificationReport]
    n_train: int
    n_validation: int
    n_test: int
    seed: int

    ROW_ORDER = ("majority", "random", "logistic-ngrams", "logistic-all")

    def format_text(self) -> str:
        lines = [
            f"split: train {self.n_train} / validation {self.n_validation} "
            f"/ test {self.n_test} (seed {self.seed})",
            f"{'row':<16} {'Acc':>6} {'F1':>6}",
        ]
        for name in self.ROW_ORDER:
            report = self.test_rows[name]
            lines.append(f"{name:<16} {report.accuracy:>6.3f} {report.macro_f1:>6.3f}")
        return "\n".join(lines)

    def tsv_rows(self) -> list[list[str]]:
        rows = [["row", "split", "accuracy", "macro_f1"]]
        for name in self.ROW_ORDER:
            rows.append([
                name, "test",
                f"{self.test_rows[name].accuracy:.4f}",
                f"{self.test_rows[name].macro_f1:.4f}",
            ])
            if name in self.validation_rows:
                rows.append([
                    name, "validation",
                    f"{self.validation_rows[name].accuracy:.4f}",
                    f"{self.validation_rows[name].macro_f1:.4f}",
                ])
        return rows


def _typed_instances(corpus: Corpus):
    out = []
    for group, sentence in corpus.sentences():
        if sentence.relevance == 1 and sentence.gold_type is not None:
            out.append((group, sentence))
    return out


def evaluate_type_protocol(
    corpus: Corpus,
    bundle: ResourceBundle,
    feature_config: FeatureConfig = FeatureConfig(),
    type_config: TrainConfig = TrainConfig(),
    seed: int = 0,
) -> TypeEvalReport:
    """Train/validate/test the type classifier on gold supporting arguments.

    Typed instances are shuffled with the seed and split 50/25/25. The
    vocabulary comes from the training split only. Baselines: the training
    majority class, and a seeded uniform-random guess. Both the ngrams-only
    and the all-features classifiers are evaluated.
    """
    instances = _typed_instances(corpus)
    if len(instances) < 8:
        raise ValueError(
            f"need at least 8 gold-typed supporting sentences, found {len(instances)}"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(instances))
    n = len(instances)
    n_train = n // 2
    n_val = n // 4
    train_idx = order[:n_train]
    val_idx = order[n_train : n_train + n_val]
    test_idx = order[n_train + n_val :]

    vocab = build_vocabulary_from_sentences(
        (instances[i][1] for i in train_idx), feature_config
    )

    def features_for(i: int) -> FeatureVector:
        group, sentence = instances[i]
        full = extract_sentence_features(
            sentence, len(group.sentences), bundle, vocab, feature_config
        )
        return classifier_features(full)

    feats = {int(i): features_for(int(i)) for i in order}
    labels = {int(i): instances[int(i)][1].gold_type for i in order}

    def subset(idx) -> tuple[list[FeatureVector], list[ArgumentType]]:
        return ([feats[int(i)] for i in idx], [labels[int(i)] for i in idx])

    train_X, train_y = subset(train_idx)
    val_X, val_y = subset(val_idx)
    test_X, test_y = subset(test_idx)

    counts = {t: sum(1 for y in train_y if y is t) for t in ARGUMENT_TYPES}
    majority = max(ARGUMENT_TYPES, key=lambda t: (counts[t], -ARGUMENT_TYPES.index(t)))
    random_types = [
        ARGUMENT_TYPES[int(i)] for i in rng.integers(0, len(ARGUMENT_TYPES), len(test_y))
    ]
    random_val = [
        ARGUMENT_TYPES[int(i)] for i in rng.integers(0, len(ARGUMENT_TYPES), len(val_y))
    ]

    ngram_model = train_type_classifier(
        [(select_namespaces(fv, ("ngr",)), y) for fv, y in zip(train_X, train_y)],
        type_config,
    )
    full_model = train_type_classifier(list(zip(train_X, train_y)), type_config)

    def eval_model(model: LogLinearModel, X, y,
                   only_ngrams: bool = False) -> ClassificationReport:
        preds = [
            predict_type(model, select_namespaces(fv, ("ngr",)) if only_ngrams else fv)
            for fv in X
        ]
        return classification_metrics(y, preds, labels=ARGUMENT_TYPES)

    test_rows = {
        "majority": classification_metrics(
            test_y, [majority] * len(test_y), labels=ARGUMENT_TYPES
        ),
        "random": classification_metrics(test_y, random_types, labels=ARGUMENT_TYPES),
        "logistic-ngrams": eval_model(ngram_model, test_X, test_y, only_ngrams=True),
        "logistic-all": eval_model(full_model, test_X, test_y),
    }
    validation_rows = {
        "majority": classification_metrics(
            val_y, [majority] * len(val_y), labels=ARGUMENT_TYPES
        ),
        "random": classification_metrics(val_y, random_val, labels=ARGUMENT_TYPES),
        "logistic-ngrams": eval_model(ngram_model, val_X, val_y, only_ngrams=True),
        "logistic-all": eval_model(full_model, val_X, val_y),
    }
    return TypeEvalReport(
        test_rows=test_rows,
        validation_rows=validation_rows,
        n_train=len(train_idx),
        n_validation=len(val_idx),
        n_test=len(test_idx),
        seed=seed,
    )
