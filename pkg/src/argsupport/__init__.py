"""Sentence-level supporting-argument detection for user-specified claims.

The pipeline: load an annotated corpus, extract lexicon-backed sentence
features and claim similarity features, classify each sentence's argument
type with a one-vs-rest log-linear model, gate features on that type to
form composite features, and rank candidate sentences with a LambdaMART
ensemble. Evaluation covers MRR/NDCG under debate-level cross-validation,
the type-prediction protocol, and per-type feature significance.
"""

__version__ = "0.1.0"

from .corpus import (
    ARGUMENT_TYPES,
    AnnotatedSentence,
    ArgumentType,
    Claim,
    Corpus,
    CorpusError,
    QueryGroup,
    StatsReport,
    Token,
    corpus_stats,
    load_corpus,
    save_corpus,
    split_folds,
)
from .features import (
    FEATURE_SETS,
    FeatureConfig,
    FeatureExtractor,
    FeatureVector,
    IdfTable,
    Vocabulary,
    assemble_instance,
    bleu,
    build_idf_table,
    build_ngram_vocabulary,
    compose_with_type,
    embedding_cosine,
    extract_claim_features,
    extract_sentence_features,
    extract_similarity_features,
    rouge_l,
    tfidf_cosine,
)
from .lexicons import ResourceBundle, load_resource_bundle, match_connectives
from .metrics import (
    bonferroni,
    classification_metrics,
    cohen_kappa,
    mrr,
    ndcg,
    welch_t_test,
)
from .ranker import (
    Ensemble,
    RankInstance,
    RankerConfig,
    RegressionTree,
    fit_regression_tree,
    lambda_gradients,
    rank_by_similarity,
    score_group,
    train_lambdamart,
)
from .typeclf import (
    LogLinearModel,
    TrainConfig,
    annotate_corpus_types,
    predict_proba,
    predict_type,
    train_type_classifier,
)
