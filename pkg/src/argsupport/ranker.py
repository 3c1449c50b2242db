"""LambdaMART ranker built from scratch, plus unsupervised baselines.

Boosting rounds compute pairwise lambda gradients weighted by the |ΔNDCG|
of swapping each mis-ordered pair, fit one regression tree per round to
those lambdas with exact split search, set leaf outputs by a Newton step
(sum of lambdas over sum of second derivatives), and add the tree with
shrinkage. Everything is deterministic for a fixed seed and input order:
split ties break on the lowest feature name, then the lowest threshold.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.special import expit

from .corpus import QueryGroup
from .features import FeatureVector, embedding_cosine, tfidf_cosine
from .lexicons import EmbeddingTable
from .metrics import mrr, ndcg

__all__ = [
    "RankInstance",
    "RankerConfig",
    "RegressionTree",
    "Ensemble",
    "lambda_gradients",
    "fit_regression_tree",
    "train_lambdamart",
    "score_group",
    "rank_by_similarity",
    "save_ensemble",
    "load_ensemble",
]

MODEL_FORMAT = "argsupport-ranker-v1"

_LEAF = -1
# Guards against splitting on pure floating noise in the gain comparison.
_MIN_GAIN = 1e-12
_NEWTON_EPS = 1e-9


@dataclass(frozen=True)
class RankInstance:
    features: FeatureVector
    relevance: int
    claim_id: str
    index: int


@dataclass(frozen=True)
class RankerConfig:
    """LambdaMART hyperparameters.

    ``min_leaf`` defaults to 1% of the training instances (at least 1) when
    left unset. Row/column subsampling are off by default to keep training
    deterministic without an RNG in the loop.
    """

    n_trees: int = 300
    learning_rate: float = 0.1
    max_leaves: int = 10
    min_leaf: Optional[int] = None
    sigma: float = 1.0
    seed: int = 0
    row_subsample: float = 1.0
    col_subsample: float = 1.0

    def __post_init__(self) -> None:
        if self.n_trees < 0:
            raise ValueError("n_trees must be >= 0")
        if self.max_leaves < 2:
            raise ValueError("max_leaves must be >= 2")
        if self.min_leaf is not None and self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if not 0 < self.row_subsample <= 1 or not 0 < self.col_subsample <= 1:
            raise ValueError("subsample fractions must be in (0, 1]")

    def resolve_min_leaf(self, n_instances: int) -> int:
        if self.min_leaf is not None:
            return self.min_leaf
        return max(1, int(0.01 * n_instances))


# --------------------------------------------------------------------------
# Lambda gradients
# --------------------------------------------------------------------------


def _rank_positions(scores: Sequence[float]) -> list[int]:
    """1-based rank of each item under descending score, ties by index."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    ranks = [0] * len(scores)
    for position, i in enumerate(order, start=1):
        ranks[i] = position
    return ranks


def lambda_gradients(
    scores: Sequence[float], labels: Sequence[int], sigma: float = 1.0
) -> tuple[list[float], list[float]]:
    """Pairwise pseudo-gradients and second derivatives for one group.

    For every pair with label_i > label_j the contribution is scaled by the
    absolute NDCG change of swapping the two items in the current ranking.
    Positive lambda pushes a score up. Groups with no valid pairs (all-equal
    labels, or no relevant item) produce all zeros.
    """
    n = len(scores)
    if len(labels) != n:
        raise ValueError(f"scores and labels differ in length: {n} vs {len(labels)}")
    if any(not math.isfinite(s) for s in scores):
        raise ValueError("non-finite score")
    lambdas = [0.0] * n
    hessians = [0.0] * n
    gains = [float(2**l - 1) for l in labels]
    ideal = sorted(gains, reverse=True)
    idcg = sum(g / math.log2(r + 1) for r, g in enumerate(ideal, start=1))
    if idcg == 0.0:
        return lambdas, hessians
    ranks = _rank_positions(scores)
    discounts = [1.0 / math.log2(r + 1) for r in ranks]
    higher = [i for i in range(n) if labels[i] == 1]
    lower = [j for j in range(n) if labels[j] == 0]
    for i in higher:
        for j in lower:
            delta = abs((gains[i] - gains[j]) * (discounts[i] - discounts[j])) / idcg
            rho = float(expit(-sigma * (scores[i] - scores[j])))
            lam = sigma * rho * delta
            hess = sigma * sigma * rho * (1.0 - rho) * delta
            lambdas[i] += lam
            lambdas[j] -= lam
            hessians[i] += hess
            hessians[j] += hess
    return lambdas, hessians


# --------------------------------------------------------------------------
# Regression trees
# --------------------------------------------------------------------------


@dataclass
class RegressionTree:
    """Flat-array binary tree; feature < 0 marks a leaf."""

    feature: list[int]
    threshold: list[float]
    left: list[int]
    right: list[int]
    value: list[float]

    @property
    def n_leaves(self) -> int:
        return sum(1 for f in self.feature if f == _LEAF)

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if self.feature[node] == _LEAF:
                out[idx] = self.value[node]
                continue
            goes_left = X[idx, self.feature[node]] <= self.threshold[node]
            stack.append((self.left[node], idx[goes_left]))
            stack.append((self.right[node], idx[~goes_left]))
        return out

    def predict_one(self, lookup) -> float:
        """Route a single instance given ``lookup(feature_index) -> value``."""
        node = 0
        while self.feature[node] != _LEAF:
            if lookup(self.feature[node]) <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return self.value[node]


def _best_split(
    X: np.ndarray, targets: np.ndarray, idx: np.ndarray, min_leaf: int
) -> Optional[tuple[float, int, float, np.ndarray, np.ndarray]]:
    """Exact squared-error split search over one node's instances.

    Returns (gain, feature, threshold, left_idx, right_idx) or None. The
    per-column argmax picks the lowest qualifying threshold and the
    cross-column argmax the lowest feature index, so ties are deterministic.
    """
    m = idx.size
    if m < 2 * min_leaf or m < 2:
        return None
    sub = X[idx]
    order = np.argsort(sub, axis=0, kind="stable")
    sorted_values = np.take_along_axis(sub, order, axis=0)
    sorted_targets = targets[idx][order]
    prefix = np.cumsum(sorted_targets, axis=0)
    total = float(targets[idx].sum())
    counts = np.arange(1, m, dtype=np.float64)
    left_sums = prefix[:-1]
    right_sums = total - left_sums
    with np.errstate(invalid="ignore"):
        gain = left_sums**2 / counts[:, None] + right_sums**2 / (m - counts)[:, None]
    valid = sorted_values[1:] > sorted_values[:-1]
    if min_leaf > 1:
        ok = (counts >= min_leaf) & ((m - counts) >= min_leaf)
        valid &= ok[:, None]
    gain = np.where(valid, gain, -np.inf)
    best_pos = np.argmax(gain, axis=0)
    cols = np.arange(X.shape[1])
    best_per_col = gain[best_pos, cols]
    best_col = int(np.argmax(best_per_col))
    best_gain = float(best_per_col[best_col]) - total * total / m
    if not np.isfinite(best_per_col[best_col]) or best_gain <= _MIN_GAIN:
        return None
    pos = int(best_pos[best_col])
    threshold = float(
        (sorted_values[pos, best_col] + sorted_values[pos + 1, best_col]) / 2.0
    )
    member_order = idx[order[:, best_col]]
    left_idx = np.sort(member_order[: pos + 1])
    right_idx = np.sort(member_order[pos + 1 :])
    return best_gain, best_col, threshold, left_idx, right_idx


def _fit_tree_arrays(
    X: np.ndarray,
    targets: np.ndarray,
    hessians: np.ndarray,
    max_leaves: int,
    min_leaf: int,
) -> RegressionTree:
    def leaf_value(node_idx: np.ndarray) -> float:
        return float(targets[node_idx].sum() / (hessians[node_idx].sum() + _NEWTON_EPS))

    feature = [_LEAF]
    threshold = [0.0]
    left = [_LEAF]
    right = [_LEAF]
    value = [leaf_value(np.arange(X.shape[0]))]

    # Best-first growth: repeatedly split the leaf with the largest gain.
    counter = 0
    candidates: list[tuple[float, int, int, tuple]] = []
    root_split = _best_split(X, targets, np.arange(X.shape[0]), min_leaf)
    if root_split is not None:
        heapq.heappush(candidates, (-root_split[0], counter, 0, root_split))
    n_leaves = 1
    while candidates and n_leaves < max_leaves:
        _, _, node, (gain, col, thr, left_idx, right_idx) = heapq.heappop(candidates)
        left_node = len(feature)
        right_node = left_node + 1
        for child_idx in (left_idx, right_idx):
            feature.append(_LEAF)
            threshold.append(0.0)
            left.append(_LEAF)
            right.append(_LEAF)
            value.append(leaf_value(child_idx))
        feature[node] = col
        threshold[node] = thr
        left[node] = left_node
        right[node] = right_node
        value[node] = 0.0
        n_leaves += 1
        for child_node, child_idx in ((left_node, left_idx), (right_node, right_idx)):
            split = _best_split(X, targets, child_idx, min_leaf)
            if split is not None:
                counter += 1
                heapq.heappush(candidates, (-split[0], counter, child_node, split))
    return RegressionTree(feature=feature, threshold=threshold, left=left,
                          right=right, value=value)


def fit_regression_tree(
    instances: Sequence[FeatureVector] | np.ndarray,
    targets: Sequence[float],
    hessians: Sequence[float],
    config: RankerConfig,
    feature_names: Optional[list[str]] = None,
) -> tuple[RegressionTree, list[str]]:
    """Fit one tree; instances may be feature dicts or a dense matrix.

    Returns the tree together with the feature-name index its split columns
    refer to.
    """
    if isinstance(instances, np.ndarray):
        X = instances
        if feature_names is None:
            feature_names = [str(i) for i in range(X.shape[1])]
    else:
        if feature_names is None:
            feature_names = sorted({n for fv in instances for n in fv})
        X = _densify(instances, feature_names)
    if X.shape[0] == 0:
        raise ValueError("no instances to fit")
    if not (X.shape[0] == len(targets) == len(hessians)):
        raise ValueError("instances, targets, and hessians must align")
    t = np.asarray(targets, dtype=np.float64)
    h = np.asarray(hessians, dtype=np.float64)
    tree = _fit_tree_arrays(X, t, h, config.max_leaves,
                            config.resolve_min_leaf(X.shape[0]))
    return tree, feature_names


def _densify(instances: Sequence[Mapping[str, float]],
             feature_names: Sequence[str]) -> np.ndarray:
    index = {name: i for i, name in enumerate(feature_names)}
    X = np.zeros((len(instances), len(feature_names)))
    for i, fv in enumerate(instances):
        for name, v in fv.items():
            if not math.isfinite(v):
                raise ValueError(f"non-finite value for feature {name!r}")
            j = index.get(name)
            if j is not None:
                X[i, j] = v
    return X


# --------------------------------------------------------------------------
# Ensemble training and scoring
# --------------------------------------------------------------------------


@dataclass
class Ensemble:
    """Additive tree model: score(x) = base + learning_rate * sum tree(x)."""

    feature_names: list[str]
    trees: list[RegressionTree]
    learning_rate: float
    base_score: float
    config: RankerConfig
    history: list[dict[str, float]] = field(default_factory=list)

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        scores = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            scores += self.learning_rate * tree.predict(X)
        return scores

    def score_features(self, fv: Mapping[str, float]) -> float:
        index = self._index()
        dense: dict[int, float] = {}
        for name, v in fv.items():
            j = index.get(name)
            if j is not None:
                dense[j] = v
        lookup = lambda j: dense.get(j, 0.0)
        return self.base_score + self.learning_rate * sum(
            tree.predict_one(lookup) for tree in self.trees
        )

    def _index(self) -> dict[str, int]:
        cached = getattr(self, "_index_cache", None)
        if cached is None:
            cached = {name: i for i, name in enumerate(self.feature_names)}
            self._index_cache = cached
        return cached


def train_lambdamart(
    groups: Sequence[Sequence[RankInstance]],
    config: RankerConfig = RankerConfig(),
) -> Ensemble:
    """Boost regression trees on lambda gradients over ranking groups.

    Training MRR/NDCG are recorded per round on the training groups. The
    run is deterministic given the config seed and input order.
    """
    if not groups:
        raise ValueError("no ranking groups")
    flat: list[RankInstance] = [inst for group in groups for inst in group]
    labels = np.array([inst.relevance for inst in flat], dtype=np.int64)
    slices = []
    start = 0
    for group in groups:
        slices.append((start, start + len(group)))
        start += len(group)
    if not any(
        labels[a:b].any() and (labels[a:b] == 0).any() for a, b in slices
    ):
        raise ValueError("no group contains a positive and a negative label")
    feature_names = sorted({name for inst in flat for name in inst.features})
    X = _densify([inst.features for inst in flat], feature_names)
    n = X.shape[0]
    min_leaf = config.resolve_min_leaf(n)
    rng = np.random.default_rng(config.seed)
    scores = np.zeros(n)
    trees: list[RegressionTree] = []
    history: list[dict[str, float]] = []
    for _ in range(config.n_trees):
        lambdas = np.zeros(n)
        hessians = np.zeros(n)
        for a, b in slices:
            lam, hess = lambda_gradients(scores[a:b].tolist(),
                                         labels[a:b].tolist(), config.sigma)
            lambdas[a:b] = lam
            hessians[a:b] = hess
        rows = np.arange(n)
        if config.row_subsample < 1.0:
            keep = max(1, int(round(config.row_subsample * n)))
            rows = np.sort(rng.choice(n, size=keep, replace=False))
        cols: Optional[np.ndarray] = None
        if config.col_subsample < 1.0:
            keep = max(1, int(round(config.col_subsample * X.shape[1])))
            cols = np.sort(rng.choice(X.shape[1], size=keep, replace=False))
        X_fit = X[rows][:, cols] if cols is not None else X[rows]
        tree = _fit_tree_arrays(X_fit, lambdas[rows], hessians[rows],
                                config.max_leaves, min_leaf)
        if cols is not None:
            tree.feature = [
                int(cols[f]) if f != _LEAF else _LEAF for f in tree.feature
            ]
        trees.append(tree)
        scores += config.learning_rate * tree.predict(X)
        history.append(_training_metrics(scores, labels, slices))
    return Ensemble(
        feature_names=feature_names,
        trees=trees,
        learning_rate=config.learning_rate,
        base_score=0.0,
        config=config,
        history=history,
    )


def _training_metrics(scores: np.ndarray, labels: np.ndarray,
                      slices: list[tuple[int, int]]) -> dict[str, float]:
    rankings = []
    for a, b in slices:
        if not labels[a:b].any():
            continue
        order = sorted(range(b - a), key=lambda i: (-scores[a + i], i))
        rankings.append([int(labels[a + i]) for i in order])
    return {
        "mrr": mrr(rankings),
        "ndcg": sum(ndcg(r) for r in rankings) / len(rankings),
    }


def score_group(
    model: Ensemble,
    features: Sequence[FeatureVector],
    indices: Optional[Sequence[int]] = None,
) -> list[tuple[int, float]]:
    """Score one group's sentences; descending score, earlier index wins ties."""
    if indices is None:
        indices = list(range(len(features)))
    X = _densify(features, model.feature_names)
    scores = model.predict_matrix(X)
    ranked = sorted(zip(indices, scores), key=lambda p: (-p[1], p[0]))
    return [(int(i), float(s)) for i, s in ranked]


def rank_by_similarity(
    group: QueryGroup,
    metric: str,
    idf=None,
    embeddings: Optional[EmbeddingTable] = None,
) -> list[tuple[int, float]]:
    """Unsupervised baseline: rank sentences by claim similarity."""
    claim_words = group.claim.words()
    if metric == "tfidf":
        if idf is None:
            raise ValueError("tfidf ranking requires an IDF table")
        scores = [
            tfidf_cosine(claim_words, s.words(), idf) for s in group.sentences
        ]
    elif metric == "w2v":
        if embeddings is None:
            raise ValueError("w2v ranking requires an embedding table")
        scores = [
            embedding_cosine(claim_words, s.words(), embeddings)
            for s in group.sentences
        ]
    else:
        raise ValueError(f"unknown similarity metric {metric!r}")
    ranked = sorted(
        zip((s.index for s in group.sentences), scores), key=lambda p: (-p[1], p[0])
    )
    return [(int(i), float(s)) for i, s in ranked]


# --------------------------------------------------------------------------
# Persistence
# --------------------------------------------------------------------------


def save_ensemble(model: Ensemble, path: str | Path,
                  extra: Optional[dict] = None) -> None:
    record = ensemble_to_record(model)
    if extra:
        record.update(extra)
    Path(path).write_text(json.dumps(record, indent=1), encoding="utf-8")


def ensemble_to_record(model: Ensemble) -> dict:
    return {
        "format": MODEL_FORMAT,
        "feature_names": model.feature_names,
        "base_score": model.base_score,
        "learning_rate": model.learning_rate,
        "config": {
            "n_trees": model.config.n_trees,
            "learning_rate": model.config.learning_rate,
            "max_leaves": model.config.max_leaves,
            "min_leaf": model.config.min_leaf,
            "sigma": model.config.sigma,
            "seed": model.config.seed,
            "row_subsample": model.config.row_subsample,
            "col_subsample": model.config.col_subsample,
        },
        "trees": [
            {
                "feature": [
                    model.feature_names[f] if f != _LEAF else None
                    for f in tree.feature
                ],
                "threshold": tree.threshold,
                "left": tree.left,
                "right": tree.right,
                "value": tree.value,
            }
            for tree in model.trees
        ],
    }


def load_ensemble(path: str | Path) -> Ensemble:
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    if record.get("format") != MODEL_FORMAT:
        raise ValueError(f"unexpected model format {record.get('format')!r}")
    names = list(record["feature_names"])
    index = {name: i for i, name in enumerate(names)}
    trees = []
    for raw in record["trees"]:
        trees.append(
            RegressionTree(
                feature=[index[f] if f is not None else _LEAF for f in raw["feature"]],
                threshold=[float(v) for v in raw["threshold"]],
                left=list(raw["left"]),
                right=list(raw["right"]),
                value=[float(v) for v in raw["value"]],
            )
        )
    cfg = record["config"]
    config = RankerConfig(
        n_trees=cfg["n_trees"],
        learning_rate=cfg["learning_rate"],
        max_leaves=cfg["max_leaves"],
        min_leaf=cfg["min_leaf"],
        sigma=cfg["sigma"],
        seed=cfg["seed"],
        row_subsample=cfg.get("row_subsample", 1.0),
        col_subsample=cfg.get("col_subsample", 1.0),
    )
    return Ensemble(
        feature_names=names,
        trees=trees,
        learning_rate=float(record["learning_rate"]),
        base_score=float(record["base_score"]),
        config=config,
    )
