"""Ranking and agreement statistics.

All ranking metrics take relevance lists already in ranked order (best
first) with binary labels. Values are kept in [0, 1] internally; reports
scale by 100 at display time.
"""

from __future__ import annotations

import math
from typing import Hashable, NamedTuple, Optional, Sequence

from scipy.special import betainc

__all__ = [
    "mrr",
    "dcg",
    "ndcg",
    "ClassificationReport",
    "classification_metrics",
    "cohen_kappa",
    "TTestResult",
    "welch_t_test",
    "bonferroni",
]


def mrr(rankings: Sequence[Sequence[int]]) -> float:
    """Mean reciprocal rank of the first relevant item, 1-based.

    Lists without any relevant item are excluded from the mean; if none
    qualifies the metric is undefined and an error is raised.
    """
    reciprocal_ranks = []
    for ranking in rankings:
        if not ranking:
            raise ValueError("empty ranking list")
        for position, label in enumerate(ranking, start=1):
            if label:
                reciprocal_ranks.append(1.0 / position)
                break
    if not reciprocal_ranks:
        raise ValueError("no ranking contains a relevant item; MRR is undefined")
    return sum(reciprocal_ranks) / len(reciprocal_ranks)


def dcg(ranking: Sequence[int], k: Optional[int] = None) -> float:
    """Discounted cumulative gain with (2^rel - 1) gains."""
    cutoff = len(ranking) if k is None else min(k, len(ranking))
    return sum(
        (2 ** ranking[i] - 1) / math.log2(i + 2) for i in range(cutoff)
    )


def ndcg(ranking: Sequence[int], k: Optional[int] = None) -> float:
    """DCG normalized by the ideal ordering's DCG; full list by default."""
    if not ranking:
        raise ValueError("empty ranking list")
    ideal = sorted(ranking, reverse=True)
    denominator = dcg(ideal, k)
    if denominator == 0.0:
        raise ValueError("no relevant item in ranking; NDCG is undefined")
    return dcg(ranking, k) / denominator


class ClassificationReport(NamedTuple):
    accuracy: float
    macro_f1: float
    per_class: dict[Hashable, tuple[float, float, float]]


def classification_metrics(
    gold: Sequence[Hashable],
    pred: Sequence[Hashable],
    labels: Optional[Sequence[Hashable]] = None,
) -> ClassificationReport:
    """Accuracy, macro-F1, and per-class precision/recall/F1.

    ``labels`` fixes the class universe (classes absent from both gold and
    pred then contribute F1 = 0 to the macro average); by default the
    universe is whatever appears in gold or pred.
    """
    if len(gold) != len(pred):
        raise ValueError(f"gold and pred differ in length: {len(gold)} vs {len(pred)}")
    if not gold:
        raise ValueError("empty input")
    if labels is None:
        labels = sorted(set(gold) | set(pred), key=str)
    correct = sum(1 for g, p in zip(gold, pred) if g == p)
    per_class: dict[Hashable, tuple[float, float, float]] = {}
    f1_sum = 0.0
    for label in labels:
        tp = sum(1 for g, p in zip(gold, pred) if g == label and p == label)
        fp = sum(1 for g, p in zip(gold, pred) if g != label and p == label)
        fn = sum(1 for g, p in zip(gold, pred) if g == label and p != label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = (precision, recall, f1)
        f1_sum += f1
    return ClassificationReport(
        accuracy=correct / len(gold),
        macro_f1=f1_sum / len(labels),
        per_class=per_class,
    )


def cohen_kappa(ann1: Sequence[Hashable], ann2: Sequence[Hashable]) -> float:
    """Chance-corrected agreement between two annotators.

    Expected agreement comes from the product of the label marginals. The
    degenerate case p_e = 1 (both annotators constant and identical) returns
    1.0 when observed agreement is perfect.
    """
    if len(ann1) != len(ann2):
        raise ValueError(f"annotations differ in length: {len(ann1)} vs {len(ann2)}")
    if not ann1:
        raise ValueError("empty annotations")
    n = len(ann1)
    observed = sum(1 for a, b in zip(ann1, ann2) if a == b) / n
    labels = set(ann1) | set(ann2)
    expected = 0.0
    for label in labels:
        p1 = sum(1 for a in ann1 if a == label) / n
        p2 = sum(1 for b in ann2 if b == label) / n
        expected += p1 * p2
    if expected == 1.0:
        if observed == 1.0:
            return 1.0
        raise ValueError("degenerate marginals (p_e = 1) with disagreement")
    return (observed - expected) / (1.0 - expected)


class TTestResult(NamedTuple):
    t: float
    df: float
    p: float


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> TTestResult:
    """Welch's unequal-variance two-sample t-test, two-sided p.

    When both samples are constant the statistic is undefined; by convention
    equal means give (t=0, p=1) and unequal means (t=+/-inf, p=0).
    """
    n1, n2 = len(sample_a), len(sample_b)
    if n1 < 2 or n2 < 2:
        raise ValueError("each sample needs at least 2 observations")
    mean1 = sum(sample_a) / n1
    mean2 = sum(sample_b) / n2
    var1 = sum((x - mean1) ** 2 for x in sample_a) / (n1 - 1)
    var2 = sum((x - mean2) ** 2 for x in sample_b) / (n2 - 1)
    if var1 == 0.0 and var2 == 0.0:
        if mean1 == mean2:
            return TTestResult(0.0, float(n1 + n2 - 2), 1.0)
        return TTestResult(math.copysign(math.inf, mean1 - mean2),
                           float(n1 + n2 - 2), 0.0)
    se1 = var1 / n1
    se2 = var2 / n2
    t = (mean1 - mean2) / math.sqrt(se1 + se2)
    df = (se1 + se2) ** 2 / (se1**2 / (n1 - 1) + se2**2 / (n2 - 1))
    # Two-sided p through the regularized incomplete beta function:
    # P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2) for Student's t.
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TTestResult(t, df, p)


def bonferroni(p: float, n_comparisons: int) -> float:
    """Multiply by the comparison count, capped at 1."""
    if n_comparisons < 1:
        raise ValueError("n_comparisons must be >= 1")
    return min(1.0, p * n_comparisons)
