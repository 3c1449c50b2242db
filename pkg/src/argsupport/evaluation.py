"""Evaluation reports: ranking quality, classification, and significance.

Re-exports the plain statistics from :mod:`argsupport.metrics` so this
module is the single import surface for evaluation work.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .corpus import ARGUMENT_TYPES, ArgumentType, Corpus
from .features import value_of
from .metrics import (
    ClassificationReport,
    TTestResult,
    bonferroni,
    classification_metrics,
    cohen_kappa,
    dcg,
    mrr,
    ndcg,
    welch_t_test,
)

__all__ = [
    "mrr",
    "dcg",
    "ndcg",
    "classification_metrics",
    "ClassificationReport",
    "cohen_kappa",
    "welch_t_test",
    "TTestResult",
    "bonferroni",
    "RankingResult",
    "ranking_result",
    "SignificanceCell",
    "SignificanceReport",
    "significance_from_records",
    "feature_significance_report",
]


# --------------------------------------------------------------------------
# Ranking results
# --------------------------------------------------------------------------


@dataclass
class RankingResult:
    """Per-claim rankings and their pooled MRR / NDCG.

    Claims without any relevant sentence are undefined under both metrics;
    they are kept in ``rankings`` but excluded from the means, and their
    count is reported separately.
    """

    name: str
    rankings: dict[tuple[str, str], list[int]]
    per_claim: dict[tuple[str, str], Optional[tuple[float, float]]]
    ndcg_k: Optional[int] = None

    @property
    def n_claims(self) -> int:
        return len(self.rankings)

    @property
    def n_scored(self) -> int:
        return sum(1 for v in self.per_claim.values() if v is not None)

    @property
    def mean_mrr(self) -> float:
        scored = [v[0] for v in self.per_claim.values() if v is not None]
        if not scored:
            raise ValueError(f"{self.name}: no claim with a relevant sentence")
        return sum(scored) / len(scored)

    @property
    def mean_ndcg(self) -> float:
        scored = [v[1] for v in self.per_claim.values() if v is not None]
        if not scored:
            raise ValueError(f"{self.name}: no claim with a relevant sentence")
        return sum(scored) / len(scored)

    def display_row(self) -> str:
        return (
            f"{self.name:<18} {100 * self.mean_mrr:>6.2f} {100 * self.mean_ndcg:>6.2f}"
            f"   ({self.n_scored}/{self.n_claims} claims)"
        )


def ranking_result(
    name: str,
    entries: Sequence[tuple[tuple[str, str], Sequence[int]]],
    ndcg_k: Optional[int] = None,
) -> RankingResult:
    """Assemble a RankingResult from (group key, ranked relevance) pairs."""
    rankings: dict[tuple[str, str], list[int]] = {}
    per_claim: dict[tuple[str, str], Optional[tuple[float, float]]] = {}
    for key, ranked in entries:
        ranked = list(ranked)
        rankings[key] = ranked
        if any(ranked):
            rr = mrr([ranked])
            per_claim[key] = (rr, ndcg(ranked, ndcg_k))
        else:
            per_claim[key] = None
    return RankingResult(name=name, rankings=rankings, per_claim=per_claim,
                         ndcg_k=ndcg_k)


# --------------------------------------------------------------------------
# Feature-significance analysis
# --------------------------------------------------------------------------

_STAR_THRESHOLDS = (0.05, 1e-3, 1e-5, 1e-10)


@dataclass(frozen=True)
class SignificanceCell:
    feature: str
    type_: ArgumentType
    n_supporting: int
    n_other: int
    mean_supporting: float
    mean_other: float
    t: float
    p_raw: float
    p_corrected: float
    status: str  # "ok" or "insufficient data"

    @property
    def significant(self) -> bool:
        return self.status == "ok" and self.p_corrected <= 0.05

    @property
    def direction(self) -> str:
        if not self.significant:
            return ""
        return "up" if self.mean_supporting > self.mean_other else "down"

    @property
    def stars(self) -> int:
        if self.status != "ok":
            return 0
        return sum(1 for threshold in _STAR_THRESHOLDS if self.p_corrected <= threshold)

    @property
    def arrows(self) -> int:
        """Magnitude marker: the larger group mean over the smaller, capped at 4."""
        if not self.significant:
            return 0
        lo, hi = sorted((abs(self.mean_supporting), abs(self.mean_other)))
        if lo == 0.0:
            return 4
        return min(4, max(1, int(hi / lo)))

    def render(self) -> str:
        if self.status != "ok":
            return "n/a"
        if not self.significant:
            return "-"
        arrow = "^" if self.direction == "up" else "v"
        return "*" * self.stars + arrow * self.arrows


@dataclass
class SignificanceReport:
    cells: list[SignificanceCell]
    n_comparisons: int

    def cell(self, feature: str, type_: ArgumentType) -> Optional[SignificanceCell]:
        for cell in self.cells:
            if cell.feature == feature and cell.type_ is type_:
                return cell
        return None

    def features(self) -> list[str]:
        seen: dict[str, None] = {}
        for cell in self.cells:
            seen.setdefault(cell.feature, None)
        return list(seen)

    def format_text(self) -> str:
        features = self.features()
        width = max([len(f) for f in features] + [8])
        header = "feature".ljust(width) + "".join(
            f"  {t.value:>10}" for t in ARGUMENT_TYPES
        )
        lines = [header]
        for feature in features:
            row = feature.ljust(width)
            for t in ARGUMENT_TYPES:
                cell = self.cell(feature, t)
                row += f"  {(cell.render() if cell else ''):>10}"
            lines.append(row)
        lines.append(f"({self.n_comparisons} comparisons, Bonferroni-corrected)")
        return "\n".join(lines)

    def tsv_rows(self) -> list[list[str]]:
        rows = [[
            "feature", "type", "n_supporting", "n_other", "mean_supporting",
            "mean_other", "t", "p_raw", "p_corrected", "stars", "direction",
            "arrows", "status",
        ]]
        for c in self.cells:
            rows.append([
                c.feature, c.type_.value, str(c.n_supporting), str(c.n_other),
                f"{c.mean_supporting:.6g}", f"{c.mean_other:.6g}",
                f"{c.t:.6g}", f"{c.p_raw:.6g}", f"{c.p_corrected:.6g}",
                str(c.stars), c.direction or "-", str(c.arrows), c.status,
            ])
        return rows


def significance_from_records(
    records: Sequence[tuple[ArgumentType, int, Mapping[str, float]]],
    feature_names: Optional[Sequence[str]] = None,
    include_ngrams: bool = False,
) -> SignificanceReport:
    """Welch t-tests of each feature between supporting and other sentences,
    within each argument type, Bonferroni-corrected over all tested cells.

    ``records`` are (assigned type, relevance, feature vector) triples. By
    default ngram features are left out of the table; they swamp the
    correction and the display.
    """
    if feature_names is None:
        names: dict[str, None] = {}
        for _, _, fv in records:
            for name in fv:
                if include_ngrams or not name.startswith("ngr:"):
                    names.setdefault(name, None)
        feature_names = sorted(names)
    tested: list[tuple[str, ArgumentType, int, int, float, float, TTestResult]] = []
    skipped: list[tuple[str, ArgumentType, int, int]] = []
    for feature in feature_names:
        for t in ARGUMENT_TYPES:
            supporting = [
                value_of(fv, feature)
                for rec_type, rel, fv in records
                if rec_type is t and rel == 1
            ]
            other = [
                value_of(fv, feature)
                for rec_type, rel, fv in records
                if rec_type is t and rel == 0
            ]
            if len(supporting) < 2 or len(other) < 2:
                skipped.append((feature, t, len(supporting), len(other)))
                continue
            mean_sup = sum(supporting) / len(supporting)
            mean_oth = sum(other) / len(other)
            result = welch_t_test(supporting, other)
            tested.append(
                (feature, t, len(supporting), len(other), mean_sup, mean_oth, result)
            )
    n_comparisons = max(1, len(tested))
    cells = [
        SignificanceCell(
            feature=feature,
            type_=t,
            n_supporting=n_sup,
            n_other=n_oth,
            mean_supporting=mean_sup,
            mean_other=mean_oth,
            t=result.t,
            p_raw=result.p,
            p_corrected=bonferroni(result.p, n_comparisons),
            status="ok",
        )
        for feature, t, n_sup, n_oth, mean_sup, mean_oth, result in tested
    ]
    cells.extend(
        SignificanceCell(
            feature=feature, type_=t, n_supporting=n_sup, n_other=n_oth,
            mean_supporting=0.0, mean_other=0.0, t=0.0, p_raw=1.0,
            p_corrected=1.0, status="insufficient data",
        )
        for feature, t, n_sup, n_oth in skipped
    )
    cells.sort(key=lambda c: (c.feature, c.type_.value))
    return SignificanceReport(cells=cells, n_comparisons=n_comparisons)


def feature_significance_report(
    corpus: Corpus,
    featurize,
    feature_names: Optional[Sequence[str]] = None,
    include_ngrams: bool = False,
) -> SignificanceReport:
    """Corpus-level wrapper: ``featurize(group, sentence)`` supplies the
    feature vector and the sentence's assigned type drives the breakdown.

    Sentences without an assigned type are skipped.
    """
    records = []
    for group, sentence in corpus.sentences():
        assigned = sentence.effective_type
        if assigned is None:
            continue
        records.append((assigned, sentence.relevance, featurize(group, sentence)))
    if not records:
        raise ValueError("no typed sentences; run type annotation first")
    return significance_from_records(records, feature_names, include_ngrams)
