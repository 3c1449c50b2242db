"""Data model for claims, citation articles, and annotated sentences.

The corpus arrives as UTF-8 JSON Lines, one record per (claim, article)
pair. Sentences carry precomputed POS / named-entity / dependency tags;
no tagging happens here. Everything is immutable after loading so corpora
can be shared freely across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

__all__ = [
    "ArgumentType",
    "ARGUMENT_TYPES",
    "NE_TAGS",
    "Token",
    "AnnotatedSentence",
    "Claim",
    "QueryGroup",
    "Corpus",
    "CorpusError",
    "StatsReport",
    "load_corpus",
    "save_corpus",
    "corpus_stats",
    "split_folds",
]


class ArgumentType(Enum):
    """Four-way tag for what kind of support a sentence provides.

    Declaration order is the canonical order used for deterministic
    tie-breaking everywhere (study < factual < opinion < reasoning).
    """

    STUDY = "study"
    FACTUAL = "factual"
    OPINION = "opinion"
    REASONING = "reasoning"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_string(cls, value: str) -> "ArgumentType":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(
                f"unknown argument type {value!r}; expected one of "
                f"{[t.value for t in cls]}"
            ) from None


ARGUMENT_TYPES: tuple[ArgumentType, ...] = tuple(ArgumentType)

# The seven MUC named-entity types plus the outside tag.
NE_TAGS = frozenset(
    {"PERSON", "LOCATION", "ORGANIZATION", "DATE", "TIME", "MONEY", "PERCENT", "O"}
)


class CorpusError(ValueError):
    """Raised for unreadable, malformed, or invariant-violating corpus data."""


@dataclass(frozen=True)
class Token:
    text: str
    pos: str
    ne: str = "O"
    dep: str = ""


@dataclass(frozen=True)
class AnnotatedSentence:
    """One candidate sentence with its annotations.

    ``relevance`` is 1 when the sentence is a supporting argument for the
    group's claim. ``gold_type`` may only be present on relevant sentences;
    ``predicted_type`` is filled later by the type classifier.
    """

    index: int
    text: str
    tokens: tuple[Token, ...]
    relevance: int
    gold_type: Optional[ArgumentType] = None
    predicted_type: Optional[ArgumentType] = None

    def words(self) -> list[str]:
        """Lowercased token texts, the unit all lexical matching runs on."""
        return [t.text.lower() for t in self.tokens]

    def with_predicted_type(self, t: ArgumentType) -> "AnnotatedSentence":
        return replace(self, predicted_type=t)

    @property
    def effective_type(self) -> Optional[ArgumentType]:
        """Predicted type when set, falling back to the gold annotation."""
        return self.predicted_type if self.predicted_type is not None else self.gold_type


@dataclass(frozen=True)
class Claim:
    debate_id: str
    claim_id: str
    topic_text: str
    claim_text: str
    claim_tokens: tuple[Token, ...]

    def words(self) -> list[str]:
        return [t.text.lower() for t in self.claim_tokens]


@dataclass(frozen=True)
class QueryGroup:
    """One claim paired with one citation article's candidate sentences.

    This is the ranking unit: sentences are ranked by how well they support
    the claim. It is also the unit carried into cross-validation folds.
    """

    claim: Claim
    article_id: str
    sentences: tuple[AnnotatedSentence, ...]

    @property
    def key(self) -> tuple[str, str]:
        return (self.claim.claim_id, self.article_id)

    def relevance_labels(self) -> list[int]:
        return [s.relevance for s in self.sentences]

    def n_relevant(self) -> int:
        return sum(s.relevance for s in self.sentences)


@dataclass(frozen=True)
class Corpus:
    groups: tuple[QueryGroup, ...]

    def __len__(self) -> int:
        return len(self.groups)

    def __iter__(self) -> Iterator[QueryGroup]:
        return iter(self.groups)

    def sentences(self) -> Iterator[tuple[QueryGroup, AnnotatedSentence]]:
        for group in self.groups:
            for sentence in group.sentences:
                yield group, sentence

    def debate_ids(self) -> list[str]:
        """Distinct debate ids in first-seen order."""
        seen: dict[str, None] = {}
        for group in self.groups:
            seen.setdefault(group.claim.debate_id, None)
        return list(seen)

    def find_groups(self, claim_id: str, article_id: Optional[str] = None) -> list[QueryGroup]:
        return [
            g
            for g in self.groups
            if g.claim.claim_id == claim_id
            and (article_id is None or g.article_id == article_id)
        ]


# --------------------------------------------------------------------------
# Loading and saving
# --------------------------------------------------------------------------

_TOKEN_KEYS = {"text", "pos", "ne", "dep"}
_SENTENCE_KEYS = {"index", "text", "tokens", "relevance", "gold_type"}
_RECORD_KEYS = {
    "debate_id",
    "claim_id",
    "topic_text",
    "claim_text",
    "claim_tokens",
    "article_id",
    "sentences",
}


def _check_keys(obj: dict, allowed: set[str], where: str, strict: bool,
                warnings: list[str]) -> None:
    unknown = set(obj) - allowed
    if unknown:
        msg = f"{where}: unknown keys {sorted(unknown)}"
        if strict:
            raise CorpusError(msg)
        warnings.append(msg)


def _parse_token(obj: dict, where: str, strict: bool, warnings: list[str]) -> Token:
    if not isinstance(obj, dict):
        raise CorpusError(f"{where}: token must be an object, got {type(obj).__name__}")
    _check_keys(obj, _TOKEN_KEYS, where, strict, warnings)
    try:
        text = obj["text"]
        pos = obj["pos"]
    except KeyError as e:
        raise CorpusError(f"{where}: token missing field {e.args[0]!r}") from None
    if not isinstance(text, str) or not text:
        raise CorpusError(f"{where}: token text must be a non-empty string")
    ne = obj.get("ne", "O")
    if ne not in NE_TAGS:
        raise CorpusError(f"{where}: bad ne tag {ne!r}; expected one of {sorted(NE_TAGS)}")
    return Token(text=text, pos=str(pos), ne=ne, dep=str(obj.get("dep", "")))


def _parse_sentence(obj: dict, where: str, strict: bool, warnings: list[str]) -> AnnotatedSentence:
    _check_keys(obj, _SENTENCE_KEYS, where, strict, warnings)
    for key in ("index", "text", "tokens", "relevance"):
        if key not in obj:
            raise CorpusError(f"{where}: sentence missing field {key!r}")
    index = obj["index"]
    if not isinstance(index, int) or index < 0:
        raise CorpusError(f"{where}: sentence index must be a non-negative integer")
    relevance = obj["relevance"]
    if relevance not in (0, 1):
        raise CorpusError(f"{where}: relevance must be 0 or 1, got {relevance!r}")
    tokens = tuple(
        _parse_token(t, f"{where} token {i}", strict, warnings)
        for i, t in enumerate(obj["tokens"])
    )
    text = str(obj["text"])
    if text and not tokens:
        raise CorpusError(f"{where}: non-empty sentence text with zero tokens")
    if not tokens:
        raise CorpusError(f"{where}: sentence has no tokens")
    gold_raw = obj.get("gold_type")
    gold_type = None
    if gold_raw is not None:
        try:
            gold_type = ArgumentType.from_string(gold_raw)
        except ValueError as e:
            raise CorpusError(f"{where}: {e}") from None
        if relevance != 1:
            raise CorpusError(
                f"{where}: gold_type {gold_raw!r} on a sentence with relevance 0"
            )
    return AnnotatedSentence(
        index=index, text=text, tokens=tokens, relevance=relevance, gold_type=gold_type
    )


def _parse_record(obj: dict, where: str, strict: bool, warnings: list[str]) -> QueryGroup:
    if not isinstance(obj, dict):
        raise CorpusError(f"{where}: record must be a JSON object")
    _check_keys(obj, _RECORD_KEYS, where, strict, warnings)
    for key in _RECORD_KEYS:
        if key not in obj:
            raise CorpusError(f"{where}: missing field {key!r}")
    claim_tokens = tuple(
        _parse_token(t, f"{where} claim token {i}", strict, warnings)
        for i, t in enumerate(obj["claim_tokens"])
    )
    if not claim_tokens:
        raise CorpusError(f"{where}: claim_tokens must be non-empty")
    claim = Claim(
        debate_id=str(obj["debate_id"]),
        claim_id=str(obj["claim_id"]),
        topic_text=str(obj["topic_text"]),
        claim_text=str(obj["claim_text"]),
        claim_tokens=claim_tokens,
    )
    raw_sentences = obj["sentences"]
    if not isinstance(raw_sentences, list) or not raw_sentences:
        raise CorpusError(f"{where}: sentences must be a non-empty list")
    sentences = tuple(
        _parse_sentence(s, f"{where} sentence {i}", strict, warnings)
        for i, s in enumerate(raw_sentences)
    )
    for expected, sentence in enumerate(sentences):
        if sentence.index != expected:
            raise CorpusError(
                f"{where}: index gap, sentence at position {expected} "
                f"has index {sentence.index}"
            )
    return QueryGroup(claim=claim, article_id=str(obj["article_id"]), sentences=sentences)


def load_corpus(path: str | Path, strict: bool = True,
                warnings: Optional[list[str]] = None) -> Corpus:
    """Load and validate a JSON Lines corpus file.

    In strict mode (default) unknown keys are rejected; in lenient mode they
    are ignored and a note is appended to ``warnings`` when a list is given.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    collected: list[str] = warnings if warnings is not None else []
    groups: list[QueryGroup] = []
    seen_keys: dict[tuple[str, str], int] = {}
    claim_identity: dict[str, tuple[str, str, str]] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            where = f"{path.name}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{where}: invalid JSON ({e.msg})") from None
            group = _parse_record(obj, where, strict, collected)
            if group.key in seen_keys:
                raise CorpusError(
                    f"{where}: duplicate (claim_id, article_id) pair "
                    f"{group.key}, first seen on line {seen_keys[group.key]}"
                )
            seen_keys[group.key] = lineno
            identity = (group.claim.debate_id, group.claim.topic_text, group.claim.claim_text)
            prior = claim_identity.setdefault(group.claim.claim_id, identity)
            if prior != identity:
                raise CorpusError(
                    f"{where}: claim_id {group.claim.claim_id!r} reused with "
                    f"different debate/topic/claim text"
                )
            groups.append(group)
    return Corpus(groups=tuple(groups))


def _token_to_dict(token: Token) -> dict:
    return {"text": token.text, "pos": token.pos, "ne": token.ne, "dep": token.dep}


def group_to_record(group: QueryGroup) -> dict:
    """The JSON-serializable record for one (claim, article) group."""
    return {
        "debate_id": group.claim.debate_id,
        "claim_id": group.claim.claim_id,
        "topic_text": group.claim.topic_text,
        "claim_text": group.claim.claim_text,
        "claim_tokens": [_token_to_dict(t) for t in group.claim.claim_tokens],
        "article_id": group.article_id,
        "sentences": [
            {
                "index": s.index,
                "text": s.text,
                "tokens": [_token_to_dict(t) for t in s.tokens],
                "relevance": s.relevance,
                "gold_type": s.gold_type.value if s.gold_type is not None else None,
            }
            for s in group.sentences
        ],
    }


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out as JSON Lines (predicted types are not persisted)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for group in corpus.groups:
            handle.write(json.dumps(group_to_record(group), ensure_ascii=False))
            handle.write("\n")


# --------------------------------------------------------------------------
# Statistics and fold splitting
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StatsReport:
    n_groups: int
    n_sentences: int
    n_supporting: int
    n_debates: int
    type_counts: dict[ArgumentType, int] = field(default_factory=dict)

    @property
    def n_typed(self) -> int:
        return sum(self.type_counts.values())

    def type_percentages(self) -> dict[ArgumentType, float]:
        """Share of each type among typed supporting sentences, in percent."""
        total = self.n_typed
        if total == 0:
            return {t: 0.0 for t in ARGUMENT_TYPES}
        return {t: 100.0 * self.type_counts.get(t, 0) / total for t in ARGUMENT_TYPES}

    def format_text(self) -> str:
        lines = [
            f"groups               {self.n_groups}",
            f"debates              {self.n_debates}",
            f"sentences            {self.n_sentences}",
            f"supporting arguments {self.n_supporting}",
        ]
        pct = self.type_percentages()
        for t in ARGUMENT_TYPES:
            lines.append(
                f"  {t.value:<10} {self.type_counts.get(t, 0):>6}  ({pct[t]:.2f}%)"
            )
        untyped = self.n_supporting - self.n_typed
        if untyped:
            lines.append(f"  (untyped)  {untyped:>6}")
        return "\n".join(lines)


def corpus_stats(corpus: Corpus) -> StatsReport:
    """Counts of groups, sentences, supporting arguments, and types.

    Type percentages are taken over typed supporting sentences so the four
    shares always sum to 100 when any type annotation exists.
    """
    type_counts = {t: 0 for t in ARGUMENT_TYPES}
    n_sentences = 0
    n_supporting = 0
    for _, sentence in corpus.sentences():
        n_sentences += 1
        if sentence.relevance == 1:
            n_supporting += 1
            if sentence.gold_type is not None:
                type_counts[sentence.gold_type] += 1
    return StatsReport(
        n_groups=len(corpus.groups),
        n_sentences=n_sentences,
        n_supporting=n_supporting,
        n_debates=len(corpus.debate_ids()),
        type_counts=type_counts,
    )


def split_folds(corpus: Corpus, k: int, seed: int) -> list[tuple[Corpus, Corpus]]:
    """Partition the corpus into k (train, test) pairs by debate.

    All groups sharing a debate_id land in the same fold, so claims from one
    debate never appear on both sides of a split. Assignment is a seeded
    permutation of the sorted debate ids chopped into k nearly equal chunks.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    debates = sorted(set(g.claim.debate_id for g in corpus.groups))
    if len(debates) < k:
        raise ValueError(
            f"cannot make {k} folds from {len(debates)} distinct debates"
        )
    rng = np.random.default_rng(seed)
    order = [debates[i] for i in rng.permutation(len(debates))]
    chunks = np.array_split(np.arange(len(order)), k)
    folds: list[tuple[Corpus, Corpus]] = []
    for chunk in chunks:
        test_debates = {order[i] for i in chunk}
        test = tuple(g for g in corpus.groups if g.claim.debate_id in test_debates)
        train = tuple(g for g in corpus.groups if g.claim.debate_id not in test_debates)
        folds.append((Corpus(groups=train), Corpus(groups=test)))
    return folds


def merge_corpora(parts: Iterable[Corpus]) -> Corpus:
    groups: list[QueryGroup] = []
    for part in parts:
        groups.extend(part.groups)
    return Corpus(groups=tuple(groups))
