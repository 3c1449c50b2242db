"""Lexical resources behind the sentiment, discourse, and style features.

All lexicons match on lowercase raw word forms (no stemming). Lookups are
total: an absent word yields an explicit empty result, never an error.
Loaded bundles are immutable and safe to share across workers.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "LexiconError",
    "PolarityLexicon",
    "CategoryLexicon",
    "NormsLexicon",
    "NormScores",
    "ConnectiveLexicon",
    "EmbeddingTable",
    "WordList",
    "ResourceBundle",
    "load_resource_bundle",
    "match_connectives",
    "DEFAULT_CATEGORY_UNIVERSE",
]

POLARITIES = ("positive", "negative", "neutral")

# General Inquirer category subset used by the sentiment features.
DEFAULT_CATEGORY_UNIVERSE = frozenset(
    {
        "Strong",
        "Weak",
        "Virtue",
        "Vice",
        "Ovrst",
        "Undrst",
        "Academ",
        "Doctrin",
        "Econ",
        "Relig",
        "Causal",
        "Ought",
        "Perceiv",
    }
)


class LexiconError(ValueError):
    """Raised when a resource file cannot be parsed."""


@dataclass(frozen=True)
class PolarityLexicon:
    entries: Mapping[str, str]

    def polarity(self, word: str) -> Optional[str]:
        return self.entries.get(word.lower())

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class CategoryLexicon:
    entries: Mapping[str, frozenset[str]]
    universe: frozenset[str] = DEFAULT_CATEGORY_UNIVERSE

    def categories(self, word: str) -> frozenset[str]:
        return self.entries.get(word.lower(), frozenset())

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class NormScores:
    concreteness: Optional[float] = None
    valence: Optional[float] = None
    arousal: Optional[float] = None
    dominance: Optional[float] = None


# (field name, inclusive range) for validation at load time.
NORM_RANGES: tuple[tuple[str, tuple[float, float]], ...] = (
    ("concreteness", (1.0, 5.0)),
    ("valence", (1.0, 9.0)),
    ("arousal", (1.0, 9.0)),
    ("dominance", (1.0, 9.0)),
)


@dataclass(frozen=True)
class NormsLexicon:
    entries: Mapping[str, NormScores]

    def scores(self, word: str) -> Optional[NormScores]:
        return self.entries.get(word.lower())

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ConnectiveLexicon:
    """Multiword discourse connectives with their top two sense levels.

    A phrase carrying several senses in the source file is matched once per
    occurrence; the lexicographically smallest (level1, level2) pair is the
    sense reported, which keeps matching independent of file order.
    """

    phrases: Mapping[tuple[str, ...], tuple[str, str]]
    max_len: int = 1

    def __len__(self) -> int:
        return len(self.phrases)


@dataclass(frozen=True)
class EmbeddingTable:
    dimension: int
    vectors: Mapping[str, np.ndarray]

    def vector(self, word: str) -> Optional[np.ndarray]:
        return self.vectors.get(word.lower())

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class WordList:
    words: frozenset[str]

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.words

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class ResourceBundle:
    """All lexical resources, each either loaded or explicitly absent (None)."""

    polarity: Optional[PolarityLexicon] = None
    categories: Optional[CategoryLexicon] = None
    norms: Optional[NormsLexicon] = None
    connectives: Optional[ConnectiveLexicon] = None
    embeddings: Optional[EmbeddingTable] = None
    hedges: Optional[WordList] = None

    def describe(self) -> dict[str, Optional[int]]:
        """Per-resource entry counts; None marks an absent resource."""
        return {
            name: (len(value) if value is not None else None)
            for name, value in (
                ("polarity", self.polarity),
                ("categories", self.categories),
                ("norms", self.norms),
                ("connectives", self.connectives),
                ("embeddings", self.embeddings),
                ("hedges", self.hedges),
            )
        }


# --------------------------------------------------------------------------
# Parsers, one per file format
# --------------------------------------------------------------------------


def _data_lines(path: Path) -> list[tuple[int, str]]:
    lines = []
    with path.open(encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            lines.append((lineno, line))
    if not lines:
        raise LexiconError(f"{path}: empty lexicon file")
    return lines


def load_polarity(path: str | Path) -> PolarityLexicon:
    """TSV: word<TAB>positive|negative|neutral."""
    path = Path(path)
    entries: dict[str, str] = {}
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"{path}:{lineno}: expected 'word<TAB>polarity'")
        word, polarity = parts[0].strip().lower(), parts[1].strip()
        if polarity not in POLARITIES:
            raise LexiconError(
                f"{path}:{lineno}: polarity {polarity!r} not in {POLARITIES}"
            )
        entries[word] = polarity
    return PolarityLexicon(entries=entries)


def load_categories(path: str | Path,
                    universe: frozenset[str] = DEFAULT_CATEGORY_UNIVERSE) -> CategoryLexicon:
    """TSV: word<TAB>CategoryTag, one tag per line, repeated words allowed."""
    path = Path(path)
    entries: dict[str, set[str]] = {}
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"{path}:{lineno}: expected 'word<TAB>Category'")
        word, tag = parts[0].strip().lower(), parts[1].strip()
        if tag not in universe:
            raise LexiconError(
                f"{path}:{lineno}: category {tag!r} outside the declared universe"
            )
        entries.setdefault(word, set()).add(tag)
    return CategoryLexicon(
        entries={w: frozenset(tags) for w, tags in entries.items()}, universe=universe
    )


def load_norms(path: str | Path) -> NormsLexicon:
    """CSV with header word,concreteness,valence,arousal,dominance."""
    path = Path(path)
    entries: dict[str, NormScores] = {}
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        expected = ["word", "concreteness", "valence", "arousal", "dominance"]
        if reader.fieldnames != expected:
            raise LexiconError(f"{path}:1: header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            word = (row["word"] or "").strip().lower()
            if not word:
                raise LexiconError(f"{path}:{lineno}: empty word")
            values = {}
            for name, (lo, hi) in NORM_RANGES:
                cell = (row[name] or "").strip()
                if not cell:
                    values[name] = None
                    continue
                try:
                    score = float(cell)
                except ValueError:
                    raise LexiconError(
                        f"{path}:{lineno}: {name} value {cell!r} is not a number"
                    ) from None
                if not lo <= score <= hi:
                    raise LexiconError(
                        f"{path}:{lineno}: {name}={score} outside [{lo}, {hi}]"
                    )
                values[name] = score
            entries[word] = NormScores(**values)
    if not entries:
        raise LexiconError(f"{path}: empty lexicon file")
    return NormsLexicon(entries=entries)


def load_connectives(path: str | Path) -> ConnectiveLexicon:
    """TSV: phrase<TAB>Level1<TAB>Level2, phrase space-separated."""
    path = Path(path)
    senses: dict[tuple[str, ...], set[tuple[str, str]]] = {}
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise LexiconError(f"{path}:{lineno}: expected 'phrase<TAB>Level1<TAB>Level2'")
        words = tuple(w.lower() for w in parts[0].split())
        if not words:
            raise LexiconError(f"{path}:{lineno}: empty connective phrase")
        sense = (parts[1].strip(), parts[2].strip())
        if sense in senses.get(words, set()):
            raise LexiconError(
                f"{path}:{lineno}: duplicate entry for phrase {' '.join(words)!r} "
                f"with sense {sense}"
            )
        senses.setdefault(words, set()).add(sense)
    phrases = {words: min(pairs) for words, pairs in senses.items()}
    return ConnectiveLexicon(
        phrases=phrases, max_len=max(len(w) for w in phrases)
    )


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Text vectors: optional 'count dim' first line, then 'word v1 ... vd'."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dimension: Optional[int] = None
    lines = _data_lines(path)
    start = 0
    first = lines[0][1].split()
    if len(first) == 2:
        try:
            int(first[0]), int(first[1])
            start = 1
        except ValueError:
            pass
    if start == len(lines):
        raise LexiconError(f"{path}: no vector rows after the header")
    for lineno, line in lines[start:]:
        parts = line.split()
        if len(parts) < 2:
            raise LexiconError(f"{path}:{lineno}: expected 'word v1 ... vd'")
        word = parts[0].lower()
        try:
            vec = np.asarray([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError:
            raise LexiconError(f"{path}:{lineno}: non-numeric vector component") from None
        if dimension is None:
            dimension = vec.shape[0]
        elif vec.shape[0] != dimension:
            raise LexiconError(
                f"{path}:{lineno}: vector of length {vec.shape[0]} in a "
                f"{dimension}-dimensional table"
            )
        vec.setflags(write=False)
        vectors[word] = vec
    assert dimension is not None
    return EmbeddingTable(dimension=dimension, vectors=vectors)


def load_word_list(path: str | Path) -> WordList:
    """One word per line."""
    path = Path(path)
    words = set()
    for lineno, line in _data_lines(path):
        word = line.strip().lower()
        if " " in word or "\t" in word:
            raise LexiconError(f"{path}:{lineno}: expected a single word per line")
        words.add(word)
    return WordList(words=frozenset(words))


_LOADERS = {
    "polarity": load_polarity,
    "categories": load_categories,
    "norms": load_norms,
    "connectives": load_connectives,
    "embeddings": load_embeddings,
    "hedges": load_word_list,
}


def load_resource_bundle(config: Mapping[str, str | Path]) -> ResourceBundle:
    """Load every configured lexicon; unconfigured ones are marked absent.

    Features backed by an absent resource are disabled downstream; a warning
    is logged here so the omission is visible in the run log.
    """
    unknown = set(config) - set(_LOADERS)
    if unknown:
        raise LexiconError(f"unknown resource names in config: {sorted(unknown)}")
    loaded: dict[str, object] = {}
    for name, loader in _LOADERS.items():
        path = config.get(name)
        if path is None:
            logger.warning("resource %r not configured; dependent features disabled", name)
            continue
        path = Path(path)
        if not path.exists():
            raise LexiconError(f"resource {name!r}: file not found: {path}")
        loaded[name] = loader(path)
        logger.info("loaded %s: %d entries", name, len(loaded[name]))  # type: ignore[arg-type]
    return ResourceBundle(**loaded)  # type: ignore[arg-type]


# --------------------------------------------------------------------------
# Connective matching
# --------------------------------------------------------------------------


def match_connectives(
    tokens: Sequence[str], lexicon: ConnectiveLexicon
) -> list[tuple[int, int, str, str]]:
    """Greedy left-to-right longest match of connective phrases.

    Returns (start, end, level1, level2) half-open spans over ``tokens``.
    At each offset the longest lexicon phrase starting there wins and the
    scan resumes after it, so spans never overlap.
    """
    lowered = [t.lower() for t in tokens]
    matches: list[tuple[int, int, str, str]] = []
    i = 0
    n = len(lowered)
    while i < n:
        best_len = 0
        best_sense: Optional[tuple[str, str]] = None
        limit = min(lexicon.max_len, n - i)
        for length in range(limit, 0, -1):
            sense = lexicon.phrases.get(tuple(lowered[i : i + length]))
            if sense is not None:
                best_len = length
                best_sense = sense
                break
        if best_sense is not None:
            matches.append((i, i + best_len, best_sense[0], best_sense[1]))
            i += best_len
        else:
            i += 1
    return matches
