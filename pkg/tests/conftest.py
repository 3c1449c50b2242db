"""Shared builders for corpus objects and small lexicon files."""

from __future__ import annotations

from pathlib import Path

import pytest

from argsupport.corpus import (
    AnnotatedSentence,
    ArgumentType,
    Claim,
    Corpus,
    QueryGroup,
    Token,
)
from argsupport.lexicons import ResourceBundle, load_resource_bundle


def tok(text: str, pos: str = "OTHER", ne: str = "O", dep: str = "") -> Token:
    return Token(text=text, pos=pos, ne=ne, dep=dep)


def sent(index: int, words, relevance: int = 0, gold_type=None,
         tokens=None) -> AnnotatedSentence:
    if tokens is None:
        tokens = tuple(tok(w) for w in words)
    return AnnotatedSentence(
        index=index,
        text=" ".join(words),
        tokens=tuple(tokens),
        relevance=relevance,
        gold_type=gold_type,
    )


def make_claim(claim_id: str = "c1", debate_id: str = "d1",
               words=("gun", "control", "works")) -> Claim:
    return Claim(
        debate_id=debate_id,
        claim_id=claim_id,
        topic_text="topic",
        claim_text=" ".join(words),
        claim_tokens=tuple(tok(w, pos="NOUN") for w in words),
    )


def make_group(sentences, claim=None, article_id: str = "a1") -> QueryGroup:
    return QueryGroup(
        claim=claim or make_claim(),
        article_id=article_id,
        sentences=tuple(sentences),
    )


def make_corpus(*groups) -> Corpus:
    return Corpus(groups=tuple(groups))


@pytest.fixture
def tiny_bundle(tmp_path: Path) -> ResourceBundle:
    """A small but complete resource bundle on disk."""
    (tmp_path / "polarity.tsv").write_text(
        "good\tpositive\ngreat\tpositive\nbad\tnegative\nokay\tneutral\n",
        encoding="utf-8",
    )
    (tmp_path / "categories.tsv").write_text(
        "strong\tStrong\nweak\tWeak\nstudy\tAcadem\n", encoding="utf-8"
    )
    (tmp_path / "norms.csv").write_text(
        "word,concreteness,valence,arousal,dominance\n"
        "water,4.80,5.00,3.00,5.00\n"
        "idea,1.60,6.00,4.00,5.50\n"
        "harm,2.00,2.00,6.00,3.00\n",
        encoding="utf-8",
    )
    (tmp_path / "connectives.tsv").write_text(
        "as a result\tContingency\tCause\n"
        "as\tComparison\tConcession\n"
        "but\tComparison\tContrast\n"
        "because\tContingency\tCause\n",
        encoding="utf-8",
    )
    (tmp_path / "embeddings.txt").write_text(
        "3 2\ngun 1.0 0.0\ncontrol 0.0 1.0\nban 0.7071 0.7071\n",
        encoding="utf-8",
    )
    (tmp_path / "hedges.txt").write_text("may\nsuggest\nmight\n", encoding="utf-8")
    return load_resource_bundle(
        {
            "polarity": tmp_path / "polarity.tsv",
            "categories": tmp_path / "categories.tsv",
            "norms": tmp_path / "norms.csv",
            "connectives": tmp_path / "connectives.tsv",
            "embeddings": tmp_path / "embeddings.txt",
            "hedges": tmp_path / "hedges.txt",
        }
    )


@pytest.fixture
def empty_bundle() -> ResourceBundle:
    return ResourceBundle()
