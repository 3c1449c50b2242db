"""Synthetic corpora with planted, type-conditional relevance signals.

The generator builds debates, claims, and articles whose supporting
sentences are recognizable through cues that flip with the argument type,
so their marginal signal mostly cancels:

* claim overlap and hedging are high on supporting STUDY sentences but
  high on NON-supporting opinion sentences;
* position in the article marks supporting FACTUAL sentences (late) and
  supporting REASONING sentences (early), while non-supporting sentences
  of those types avoid exactly those regions;
* supporting reasoning sentences additionally pile up connectives, and a
  weak global length/concreteness cue helps every supporting sentence.

Argument types themselves are signalled by several weak marker words plus
type-correlated named entities, so the log-linear classifier can recover
them while no single ranker split can. That is exactly the regime where
type-composite features help, which the acceptance experiments rely on.

``python -m argsupport.synth OUTDIR`` writes a ready-to-run demo corpus
with its resource files.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import AnnotatedSentence, ArgumentType, Claim, Corpus, QueryGroup, Token

__all__ = ["SynthConfig", "generate_corpus", "write_resources", "write_demo"]


MARKERS: dict[ArgumentType, list[str]] = {
    ArgumentType.STUDY: [
        "survey", "poll", "estimate", "sample", "respondents", "finding",
        "trial", "cohort",
    ],
    ArgumentType.FACTUAL: [
        "statute", "census", "archive", "treaty", "ruling", "decree",
        "enacted", "recorded",
    ],
    ArgumentType.OPINION: [
        "argues", "believes", "contends", "asserts", "insists", "urges",
        "claims", "warns",
    ],
    ArgumentType.REASONING: [
        "implies", "entails", "premise", "deduce", "infer", "logically",
        "follows", "conclusion",
    ],
}

# All markers are plain nouns: the type must be read from the aggregate of
# several weak unigrams, not from any single concentrated feature.
NE_TAGS_POOL = ["PERSON", "LOCATION", "ORGANIZATION", "DATE", "TIME", "MONEY",
                "PERCENT"]

CONNECTIVES = [
    ("because", "Contingency", "Cause"),
    ("therefore", "Contingency", "Cause"),
    ("thus", "Contingency", "Cause"),
    ("but", "Comparison", "Contrast"),
    ("however", "Comparison", "Contrast"),
    ("as a result", "Contingency", "Cause"),
    ("in addition", "Expansion", "Conjunction"),
    ("for example", "Expansion", "Instantiation"),
]
CONNECTIVE_INSERTS = ["because", "therefore", "thus"]

HEDGES = ["may", "might", "suggest", "possibly", "perhaps", "likely",
          "appear", "indicate", "could", "seemingly"]

POSITIVE = ["good", "strong", "benefit", "improve", "safe", "effective"]
NEGATIVE = ["bad", "harm", "risk", "danger", "weak", "costly"]
NEUTRAL = ["state", "note", "cite", "mention"]

CONCRETE = ["building", "water", "stone", "machine", "road", "bridge",
            "engine", "metal", "farm", "tool"]
ABSTRACT = ["idea", "theory", "notion", "concept", "belief", "policy"]

FILLER = (
    "the of and to in a is that for on with as by at from it this be are was "
    "has have will would can people country public measure law rule group "
    "member question answer issue matter case point part number other new "
    "many much time year way place work life change support against"
).split()


@dataclass(frozen=True)
class SynthConfig:
    n_debates: int = 25
    claims_per_debate: int = 4
    sentences_per_article: int = 20
    n_relevant: int = 2
    seed: int = 7
    marker_purity: float = 0.75
    n_markers: int = 4
    embedding_dim: int = 16


def _topic_words(debate: int) -> list[str]:
    return [f"topic{debate}w{j}" for j in range(4)]


def _claim_words(debate: int, claim: int) -> list[str]:
    return [f"claim{debate}x{claim}w{j}" for j in range(3)]


def _token(word: str, pos: str = "OTHER", ne: str = "O", dep: str = "") -> Token:
    return Token(text=word, pos=pos, ne=ne, dep=dep)


def _draw_marker(rng: np.random.Generator, sentence_type: ArgumentType,
                 purity: float) -> str:
    if rng.random() < purity:
        pool_type = sentence_type
    else:
        pool_type = list(MARKERS)[rng.integers(0, 4)]
    pool = MARKERS[pool_type]
    return pool[rng.integers(0, len(pool))]


def _make_sentence(
    rng: np.random.Generator,
    config: SynthConfig,
    index: int,
    sentence_type: ArgumentType,
    relevant: bool,
    claim_content: list[str],
) -> AnnotatedSentence:
    tokens: list[Token] = []

    for _ in range(config.n_markers):
        word = _draw_marker(rng, sentence_type, config.marker_purity)
        tokens.append(_token(word, pos="NOUN", dep="nsubj"))

    # Named entities are pure noise here, uncorrelated with type or label.
    if rng.random() < 0.15:
        ne_tag = NE_TAGS_POOL[rng.integers(0, len(NE_TAGS_POOL))]
        tokens.append(_token(f"entity{rng.integers(0, 50)}", pos="NOUN", ne=ne_tag))

    # Claim overlap flips with the type: supporting study sentences quote the
    # claim heavily, while for opinion it is the NON-supporting ones that do,
    # so raw overlap carries almost no marginal signal.
    if sentence_type is ArgumentType.STUDY and relevant:
        n_overlap = 2 + int(rng.integers(0, 2))
    elif sentence_type is ArgumentType.OPINION and not relevant:
        n_overlap = 2 + int(rng.integers(0, 2))
    elif sentence_type is ArgumentType.OPINION and relevant:
        n_overlap = 0
    else:
        n_overlap = int(rng.integers(0, 2))
    n_overlap = min(n_overlap, len(claim_content))
    if n_overlap:
        picks = rng.choice(len(claim_content), size=n_overlap, replace=False)
        for j in picks:
            tokens.append(_token(claim_content[int(j)], pos="NOUN", dep="dobj"))

    # Connectives are label-independent noise; position carries the
    # reasoning-type signal instead.
    n_conn = int(rng.integers(0, 2))
    for _ in range(n_conn):
        word = CONNECTIVE_INSERTS[rng.integers(0, len(CONNECTIVE_INSERTS))]
        tokens.append(_token(word, pos="OTHER", dep="mark"))

    # Hedging flips: elevated on supporting study sentences, but also on a
    # share of the non-supporting opinion ones.
    n_hedge = 0
    if relevant and sentence_type is ArgumentType.STUDY:
        n_hedge = 1 + int(rng.integers(0, 2))
    elif not relevant and sentence_type is ArgumentType.OPINION and rng.random() < 0.3:
        n_hedge = 1 + int(rng.integers(0, 2))
    elif rng.random() < 0.2:
        n_hedge = 1
    for _ in range(n_hedge):
        tokens.append(_token(HEDGES[rng.integers(0, len(HEDGES))], pos="VERB"))

    # Weak global cues: a bit more concreteness and length when supporting.
    n_concrete = int(rng.integers(0, 4)) + (1 if relevant else 0)
    for _ in range(n_concrete):
        tokens.append(_token(CONCRETE[rng.integers(0, len(CONCRETE))], pos="NOUN"))
    if rng.random() < 0.5:
        tokens.append(_token(ABSTRACT[rng.integers(0, len(ABSTRACT))], pos="NOUN"))

    if rng.random() < 0.4:
        pool = POSITIVE if rng.random() < 0.5 else NEGATIVE
        tokens.append(_token(pool[rng.integers(0, len(pool))], pos="ADJ", dep="amod"))

    target_len = (14 + int(rng.integers(0, 8))) if relevant else (12 + int(rng.integers(0, 8)))
    while len(tokens) < target_len:
        word = FILLER[rng.integers(0, len(FILLER))]
        tokens.append(_token(word, pos="OTHER" if rng.random() < 0.7 else "NOUN"))

    order = rng.permutation(len(tokens))
    tokens = [tokens[i] for i in order]
    return AnnotatedSentence(
        index=index,
        text=" ".join(t.text for t in tokens),
        tokens=tuple(tokens),
        relevance=1 if relevant else 0,
        gold_type=sentence_type if relevant else None,
    )


def _relevant_position(rng: np.random.Generator, sentence_type: ArgumentType,
                       n_sentences: int) -> int:
    # Position is type-conditional: supporting factual sentences sit in the
    # last quarter, supporting reasoning in the first; study and opinion are
    # position-free.
    quarter = max(1, n_sentences // 4)
    if sentence_type is ArgumentType.FACTUAL:
        return int(rng.integers(n_sentences - quarter, n_sentences))
    if sentence_type is ArgumentType.REASONING:
        return int(rng.integers(0, quarter))
    return int(rng.integers(0, n_sentences))


def _nonrelevant_type(rng: np.random.Generator, index: int,
                      n_sentences: int) -> ArgumentType:
    # Keep the position rule two-sided: non-supporting factual sentences stay
    # out of the last quarter and non-supporting reasoning out of the first,
    # so position alone says nothing without the type.
    quarter = max(1, n_sentences // 4)
    types = list(ArgumentType)
    if index >= n_sentences - quarter:
        types.remove(ArgumentType.FACTUAL)
    if index < quarter:
        types.remove(ArgumentType.REASONING)
    return types[rng.integers(0, len(types))]


def generate_corpus(config: SynthConfig = SynthConfig()) -> Corpus:
    rng = np.random.default_rng(config.seed)
    groups: list[QueryGroup] = []
    for debate in range(config.n_debates):
        topic = _topic_words(debate)
        for claim_idx in range(config.claims_per_debate):
            claim_specific = _claim_words(debate, claim_idx)
            claim_content = topic[:2] + claim_specific
            claim_tokens = [_token(w, pos="NOUN") for w in claim_content]
            claim_tokens += [_token(w) for w in ("the", "measure", "should", "pass")]
            claim = Claim(
                debate_id=f"debate{debate}",
                claim_id=f"claim{debate}-{claim_idx}",
                topic_text=" ".join(topic),
                claim_text=" ".join(claim_content),
                claim_tokens=tuple(claim_tokens),
            )
            n = config.sentences_per_article
            relevant_slots: dict[int, ArgumentType] = {}
            while len(relevant_slots) < config.n_relevant:
                sentence_type = list(ArgumentType)[rng.integers(0, 4)]
                position = _relevant_position(rng, sentence_type, n)
                if position not in relevant_slots:
                    relevant_slots[position] = sentence_type
            sentences = []
            for index in range(n):
                if index in relevant_slots:
                    sentence_type = relevant_slots[index]
                    relevant = True
                else:
                    sentence_type = _nonrelevant_type(rng, index, n)
                    relevant = False
                sentences.append(
                    _make_sentence(rng, config, index, sentence_type, relevant,
                                   claim_content)
                )
            groups.append(
                QueryGroup(claim=claim, article_id=f"article{debate}-{claim_idx}",
                           sentences=tuple(sentences))
            )
    return Corpus(groups=tuple(groups))


# --------------------------------------------------------------------------
# Resource files matching the generated vocabulary
# --------------------------------------------------------------------------


def _embedding_vector(word: str, dim: int, seed: int) -> np.ndarray:
    word_seed = zlib.crc32(word.encode("utf-8")) ^ (seed & 0xFFFFFFFF)
    rng = np.random.default_rng(word_seed)
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def _full_vocabulary(config: SynthConfig) -> list[str]:
    words: set[str] = set(FILLER)
    for pool in MARKERS.values():
        words.update(pool)
    words.update(HEDGES + POSITIVE + NEGATIVE + NEUTRAL + CONCRETE + ABSTRACT)
    words.update(CONNECTIVE_INSERTS)
    words.update(w for phrase, _, _ in CONNECTIVES for w in phrase.split())
    words.update(("the", "measure", "should", "pass"))
    for debate in range(config.n_debates):
        words.update(_topic_words(debate))
        for claim_idx in range(config.claims_per_debate):
            words.update(_claim_words(debate, claim_idx))
    return sorted(words)


def write_resources(directory: str | Path,
                    config: SynthConfig = SynthConfig()) -> dict[str, str]:
    """Write lexicon files covering the generator's vocabulary.

    Returns a resource-path map suitable for load_resource_bundle.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths: dict[str, str] = {}

    polarity = directory / "polarity.tsv"
    with polarity.open("w", encoding="utf-8") as handle:
        for word in POSITIVE:
            handle.write(f"{word}\tpositive\n")
        for word in NEGATIVE:
            handle.write(f"{word}\tnegative\n")
        for word in NEUTRAL:
            handle.write(f"{word}\tneutral\n")
    paths["polarity"] = str(polarity)

    categories = directory / "categories.tsv"
    with categories.open("w", encoding="utf-8") as handle:
        for word in POSITIVE:
            handle.write(f"{word}\tVirtue\n")
        for word in NEGATIVE:
            handle.write(f"{word}\tVice\n")
        handle.write("strong\tStrong\nweak\tWeak\n")
    paths["categories"] = str(categories)

    norms = directory / "norms.csv"
    with norms.open("w", encoding="utf-8") as handle:
        handle.write("word,concreteness,valence,arousal,dominance\n")
        rng = np.random.default_rng(config.seed + 1)
        for word in CONCRETE:
            handle.write(
                f"{word},{4.2 + 0.8 * rng.random():.2f},"
                f"{4 + 2 * rng.random():.2f},{3 + 2 * rng.random():.2f},"
                f"{4 + 2 * rng.random():.2f}\n"
            )
        for word in ABSTRACT:
            handle.write(
                f"{word},{1.3 + 1.2 * rng.random():.2f},"
                f"{4 + 2 * rng.random():.2f},{3 + 2 * rng.random():.2f},"
                f"{4 + 2 * rng.random():.2f}\n"
            )
        for word in POSITIVE:
            handle.write(f"{word},2.50,{6.5 + rng.random():.2f},"
                         f"{5 + rng.random():.2f},{6 + rng.random():.2f}\n")
        for word in NEGATIVE:
            handle.write(f"{word},2.50,{1.5 + rng.random():.2f},"
                         f"{6 + rng.random():.2f},{3 + rng.random():.2f}\n")
    paths["norms"] = str(norms)

    connectives = directory / "connectives.tsv"
    with connectives.open("w", encoding="utf-8") as handle:
        for phrase, level1, level2 in CONNECTIVES:
            handle.write(f"{phrase}\t{level1}\t{level2}\n")
    paths["connectives"] = str(connectives)

    hedges = directory / "hedges.txt"
    hedges.write_text("\n".join(HEDGES) + "\n", encoding="utf-8")
    paths["hedges"] = str(hedges)

    embeddings = directory / "embeddings.txt"
    vocab = _full_vocabulary(config)
    with embeddings.open("w", encoding="utf-8") as handle:
        handle.write(f"{len(vocab)} {config.embedding_dim}\n")
        for word in vocab:
            vec = _embedding_vector(word, config.embedding_dim, config.seed)
            values = " ".join(f"{v:.6f}" for v in vec)
            handle.write(f"{word} {values}\n")
    paths["embeddings"] = str(embeddings)
    return paths


def write_demo(directory: str | Path, config: SynthConfig = SynthConfig()) -> None:
    """Write corpus.jsonl, resource files, and a run config for the CLI."""
    from .corpus import save_corpus

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    corpus = generate_corpus(config)
    save_corpus(corpus, directory / "corpus.jsonl")
    paths = write_resources(directory / "resources", config)
    # Paths are relative to the demo directory; run the CLI from inside it.
    run_config = {
        "corpus": "corpus.jsonl",
        "resources": {
            name: str(Path(path).relative_to(directory))
            for name, path in paths.items()
        },
        "seed": config.seed,
        "feature_sets": ["sen", "sen+ngr+simi", "full"],
        "ranker": {"n_trees": 40, "max_leaves": 6, "min_leaf": 10},
        "features": {"vocab_cap": 500},
    }
    (directory / "run_config.json").write_text(
        json.dumps(run_config, indent=2), encoding="utf-8"
    )


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "synth-demo"
    write_demo(target)
    print(f"demo corpus and resources written to {target}/")
