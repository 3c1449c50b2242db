"""Feature extraction: sentence, similarity, and type-composite features.

A feature vector is a plain dict from namespaced name to value. Zero-valued
entries are never stored; an absent name means 0. Namespaces:

    ngr:  unigram / bigram counts (training-fold vocabulary only)
    bas:  POS / dependency / named-entity counts and token length
    sen:  polarity, category, and hedging counts
    dis:  discourse connective counts
    sty:  psycholinguistic norm means and coverage
    pos:  sentence position in the article
    sim:  claim-sentence similarity metrics
    clm:  sentence-style features computed on the claim itself
    cmp:<type>:  composite copies gated on the argument type

Namespaces are disjoint across extractors, so merging never collides.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import AnnotatedSentence, ArgumentType, Claim, Corpus
from .lexicons import EmbeddingTable, ResourceBundle, match_connectives

__all__ = [
    "FeatureVector",
    "FeatureConfig",
    "IdfTable",
    "Vocabulary",
    "FEATURE_SETS",
    "build_ngram_vocabulary",
    "build_vocabulary_from_sentences",
    "build_idf_table",
    "extract_sentence_features",
    "extract_claim_features",
    "extract_similarity_features",
    "rouge_l",
    "bleu",
    "tfidf_cosine",
    "embedding_cosine",
    "compose_with_type",
    "assemble_instance",
    "assemble_from_base",
    "select_namespaces",
    "FeatureExtractor",
    "value_of",
    "merge_features",
    "format_instance_line",
    "parse_instance_line",
    "write_instances",
    "read_instances",
]

FeatureVector = dict[str, float]

# Count-style namespaces affected by the length-normalization switch.
_COUNT_NAMESPACES = ("ngr", "bas", "sen", "dis")

_POS_BUCKETS = {"VERB": "verb", "NOUN": "noun", "ADJ": "adj", "ADV": "adv"}


@dataclass(frozen=True)
class FeatureConfig:
    """Knobs for feature extraction.

    ``vocab_cap`` bounds the unigram+bigram vocabulary; ``ngram_min_df`` is
    the minimum number of training sentences an ngram must appear in.
    ``bleu_max_n`` defaults to 2: claims are short, so higher orders are
    dominated by smoothing.
    """

    vocab_cap: int = 10_000
    ngram_min_df: int = 2
    bleu_max_n: int = 2
    bleu_smoothing: bool = True
    length_normalize: bool = False
    enabled: frozenset[str] = frozenset({"ngr", "bas", "sen", "dis", "sty", "pos", "sim", "clm"})

    def __post_init__(self) -> None:
        if self.vocab_cap < 0:
            raise ValueError("vocab_cap must be >= 0")
        if not 1 <= self.bleu_max_n <= 4:
            raise ValueError("bleu_max_n must be in [1, 4]")

    def family_on(self, namespace: str) -> bool:
        return namespace in self.enabled


def value_of(fv: Mapping[str, float], name: str) -> float:
    """Sparse lookup: absent names are zero."""
    return fv.get(name, 0.0)


def merge_features(*parts: Mapping[str, float]) -> FeatureVector:
    """Merge extractor outputs; duplicate names must carry equal values."""
    merged: FeatureVector = {}
    for part in parts:
        for name, value in part.items():
            if name in merged and merged[name] != value:
                raise ValueError(f"feature name collision on {name!r}")
            merged[name] = value
    return merged


def _pruned(fv: FeatureVector) -> FeatureVector:
    return {name: value for name, value in fv.items() if value != 0.0}


# --------------------------------------------------------------------------
# Vocabulary and IDF, built on training folds only
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Vocabulary:
    """Unigrams and bigrams retained for ngram features."""

    ngrams: frozenset[tuple[str, ...]]

    def __contains__(self, ngram: tuple[str, ...]) -> bool:
        return ngram in self.ngrams

    def __len__(self) -> int:
        return len(self.ngrams)


def _sentence_ngrams(words: Sequence[str]) -> Iterable[tuple[str, ...]]:
    for w in words:
        yield (w,)
    for a, b in zip(words, words[1:]):
        yield (a, b)


def build_vocabulary_from_sentences(
    sentences: Iterable[AnnotatedSentence], config: FeatureConfig
) -> Vocabulary:
    """Top-frequency unigrams and bigrams over the given sentences.

    Keeps ngrams seen in at least ``ngram_min_df`` sentences, ranked by
    total frequency with the ngram itself as a deterministic tie-break,
    capped at ``vocab_cap`` entries.
    """
    freq: Counter[tuple[str, ...]] = Counter()
    df: Counter[tuple[str, ...]] = Counter()
    for sentence in sentences:
        grams = list(_sentence_ngrams(sentence.words()))
        freq.update(grams)
        df.update(set(grams))
    eligible = [g for g in freq if df[g] >= config.ngram_min_df]
    eligible.sort(key=lambda g: (-freq[g], g))
    return Vocabulary(ngrams=frozenset(eligible[: config.vocab_cap]))


def build_ngram_vocabulary(corpus: Corpus, config: FeatureConfig) -> Vocabulary:
    """Vocabulary over every candidate sentence in the corpus."""
    return build_vocabulary_from_sentences(
        (sentence for _, sentence in corpus.sentences()), config
    )


@dataclass(frozen=True)
class IdfTable:
    """Smoothed inverse document frequencies, one document per sentence."""

    idf: Mapping[str, float]
    n_docs: int

    @property
    def absent_idf(self) -> float:
        return math.log((1 + self.n_docs) / 1.0) + 1.0

    def weight(self, word: str) -> float:
        return self.idf.get(word, self.absent_idf)


def build_idf_table(corpus: Corpus) -> IdfTable:
    """idf(w) = ln((1 + N) / (1 + df(w))) + 1 with N = number of sentences."""
    df: Counter[str] = Counter()
    n_docs = 0
    for _, sentence in corpus.sentences():
        n_docs += 1
        df.update(set(sentence.words()))
    if n_docs == 0:
        raise ValueError("cannot build an IDF table from an empty corpus")
    idf = {w: math.log((1 + n_docs) / (1 + c)) + 1.0 for w, c in df.items()}
    return IdfTable(idf=idf, n_docs=n_docs)


# --------------------------------------------------------------------------
# Sentence-side features
# --------------------------------------------------------------------------


def _lexical_counts(tokens, words: list[str], bundle: ResourceBundle,
                    config: FeatureConfig, out: FeatureVector) -> None:
    """Shared basic/sentiment/discourse/style counters for a token sequence."""
    if config.family_on("bas"):
        out["bas:len"] = float(len(tokens))
        for token in tokens:
            bucket = _POS_BUCKETS.get(token.pos.upper())
            if bucket:
                out[f"bas:pos:{bucket}"] = out.get(f"bas:pos:{bucket}", 0.0) + 1.0
            if token.dep:
                out[f"bas:dep:{token.dep}"] = out.get(f"bas:dep:{token.dep}", 0.0) + 1.0
            if token.ne != "O":
                out[f"bas:ne:{token.ne}"] = out.get(f"bas:ne:{token.ne}", 0.0) + 1.0
    if config.family_on("sen"):
        if bundle.polarity is not None:
            short = {"positive": "pos", "negative": "neg", "neutral": "neu"}
            for w in words:
                polarity = bundle.polarity.polarity(w)
                if polarity:
                    key = f"sen:pol:{short[polarity]}"
                    out[key] = out.get(key, 0.0) + 1.0
        if bundle.categories is not None:
            for w in words:
                for tag in sorted(bundle.categories.categories(w)):
                    key = f"sen:gi:{tag}"
                    out[key] = out.get(key, 0.0) + 1.0
        if bundle.hedges is not None:
            hedges = sum(1.0 for w in words if w in bundle.hedges)
            if hedges:
                out["sen:hedge"] = hedges
    if config.family_on("dis") and bundle.connectives is not None:
        matches = match_connectives(words, bundle.connectives)
        if matches:
            out["dis:conn:total"] = float(len(matches))
            for _, _, level1, level2 in matches:
                out[f"dis:conn:{level1}"] = out.get(f"dis:conn:{level1}", 0.0) + 1.0
                key = f"dis:conn:{level1}:{level2}"
                out[key] = out.get(key, 0.0) + 1.0
    if config.family_on("sty") and bundle.norms is not None:
        sums = {"conc": 0.0, "val": 0.0, "aro": 0.0, "dom": 0.0}
        counts = {k: 0 for k in sums}
        covered = 0
        for w in words:
            scores = bundle.norms.scores(w)
            if scores is None:
                continue
            covered += 1
            for short, value in (
                ("conc", scores.concreteness),
                ("val", scores.valence),
                ("aro", scores.arousal),
                ("dom", scores.dominance),
            ):
                if value is not None:
                    sums[short] += value
                    counts[short] += 1
        if covered:
            out["sty:cov"] = float(covered)
            for short in ("conc", "val", "aro", "dom"):
                if counts[short]:
                    out[f"sty:{short}:mean"] = sums[short] / counts[short]


def _length_normalize(out: FeatureVector, n_tokens: int) -> None:
    for name in list(out):
        if name.split(":", 1)[0] in _COUNT_NAMESPACES and name != "bas:len":
            out[name] = out[name] / n_tokens


def extract_sentence_features(
    sentence: AnnotatedSentence,
    n_sentences: int,
    bundle: ResourceBundle,
    vocab: Vocabulary,
    config: FeatureConfig,
) -> FeatureVector:
    """All per-sentence features: ngrams, counts, style means, and position."""
    if n_sentences < 1:
        raise ValueError("n_sentences must be >= 1")
    if sentence.index >= n_sentences:
        raise ValueError(
            f"sentence index {sentence.index} out of range for an article "
            f"of {n_sentences} sentences"
        )
    words = sentence.words()
    out: FeatureVector = {}
    if config.family_on("ngr"):
        for gram in _sentence_ngrams(words):
            if gram in vocab:
                name = f"ngr:{len(gram)}:{'_'.join(gram)}"
                out[name] = out.get(name, 0.0) + 1.0
    _lexical_counts(sentence.tokens, words, bundle, config, out)
    if config.length_normalize:
        _length_normalize(out, len(sentence.tokens))
    if config.family_on("pos"):
        out["pos:abs"] = float(sentence.index)
        out["pos:rel"] = sentence.index / max(1, n_sentences - 1)
    return _pruned(out)


def extract_claim_features(claim: Claim, bundle: ResourceBundle,
                           config: FeatureConfig) -> FeatureVector:
    """Sentence-style counts computed on the claim's own tokens.

    Claims have no article position and contribute no ngram features; the
    remaining families are renamespaced under ``clm:``.
    """
    base: FeatureVector = {}
    _lexical_counts(claim.claim_tokens, claim.words(), bundle, config, base)
    if config.length_normalize:
        _length_normalize(base, len(claim.claim_tokens))
    return _pruned({f"clm:{name}": value for name, value in base.items()})


# --------------------------------------------------------------------------
# Similarity metrics
# --------------------------------------------------------------------------


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(reference: Sequence[str], candidate: Sequence[str],
            mode: str = "recall") -> float:
    """Longest-common-subsequence overlap, recall-oriented by default.

    ``mode='f1'`` returns the balanced F-measure instead; both operate on
    exact lowercase word matches.
    """
    if not reference:
        raise ValueError("rouge_l requires a non-empty reference")
    ref = [w.lower() for w in reference]
    cand = [w.lower() for w in candidate]
    lcs = _lcs_length(ref, cand)
    recall = lcs / len(ref)
    if mode == "recall":
        return recall
    if mode == "f1":
        if not cand or lcs == 0:
            return 0.0
        precision = lcs / len(cand)
        return 2 * precision * recall / (precision + recall)
    raise ValueError(f"unknown rouge_l mode {mode!r}")


def _ngram_counts(words: Sequence[str], n: int) -> Counter[tuple[str, ...]]:
    return Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))


def bleu(reference: Sequence[str], candidate: Sequence[str], max_n: int = 2,
         smoothing: bool = True) -> float:
    """Clipped ngram precision with brevity penalty.

    Orders 2..max_n get add-one smoothing on both the clipped numerator and
    the denominator when ``smoothing`` is on; order 1 is never smoothed, so
    fully disjoint inputs score 0.
    """
    if not reference or not candidate:
        raise ValueError("bleu requires non-empty reference and candidate")
    if not 1 <= max_n <= 4:
        raise ValueError("max_n must be in [1, 4]")
    ref = [w.lower() for w in reference]
    cand = [w.lower() for w in candidate]
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(cand, n)
        ref_counts = _ngram_counts(ref, n)
        clipped = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
        total = sum(cand_counts.values())
        if smoothing and n >= 2:
            precision = (clipped + 1) / (total + 1)
        else:
            precision = clipped / total if total else 0.0
        if precision == 0.0:
            return 0.0
        log_sum += math.log(precision)
    brevity = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return brevity * math.exp(log_sum / max_n)


def tfidf_cosine(a: Sequence[str], b: Sequence[str], idf: IdfTable) -> float:
    """Cosine of raw-tf times idf vectors over lowercase words."""
    if not a or not b:
        raise ValueError("tfidf_cosine requires non-empty inputs")
    ca = Counter(w.lower() for w in a)
    cb = Counter(w.lower() for w in b)
    wa = {w: c * idf.weight(w) for w, c in ca.items()}
    wb = {w: c * idf.weight(w) for w, c in cb.items()}
    dot = sum(wa[w] * wb[w] for w in wa.keys() & wb.keys())
    norm_a = math.sqrt(sum(v * v for v in wa.values()))
    norm_b = math.sqrt(sum(v * v for v in wb.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def embedding_cosine(a: Sequence[str], b: Sequence[str], emb: EmbeddingTable) -> float:
    """Cosine of mean in-vocabulary word vectors; 0 when a side is fully OOV."""

    def mean_vector(words: Sequence[str]):
        vectors = [emb.vector(w) for w in words]
        vectors = [v for v in vectors if v is not None]
        if not vectors:
            return None
        total = vectors[0].copy()
        for v in vectors[1:]:
            total += v
        return total / len(vectors)

    va = mean_vector(a)
    vb = mean_vector(b)
    if va is None or vb is None:
        return 0.0
    norm = math.sqrt(float(va @ va)) * math.sqrt(float(vb @ vb))
    if norm == 0.0:
        return 0.0
    return float(va @ vb) / norm


def extract_similarity_features(
    claim: Claim,
    sentence: AnnotatedSentence,
    idf: IdfTable,
    emb: Optional[EmbeddingTable],
    config: FeatureConfig,
) -> FeatureVector:
    """Claim-sentence similarity block: the claim is the reference side."""
    claim_words = claim.words()
    sent_words = sentence.words()
    out: FeatureVector = {
        "sim:tfidf": tfidf_cosine(claim_words, sent_words, idf),
        "sim:rouge_l": rouge_l(claim_words, sent_words),
        "sim:bleu": bleu(claim_words, sent_words, max_n=config.bleu_max_n,
                         smoothing=config.bleu_smoothing),
    }
    if emb is not None:
        out["sim:w2v"] = embedding_cosine(claim_words, sent_words, emb)
    return _pruned(out)


# --------------------------------------------------------------------------
# Composite construction and instance assembly
# --------------------------------------------------------------------------


def compose_with_type(base: Mapping[str, float], type_: ArgumentType) -> FeatureVector:
    """Gate every base feature on one argument type.

    Each (name, v) becomes (cmp:<type>:<name>, v); the corresponding names
    for the other three types stay absent, and the base entries themselves
    are not carried over.
    """
    for name in base:
        if name.startswith("cmp:"):
            raise ValueError(f"base vector is already composed (contains {name!r})")
    return {f"cmp:{type_.value}:{name}": value for name, value in base.items()}


# Named feature sets: which namespaces are merged and which get composed.
FEATURE_SETS: dict[str, dict[str, tuple[str, ...]]] = {
    "ngrams": {"plain": ("ngr",), "composed": ()},
    "sen": {"plain": ("bas", "sen", "dis", "sty", "pos"), "composed": ()},
    "simi": {"plain": ("sim",), "composed": ()},
    "comp-sen-simi": {
        "plain": (),
        "composed": ("bas", "sen", "dis", "sty", "pos", "sim"),
    },
    "sen+ngr+simi": {
        "plain": ("bas", "sen", "dis", "sty", "pos", "ngr", "sim"),
        "composed": (),
    },
    "full": {
        "plain": ("bas", "sen", "dis", "sty", "pos", "ngr", "sim"),
        "composed": ("bas", "sen", "dis", "sty", "pos", "sim"),
    },
    "full+claimcomp": {
        "plain": ("bas", "sen", "dis", "sty", "pos", "ngr", "sim"),
        "composed": ("bas", "sen", "dis", "sty", "pos", "sim", "clm"),
    },
}


def select_namespaces(fv: Mapping[str, float], namespaces: Sequence[str]) -> FeatureVector:
    wanted = set(namespaces)
    return {n: v for n, v in fv.items() if n.split(":", 1)[0] in wanted}


def assemble_from_base(
    base: Mapping[str, float],
    feature_set: str,
    type_for_composition: Optional[ArgumentType] = None,
) -> FeatureVector:
    """Select and compose a named feature set from a precomputed base vector.

    ``base`` must hold the plain (non-composite) namespaces; see
    FeatureExtractor.base_features.
    """
    spec = FEATURE_SETS.get(feature_set)
    if spec is None:
        raise ValueError(
            f"unknown feature set {feature_set!r}; expected one of "
            f"{sorted(FEATURE_SETS)}"
        )
    out = select_namespaces(base, spec["plain"])
    if spec["composed"]:
        if type_for_composition is None:
            raise ValueError(
                f"feature set {feature_set!r} needs an argument type for "
                f"its composite features"
            )
        to_compose = select_namespaces(base, spec["composed"])
        out = merge_features(out, compose_with_type(to_compose, type_for_composition))
    return out


class FeatureExtractor:
    """Bundles the fold-local tables and caches claim-side work.

    One extractor per training fold: the vocabulary and IDF table must come
    from training data only.
    """

    def __init__(
        self,
        bundle: ResourceBundle,
        vocab: Vocabulary,
        idf: IdfTable,
        config: FeatureConfig,
    ) -> None:
        self.bundle = bundle
        self.vocab = vocab
        self.idf = idf
        self.config = config
        self._claim_cache: dict[str, FeatureVector] = {}

    def claim_features(self, claim: Claim) -> FeatureVector:
        cached = self._claim_cache.get(claim.claim_id)
        if cached is None:
            cached = extract_claim_features(claim, self.bundle, self.config)
            self._claim_cache[claim.claim_id] = cached
        return cached

    def base_features(self, claim: Claim, sentence: AnnotatedSentence,
                      n_sentences: int) -> FeatureVector:
        """Sentence + similarity + claim namespaces, before set selection."""
        return merge_features(
            extract_sentence_features(sentence, n_sentences, self.bundle,
                                      self.vocab, self.config),
            extract_similarity_features(claim, sentence, self.idf,
                                        self.bundle.embeddings, self.config),
            self.claim_features(claim),
        )

    def assemble(
        self,
        claim: Claim,
        sentence: AnnotatedSentence,
        n_sentences: int,
        feature_set: str,
        type_for_composition: Optional[ArgumentType] = None,
    ) -> FeatureVector:
        base = self.base_features(claim, sentence, n_sentences)
        return assemble_from_base(base, feature_set, type_for_composition)


def assemble_instance(
    claim: Claim,
    sentence: AnnotatedSentence,
    n_sentences: int,
    feature_set: str,
    bundle: ResourceBundle,
    vocab: Vocabulary,
    idf: IdfTable,
    config: FeatureConfig,
    type_for_composition: Optional[ArgumentType] = None,
) -> FeatureVector:
    """One-shot instance assembly; see FeatureExtractor for batched use."""
    extractor = FeatureExtractor(bundle, vocab, idf, config)
    return extractor.assemble(claim, sentence, n_sentences, feature_set,
                              type_for_composition)


# --------------------------------------------------------------------------
# Instance exchange format
# --------------------------------------------------------------------------


def format_instance_line(claim_id: str, relevance: int,
                         fv: Mapping[str, float]) -> str:
    """`qid:<claim_id> rel:<0|1> name:value ...`, names sorted, %.6g values."""
    parts = [f"qid:{claim_id}", f"rel:{relevance}"]
    parts.extend(f"{name}:{fv[name]:.6g}" for name in sorted(fv))
    return " ".join(parts)


def parse_instance_line(line: str) -> tuple[str, int, FeatureVector]:
    fields = line.rstrip("\n").split(" ")
    if len(fields) < 2 or not fields[0].startswith("qid:") or not fields[1].startswith("rel:"):
        raise ValueError(f"malformed instance line: {line[:80]!r}")
    claim_id = fields[0][len("qid:"):]
    relevance = int(fields[1][len("rel:"):])
    fv: FeatureVector = {}
    for chunk in fields[2:]:
        if not chunk:
            continue
        name, _, raw = chunk.rpartition(":")
        if not name:
            raise ValueError(f"malformed feature entry {chunk!r}")
        fv[name] = float(raw)
    return claim_id, relevance, fv


def write_instances(path: str | Path,
                    rows: Iterable[tuple[str, int, Mapping[str, float]]]) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for claim_id, relevance, fv in rows:
            handle.write(format_instance_line(claim_id, relevance, fv))
            handle.write("\n")


def read_instances(path: str | Path) -> list[tuple[str, int, FeatureVector]]:
    with Path(path).open(encoding="utf-8") as handle:
        return [parse_instance_line(line) for line in handle if line.strip()]
