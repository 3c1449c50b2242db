import json

import pytest

from argsupport.corpus import (
    ArgumentType,
    Corpus,
    CorpusError,
    corpus_stats,
    load_corpus,
    save_corpus,
    split_folds,
)

from conftest import make_claim, make_corpus, make_group, sent


def record(debate="d1", claim="c1", article="a1", sentences=None):
    if sentences is None:
        sentences = [
            {"index": 0, "text": "one two", "relevance": 1, "gold_type": "study",
             "tokens": [{"text": "one", "pos": "NOUN", "ne": "O", "dep": ""},
                        {"text": "two", "pos": "NOUN", "ne": "O", "dep": ""}]},
            {"index": 1, "text": "three", "relevance": 0, "gold_type": None,
             "tokens": [{"text": "three", "pos": "NOUN", "ne": "O", "dep": ""}]},
        ]
    return {
        "debate_id": debate,
        "claim_id": claim,
        "topic_text": "topic",
        "claim_text": "the claim",
        "claim_tokens": [{"text": "the", "pos": "OTHER", "ne": "O", "dep": ""},
                         {"text": "claim", "pos": "NOUN", "ne": "O", "dep": ""}],
        "article_id": article,
        "sentences": sentences,
    }


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")


class TestLoadCorpus:
    def test_well_formed_record(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        sentences = [
            {"index": i, "text": f"s{i}", "relevance": 0, "gold_type": None,
             "tokens": [{"text": f"s{i}", "pos": "NOUN", "ne": "O", "dep": ""}]}
            for i in range(3)
        ]
        write_jsonl(path, [record(sentences=sentences)])
        corpus = load_corpus(path)
        assert len(corpus.groups) == 1
        assert len(corpus.groups[0].sentences) == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(CorpusError, match="not found"):
            load_corpus(tmp_path / "nope.jsonl")

    def test_index_gap_reported(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        sentences = [
            {"index": 0, "text": "a", "relevance": 0, "gold_type": None,
             "tokens": [{"text": "a", "pos": "NOUN", "ne": "O", "dep": ""}]},
            {"index": 2, "text": "b", "relevance": 0, "gold_type": None,
             "tokens": [{"text": "b", "pos": "NOUN", "ne": "O", "dep": ""}]},
        ]
        write_jsonl(path, [record(sentences=sentences)])
        with pytest.raises(CorpusError, match="index gap"):
            load_corpus(path)

    def test_gold_type_on_irrelevant_sentence(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        sentences = [
            {"index": 0, "text": "a", "relevance": 0, "gold_type": "study",
             "tokens": [{"text": "a", "pos": "NOUN", "ne": "O", "dep": ""}]},
        ]
        write_jsonl(path, [record(sentences=sentences)])
        with pytest.raises(CorpusError, match="sentence 0.*relevance 0"):
            load_corpus(path)

    def test_duplicate_claim_article_pair(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, [record(), record()])
        with pytest.raises(CorpusError, match="duplicate"):
            load_corpus(path)

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(json.dumps(record()) + "\n{broken\n", encoding="utf-8")
        with pytest.raises(CorpusError, match=":2"):
            load_corpus(path)

    def test_unknown_key_strict_vs_lenient(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        bad = record()
        bad["extra_field"] = 1
        write_jsonl(path, [bad])
        with pytest.raises(CorpusError, match="unknown keys"):
            load_corpus(path)
        warnings = []
        corpus = load_corpus(path, strict=False, warnings=warnings)
        assert len(corpus.groups) == 1
        assert any("extra_field" in w for w in warnings)

    def test_empty_sentence_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        sentences = [{"index": 0, "text": "x", "relevance": 0, "gold_type": None,
                      "tokens": []}]
        write_jsonl(path, [record(sentences=sentences)])
        with pytest.raises(CorpusError, match="zero tokens|no tokens"):
            load_corpus(path)

    def test_bad_ne_tag(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        sentences = [{"index": 0, "text": "x", "relevance": 0, "gold_type": None,
                      "tokens": [{"text": "x", "pos": "NOUN", "ne": "CITY", "dep": ""}]}]
        write_jsonl(path, [record(sentences=sentences)])
        with pytest.raises(CorpusError, match="ne tag"):
            load_corpus(path)

    def test_claim_id_reuse_with_different_text(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        other = record(article="a2")
        other["claim_text"] = "a different claim"
        write_jsonl(path, [record(), other])
        with pytest.raises(CorpusError, match="claim_id.*reused"):
            load_corpus(path)

    def test_round_trip(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        write_jsonl(path, [record(), record(claim="c2", article="a2", debate="d2")])
        corpus = load_corpus(path)
        out = tmp_path / "again.jsonl"
        save_corpus(corpus, out)
        assert load_corpus(out) == corpus


class TestCorpusStats:
    def test_empty_corpus(self):
        stats = corpus_stats(Corpus(groups=()))
        assert stats.n_groups == 0
        assert stats.n_sentences == 0
        assert stats.n_supporting == 0
        assert all(v == 0 for v in stats.type_counts.values())

    def test_synthetic_counts(self):
        sentences = [sent(i, [f"w{i}"], relevance=1 if i < 2 else 0)
                     for i in range(10)]
        stats = corpus_stats(make_corpus(make_group(sentences)))
        assert stats.n_supporting == 2
        assert stats.n_sentences == 10
        assert stats.n_supporting / stats.n_sentences == pytest.approx(0.20)

    def test_type_percentage_formatting(self):
        # 995 supporting sentences split 95/497/363/40 must print as
        # 9.55 / 49.95 / 36.48 / 4.02 percent.
        allocation = [
            (ArgumentType.STUDY, 95),
            (ArgumentType.FACTUAL, 497),
            (ArgumentType.OPINION, 363),
            (ArgumentType.REASONING, 40),
        ]
        sentences = []
        i = 0
        for gold, count in allocation:
            for _ in range(count):
                sentences.append(sent(i, [f"w{i}"], relevance=1, gold_type=gold))
                i += 1
        sentences.append(sent(i, ["pad"], relevance=0))
        stats = corpus_stats(make_corpus(make_group(sentences)))
        assert stats.n_supporting == 995
        pct = stats.type_percentages()
        assert f"{pct[ArgumentType.STUDY]:.2f}" == "9.55"
        assert f"{pct[ArgumentType.FACTUAL]:.2f}" == "49.95"
        assert f"{pct[ArgumentType.OPINION]:.2f}" == "36.48"
        assert f"{pct[ArgumentType.REASONING]:.2f}" == "4.02"
        assert sum(pct.values()) == pytest.approx(100.0, abs=0.05)

    def test_percentages_sum_to_100(self):
        sentences = [
            sent(0, ["a"], relevance=1, gold_type=ArgumentType.STUDY),
            sent(1, ["b"], relevance=1, gold_type=ArgumentType.OPINION),
            sent(2, ["c"], relevance=1, gold_type=ArgumentType.OPINION),
        ]
        stats = corpus_stats(make_corpus(make_group(sentences)))
        assert sum(stats.type_percentages().values()) == pytest.approx(100.0, abs=0.05)


class TestSplitFolds:
    def _corpus(self, n_debates):
        groups = []
        for d in range(n_debates):
            claim = make_claim(claim_id=f"c{d}", debate_id=f"d{d}")
            groups.append(make_group([sent(0, ["x"]), sent(1, ["y"])],
                                     claim=claim, article_id=f"a{d}"))
        return make_corpus(*groups)

    def test_partition_properties(self):
        corpus = self._corpus(10)
        folds = split_folds(corpus, 5, seed=3)
        assert len(folds) == 5
        test_debates = [set(g.claim.debate_id for g in test.groups)
                        for _, test in folds]
        for debates in test_debates:
            assert len(debates) == 2
        union = set().union(*test_debates)
        assert union == set(corpus.debate_ids())
        for i in range(5):
            for j in range(i + 1, 5):
                assert not (test_debates[i] & test_debates[j])
        for train, test in folds:
            assert len(train.groups) + len(test.groups) == len(corpus.groups)
            assert not (
                set(g.key for g in train.groups) & set(g.key for g in test.groups)
            )

    def test_deterministic_given_seed(self):
        corpus = self._corpus(7)
        assert split_folds(corpus, 3, seed=11) == split_folds(corpus, 3, seed=11)
        different = split_folds(corpus, 3, seed=12)
        same = split_folds(corpus, 3, seed=11)
        assert any(a != b for a, b in zip(same, different))

    def test_too_few_debates(self):
        with pytest.raises(ValueError, match="5 folds from 3"):
            split_folds(self._corpus(3), 5, seed=0)

    def test_fold_sizes_differ_by_at_most_one(self):
        corpus = self._corpus(11)
        folds = split_folds(corpus, 4, seed=0)
        sizes = [len(set(g.claim.debate_id for g in test.groups))
                 for _, test in folds]
        assert max(sizes) - min(sizes) <= 1
        assert sum(sizes) == 11
