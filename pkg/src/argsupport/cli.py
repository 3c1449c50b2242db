"""Command-line pipeline: validate, stats, type models, ranking, cv, analyze.

One JSON config file drives every command; command-line flags override
config values, which override built-in defaults, and the fully resolved
config (with its hash) is echoed into the output directory. Reports are
deterministic: rerunning with an unchanged config reproduces them byte for
byte. Layout under the output directory is fixed: models/, features/,
reports/, logs/.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .corpus import (
    ArgumentType,
    Corpus,
    CorpusError,
    corpus_stats,
    load_corpus,
)
from .evaluation import significance_from_records
from .experiment import (
    classifier_features,
    cross_validate,
    evaluate_type_protocol,
)
from .features import (
    FEATURE_SETS,
    FeatureConfig,
    FeatureExtractor,
    IdfTable,
    Vocabulary,
    assemble_from_base,
    build_idf_table,
    build_ngram_vocabulary,
    write_instances,
)
from .lexicons import LexiconError, ResourceBundle, load_resource_bundle
from .ranker import (
    RankInstance,
    RankerConfig,
    load_ensemble,
    save_ensemble,
    score_group,
    train_lambdamart,
)
from .typeclf import (
    TrainConfig,
    annotate_corpus_types,
    load_model,
    predict_proba,
    save_model,
    train_type_classifier,
)

logger = logging.getLogger("argsupport")

TABLES_FORMAT = "argsupport-tables-v1"

DEFAULTS: dict = {
    "corpus": None,
    "resources": {},
    "output": None,
    "seed": 0,
    "jobs": 1,
    "k": 5,
    "policy": "predicted",
    "ndcg_at": None,
    "feature_sets": ["full"],
    "lenient": False,
    "features": {
        "vocab_cap": 10_000,
        "ngram_min_df": 2,
        "bleu_max_n": 2,
        "bleu_smoothing": True,
        "length_normalize": False,
    },
    "typeclf": {
        "l2": 1e-3,
        "learning_rate": 0.1,
        "max_epochs": 2000,
        "tolerance": 1e-7,
        "standardize": True,
    },
    "ranker": {
        "n_trees": 300,
        "learning_rate": 0.1,
        "max_leaves": 10,
        "min_leaf": None,
        "sigma": 1.0,
        "row_subsample": 1.0,
        "col_subsample": 1.0,
    },
}


class CommandError(Exception):
    """User-facing failure; message goes to stderr, exit code 1."""


# --------------------------------------------------------------------------
# Config resolution
# --------------------------------------------------------------------------


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def resolve_config(args: argparse.Namespace, command: str) -> dict:
    """defaults < config file < command-line flags, echoed in full."""
    resolved = json.loads(json.dumps(DEFAULTS))
    config_path = getattr(args, "config", None)
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise CommandError(f"config file not found: {path}")
        try:
            file_config = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise CommandError(f"config file {path}: invalid JSON ({e.msg})")
        unknown = set(file_config) - set(DEFAULTS)
        if unknown:
            raise CommandError(f"unknown config keys: {sorted(unknown)}")
        resolved = _deep_merge(resolved, file_config)
    for flag, key in (
        ("corpus", "corpus"),
        ("seed", "seed"),
        ("jobs", "jobs"),
        ("k", "k"),
        ("policy", "policy"),
        ("ndcg_at", "ndcg_at"),
        ("output", "output"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            resolved[key] = value
    if getattr(args, "feature_set", None):
        resolved["feature_sets"] = [
            name.strip() for name in args.feature_set.split(",") if name.strip()
        ]
    if getattr(args, "lenient", False):
        resolved["lenient"] = True
    if resolved["output"] is None:
        resolved["output"] = str(Path("runs") / command)
    for name in resolved["feature_sets"]:
        if name not in FEATURE_SETS:
            raise CommandError(
                f"unknown feature set {name!r}; expected one of {sorted(FEATURE_SETS)}"
            )
    if resolved["policy"] not in ("predicted", "gold"):
        raise CommandError("policy must be 'predicted' or 'gold'")
    return resolved


def config_hash(resolved: dict) -> str:
    """Hash of the experiment-defining config.

    Execution details (worker count, output location) are excluded so a
    rerun with different parallelism reproduces byte-identical reports.
    """
    semantic = {k: v for k, v in resolved.items() if k not in ("jobs", "output")}
    canonical = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


_log_handler: Optional[logging.Handler] = None


def prepare_output(resolved: dict) -> tuple[Path, str]:
    global _log_handler
    out = Path(resolved["output"])
    for sub in ("models", "features", "reports", "logs"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    digest = config_hash(resolved)
    echo = dict(resolved)
    echo["config_hash"] = digest
    (out / "config_resolved.json").write_text(
        json.dumps(echo, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if _log_handler is not None:
        logging.getLogger().removeHandler(_log_handler)
        _log_handler.close()
    _log_handler = logging.FileHandler(out / "logs" / "run.log")
    _log_handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(message)s"))
    logging.getLogger().addHandler(_log_handler)
    return out, digest


def _write_report(path: Path, text: str, digest: str) -> None:
    path.write_text(text.rstrip("\n") + f"\nconfig: {digest}\n", encoding="utf-8")


def _write_tsv(path: Path, rows: Sequence[Sequence[str]], digest: str) -> None:
    lines = [f"# config: {digest}"]
    lines.extend("\t".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# Shared pipeline pieces
# --------------------------------------------------------------------------


def _load_corpus(resolved: dict) -> Corpus:
    if not resolved.get("corpus"):
        raise CommandError("no corpus given (use --corpus or the config file)")
    warnings: list[str] = []
    corpus = load_corpus(resolved["corpus"], strict=not resolved["lenient"],
                         warnings=warnings)
    for message in warnings:
        logger.warning("%s", message)
    return corpus


def _load_bundle(resolved: dict) -> ResourceBundle:
    return load_resource_bundle(resolved.get("resources") or {})


def _feature_config(resolved: dict) -> FeatureConfig:
    section = resolved["features"]
    return FeatureConfig(
        vocab_cap=section["vocab_cap"],
        ngram_min_df=section["ngram_min_df"],
        bleu_max_n=section["bleu_max_n"],
        bleu_smoothing=section["bleu_smoothing"],
        length_normalize=section["length_normalize"],
    )


def _type_config(resolved: dict) -> TrainConfig:
    section = resolved["typeclf"]
    return TrainConfig(
        l2=section["l2"],
        learning_rate=section["learning_rate"],
        max_epochs=section["max_epochs"],
        tolerance=section["tolerance"],
        standardize=section["standardize"],
        seed=resolved["seed"],
    )


def _ranker_config(resolved: dict) -> RankerConfig:
    section = resolved["ranker"]
    return RankerConfig(
        n_trees=section["n_trees"],
        learning_rate=section["learning_rate"],
        max_leaves=section["max_leaves"],
        min_leaf=section["min_leaf"],
        sigma=section["sigma"],
        seed=resolved["seed"],
        row_subsample=section["row_subsample"],
        col_subsample=section["col_subsample"],
    )


def _save_tables(path: Path, vocab: Vocabulary, idf: IdfTable, digest: str) -> None:
    record = {
        "format": TABLES_FORMAT,
        "config_hash": digest,
        "n_docs": idf.n_docs,
        "idf": {word: value for word, value in sorted(idf.idf.items())},
        "vocab": sorted(list(gram) for gram in vocab.ngrams),
    }
    path.write_text(json.dumps(record), encoding="utf-8")


def _require_file(path: Path, hint: str) -> Path:
    if not path.exists():
        raise CommandError(f"{path} not found ({hint})")
    return path


def _load_tables(path: Path) -> tuple[Vocabulary, IdfTable]:
    _require_file(path, "run train-type or train-rank first")
    record = json.loads(path.read_text(encoding="utf-8"))
    if record.get("format") != TABLES_FORMAT:
        raise CommandError(f"unexpected tables format in {path}")
    vocab = Vocabulary(ngrams=frozenset(tuple(g) for g in record["vocab"]))
    idf = IdfTable(idf=record["idf"], n_docs=record["n_docs"])
    return vocab, idf


def _fit_type_model(corpus: Corpus, bundle: ResourceBundle,
                    feature_config: FeatureConfig, type_config: TrainConfig):
    """Vocabulary, IDF, base features, and a type model on the full corpus."""
    vocab = build_ngram_vocabulary(corpus, feature_config)
    idf = build_idf_table(corpus)
    extractor = FeatureExtractor(bundle, vocab, idf, feature_config)
    base = {
        group.key: [
            extractor.base_features(group.claim, s, len(group.sentences))
            for s in group.sentences
        ]
        for group in corpus.groups
    }
    instances = [
        (classifier_features(base[group.key][s.index]), s.gold_type)
        for group, s in corpus.sentences()
        if s.relevance == 1 and s.gold_type is not None
    ]
    if not instances:
        raise CommandError("corpus has no gold-typed supporting sentences")
    model = train_type_classifier(instances, type_config)
    return vocab, idf, base, model


def _featurize_from(base):
    def featurize(group, sentence):
        return classifier_features(base[group.key][sentence.index])

    return featurize


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    resolved = resolve_config(args, "validate")
    if args.corpus_positional:
        resolved["corpus"] = args.corpus_positional
    out, digest = prepare_output(resolved)
    try:
        corpus = _load_corpus(resolved)
    except CorpusError as e:
        print(f"invalid: {e}", file=sys.stderr)
        return 1
    stats = corpus_stats(corpus)
    print(
        f"ok: {stats.n_groups} groups, {stats.n_sentences} sentences, "
        f"{stats.n_supporting} supporting arguments [config {digest}]"
    )
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    resolved = resolve_config(args, "stats")
    if args.corpus_positional:
        resolved["corpus"] = args.corpus_positional
    out, digest = prepare_output(resolved)
    corpus = _load_corpus(resolved)
    stats = corpus_stats(corpus)
    text = stats.format_text()
    _write_report(out / "reports" / "stats.txt", text, digest)
    from .plots import plot_type_distribution

    plot_type_distribution(stats, out / "reports" / "stats_types.png", digest)
    print(text)
    return 0


def cmd_train_type(args: argparse.Namespace) -> int:
    resolved = resolve_config(args, "train-type")
    out, digest = prepare_output(resolved)
    corpus = _load_corpus(resolved)
    bundle = _load_bundle(resolved)
    vocab, idf, base, model = _fit_type_model(
        corpus, bundle, _feature_config(resolved), _type_config(resolved)
    )
    save_model(model, out / "models" / "typeclf.json", extra={"config_hash": digest})
    _save_tables(out / "models" / "tables.json", vocab, idf, digest)
    epochs = {t.value: model.epochs_run[t] for t in model.epochs_run}
    summary = (
        f"trained type classifier on "
        f"{sum(1 for _, s in corpus.sentences() if s.relevance == 1 and s.gold_type)} "
        f"gold-typed sentences\nfeatures: {len(model.feature_names)}\n"
        f"epochs per type: {json.dumps(epochs, sort_keys=True)}"
    )
    _write_report(out / "reports" / "train_type.txt", summary, digest)
    print(summary)
    return 0


def cmd_predict_type(args: argparse.Namespace) -> int:
    resolved = resolve_config(args, "predict-type")
    out, digest = prepare_output(resolved)
    corpus = _load_corpus(resolved)
    bundle = _load_bundle(resolved)
    models_dir = Path(args.models) if args.models else out / "models"
    model = load_model(
        _require_file(models_dir / "typeclf.json", "run train-type first")
    )
    vocab, idf = _load_tables(models_dir / "tables.json")
    extractor = FeatureExtractor(bundle, vocab, idf, _feature_config(resolved))
    base = {
        group.key: [
            extractor.base_features(group.claim, s, len(group.sentences))
            for s in group.sentences
        ]
        for group in corpus.groups
    }
    annotated = annotate_corpus_types(corpus, model, _featurize_from(base),
                                      resolved["policy"])
    rows = [["claim_id", "article_id", "sentence", "predicted_type"]]
    for group in annotated.groups:
        for sentence in group.sentences:
            rows.append([
                group.claim.claim_id, group.article_id, str(sentence.index),
                sentence.predicted_type.value,
            ])
    _write_tsv(out / "reports" / "predicted_types.tsv", rows, digest)
    print(f"predicted types for {len(rows) - 1} sentences "
          f"-> {out / 'reports' / 'predicted_types.tsv'}")
    return 0


def cmd_eval_type(args: argparse.Namespace) -> int:
    resolved = resolve_config(args, "eval-type")
    out, digest = prepare_output(resolved)
    corpus = _load_corpus(resolved)
    bundle = _load_bundle(resolved)
    report = evaluate_type_protocol(
        corpus, bundle, _feature_config(resolved), _type_config(resolved),
        seed=resolved["seed"],
    )
    text = report.format_text()
    _write_report(out / "reports" / "type_eval.txt", text, digest)
    _write_tsv(out / "reports" / "type_eval.tsv", report.tsv_rows(), digest)
    from .plots import plot_type_eval

    plot_type_eval(
        {name: (report.test_rows[name].accuracy, report.test_rows[name].macro_f1)
         for name in report.ROW_ORDER},
        out / "reports" / "type_eval.png",
        digest,
    )
    print(text)
    return 0


def cmd_train_rank(args: argparse.Namespace) -> int:
    resolved = resolve_config(args, "train-rank")
    out, digest = prepare_output(resolved)
    corpus = _load_corpus(resolved)
    bundle = _load_bundle(resolved)
    vocab, idf, base, model = _fit_type_model(
        corpus, bundle, _feature_config(resolved), _type_config(resolved)
    )
    save_model(model, out / "models" / "typeclf.json", extra={"config_hash": digest})
    _save_tables(out / "models" / "tables.json", vocab, idf, digest)
    annotated = annotate_corpus_types(corpus, model, _featurize_from(base),
                                      resolved["policy"])
    lines = []
    for feature_set in resolved["feature_sets"]:
        groups = [
            [
                RankInstance(
                    features=assemble_from_base(
                        base[group.key][s.index], feature_set, s.effective_type
                    ),
                    relevance=s.relevance,
                    claim_id=group.claim.claim_id,
                    index=s.index,
                )
                for s in group.sentences
            ]
            for group in annotated.groups
        ]
        write_instances(
            out / "features" / f"instances_{feature_set.replace('+', '_')}.txt",
            (
                (inst.claim_id, inst.relevance, inst.features)
                for group in groups
                for inst in group
            ),
        )
        meta = {"config_hash": digest, "feature_set": feature_set}
        (out / "features" / f"instances_{feature_set.replace('+', '_')}.meta.json").write_text(
            json.dumps(meta, sort_keys=True), encoding="utf-8"
        )
        ensemble = train_lambdamart(groups, _ranker_config(resolved))
        save_ensemble(
            ensemble,
            out / "models" / f"ranker_{feature_set.replace('+', '_')}.json",
            extra={"config_hash": digest},
        )
        final = ensemble.history[-1] if ensemble.history else {"mrr": 0.0, "ndcg": 0.0}
        lines.append(
            f"{feature_set}: {len(ensemble.trees)} trees, training "
            f"MRR {100 * final['mrr']:.2f} NDCG {100 * final['ndcg']:.2f}"
        )
    text = "\n".join(lines)
    _write_report(out / "reports" / "train_rank.txt", text, digest)
    print(text)
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    resolved = resolve_config(args, "rank")
    out, digest = prepare_output(resolved)
    corpus = _load_corpus(resolved)
    bundle = _load_bundle(resolved)
    groups = corpus.find_groups(args.claim_id, args.article_id)
    if not groups:
        print(f"unknown claim {args.claim_id!r}"
              + (f" with article {args.article_id!r}" if args.article_id else ""),
              file=sys.stderr)
        return 1
    feature_set = resolved["feature_sets"][0]
    models_dir = Path(args.models) if args.models else out / "models"
    type_model = load_model(
        _require_file(models_dir / "typeclf.json", "run train-rank first")
    )
    ensemble = load_ensemble(
        _require_file(models_dir / f"ranker_{feature_set.replace('+', '_')}.json",
                      "run train-rank first")
    )
    vocab, idf = _load_tables(models_dir / "tables.json")
    extractor = FeatureExtractor(bundle, vocab, idf, _feature_config(resolved))
    report_lines = []
    for group in groups:
        base = {
            group.key: [
                extractor.base_features(group.claim, s, len(group.sentences))
                for s in group.sentences
            ]
        }
        annotated = annotate_corpus_types(
            Corpus(groups=(group,)), type_model, _featurize_from(base),
            resolved["policy"],
        )
        annotated_group = annotated.groups[0]
        features = [
            assemble_from_base(base[group.key][s.index], feature_set,
                               s.effective_type)
            for s in annotated_group.sentences
        ]
        ranked = score_group(ensemble, features)
        report_lines.append(
            f"claim {group.claim.claim_id} article {group.article_id} "
            f"({len(group.sentences)} sentences, feature set {feature_set})"
        )
        for rank_pos, (index, score) in enumerate(ranked, start=1):
            sentence = annotated_group.sentences[index]
            text_preview = sentence.text[:70]
            report_lines.append(
                f"{rank_pos:>3}. [{score:+.4f}] ({sentence.predicted_type.value:<9}) "
                f"#{index} {text_preview}"
            )
    text = "\n".join(report_lines)
    _write_report(out / "reports" / "rank.txt", text, digest)
    print(text)
    return 0


def cmd_cv(args: argparse.Namespace) -> int:
    resolved = resolve_config(args, "cv")
    out, digest = prepare_output(resolved)
    corpus = _load_corpus(resolved)
    bundle = _load_bundle(resolved)
    report = cross_validate(
        corpus,
        resolved["feature_sets"],
        bundle,
        _feature_config(resolved),
        _type_config(resolved),
        _ranker_config(resolved),
        k=resolved["k"],
        seed=resolved["seed"],
        policy=resolved["policy"],
        ndcg_k=resolved["ndcg_at"],
        jobs=resolved["jobs"],
    )
    text = report.format_text()
    _write_report(out / "reports" / "cv_metrics.txt", text, digest)
    _write_tsv(out / "reports" / "cv_metrics.tsv", report.tsv_rows(), digest)
    from .plots import plot_cv_metrics

    plot_cv_metrics(
        report.row_names,
        [100 * report.pooled[name].mean_mrr for name in report.row_names],
        [100 * report.pooled[name].mean_ndcg for name in report.row_names],
        out / "reports" / "cv_metrics.png",
        digest,
    )
    print(text)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    resolved = resolve_config(args, "analyze")
    out, digest = prepare_output(resolved)
    corpus = _load_corpus(resolved)
    bundle = _load_bundle(resolved)
    vocab, idf, base, model = _fit_type_model(
        corpus, bundle, _feature_config(resolved), _type_config(resolved)
    )
    annotated = annotate_corpus_types(corpus, model, _featurize_from(base),
                                      resolved["policy"])
    records = [
        (s.effective_type, s.relevance, base[group.key][s.index])
        for group, s in annotated.sentences()
    ]
    report = significance_from_records(records, include_ngrams=args.include_ngrams)
    text = report.format_text()
    _write_report(out / "reports" / "significance.txt", text, digest)
    _write_tsv(out / "reports" / "significance.tsv", report.tsv_rows(), digest)
    from .plots import plot_significance

    plot_significance(report, out / "reports" / "significance.png", digest)
    print(text)
    return 0


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run config")
    parser.add_argument("--corpus", help="corpus JSONL path (overrides config)")
    parser.add_argument("--output", help="output directory (default runs/<command>)")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--jobs", type=int, help="parallel fold workers (default 1)")
    parser.add_argument("--lenient", action="store_true",
                        help="ignore unknown corpus keys with a warning")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="argsupport",
        description="Detect and rank sentence-level supporting arguments for claims.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", help="schema-check a corpus file")
    p.add_argument("corpus_positional", nargs="?", metavar="CORPUS")
    _add_common(p)
    p.set_defaults(handler=cmd_validate)

    p = commands.add_parser("stats", help="corpus statistics report")
    p.add_argument("corpus_positional", nargs="?", metavar="CORPUS")
    _add_common(p)
    p.set_defaults(handler=cmd_stats)

    p = commands.add_parser("train-type", help="train the argument type classifier")
    _add_common(p)
    p.set_defaults(handler=cmd_train_type)

    p = commands.add_parser("predict-type", help="label sentences with predicted types")
    _add_common(p)
    p.add_argument("--models", help="directory holding typeclf.json and tables.json")
    p.add_argument("--policy", choices=["predicted", "gold"])
    p.set_defaults(handler=cmd_predict_type)

    p = commands.add_parser("eval-type", help="50/25/25 type prediction protocol")
    _add_common(p)
    p.set_defaults(handler=cmd_eval_type)

    p = commands.add_parser("train-rank", help="train the ranking model(s)")
    _add_common(p)
    p.add_argument("--feature-set", help="comma-separated feature set names")
    p.add_argument("--policy", choices=["predicted", "gold"])
    p.set_defaults(handler=cmd_train_rank)

    p = commands.add_parser("rank", help="rank one claim's article sentences")
    _add_common(p)
    p.add_argument("--claim-id", required=True)
    p.add_argument("--article-id")
    p.add_argument("--models", help="directory holding the trained models")
    p.add_argument("--feature-set", help="feature set of the ranker to load")
    p.add_argument("--policy", choices=["predicted", "gold"])
    p.set_defaults(handler=cmd_rank)

    p = commands.add_parser("cv", help="k-fold cross-validated ranking evaluation")
    _add_common(p)
    p.add_argument("--feature-set", help="comma-separated feature set names")
    p.add_argument("--policy", choices=["predicted", "gold"])
    p.add_argument("-k", type=int, dest="k", help="number of folds (default 5)")
    p.add_argument("--ndcg-at", type=int, dest="ndcg_at",
                   help="NDCG cutoff (default: full list)")
    p.set_defaults(handler=cmd_cv)

    p = commands.add_parser("analyze", help="feature significance by argument type")
    _add_common(p)
    p.add_argument("--policy", choices=["predicted", "gold"])
    p.add_argument("--include-ngrams", action="store_true",
                   help="include ngram features in the significance table")
    p.set_defaults(handler=cmd_analyze)
    return parser


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Parse and run one subcommand; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        return args.handler(args)
    except (CommandError, CorpusError, LexiconError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
