"""Command-line front door wiring the modules into reproducible batch jobs.

Results go to standard output as JSON (``--pretty`` renders tables instead);
errors print one machine-parsable ``ERROR <code>: <message>`` line and exit
with 1 for usage problems, 2 for data errors, 3 for client failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from . import agreement, classify, dataio, features, metrics, reduce as reduction, stats
from .errors import Malformed, NoisekitError
from .features import AnalyzerConfig, AnalyzerMode
from .metrics import Averaging, ConfusionCounts
from .reduce import ReduceMethod
from .textcore import NOISE_CLASSES, Document, NoiseLabelSet, SentimentLabel


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"ERROR Usage: {message}", file=sys.stderr)
        raise SystemExit(1)


def _thread_cap() -> int:
    raw = os.environ.get("NOISEKIT_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise Malformed(f"NOISEKIT_THREADS must be an integer, got {raw!r}") from None
    return max(1, value)


def _emit(payload, pretty: bool):
    if pretty:
        _emit_pretty(payload)
    else:
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True))


def _emit_pretty(payload, indent: int = 0):
    pad = "  " * indent
    if isinstance(payload, dict):
        for key in payload:
            value = payload[key]
            if isinstance(value, (dict, list)):
                print(f"{pad}{key}:")
                _emit_pretty(value, indent + 1)
            else:
                print(f"{pad}{key}: {value}")
    elif isinstance(payload, list):
        for value in payload:
            if isinstance(value, (dict, list)):
                _emit_pretty(value, indent)
                print()
            else:
                print(f"{pad}{value}")
    else:
        print(f"{pad}{payload}")


def _analyzer_config(args) -> AnalyzerConfig:
    return AnalyzerConfig(
        mode=AnalyzerMode(args.analyzer),
        n_min=args.nmin,
        n_max=args.nmax,
        min_df=args.min_df,
    )


def _train_config(args, class_weights=None) -> classify.TrainConfig:
    return classify.TrainConfig(
        c=args.c,
        epochs=args.epochs,
        learning_rate=args.lr,
        seed=args.seed,
        class_weights=class_weights,
    )


def _featurize_corpus(model, docs):
    return [features.transform(model, doc) for doc in docs]


def _prf_block(counts: ConfusionCounts) -> dict:
    block = {}
    for avg in Averaging:
        p, r, f1 = metrics.prf(counts, avg)
        block[avg.value] = {"precision": round(p, 6), "recall": round(r, 6), "f1": round(f1, 6)}
    per_class = {}
    for j, name in enumerate(counts.class_names):
        p, r, f1 = metrics._prf_one(counts.tp[j], counts.fp[j], counts.fn[j])
        per_class[name] = {"precision": round(p, 6), "recall": round(r, 6), "f1": round(f1, 6)}
    block["per_class"] = per_class
    return block


def cmd_stats(args) -> dict:
    corpus = dataio.load_corpus(args.corpus, normalize_text=args.normalize)
    summary = stats.corpus_summary(corpus.documents, bin_width=args.bin_width)
    if args.hist_tsv:
        hist = stats.length_histogram(corpus.documents, bin_width=args.bin_width)
        Path(args.hist_tsv).write_text(stats.histogram_tsv(hist), encoding="utf-8")
    if args.corr_tsv:
        matrix = stats.label_correlation(corpus.documents)
        Path(args.corr_tsv).write_text(stats.correlation_tsv(matrix), encoding="utf-8")
    return summary


def cmd_dedupe(args) -> dict:
    corpus = dataio.load_corpus(args.input, normalize_text=args.normalize)
    kept, removed = stats.dedupe(corpus.documents, use_raw_text=not args.normalize)
    dataio.save_corpus(kept, args.output)
    return {"input": len(corpus.documents), "kept": len(kept), "removed": removed}


def cmd_train_noise(args) -> dict:
    corpus = dataio.load_corpus(args.train, normalize_text=args.normalize)
    labeled = [d for d in corpus.documents if d.noise is not None]
    if not labeled:
        raise Malformed(f"{args.train}: no noise-labeled rows to train on")
    tfidf = features.fit_tfidf(labeled, _analyzer_config(args))
    vectors = _featurize_corpus(tfidf, labeled)
    model = classify.train_ovr_hinge(
        vectors, [d.noise for d in labeled], _train_config(args), dim=tfidf.dim
    )
    dataio.save_model_bundle(args.out, tfidf, model)
    return {
        "trained_on": len(labeled),
        "features": tfidf.dim,
        "classes": list(NOISE_CLASSES),
        "model": str(args.out),
    }


def cmd_predict_noise(args) -> dict:
    tfidf, model = dataio.load_model_bundle(args.model)
    corpus = dataio.load_corpus(args.corpus, normalize_text=args.normalize)
    predictions = []
    predicted_sets = []
    for doc in corpus.documents:
        label_set = classify.predict_multilabel(model, features.transform(tfidf, doc))
        predicted_sets.append(label_set)
        predictions.append({"id": doc.id, "noise": label_set.to_bits(), "labels": list(label_set.names())})
    result = {"predictions": predictions}
    scored = [
        (d.noise, p) for d, p in zip(corpus.documents, predicted_sets) if d.noise is not None
    ]
    if scored:
        counts = ConfusionCounts.from_multilabel(*map(list, zip(*scored)))
        result["metrics"] = _prf_block(counts)
    if args.out:
        out_docs = [
            Document(id=d.id, text=d.text, sentiment=d.sentiment, noise=p)
            for d, p in zip(corpus.documents, predicted_sets)
        ]
        dataio.save_corpus(out_docs, args.out)
    return result


def cmd_train_sentiment(args) -> dict:
    corpus = dataio.load_corpus(args.train, normalize_text=args.normalize)
    labeled = [d for d in corpus.documents if d.sentiment is not None]
    if not labeled:
        raise Malformed(f"{args.train}: no sentiment-labeled rows to train on")
    weights = None
    if args.auto_weights:
        counts = [0, 0, 0]
        for doc in labeled:
            counts[int(doc.sentiment)] += 1
        weights = classify.compute_class_weights(counts)
    tfidf = features.fit_tfidf(labeled, _analyzer_config(args))
    vectors = _featurize_corpus(tfidf, labeled)
    config = _train_config(args, class_weights=weights.values if weights else None)
    model = classify.train_softmax_weighted(
        vectors, [d.sentiment for d in labeled], weights, config, dim=tfidf.dim
    )
    dataio.save_model_bundle(args.out, tfidf, model)
    return {
        "trained_on": len(labeled),
        "features": tfidf.dim,
        "class_weights": list(weights.values) if weights else None,
        "model": str(args.out),
    }


def cmd_predict_sentiment(args) -> dict:
    tfidf, model = dataio.load_model_bundle(args.model)
    corpus = dataio.load_corpus(args.corpus, normalize_text=args.normalize)
    predictions = []
    predicted = []
    for doc in corpus.documents:
        label, probs = classify.predict_sentiment(model, features.transform(tfidf, doc))
        predicted.append(label)
        predictions.append(
            {
                "id": doc.id,
                "sentiment": label.label,
                "probabilities": {
                    name: round(float(p), 6) for name, p in zip(model.class_names, probs)
                },
            }
        )
    result = {"predictions": predictions}
    scored = [
        (d.sentiment, p) for d, p in zip(corpus.documents, predicted) if d.sentiment is not None
    ]
    if scored:
        gold, labels = map(list, zip(*scored))
        counts = ConfusionCounts.from_multiclass(gold, labels, model.class_names)
        result["metrics"] = _prf_block(counts)
    if args.out:
        out_docs = [
            Document(id=d.id, text=d.text, sentiment=p, noise=d.noise)
            for d, p in zip(corpus.documents, predicted)
        ]
        dataio.save_corpus(out_docs, args.out)
    return result


def cmd_import_corpus(args) -> dict:
    """Map an upstream CSV export onto the corpus TSV schema."""
    import csv

    sentiment_map = {}
    if args.sentiment_map:
        for pair in args.sentiment_map.split(","):
            key, sep, value = pair.partition("=")
            if not sep or value.strip() not in ("neutral", "positive", "negative"):
                raise Malformed(f"bad --sentiment-map entry {pair!r}")
            sentiment_map[key.strip()] = value.strip()
    noise_cols = args.noise_cols.split(",") if args.noise_cols else None
    if noise_cols is not None and len(noise_cols) != len(NOISE_CLASSES):
        raise Malformed(f"--noise-cols needs {len(NOISE_CLASSES)} names, got {len(noise_cols)}")

    documents = []
    seen_ids = set()
    skipped_empty = 0
    unlabeled_noise = 0
    try:
        fh = open(args.input, encoding="utf-8", newline="")
    except OSError as exc:
        raise Malformed(f"cannot read {args.input}: {exc}") from exc
    with fh:
        try:
            reader = csv.DictReader(fh, delimiter=args.delimiter)
            rows = list(reader)
        except UnicodeDecodeError as exc:
            raise Malformed(f"{args.input}: not valid UTF-8 ({exc})") from None
    if not rows and noise_cols:
        raise Malformed(f"{args.input}: no data rows")
    for i, row in enumerate(rows):
        lineno = i + 2
        if args.text_col not in row or row[args.text_col] is None:
            raise Malformed(f"missing column {args.text_col!r}", path=args.input, line=lineno)
        text = row[args.text_col]
        if not text or not text.strip():
            skipped_empty += 1
            continue
        doc_id = row[args.id_col] if args.id_col else f"r{i + 1}"
        if doc_id in seen_ids:
            raise Malformed(f"duplicate id {doc_id!r}", path=args.input, line=lineno)
        seen_ids.add(doc_id)
        sentiment = None
        if args.sentiment_col:
            raw = (row.get(args.sentiment_col) or "").strip()
            if raw:
                mapped = sentiment_map.get(raw, raw.lower())
                if mapped not in ("neutral", "positive", "negative"):
                    raise Malformed(
                        f"unmapped sentiment value {raw!r}", path=args.input, line=lineno
                    )
                sentiment = SentimentLabel.from_name(mapped)
        noise = None
        if noise_cols:
            bits = []
            for col in noise_cols:
                value = (row.get(col) or "0").strip()
                if value not in ("0", "1"):
                    raise Malformed(
                        f"noise column {col!r} must be 0/1, got {value!r}",
                        path=args.input,
                        line=lineno,
                    )
                bits.append(value)
            bitstring = "".join(bits)
            if "1" in bitstring:
                noise = NoiseLabelSet.from_bits(bitstring)
            else:
                unlabeled_noise += 1
        documents.append(Document(id=doc_id, text=text, sentiment=sentiment, noise=noise))
    dataio.save_corpus(documents, args.output)
    return {
        "imported": len(documents),
        "skipped_empty": skipped_empty,
        "rows_without_noise": unlabeled_noise,
        "out": str(args.output),
    }


def _build_client(args):
    if args.client and args.fixture:
        raise Malformed("--client and --fixture are mutually exclusive")
    if args.client:
        return reduction.SubprocessClient(args.client, source=args.src_lang, pivot=args.pivot_lang)
    if args.fixture:
        return dataio.load_fixture(args.fixture, source=args.src_lang, pivot=args.pivot_lang)
    return None


def cmd_reduce(args) -> dict:
    method = ReduceMethod(args.method)
    corpus = dataio.load_corpus(args.corpus, normalize_text=args.normalize)
    dictionary = None
    if args.dict:
        table = reduction.PhoneticTable.from_file(args.phonetic_table) if args.phonetic_table else None
        dictionary = dataio.load_dictionary(args.dict, phonetic_table=table)
    client = _build_client(args)
    resources = reduction.Resources(
        dictionary=dictionary,
        client=client,
        mask_probability=args.p,
        seed=args.seed,
        max_dist=args.max_dist,
    )
    try:
        reduced_docs = []
        for doc in corpus.documents:
            # Per-document seeding keeps the masking independent of corpus order.
            resources.seed = args.seed + len(reduced_docs)
            text = reduction.reduce_text(doc, method, resources)
            if not text.strip():
                # The output file must satisfy the corpus schema (non-empty text).
                warnings.warn(f"{doc.id}: reduction produced empty text; keeping the original")
                text = doc.text
            reduced_docs.append(
                Document(id=doc.id, text=text, sentiment=doc.sentiment, noise=doc.noise)
            )
    finally:
        if client is not None:
            client.close()
    dataio.save_corpus(reduced_docs, args.out)
    return {"method": method.value, "documents": len(reduced_docs), "out": str(args.out)}


def cmd_eval_reduction(args) -> dict:
    truth = dataio.load_corpus(args.truth, normalize_text=args.normalize)
    truth_texts = [d.text for d in truth.documents]
    resources = metrics.EvalResources()
    if args.inputs:
        inputs = dataio.load_corpus(args.inputs, normalize_text=args.normalize)
        resources.inputs = [d.text for d in inputs.documents]
    if args.embeddings:
        resources.embeddings = dataio.load_embeddings(args.embeddings)
    if args.dict:
        resources.coverage_vocab = dataio.load_dictionary(args.dict)
    if args.human_tallies:
        raw = json.loads(Path(args.human_tallies).read_text(encoding="utf-8"))
        resources.human_tallies = {name: (int(a), int(t)) for name, (a, t) in raw.items()}
    outputs = {}
    for output_path in args.outputs:
        corpus = dataio.load_corpus(output_path, normalize_text=args.normalize)
        outputs[Path(output_path).stem] = [d.text for d in corpus.documents]
    reports = metrics.evaluate_reduction(outputs, truth_texts, resources)
    return {"reports": [r.as_dict() for r in reports]}


def cmd_agreement(args) -> dict:
    if args.agreement_command == "kappa":
        matrix = dataio.load_rating_matrix(args.matrix)
        return {
            "kappa": agreement.fleiss_kappa(matrix),
            "items": matrix.n_items,
            "raters_per_item": matrix.raters_per_item,
        }
    annotator = dataio.load_corpus(args.annotator, normalize_text=args.normalize)
    gold = dataio.load_corpus(args.gold, normalize_text=args.normalize)
    by_id = {d.id: d for d in gold.documents}
    if set(by_id) != {d.id for d in annotator.documents}:
        raise Malformed("annotator and gold files carry different ids")
    ann_labels, gold_labels = [], []
    for doc in annotator.documents:
        if doc.noise is None or by_id[doc.id].noise is None:
            raise Malformed(f"row {doc.id}: both files need noise labels")
        ann_labels.append(doc.noise)
        gold_labels.append(by_id[doc.id].noise)
    mode = "jaccard" if args.jaccard else "exact"
    score, passed = agreement.trustworthiness(
        ann_labels, gold_labels, threshold=args.threshold, mode=mode
    )
    return {"score": score, "pass": passed, "threshold": args.threshold, "mode": mode}


def _add_global_flags(parser, after_subcommand=False):
    # On subparsers the defaults are suppressed so a flag given after the
    # subcommand overrides the top-level value instead of resetting it.
    parser.add_argument(
        "--normalize",
        action=argparse.BooleanOptionalAction,
        default=argparse.SUPPRESS if after_subcommand else True,
        help="canonicalize text while loading corpora (default on)",
    )
    parser.add_argument(
        "--pretty",
        action="store_true",
        default=argparse.SUPPRESS if after_subcommand else False,
        help="human-readable output",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisekit", description=__doc__)
    _add_global_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        _add_global_flags(p, after_subcommand=True)
        return p

    p = add_parser("stats", help="dataset statistics as JSON")
    p.add_argument("corpus")
    p.add_argument("--bin-width", type=int, default=10)
    p.add_argument("--hist-tsv", help="write the length histogram as TSV")
    p.add_argument("--corr-tsv", help="write the label correlation matrix as TSV")
    p.set_defaults(func=cmd_stats)

    p = add_parser("dedupe", help="drop duplicate texts, keeping first occurrences")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_dedupe)

    p = add_parser("import-corpus", help="convert an upstream CSV to the corpus TSV schema")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--text-col", required=True)
    p.add_argument("--id-col", help="column holding ids (default: generated row numbers)")
    p.add_argument("--sentiment-col")
    p.add_argument(
        "--sentiment-map",
        help='value mapping such as "0=neutral,1=positive,2=negative"',
    )
    p.add_argument(
        "--noise-cols",
        help="comma-separated names of the ten 0/1 noise columns, in canonical order",
    )
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=cmd_import_corpus)

    def add_train_flags(p, lr_default):
        p.add_argument("--analyzer", choices=[m.value for m in AnalyzerMode], default="char")
        p.add_argument("--nmin", type=int, default=1)
        p.add_argument("--nmax", type=int, default=4)
        p.add_argument("--min-df", type=int, default=1)
        p.add_argument("--c", type=float, default=1.0)
        p.add_argument("--epochs", type=int, default=20)
        p.add_argument("--lr", type=float, default=lr_default)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)

    p = add_parser("train-noise", help="train the one-vs-rest noise identifier")
    p.add_argument("train")
    add_train_flags(p, lr_default=0.1)
    p.set_defaults(func=cmd_train_noise)

    p = add_parser("predict-noise", help="predict noise label sets")
    p.add_argument("model")
    p.add_argument("corpus")
    p.add_argument("--out", help="also write a corpus TSV with predicted noise bits")
    p.set_defaults(func=cmd_predict_noise)

    p = add_parser("train-sentiment", help="train the weighted softmax sentiment model")
    p.add_argument("train")
    add_train_flags(p, lr_default=0.05)
    p.add_argument(
        "--auto-weights",
        action="store_true",
        help="derive class weights from training counts",
    )
    p.set_defaults(func=cmd_train_sentiment)

    p = add_parser("predict-sentiment", help="predict sentiment labels")
    p.add_argument("model")
    p.add_argument("corpus")
    p.add_argument("--out", help="also write a corpus TSV with predicted sentiment")
    p.set_defaults(func=cmd_predict_sentiment)

    p = add_parser("reduce", help="apply one noise-reduction method")
    p.add_argument("corpus")
    p.add_argument("--method", required=True, choices=[m.value for m in ReduceMethod])
    p.add_argument("--dict", help="dictionary file (word<TAB>frequency)")
    p.add_argument("--phonetic-table", help="override the packaged phonetic class table")
    p.add_argument("--client", help="subprocess translator command line")
    p.add_argument("--fixture", help="JSONL fixture file answering client requests")
    p.add_argument("--src-lang", default="bn")
    p.add_argument("--pivot-lang", default="en")
    p.add_argument("--p", type=float, default=0.2, help="random masking probability")
    p.add_argument("--max-dist", type=int, help="fixed edit-distance budget for spell correction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reduce)

    p = add_parser("eval-reduction", help="score reduced corpora against ground truth")
    p.add_argument("outputs", nargs="+")
    p.add_argument("--truth", required=True)
    p.add_argument("--inputs", help="original noisy corpus (enables the composite score)")
    p.add_argument("--embeddings", help="embedding table for semantic similarity")
    p.add_argument("--dict", help="vocabulary for word coverage (defaults to embeddings)")
    p.add_argument("--human-tallies", help='JSON file {"method": [accurate, total], ...}')
    p.set_defaults(func=cmd_eval_reduction)

    p = add_parser("agreement", help="annotation-quality statistics")
    agreement_sub = p.add_subparsers(dest="agreement_command", required=True)
    pk = agreement_sub.add_parser("kappa", help="Fleiss' kappa of a rating matrix")
    _add_global_flags(pk, after_subcommand=True)
    pk.add_argument("matrix")
    pk.set_defaults(func=cmd_agreement)
    pt = agreement_sub.add_parser("trust", help="trustworthiness against control samples")
    _add_global_flags(pt, after_subcommand=True)
    pt.add_argument("annotator")
    pt.add_argument("gold")
    pt.add_argument("--threshold", type=float, default=90.0)
    pt.add_argument("--jaccard", action="store_true", help="per-label overlap instead of exact match")
    pt.set_defaults(func=cmd_agreement)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _thread_cap()
        payload = args.func(args)
    except NoisekitError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    _emit(payload, args.pretty)
    return 0


if __name__ == "__main__":
    sys.exit(main())
