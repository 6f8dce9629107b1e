"""Command-line entry point: train, generate, evaluate, gradcheck, stats."""

import argparse
import hashlib
import json
import logging
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, text
from .beam import beam_search, select_diverse
from .checkpoint import load_checkpoint
from .config import Config, apply_preset
from .kernels import active_lane
from .metrics import evaluate_corpus
from .model import DistractorModel
from .tensor import set_default_dtype
from .trainer import train
from .vocab import Vocabulary, build_vocab, load_embeddings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_BAD_CONFIG = 4
EXIT_RUNTIME = 5


def _add_common_flags(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--data-dir", help="directory holding train/valid/test.jsonl")
    p.add_argument("--checkpoint", help="checkpoint file to load")
    p.add_argument("--out", help="output directory or file")
    p.add_argument("--beam-size", type=int, help="beam width (default 10)")
    p.add_argument("--jaccard-threshold", type=float, help="diversity threshold (default 0.5)")
    p.add_argument("--lambda", dest="lambda_ssl", type=float,
                   help="semantic-similarity loss weight (default 0.0001)")
    p.add_argument("--seed", type=int, help="PRNG seed")
    p.add_argument("--preset", choices=["full", "hred", "coattn", "ssl"],
                   help="ablation preset")
    p.add_argument("--precision", choices=["f32", "f64"], help="float width (default f64)")


_FLAG_FIELDS = ("beam_size", "jaccard_threshold", "lambda_ssl", "seed", "precision")


def _build_config(args, extra_fields=()):
    cfg = Config.from_file(args.config) if args.config else Config()
    if args.preset:
        apply_preset(cfg, args.preset)
    for field in _FLAG_FIELDS + tuple(extra_fields):
        value = getattr(args, field, None)
        if value is not None:
            setattr(cfg, field, value)
    cfg.validate()
    set_default_dtype(cfg.precision)
    return cfg


def _file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir, command, cfg, data_paths, outputs):
    manifest = {
        "command": command,
        "created": datetime.now(timezone.utc).isoformat(),
        "package_version": __version__,
        "kernel_lane": active_lane(),
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "dataset_hashes": {p: _file_sha256(p) for p in data_paths},
        "outputs": outputs,
    }
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _resolve_data_file(args, name, flag_value=None):
    if flag_value:
        return flag_value
    if args.data_dir:
        return os.path.join(args.data_dir, name)
    raise FileNotFoundError(f"no path given for the {name} split (use --data-dir or the explicit flag)")


def _ingest(path, vocab, cfg, require_distractors=True):
    records = text.read_jsonl(path)
    tokenized = text.filter_dataset(text.tokenize_records(records))
    samples, report = text.encode_samples(
        tokenized,
        vocab,
        max_sentences=cfg.max_sentences,
        max_sentence_tokens=cfg.max_sentence_tokens,
        max_question_tokens=cfg.max_question_tokens,
        max_distractor_tokens=cfg.max_distractor_tokens,
    ) if require_distractors else _encode_lenient(tokenized, vocab, cfg)
    return records, tokenized, samples, report


def _encode_lenient(tokenized, vocab, cfg):
    for s in tokenized:
        if not s.distractors:
            s.distractors = [["<placeholder>"]]
    return text.encode_samples(
        tokenized,
        vocab,
        max_sentences=cfg.max_sentences,
        max_sentence_tokens=cfg.max_sentence_tokens,
        max_question_tokens=cfg.max_question_tokens,
        max_distractor_tokens=cfg.max_distractor_tokens,
    )


def cmd_train(args):
    cfg = _build_config(args, extra_fields=("epochs", "batch_size", "hidden_size",
                                            "embed_dim", "vocab_size"))
    train_path = _resolve_data_file(args, "train.jsonl", args.train_file)
    valid_path = _resolve_data_file(args, "valid.jsonl", args.valid_file)
    out_dir = args.out or "runs/train"
    _write_manifest(out_dir, "train", cfg, [train_path, valid_path],
                    [os.path.join(out_dir, n) for n in ("best.ckpt", "train_log.jsonl")])

    train_records = text.read_jsonl(train_path)
    train_tok = text.filter_dataset(text.tokenize_records(train_records))
    if not train_tok:
        raise ValueError("no training samples after filtering")
    vocab = build_vocab(text.iter_corpus_tokens(train_tok), cfg.vocab_size)
    cfg.vocab_size = len(vocab)  # actual size may undershoot the cap
    vocab.save(os.path.join(out_dir, "vocab.tsv"))
    cfg.save(os.path.join(out_dir, "config.json"))

    train_samples, trunc = text.encode_samples(
        train_tok, vocab,
        max_sentences=cfg.max_sentences, max_sentence_tokens=cfg.max_sentence_tokens,
        max_question_tokens=cfg.max_question_tokens,
        max_distractor_tokens=cfg.max_distractor_tokens)
    _, _, valid_samples, _ = _ingest(valid_path, vocab, cfg)
    logger.info("train instances: %d, valid instances: %d, truncated tokens: %d",
                sum(len(s.distractors) for s in train_samples),
                sum(len(s.distractors) for s in valid_samples), trunc.total())

    embed_init = None
    if args.embeddings:
        embed_init, coverage = load_embeddings(
            args.embeddings, vocab, cfg.embed_dim, np.random.default_rng(cfg.seed))
        print(f"embedding coverage: {coverage:.1%}")
    model = DistractorModel(cfg, embed_init=embed_init)
    summary = train(cfg, model, train_samples, valid_samples, out_dir)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _load_model(args, cfg_override_fields=()):
    if not args.checkpoint:
        raise FileNotFoundError("--checkpoint is required")
    ckpt_dir = os.path.dirname(os.path.abspath(args.checkpoint))
    config_path = args.model_config or os.path.join(ckpt_dir, "config.json")
    vocab_path = args.vocab or os.path.join(ckpt_dir, "vocab.tsv")
    cfg = Config.from_file(config_path)
    for field in cfg_override_fields:
        value = getattr(args, field, None)
        if value is not None:
            setattr(cfg, field, value)
    cfg.validate()
    set_default_dtype(cfg.precision)
    vocab = Vocabulary.load(vocab_path)
    values, ckpt_hash = load_checkpoint(args.checkpoint)
    if ckpt_hash != cfg.model_hash():
        raise ValueError(
            f"checkpoint config hash {ckpt_hash[:12]} does not match config "
            f"{cfg.model_hash()[:12]} from {config_path}"
        )
    model = DistractorModel(cfg)
    model.set_values(values)
    return model, vocab, cfg


def cmd_generate(args):
    model, vocab, cfg = _load_model(
        args, cfg_override_fields=("beam_size", "jaccard_threshold", "seed"))
    data_path = _resolve_data_file(args, "test.jsonl", args.data)
    out_path = args.out or "generated.jsonl"
    _, _, samples, _ = _ingest(data_path, vocab, cfg, require_distractors=False)
    samples = sorted(samples, key=lambda s: s.id)
    length_norm = cfg.length_norm if args.raw_likelihood is None else not args.raw_likelihood
    with open(out_path, "w", encoding="utf-8") as fh:
        for sample in samples:
            candidates = beam_search(model, sample, beam_size=cfg.beam_size,
                                     max_len=cfg.max_decode_len, length_norm=length_norm)
            selection = select_diverse(candidates, threshold=cfg.jaccard_threshold)
            record = {
                "id": sample.id,
                "question": sample.question_text,
                "distractors": [
                    " ".join(vocab.decode_ids(p.tokens)) for p in selection.picks
                ],
                "scores": [p.score for p in selection.picks],
                "relaxed_threshold": (
                    selection.effective_threshold if selection.relaxed else None
                ),
            }
            if selection.degenerate:
                record["degenerate"] = True
            fh.write(json.dumps(record) + "\n")
    print(f"wrote {len(samples)} samples to {out_path}")
    return EXIT_OK


def cmd_evaluate(args):
    if not args.generated:
        raise FileNotFoundError("--generated is required")
    gold_path = _resolve_data_file(args, "test.jsonl", args.data)
    generated = text.read_jsonl(args.generated)
    gold = text.read_jsonl(gold_path)
    report = evaluate_corpus(generated, gold, strict_slots=args.strict_slots)
    print(report.to_table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_gradcheck(args):
    from .gradsuite import all_passed, render, run_suite

    set_default_dtype("f64")
    results = run_suite(seed=args.seed if args.seed is not None else 7)
    print(render(results))
    if all_passed(results):
        print("gradcheck: all blocks under 1e-4")
        return EXIT_OK
    print("gradcheck: FAILURES above", file=sys.stderr)
    return EXIT_RUNTIME


def cmd_stats(args):
    data_path = _resolve_data_file(args, "train.jsonl", args.data)
    records = text.read_jsonl(data_path)
    tokenized = text.tokenize_records(records)
    kept = text.filter_dataset(tokenized)
    stats = text.compute_stats(kept)
    for line in stats.lines():
        print(line)
    dropped = len(tokenized) - len(kept)
    if dropped:
        print(f"(dropped {dropped} of {len(tokenized)} records with mid-question blanks)")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="distractgen",
        description="Train, run and evaluate the co-attention distractor generator.",
    )
    parser.add_argument("--verbose", action="store_true", help="INFO-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model")
    _add_common_flags(p)
    p.add_argument("--train-file", help="training JSONL (overrides --data-dir)")
    p.add_argument("--valid-file", help="validation JSONL (overrides --data-dir)")
    p.add_argument("--embeddings", help="pretrained word-vector text file")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--hidden-size", dest="hidden_size", type=int)
    p.add_argument("--embed-dim", dest="embed_dim", type=int)
    p.add_argument("--vocab-size", dest="vocab_size", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="decode distractors with a trained model")
    _add_common_flags(p)
    p.add_argument("--data", help="input JSONL (overrides --data-dir/test.jsonl)")
    p.add_argument("--model-config", help="config.json (default: next to checkpoint)")
    p.add_argument("--vocab", help="vocab.tsv (default: next to checkpoint)")
    p.add_argument("--raw-likelihood", action="store_const", const=True, default=None,
                   help="rank candidates by raw log-probability (no length normalization)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score generated output against gold distractors")
    _add_common_flags(p)
    p.add_argument("--generated", help="JSONL produced by `generate`")
    p.add_argument("--data", help="gold JSONL (overrides --data-dir/test.jsonl)")
    p.add_argument("--strict-slots", action="store_true",
                   help="score slot i only against gold distractor i")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradcheck", help="finite-difference checks on a toy config")
    _add_common_flags(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("stats", help="dataset statistics")
    _add_common_flags(p)
    p.add_argument("--data", help="JSONL to summarize (overrides --data-dir/train.jsonl)")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except ValueError as exc:
        print(f"error: invalid input or config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
