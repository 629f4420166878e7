"""Command-line entry point.

Subcommands: gen-data, estimate-pt, train, eval, correct, repl, gradcheck.
Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import kernels
from .checkpoint import load_checkpoint
from .config import (
    RunConfig,
    build_run_config,
    config_field_names,
    parse_config_file,
    require_files,
    require_output_dirs,
)
from .errors import ConfigError, PinyinTypoError
from .evaluation import evaluate, sweep_k
from .gradcheck import finite_difference_check, make_check_batch
from .keystrokes import (
    estimate_transitions,
    load_keystroke_log,
    load_transition_model,
    save_keystroke_log,
    save_transition_model,
)
from .lexicon import LETTER_INDEX, default_lexicon, load_lexicon
from .model import ModelConfig, Parameters
from .noise import InputType, NoiseSpec, classify_input_type, generate_corpus, load_corpus, save_corpus
from .training import TrainSpec, train
from .beam import beam_search


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    for name in config_field_names():
        common.add_argument(f"--{name}", metavar="V", dest=name)
    return common


def build_parser() -> _Parser:
    common = _common_parser()
    parser = _Parser(prog="pinyintypo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-data", parents=[common], help="synthesize corpus splits and keystroke log")
    p = sub.add_parser("estimate-pt", parents=[common], help="estimate letter transitions from a keystroke log")
    p.add_argument("log_path")
    p.add_argument("out_path")
    p.add_argument("--smoothing", type=float, default=0.0)
    sub.add_parser("train", parents=[common], help="train a model on the corpus")
    sub.add_parser("eval", parents=[common], help="report accuracy per input type")
    p = sub.add_parser("correct", parents=[common], help="print K-best corrections per input line")
    p.add_argument("checkpoint")
    p.add_argument("input", nargs="?", help="input file (default: stdin)")
    p = sub.add_parser("repl", parents=[common], help="interactive correction session")
    p.add_argument("checkpoint")
    p.add_argument("--transcript", metavar="PATH", help="append chosen corrections as corpus TSV")
    sub.add_parser("gradcheck", parents=[common], help="finite-difference check of the gradients")
    return parser


def _run_config(args) -> RunConfig:
    file_values = None
    if args.config:
        try:
            file_values = parse_config_file(args.config)
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}")
    overrides = {name: getattr(args, name, None) for name in config_field_names()}
    return build_run_config(file_values, overrides)


def _load_lexicon(cfg: RunConfig):
    if cfg.lexicon_path:
        require_files(cfg.lexicon_path)
        return load_lexicon(cfg.lexicon_path)
    return default_lexicon()


def cmd_gen_data(cfg: RunConfig) -> int:
    lexicon = _load_lexicon(cfg)
    spec = NoiseSpec(
        per_letter_error_rate=cfg.error_rate,
        type_mix=cfg.parsed_type_mix(),
        acronym_rate=cfg.acronym_rate,
        rng_seed=cfg.seed,
    )
    fractions = cfg.parsed_split()
    os.makedirs(cfg.corpus_dir, exist_ok=True)
    paths = {
        "train": cfg.resolved_train_corpus(),
        "dev": cfg.resolved_dev_corpus(),
        "test": cfg.resolved_test_corpus(),
    }
    require_output_dirs(*paths.values(), cfg.resolved_transition_model(), cfg.resolved_keystroke_log())
    samples, log = generate_corpus(
        lexicon,
        cfg.n_samples,
        spec,
        (cfg.sentence_len_min, cfg.sentence_len_max),
        shards=cfg.workers,
    )
    n = len(samples)
    n_train = round(n * fractions[0])
    n_dev = round(n * fractions[1])
    splits = {
        "train": samples[:n_train],
        "dev": samples[n_train : n_train + n_dev],
        "test": samples[n_train + n_dev :],
    }
    for name, part in splits.items():
        save_corpus(part, paths[name])
    save_keystroke_log(log, cfg.resolved_keystroke_log())
    save_transition_model(spec.ground_truth_matrix(), cfg.resolved_transition_model())
    print(f"wrote {n} samples: " + ", ".join(f"{k}={len(v)} ({paths[k]})" for k, v in splits.items()))
    print(f"keystrokes: {len(log)} ({cfg.resolved_keystroke_log()})")
    print(f"generating transitions: {cfg.resolved_transition_model()}")
    counts = {t: 0 for t in InputType}
    for s in samples:
        counts[s.input_type] += 1
    print("type distribution: " + ", ".join(f"{t.value}={c} ({100.0 * c / n:.2f}%)" for t, c in counts.items()))
    return 0


def cmd_estimate_pt(args) -> int:
    require_files(args.log_path)
    require_output_dirs(args.out_path)
    log = load_keystroke_log(args.log_path)
    model = estimate_transitions(log, smoothing=args.smoothing)
    save_transition_model(model, args.out_path)
    print(f"estimated transitions from {len(log)} keystrokes -> {args.out_path}")
    return 0


def _model_config(cfg: RunConfig, target_vocab_size: int) -> ModelConfig:
    return ModelConfig(
        embed_dim=cfg.embed_dim,
        hidden_dim=cfg.hidden_dim,
        source_vocab_size=27,
        target_vocab_size=target_vocab_size,
        attention_dim=cfg.attention_dim,
        max_decode_length=cfg.max_decode_length,
        init_range=cfg.init_range,
        seed=cfg.seed,
    )


def cmd_train(cfg: RunConfig) -> int:
    lexicon = _load_lexicon(cfg)
    require_files(cfg.resolved_train_corpus(), cfg.resolved_transition_model())
    require_output_dirs(cfg.checkpoint_path, cfg.train_log_path)
    corpus = load_corpus(cfg.resolved_train_corpus())
    pt = load_transition_model(cfg.resolved_transition_model())
    config = _model_config(cfg, len(lexicon.target_vocab))
    spec = TrainSpec(
        optimizer=cfg.optimizer,
        learning_rate=cfg.learning_rate,
        lr_decay_factor=cfg.lr_decay_factor,
        lr_decay_every=cfg.lr_decay_every,
        adam_beta1=cfg.adam_beta1,
        adam_beta2=cfg.adam_beta2,
        adam_eps=cfg.adam_eps,
        batch_size=cfg.batch_size,
        iterations=cfg.iterations,
        attention_loss_weight=cfg.attention_loss_weight,
        grad_clip=cfg.grad_clip,
        checkpoint_every=cfg.checkpoint_every,
        checkpoint_path=cfg.checkpoint_path,
        log_path=cfg.train_log_path,
    )
    print(f"training on {len(corpus)} samples ({kernels.BACKEND} kernel lane)")
    train(corpus, lexicon, pt, config, spec)
    print(f"checkpoint -> {cfg.checkpoint_path}; log -> {cfg.train_log_path}")
    return 0


def _load_model(cfg: RunConfig, checkpoint_path: str):
    require_files(checkpoint_path)
    params, config = load_checkpoint(checkpoint_path)
    lexicon = _load_lexicon(cfg)
    if len(lexicon.target_vocab) != config.target_vocab_size:
        raise ConfigError(
            f"lexicon has {len(lexicon.target_vocab)} target tokens but the "
            f"checkpoint was trained with {config.target_vocab_size}; pass the "
            f"matching --lexicon_path"
        )
    return params, config, lexicon


def cmd_eval(cfg: RunConfig) -> int:
    params, config, lexicon = _load_model(cfg, cfg.checkpoint_path)
    require_files(cfg.resolved_test_corpus())
    corpus = load_corpus(cfg.resolved_test_corpus())
    report = evaluate(params, config, lexicon, corpus, cfg.k_best)
    print(report.format_table(), end="")
    if cfg.report_path:
        require_output_dirs(cfg.report_path)
        with open(cfg.report_path, "w", encoding="utf-8") as f:
            f.write(report.to_tsv())
        print(f"report -> {cfg.report_path}")
    if cfg.sweep_k_max >= 2:
        dev_path = cfg.resolved_dev_corpus()
        sweep_corpus = load_corpus(dev_path) if os.path.exists(dev_path) else corpus
        result = sweep_k(params, config, lexicon, sweep_corpus, cfg.sweep_k_max, cfg.sweep_tau)
        if cfg.sweep_path:
            require_output_dirs(cfg.sweep_path)
            with open(cfg.sweep_path, "w", encoding="utf-8") as f:
                f.write(result.to_tsv())
        note = "" if result.saturated else " (no K met the threshold; saturated)"
        print(f"sweep: chose K={result.chosen_k} at tau={result.tau}{note}")
    return 0


def _correct_line(params, config, lexicon, line: str, k: int):
    hyps = beam_search(
        params,
        lexicon.encode_source(line),
        lexicon.target_end_id,
        k,
        config.max_decode_length,
    )
    return [(h.log_prob, lexicon.decode_target(h.tokens)) for h in hyps]


def cmd_correct(cfg: RunConfig, args) -> int:
    params, config, lexicon = _load_model(cfg, args.checkpoint)
    if args.input:
        require_files(args.input)
        stream = open(args.input, encoding="utf-8")
    else:
        stream = sys.stdin
    try:
        for raw in stream:
            line = raw.strip()
            if not line:
                continue
            if any(c not in LETTER_INDEX for c in line):
                print(f"skipping {line!r}: only letters a-z are allowed", file=sys.stderr)
                continue
            for rank, (score, syllables) in enumerate(
                _correct_line(params, config, lexicon, line, cfg.k_best), start=1
            ):
                print(f"{line}\t{rank}\t{score:.4f}\t{' '.join(syllables)}")
    finally:
        if stream is not sys.stdin:
            stream.close()
    return 0


def cmd_repl(cfg: RunConfig, args) -> int:
    params, config, lexicon = _load_model(cfg, args.checkpoint)
    transcript = None
    if args.transcript:
        require_output_dirs(args.transcript)
        transcript = open(args.transcript, "a", encoding="utf-8")
    print("type a raw pinyin string, pick a candidate by number, :quit to exit")
    try:
        while True:
            try:
                line = input("pinyin> ").strip()
            except EOFError:
                break
            if line == ":quit":
                break
            if not line:
                continue
            if any(c not in LETTER_INDEX for c in line):
                print("only letters a-z are allowed")
                continue
            cands = _correct_line(params, config, lexicon, line, cfg.k_best)
            for i, (score, syllables) in enumerate(cands, start=1):
                print(f"  {i}. {' '.join(syllables)}  ({score:.4f})")
            while True:
                try:
                    choice = input("select> ").strip()
                except EOFError:
                    choice = ""
                if not choice:
                    break
                if choice == ":quit":
                    if transcript:
                        transcript.close()
                    return 0
                if not choice.isdigit() or not 1 <= int(choice) <= len(cands):
                    print(f"enter a number 1..{len(cands)}")
                    continue
                chosen = cands[int(choice) - 1][1]
                print(" ".join(chosen))
                if transcript and chosen:
                    label = classify_input_type(line, chosen)
                    transcript.write(f"{line}\t{' '.join(chosen)}\t{label}\n")
                break
    finally:
        if transcript:
            transcript.close()
    return 0


def cmd_gradcheck(cfg: RunConfig) -> int:
    config = ModelConfig(
        embed_dim=8,
        hidden_dim=8,
        source_vocab_size=27,
        target_vocab_size=12,
        attention_dim=8,
        seed=cfg.seed,
    )
    params = Parameters.init(config)
    batch = make_check_batch(config, np.random.default_rng(cfg.seed + 1))
    threshold = 1e-4
    ok = True
    for lam in (0.0, 1.0):
        result = finite_difference_check(
            params, batch, lam, n_coords=200, rng=np.random.default_rng(cfg.seed + 2)
        )
        print(f"lam={lam}: {result}")
        ok = ok and result.max_rel_error < threshold
    print(f"gradcheck {'PASS' if ok else 'FAIL'} (threshold {threshold})")
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "estimate-pt":
            return cmd_estimate_pt(args)
        cfg = _run_config(args)
        if args.command == "gen-data":
            return cmd_gen_data(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "eval":
            return cmd_eval(cfg)
        if args.command == "correct":
            return cmd_correct(cfg, args)
        if args.command == "repl":
            return cmd_repl(cfg, args)
        if args.command == "gradcheck":
            return cmd_gradcheck(cfg)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return 1
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 1
    except (PinyinTypoError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entry_point():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry_point()
