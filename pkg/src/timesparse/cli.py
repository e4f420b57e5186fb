"""Command-line front end: gen / train / decode / eval / sweep / losscheck.

Every RunConfig key is exposed as a ``--key value`` flag on the run-driven
subcommands; flags override the config file, which overrides defaults, with
the TST_SEED environment variable slotting in between.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from .data import TaskSpec, generate, load_jsonl, save_jsonl
from .decoding import beam_decode, greedy_decode
from .errors import TimesparseError
from .harness import (RunConfig, build_model_from_config, evaluate_checkpoint,
                      load_config, losscheck, sweep, train)
from .checkpoint import load_checkpoint
from .metrics import CSV_FIELDS
from .tensor import Tensor, no_grad


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="flat key=value config file")
    for f in fields(RunConfig):
        parser.add_argument(f"--{f.name}", default=None, metavar="V")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {f.name: getattr(args, f.name)
                 for f in fields(RunConfig) if getattr(args, f.name) is not None}
    return load_config(args.config, overrides)


def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = argparse.ArgumentParser(prog="timesparse")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic JSONL dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    for f in fields(TaskSpec):
        p.add_argument(f"--{f.name}", type=type(f.default), default=f.default)

    for name in ("train", "decode", "eval"):
        p = sub.add_parser(name)
        _add_config_flags(p)

    p = sub.add_parser("sweep", help="train/evaluate a window-config grid")
    _add_config_flags(p)
    p.add_argument("--lengths", default="1,2,4", help="comma-separated window lengths")
    p.add_argument("--strides", default="1,2,4", help="comma-separated window strides")
    p.add_argument("--strategies", default="ae,lc,sa")
    p.add_argument("--cache_dir", default="sweep_cache")

    p = sub.add_parser("losscheck", help="run built-in correctness spot-checks")
    p.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (TimesparseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "gen":
        task = TaskSpec(**{f.name: getattr(args, f.name) for f in fields(TaskSpec)})
        utts = generate(task, args.seed)
        save_jsonl(args.out, utts)
        print(f"wrote {len(utts)} utterances to {args.out}")
        return 0

    if args.command == "train":
        cfg = _config_from_args(args)
        _, losses = train(cfg)
        print(f"final loss {losses[-1]:.4f} after {len(losses)} steps"
              + (f", checkpoint at {cfg.checkpoint}" if cfg.checkpoint else ""))
        return 0

    if args.command == "decode":
        cfg = _config_from_args(args)
        model = build_model_from_config(cfg)
        if cfg.checkpoint:
            load_checkpoint(cfg.checkpoint, model)
        decode = greedy_decode if cfg.decoder == "greedy" else beam_decode
        for utt in load_jsonl(cfg.eval_dataset or cfg.dataset):
            with no_grad():
                hidden = model.hidden_states(Tensor(utt.features))
            hyp = decode(hidden, model, cfg.decode_config())
            print(f"{utt.id}\t{' '.join(str(k) for k in hyp.labels)}")
        return 0

    if args.command == "eval":
        cfg = _config_from_args(args)
        report = evaluate_checkpoint(cfg)
        for field_name in CSV_FIELDS:
            print(f"{field_name}: {getattr(report, field_name)}")
        return 0

    if args.command == "sweep":
        cfg = _config_from_args(args)
        reports = sweep(cfg, _csv_ints(args.lengths), _csv_ints(args.strides),
                        [s for s in args.strategies.split(",") if s], args.cache_dir)
        print(",".join(CSV_FIELDS))
        for rep in reports:
            print(",".join(str(v) for v in rep.row()))
        return 0

    if args.command == "losscheck":
        failed = 0
        for name, ok, detail in losscheck(args.seed):
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
            failed += 0 if ok else 1
        return 1 if failed else 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
