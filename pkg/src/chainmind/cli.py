"""Command line entry point: ``chainmind <subcommand>``."""
from __future__ import annotations

import argparse
import sys

from .activation import PropagationLimitError
from .bank import BankError, MemoryBank, merge
from .config import Config, load_config
from .demos import DEMOS, demo_script
from .harness import load_script, run_scenario
from .innate import InnateRegistry, default_specs, install, load_innate
from .repl import Repl
from .tokenizer import ScriptError


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="key=value config file")
    parser.add_argument("--seed", type=int, default=default, help="feature-vector hash seed")
    parser.add_argument("--trace", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="print the decision trace of every turn")
    parser.add_argument("--dump-report", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="print every activation report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainmind", description="Token memory bank with chain association activation.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run a scenario script")
    run.add_argument("script")
    run.add_argument("--bank", help="start from this bank file")
    run.add_argument("--innate", help="install presets from this innate spec file first")
    run.add_argument("-o", "--output", help="write the final bank here")

    repl = sub.add_parser("repl", parents=[common], help="interactive text session")
    repl.add_argument("--bank", help="start from this bank file")
    repl.add_argument("--innate", help="innate spec file, or 'default'")

    mrg = sub.add_parser("merge", parents=[common], help="stitch two banks together")
    mrg.add_argument("a")
    mrg.add_argument("b")
    mrg.add_argument("-o", "--output", required=True)
    mrg.add_argument("--offset", type=int, help="time shift for the second bank")

    dump = sub.add_parser("dump", parents=[common], help="print a bank, or the effective config")
    dump.add_argument("bank", nargs="?")
    dump.add_argument("--print-config", "--show-config", dest="show_config", action="store_true",
                      help="print every config key with its effective value")

    demo = sub.add_parser("demo", parents=[common], help="run a canonical demo")
    demo.add_argument("name", choices=sorted(DEMOS))
    return parser


def _config(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _emit_run(transcript, out) -> int:
    out.write(transcript.text())
    return 0 if transcript.ok else 1


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    # ``dump --config`` (no file argument) prints the config, as documented
    if argv[:1] == ["dump"] and argv[1:] == ["--config"]:
        argv = ["dump", "--show-config"]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "run":
            script = load_script(args.script)
            bank = MemoryBank.load(args.bank) if args.bank else None
            registry = InnateRegistry()
            if args.innate:
                bank = bank or MemoryBank.for_config(script.config(cfg))
                install(bank, load_innate(args.innate, cfg), registry, cfg)
            transcript, bank = run_scenario(script, bank, cfg, registry=registry,
                                            trace=args.trace, dump_report=args.dump_report)
            if args.output:
                bank.save(args.output)
            return _emit_run(transcript, out)
        if args.command == "demo":
            transcript, _ = run_scenario(demo_script(args.name), None, cfg, trace=args.trace,
                                         dump_report=args.dump_report)
            return _emit_run(transcript, out)
        if args.command == "merge":
            a, b = MemoryBank.load(args.a), MemoryBank.load(args.b)
            merged = merge(a, b, offset=args.offset, config=cfg)
            merged.save(args.output)
            out.write(f"merged {len(a)} + {len(b)} = {len(merged)} records -> {args.output}\n")
            return 0
        if args.command == "dump":
            if args.show_config or not args.bank:
                out.write(cfg.dumps())
                return 0
            bank = MemoryBank.load(args.bank)
            out.write(bank.dumps())
            stats = bank.stats()
            out.write(f"# records={stats['records']} nonzero_memory={stats['nonzero_memory']}\n")
            return 0
        if args.command == "repl":
            bank = MemoryBank.load(args.bank) if args.bank else MemoryBank.for_config(cfg)
            registry = InnateRegistry()
            if args.innate:
                specs = default_specs(cfg) if args.innate == "default" else load_innate(args.innate, cfg)
                install(bank, specs, registry, cfg)
            Repl(bank, cfg, registry, args.trace, args.dump_report).run(sys.stdin, out)
            return 0
    except (OSError, ScriptError, BankError, ValueError, PropagationLimitError) as exc:
        print(f"chainmind: error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
