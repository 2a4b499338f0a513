"""``slc``: check, run, or batch-check LinLang programs.

Exit codes: 0 ok, 1 rejected by the checker (or corpus mismatch),
2 lex/parse error (or unreadable manifest), 3 runtime error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .checker import MODES, Code, Diagnostic, Mode, check_program
from .corpus import DEFAULT_MANIFEST, ManifestError, load_manifest, run_corpus
from .runtime import EntropyUnavailable, EvalError, SeededPrng, SystemEntropy, eval_term
from .syntax import LexError, ParseError, Term, parse_source

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_SYNTAX = 2
EXIT_RUNTIME = 3
EXIT_USAGE = 64


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class CliConfig:
    subcommand: str
    mode: Mode = Mode.LINEAR
    input: Path | None = None
    json: bool = False
    seed: int = 0
    entropy: bool = False
    manifest: Path = DEFAULT_MANIFEST


def _color(text: str, code: str) -> str:
    if os.environ.get("SLC_COLOR") == "0" or not sys.stderr.isatty():
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


def _emit(diagnostics: list[Diagnostic], config: CliConfig) -> None:
    for d in diagnostics:
        if config.json:
            print(json.dumps(d.to_json()))
        else:
            where = f"{config.input}:{d.span.line}:{d.span.column}"
            print(f"{where}: {_color('error', '31;1')}[{d.code.value}] {d.message}",
                  file=sys.stderr)


def _load(config: CliConfig) -> Term | int:
    """Parse the input file, or report and return an exit status."""
    path = config.input
    if not path.is_file():
        print(f"slc: no such file: {path}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return parse_source(path.read_bytes())
    except (LexError, ParseError) as exc:
        code = Code.LEX_ERROR if isinstance(exc, LexError) else Code.PARSE_ERROR
        _emit([Diagnostic(code, exc.span, exc.message, config.mode)], config)
        return EXIT_SYNTAX


def cmd_check(config: CliConfig) -> int:
    term = _load(config)
    if isinstance(term, int):
        return term
    result = check_program(term, config.mode)
    if not result.accepted:
        _emit(result.diagnostics, config)
        return EXIT_REJECT
    print(result.type, file=sys.stderr if config.json else sys.stdout)
    return EXIT_OK


def cmd_run(config: CliConfig) -> int:
    term = _load(config)
    if isinstance(term, int):
        return term
    result = check_program(term, config.mode)
    if not result.accepted:
        _emit(result.diagnostics, config)
        return EXIT_REJECT
    source = SystemEntropy() if config.entropy else SeededPrng(config.seed)
    try:
        value = eval_term(term, source)
    except (EvalError, EntropyUnavailable) as exc:
        print(f"slc: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(value)
    return EXIT_OK


def cmd_corpus(config: CliConfig) -> int:
    if not config.manifest.exists():
        print(f"slc: no such manifest: {config.manifest}", file=sys.stderr)
        return EXIT_USAGE
    try:
        entries = load_manifest(config.manifest)
        actual, mismatches = run_corpus(entries)
    except ManifestError as exc:
        print(f"slc: {exc}", file=sys.stderr)
        return EXIT_SYNTAX
    if config.json:
        for entry, got in zip(entries, actual):
            print(json.dumps({
                "name": entry.name,
                "expected": {m.value: entry.verdicts[m] for m in MODES},
                "actual": {m.value: got[m] for m in MODES},
            }))
    else:
        width = max([len(e.name) for e in entries] + [4])
        cols = [max([len(m.value)] + [len(got[m]) for got in actual]) for m in MODES]
        print("  ".join([f"{'name':<{width}}"] + [f"{m.value:<{w}}" for m, w in zip(MODES, cols)]).rstrip())
        for entry, got in zip(entries, actual):
            cells = [f"{got[m]:<{w}}" for m, w in zip(MODES, cols)]
            print("  ".join([f"{entry.name:<{width}}"] + cells).rstrip())
        for mm in mismatches:
            print(f"MISMATCH {mm.name} [{mm.mode.value}]: expected {mm.expected}, got {mm.actual}")
        print(f"{len(entries)} programs, {len(entries) * len(MODES)} verdicts, "
              f"{len(mismatches)} mismatches")
    return EXIT_REJECT if mismatches else EXIT_OK


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="slc", description="Substructural LinLang checker")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_ArgumentParser)
    modes = [m.value for m in MODES]

    check = sub.add_parser("check", help="type-check a program")
    check.add_argument("--mode", choices=modes, default=Mode.LINEAR.value)
    check.add_argument("--json", action="store_true", help="line-delimited JSON diagnostics")
    check.add_argument("file", type=Path)

    run = sub.add_parser("run", help="check, then evaluate a program")
    run.add_argument("--mode", choices=modes, default=Mode.LINEAR.value)
    run.add_argument("--json", action="store_true")
    source = run.add_mutually_exclusive_group()
    source.add_argument("--seed", type=_seed, default=None)
    source.add_argument("--entropy", action="store_true", help="draw nonces from the OS")
    run.add_argument("file", type=Path)

    corpus = sub.add_parser("corpus", help="check the corpus against its golden matrix")
    corpus.add_argument("--manifest", type=Path, default=DEFAULT_MANIFEST)
    corpus.add_argument("--json", action="store_true")
    return parser


def parse_config(argv: list[str] | None = None) -> CliConfig:
    args = build_parser().parse_args(argv)
    config = CliConfig(args.subcommand, json=args.json)
    if args.subcommand in ("check", "run"):
        config.mode = Mode(args.mode)
        config.input = args.file
    if args.subcommand == "run":
        config.entropy = args.entropy
        config.seed = args.seed if args.seed is not None else 0
    if args.subcommand == "corpus":
        config.manifest = args.manifest
    return config


COMMANDS = {"check": cmd_check, "run": cmd_run, "corpus": cmd_corpus}


def main(argv: list[str] | None = None) -> int:
    config = parse_config(argv)
    return COMMANDS[config.subcommand](config)


if __name__ == "__main__":
    sys.exit(main())
