"""Command-line driver: ``regreg parse``, ``regreg analyze`` and ``regreg bench``.

Exit codes are 0 (match / ok), 1 (no match) and 2 (usage or grammar error).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import List, Optional

from .actions import to_json, to_sexpr
from .analysis import RewriteError, analyze, paull_rewrite
from .bench import CSV_HEADER, benchmark_names, run_benchmark
from .engine import EngineOptions, run
from .frontend import Diagnostic, errors, load_grammar, validate
from .grammar import Grammar

EXIT_OK = 0
EXIT_NO_MATCH = 1
EXIT_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class CliConfig:
    subcommand: str
    grammar: Optional[str] = None
    text: Optional[str] = None
    start: Optional[str] = None
    peg: bool = False
    left_rec: str = "error"
    emit: str = "json"
    options: Optional[EngineOptions] = None


def _engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-memo", action="store_true", help="disable memoization")
    p.add_argument("--no-compact", action="store_true", help="never compact the memo table")
    p.add_argument("--fail-fast-bound", action="store_true",
                   help="fail when the remaining input is shorter than any completion")
    p.add_argument("--validate-structured", action="store_true",
                   help="warn when nested() ends are not monotone")
    p.add_argument("--trace", action="store_true", help="log every match call to stderr")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="regreg", description="Linear-time backtracking parser with nested().")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("parse", help="match a grammar against an input")
    p.add_argument("-g", "--grammar", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("-e", "--expr", help="inline input string")
    src.add_argument("-i", "--input", help="input file")
    p.add_argument("--start")
    p.add_argument("--peg", action="store_true", help="treat | as ordered choice")
    p.add_argument("--left-rec", choices=("rewrite", "error"), default="error")
    p.add_argument("--emit", choices=("json", "sexpr"), default="json")
    _engine_flags(p)

    a = sub.add_parser("analyze", help="static report for each rule")
    a.add_argument("-g", "--grammar", required=True)
    a.add_argument("--start")
    a.add_argument("--peg", action="store_true")

    b = sub.add_parser("bench", help="run a built-in benchmark, CSV on stdout")
    b.add_argument("name", help="one of: " + ", ".join(benchmark_names()))
    b.add_argument("-n", "--sizes", required=True, help="comma-separated input sizes")
    b.add_argument("--oracle-limit", type=int, default=0,
                   help="also run the reference parser for sizes up to this")
    _engine_flags(b)
    return top


def _options(ns) -> EngineOptions:
    return EngineOptions(memo=not ns.no_memo, compact=not ns.no_compact,
                         fail_fast=ns.fail_fast_bound, validate_structured=ns.validate_structured,
                         trace=ns.trace, trace_file=sys.stderr if ns.trace else None)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _report(diags: List[Diagnostic]) -> None:
    for d in diags:
        print(d, file=sys.stderr)


def _load(cfg: CliConfig) -> Optional[Grammar]:
    g, diags = load_grammar(_read(cfg.grammar), cfg.start, cfg.peg)
    if g is None:
        _report(diags)
        return None
    diags = validate(g)
    if cfg.left_rec == "rewrite":
        fixable = [d for d in diags if d.code == "left-recursion"]
        if fixable and not [d for d in errors(diags) if d.code != "left-recursion"]:
            try:
                g = paull_rewrite(g)
            except RewriteError as exc:
                for problem in exc.problems:
                    print(f"error left-recursion: {problem}", file=sys.stderr)
                return None
            diags = validate(g)
    _report(diags)
    if errors(diags):
        return None
    return g


def cmd_parse(cfg: CliConfig) -> int:
    g = _load(cfg)
    if g is None:
        return EXIT_ERROR
    out = run(g, cfg.start, cfg.text, cfg.options)
    for w in out.warnings:
        print(f"warning: {w}", file=sys.stderr)
    value = to_sexpr(out.value) if cfg.emit == "sexpr" and out.matched else to_json(out.value)
    doc = {"matched": out.matched, "end": out.end, "value": value, "stats": out.stats.as_dict()}
    print(json.dumps(doc, sort_keys=False))
    return EXIT_OK if out.matched else EXIT_NO_MATCH


def cmd_analyze(cfg: CliConfig) -> int:
    g, diags = load_grammar(_read(cfg.grammar), cfg.start, cfg.peg)
    if g is None:
        _report(diags)
        return EXIT_ERROR
    diags = validate(g)
    _report(diags)
    fatal = [d for d in diags if d.code in ("unresolved-rule", "lookahead-left-recursion",
                                             "no-start-rule")]
    if any(d.code == "unresolved-rule" for d in fatal):
        return EXIT_ERROR
    doc = {"start": g.start, "rules": analyze(g),
           "diagnostics": [{"severity": d.severity, "code": d.code, "rule": d.rule,
                            "message": d.message} for d in diags]}
    print(json.dumps(doc))
    return EXIT_ERROR if fatal else EXIT_OK


def cmd_bench(name: str, sizes: List[int], options: EngineOptions, oracle_limit: int) -> int:
    rows = run_benchmark(name, sizes, options, oracle_limit=oracle_limit)
    print(CSV_HEADER)
    for row in rows:
        print(row.csv())
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        if ns.command is None:
            raise UsageError("expected a subcommand: parse, analyze or bench")
        if ns.command == "bench":
            try:
                sizes = [int(x) for x in ns.sizes.split(",") if x.strip()]
            except ValueError:
                raise UsageError(f"bad size list {ns.sizes!r}")
            if not sizes or min(sizes) < 1:
                raise UsageError("sizes must be positive integers")
            return cmd_bench(ns.name, sizes, _options(ns), ns.oracle_limit)
        if ns.command == "analyze":
            return cmd_analyze(CliConfig("analyze", ns.grammar, start=ns.start, peg=ns.peg))
        text = ns.expr if ns.expr is not None else _read(ns.input)
        cfg = CliConfig("parse", ns.grammar, text, ns.start, ns.peg, ns.left_rec, ns.emit,
                        _options(ns))
        return cmd_parse(cfg)
    except SystemExit as exc:
        # --help
        return EXIT_OK if not exc.code else EXIT_ERROR
    except UsageError as exc:
        print(f"regreg: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:
        print(f"regreg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
