"""Command-line driver: ``mars eval|compare|search|validate|models``.

Exit codes: 0 success, 1 usage error, 2 parse or validation error,
3 evaluation error, 4 unsatisfiable or oversize search.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .dsl import format_error, try_parse
from .engine import ModelError, as_model, compare_detailed, preferred_set
from .errors import MarsError, SearchSizeError, UnknownIdError, UnsatisfiableTargetError
from .explain import describe_record, model_summary, render_plain, render_structured
from .model import ModelKind, validate_scenario
from .search import SearchQuery, Target, search_paradigms

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_EVAL = 3
EXIT_SEARCH = 4


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mars", description="Select ethically preferred actions from a scenario file.")
    p.add_argument("--version", action="version", version=f"mars {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    kinds = [k.value for k in ModelKind]

    ev = sub.add_parser("eval", help="compute the preferred actions")
    ev.add_argument("file")
    ev.add_argument("--model", choices=kinds, help="override the file's model line")
    ev.add_argument("--explain", action="store_true", help="print every pairwise comparison")
    ev.add_argument("--output", choices=["plain", "structured"], default="plain")

    cp = sub.add_parser("compare", help="compare two actions")
    cp.add_argument("file")
    cp.add_argument("first")
    cp.add_argument("second")
    cp.add_argument("--model", choices=kinds)

    se = sub.add_parser("search", help="find stratifications yielding a target outcome")
    se.add_argument("file")
    target = se.add_mutually_exclusive_group(required=True)
    target.add_argument("--contains", metavar="ACTION", help="keep stratifications whose preferred set contains ACTION")
    target.add_argument("--exact", metavar="A,B,...", help="keep stratifications whose preferred set is exactly this")
    se.add_argument("--model", choices=kinds)
    se.add_argument("--max-strata", type=int, metavar="K")
    se.add_argument("--workers", type=int, default=1, help="evaluate candidates in this many processes")

    va = sub.add_parser("validate", help="check a scenario file")
    va.add_argument("file")

    sub.add_parser("models", help="list the evaluation models")
    return p


def _color() -> bool:
    return os.environ.get("MARS_COLOR", "0") == "1"


def _load(path: str, err):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _Usage(f"mars: cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError as exc:
        print(f"{path}: error: not valid UTF-8 ({exc.reason} at byte {exc.start})", file=err)
        return None, None
    scenario, errors = try_parse(text)
    if errors:
        for e in errors:
            print(format_error(e, text, path, _color()), file=err)
        print(f"{path}: {len(errors)} error(s)", file=err)
        return None, text
    return scenario, text


def _model_for(args, scenario):
    return as_model(args.model or scenario.default_model, scenario)


def _cmd_eval(args, out, err) -> int:
    s, _ = _load(args.file, err)
    if s is None:
        return EXIT_PARSE
    result = preferred_set(s, _model_for(args, s))
    if args.output == "structured":
        out.write(render_structured(result.trace))
    elif args.explain:
        out.write(render_plain(result.trace))
    else:
        out.write(f"scenario: {s.name}\nmodel: {result.trace.model.value}\n")
        out.write(f"preferred: {', '.join(result.preferred)}\n")
    return EXIT_OK


def _cmd_compare(args, out, err) -> int:
    s, _ = _load(args.file, err)
    if s is None:
        return EXIT_PARSE
    for a in (args.first, args.second):
        if a not in s.actions:
            raise _Usage(f"mars: unknown action {a!r} (declared: {', '.join(s.actions)})")
    rec = compare_detailed(s, _model_for(args, s), args.first, args.second)
    out.write(describe_record(rec) + "\n")
    out.write(f"outcome: {rec.outcome.value}\n")
    return EXIT_OK


def _cmd_search(args, out, err) -> int:
    s, _ = _load(args.file, err)
    if s is None:
        return EXIT_PARSE
    if args.contains is not None:
        target = Target.contains(args.contains)
    else:
        ids = [x.strip() for x in args.exact.split(",") if x.strip()]
        target = Target.exactly(*ids)
    unknown = [a for a in target.actions if a not in s.actions]
    if unknown:
        raise _Usage(f"mars: unknown action(s) {', '.join(sorted(unknown))} (declared: {', '.join(s.actions)})")
    model = _model_for(args, s)
    report = search_paradigms(SearchQuery(s, model, target, args.max_strata), workers=args.workers)
    out.write(
        f"search: model={model.kind.value} target={target.describe()} "
        f"candidates={report.examined} matches={len(report)} skipped={report.skipped}\n"
    )
    for i, (st, result) in enumerate(report, start=1):
        out.write(f"{i}: {st.describe()} | preferred: {', '.join(result.preferred)}\n")
    return EXIT_OK


def _cmd_validate(args, out, err) -> int:
    s, _ = _load(args.file, err)
    if s is None:
        return EXIT_PARSE
    report = validate_scenario(s)
    for w in report.warnings:
        print(f"{args.file}: warning: {w}", file=err)
    out.write(f"{args.file}: ok ({s.n} actions, {s.m} values, {s.stratification.k} strata)\n")
    return EXIT_OK


def _cmd_models(args, out, err) -> int:
    width = max(len(k.value) for k in ModelKind)
    for k in ModelKind:
        out.write(f"{k.value:<{width}}  {model_summary(k)}\n")
    return EXIT_OK


_COMMANDS = {
    "eval": _cmd_eval,
    "compare": _cmd_compare,
    "search": _cmd_search,
    "validate": _cmd_validate,
    "models": _cmd_models,
}


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = _build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help / --version
            return int(exc.code or 0)
        if getattr(args, "max_strata", None) is not None and args.max_strata < 1:
            raise _Usage("mars: --max-strata must be at least 1")
        return _COMMANDS[args.command](args, out, err)
    except _Usage as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except (SearchSizeError, UnsatisfiableTargetError) as exc:
        print(f"mars: search error: {exc}", file=err)
        return EXIT_SEARCH
    except (ModelError, UnknownIdError) as exc:
        print(f"mars: evaluation error: {exc}", file=err)
        return EXIT_EVAL
    except MarsError as exc:
        print(f"mars: error: {exc}", file=err)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
