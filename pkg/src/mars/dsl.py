r"""Reader and writer for ``.mars`` scenario files.

The format is line oriented; ``#`` starts a comment outside string literals
and blank lines are ignored. Each non-blank line is one directive::

    scenario "<name>"                        optional, at most once
    actions: <id>, <id>, ...                 exactly once, at least one id
    values: <id>, ...                        exactly once, may be empty
    stratum <i>: <id>, ...                   i = 1, 2, ... in order, top first
    weight <value>: <positive number>        at most once per value
    impact <action>: <value>=<c>, ...        c in -1, 0, 1, +1; at most once per action
    model: <kind>                            optional, default additive

Ids are tokens of letters, digits and underscores. The scenario name is a
double-quoted string with backslash escapes ``\\ \" \n \t \r`` plus
``\uXXXX`` and ``\UXXXXXXXX`` for other non-printable characters.
Directive order is free when reading; :func:`serialize_scenario` writes the
order shown above, with ids in declaration order and zero coefficients and
unit weights omitted.

The reader reports every problem it finds in one pass. Each
:class:`ParseError` points at the token responsible.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import MarsError
from .explain import quote, unescape
from .model import (
    ImpactMatrix,
    ModelKind,
    Scenario,
    Stratification,
    Weights,
    is_valid_id,
    validate_scenario,
)

ERROR_KINDS = (
    "syntax",
    "duplicate-id",
    "unknown-reference",
    "bad-coefficient",
    "bad-weight",
    "partition-violation",
)

_COEFFICIENT = re.compile(r"[+-]?[01]")
_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_STRATUM_NO = re.compile(r"\d+")
_NEWLINE = re.compile(r"\r?\n")
_TOKEN = re.compile(r'\s+|(?P<punct>[,:=])|(?P<comment>#.*)|(?P<string>")|(?P<word>[^\s,:=#"]+)')


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError(f"invalid span {self}")

    @property
    def end_column(self) -> int:
        """First column after the span."""
        return self.column + self.length

    def covers(self, line: int, column: int, length: int = 1) -> bool:
        return self.line == line and self.column <= column and column + length <= self.end_column


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    kind: str
    message: str
    related: tuple[SourceSpan, ...] = ()

    def spans(self) -> tuple[SourceSpan, ...]:
        return (self.span,) + self.related


class ScenarioSyntaxError(MarsError):
    """The scenario text could not be read; ``errors`` holds every diagnostic."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        first = errors[0]
        more = f" (and {len(errors) - 1} more)" if len(errors) > 1 else ""
        super().__init__(f"{first.span.line}:{first.span.column}: {first.message}{more}")


@dataclass(frozen=True)
class _Tok:
    kind: str  # word, punct, string
    text: str
    line: int
    col: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.col, max(1, len(self.text)))


class _LineError(Exception):
    def __init__(self, tok_or_span, message: str, kind: str = "syntax"):
        self.span = tok_or_span.span if isinstance(tok_or_span, _Tok) else tok_or_span
        self.message = message
        self.kind = kind


def source_lines(text: str) -> list[str]:
    """Split on newlines only, so line numbers match what an editor shows."""
    lines = _NEWLINE.split(text)
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m.lastgroup == "comment":
            break
        if m.lastgroup == "string":
            end = _string_end(line, pos)
            if end is None:
                raise _LineError(SourceSpan(lineno, pos + 1, len(line) - pos), "unterminated string literal")
            toks.append(_Tok("string", line[pos:end], lineno, pos + 1))
            pos = end
            continue
        if m.lastgroup in ("punct", "word"):
            toks.append(_Tok(m.lastgroup, m.group(), lineno, pos + 1))
        pos = m.end()
    return toks


def _string_end(line: str, start: int) -> Optional[int]:
    i = start + 1
    while i < len(line):
        if line[i] == "\\":
            i += 2
        elif line[i] == '"':
            return i + 1
        else:
            i += 1
    return None


@dataclass
class _Ref:
    text: str
    tok: _Tok


@dataclass
class _Draft:
    """Everything read so far, each item tagged with the token it came from."""

    name: Optional[str] = None
    actions: Optional[list[_Ref]] = None
    actions_kw: Optional[_Tok] = None
    values: Optional[list[_Ref]] = None
    strata: list[tuple[SourceSpan, list[_Ref]]] = field(default_factory=list)
    weights: list[tuple[_Ref, float, _Tok]] = field(default_factory=list)
    impacts: list[tuple[_Ref, list[tuple[_Ref, int]]]] = field(default_factory=list)
    model: Optional[ModelKind] = None
    seen: dict[str, _Tok] = field(default_factory=dict)


class _Line:
    def __init__(self, toks: list[_Tok], lineno: int, length: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.length = length

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def eol_span(self) -> SourceSpan:
        return SourceSpan(self.lineno, self.length + 1)

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise _LineError(self.eol_span(), f"expected {what} before end of line")
        self.i += 1
        return tok

    def expect_punct(self, ch: str) -> _Tok:
        tok = self.next(f"'{ch}'")
        if tok.kind != "punct" or tok.text != ch:
            raise _LineError(tok, f"expected '{ch}', found {tok.text!r}")
        return tok

    def expect_word(self, what: str) -> _Tok:
        tok = self.next(what)
        if tok.kind != "word":
            raise _LineError(tok, f"expected {what}, found {tok.text!r}")
        return tok

    def expect_id(self, what: str) -> _Tok:
        tok = self.expect_word(what)
        if not is_valid_id(tok.text):
            raise _LineError(tok, f"{tok.text!r} is not a valid {what} (letters, digits and underscores only)")
        return tok

    def expect_end(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise _LineError(tok, f"unexpected {tok.text!r} at end of line")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.errors: list[ParseError] = []
        self.draft = _Draft()

    def error(self, span_or_tok, kind: str, message: str, related=()) -> None:
        span = span_or_tok.span if isinstance(span_or_tok, _Tok) else span_or_tok
        self.errors.append(ParseError(span, kind, message, tuple(related)))

    def run(self) -> Optional[Scenario]:
        for lineno, raw in enumerate(source_lines(self.text), start=1):
            try:
                toks = _tokenize(raw, lineno)
                if toks:
                    self.directive(_Line(toks, lineno, len(raw)))
            except _LineError as exc:
                self.error(exc.span, exc.kind, exc.message)
        return self.resolve()

    def once(self, kw: _Tok) -> bool:
        prev = self.draft.seen.get(kw.text)
        if prev is not None:
            self.error(kw, "syntax", f"second '{kw.text}' line; the first is on line {prev.line}", [prev.span])
            return False
        self.draft.seen[kw.text] = kw
        return True

    def id_list(self, ln: _Line, what: str, refs: list[_Ref]) -> list[_Ref]:
        if ln.peek() is None:
            return refs
        while True:
            tok = ln.expect_word(what)
            if is_valid_id(tok.text):
                refs.append(_Ref(tok.text, tok))
            else:
                self.error(tok, "syntax", f"{tok.text!r} is not a valid {what} (letters, digits and underscores only)")
            sep = ln.peek()
            if sep is None:
                return refs
            ln.expect_punct(",")

    def directive(self, ln: _Line) -> None:
        kw = ln.next("directive")
        if kw.kind != "word":
            raise _LineError(kw, f"expected a directive, found {kw.text!r}")
        d = self.draft
        if kw.text == "scenario":
            tok = ln.next("quoted scenario name")
            if tok.kind != "string":
                raise _LineError(tok, f"expected a quoted scenario name, found {tok.text!r}")
            try:
                name = unescape(tok.text[1:-1])
            except ValueError as exc:
                raise _LineError(tok, str(exc)) from None
            ln.expect_end()
            if self.once(kw):
                d.name = name
        elif kw.text in ("actions", "values"):
            ln.expect_punct(":")
            refs: list[_Ref] = []
            if self.once(kw):
                setattr(d, kw.text, refs)
                if kw.text == "actions":
                    d.actions_kw = kw
            self.id_list(ln, kw.text[:-1] + " id", refs)
        elif kw.text == "stratum":
            num = ln.expect_word("stratum number")
            expected = len(d.strata) + 1
            if not _STRATUM_NO.fullmatch(num.text) or int(num.text) != expected:
                self.error(num, "syntax", f"expected stratum number {expected}, found {num.text!r}")
            refs: list[_Ref] = []
            d.strata.append((SourceSpan(kw.line, kw.col, num.col + len(num.text) - kw.col), refs))
            ln.expect_punct(":")
            self.id_list(ln, "value id", refs)
        elif kw.text == "weight":
            value = ln.expect_id("value id")
            ln.expect_punct(":")
            num = ln.expect_word("weight")
            ln.expect_end()
            if not _NUMBER.fullmatch(num.text):
                raise _LineError(num, f"weight {num.text!r} is not a number", "bad-weight")
            w = float(num.text)
            if not (math.isfinite(w) and w > 0):
                raise _LineError(num, f"weight {num.text} must be finite and greater than 0", "bad-weight")
            d.weights.append((_Ref(value.text, value), w, num))
        elif kw.text == "impact":
            action = ln.expect_id("action id")
            ln.expect_punct(":")
            entries: list[tuple[_Ref, int]] = []
            d.impacts.append((_Ref(action.text, action), entries))
            if ln.peek() is None:
                return
            while True:
                value = ln.expect_id("value id")
                ln.expect_punct("=")
                coef = ln.expect_word("coefficient")
                if _COEFFICIENT.fullmatch(coef.text):
                    entries.append((_Ref(value.text, value), int(coef.text)))
                else:
                    self.error(coef, "bad-coefficient", f"coefficient {coef.text!r} is not one of -1, 0, +1")
                if ln.peek() is None:
                    return
                ln.expect_punct(",")
        elif kw.text == "model":
            ln.expect_punct(":")
            tok = ln.expect_word("model kind")
            ln.expect_end()
            try:
                kind = ModelKind.parse(tok.text)
            except ValueError as exc:
                raise _LineError(tok, str(exc)) from None
            if self.once(kw):
                d.model = kind
        else:
            raise _LineError(kw, f"unknown directive {kw.text!r}")

    def unique(self, refs: list[_Ref], what: str) -> dict[str, _Ref]:
        first: dict[str, _Ref] = {}
        for r in refs:
            if r.text in first:
                self.error(r.tok, "duplicate-id", f"{what} {r.text!r} declared twice", [first[r.text].tok.span])
            else:
                first[r.text] = r
        return first

    def resolve(self) -> Optional[Scenario]:
        d = self.draft
        origin = SourceSpan(1, 1)
        if d.actions is None:
            self.error(origin, "syntax", "missing 'actions:' line")
            d.actions = []
        elif not d.actions and d.actions_kw is not None:
            self.error(d.actions_kw, "syntax", "at least one action must be declared")
        if d.values is None:
            self.error(origin, "syntax", "missing 'values:' line")
            d.values = []
        actions = self.unique(d.actions, "action")
        values = self.unique(d.values, "value")

        placed: dict[str, _Ref] = {}
        strata: list[tuple[str, ...]] = []
        for i, (header, refs) in enumerate(d.strata, start=1):
            if not refs:
                self.error(header, "partition-violation", f"stratum {i} is empty")
            members = []
            for r in refs:
                if r.text not in values:
                    self.error(r.tok, "unknown-reference", f"stratum {i} lists undeclared value {r.text!r}")
                elif r.text in placed:
                    prev = placed[r.text].tok
                    self.error(
                        r.tok, "partition-violation",
                        f"value {r.text!r} appears twice in the strata (also at line {prev.line})",
                        [prev.span],
                    )
                else:
                    placed[r.text] = r
                    members.append(r.text)
            strata.append(tuple(members))
        for v, r in values.items():
            if v not in placed:
                self.error(r.tok, "partition-violation", f"value {v!r} is not assigned to any stratum")

        weights: dict[str, float] = {}
        weight_at: dict[str, _Tok] = {}
        for ref, w, _num in d.weights:
            if ref.text not in values:
                self.error(ref.tok, "unknown-reference", f"weight given for undeclared value {ref.text!r}")
            elif ref.text in weight_at:
                self.error(ref.tok, "duplicate-id", f"second weight for value {ref.text!r}", [weight_at[ref.text].span])
            else:
                weight_at[ref.text] = ref.tok
                weights[ref.text] = w

        coefficients: dict[tuple[str, str], int] = {}
        impact_at: dict[str, _Tok] = {}
        for aref, entries in d.impacts:
            known = aref.text in actions
            if not known:
                self.error(aref.tok, "unknown-reference", f"impact line for undeclared action {aref.text!r}")
            elif aref.text in impact_at:
                self.error(aref.tok, "duplicate-id", f"second impact line for action {aref.text!r}",
                           [impact_at[aref.text].span])
                known = False
            else:
                impact_at[aref.text] = aref.tok
            row_seen: dict[str, _Tok] = {}
            for vref, c in entries:
                if vref.text not in values:
                    self.error(vref.tok, "unknown-reference", f"impact on undeclared value {vref.text!r}")
                elif vref.text in row_seen:
                    self.error(vref.tok, "duplicate-id", f"impact on {vref.text!r} given twice",
                               [row_seen[vref.text].span])
                else:
                    row_seen[vref.text] = vref.tok
                    if known:
                        coefficients[(aref.text, vref.text)] = c

        if self.errors:
            return None
        scenario = Scenario(
            name=d.name if d.name is not None else "",
            actions=tuple(actions),
            values=tuple(values),
            stratification=Stratification(tuple(strata)),
            impacts=ImpactMatrix(coefficients),
            weights=Weights(weights),
            default_model=d.model or ModelKind.ADDITIVE,
        )
        for v in validate_scenario(scenario):
            self.error(origin, "syntax", v.message)
        return None if self.errors else scenario


def try_parse(text: str) -> tuple[Optional[Scenario], list[ParseError]]:
    """Parse ``text``; returns the scenario (or None) and every diagnostic, in source order."""
    reader = _Reader(text)
    scenario = reader.run()
    errors = sorted(reader.errors, key=lambda e: (e.span.line, e.span.column))
    return scenario, errors


def parse_scenario(text: str) -> Scenario:
    scenario, errors = try_parse(text)
    if errors:
        raise ScenarioSyntaxError(errors)
    return scenario


def _coef(c: int) -> str:
    return f"{c:+d}" if c else "0"


def serialize_scenario(s: Scenario) -> str:
    lines = [f"scenario {quote(s.name)}"]
    lines.append("actions: " + ", ".join(s.actions))
    lines.append(("values: " + ", ".join(s.values)) if s.values else "values:")
    for i, stratum in enumerate(s.stratification.strata, start=1):
        lines.append(f"stratum {i}: " + ", ".join(stratum))
    for v in s.values:
        w = s.weights.get(v)
        if w != Weights.DEFAULT:
            lines.append(f"weight {v}: {w!r}")
    for a in s.actions:
        entries = [f"{v}={_coef(s.impact(a, v))}" for v in s.values if s.impact(a, v)]
        if entries:
            lines.append(f"impact {a}: " + ", ".join(entries))
    lines.append(f"model: {s.default_model.value}")
    return "\n".join(lines) + "\n"


def format_error(err: ParseError, text: str, filename: str = "<input>", color: bool = False) -> str:
    """Render a diagnostic with the offending source line and a caret underline."""
    red, bold, reset = ("\x1b[31m", "\x1b[1m", "\x1b[0m") if color else ("", "", "")
    sp = err.span
    head = f"{bold}{filename}:{sp.line}:{sp.column}:{reset} {red}error[{err.kind}]{reset}: {err.message}"
    lines = source_lines(text)
    if sp.line <= len(lines):
        src = lines[sp.line - 1]
        marker = " " * (sp.column - 1) + "^" * sp.length
        return f"{head}\n    {src}\n    {red}{marker}{reset}"
    return head
