"""Reasoning traces: what was compared, which stratum decided, what survived.

Traces hold score vectors rather than prose. Two renderings exist: a plain
text narrative for people, and the line-oriented ``mars-trace/1`` format for
programs, which :func:`parse_structured` reads back losslessly.

``mars-trace/1`` layout, one record per line, fields separated by a single
space, keys and values joined by ``=``::

    mars-trace/1
    scenario "<escaped name>"
    model <kind>
    actions <id>,<id>,...
    strata <k>
    direction higher|lower|none
    pair left=<id> right=<id> outcome=first|second|tie stratum=<i>|- value=<id>|- left_scores=<s>,...|- right_scores=<s>,...|-
    stage stratum=<i> promoters=<id>,...|- survivors=<id>,...|-
    preferred <id>,<id>,...
    end

``pair`` lines appear once per unordered action pair in declaration order;
``stage`` lines only for stratum-satisfaction traces. Integer scores are
written without a decimal point, real scores with ``repr``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Optional

from .model import ModelKind

TRACE_HEADER = "mars-trace/1"


class Preference(enum.Enum):
    FIRST_PREFERRED = "first"
    SECOND_PREFERRED = "second"
    TIE = "tie"

    def flipped(self) -> "Preference":
        if self is Preference.FIRST_PREFERRED:
            return Preference.SECOND_PREFERRED
        if self is Preference.SECOND_PREFERRED:
            return Preference.FIRST_PREFERRED
        return self


Score = int | float


@dataclass(frozen=True)
class ComparisonRecord:
    left: str
    right: str
    outcome: Preference
    deciding_stratum: Optional[int] = None
    left_scores: Optional[tuple[Score, ...]] = None
    right_scores: Optional[tuple[Score, ...]] = None
    deciding_value: Optional[str] = None

    @property
    def pair(self) -> tuple[str, str]:
        return (self.left, self.right)

    @property
    def winner(self) -> Optional[str]:
        if self.outcome is Preference.FIRST_PREFERRED:
            return self.left
        if self.outcome is Preference.SECOND_PREFERRED:
            return self.right
        return None


@dataclass(frozen=True)
class SatisfactionStage:
    """One stratum of the satisfaction filter.

    ``promoters`` are the candidates that promote some value of the stratum;
    when there are none the stratum imposes no restriction.
    """

    stratum: int
    promoters: tuple[str, ...]
    survivors: tuple[str, ...]

    @property
    def restricted(self) -> bool:
        return bool(self.promoters)


@dataclass(frozen=True)
class ExplanationTrace:
    scenario: str
    model: ModelKind
    actions: tuple[str, ...]
    k: int
    direction: Optional[str]
    records: tuple[ComparisonRecord, ...]
    stages: tuple[SatisfactionStage, ...]
    preferred: tuple[str, ...]

    def record_for(self, a: str, b: str) -> ComparisonRecord:
        for r in self.records:
            if r.pair == (a, b):
                return r
            if r.pair == (b, a):
                return ComparisonRecord(
                    b, a, r.outcome.flipped(), r.deciding_stratum,
                    r.right_scores, r.left_scores, r.deciding_value,
                )
        raise KeyError((a, b))


_MODEL_BLURB = {
    ModelKind.GLOBAL_MAXIMUM: "the most important value on which the actions differ decides",
    ModelKind.ADDITIVE: "per-stratum coefficient sums, compared top stratum first, higher wins",
    ModelKind.WEIGHTED_ADDITIVE: "per-stratum weighted sums, compared top stratum first, higher wins",
    ModelKind.MIN_NEGATIVE_COUNT: "per-stratum counts of demoted values, compared top stratum first, fewer wins",
    ModelKind.MIN_DEMOTION_SUM: "per-stratum sums of demotion, compared top stratum first, smaller wins",
    ModelKind.STRATUM_SATISFACTION: "a stratum promoted by some candidate keeps only the candidates promoting it",
}


def model_summary(kind: ModelKind) -> str:
    return _MODEL_BLURB[kind]


def _fmt_vec(scores) -> str:
    return "(" + ", ".join(repr(x) for x in scores) + ")"


def describe_record(r: ComparisonRecord) -> str:
    head = f"{r.left} vs {r.right}: "
    if r.outcome is Preference.TIE:
        text = head + "tie"
        if r.left_scores is not None:
            text += f", equal in every stratum {_fmt_vec(r.left_scores)}"
        return text
    text = head + f"{r.winner} preferred, decided at stratum {r.deciding_stratum}"
    if r.deciding_value is not None:
        i = r.deciding_stratum - 1
        text += f" by value {r.deciding_value} ({r.left_scores[i]} vs {r.right_scores[i]})"
    elif r.left_scores is not None:
        text += f"; {r.left} {_fmt_vec(r.left_scores)} vs {r.right} {_fmt_vec(r.right_scores)}"
    else:
        loser = r.right if r.winner == r.left else r.left
        text += f" where {loser} was filtered out"
    return text


def render_plain(t: ExplanationTrace) -> str:
    lines = [
        f"scenario: {t.scenario}",
        f"model: {t.model.value} ({model_summary(t.model)})",
    ]
    for stage in t.stages:
        if stage.restricted:
            lines.append(
                f"stratum {stage.stratum}: promoted by {', '.join(stage.promoters)}; "
                f"survivors {', '.join(stage.survivors)}"
            )
        else:
            lines.append(f"stratum {stage.stratum}: no candidate promotes it; no restriction")
    lines.extend(describe_record(r) for r in t.records)
    lines.append(f"preferred: {', '.join(t.preferred)}")
    return "\n".join(lines) + "\n"


# -- structured format ---------------------------------------------------------

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


def _escape(name: str) -> str:
    out = []
    for ch in name:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif not ch.isprintable():
            out.append(f"\\u{ord(ch):04x}" if ord(ch) < 0x10000 else f"\\U{ord(ch):08x}")
        else:
            out.append(ch)
    return "".join(out)


def unescape(body: str) -> str:
    """Inverse of the escaping used for quoted names."""
    out, i = [], 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1] if i + 1 < len(body) else ""
        if nxt in _UNESCAPES:
            out.append(_UNESCAPES[nxt])
            i += 2
        elif nxt in ("u", "U"):
            width = 4 if nxt == "u" else 8
            digits = body[i + 2:i + 2 + width]
            if len(digits) != width or not all(c in "0123456789abcdefABCDEF" for c in digits):
                raise ValueError(f"bad escape sequence \\{nxt}{digits}")
            code = int(digits, 16)
            if code > 0x10FFFF:
                raise ValueError(f"bad escape sequence \\{nxt}{digits}")
            out.append(chr(code))
            i += 2 + width
        else:
            raise ValueError(f"bad escape sequence \\{nxt}")
    return "".join(out)


def quote(name: str) -> str:
    return '"' + _escape(name) + '"'


def _ids(ids) -> str:
    return ",".join(ids) if ids else "-"


def _scores(scores) -> str:
    if scores is None:
        return "-"
    if not scores:
        return "()"
    return ",".join(str(x) if isinstance(x, int) else repr(x) for x in scores)


def render_structured(t: ExplanationTrace) -> str:
    lines = [
        TRACE_HEADER,
        f"scenario {quote(t.scenario)}",
        f"model {t.model.value}",
        f"actions {_ids(t.actions)}",
        f"strata {t.k}",
        f"direction {t.direction or 'none'}",
    ]
    for r in t.records:
        lines.append(
            f"pair left={r.left} right={r.right} outcome={r.outcome.value} "
            f"stratum={r.deciding_stratum if r.deciding_stratum is not None else '-'} "
            f"value={r.deciding_value or '-'} "
            f"left_scores={_scores(r.left_scores)} right_scores={_scores(r.right_scores)}"
        )
    for st in t.stages:
        lines.append(f"stage stratum={st.stratum} promoters={_ids(st.promoters)} survivors={_ids(st.survivors)}")
    lines.append(f"preferred {_ids(t.preferred)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def render_trace(t: ExplanationTrace, format: str = "plain") -> str:
    if format in ("plain", "plain-text"):
        return render_plain(t)
    if format == "structured":
        return render_structured(t)
    raise ValueError(f"unknown trace format {format!r}")


class TraceFormatError(ValueError):
    pass


_INT = re.compile(r"[+-]?\d+")


def _parse_ids(text: str) -> tuple[str, ...]:
    return () if text == "-" else tuple(text.split(","))


def _parse_scores(text: str):
    if text == "-":
        return None
    if text == "()":
        return ()
    return tuple(int(x) if _INT.fullmatch(x) else float(x) for x in text.split(","))


def _fields(rest: str, expected: list[str], lineno: int) -> dict[str, str]:
    parts = rest.split(" ")
    out = {}
    for p in parts:
        key, sep, val = p.partition("=")
        if not sep:
            raise TraceFormatError(f"line {lineno}: field {p!r} lacks '='")
        out[key] = val
    if list(out) != expected:
        raise TraceFormatError(f"line {lineno}: expected fields {expected}, got {list(out)}")
    return out


def parse_structured(text: str) -> ExplanationTrace:
    """Read a ``mars-trace/1`` document back into an :class:`ExplanationTrace`."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != TRACE_HEADER:
        raise TraceFormatError(f"missing {TRACE_HEADER!r} header")
    head: dict[str, str] = {}
    records, stages = [], []
    preferred = None
    ended = False
    for lineno, line in enumerate(lines[1:], start=2):
        if ended:
            raise TraceFormatError(f"line {lineno}: content after 'end'")
        key, _, rest = line.partition(" ")
        if key in ("scenario", "model", "actions", "strata", "direction"):
            head[key] = rest
        elif key == "pair":
            f = _fields(rest, ["left", "right", "outcome", "stratum", "value", "left_scores", "right_scores"], lineno)
            records.append(ComparisonRecord(
                left=f["left"],
                right=f["right"],
                outcome=Preference(f["outcome"]),
                deciding_stratum=None if f["stratum"] == "-" else int(f["stratum"]),
                left_scores=_parse_scores(f["left_scores"]),
                right_scores=_parse_scores(f["right_scores"]),
                deciding_value=None if f["value"] == "-" else f["value"],
            ))
        elif key == "stage":
            f = _fields(rest, ["stratum", "promoters", "survivors"], lineno)
            stages.append(SatisfactionStage(int(f["stratum"]), _parse_ids(f["promoters"]), _parse_ids(f["survivors"])))
        elif key == "preferred":
            preferred = _parse_ids(rest)
        elif key == "end":
            ended = True
        else:
            raise TraceFormatError(f"line {lineno}: unknown record {key!r}")
    missing = {"scenario", "model", "actions", "strata", "direction"} - head.keys()
    if missing or preferred is None or not ended:
        raise TraceFormatError(f"incomplete trace (missing: {sorted(missing) or 'preferred/end'})")
    name = head["scenario"]
    if len(name) < 2 or name[0] != '"' or name[-1] != '"':
        raise TraceFormatError("scenario name must be quoted")
    return ExplanationTrace(
        scenario=unescape(name[1:-1]),
        model=ModelKind(head["model"]),
        actions=_parse_ids(head["actions"]),
        k=int(head["strata"]),
        direction=None if head["direction"] == "none" else head["direction"],
        records=tuple(records),
        stages=tuple(stages),
        preferred=preferred,
    )
