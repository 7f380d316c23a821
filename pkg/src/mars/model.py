"""Domain types for decision scenarios and the orderings over values.

A scenario bundles the available actions, the values they are judged by,
a stratified ordering of those values (top stratum first), the impact of
every action on every value, and optional per-value weights.

Stratum indices are 1-based throughout the public API.
"""

from __future__ import annotations

import enum
import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import StratumIndexError, UnknownIdError

ID_PATTERN = re.compile(r"[A-Za-z0-9_]+")
COEFFICIENTS = (-1, 0, 1)


def is_valid_id(token: str) -> bool:
    return isinstance(token, str) and ID_PATTERN.fullmatch(token) is not None


class ModelKind(str, enum.Enum):
    """The six comparison semantics. Values are the CLI/DSL spellings."""

    GLOBAL_MAXIMUM = "global-maximum"
    ADDITIVE = "additive"
    WEIGHTED_ADDITIVE = "weighted-additive"
    MIN_NEGATIVE_COUNT = "min-negative-count"
    MIN_DEMOTION_SUM = "min-demotion-sum"
    STRATUM_SATISFACTION = "stratum-satisfaction"

    @classmethod
    def parse(cls, text: str) -> "ModelKind":
        try:
            return cls(text)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown model {text!r} (expected one of: {names})") from None

    def __str__(self) -> str:
        return self.value


class Importance(enum.Enum):
    MORE_IMPORTANT = "more-important"
    LESS_IMPORTANT = "less-important"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class Stratification:
    """Ordered partition of the value set; ``strata[0]`` is the top stratum.

    Order inside a stratum is kept only so that files round-trip; it carries
    no meaning for any evaluation model.
    """

    strata: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "strata", tuple(tuple(s) for s in self.strata))

    @classmethod
    def of(cls, *strata: Iterable[str]) -> "Stratification":
        return cls(tuple(tuple(s) for s in strata))

    @classmethod
    def singletons(cls, values: Iterable[str]) -> "Stratification":
        return cls(tuple((v,) for v in values))

    @cached_property
    def _index(self) -> dict[str, int]:
        index: dict[str, int] = {}
        for i, stratum in enumerate(self.strata, start=1):
            for v in stratum:
                index.setdefault(v, i)
        return index

    @property
    def k(self) -> int:
        return len(self.strata)

    def __len__(self) -> int:
        return len(self.strata)

    def __iter__(self) -> Iterator[tuple[str, ...]]:
        return iter(self.strata)

    def stratum(self, index: int) -> tuple[str, ...]:
        if not 1 <= index <= len(self.strata):
            raise StratumIndexError(f"stratum index {index} outside [1, {len(self.strata)}]")
        return self.strata[index - 1]

    def values(self) -> tuple[str, ...]:
        return tuple(v for s in self.strata for v in s)

    def is_total_order(self) -> bool:
        return all(len(s) == 1 for s in self.strata)

    def describe(self) -> str:
        return " > ".join("{" + ", ".join(s) + "}" for s in self.strata)


def stratum_of(st: Stratification, v: str) -> int:
    try:
        return st._index[v]
    except KeyError:
        raise UnknownIdError(f"value {v!r} does not occur in the stratification") from None


def value_order_compare(st: Stratification, v: str, v2: str) -> Importance:
    i, j = stratum_of(st, v), stratum_of(st, v2)
    if i < j:
        return Importance.MORE_IMPORTANT
    if i > j:
        return Importance.LESS_IMPORTANT
    return Importance.INCOMPARABLE


class ImpactMatrix:
    """Map from (action, value) to a coefficient; absent pairs read as 0.

    Zero entries are not stored, so two matrices compare equal exactly when
    they agree on every pair.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[tuple[str, str], int] | None = None):
        self._entries = {k: c for k, c in (entries or {}).items() if c != 0}

    @classmethod
    def from_rows(cls, rows: Mapping[str, Mapping[str, int]]) -> "ImpactMatrix":
        return cls({(a, v): c for a, row in rows.items() for v, c in row.items()})

    def get(self, action: str, value: str) -> int:
        return self._entries.get((action, value), 0)

    def items(self):
        return self._entries.items()

    def row(self, action: str, values: Sequence[str]) -> tuple[int, ...]:
        return tuple(self._entries.get((action, v), 0) for v in values)

    def __eq__(self, other):
        if not isinstance(other, ImpactMatrix):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self):
        return hash(frozenset(self._entries.items()))

    def __repr__(self):
        return f"ImpactMatrix({self._entries!r})"


class Weights:
    """Per-value weights, 1.0 for any value not listed."""

    __slots__ = ("_weights",)

    DEFAULT = 1.0

    def __init__(self, weights: Mapping[str, float] | None = None):
        self._weights = {v: float(w) for v, w in (weights or {}).items() if w != self.DEFAULT}

    def get(self, value: str) -> float:
        return self._weights.get(value, self.DEFAULT)

    def __getitem__(self, value: str) -> float:
        return self.get(value)

    def items(self):
        return self._weights.items()

    def scaled(self, c: float, values: Iterable[str]) -> "Weights":
        return Weights({v: self.get(v) * c for v in values})

    def __bool__(self):
        return bool(self._weights)

    def __eq__(self, other):
        if not isinstance(other, Weights):
            return NotImplemented
        return self._weights == other._weights

    def __hash__(self):
        return hash(frozenset(self._weights.items()))

    def __repr__(self):
        return f"Weights({self._weights!r})"


def _as_impacts(impacts) -> ImpactMatrix:
    if isinstance(impacts, ImpactMatrix):
        return impacts
    if not impacts:
        return ImpactMatrix()
    first = next(iter(impacts))
    if isinstance(first, tuple):
        return ImpactMatrix(impacts)
    return ImpactMatrix.from_rows(impacts)


@dataclass(frozen=True)
class Scenario:
    name: str
    actions: tuple[str, ...]
    values: tuple[str, ...]
    stratification: Stratification
    impacts: ImpactMatrix = field(default_factory=ImpactMatrix)
    weights: Weights = field(default_factory=Weights)
    default_model: ModelKind = ModelKind.ADDITIVE

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "values", tuple(self.values))
        if not isinstance(self.stratification, Stratification):
            object.__setattr__(self, "stratification", Stratification(self.stratification))
        object.__setattr__(self, "impacts", _as_impacts(self.impacts))
        if not isinstance(self.weights, Weights):
            object.__setattr__(self, "weights", Weights(self.weights))
        object.__setattr__(self, "default_model", ModelKind(self.default_model))

    @property
    def n(self) -> int:
        return len(self.actions)

    @property
    def m(self) -> int:
        return len(self.values)

    def impact(self, action: str, value: str) -> int:
        return self.impacts.get(action, value)

    def with_stratification(self, st: Stratification) -> "Scenario":
        return replace(self, stratification=st)

    def with_weights(self, weights: Weights | Mapping[str, float]) -> "Scenario":
        return replace(self, weights=weights if isinstance(weights, Weights) else Weights(weights))

    def require_action(self, action: str) -> None:
        if action not in self.actions:
            raise UnknownIdError(f"unknown action {action!r}")


def impact_representation(s: Scenario, a: str) -> tuple[int, ...]:
    """Coefficients of ``a`` on every value, in value declaration order."""
    s.require_action(a)
    return s.impacts.row(a, s.values)


def promoted(s: Scenario, a: str) -> tuple[str, ...]:
    return tuple(v for v in s.values if s.impact(a, v) == 1)


def demoted(s: Scenario, a: str) -> tuple[str, ...]:
    return tuple(v for v in s.values if s.impact(a, v) == -1)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    ids: tuple[str, ...] = ()


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)

    def add(self, kind: str, message: str, *ids: str) -> None:
        self.violations.append(Violation(kind, message, ids))


def _duplicates(items: Sequence[str]) -> list[str]:
    return [x for x, c in Counter(items).items() if c > 1]


def validate_scenario(s: Scenario) -> ValidationReport:
    """Check every scenario invariant and report all violations found."""
    report = ValidationReport()

    if not s.actions:
        report.add("no-actions", "scenario declares no actions")
    for kind, ids in (("action", s.actions), ("value", s.values)):
        for x in ids:
            if not is_valid_id(x):
                report.add("invalid-id", f"{kind} id {x!r} is not a letters/digits/underscore token", x)
        for x in _duplicates(ids):
            report.add("duplicate-id", f"{kind} {x!r} declared more than once", x)

    declared = set(s.values)
    seen: dict[str, int] = {}
    for i, stratum in enumerate(s.stratification.strata, start=1):
        if not stratum:
            report.add("empty-stratum", f"stratum {i} is empty")
        for v in stratum:
            if v not in declared:
                report.add("unknown-reference", f"stratum {i} references undeclared value {v!r}", v)
            elif v in seen:
                report.add(
                    "partition-violation",
                    f"value {v!r} appears in stratum {seen[v]} and stratum {i}",
                    v,
                )
            else:
                seen[v] = i
    for v in s.values:
        if v not in seen:
            report.add("partition-violation", f"value {v!r} is not assigned to any stratum", v)

    actions = set(s.actions)
    for (a, v), c in s.impacts.items():
        if a not in actions:
            report.add("unknown-reference", f"impact refers to undeclared action {a!r}", a)
        if v not in declared:
            report.add("unknown-reference", f"impact refers to undeclared value {v!r}", v)
        if c not in COEFFICIENTS or isinstance(c, bool):
            report.add("bad-coefficient", f"impact of {a!r} on {v!r} is {c!r}, not one of -1, 0, +1", a, v)

    for v, w in s.weights.items():
        if v not in declared:
            report.add("unknown-reference", f"weight given for undeclared value {v!r}", v)
        if not (math.isfinite(w) and w > 0):
            report.add("bad-weight", f"weight of {v!r} is {w!r}; weights must be finite and > 0", v)

    if not s.values:
        report.warnings.append("scenario declares no values; every action ties and all are preferred")
    return report
