"""Inverse evaluation: find the stratifications that produce a wanted outcome.

The search space is every ordered partition of the value set, enumerated
exhaustively in a fixed canonical order: by number of strata, then
lexicographically by the tuple giving each value's stratum label.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Optional, Sequence

from .engine import DecisionResult, ModelLike, as_model, preferred_actions, preferred_set
from .errors import SearchSizeError, UnknownIdError, UnsatisfiableTargetError
from .model import ModelKind, Scenario, Stratification

log = logging.getLogger(__name__)

MAX_SEARCH_VALUES = 9  # ordered_bell(9) = 7,087,261 candidates


def ordered_bell(m: int) -> int:
    """Number of ordered set partitions of an m-element set."""
    a = [1]
    for n in range(1, m + 1):
        a.append(sum(comb(n, j) * a[n - j] for j in range(1, n + 1)))
    return a[m]


def _surjections(m: int, k: int) -> Iterator[tuple[int, ...]]:
    """Label tuples in {0..k-1}^m using every label, in lexicographic order."""
    labels = [0] * m
    used = [0] * k

    def rec(pos: int, missing: int):
        if pos == m:
            yield tuple(labels)
            return
        left = m - pos
        for lab in range(k):
            fills = used[lab] == 0
            if missing - fills > left - 1:
                continue
            labels[pos] = lab
            used[lab] += 1
            yield from rec(pos + 1, missing - fills)
            used[lab] -= 1

    yield from rec(0, k)


def enumerate_stratifications(
    values: Sequence[str], max_strata: Optional[int] = None
) -> Iterator[Stratification]:
    values = tuple(values)
    m = len(values)
    if m > MAX_SEARCH_VALUES:
        raise SearchSizeError(
            f"{m} values give {ordered_bell(m)} candidate stratifications; "
            f"the search is capped at MAX_SEARCH_VALUES = {MAX_SEARCH_VALUES} values"
        )
    if m == 0:
        return
    top = m if max_strata is None else min(m, max_strata)
    for k in range(1, top + 1):
        for labels in _surjections(m, k):
            strata = [[] for _ in range(k)]
            for v, lab in zip(values, labels):
                strata[lab].append(v)
            yield Stratification(tuple(tuple(s) for s in strata))


@dataclass(frozen=True)
class Target:
    """Wanted outcome: ``exact`` means P equals ``actions``, otherwise P contains them."""

    actions: frozenset[str]
    exact: bool

    @classmethod
    def contains(cls, *actions: str) -> "Target":
        return cls(frozenset(actions), False)

    @classmethod
    def exactly(cls, *actions: str) -> "Target":
        return cls(frozenset(actions), True)

    def matches(self, preferred: Sequence[str]) -> bool:
        got = frozenset(preferred)
        return got == self.actions if self.exact else self.actions <= got

    def describe(self) -> str:
        ids = ",".join(sorted(self.actions))
        return f"exact {{{ids}}}" if self.exact else f"contains {{{ids}}}"


@dataclass(frozen=True)
class SearchQuery:
    scenario: Scenario
    model: ModelLike
    target: Target
    max_strata: Optional[int] = None


@dataclass
class SearchReport:
    """Matching stratifications in enumeration order, with bookkeeping."""

    matches: list[tuple[Stratification, DecisionResult]] = field(default_factory=list)
    examined: int = 0
    skipped: int = 0

    def __iter__(self):
        return iter(self.matches)

    def __len__(self):
        return len(self.matches)

    def stratifications(self) -> list[Stratification]:
        return [st for st, _ in self.matches]


def _check(q: SearchQuery) -> None:
    for a in q.target.actions:
        if a not in q.scenario.actions:
            raise UnknownIdError(f"target action {a!r} is not declared in the scenario")
    if q.target.exact and not q.target.actions:
        raise UnsatisfiableTargetError("an exact target of no actions can never match: the preferred set is never empty")
    if q.max_strata is not None and q.max_strata < 1:
        raise ValueError("max_strata must be at least 1")


def _evaluate(args) -> Optional[tuple[str, ...]]:
    s, model = args
    if model.kind is ModelKind.GLOBAL_MAXIMUM and not s.stratification.is_total_order():
        return None
    return preferred_actions(s, model)


def _batches(items, size):
    batch = []
    for x in items:
        batch.append(x)
        if len(batch) == size:
            yield batch
            batch = []
    if batch:
        yield batch


def search_paradigms(q: SearchQuery, workers: Optional[int] = None) -> SearchReport:
    """Every enumerated stratification whose preferred set meets the target.

    Global-maximum candidates with a multi-value stratum are skipped and
    counted in ``SearchReport.skipped``. ``workers > 1`` evaluates candidates
    in a process pool; results keep enumeration order either way.
    """
    _check(q)
    model = as_model(q.model, q.scenario)
    report = SearchReport()
    pool = ProcessPoolExecutor(max_workers=workers) if workers and workers > 1 else None
    try:
        for batch in _batches(enumerate_stratifications(q.scenario.values, q.max_strata), 4096):
            jobs = [(q.scenario.with_stratification(st), model) for st in batch]
            outcomes = pool.map(_evaluate, jobs, chunksize=256) if pool else map(_evaluate, jobs)
            for st, preferred in zip(batch, outcomes):
                report.examined += 1
                if preferred is None:
                    report.skipped += 1
                elif q.target.matches(preferred):
                    report.matches.append((st, preferred_set(q.scenario.with_stratification(st), model)))
    finally:
        if pool:
            pool.shutdown()
    log.debug("searched %d stratifications, %d matches, %d skipped",
              report.examined, len(report.matches), report.skipped)
    return report
