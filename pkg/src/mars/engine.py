"""Evaluation models, pairwise comparison and the preferred-actions set.

Four of the six models reduce each action to a per-stratum score vector and
compare vectors lexicographically from the top stratum down:

* additive:            sum of coefficients in the stratum, higher is better
* weighted-additive:   sum of weight * coefficient, higher is better
* min-negative-count:  number of demoted values, lower is better
* min-demotion-sum:    sum of max(0, -coefficient), lower is better

With coefficients restricted to {-1, 0, 1} the last two vectors coincide;
both are kept because they diverge once coefficients take other magnitudes.

global-maximum needs one value per stratum and is decided by the highest
value on which two actions differ. stratum-satisfaction is set based: see
:func:`satisfaction_filter`.

Weighted sums use plain float arithmetic and exact equality, summing in the
stratum's declared order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Union

from .errors import GmmRequiresTotalOrder, ModelError
from .explain import (
    ComparisonRecord,
    ExplanationTrace,
    Preference,
    SatisfactionStage,
)
from .model import ModelKind, Scenario, Weights

VECTOR_MODELS = frozenset({
    ModelKind.ADDITIVE,
    ModelKind.WEIGHTED_ADDITIVE,
    ModelKind.MIN_NEGATIVE_COUNT,
    ModelKind.MIN_DEMOTION_SUM,
})


@dataclass(frozen=True)
class EvaluationModel:
    """A model kind plus its parameters.

    ``weights`` only matters for weighted-additive; when left as None the
    scenario's own weights are used.
    """

    kind: ModelKind
    weights: Optional[Weights] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.weights is not None and not isinstance(self.weights, Weights):
            object.__setattr__(self, "weights", Weights(self.weights))


ModelLike = Union[EvaluationModel, ModelKind, str, None]


def as_model(model: ModelLike, s: Scenario | None = None) -> EvaluationModel:
    if isinstance(model, EvaluationModel):
        return model
    if model is None:
        if s is None:
            raise ModelError("no model given")
        return EvaluationModel(s.default_model)
    if isinstance(model, str) and not isinstance(model, ModelKind):
        try:
            return EvaluationModel(ModelKind.parse(model))
        except ValueError as exc:
            raise ModelError(str(exc)) from None
    return EvaluationModel(model)


@dataclass(frozen=True)
class EvaluationVector:
    scores: tuple
    higher_is_better: bool

    @property
    def direction(self) -> str:
        return "higher" if self.higher_is_better else "lower"


@dataclass(frozen=True)
class DecisionResult:
    preferred: tuple[str, ...]
    trace: ExplanationTrace


def _weights_for(s: Scenario, model: EvaluationModel) -> Weights:
    return model.weights if model.weights is not None else s.weights


def stratum_aggregate(s: Scenario, a: str, stratum_index: int, w: Weights | None = None):
    """Sum of ``w(v) * coefficient`` over the values of one stratum.

    Without weights the result is the plain integer sum.
    """
    stratum = s.stratification.stratum(stratum_index)
    if w is None:
        return sum(s.impact(a, v) for v in stratum)
    return sum(w.get(v) * s.impact(a, v) for v in stratum)


def _vector(s: Scenario, model: EvaluationModel, a: str) -> EvaluationVector:
    strata = s.stratification.strata
    kind = model.kind
    if kind is ModelKind.ADDITIVE:
        return EvaluationVector(tuple(sum(s.impact(a, v) for v in st) for st in strata), True)
    if kind is ModelKind.WEIGHTED_ADDITIVE:
        w = _weights_for(s, model)
        return EvaluationVector(tuple(sum(w.get(v) * s.impact(a, v) for v in st) for st in strata), True)
    if kind is ModelKind.MIN_NEGATIVE_COUNT:
        return EvaluationVector(tuple(sum(1 for v in st if s.impact(a, v) == -1) for st in strata), False)
    if kind is ModelKind.MIN_DEMOTION_SUM:
        return EvaluationVector(tuple(sum(max(0, -s.impact(a, v)) for v in st) for st in strata), False)
    if kind is ModelKind.GLOBAL_MAXIMUM:
        require_total_order(s)
        return EvaluationVector(tuple(s.impact(a, st[0]) for st in strata), True)
    raise ModelError(f"{kind.value} does not evaluate actions to a score vector")


def evaluation_vector(s: Scenario, model: ModelLike, a: str) -> EvaluationVector:
    m = as_model(model, s)
    if m.kind not in VECTOR_MODELS:
        raise ModelError(f"{m.kind.value} does not evaluate actions to a score vector")
    s.require_action(a)
    return _vector(s, m, a)


def require_total_order(s: Scenario) -> None:
    for i, stratum in enumerate(s.stratification.strata, start=1):
        if len(stratum) != 1:
            raise GmmRequiresTotalOrder(i, stratum)


def lexicographic(left: tuple, right: tuple, higher_is_better: bool) -> tuple[Preference, Optional[int]]:
    """Compare two score vectors top-down; returns outcome and 1-based deciding index."""
    for i, (x, y) in enumerate(zip(left, right), start=1):
        if x != y:
            left_wins = x > y if higher_is_better else x < y
            return (Preference.FIRST_PREFERRED if left_wins else Preference.SECOND_PREFERRED), i
    return Preference.TIE, None


def _vector_record(s, model, a, b, va: EvaluationVector, vb: EvaluationVector) -> ComparisonRecord:
    outcome, idx = lexicographic(va.scores, vb.scores, va.higher_is_better)
    value = None
    if model.kind is ModelKind.GLOBAL_MAXIMUM and idx is not None:
        value = s.stratification.strata[idx - 1][0]
    return ComparisonRecord(a, b, outcome, idx, va.scores, vb.scores, value)


# -- stratum satisfaction -----------------------------------------------------

def satisfaction_stages(s: Scenario, exhaustive: bool = True) -> tuple[SatisfactionStage, ...]:
    """Run the satisfaction filter and keep the per-stratum record.

    With ``exhaustive=False`` filtering stops after the first stratum that
    some candidate promotes.
    """
    candidates = tuple(s.actions)
    stages = []
    for i, stratum in enumerate(s.stratification.strata, start=1):
        promoters = tuple(a for a in candidates if any(s.impact(a, v) == 1 for v in stratum))
        if promoters:
            candidates = promoters
        stages.append(SatisfactionStage(i, promoters, candidates))
        if promoters and not exhaustive:
            break
    return tuple(stages)


def satisfaction_filter(s: Scenario, exhaustive: bool = True) -> tuple[str, ...]:
    stages = satisfaction_stages(s, exhaustive)
    return stages[-1].survivors if stages else tuple(s.actions)


def _elimination(s: Scenario, stages) -> dict[str, float]:
    """Stratum at which each action was filtered out; survivors map to infinity."""
    out = {a: float("inf") for a in s.actions}
    alive = set(s.actions)
    for st in stages:
        for a in list(alive):
            if a not in st.survivors:
                out[a] = st.stratum
                alive.discard(a)
    return out


def _satisfaction_record(a, b, elim) -> ComparisonRecord:
    ea, eb = elim[a], elim[b]
    if ea == eb:
        return ComparisonRecord(a, b, Preference.TIE)
    outcome = Preference.FIRST_PREFERRED if ea > eb else Preference.SECOND_PREFERRED
    return ComparisonRecord(a, b, outcome, int(min(ea, eb)))


# -- pairwise comparison and preferred set --------------------------------------

def compare_detailed(s: Scenario, model: ModelLike, a: str, a2: str) -> ComparisonRecord:
    m = as_model(model, s)
    s.require_action(a)
    s.require_action(a2)
    if m.kind is ModelKind.STRATUM_SATISFACTION:
        return _satisfaction_record(a, a2, _elimination(s, satisfaction_stages(s)))
    return _vector_record(s, m, a, a2, _vector(s, m, a), _vector(s, m, a2))


def compare(s: Scenario, model: ModelLike, a: str, a2: str) -> Preference:
    """Whether ``a`` is preferred to ``a2``, the reverse, or neither."""
    return compare_detailed(s, model, a, a2).outcome


def _undominated(actions, records) -> tuple[str, ...]:
    beaten = set()
    for r in records:
        if r.outcome is Preference.FIRST_PREFERRED:
            beaten.add(r.right)
        elif r.outcome is Preference.SECOND_PREFERRED:
            beaten.add(r.left)
    return tuple(a for a in actions if a not in beaten)


def preferred_actions(s: Scenario, model: ModelLike = None) -> tuple[str, ...]:
    """Preferred set without building a trace; used by the paradigm search."""
    m = as_model(model, s)
    if m.kind is ModelKind.STRATUM_SATISFACTION:
        return satisfaction_filter(s)
    vectors = [_vector(s, m, a).scores for a in s.actions]
    higher = m.kind in (ModelKind.ADDITIVE, ModelKind.WEIGHTED_ADDITIVE, ModelKind.GLOBAL_MAXIMUM)
    if higher:
        best = max(vectors, default=None)
    else:
        best = min(vectors, default=None)
    # lexicographic order is a weak order, so the undominated actions are the optimum class
    return tuple(a for a, v in zip(s.actions, vectors) if v == best)


def build_trace(s: Scenario, model: ModelLike = None) -> ExplanationTrace:
    m = as_model(model, s)
    if m.kind is ModelKind.STRATUM_SATISFACTION:
        stages = satisfaction_stages(s)
        elim = _elimination(s, stages)
        records = tuple(_satisfaction_record(a, b, elim) for a, b in combinations(s.actions, 2))
        direction = None
    else:
        stages = ()
        vectors = {a: _vector(s, m, a) for a in s.actions}
        records = tuple(
            _vector_record(s, m, a, b, vectors[a], vectors[b]) for a, b in combinations(s.actions, 2)
        )
        direction = "lower" if m.kind in (ModelKind.MIN_NEGATIVE_COUNT, ModelKind.MIN_DEMOTION_SUM) else "higher"
    if m.kind is ModelKind.GLOBAL_MAXIMUM:
        require_total_order(s)
    preferred = _undominated(s.actions, records)
    if stages:
        assert preferred == stages[-1].survivors
    return ExplanationTrace(
        scenario=s.name,
        model=m.kind,
        actions=tuple(s.actions),
        k=s.stratification.k,
        direction=direction,
        records=records,
        stages=stages,
        preferred=preferred,
    )


def preferred_set(s: Scenario, model: ModelLike = None) -> DecisionResult:
    """Actions that no other action is strictly preferred to, with the full trace."""
    trace = build_trace(s, model)
    return DecisionResult(trace.preferred, trace)
