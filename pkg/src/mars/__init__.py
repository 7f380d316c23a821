"""Value-based action selection over stratified moral paradigms."""

from .engine import (
    DecisionResult,
    EvaluationModel,
    EvaluationVector,
    build_trace,
    compare,
    compare_detailed,
    evaluation_vector,
    preferred_actions,
    preferred_set,
    satisfaction_filter,
    stratum_aggregate,
)
from .errors import (
    GmmRequiresTotalOrder,
    MarsError,
    ModelError,
    SearchSizeError,
    UnknownIdError,
    UnsatisfiableTargetError,
)
from .explain import ComparisonRecord, ExplanationTrace, Preference, parse_structured, render_trace
from .model import (
    ImpactMatrix,
    Importance,
    ModelKind,
    Scenario,
    Stratification,
    Weights,
    impact_representation,
    stratum_of,
    validate_scenario,
    value_order_compare,
)
from .dsl import ParseError, ScenarioSyntaxError, SourceSpan, parse_scenario, serialize_scenario
from .search import SearchQuery, Target, enumerate_stratifications, search_paradigms

__version__ = "0.1.0"
