"""Machine-checkable behavior specifications for automated vehicles.

Scene-entity taxonomies, facts, maneuver options and Horn rules are written
in a small DSL, resolved into a :class:`SpecModel`, and evaluated by forward
chaining over scenario start scenes. Results can be checked for conflicting
or missing maneuvers, traced back to their knowledge sources, and exported
as a Causal Behavior Graph, sequence text or a JSON result document.
"""

__version__ = "0.1.0"

from behavspec.consistency import ConsistencyReport, Finding, SuiteReport, check_scenario, check_suite
from behavspec.diagnostics import (
    Diagnostic,
    DiagnosticError,
    NoEgo,
    ResolutionError,
    Span,
    SyntaxFailure,
    TargetNotDerived,
    UnknownIdentifier,
)
from behavspec.dsl import format_canonical, parse_scenario_text, parse_text, tokenize
from behavspec.export import (
    CausalBehaviorGraph,
    build_cbg,
    emit_dot,
    emit_result_doc,
    emit_sequence,
    parse_result_doc,
    union,
)
from behavspec.model import SpecModel, is_subclass, resolve, resolve_scenario, validate_model
from behavspec.reasoner import (
    DerivationStep,
    EntityIn,
    FactApplies,
    InferenceResult,
    ManeuverApplies,
    MissionIs,
    WorkingMemory,
    applicable_maneuvers,
    evaluate_scenario,
    infer,
    infer_naive,
    instantiate_scenario,
)
from behavspec.trace import DerivationTree, Leaf, TraceReport, derivation_trees, trace_report

__all__ = [name for name in dir() if not name.startswith("_")]
