"""Context-aware selection of authentication configurations.

Goal satisfaction and security risk are derived from a declarative model of
goals, context factors, attacks and an extended feature model; the feasible
configuration with the highest utility is selected.
"""

from .configspace import AuthConfiguration, disabled_features, enumerate_configs, is_feasible
from .decision import Assessment, DecisionResult, assess, decide, decide_exhaustive, decide_search, tie_break
from .errors import (
    AdaptAuthError,
    ConfigSpaceEmpty,
    DocumentSyntaxError,
    InfeasibleConfig,
    SchemaError,
    SemanticError,
)
from .model import ContextState, ModelSpec, label_to_value, validate_model
from .modelio import load_context, load_model, parse_context, parse_model, parse_scenario_stream, serialize_model

__version__ = "0.1.0"

__all__ = [
    "AdaptAuthError",
    "Assessment",
    "AuthConfiguration",
    "ConfigSpaceEmpty",
    "ContextState",
    "DecisionResult",
    "DocumentSyntaxError",
    "InfeasibleConfig",
    "ModelSpec",
    "SchemaError",
    "SemanticError",
    "assess",
    "decide",
    "decide_exhaustive",
    "decide_search",
    "disabled_features",
    "enumerate_configs",
    "is_feasible",
    "label_to_value",
    "load_context",
    "load_model",
    "parse_context",
    "parse_model",
    "parse_scenario_stream",
    "serialize_model",
    "tie_break",
    "validate_model",
]
