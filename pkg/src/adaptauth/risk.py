"""Attack likelihood, partial risk and total risk of a configuration in a context."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .configspace import AuthConfiguration, selected_features
from .model import ContextState, ModelSpec

DEFAULT_HARM = 0.5


@dataclass(frozen=True)
class RiskAssessment:
    likelihoods: Mapping[str, float]
    partial_risks: Mapping[str, float]
    total_risk: float


def reduction(feature_id: str, attack_id: str, enabled: frozenset[str], model: ModelSpec) -> float:
    """Likelihood reduction of one enabled feature, scaled by its selected strength level if any."""
    base = model.reduction_out.get(feature_id, {}).get(attack_id)
    if base is None:
        return 0.0
    for sid in model.strength_features.get(feature_id, ()):
        if sid in enabled:
            return base * model.feature_by_id[sid].attribute[1]
    return base


def attack_likelihood(
    attack_id: str,
    ctx: ContextState,
    config: AuthConfiguration,
    model: ModelSpec,
    enabled: frozenset[str] | None = None,
) -> float:
    if enabled is None:
        enabled = selected_features(config, model)
    pressure = max(
        (v for factor, v in model.likelihood_in.get(attack_id, ()) if ctx.is_active(factor)),
        default=0.0,
    )
    mitigation = max((reduction(f, attack_id, enabled, model) for f in enabled), default=0.0)
    return max(0.0, pressure - mitigation)


def harm(attack_id: str, ctx: ContextState, model: ModelSpec) -> float:
    """Strongest active harm impact, never below the attack's lowest modeled harm.

    Attacks without harm edges sit at the neutral midpoint.  The floor keeps
    harm, and with it total risk, nondecreasing as more context becomes active.
    """
    edges = model.harm_in.get(attack_id, ())
    if not edges:
        return DEFAULT_HARM
    floor = min(v for _, v in edges)
    return max([floor] + [v for factor, v in edges if ctx.is_active(factor)])


def partial_risk(attack_id: str, likelihood: float, ctx: ContextState, model: ModelSpec) -> float:
    return likelihood * harm(attack_id, ctx, model)


def total_risk(partial_risks: Iterable[float] | Mapping[str, float]) -> float:
    values = partial_risks.values() if isinstance(partial_risks, Mapping) else partial_risks
    return max(values, default=0.0)


def assess_risk(
    config: AuthConfiguration,
    ctx: ContextState,
    model: ModelSpec,
    enabled: frozenset[str] | None = None,
) -> RiskAssessment:
    if enabled is None:
        enabled = selected_features(config, model)
    likelihoods = {a: attack_likelihood(a, ctx, config, model, enabled) for a in model.attack_ids}
    partials = {a: partial_risk(a, likelihoods[a], ctx, model) for a in model.attack_ids}
    return RiskAssessment(likelihoods, partials, total_risk(partials))
