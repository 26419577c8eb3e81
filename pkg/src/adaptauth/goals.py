"""Leaf-goal priorities from context, goal satisfaction from enabled features."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .configspace import AuthConfiguration, selected_features
from .model import ContextState, ModelSpec

NEUTRAL = 0.5


@dataclass(frozen=True)
class GoalAssessment:
    priorities: Mapping[str, float]
    satisfactions: Mapping[str, float]

    def root(self, model: ModelSpec, category: str) -> float:
        return self.satisfactions[model.root_ids[category]]


def compute_priority(goal_id: str, ctx: ContextState, model: ModelSpec) -> float:
    """Strongest priority impact among the active context factors linked to the goal.

    A leaf nobody prioritises sits at the neutral midpoint.
    """
    active = [v for factor, v in model.priority_in.get(goal_id, ()) if ctx.is_active(factor)]
    return max(active) if active else NEUTRAL


def credential_contribution(goal_id: str, config: AuthConfiguration, model: ModelSpec) -> float:
    impacts = [model.satisfaction_out.get(c, {}).get(goal_id, NEUTRAL) for c in config.credentials]
    if len(impacts) == 1:
        return impacts[0]
    value = sum(impacts) / len(impacts)
    if model.goal_by_id[goal_id].security_sensitive:
        value += model.two_factor_bonus
    return min(value, 1.0)


def leaf_satisfaction(
    goal_id: str,
    config: AuthConfiguration,
    ctx: ContextState,
    model: ModelSpec,
    enabled: frozenset[str] | None = None,
    priority: float | None = None,
) -> float:
    """Priority times the best contribution among the enacted features.

    Non-credential features (automation level, crypto, strength, ...) compete with
    the credential contribution through ``max``: either one can carry the goal.
    """
    if enabled is None:
        enabled = selected_features(config, model)
    if priority is None:
        priority = compute_priority(goal_id, ctx, model)
    best = credential_contribution(goal_id, config, model)
    creds = config.credentials
    for fid in enabled:
        if fid in creds:
            continue
        impact = model.satisfaction_out.get(fid, {}).get(goal_id)
        if impact is not None and impact > best:
            best = impact
    return priority * best


def propagate_satisfaction(
    leaf_values: Mapping[str, float],
    model: ModelSpec,
    priorities: Mapping[str, float] | None = None,
) -> GoalAssessment:
    """AND-refinement: a parent is satisfied as much as its weakest child."""
    sat: dict[str, float] = {}

    def value(gid: str) -> float:
        if gid in sat:
            return sat[gid]
        goal = model.goal_by_id[gid]
        if goal.is_leaf:
            result = leaf_values[gid]
        else:
            result = min(value(child) for child in goal.children)
        sat[gid] = result
        return result

    for g in model.goals:
        value(g.id)
    return GoalAssessment(dict(priorities or {}), sat)


def assess_goals(
    config: AuthConfiguration,
    ctx: ContextState,
    model: ModelSpec,
    enabled: frozenset[str] | None = None,
) -> GoalAssessment:
    if enabled is None:
        enabled = selected_features(config, model)
    priorities = {g: compute_priority(g, ctx, model) for g in model.leaf_ids}
    leaves = {
        g: leaf_satisfaction(g, config, ctx, model, enabled, priorities[g]) for g in model.leaf_ids
    }
    return propagate_satisfaction(leaves, model, priorities)
