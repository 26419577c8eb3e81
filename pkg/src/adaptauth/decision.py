"""Utility of a configuration and selection of the best feasible one.

Two engines are provided.  ``decide_exhaustive`` scores every feasible
configuration and is the reference.  ``decide_search`` bisects a utility
threshold over [0, 1], answering each "is there a configuration with utility
>= t?" query by a pruned scan: configurations are grouped by credential tuple
and a group is skipped when an admissible upper bound on its utility is below t.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import NamedTuple

from .configspace import AuthConfiguration, disabled_features, enumerate_configs, is_feasible, selected_features
from .errors import InfeasibleConfig
from .goals import GoalAssessment, assess_goals, compute_priority, credential_contribution
from .model import STRUCTURAL_KINDS, ContextState, ModelSpec
from .risk import RiskAssessment, assess_risk, harm

EPS = 1e-9
DEFAULT_TOLERANCE = 1e-3
ENGINES = ("exhaustive", "search")


@dataclass(frozen=True)
class Assessment:
    goal: GoalAssessment
    risk: RiskAssessment
    utility: float

    def root(self, model: ModelSpec, category: str) -> float:
        return self.goal.root(model, category)


class Ranked(NamedTuple):
    config: AuthConfiguration
    assessment: Assessment


@dataclass(frozen=True)
class DecisionStats:
    configs_evaluated: int
    iterations: int
    elapsed: float
    feasible_configs: int


@dataclass(frozen=True)
class DecisionResult:
    chosen: AuthConfiguration
    ranked: list[Ranked]
    engine: str
    stats: DecisionStats
    model: ModelSpec = field(repr=False, compare=False)

    @property
    def best(self) -> Assessment:
        return self.ranked[0].assessment


def utility(security: float, usability: float, performance: float, total_risk: float) -> float:
    return (security + usability + performance + (1.0 - total_risk)) / 4.0


def _assess(model: ModelSpec, ctx: ContextState, config: AuthConfiguration) -> Assessment:
    enabled = selected_features(config, model)
    goals = assess_goals(config, ctx, model, enabled)
    risk = assess_risk(config, ctx, model, enabled)
    roots = model.root_ids
    u = utility(
        goals.satisfactions[roots["Security"]],
        goals.satisfactions[roots["Usability"]],
        goals.satisfactions[roots["Performance"]],
        risk.total_risk,
    )
    return Assessment(goals, risk, u)


def assess(model: ModelSpec, ctx: ContextState, config: AuthConfiguration) -> Assessment:
    if not is_feasible(config, ctx, model):
        raise InfeasibleConfig(f"configuration {config.summary()} is not feasible in this context")
    return _assess(model, ctx, config)


def tie_break(a: Ranked, b: Ranked, model: ModelSpec) -> int:
    """Order two equally useful candidates: stronger security, then single factor, then ids."""
    sa = a.assessment.root(model, "Security")
    sb = b.assessment.root(model, "Security")
    if abs(sa - sb) > EPS:
        return -1 if sa > sb else 1
    ca, cb = a.config, b.config
    if len(ca.credentials) != len(cb.credentials):
        return -1 if len(ca.credentials) < len(cb.credentials) else 1
    ka, kb = ca.sort_key(), cb.sort_key()
    if ka != kb:
        return -1 if ka < kb else 1
    return 0


def compare(a: Ranked, b: Ranked, model: ModelSpec) -> int:
    ua, ub = a.assessment.utility, b.assessment.utility
    if abs(ua - ub) > EPS:
        return -1 if ua > ub else 1
    return tie_break(a, b, model)


def rank(candidates: list[Ranked], model: ModelSpec) -> list[Ranked]:
    return sorted(candidates, key=cmp_to_key(lambda a, b: compare(a, b, model)))


def decide_exhaustive(model: ModelSpec, ctx: ContextState, top_k: int = 5) -> DecisionResult:
    start = time.perf_counter()
    configs = enumerate_configs(ctx, model)
    ranked = rank([Ranked(c, _assess(model, ctx, c)) for c in configs], model)
    elapsed = time.perf_counter() - start
    stats = DecisionStats(len(configs), 0, elapsed, len(configs))
    return DecisionResult(ranked[0].config, ranked[: max(top_k, 1)], "exhaustive", stats, model)


# -- bounded search -------------------------------------------------------------


def utility_upper_bound(
    credentials: tuple[str, ...],
    possible: frozenset[str],
    ctx: ContextState,
    model: ModelSpec,
) -> float:
    """Utility no completion of ``credentials`` can exceed.

    ``possible`` must contain every feature that any completion may enable.
    Goal satisfaction is bounded by letting every possible non-credential
    feature contribute at once; risk by letting every possible reduction apply
    at full strength.  Both aggregations are monotone, so the bound is admissible.
    """
    probe = AuthConfiguration(credentials)
    leaf_ub = {}
    for gid in model.leaf_ids:
        best = credential_contribution(gid, probe, model)
        for fid in possible:
            if fid in credentials:
                continue
            impact = model.satisfaction_out.get(fid, {}).get(gid)
            if impact is not None and impact > best:
                best = impact
        leaf_ub[gid] = compute_priority(gid, ctx, model) * best

    def sat(gid: str) -> float:
        goal = model.goal_by_id[gid]
        return leaf_ub[gid] if goal.is_leaf else min(sat(c) for c in goal.children)

    risk_lb = 0.0
    for aid in model.attack_ids:
        pressure = max((v for f, v in model.likelihood_in.get(aid, ()) if ctx.is_active(f)), default=0.0)
        mitigation = max((model.reduction_out.get(f, {}).get(aid, 0.0) for f in possible), default=0.0)
        risk_lb = max(risk_lb, max(0.0, pressure - mitigation) * harm(aid, ctx, model))
    roots = model.root_ids
    return utility(sat(roots["Security"]), sat(roots["Usability"]), sat(roots["Performance"]), risk_lb)


def bisection_iterations(tolerance: float) -> int:
    return max(0, math.ceil(math.log2(1.0 / tolerance)))


def decide_search(
    model: ModelSpec,
    ctx: ContextState,
    tolerance: float = DEFAULT_TOLERANCE,
    top_k: int = 5,
) -> DecisionResult:
    """Bisect the best achievable utility to within ``tolerance``.

    After the bracket closes, every configuration at or above its lower end is
    ranked, so the returned choice coincides with the exhaustive argmax.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    start = time.perf_counter()
    configs = enumerate_configs(ctx, model)
    structural = frozenset(f.id for f in model.features if f.kind in STRUCTURAL_KINDS)
    disabled = disabled_features(ctx, model)

    groups: dict[tuple[str, ...], list[AuthConfiguration]] = {}
    for cfg in configs:
        groups.setdefault(cfg.credentials, []).append(cfg)
    bounded = []
    for creds, members in groups.items():
        possible = frozenset().union(*(m.choices for m in members)) | (structural - disabled)
        bounded.append((utility_upper_bound(creds, possible, ctx, model), creds, members))
    bounded.sort(key=lambda item: (-item[0], item[1]))

    cache: dict[AuthConfiguration, Assessment] = {}

    def evaluate(cfg: AuthConfiguration) -> Assessment:
        if cfg not in cache:
            cache[cfg] = _assess(model, ctx, cfg)
        return cache[cfg]

    def witness_at_least(threshold: float) -> AuthConfiguration | None:
        for ub, _, members in bounded:
            if ub < threshold:
                break
            for cfg in members:
                if evaluate(cfg).utility >= threshold:
                    return cfg
        return None

    lo, hi = 0.0, 1.0
    iterations = 0
    while hi - lo >= tolerance:
        mid = (lo + hi) / 2.0
        iterations += 1
        if witness_at_least(mid) is not None:
            lo = mid
        else:
            hi = mid

    floor = lo - EPS
    survivors = [
        Ranked(cfg, evaluate(cfg))
        for ub, _, members in bounded
        if ub >= floor
        for cfg in members
        if evaluate(cfg).utility >= floor
    ]
    ranked = rank(survivors, model)
    elapsed = time.perf_counter() - start
    stats = DecisionStats(len(cache), iterations, elapsed, len(configs))
    return DecisionResult(ranked[0].config, ranked[: max(top_k, 1)], "search", stats, model)


def decide(
    model: ModelSpec,
    ctx: ContextState,
    engine: str = "exhaustive",
    top_k: int = 5,
    tolerance: float = DEFAULT_TOLERANCE,
) -> DecisionResult:
    if engine == "exhaustive":
        return decide_exhaustive(model, ctx, top_k)
    if engine == "search":
        return decide_search(model, ctx, tolerance, top_k)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
