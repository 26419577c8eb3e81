"""Knowledge-layer domain types: goal model, feature model, risk model and impact edges.

Everything here is immutable once built.  Derived lookup tables (edges grouped by
target, feature children, ...) are computed lazily and cached on the ModelSpec
instance, so a single model can be shared by any number of concurrent evaluations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import SemanticError

LABELS = ("very-negative", "negative", "neutral", "positive", "very-positive")

# (low, high, low_inclusive): every interval is closed on the right
LABEL_INTERVALS: dict[str, tuple[float, float, bool]] = {
    "very-negative": (0.0, 0.2, True),
    "negative": (0.2, 0.4, False),
    "neutral": (0.4, 0.6, False),
    "positive": (0.6, 0.8, False),
    "very-positive": (0.8, 1.0, False),
}

LABEL_MIDPOINTS = {
    "very-negative": 0.1,
    "negative": 0.3,
    "neutral": 0.5,
    "positive": 0.7,
    "very-positive": 0.9,
}

LABEL_ALIASES = {"--": "very-negative", "-": "negative", "0": "neutral", "+": "positive", "++": "very-positive"}

ROOT_CATEGORIES = ("Security", "Usability", "Performance")
STRENGTH_LEVELS = (0.5, 0.7, 1.0)
AUTOMATION_LEVELS = (0.0, 0.5, 1.0)
DEFAULT_TWO_FACTOR_BONUS = 0.2


def canonical_label(label: str) -> str:
    """Map a label or one of its symbolic aliases (``++``, ``-``, ...) to its canonical name."""
    name = LABEL_ALIASES.get(label, label)
    if name not in LABEL_INTERVALS:
        raise SemanticError(f"unknown impact label {label!r}; expected one of {', '.join(LABELS)}")
    return name


def in_label_interval(label: str, value: float) -> bool:
    lo, hi, lo_inclusive = LABEL_INTERVALS[canonical_label(label)]
    above = value >= lo if lo_inclusive else value > lo
    return above and value <= hi


@dataclass(frozen=True)
class ImpactValue:
    value: float
    source_label: str | None = None

    def __post_init__(self) -> None:
        if not (isinstance(self.value, (int, float)) and 0.0 <= self.value <= 1.0) or math.isnan(self.value):
            raise ValueError(f"impact value {self.value!r} outside [0, 1]")
        if self.source_label is not None:
            label = canonical_label(self.source_label)
            object.__setattr__(self, "source_label", label)
            if not in_label_interval(label, self.value):
                raise ValueError(f"impact value {self.value} outside the interval of label {label!r}")


def label_to_value(label: str, calibration: Mapping[str, float] | None = None) -> ImpactValue:
    """Numeric representative of a qualitative label.

    A calibration override wins over the interval midpoint; the override must itself
    lie inside the label's interval.
    """
    name = canonical_label(label)
    value = LABEL_MIDPOINTS[name]
    if calibration and name in calibration:
        value = float(calibration[name])
    try:
        return ImpactValue(value, name)
    except ValueError as exc:
        raise SemanticError(str(exc)) from exc


@dataclass(frozen=True)
class Goal:
    id: str
    name: str = ""
    children: tuple[str, ...] = ()
    root_category: str | None = None
    security_sensitive: bool = False

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class ContextFactor:
    id: str
    description: str = ""


@dataclass(frozen=True)
class Attack:
    id: str
    description: str = ""


class FeatureKind(str, enum.Enum):
    ROOT = "root"
    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    GROUP = "alternative-group"
    MEMBER = "group-member"


# Selected automatically whenever their parent is selected.
STRUCTURAL_KINDS = frozenset({FeatureKind.ROOT, FeatureKind.MANDATORY, FeatureKind.GROUP})


@dataclass(frozen=True)
class Feature:
    id: str
    kind: FeatureKind
    parent: str | None = None
    group: tuple[int, int] | None = None
    attribute: tuple[str, float] | None = None
    requires: tuple[str, ...] = ()
    excludes: tuple[str, ...] = ()
    credential_class: str | None = None

    @property
    def is_credential(self) -> bool:
        return self.credential_class is not None

    @property
    def is_automation(self) -> bool:
        return self.attribute is not None and self.attribute[0] == "automation"


class EdgeKind(str, enum.Enum):
    PRIORITY = "ctx->goal-priority"
    LIKELIHOOD = "ctx->attack-likelihood"
    HARM = "ctx->attack-harm"
    DISABLE = "ctx->feature-disable"
    SATISFACTION = "feature->goal-impact"
    REDUCTION = "feature->attack-reduction"

    @classmethod
    def parse(cls, text: str) -> "EdgeKind":
        return cls(text.replace("→", "->"))

    @property
    def source_category(self) -> str:
        return "context_factor" if self.value.startswith("ctx") else "feature"

    @property
    def target_category(self) -> str:
        return {
            EdgeKind.PRIORITY: "goal",
            EdgeKind.SATISFACTION: "goal",
            EdgeKind.LIKELIHOOD: "attack",
            EdgeKind.HARM: "attack",
            EdgeKind.REDUCTION: "attack",
            EdgeKind.DISABLE: "feature",
        }[self]


@dataclass(frozen=True)
class ImpactEdge:
    kind: EdgeKind
    source: str
    target: str
    impact: ImpactValue | None = None


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.subject}: {self.message}"


class ContextState(Mapping[str, float]):
    """Read-only snapshot of context factor values in [0, 1].  A factor is active when > 0."""

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[str, float] | Iterable[tuple[str, float]] = ()):
        data = dict(values)
        for key, val in data.items():
            if not 0.0 <= float(val) <= 1.0:
                raise ValueError(f"context value for {key!r} outside [0, 1]: {val}")
        self._values = MappingProxyType({k: float(v) for k, v in data.items()})

    def __getitem__(self, key: str) -> float:
        return self._values[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"ContextState({dict(self._values)!r})"

    def is_active(self, factor_id: str) -> bool:
        return self._values.get(factor_id, 0.0) > 0.0

    def active(self) -> frozenset[str]:
        return frozenset(k for k, v in self._values.items() if v > 0.0)

    def updated(self, delta: Mapping[str, float]) -> "ContextState":
        merged = dict(self._values)
        merged.update(delta)
        return ContextState(merged)


@dataclass(frozen=True)
class ModelSpec:
    goals: tuple[Goal, ...]
    context_factors: tuple[ContextFactor, ...]
    attacks: tuple[Attack, ...]
    features: tuple[Feature, ...]
    edges: tuple[ImpactEdge, ...]
    calibration: Mapping[str, float] = field(default_factory=dict)
    two_factor_bonus: float = DEFAULT_TWO_FACTOR_BONUS
    meta: Mapping[str, object] = field(default_factory=dict, compare=False)

    # -- lookups -------------------------------------------------------------

    @cached_property
    def goal_by_id(self) -> dict[str, Goal]:
        return {g.id: g for g in self.goals}

    @cached_property
    def feature_by_id(self) -> dict[str, Feature]:
        return {f.id: f for f in self.features}

    @cached_property
    def factor_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.context_factors)

    @cached_property
    def attack_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.attacks)

    @cached_property
    def leaf_ids(self) -> tuple[str, ...]:
        """Leaf goals in depth-first order from the Security, Usability, Performance roots."""
        out: list[str] = []
        seen: set[str] = set()

        def walk(gid: str) -> None:
            if gid in seen or gid not in self.goal_by_id:
                return
            seen.add(gid)
            goal = self.goal_by_id[gid]
            if goal.is_leaf:
                out.append(gid)
            for child in goal.children:
                walk(child)

        for root in self.root_ids.values():
            walk(root)
        for g in self.goals:
            if g.is_leaf and g.id not in seen:
                out.append(g.id)
        return tuple(out)

    @cached_property
    def root_ids(self) -> dict[str, str]:
        return {g.root_category: g.id for g in self.goals if g.root_category}

    @cached_property
    def feature_children(self) -> dict[str, tuple[str, ...]]:
        children: dict[str, list[str]] = {f.id: [] for f in self.features}
        for f in self.features:
            if f.parent is not None and f.parent in children:
                children[f.parent].append(f.id)
        return {k: tuple(v) for k, v in children.items()}

    @cached_property
    def feature_root(self) -> str | None:
        roots = [f.id for f in self.features if f.kind is FeatureKind.ROOT]
        return roots[0] if roots else None

    @cached_property
    def credential_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.features if f.is_credential)

    @cached_property
    def automation_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.features if f.is_automation)

    def edges_of(self, kind: EdgeKind) -> tuple[ImpactEdge, ...]:
        return self._edges_by_kind.get(kind, ())

    @cached_property
    def _edges_by_kind(self) -> dict[EdgeKind, tuple[ImpactEdge, ...]]:
        grouped: dict[EdgeKind, list[ImpactEdge]] = {}
        for e in self.edges:
            grouped.setdefault(e.kind, []).append(e)
        return {k: tuple(v) for k, v in grouped.items()}

    def _incoming(self, kind: EdgeKind) -> dict[str, tuple[tuple[str, float], ...]]:
        grouped: dict[str, list[tuple[str, float]]] = {}
        for e in self.edges_of(kind):
            grouped.setdefault(e.target, []).append((e.source, e.impact.value if e.impact else 0.0))
        return {k: tuple(v) for k, v in grouped.items()}

    def _outgoing(self, kind: EdgeKind) -> dict[str, dict[str, float]]:
        grouped: dict[str, dict[str, float]] = {}
        for e in self.edges_of(kind):
            grouped.setdefault(e.source, {})[e.target] = e.impact.value if e.impact else 0.0
        return grouped

    @cached_property
    def priority_in(self) -> dict[str, tuple[tuple[str, float], ...]]:
        return self._incoming(EdgeKind.PRIORITY)

    @cached_property
    def likelihood_in(self) -> dict[str, tuple[tuple[str, float], ...]]:
        return self._incoming(EdgeKind.LIKELIHOOD)

    @cached_property
    def harm_in(self) -> dict[str, tuple[tuple[str, float], ...]]:
        return self._incoming(EdgeKind.HARM)

    @cached_property
    def satisfaction_out(self) -> dict[str, dict[str, float]]:
        return self._outgoing(EdgeKind.SATISFACTION)

    @cached_property
    def reduction_out(self) -> dict[str, dict[str, float]]:
        return self._outgoing(EdgeKind.REDUCTION)

    @cached_property
    def disable_out(self) -> dict[str, tuple[str, ...]]:
        grouped: dict[str, list[str]] = {}
        for e in self.edges_of(EdgeKind.DISABLE):
            grouped.setdefault(e.source, []).append(e.target)
        return {k: tuple(v) for k, v in grouped.items()}

    @cached_property
    def strength_features(self) -> dict[str, tuple[str, ...]]:
        """Feature id -> descendants carrying a ``strength`` attribute."""
        out: dict[str, tuple[str, ...]] = {}
        for f in self.features:
            found: list[str] = []
            stack = list(self.feature_children.get(f.id, ()))
            while stack:
                fid = stack.pop()
                child = self.feature_by_id[fid]
                if child.attribute is not None and child.attribute[0] == "strength":
                    found.append(fid)
                stack.extend(self.feature_children.get(fid, ()))
            if found:
                out[f.id] = tuple(sorted(found))
        return out

    def category_of(self, ident: str) -> str | None:
        if ident in self.goal_by_id:
            return "goal"
        if ident in self.feature_by_id:
            return "feature"
        if ident in set(self.factor_ids):
            return "context_factor"
        if ident in set(self.attack_ids):
            return "attack"
        return None


# -- validation ---------------------------------------------------------------


def validate_model(model: ModelSpec) -> list[Diagnostic]:
    """Check every structural invariant of the knowledge layer.

    Returns an empty list for a well-formed model.  Never raises: problems are
    reported as Diagnostic records carrying severity, offending id and message.
    """
    diags: list[Diagnostic] = []

    def err(subject: str, message: str) -> None:
        diags.append(Diagnostic("error", subject, message))

    seen_ids: dict[str, str] = {}
    for category, items in (
        ("goal", model.goals),
        ("context factor", model.context_factors),
        ("attack", model.attacks),
        ("feature", model.features),
    ):
        for item in items:
            if item.id in seen_ids:
                err(item.id, f"duplicate id (already used by a {seen_ids[item.id]})")
            else:
                seen_ids[item.id] = category

    _validate_goals(model, err)
    _validate_features(model, err)
    _validate_edges(model, err)

    for label, value in model.calibration.items():
        if LABEL_ALIASES.get(label, label) not in LABEL_INTERVALS:
            err(f"calibration.{label}", "unknown impact label")
        elif not isinstance(value, (int, float)) or not in_label_interval(label, float(value)):
            err(f"calibration.{label}", f"value {value} lies outside the label's interval")
    if not 0.0 <= model.two_factor_bonus <= 1.0:
        err("meta.two_factor_bonus", f"{model.two_factor_bonus} outside [0, 1]")
    return diags


def _validate_goals(model: ModelSpec, err) -> None:
    goals = model.goal_by_id
    parents: dict[str, str] = {}
    for g in model.goals:
        for child in g.children:
            if child not in goals:
                err(g.id, f"child goal {child!r} does not exist")
            elif child in parents and parents[child] != g.id:
                err(child, f"goal has more than one parent ({parents[child]!r}, {g.id!r})")
            else:
                parents[child] = g.id
        if g.root_category is not None and g.root_category not in ROOT_CATEGORIES:
            err(g.id, f"unknown root_category {g.root_category!r}")

    by_category: dict[str, list[str]] = {}
    for g in model.goals:
        if g.root_category is not None:
            by_category.setdefault(g.root_category, []).append(g.id)
            if g.id in parents:
                err(g.id, "a goal with a root_category cannot have a parent")
        elif g.id not in parents:
            err(g.id, "goal has no parent and no root_category")
    for category in ROOT_CATEGORIES:
        ids = by_category.get(category, [])
        if not ids:
            err(category, f"missing {category} root goal")
        elif len(ids) > 1:
            err(category, f"duplicate root_category {category}: {', '.join(ids)}")

    # Reachability doubles as cycle detection: a cycle can never hang off a root.
    reached: set[str] = set()
    stack = [gid for ids in by_category.values() for gid in ids]
    while stack:
        gid = stack.pop()
        if gid in reached:
            continue
        reached.add(gid)
        stack.extend(c for c in goals[gid].children if c in goals)
    for g in model.goals:
        if g.id not in reached:
            err(g.id, "goal is not reachable from a root (cycle or orphan)")

    under_security: set[str] = set()
    stack = list(by_category.get("Security", ()))
    while stack:
        gid = stack.pop()
        if gid in under_security:
            continue
        under_security.add(gid)
        stack.extend(c for c in goals[gid].children if c in goals)
    for g in model.goals:
        if g.security_sensitive and (not g.is_leaf or g.id not in under_security):
            err(g.id, "security_sensitive is only allowed on leaves under the Security root")


def _validate_features(model: ModelSpec, err) -> None:
    features = model.feature_by_id
    roots = [f.id for f in model.features if f.kind is FeatureKind.ROOT]
    if len(roots) != 1:
        err("features", f"expected exactly one root feature, found {len(roots)}")
    for f in model.features:
        if f.kind is FeatureKind.ROOT:
            if f.parent is not None:
                err(f.id, "root feature cannot have a parent")
        elif f.parent is None:
            err(f.id, "feature has no parent")
        elif f.parent not in features:
            err(f.id, f"parent feature {f.parent!r} does not exist")
        elif f.kind is FeatureKind.MEMBER and features[f.parent].kind is not FeatureKind.GROUP:
            err(f.id, "group-member must be a child of an alternative-group")
        elif f.kind is not FeatureKind.MEMBER and features[f.parent].kind is FeatureKind.GROUP:
            err(f.id, "children of an alternative-group must be group-members")

        if f.kind is FeatureKind.GROUP:
            members = model.feature_children.get(f.id, ())
            if f.group is None:
                err(f.id, "alternative-group without (min, max) cardinality")
            else:
                lo, hi = f.group
                if not 0 <= lo <= hi or hi > len(members) or hi < 1:
                    err(f.id, f"invalid group cardinality ({lo}, {hi}) for {len(members)} members")
        elif f.group is not None:
            err(f.id, "only alternative-groups carry a group cardinality")

        if f.attribute is not None:
            name, value = f.attribute
            if not 0.0 <= value <= 1.0:
                err(f.id, f"attribute {name}={value} outside [0, 1]")
            elif name == "strength" and value not in STRENGTH_LEVELS:
                err(f.id, f"strength must be one of {STRENGTH_LEVELS}, got {value}")
            elif name == "automation" and value not in AUTOMATION_LEVELS:
                err(f.id, f"automation must be one of {AUTOMATION_LEVELS}, got {value}")
        if f.credential_class is not None:
            if f.credential_class not in ("know", "have", "are"):
                err(f.id, f"unknown credential_class {f.credential_class!r}")
            if f.kind is not FeatureKind.MEMBER:
                err(f.id, "credential features must be group-members")
        for ref in f.requires + f.excludes:
            if ref not in features:
                err(f.id, f"requires/excludes unknown feature {ref!r}")

    if len(roots) == 1:
        reached: set[str] = set()
        stack = [roots[0]]
        while stack:
            fid = stack.pop()
            if fid in reached:
                continue
            reached.add(fid)
            stack.extend(model.feature_children.get(fid, ()))
        for f in model.features:
            if f.id not in reached:
                err(f.id, "feature is not reachable from the root feature")

    credential_groups = {features[c].parent for c in model.credential_ids if c in features}
    if len(credential_groups) > 1:
        err("features", "credential features must all belong to one alternative-group")
    for gid in credential_groups:
        grp = features.get(gid) if gid else None
        if grp is not None and grp.group is not None and grp.group[1] > 2:
            err(gid, "at most two credential types can be combined")
    automation_groups = {features[a].parent for a in model.automation_ids if a in features}
    if len(automation_groups) > 1:
        err("features", "automation features must all belong to one alternative-group")
    for gid in automation_groups:
        grp = features.get(gid) if gid else None
        if grp is not None and grp.group is not None and grp.group[1] != 1:
            err(gid, "automation group must select at most one level")


def _validate_edges(model: ModelSpec, err) -> None:
    seen: set[tuple[EdgeKind, str, str]] = set()
    for e in model.edges:
        subject = f"{e.kind.value}:{e.source}->{e.target}"
        src_cat = model.category_of(e.source)
        dst_cat = model.category_of(e.target)
        if src_cat is None:
            err(e.source, f"edge {subject} references unknown id {e.source!r}")
        elif src_cat != e.kind.source_category:
            err(e.source, f"edge {subject}: source must be a {e.kind.source_category}, got {src_cat}")
        if dst_cat is None:
            err(e.target, f"edge {subject} references unknown id {e.target!r}")
        elif dst_cat != e.kind.target_category:
            err(e.target, f"edge {subject}: target must be a {e.kind.target_category}, got {dst_cat}")
        elif dst_cat == "goal" and not model.goal_by_id[e.target].is_leaf:
            err(e.target, f"edge {subject}: goal impacts must target a leaf goal")
        if e.kind is EdgeKind.DISABLE:
            if e.impact is not None:
                err(subject, "disable edges carry no impact")
        elif e.impact is None:
            err(subject, "edge is missing its impact")
        key = (e.kind, e.source, e.target)
        if key in seen:
            err(subject, "duplicate edge")
        seen.add(key)


def ensure_valid(model: ModelSpec) -> ModelSpec:
    errors = [d for d in validate_model(model) if d.severity == "error"]
    if errors:
        summary = "; ".join(str(d) for d in errors[:5])
        more = f" (+{len(errors) - 5} more)" if len(errors) > 5 else ""
        raise SemanticError(f"invalid model: {summary}{more}", errors)
    return model
