"""Feasible authentication configurations of the extended feature model.

A configuration records only the *choices* made in the feature tree: the one or
two credential types, the automation level and any other optional or
group-member features (password strength, crypto algorithm, device, ...).
Root, mandatory and alternative-group nodes are implied by those choices.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from .errors import ConfigSpaceEmpty
from .model import STRUCTURAL_KINDS, ContextState, FeatureKind, ModelSpec


@dataclass(frozen=True)
class AuthConfiguration:
    credentials: tuple[str, ...]
    automation: str | None = None
    options: tuple[str, ...] = ()

    @property
    def two_factor(self) -> bool:
        return len(self.credentials) == 2

    @property
    def choices(self) -> frozenset[str]:
        picked = set(self.credentials) | set(self.options)
        if self.automation is not None:
            picked.add(self.automation)
        return frozenset(picked)

    def sort_key(self) -> tuple:
        return (self.credentials, self.automation or "", self.options)

    def summary(self) -> str:
        text = "+".join(self.credentials)
        extras = ([self.automation] if self.automation else []) + list(self.options)
        return f"{text} [{', '.join(extras)}]" if extras else text

    def to_dict(self) -> dict:
        return {
            "credentials": list(self.credentials),
            "automation": self.automation,
            "options": list(self.options),
            "two_factor": self.two_factor,
        }


def from_choices(choices: Iterable[str], model: ModelSpec) -> AuthConfiguration:
    picked = set(choices)
    creds = tuple(sorted(c for c in picked if model.feature_by_id[c].is_credential))
    autos = sorted(a for a in picked if model.feature_by_id[a].is_automation)
    if len(autos) > 1:
        raise ValueError(f"more than one automation level selected: {autos}")
    rest = tuple(sorted(picked - set(creds) - set(autos)))
    return AuthConfiguration(creds, autos[0] if autos else None, rest)


def selected_features(config: AuthConfiguration, model: ModelSpec) -> frozenset[str]:
    """Every feature switched on by ``config``: its choices plus the implied structural nodes."""
    if model.feature_root is None:
        return frozenset()
    return _implied(config.choices, model, _structural_ids(model))


def disabled_features(ctx: ContextState, model: ModelSpec) -> frozenset[str]:
    """Features made infeasible by active context factors, closed under ``requires``."""
    disabled: set[str] = set()
    for factor in model.factor_ids:
        if ctx.is_active(factor):
            disabled.update(model.disable_out.get(factor, ()))
    changed = bool(disabled)
    while changed:
        changed = False
        for f in model.features:
            if f.id not in disabled and any(r in disabled for r in f.requires):
                disabled.add(f.id)
                changed = True
    return frozenset(disabled)


def is_feasible(config: AuthConfiguration, ctx: ContextState, model: ModelSpec) -> bool:
    features = model.feature_by_id
    creds = config.credentials
    if not creds or len(creds) > 2 or len(set(creds)) != len(creds):
        return False
    if any(c not in features or not features[c].is_credential for c in creds):
        return False
    if config.automation is not None:
        if config.automation not in features or not features[config.automation].is_automation:
            return False
    for opt in config.options:
        f = features.get(opt)
        if f is None or f.is_credential or f.is_automation:
            return False
        if f.kind not in (FeatureKind.OPTIONAL, FeatureKind.MEMBER):
            return False
    if len(set(config.options)) != len(config.options):
        return False

    selected = selected_features(config, model)
    if not config.choices <= selected:
        return False  # a choice whose parent is not selected
    for fid in selected:
        f = features[fid]
        if f.kind is FeatureKind.GROUP and f.group is not None:
            count = sum(1 for m in model.feature_children.get(fid, ()) if m in selected)
            if not f.group[0] <= count <= f.group[1]:
                return False
        if any(r not in selected for r in f.requires):
            return False
        if any(x in selected for x in f.excludes):
            return False
    return not (selected & disabled_features(ctx, model))


# -- enumeration --------------------------------------------------------------


def _subtree_has_impact(fid: str, model: ModelSpec) -> bool:
    stack = [fid]
    while stack:
        cur = stack.pop()
        if model.satisfaction_out.get(cur) or model.reduction_out.get(cur):
            return True
        stack.extend(model.feature_children.get(cur, ()))
    return False


def prunable_features(model: ModelSpec) -> frozenset[str]:
    """Optional choices with no goal or attack impact anywhere in their subtree.

    Selecting one can never change an assessment, so enumeration only includes
    them when another selected feature requires them.
    """
    out = set()
    for f in model.features:
        if f.is_credential or f.is_automation:
            continue
        optional = f.kind is FeatureKind.OPTIONAL
        if f.kind is FeatureKind.MEMBER:
            group = model.feature_by_id[f.parent]
            optional = group.group is not None and group.group[0] == 0
        if optional and not _subtree_has_impact(f.id, model):
            out.add(f.id)
    return frozenset(out)


def _ancestors(fid: str, model: ModelSpec) -> Iterator[str]:
    cur = model.feature_by_id.get(fid)
    while cur is not None:
        yield cur.id
        cur = model.feature_by_id.get(cur.parent) if cur.parent else None


def _expand(fid: str, model: ModelSpec) -> list[frozenset[str]]:
    """All choice sets for the subtree below ``fid``, assuming ``fid`` is selected."""
    combos: list[frozenset[str]] = [frozenset()]
    for child_id in model.feature_children.get(fid, ()):
        child = model.feature_by_id[child_id]
        if child.kind is FeatureKind.MANDATORY:
            opts = _expand(child_id, model)
        elif child.kind is FeatureKind.OPTIONAL:
            opts = [frozenset()] + [s | {child_id} for s in _expand(child_id, model)]
        elif child.kind is FeatureKind.GROUP:
            lo, hi = child.group or (1, 1)
            members = model.feature_children.get(child_id, ())
            opts = []
            for k in range(lo, hi + 1):
                for picked in combinations(members, k):
                    sub: list[frozenset[str]] = [frozenset(picked)]
                    for m in picked:
                        sub = [a | b for a in sub for b in _expand(m, model)]
                    opts.extend(sub)
        else:
            continue  # stray member outside a group; rejected by validation
        combos = [a | b for a in combos for b in opts]
    return combos


def _structural_space(model: ModelSpec) -> tuple[frozenset[str], ...]:
    """Context-independent choice sets respecting tree, groups, requires, excludes and pruning.

    Cached on the model instance: the feature tree never changes after construction.
    """
    cache = model.__dict__.get("_structural_space")
    if cache is not None:
        return cache
    features = model.feature_by_id
    prunable = prunable_features(model)
    root = model.feature_root
    raw = _expand(root, model) if root is not None else []
    structural = _structural_ids(model)
    kept = []
    for choices in raw:
        if not any(features[c].is_credential for c in choices):
            continue
        selected = _implied(choices, model, structural)
        if any(r not in selected for f in selected for r in features[f].requires):
            continue
        if any(x in selected for f in selected for x in features[f].excludes):
            continue
        needed = {a for f in selected for r in features[f].requires for a in _ancestors(r, model)}
        if any(c in prunable and c not in needed for c in choices):
            continue
        kept.append(choices)
    result = tuple(kept)
    model.__dict__["_structural_space"] = result
    return result


def _structural_ids(model: ModelSpec) -> frozenset[str]:
    return frozenset(f.id for f in model.features if f.kind in STRUCTURAL_KINDS)


def _implied(choices: frozenset[str], model: ModelSpec, structural: frozenset[str]) -> frozenset[str]:
    selected = {model.feature_root}
    stack = [model.feature_root]
    while stack:
        fid = stack.pop()
        for child in model.feature_children.get(fid, ()):
            if child in structural or child in choices:
                selected.add(child)
                stack.append(child)
    return frozenset(selected)


def iter_configs(ctx: ContextState, model: ModelSpec) -> Iterator[AuthConfiguration]:
    disabled = disabled_features(ctx, model)
    structural = _structural_ids(model)
    configs = []
    for choices in _structural_space(model):
        if disabled and (_implied(choices, model, structural) & disabled):
            continue
        configs.append(from_choices(choices, model))
    configs.sort(key=AuthConfiguration.sort_key)
    return iter(configs)


def enumerate_configs(ctx: ContextState, model: ModelSpec) -> list[AuthConfiguration]:
    """Every feasible configuration under ``ctx``, once each, in lexicographic order.

    Raises ConfigSpaceEmpty when the context disables every option.
    """
    configs = list(iter_configs(ctx, model))
    if not configs:
        active = ", ".join(sorted(ctx.active())) or "none"
        raise ConfigSpaceEmpty(f"no feasible authentication configuration (active factors: {active})")
    return configs
