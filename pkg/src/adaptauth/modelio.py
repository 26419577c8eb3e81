"""Reading and writing model documents, context documents and scenario streams (JSON / JSONL)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from .errors import DocumentSyntaxError, SchemaError, SemanticError
from .model import (
    LABEL_ALIASES,
    Attack,
    ContextFactor,
    ContextState,
    EdgeKind,
    Feature,
    FeatureKind,
    Goal,
    ImpactEdge,
    ImpactValue,
    ModelSpec,
    canonical_label,
    ensure_valid,
    label_to_value,
)

_UNIT = {"type": "number", "minimum": 0, "maximum": 1}
_IDS = {"type": "array", "items": {"type": "string"}}
_LABEL = {"type": "string", "enum": sorted({*LABEL_ALIASES, *LABEL_ALIASES.values()})}

MODEL_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["goals", "context_factors", "attacks", "features", "edges"],
    "additionalProperties": False,
    "properties": {
        "meta": {
            "type": "object",
            "properties": {"two_factor_bonus": _UNIT, "name": {"type": "string"}},
        },
        "goals": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "name": {"type": "string"},
                    "children": _IDS,
                    "root_category": {"enum": ["Security", "Usability", "Performance"]},
                    "security_sensitive": {"type": "boolean"},
                },
            },
        },
        "context_factors": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "additionalProperties": False,
                "properties": {"id": {"type": "string", "minLength": 1}, "description": {"type": "string"}},
            },
        },
        "attacks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "additionalProperties": False,
                "properties": {"id": {"type": "string", "minLength": 1}, "description": {"type": "string"}},
            },
        },
        "features": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"enum": [k.value for k in FeatureKind]},
                    "parent": {"type": "string"},
                    "group": {
                        "type": "object",
                        "required": ["min", "max"],
                        "additionalProperties": False,
                        "properties": {
                            "min": {"type": "integer", "minimum": 0},
                            "max": {"type": "integer", "minimum": 1},
                        },
                    },
                    "attribute": {
                        "type": "object",
                        "required": ["name", "value"],
                        "additionalProperties": False,
                        "properties": {"name": {"type": "string"}, "value": _UNIT},
                    },
                    "requires": _IDS,
                    "excludes": _IDS,
                    "credential_class": {"enum": ["know", "have", "are"]},
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind", "from", "to"],
                "additionalProperties": False,
                "properties": {
                    "kind": {"enum": [k.value for k in EdgeKind] + [k.value.replace("->", "→") for k in EdgeKind]},
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "impact": {
                        "type": "object",
                        "additionalProperties": False,
                        "minProperties": 1,
                        "properties": {"label": _LABEL, "value": _UNIT},
                    },
                },
            },
        },
        "calibration": {
            "type": "object",
            "propertyNames": _LABEL,
            "additionalProperties": _UNIT,
        },
    },
}

CONTEXT_SCHEMA: dict[str, Any] = {"type": "object", "additionalProperties": _UNIT}

RECORD_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["seq", "set"],
    "additionalProperties": False,
    "properties": {"seq": {"type": "integer"}, "set": CONTEXT_SCHEMA},
}


@dataclass(frozen=True)
class ScenarioRecord:
    seq: int
    set: Mapping[str, float]


def _field_path(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<document>"


def _load_json(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentSyntaxError(f"input is not UTF-8: {exc}") from exc
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, exc.lineno, exc.colno) from exc


def _check_schema(doc: Any, schema: dict[str, Any]) -> None:
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        first = errors[0]
        raise SchemaError(first.message, _field_path(first.absolute_path))


def _impact(raw: Mapping[str, Any] | None, calibration: Mapping[str, float], where: str) -> ImpactValue | None:
    if raw is None:
        return None
    label = raw.get("label")
    try:
        if "value" in raw:
            return ImpactValue(float(raw["value"]), label)
        return label_to_value(label, calibration)
    except (ValueError, SemanticError) as exc:
        raise SchemaError(str(exc), where) from exc


def model_from_dict(doc: Any) -> ModelSpec:
    _check_schema(doc, MODEL_SCHEMA)
    calibration = {canonical_label(k): float(v) for k, v in doc.get("calibration", {}).items()}
    meta = dict(doc.get("meta", {}))
    goals = tuple(
        Goal(
            g["id"],
            g.get("name", g["id"]),
            tuple(g.get("children", ())),
            g.get("root_category"),
            bool(g.get("security_sensitive", False)),
        )
        for g in doc["goals"]
    )
    factors = tuple(ContextFactor(c["id"], c.get("description", "")) for c in doc["context_factors"])
    attacks = tuple(Attack(a["id"], a.get("description", "")) for a in doc["attacks"])
    features = tuple(
        Feature(
            f["id"],
            FeatureKind(f["kind"]),
            f.get("parent"),
            (f["group"]["min"], f["group"]["max"]) if "group" in f else None,
            (f["attribute"]["name"], float(f["attribute"]["value"])) if "attribute" in f else None,
            tuple(f.get("requires", ())),
            tuple(f.get("excludes", ())),
            f.get("credential_class"),
        )
        for f in doc["features"]
    )
    edges = tuple(
        ImpactEdge(
            EdgeKind.parse(e["kind"]),
            e["from"],
            e["to"],
            _impact(e.get("impact"), calibration, f"edges[{i}].impact"),
        )
        for i, e in enumerate(doc["edges"])
    )
    return ModelSpec(
        goals,
        factors,
        attacks,
        features,
        edges,
        calibration,
        float(meta.get("two_factor_bonus", 0.2)),
        meta,
    )


def parse_model(data: bytes | str) -> ModelSpec:
    """Parse and validate a model document.

    Raises DocumentSyntaxError, SchemaError (with the offending field path) or
    SemanticError (carrying the validator's diagnostics).
    """
    return ensure_valid(model_from_dict(_load_json(data)))


def load_model(path: str | Path) -> ModelSpec:
    return parse_model(Path(path).read_bytes())


def model_to_dict(model: ModelSpec) -> dict[str, Any]:
    def goal(g: Goal) -> dict[str, Any]:
        out: dict[str, Any] = {"id": g.id, "name": g.name, "children": list(g.children)}
        if g.root_category:
            out["root_category"] = g.root_category
        if g.security_sensitive:
            out["security_sensitive"] = True
        return out

    def feature(f: Feature) -> dict[str, Any]:
        out: dict[str, Any] = {"id": f.id, "kind": f.kind.value}
        if f.parent is not None:
            out["parent"] = f.parent
        if f.group is not None:
            out["group"] = {"min": f.group[0], "max": f.group[1]}
        if f.attribute is not None:
            out["attribute"] = {"name": f.attribute[0], "value": f.attribute[1]}
        out["requires"] = list(f.requires)
        out["excludes"] = list(f.excludes)
        if f.credential_class is not None:
            out["credential_class"] = f.credential_class
        return out

    def edge(e: ImpactEdge) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": e.kind.value, "from": e.source, "to": e.target}
        if e.impact is not None:
            out["impact"] = {"value": e.impact.value}
            if e.impact.source_label is not None:
                out["impact"]["label"] = e.impact.source_label
        return out

    meta = {k: v for k, v in model.meta.items() if k != "two_factor_bonus"}
    meta["two_factor_bonus"] = model.two_factor_bonus
    return {
        "meta": meta,
        "goals": [goal(g) for g in model.goals],
        "context_factors": [{"id": c.id, "description": c.description} for c in model.context_factors],
        "attacks": [{"id": a.id, "description": a.description} for a in model.attacks],
        "features": [feature(f) for f in model.features],
        "edges": [edge(e) for e in model.edges],
        "calibration": dict(model.calibration),
    }


def serialize_model(model: ModelSpec) -> str:
    return json.dumps(model_to_dict(model), indent=2, ensure_ascii=False) + "\n"


def context_from_mapping(values: Mapping[str, Any], model: ModelSpec) -> ContextState:
    _check_schema(values, CONTEXT_SCHEMA)
    known = set(model.factor_ids)
    unknown = sorted(k for k in values if k not in known)
    if unknown:
        raise SemanticError(f"unknown context factor(s): {', '.join(unknown)}")
    return ContextState({fid: float(values.get(fid, 0.0)) for fid in model.factor_ids})


def parse_context(data: bytes | str, model: ModelSpec) -> ContextState:
    """Full context assignment: factors missing from the document are inactive (0)."""
    return context_from_mapping(_load_json(data), model)


def load_context(path: str | Path, model: ModelSpec) -> ContextState:
    return parse_context(Path(path).read_bytes(), model)


def parse_scenario_stream(data: bytes | str, model: ModelSpec) -> list[ScenarioRecord]:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentSyntaxError(f"input is not UTF-8: {exc}") from exc
    known = set(model.factor_ids)
    records: list[ScenarioRecord] = []
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DocumentSyntaxError(exc.msg, lineno, exc.colno) from exc
        try:
            _check_schema(raw, RECORD_SCHEMA)
        except SchemaError as exc:
            raise SchemaError(str(exc), f"line {lineno}") from exc
        unknown = sorted(k for k in raw["set"] if k not in known)
        if unknown:
            raise SemanticError(f"line {lineno}: unknown context factor(s): {', '.join(unknown)}")
        if records and raw["seq"] <= records[-1].seq:
            raise SchemaError(f"seq {raw['seq']} does not increase (previous {records[-1].seq})", f"line {lineno}")
        records.append(ScenarioRecord(raw["seq"], {k: float(v) for k, v in raw["set"].items()}))
    return records


def load_scenario_stream(path: str | Path, model: ModelSpec) -> list[ScenarioRecord]:
    return parse_scenario_stream(Path(path).read_bytes(), model)
