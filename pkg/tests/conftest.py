from __future__ import annotations

import copy
import json

import pytest

from adaptauth.cli import resolve
from adaptauth.model import ContextState
from adaptauth.modelio import load_context, load_model

IOV = "bundled:iov/iov.model.json"
HEALTHCARE = "bundled:healthcare/healthcare.model.json"
SCENARIOS = {
    "s1": (IOV, "bundled:iov/s1.ctx.json"),
    "s2": (IOV, "bundled:iov/s2.ctx.json"),
    "s3": (IOV, "bundled:iov/s3.ctx.json"),
    "s4": (HEALTHCARE, "bundled:healthcare/s4.ctx.json"),
    "s5": (HEALTHCARE, "bundled:healthcare/s5.ctx.json"),
    "s6": (HEALTHCARE, "bundled:healthcare/s6.ctx.json"),
}


def bundled(name: str):
    return resolve(name)


@pytest.fixture(scope="session")
def iov():
    return load_model(bundled(IOV))


@pytest.fixture(scope="session")
def healthcare():
    return load_model(bundled(HEALTHCARE))


@pytest.fixture(scope="session")
def iov_doc():
    return json.loads(bundled(IOV).read_text(encoding="utf-8"))


def scenario(name: str):
    model_path, ctx_path = SCENARIOS[name]
    model = load_model(bundled(model_path))
    return model, load_context(bundled(ctx_path), model)


def full_ctx(model, **active) -> ContextState:
    values = {f: 0.0 for f in model.factor_ids}
    values.update({k: float(v) for k, v in active.items()})
    return ContextState(values)


def toy_doc(n_creds: int = 3, two_factor: bool = True, autos: bool = True) -> dict:
    """Small hand-built model: n credentials, optional automation group, one leaf per root."""
    feats = [
        {"id": "Root", "kind": "root"},
        {"id": "Cred", "kind": "alternative-group", "parent": "Root", "group": {"min": 1, "max": 2 if two_factor else 1}},
    ]
    for i in range(n_creds):
        feats.append({"id": f"C{i}", "kind": "group-member", "parent": "Cred", "credential_class": "have"})
    if autos:
        feats.append({"id": "Auto", "kind": "alternative-group", "parent": "Root", "group": {"min": 1, "max": 1}})
        for name, level in (("Manual", 0.0), ("Semi", 0.5), ("Full", 1.0)):
            feats.append({"id": name, "kind": "group-member", "parent": "Auto",
                          "attribute": {"name": "automation", "value": level}})
    return {
        "meta": {"two_factor_bonus": 0.2},
        "goals": [
            {"id": "Security", "root_category": "Security", "children": ["Conf"]},
            {"id": "Conf", "security_sensitive": True},
            {"id": "Usability", "root_category": "Usability", "children": ["Eff"]},
            {"id": "Eff"},
            {"id": "Performance", "root_category": "Performance", "children": ["Time"]},
            {"id": "Time"},
        ],
        "context_factors": [{"id": "Dark"}, {"id": "Busy"}],
        "attacks": [{"id": "Spoof"}],
        "features": feats,
        "edges": [],
        "calibration": {},
    }


def with_edges(doc: dict, *edges: tuple) -> dict:
    out = copy.deepcopy(doc)
    for kind, src, dst, *imp in edges:
        e = {"kind": kind, "from": src, "to": dst}
        if imp:
            e["impact"] = {"value": imp[0]} if isinstance(imp[0], float) else {"label": imp[0]}
        out["edges"].append(e)
    return out


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}: {detail}")
