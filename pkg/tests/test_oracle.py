"""Engine outputs against the brute-force evaluator in ``oracle.py``."""

import json
import random

import pytest
from hypothesis import given, settings

from adaptauth.configspace import enumerate_configs, selected_features
from adaptauth.decision import _assess, decide_exhaustive
from adaptauth.errors import ConfigSpaceEmpty
from adaptauth.model import ContextState
from adaptauth.modelio import model_from_dict

from conftest import SCENARIOS, bundled
from generators import model_and_context, random_context, random_model_doc
from oracle import Oracle

TOL = 1e-9


def compare_instance(doc, ctx_values):
    """Check every quantity of every configuration; returns the number of configurations compared."""
    oracle = Oracle(doc)
    model = model_from_dict(doc)
    ctx = ContextState(ctx_values)
    try:
        configs = enumerate_configs(ctx, model)
    except ConfigSpaceEmpty:
        assert oracle.best_utility(ctx_values) is None
        return 0
    for cfg in configs:
        a = _assess(model, ctx, cfg)
        sel = oracle.close(cfg.choices)
        assert sel == selected_features(cfg, model)
        for leaf in oracle.leaves():
            assert abs(a.goal.priorities[leaf] - oracle.priority(leaf, ctx_values)) <= TOL
        expected_sat = oracle.satisfaction(sel, ctx_values)
        for gid, value in expected_sat.items():
            assert abs(a.goal.satisfactions[gid] - value) <= TOL
        total, partial = oracle.risk(sel, ctx_values)
        for attack in oracle.attacks:
            assert abs(a.risk.likelihoods[attack] - oracle.likelihood(attack, sel, ctx_values)) <= TOL
            assert abs(a.risk.partial_risks[attack] - partial[attack]) <= TOL
        assert abs(a.risk.total_risk - total) <= TOL
        assert abs(a.utility - oracle.utility(cfg.choices, ctx_values)) <= TOL
    best = decide_exhaustive(model, ctx).best.utility
    assert abs(best - oracle.best_utility(ctx_values)) <= TOL
    return len(configs)


@settings(max_examples=150, deadline=None)
@given(model_and_context())
def test_random_instances(case):
    compare_instance(*case)


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_bundled_scenarios(name):
    model_path, ctx_path = SCENARIOS[name]
    doc = json.loads(bundled(model_path).read_text())
    ctx = {f["id"]: 0.0 for f in doc["context_factors"]}
    ctx.update(json.loads(bundled(ctx_path).read_text()))
    oracle = Oracle(doc)
    model = model_from_dict(doc)
    state = ContextState(ctx)
    for cfg in enumerate_configs(state, model)[::7]:
        assert abs(_assess(model, state, cfg).utility - oracle.utility(cfg.choices, ctx)) <= TOL


def test_fixed_seed_batch():
    rng = random.Random(7)
    compared = 0
    for _ in range(60):
        doc = random_model_doc(rng)
        compared += compare_instance(doc, random_context(rng, doc))
    assert compared > 0
