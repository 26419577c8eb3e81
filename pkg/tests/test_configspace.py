import random

import pytest

from adaptauth.configspace import (
    AuthConfiguration,
    disabled_features,
    enumerate_configs,
    from_choices,
    is_feasible,
    prunable_features,
)
from adaptauth.errors import ConfigSpaceEmpty
from adaptauth.model import ContextState
from adaptauth.modelio import model_from_dict

from conftest import full_ctx, scenario, toy_doc, with_edges
from generators import random_context, random_model_doc
from oracle import Oracle


class TestDisabled:
    def test_night_disables_biometrics(self, iov):
        assert disabled_features(full_ctx(iov, NightTime=1), iov) == {"Face", "Iris"}

    def test_devices_unavailable(self):
        model, ctx = scenario("s6")
        assert {"Smartcard", "Fingerprint"} <= disabled_features(ctx, model)

    def test_device_closure(self, healthcare):
        # reader and scanner require their credentials, so they fall with them
        got = disabled_features(full_ctx(healthcare, ReaderUnavailable=1, ScannerUnavailable=1), healthcare)
        assert got == {"Smartcard", "Fingerprint", "Reader", "Scanner"}

    def test_nothing_active(self, iov, healthcare):
        assert disabled_features(full_ctx(iov), iov) == frozenset()
        assert disabled_features(full_ctx(healthcare), healthcare) == frozenset()


class TestIsFeasible:
    def test_face_at_night(self, iov):
        cfg = AuthConfiguration(("Face",), "FullyAutomated")
        assert is_feasible(cfg, full_ctx(iov), iov)
        assert not is_feasible(cfg, full_ctx(iov, NightTime=1), iov)

    @pytest.mark.parametrize("name", ["s1", "s2", "s3"])
    def test_certificate_with_signature(self, name):
        model, ctx = scenario(name)
        assert is_feasible(from_choices(["Certificate", "Signature", "FullyAutomated"], model), ctx, model)

    def test_certificate_needs_crypto(self, iov):
        assert not is_feasible(AuthConfiguration(("Certificate",), "FullyAutomated"), full_ctx(iov), iov)

    def test_duplicate_credential(self, iov):
        assert not is_feasible(AuthConfiguration(("PIN", "PIN"), "Manual"), full_ctx(iov), iov)

    def test_requires_device(self, iov):
        assert not is_feasible(AuthConfiguration(("Smartcard",), "Manual"), full_ctx(iov), iov)
        assert is_feasible(AuthConfiguration(("Smartcard",), "Manual", ("Reader",)), full_ctx(iov), iov)

    def test_excludes(self, iov):
        assert not is_feasible(AuthConfiguration(("Face", "Iris"), "Manual"), full_ctx(iov), iov)

    def test_unknown_or_misplaced_ids(self, iov):
        ctx = full_ctx(iov)
        assert not is_feasible(AuthConfiguration(("Ghost",), "Manual"), ctx, iov)
        assert not is_feasible(AuthConfiguration(("PIN",), "Reader"), ctx, iov)
        assert not is_feasible(AuthConfiguration(("PIN",), "Manual", ("Signature",)), ctx, iov)
        assert not is_feasible(AuthConfiguration((), "Manual"), ctx, iov)

    def test_two_automation_levels_rejected(self, iov):
        with pytest.raises(ValueError):
            from_choices(["PIN", "Manual", "FullyAutomated"], iov)


class TestEnumerate:
    def test_toy_count(self):
        model = model_from_dict(toy_doc())
        configs = enumerate_configs(full_ctx(model), model)
        assert len(configs) == 18
        assert sum(c.two_factor for c in configs) == 9

    def test_toy_one_disabled(self):
        model = model_from_dict(with_edges(toy_doc(), ("ctx->feature-disable", "Dark", "C2")))
        configs = enumerate_configs(full_ctx(model, Dark=1), model)
        assert len(configs) == 9
        assert sum(not c.two_factor for c in configs) == 6

    def test_everything_disabled(self):
        model = model_from_dict(with_edges(
            toy_doc(), *(("ctx->feature-disable", "Dark", f"C{i}") for i in range(3))))
        with pytest.raises(ConfigSpaceEmpty):
            enumerate_configs(full_ctx(model, Dark=1), model)

    def test_sorted_and_unique(self, iov):
        configs = enumerate_configs(full_ctx(iov), iov)
        keys = [c.sort_key() for c in configs]
        assert keys == sorted(keys) and len(set(keys)) == len(keys)

    def test_deterministic(self, healthcare):
        ctx = full_ctx(healthcare, Emergency=1)
        assert enumerate_configs(ctx, healthcare) == enumerate_configs(ctx, healthcare)

    def test_renewal_is_pruned(self, iov):
        assert {"Weekly", "Monthly"} <= prunable_features(iov)
        assert not any({"Weekly", "Monthly"} & c.choices for c in enumerate_configs(full_ctx(iov), iov))

    @pytest.mark.parametrize("name,count", [("s1", 258), ("s4", 123), ("s6", 75)])
    def test_scenario_sizes(self, name, count):
        model, ctx = scenario(name)
        configs = enumerate_configs(ctx, model)
        assert len(configs) == count
        assert all(is_feasible(c, ctx, model) for c in configs)

    def test_s6_space_excludes_unavailable_devices(self):
        model, ctx = scenario("s6")
        assert not any({"Smartcard", "Fingerprint"} & set(c.credentials) for c in enumerate_configs(ctx, model))


def _independent_prunable(doc):
    """Optional, impact-free choices; recomputed from the raw document."""
    feats = {f["id"]: f for f in doc["features"]}
    kids = {}
    for f in doc["features"]:
        kids.setdefault(f.get("parent"), []).append(f["id"])
    impactful = {e["from"] for e in doc["edges"] if e["kind"] in ("feature->goal-impact", "feature->attack-reduction")}

    def subtree(fid):
        yield fid
        for c in kids.get(fid, []):
            yield from subtree(c)

    out = set()
    for fid, f in feats.items():
        if f.get("credential_class") or (f.get("attribute") or {}).get("name") == "automation":
            continue
        optional = f["kind"] == "optional" or (
            f["kind"] == "group-member" and feats[f["parent"]]["group"]["min"] == 0)
        if optional and not any(s in impactful for s in subtree(fid)):
            out.add(fid)
    return out


def test_matches_cartesian_expansion():
    """Enumeration equals the brute-force feasible set, minus gratuitous impact-free extras."""
    rng = random.Random(20240611)
    checked = 0
    for _ in range(150):
        doc = random_model_doc(rng)
        ctx_values = random_context(rng, doc)
        oracle = Oracle(doc)
        model = model_from_dict(doc)
        ctx = ContextState(ctx_values)
        prunable = _independent_prunable(doc)
        expected = set()
        for chosen in oracle.feasible_selections(ctx_values):
            sel = oracle.close(chosen)
            needed = set()
            for fid in sel:
                for r in oracle.features[fid].get("requires", []):
                    cur = r
                    while cur is not None:
                        needed.add(cur)
                        cur = oracle.features[cur].get("parent")
            if not any(c in prunable and c not in needed for c in chosen):
                expected.add(chosen)
        try:
            got = {c.choices for c in enumerate_configs(ctx, model)}
        except ConfigSpaceEmpty:
            got = set()
        assert got == expected
        for chosen in oracle.feasible_selections(ctx_values):
            assert is_feasible(from_choices(chosen, model), ctx, model)
        checked += 1
    assert checked == 150
