import json

import pytest

from adaptauth.errors import DocumentSyntaxError, SchemaError, SemanticError
from adaptauth.modelio import (
    model_from_dict,
    model_to_dict,
    parse_context,
    parse_model,
    parse_scenario_stream,
    serialize_model,
)

from conftest import HEALTHCARE, IOV, bundled, toy_doc, with_edges


class TestParseModel:
    def test_bundled_iov_counts(self):
        model = parse_model(bundled(IOV).read_bytes())
        assert len(model.context_factors) == 9
        assert model.attack_ids == ("Impersonation", "Replay", "Timing")
        assert "NightTime" in model.factor_ids and "NodeMovement" in model.factor_ids

    def test_impact_out_of_range_names_field(self, iov_doc):
        doc = json.loads(json.dumps(iov_doc))
        doc["edges"][3]["impact"] = {"value": 1.5}
        with pytest.raises(SchemaError) as info:
            parse_model(json.dumps(doc))
        assert "edges[3]" in info.value.field

    def test_empty_document(self):
        with pytest.raises(SchemaError) as info:
            parse_model("{}")
        assert "goals" in str(info.value)

    def test_malformed_json_reports_line(self):
        with pytest.raises(DocumentSyntaxError) as info:
            parse_model('{\n  "goals": [\n  ,\n]}')
        assert info.value.line == 3

    def test_not_utf8(self):
        with pytest.raises(DocumentSyntaxError):
            parse_model(b"\xff\xfe{}")

    def test_semantic_errors_carry_diagnostics(self):
        doc = with_edges(toy_doc(), ("feature->goal-impact", "C0", "Speed", "+"))
        with pytest.raises(SemanticError) as info:
            parse_model(json.dumps(doc))
        assert any("Speed" in str(d) for d in info.value.diagnostics)

    def test_label_and_value_must_agree(self):
        doc = with_edges(toy_doc(), ("feature->goal-impact", "C0", "Conf", "+"))
        doc["edges"][0]["impact"]["value"] = 0.95
        with pytest.raises(SchemaError):
            model_from_dict(doc)

    def test_calibration_applies_to_labels(self):
        doc = with_edges(toy_doc(), ("feature->goal-impact", "C0", "Conf", "+"))
        doc["calibration"] = {"+": 0.78}
        model = model_from_dict(doc)
        assert model.satisfaction_out["C0"]["Conf"] == 0.78

    def test_deterministic(self):
        raw = bundled(HEALTHCARE).read_bytes()
        assert parse_model(raw) == parse_model(raw)


class TestRoundTrip:
    @pytest.mark.parametrize("path", [IOV, HEALTHCARE])
    def test_bundled(self, path):
        model = parse_model(bundled(path).read_bytes())
        again = parse_model(serialize_model(model))
        assert again == model
        assert model_to_dict(again) == model_to_dict(model)

    def test_meta_survives(self, iov):
        assert parse_model(serialize_model(iov)).meta == iov.meta


class TestParseContext:
    def test_s1(self, iov):
        ctx = parse_context('{"V2RTopology": 1, "RoadTrafficInfo": 1}', iov)
        assert ctx["V2RTopology"] == 1.0 and ctx["RoadTrafficInfo"] == 1.0
        assert set(ctx) == set(iov.factor_ids)
        assert all(ctx[f] == 0.0 for f in iov.factor_ids if f not in ("V2RTopology", "RoadTrafficInfo"))

    def test_empty_is_all_zero(self, iov):
        ctx = parse_context("{}", iov)
        assert ctx.active() == frozenset() and len(ctx) == len(iov.factor_ids)

    def test_unknown_factor(self, iov):
        with pytest.raises(SemanticError):
            parse_context('{"Unknown": 1}', iov)

    def test_out_of_range(self, iov):
        with pytest.raises(SchemaError):
            parse_context('{"NightTime": 2}', iov)

    def test_partial_activation(self, iov):
        assert parse_context('{"RoadTrafficInfo": 0.25}', iov).is_active("RoadTrafficInfo")


class TestScenarioStream:
    def test_happy_path(self, iov):
        text = '{"seq": 1, "set": {"NightTime": 0}}\n{"seq": 2, "set": {"NightTime": 1}}\n'
        stream = parse_scenario_stream(text, iov)
        assert [r.seq for r in stream] == [1, 2]
        assert stream[1].set == {"NightTime": 1.0}

    def test_non_increasing_seq(self, iov):
        text = '{"seq": 2, "set": {}}\n{"seq": 1, "set": {}}\n'
        with pytest.raises(SchemaError):
            parse_scenario_stream(text, iov)

    def test_repeated_seq(self, iov):
        with pytest.raises(SchemaError):
            parse_scenario_stream('{"seq": 1, "set": {}}\n{"seq": 1, "set": {}}\n', iov)

    def test_negative_value(self, iov):
        with pytest.raises(SchemaError):
            parse_scenario_stream('{"seq": 1, "set": {"NightTime": -0.1}}', iov)

    def test_unknown_factor(self, iov):
        with pytest.raises(SemanticError):
            parse_scenario_stream('{"seq": 1, "set": {"Fog": 1}}', iov)

    def test_bad_line_number(self, iov):
        with pytest.raises(DocumentSyntaxError) as info:
            parse_scenario_stream('{"seq": 1, "set": {}}\n{oops\n', iov)
        assert info.value.line == 2

    def test_blank_lines_skipped(self, iov):
        assert parse_scenario_stream("\n\n", iov) == []

    @pytest.mark.parametrize("name,model", [("iov/s1-s3", IOV), ("healthcare/s4-s6", HEALTHCARE)])
    def test_bundled_streams(self, name, model):
        parsed = parse_model(bundled(model).read_bytes())
        stream = parse_scenario_stream(bundled(f"bundled:{name}.stream.jsonl").read_bytes(), parsed)
        assert [r.seq for r in stream] == [1, 2, 3]
