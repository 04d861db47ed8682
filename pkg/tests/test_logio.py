"""File formats: JSONL logs, policy/synth configs, curve CSV."""

import json

import pytest

from qcascade import (
    AccuracyCostCurve,
    CurvePoint,
    DuplicateRecord,
    MalformedLine,
    SchemaViolation,
)
from qcascade.costs import CostMode
from qcascade.logio import (
    curve_to_csv,
    load_policy,
    load_questions,
    load_synth_config,
    parse_logs,
    read_curve_csv,
    read_records,
    record_to_json,
    write_curve_csv,
    write_records,
)

from helpers import make_record

GOOD_LINE = (
    '{"qid":"q1","stage":"cb","question":"who?","prediction":"x",'
    '"token_probs":[0.5,0.25],"n_passages":0,"gold":["x","y"]}'
)


def write(tmp_path, name, text, mode="w"):
    p = tmp_path / name
    if mode == "wb":
        p.write_bytes(text)
    else:
        p.write_text(text, encoding="utf-8")
    return p


class TestRecordsRoundTrip:
    def test_parse_one_line(self, tmp_path):
        (rec,) = read_records(write(tmp_path, "a.jsonl", GOOD_LINE + "\n"))
        assert rec.qid == "q1"
        assert rec.stage_id == "cb"
        assert rec.token_probs.values == (0.5, 0.25)
        assert rec.gold == ("x", "y")

    def test_write_read_write_is_stable(self, tmp_path):
        records = [
            make_record("q1", "cb", [0.5, 0.125]),
            make_record("q2", "cb", [1.0], correct=False),
            make_record("q1", "ob3", [0.7], n_passages=3),
        ]
        p1 = tmp_path / "one.jsonl"
        write_records(records, p1)
        back = read_records(p1)
        assert back == records
        p2 = tmp_path / "two.jsonl"
        write_records(back, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_non_ascii_survives(self, tmp_path):
        rec = make_record("q1", "cb", [0.5], question="где Київ—столиця?")
        p = tmp_path / "u.jsonl"
        write_records([rec], p)
        assert "Київ" in p.read_text(encoding="utf-8")
        assert read_records(p)[0].question == rec.question

    def test_gold_less_record_round_trips(self, tmp_path):
        rec = make_record("q1", "cb", [0.5], gold_present=False)
        assert '"gold"' not in record_to_json(rec)
        p = tmp_path / "g.jsonl"
        write_records([rec], p)
        assert read_records(p)[0].gold is None

    def test_empty_file_is_empty_log(self, tmp_path):
        p = write(tmp_path, "e.jsonl", "")
        assert read_records(p) == []
        assert parse_logs([p]) == {}


class TestRecordValidation:
    def test_invalid_json_names_the_line(self, tmp_path):
        p = write(tmp_path, "bad.jsonl", GOOD_LINE + "\n{oops\n")
        with pytest.raises(MalformedLine) as exc:
            read_records(p)
        assert exc.value.lineno == 2
        assert "bad.jsonl" in str(exc.value)

    def test_non_object_line(self, tmp_path):
        p = write(tmp_path, "arr.jsonl", "[1,2]\n")
        with pytest.raises(MalformedLine):
            read_records(p)

    def test_blank_line_rejected(self, tmp_path):
        p = write(tmp_path, "blank.jsonl", GOOD_LINE + "\n\n")
        with pytest.raises(MalformedLine) as exc:
            read_records(p)
        assert exc.value.lineno == 2

    def test_non_utf8_rejected(self, tmp_path):
        p = write(tmp_path, "latin.jsonl", GOOD_LINE.encode() + b"\n\xff\xfe{}\n", "wb")
        with pytest.raises(MalformedLine) as exc:
            read_records(p)
        assert "UTF-8" in str(exc.value)

    @pytest.mark.parametrize(
        "mutate,field",
        [
            (lambda o: o.pop("qid"), "qid"),
            (lambda o: o.update(qid=""), "qid"),
            (lambda o: o.update(stage=7), "stage"),
            (lambda o: o.update(token_probs=[]), "token_probs"),
            (lambda o: o.update(token_probs=[0.5, 0.0]), "token_probs"),
            (lambda o: o.update(token_probs=[0.5, 1.5]), "token_probs"),
            (lambda o: o.update(token_probs=[True]), "token_probs"),
            (lambda o: o.update(token_probs="high"), "token_probs"),
            (lambda o: o.update(n_passages=-1), "n_passages"),
            (lambda o: o.update(n_passages=2.5), "n_passages"),
            (lambda o: o.update(n_passages=True), "n_passages"),
            (lambda o: o.update(gold=[]), "gold"),
            (lambda o: o.update(gold=[1]), "gold"),
            (lambda o: o.update(extra="?"), "extra"),
        ],
    )
    def test_schema_violations_name_the_field(self, tmp_path, mutate, field):
        obj = json.loads(GOOD_LINE)
        mutate(obj)
        p = write(tmp_path, "s.jsonl", json.dumps(obj) + "\n")
        with pytest.raises(SchemaViolation) as exc:
            read_records(p)
        assert exc.value.field == field
        assert exc.value.lineno == 1

    def test_integer_probs_accepted_as_floats(self, tmp_path):
        obj = json.loads(GOOD_LINE)
        obj["token_probs"] = [1]
        p = write(tmp_path, "i.jsonl", json.dumps(obj) + "\n")
        assert read_records(p)[0].token_probs.values == (1.0,)

    def test_duplicate_across_files(self, tmp_path):
        p1 = write(tmp_path, "a.jsonl", GOOD_LINE + "\n")
        p2 = write(tmp_path, "b.jsonl", GOOD_LINE + "\n")
        with pytest.raises(DuplicateRecord) as exc:
            parse_logs([p1, p2])
        assert exc.value.qid == "q1"
        assert "b.jsonl" in str(exc.value)

    def test_same_qid_different_stages_is_fine(self, tmp_path):
        other = GOOD_LINE.replace('"stage":"cb"', '"stage":"ob5"').replace(
            '"n_passages":0', '"n_passages":5'
        )
        p = write(tmp_path, "ok.jsonl", GOOD_LINE + "\n" + other + "\n")
        table = parse_logs([p])
        assert set(table) == {"cb", "ob5"}


class TestPolicyFile:
    GOOD = {
        "method": "pfl",
        "cost": {"c_cb": 6.15e9, "c_ob_per_passage": 2.02e10, "mode": "encoder_reuse"},
        "stages": [
            {"name": "cb", "kind": "cb", "passages": 0, "threshold": 0.5},
            {"name": "ob25", "kind": "ob", "passages": 25, "threshold": 0.8},
            {"name": "ob100", "kind": "ob", "passages": 100},
        ],
    }

    def test_load(self, tmp_path):
        p = write(tmp_path, "p.json", json.dumps(self.GOOD))
        policy = load_policy(p)
        assert policy.method.value == "pfl"
        assert policy.cost.mode is CostMode.ENCODER_REUSE
        assert policy.ob_passages == (25, 100)
        assert policy.thresholds() == (0.5, 0.8)
        assert policy.stages[-1].threshold is None

    @pytest.mark.parametrize(
        "mutate,field",
        [
            (lambda o: o.update(method="max"), "method"),
            (lambda o: o.pop("cost"), "cost"),
            (lambda o: o["cost"].pop("c_cb"), "cost.c_cb"),
            (lambda o: o["cost"].update(mode="cached"), "cost.mode"),
            (lambda o: o.update(stages=[]), "stages"),
            (lambda o: o["stages"][0].update(kind="open"), "stages[0].kind"),
            (lambda o: o["stages"][1].update(threshold="high"), "stages[1].threshold"),
            (lambda o: o.update(budget=3), "budget"),
            (lambda o: o["stages"][0].update(model="t5"), "stages[0].model"),
        ],
    )
    def test_policy_schema_errors(self, tmp_path, mutate, field):
        obj = json.loads(json.dumps(self.GOOD))
        mutate(obj)
        p = write(tmp_path, "p.json", json.dumps(obj))
        with pytest.raises(SchemaViolation) as exc:
            load_policy(p)
        assert exc.value.field == field

    def test_policy_json_syntax_error(self, tmp_path):
        p = write(tmp_path, "p.json", "{not json")
        with pytest.raises(MalformedLine):
            load_policy(p)


class TestSynthConfigFile:
    GOOD = {
        "n_questions": 20,
        "seed": 7,
        "calibration": 0.8,
        "stages": [
            {"name": "cb", "passages": 0, "capability": 0.45},
            {"name": "ob10", "passages": 10, "capability": 0.75},
        ],
    }

    def test_load(self, tmp_path):
        p = write(tmp_path, "s.json", json.dumps(self.GOOD))
        cfg = load_synth_config(p)
        assert cfg.n_questions == 20
        assert cfg.seed == 7
        assert cfg.stages[1].capability == 0.75
        assert cfg.answer_token_count == 4  # default

    def test_errors(self, tmp_path):
        obj = dict(self.GOOD)
        del obj["n_questions"]
        p = write(tmp_path, "s.json", json.dumps(obj))
        with pytest.raises(SchemaViolation):
            load_synth_config(p)
        obj = dict(self.GOOD, calibration=3.0)
        p = write(tmp_path, "s2.json", json.dumps(obj))
        with pytest.raises(SchemaViolation):
            load_synth_config(p)


class TestQuestionsFile:
    def test_load(self, tmp_path):
        lines = [
            '{"qid":"q1","question":"who?","passages":["a","b"],"gold":["x"]}',
            '{"qid":"q2","question":"when?"}',
        ]
        p = write(tmp_path, "q.jsonl", "\n".join(lines) + "\n")
        qs = load_questions(p)
        assert qs[0].passages == ("a", "b")
        assert qs[0].gold == ("x",)
        assert qs[1].passages == ()
        assert qs[1].gold is None

    def test_duplicate_qid(self, tmp_path):
        line = '{"qid":"q1","question":"who?"}'
        p = write(tmp_path, "q.jsonl", line + "\n" + line + "\n")
        with pytest.raises(DuplicateRecord):
            load_questions(p)


class TestCurveCsv:
    def curve(self):
        return AccuracyCostCurve(
            [
                CurvePoint(6.15e9, 1 / 3, (0.0,)),
                CurvePoint(2.0261500000000004e12, 2 / 3, (0.9000000000000001,)),
                CurvePoint(1.5e10, 0.5),
            ]
        )

    def test_csv_shape(self):
        text = curve_to_csv(self.curve())
        lines = text.strip().split("\n")
        assert lines[0] == "cost_flops,accuracy,thresholds"
        assert lines[1] == "6150000000.0,0.333333,0.0"
        assert lines[2] == "15000000000.0,0.500000,"
        assert lines[3] == "2026150000000.0005,0.666667,0.9000000000000001"

    def test_round_trip(self, tmp_path):
        p = tmp_path / "c.csv"
        write_curve_csv(self.curve(), p)
        back = read_curve_csv(p)
        for orig, rt in zip(self.curve().points, back.points):
            assert rt.cost == orig.cost  # repr round-trips floats exactly
            assert rt.accuracy == pytest.approx(orig.accuracy, abs=5e-7)
            assert rt.thresholds == orig.thresholds

    def test_write_to_stream(self):
        import io

        buf = io.StringIO()
        write_curve_csv(self.curve(), buf)
        assert buf.getvalue() == curve_to_csv(self.curve())

    def test_header_required(self, tmp_path):
        p = write(tmp_path, "c.csv", "cost,acc\n1,0.5,\n")
        with pytest.raises(MalformedLine):
            read_curve_csv(p)

    def test_bad_row(self, tmp_path):
        p = write(tmp_path, "c.csv", "cost_flops,accuracy,thresholds\n1.0,high,\n")
        with pytest.raises(MalformedLine) as exc:
            read_curve_csv(p)
        assert exc.value.lineno == 2

    def test_empty_and_headerless(self, tmp_path):
        with pytest.raises(MalformedLine):
            read_curve_csv(write(tmp_path, "e.csv", ""))
        with pytest.raises(MalformedLine):
            read_curve_csv(write(tmp_path, "h.csv", "cost_flops,accuracy,thresholds\n"))
