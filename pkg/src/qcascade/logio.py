"""File formats: JSONL prediction logs, JSON configs, curve CSV.

Every parse error carries the offending file and line number. Input must be
UTF-8; anything else is rejected, not coerced.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence, Union

from .cascade import CascadeOutcome, CascadePolicy, Question, StageSpec
from .costs import CostModel, CostMode, StageKind
from .curves import AccuracyCostCurve, CurvePoint
from .errors import (
    DuplicateRecord,
    InvalidInput,
    MalformedLine,
    SchemaViolation,
)
from .prediction import ConfidenceMethod, PredictionRecord, TokenProbs
from .synth import SynthConfig, SynthStage

__all__ = [
    "read_records",
    "parse_logs",
    "record_to_json",
    "write_records",
    "load_policy",
    "load_synth_config",
    "load_questions",
    "write_curve_csv",
    "curve_to_csv",
    "read_curve_csv",
    "outcome_to_json",
    "write_outcomes",
]

PathLike = Union[str, Path]

_RECORD_REQUIRED = ("qid", "stage", "question", "prediction", "token_probs", "n_passages")
_RECORD_OPTIONAL = ("gold",)

CURVE_CSV_HEADER = "cost_flops,accuracy,thresholds"


def _decoded_lines(path: PathLike):
    """Yield (lineno, text) per line, decoding UTF-8 strictly per line."""
    raw = Path(path).read_bytes()
    for lineno, chunk in enumerate(raw.splitlines(), start=1):
        try:
            yield lineno, chunk.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedLine(str(path), lineno, f"not valid UTF-8: {exc}") from None


def _json_object(path: PathLike, lineno: int, text: str) -> dict:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedLine(str(path), lineno, f"invalid JSON: {exc}") from None
    if not isinstance(value, dict):
        raise MalformedLine(str(path), lineno, "line is not a JSON object")
    return value


def _require_str(obj: dict, field: str, path: PathLike, lineno: int, *, allow_empty: bool = True) -> str:
    value = obj[field]
    if not isinstance(value, str):
        raise SchemaViolation(field, "must be a string", str(path), lineno)
    if not allow_empty and not value:
        raise SchemaViolation(field, "must be non-empty", str(path), lineno)
    return value


def _record_from_obj(obj: dict, path: PathLike, lineno: int) -> PredictionRecord:
    for field in _RECORD_REQUIRED:
        if field not in obj:
            raise SchemaViolation(field, "is required", str(path), lineno)
    for field in obj:
        if field not in _RECORD_REQUIRED and field not in _RECORD_OPTIONAL:
            raise SchemaViolation(field, "is not a known record field", str(path), lineno)
    qid = _require_str(obj, "qid", path, lineno, allow_empty=False)
    stage = _require_str(obj, "stage", path, lineno, allow_empty=False)
    question = _require_str(obj, "question", path, lineno)
    prediction = _require_str(obj, "prediction", path, lineno)
    raw_probs = obj["token_probs"]
    if not isinstance(raw_probs, list) or not raw_probs:
        raise SchemaViolation(
            "token_probs", "must be a non-empty array", str(path), lineno
        )
    for v in raw_probs:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaViolation(
                "token_probs", f"must hold numbers, got {v!r}", str(path), lineno
            )
        if not 0.0 < float(v) <= 1.0:
            raise SchemaViolation(
                "token_probs", f"value {v!r} outside (0, 1]", str(path), lineno
            )
    n_passages = obj["n_passages"]
    if isinstance(n_passages, bool) or not isinstance(n_passages, int):
        raise SchemaViolation("n_passages", "must be an integer", str(path), lineno)
    if n_passages < 0:
        raise SchemaViolation("n_passages", "must be >= 0", str(path), lineno)
    gold = obj.get("gold")
    if gold is not None:
        if not isinstance(gold, list) or not gold:
            raise SchemaViolation(
                "gold", "must be a non-empty array when present", str(path), lineno
            )
        if not all(isinstance(g, str) for g in gold):
            raise SchemaViolation("gold", "must hold strings", str(path), lineno)
        gold = tuple(gold)
    return PredictionRecord(
        qid=qid,
        stage_id=stage,
        question=question,
        prediction=prediction,
        token_probs=TokenProbs(tuple(float(v) for v in raw_probs)),
        n_passages=n_passages,
        gold=gold,
    )


def read_records(path: PathLike) -> list[PredictionRecord]:
    """Parse one JSONL prediction log. Blank lines are rejected, not skipped."""
    records = []
    for lineno, text in _decoded_lines(path):
        if not text.strip():
            raise MalformedLine(str(path), lineno, "blank line")
        records.append(_record_from_obj(_json_object(path, lineno, text), path, lineno))
    return records


def parse_logs(paths: Iterable[PathLike]) -> dict[str, dict[str, PredictionRecord]]:
    """Parse prediction logs into a stage -> qid -> record table.

    A (qid, stage) pair may appear only once across all files; duplicates
    raise :class:`DuplicateRecord` with the position of the second copy.
    """
    table: dict[str, dict[str, PredictionRecord]] = {}
    for path in paths:
        for lineno, text in _decoded_lines(path):
            if not text.strip():
                raise MalformedLine(str(path), lineno, "blank line")
            rec = _record_from_obj(_json_object(path, lineno, text), path, lineno)
            per_stage = table.setdefault(rec.stage_id, {})
            if rec.qid in per_stage:
                raise DuplicateRecord(rec.qid, rec.stage_id, str(path), lineno)
            per_stage[rec.qid] = rec
    return table


def record_to_json(record: PredictionRecord) -> str:
    """One record as a canonical JSON line (fixed key order, no padding)."""
    obj = {
        "qid": record.qid,
        "stage": record.stage_id,
        "question": record.question,
        "prediction": record.prediction,
        "token_probs": list(record.token_probs.values),
        "n_passages": record.n_passages,
    }
    if record.gold is not None:
        obj["gold"] = list(record.gold)
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_records(records: Iterable[PredictionRecord], path: PathLike) -> None:
    """Write records as JSONL, one canonical line each."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(record_to_json(rec))
            fh.write("\n")


def _config_object(path: PathLike) -> dict:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedLine(str(path), 1, f"not valid UTF-8: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedLine(str(path), exc.lineno, f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedLine(str(path), 1, "config must be a JSON object")
    return obj


def load_policy(path: PathLike) -> CascadePolicy:
    """Load a cascade policy from JSON.

    Expected shape::

        {
          "method": "ppa" | "pf" | "pfl" | "pa",
          "cost": {"c_cb": ..., "c_ob_per_passage": ..., "mode": "upper_bound" | "encoder_reuse"},
          "stages": [
            {"name": "cb", "kind": "cb", "passages": 0, "threshold": 0.5},
            {"name": "ob100", "kind": "ob", "passages": 100}
          ]
        }

    The final stage carries no threshold. Structural rules are checked by
    the cascade engine when the policy is used; this parses and type-checks.
    """
    obj = _config_object(path)
    p = str(path)
    try:
        method = ConfidenceMethod(obj.get("method"))
    except ValueError:
        raise SchemaViolation(
            "method",
            f"must be one of {[m.value for m in ConfidenceMethod]}, got {obj.get('method')!r}",
            p,
        ) from None
    cost_obj = obj.get("cost")
    if not isinstance(cost_obj, dict):
        raise SchemaViolation("cost", "must be an object", p)
    for field in ("c_cb", "c_ob_per_passage"):
        v = cost_obj.get(field)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaViolation(f"cost.{field}", "must be a number", p)
    try:
        mode = CostMode(cost_obj.get("mode", "upper_bound"))
    except ValueError:
        raise SchemaViolation(
            "cost.mode",
            f"must be one of {[m.value for m in CostMode]}, got {cost_obj.get('mode')!r}",
            p,
        ) from None
    try:
        cost = CostModel(float(cost_obj["c_cb"]), float(cost_obj["c_ob_per_passage"]), mode)
    except InvalidInput as exc:
        raise SchemaViolation("cost", str(exc), p) from None
    stages_obj = obj.get("stages")
    if not isinstance(stages_obj, list) or not stages_obj:
        raise SchemaViolation("stages", "must be a non-empty array", p)
    stages = []
    for i, s in enumerate(stages_obj):
        if not isinstance(s, dict):
            raise SchemaViolation(f"stages[{i}]", "must be an object", p)
        name = s.get("name")
        if not isinstance(name, str) or not name:
            raise SchemaViolation(f"stages[{i}].name", "must be a non-empty string", p)
        try:
            kind = StageKind(s.get("kind"))
        except ValueError:
            raise SchemaViolation(
                f"stages[{i}].kind", f"must be 'cb' or 'ob', got {s.get('kind')!r}", p
            ) from None
        passages = s.get("passages", 0)
        if isinstance(passages, bool) or not isinstance(passages, int):
            raise SchemaViolation(f"stages[{i}].passages", "must be an integer", p)
        threshold = s.get("threshold")
        if threshold is not None and (
            isinstance(threshold, bool) or not isinstance(threshold, (int, float))
        ):
            raise SchemaViolation(f"stages[{i}].threshold", "must be a number", p)
        extra = set(s) - {"name", "kind", "passages", "threshold"}
        if extra:
            raise SchemaViolation(
                f"stages[{i}].{sorted(extra)[0]}", "is not a known stage field", p
            )
        stages.append(
            StageSpec(
                name=name,
                kind=kind,
                passages=passages,
                threshold=None if threshold is None else float(threshold),
            )
        )
    extra = set(obj) - {"method", "cost", "stages"}
    if extra:
        raise SchemaViolation(sorted(extra)[0], "is not a known policy field", p)
    return CascadePolicy(stages=tuple(stages), method=method, cost=cost)


def load_synth_config(path: PathLike) -> SynthConfig:
    """Load a synthetic-benchmark config from JSON."""
    obj = _config_object(path)
    p = str(path)
    stages_obj = obj.get("stages")
    if not isinstance(stages_obj, list) or not stages_obj:
        raise SchemaViolation("stages", "must be a non-empty array", p)
    stages = []
    for i, s in enumerate(stages_obj):
        if not isinstance(s, dict):
            raise SchemaViolation(f"stages[{i}]", "must be an object", p)
        name = s.get("name")
        if not isinstance(name, str) or not name:
            raise SchemaViolation(f"stages[{i}].name", "must be a non-empty string", p)
        passages = s.get("passages", 0)
        if isinstance(passages, bool) or not isinstance(passages, int):
            raise SchemaViolation(f"stages[{i}].passages", "must be an integer", p)
        capability = s.get("capability")
        if isinstance(capability, bool) or not isinstance(capability, (int, float)):
            raise SchemaViolation(f"stages[{i}].capability", "must be a number", p)
        stages.append(SynthStage(name=name, passages=passages, capability=float(capability)))
    kwargs = {}
    for field, caster in (
        ("n_questions", int),
        ("difficulty_sharpness", float),
        ("calibration", float),
        ("answer_token_count", int),
        ("seed", int),
    ):
        if field in obj:
            v = obj[field]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SchemaViolation(field, "must be a number", p)
            kwargs[field] = caster(v)
    if "n_questions" not in kwargs:
        raise SchemaViolation("n_questions", "is required", p)
    extra = set(obj) - {
        "stages",
        "n_questions",
        "difficulty_sharpness",
        "calibration",
        "answer_token_count",
        "seed",
    }
    if extra:
        raise SchemaViolation(sorted(extra)[0], "is not a known config field", p)
    try:
        return SynthConfig(stages=tuple(stages), **kwargs)
    except InvalidInput as exc:
        raise SchemaViolation("stages", str(exc), p) from None


def load_questions(path: PathLike) -> list[Question]:
    """Parse a JSONL question file for live runs.

    Each line: ``{"qid": ..., "question": ..., "passages": [...], "gold": [...]?}``.
    """
    questions = []
    seen = set()
    for lineno, text in _decoded_lines(path):
        if not text.strip():
            raise MalformedLine(str(path), lineno, "blank line")
        obj = _json_object(path, lineno, text)
        for field in ("qid", "question"):
            if field not in obj:
                raise SchemaViolation(field, "is required", str(path), lineno)
        qid = _require_str(obj, "qid", path, lineno, allow_empty=False)
        question = _require_str(obj, "question", path, lineno)
        passages = obj.get("passages", [])
        if not isinstance(passages, list) or not all(isinstance(x, str) for x in passages):
            raise SchemaViolation("passages", "must be an array of strings", str(path), lineno)
        gold = obj.get("gold")
        if gold is not None:
            if not isinstance(gold, list) or not gold or not all(isinstance(g, str) for g in gold):
                raise SchemaViolation(
                    "gold", "must be a non-empty array of strings when present", str(path), lineno
                )
            gold = tuple(gold)
        extra = set(obj) - {"qid", "question", "passages", "gold"}
        if extra:
            raise SchemaViolation(sorted(extra)[0], "is not a known question field", str(path), lineno)
        if qid in seen:
            raise DuplicateRecord(qid, "<questions>", str(path), lineno)
        seen.add(qid)
        questions.append(Question(qid=qid, question=question, passages=tuple(passages), gold=gold))
    return questions


def curve_to_csv(curve: AccuracyCostCurve) -> str:
    """Render a curve as CSV text.

    Costs round-trip exactly (shortest ``repr``); accuracy is written as a
    6-decimal fraction; thresholds are semicolon-joined in stage order.
    """
    lines = [CURVE_CSV_HEADER]
    for p in curve.points:
        taus = ";".join(repr(t) for t in p.thresholds)
        lines.append(f"{p.cost!r},{p.accuracy:.6f},{taus}")
    return "\n".join(lines) + "\n"


def write_curve_csv(curve: AccuracyCostCurve, out: Union[PathLike, IO[str]]) -> None:
    """Write a curve as CSV to a path or text stream."""
    text = curve_to_csv(curve)
    if hasattr(out, "write"):
        out.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def read_curve_csv(path: PathLike) -> AccuracyCostCurve:
    """Parse a curve CSV written by :func:`write_curve_csv`."""
    points = []
    lines = list(_decoded_lines(path))
    if not lines:
        raise MalformedLine(str(path), 1, "empty curve file")
    (first_no, header), *rest = lines
    if header.strip() != CURVE_CSV_HEADER:
        raise MalformedLine(
            str(path), first_no, f"expected header {CURVE_CSV_HEADER!r}, got {header.strip()!r}"
        )
    for lineno, text in rest:
        if not text.strip():
            raise MalformedLine(str(path), lineno, "blank line")
        parts = text.split(",", 2)
        if len(parts) != 3:
            raise MalformedLine(str(path), lineno, "expected 3 comma-separated fields")
        try:
            cost = float(parts[0])
            acc = float(parts[1])
            taus = tuple(float(t) for t in parts[2].split(";")) if parts[2].strip() else ()
        except ValueError as exc:
            raise MalformedLine(str(path), lineno, f"bad number: {exc}") from None
        if math.isnan(cost) or math.isnan(acc):
            raise MalformedLine(str(path), lineno, "NaN is not a valid curve value")
        points.append(CurvePoint(cost, acc, taus))
    if not points:
        raise MalformedLine(str(path), first_no, "curve file has a header but no points")
    return AccuracyCostCurve(points)


def outcome_to_json(outcome: CascadeOutcome) -> str:
    """One cascade outcome as a canonical JSON line."""
    obj = {
        "qid": outcome.qid,
        "exit_stage": outcome.exit_stage,
        "stage": outcome.stage_name,
        "prediction": outcome.prediction,
        "confidence": outcome.confidence_at_exit,
        "cost_flops": outcome.cost,
        "correct": outcome.correct,
        "used": list(outcome.path.used),
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_outcomes(outcomes: Iterable[CascadeOutcome], path: PathLike) -> None:
    """Write cascade outcomes as JSONL, one canonical line each."""
    with open(path, "w", encoding="utf-8") as fh:
        for o in outcomes:
            fh.write(outcome_to_json(o))
            fh.write("\n")
