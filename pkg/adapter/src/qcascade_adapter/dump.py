"""Batch inference: answer every question at every stage and write log files."""

import json
from dataclasses import dataclass
from pathlib import Path

from .config import stage_name
from .errors import AdapterError
from .reader import GreedyReader


@dataclass(frozen=True)
class QuestionItem:
    qid: str
    question: str
    passages: tuple[str, ...] = ()
    gold: tuple[str, ...] | None = None


def load_questions(path) -> list[QuestionItem]:
    """Read a questions JSONL file: qid, question, optional passages/gold."""
    path = Path(path)
    items: list[QuestionItem] = []
    seen: set[str] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        where = f"{path}:{lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"{where}: not valid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise AdapterError(f"{where}: each line must be a JSON object")
        qid = obj.get("qid")
        question = obj.get("question")
        if not isinstance(qid, str) or not qid:
            raise AdapterError(f"{where}: 'qid' must be a non-empty string")
        if not isinstance(question, str) or not question:
            raise AdapterError(f"{where}: 'question' must be a non-empty string")
        if qid in seen:
            raise AdapterError(f"{where}: duplicate qid {qid!r}")
        seen.add(qid)
        passages = obj.get("passages", [])
        gold = obj.get("gold")
        if not isinstance(passages, list) or not all(isinstance(p, str) for p in passages):
            raise AdapterError(f"{where}: 'passages' must be an array of strings")
        if gold is not None and (
            not isinstance(gold, list) or not gold or not all(isinstance(g, str) for g in gold)
        ):
            raise AdapterError(f"{where}: 'gold' must be a non-empty array of strings")
        items.append(
            QuestionItem(qid, question, tuple(passages), tuple(gold) if gold else None)
        )
    return sorted(items, key=lambda q: q.qid)


def record_line(item: QuestionItem, stage: str, n_passages: int, prediction: str, probs) -> str:
    obj = {
        "qid": item.qid,
        "stage": stage,
        "question": item.question,
        "prediction": prediction,
        "token_probs": list(probs),
        "n_passages": n_passages,
    }
    if item.gold is not None:
        obj["gold"] = list(item.gold)
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def dump_logs(reader: GreedyReader, questions, out_dir) -> dict[str, Path]:
    """Write one JSONL log per configured stage; returns stage -> file path.

    Greedy decoding makes the output a pure function of (model, questions,
    config): rerunning produces byte-identical files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    questions = list(questions)
    deepest = reader.config.stages[-1]
    for q in questions:
        if len(q.passages) < deepest:
            raise AdapterError(
                f"question {q.qid!r} has {len(q.passages)} passages; "
                f"the deepest stage needs {deepest}"
            )
    written: dict[str, Path] = {}
    for budget in reader.config.stages:
        stage = stage_name(budget)
        lines = []
        for q in sorted(questions, key=lambda item: item.qid):
            prediction, probs = reader.answer(q.question, q.passages[:budget])
            lines.append(record_line(q, stage, budget, prediction, probs))
        path = out_dir / f"{stage}.jsonl"
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        written[stage] = path
    return written
