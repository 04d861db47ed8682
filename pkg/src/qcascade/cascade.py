"""Cascade policies and the escalation engine.

A policy is a closed-book stage followed by zero or more open-book stages
with strictly growing passage counts. Every non-final stage carries an
escalation threshold tau: a question escalates past that stage iff its
confidence is strictly below tau (ties stay at the cheaper stage). The final
stage answers unconditionally.

The engine runs either over pre-recorded per-stage prediction logs
(:func:`run_offline`) or against live HTTP reader backends (:func:`run_live`).
Both visit stages lazily: a stage's record or backend is only touched if some
question actually escalates that far.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence, Union

import requests

from .costs import CostModel, EscalationPath, StageKind, instance_cost
from .errors import (
    BackendUnreachable,
    BadStagePassages,
    DuplicateRecord,
    DuplicateStageName,
    InvalidInput,
    MalformedBackendResponse,
    MisplacedClosedBook,
    MissingStageRecord,
    MissingThreshold,
    NonIncreasingPassages,
    PolicyError,
    ThresholdOnFinalStage,
    ThresholdOutOfRange,
)
from .prediction import (
    ConfidenceMethod,
    PredictionRecord,
    TokenProbs,
    confidence,
    exact_match,
)

__all__ = [
    "StageSpec",
    "CascadePolicy",
    "CascadeOutcome",
    "Question",
    "LiveFailure",
    "LiveRunResult",
    "validate_policy",
    "decide_exit",
    "group_records",
    "run_offline",
    "run_live",
    "PREDICT_ROUTE",
]

log = logging.getLogger("qcascade")

# Route every live reader backend must serve.
PREDICT_ROUTE = "/v1/predict"

StageTable = Mapping[str, Mapping[str, PredictionRecord]]
Logs = Union[StageTable, Iterable[PredictionRecord]]


@dataclass(frozen=True)
class StageSpec:
    """One stage of a cascade: a name, its kind, and its escalation threshold.

    ``threshold`` is required on every stage except the last and must be
    omitted there; ``passages`` must be 0 for closed-book stages and >= 1
    for open-book ones (checked by :func:`validate_policy`).
    """

    name: str
    kind: StageKind
    passages: int = 0
    threshold: float | None = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "kind", StageKind(self.kind))
        except ValueError as exc:
            raise InvalidInput(f"unknown stage kind {self.kind!r}") from exc


@dataclass(frozen=True)
class CascadePolicy:
    """A full cascade: ordered stages, a confidence method, and a cost model."""

    stages: tuple[StageSpec, ...]
    method: ConfidenceMethod
    cost: CostModel

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        try:
            object.__setattr__(self, "method", ConfidenceMethod(self.method))
        except ValueError as exc:
            raise InvalidInput(f"unknown confidence method {self.method!r}") from exc

    @property
    def k(self) -> int:
        """Number of open-book iterations (stages beyond the closed-book one)."""
        return len(self.stages) - 1

    @property
    def ob_passages(self) -> tuple[int, ...]:
        """Passage counts of the open-book stages, in cascade order."""
        return tuple(s.passages for s in self.stages[1:])

    def thresholds(self) -> tuple[float, ...]:
        """Escalation thresholds of the non-final stages, in cascade order."""
        return tuple(s.threshold for s in self.stages[:-1])

    def with_thresholds(self, taus: Sequence[float]) -> "CascadePolicy":
        """Copy of this policy with the non-final thresholds replaced."""
        if len(taus) != len(self.stages) - 1:
            raise InvalidInput(
                f"need {len(self.stages) - 1} thresholds, got {len(taus)}"
            )
        stages = [replace(s, threshold=float(t)) for s, t in zip(self.stages, taus)]
        stages.append(self.stages[-1])
        return replace(self, stages=tuple(stages))


@dataclass(frozen=True)
class CascadeOutcome:
    """What happened to one question: where it exited, at what cost.

    ``correct`` is None when the exit record had no gold answers to score
    against. ``confidence_at_exit`` is the exit stage's own confidence, also
    for the final stage where it was never compared to a threshold.
    """

    qid: str
    exit_stage: int
    stage_name: str
    prediction: str
    confidence_at_exit: float
    path: EscalationPath
    cost: float
    correct: bool | None = None


@dataclass(frozen=True)
class Question:
    """A live-mode input: the question text plus its retrieved passages.

    ``passages`` must hold at least as many entries as the deepest open-book
    stage consumes; stage k reads the first S_k of them.
    """

    qid: str
    question: str
    passages: tuple[str, ...] = ()
    gold: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.qid:
            raise InvalidInput("qid must be non-empty")
        object.__setattr__(self, "passages", tuple(self.passages))
        if self.gold is not None:
            gold = tuple(self.gold)
            if not gold:
                raise InvalidInput("gold must be non-empty when present")
            object.__setattr__(self, "gold", gold)


@dataclass(frozen=True)
class LiveFailure:
    """A question a live run had to abandon, and why."""

    qid: str
    stage_name: str
    reason: str


@dataclass(frozen=True)
class LiveRunResult:
    """Outcomes of the questions that completed, plus per-question failures."""

    outcomes: tuple[CascadeOutcome, ...]
    failures: tuple[LiveFailure, ...] = ()


def validate_policy(policy: CascadePolicy) -> None:
    """Check every structural invariant of a policy; raise on the first violation.

    Raises a :class:`~qcascade.errors.PolicyError` subclass naming the
    violated rule.
    """
    stages = policy.stages
    if not stages:
        raise PolicyError("a policy needs at least one stage")
    if stages[0].kind is not StageKind.CB:
        raise MisplacedClosedBook("stage 0 must be the closed-book stage")
    for s in stages[1:]:
        if s.kind is StageKind.CB:
            raise MisplacedClosedBook(
                f"stage {s.name!r}: only stage 0 may be closed-book"
            )
    names = [s.name for s in stages]
    seen: set[str] = set()
    for name in names:
        if not name:
            raise PolicyError("stage names must be non-empty")
        if name in seen:
            raise DuplicateStageName(f"stage name {name!r} appears more than once")
        seen.add(name)
    if stages[0].passages != 0:
        raise BadStagePassages("the closed-book stage reads no passages")
    prev = 0
    for s in stages[1:]:
        if s.passages < 1:
            raise BadStagePassages(
                f"stage {s.name!r}: open-book stages need at least one passage"
            )
        if s.passages <= prev:
            raise NonIncreasingPassages(
                f"stage {s.name!r}: passage counts must be strictly increasing"
            )
        prev = s.passages
    for s in stages[:-1]:
        if s.threshold is None:
            raise MissingThreshold(f"stage {s.name!r} needs an escalation threshold")
        if not 0.0 <= s.threshold <= 1.0:
            raise ThresholdOutOfRange(
                f"stage {s.name!r}: threshold {s.threshold!r} outside [0, 1]"
            )
    if stages[-1].threshold is not None:
        raise ThresholdOnFinalStage(
            f"final stage {stages[-1].name!r} must not carry a threshold"
        )


def decide_exit(
    confidences: Union[Sequence[float], Callable[[int], float]],
    thresholds: Sequence[float],
) -> int:
    """Index of the stage a question exits at.

    Walks stages in order; the question stays at stage i iff its confidence
    there is >= thresholds[i] (strictly lower confidence escalates). With all
    thresholds exhausted the final stage, index ``len(thresholds)``, answers.

    Args:
        confidences: per-stage confidence values, or a callable mapping a
            stage index to its confidence (evaluated lazily, in order).
        thresholds: thresholds of the non-final stages.
    """
    conf_at = confidences if callable(confidences) else confidences.__getitem__
    for i, tau in enumerate(thresholds):
        if conf_at(i) >= tau:
            return i
    return len(thresholds)


def group_records(records: Iterable[PredictionRecord]) -> dict[str, dict[str, PredictionRecord]]:
    """Group a flat record stream into a stage -> qid -> record table."""
    table: dict[str, dict[str, PredictionRecord]] = {}
    for rec in records:
        per_stage = table.setdefault(rec.stage_id, {})
        if rec.qid in per_stage:
            raise DuplicateRecord(rec.qid, rec.stage_id)
        per_stage[rec.qid] = rec
    return table


def _as_stage_table(logs: Logs) -> StageTable:
    if isinstance(logs, Mapping):
        return logs
    return group_records(logs)


def run_offline(logs: Logs, policy: CascadePolicy) -> list[CascadeOutcome]:
    """Replay a cascade over pre-recorded per-stage prediction logs.

    The question set is exactly the qids of the entry stage's log; deeper
    stage logs are consulted only for the questions that escalate there
    (a missing record raises :class:`MissingStageRecord` only then).
    Outcomes come back sorted by qid.

    Args:
        logs: either a stage -> qid -> record mapping, or a flat iterable of
            records (grouped by their ``stage_id``).
        policy: the cascade to replay; validated first.
    """
    validate_policy(policy)
    table = _as_stage_table(logs)
    entry = policy.stages[0].name
    if entry not in table:
        if not any(table.values()):
            return []
        raise InvalidInput(
            f"logs contain no records for entry stage {entry!r} "
            f"(stages present: {sorted(table)})"
        )
    thresholds = policy.thresholds()
    outcomes: list[CascadeOutcome] = []
    for qid in sorted(table[entry]):
        fetched: dict[int, tuple[PredictionRecord, float]] = {}

        def conf_at(i: int, qid: str = qid, fetched: dict = fetched) -> float:
            stage = policy.stages[i]
            try:
                rec = table[stage.name][qid]
            except KeyError:
                raise MissingStageRecord(qid, stage.name) from None
            score = confidence(policy.method, rec.token_probs)
            fetched[i] = (rec, score)
            return score

        exit_stage = decide_exit(conf_at, thresholds)
        if exit_stage not in fetched:
            conf_at(exit_stage)
        record, score = fetched[exit_stage]
        outcomes.append(_finish(policy, qid, exit_stage, record.prediction, score, record.gold))
    return outcomes


def _finish(
    policy: CascadePolicy,
    qid: str,
    exit_stage: int,
    prediction: str,
    score: float,
    gold: tuple[str, ...] | None,
) -> CascadeOutcome:
    used = tuple(1 if k <= exit_stage else 0 for k in range(1, len(policy.stages)))
    path = EscalationPath(used, policy.ob_passages)
    return CascadeOutcome(
        qid=qid,
        exit_stage=exit_stage,
        stage_name=policy.stages[exit_stage].name,
        prediction=prediction,
        confidence_at_exit=score,
        path=path,
        cost=instance_cost(policy.cost, path),
        correct=exact_match(prediction, gold) if gold else None,
    )


def _query_backend(
    url: str, question: str, passages: Sequence[str], max_new_tokens: int, timeout: float
) -> tuple[str, TokenProbs]:
    """POST one prediction request; enforce the wire contract on the reply."""
    endpoint = url.rstrip("/") + PREDICT_ROUTE
    payload = {
        "question": question,
        "passages": list(passages),
        "max_new_tokens": max_new_tokens,
    }
    try:
        resp = requests.post(endpoint, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise BackendUnreachable(f"{endpoint}: {exc}") from exc
    if resp.status_code != 200:
        raise MalformedBackendResponse(
            f"{endpoint}: expected status 200, got {resp.status_code}"
        )
    try:
        body = resp.json()
    except ValueError as exc:
        raise MalformedBackendResponse(f"{endpoint}: response is not JSON") from exc
    if not isinstance(body, dict):
        raise MalformedBackendResponse(f"{endpoint}: response is not a JSON object")
    prediction = body.get("prediction")
    raw_probs = body.get("token_probs")
    if not isinstance(prediction, str):
        raise MalformedBackendResponse(f"{endpoint}: 'prediction' must be a string")
    if not isinstance(raw_probs, list):
        raise MalformedBackendResponse(f"{endpoint}: 'token_probs' must be an array")
    if any(isinstance(p, bool) or not isinstance(p, (int, float)) for p in raw_probs):
        raise MalformedBackendResponse(f"{endpoint}: 'token_probs' must hold numbers")
    try:
        probs = TokenProbs(tuple(float(p) for p in raw_probs))
    except InvalidInput as exc:
        raise MalformedBackendResponse(f"{endpoint}: {exc}") from exc
    return prediction, probs


def run_live(
    backends: Mapping[str, str],
    policy: CascadePolicy,
    questions: Iterable[Question],
    *,
    max_new_tokens: int = 32,
    timeout: float = 60.0,
) -> LiveRunResult:
    """Run the cascade against live HTTP reader backends.

    Each stage name maps to a backend base URL serving ``POST /v1/predict``.
    Stages are queried lazily per question, so a backend that no question
    reaches is never contacted. A backend failure aborts only the question
    it happened on; that question lands in ``failures`` instead of
    ``outcomes``. Outcomes come back sorted by qid.

    Args:
        backends: stage name -> base URL; every policy stage must be mapped.
        policy: the cascade to run; validated first.
        questions: the inputs; each must carry enough passages for the
            deepest open-book stage.
        max_new_tokens: generation budget forwarded to every backend call.
        timeout: per-request timeout in seconds.
    """
    validate_policy(policy)
    if max_new_tokens < 1:
        raise InvalidInput("max_new_tokens must be >= 1")
    missing = [s.name for s in policy.stages if s.name not in backends]
    if missing:
        raise InvalidInput(f"no backend mapped for stages: {missing}")
    items = sorted(questions, key=lambda q: q.qid)
    seen: set[str] = set()
    for q in items:
        if q.qid in seen:
            raise InvalidInput(f"duplicate question qid {q.qid!r}")
        seen.add(q.qid)
    deepest = policy.stages[-1].passages
    thresholds = policy.thresholds()
    outcomes: list[CascadeOutcome] = []
    failures: list[LiveFailure] = []
    for q in items:
        if len(q.passages) < deepest:
            raise InvalidInput(
                f"question {q.qid!r} has {len(q.passages)} passages; "
                f"the deepest stage needs {deepest}"
            )
        fetched: dict[int, tuple[str, float]] = {}
        current = {"stage": policy.stages[0].name}

        def conf_at(i: int, q: Question = q, fetched: dict = fetched, current: dict = current) -> float:
            stage = policy.stages[i]
            current["stage"] = stage.name
            passages = q.passages[: stage.passages] if stage.kind is StageKind.OB else ()
            prediction, probs = _query_backend(
                backends[stage.name], q.question, passages, max_new_tokens, timeout
            )
            score = confidence(policy.method, probs)
            fetched[i] = (prediction, score)
            return score

        try:
            exit_stage = decide_exit(conf_at, thresholds)
            if exit_stage not in fetched:
                conf_at(exit_stage)
        except (BackendUnreachable, MalformedBackendResponse) as exc:
            log.info("abandoning question %s at stage %s: %s", q.qid, current["stage"], exc)
            failures.append(LiveFailure(q.qid, current["stage"], str(exc)))
            continue
        prediction, score = fetched[exit_stage]
        outcomes.append(_finish(policy, q.qid, exit_stage, prediction, score, q.gold))
    return LiveRunResult(tuple(outcomes), tuple(failures))
