"""Synthetic benchmark generator and confidence-calibration report.

Generates per-stage prediction logs with controllable difficulty: each
question draws a latent difficulty, each stage has a capability level, and a
stage answers correctly with probability given by a logistic curve in
(capability - difficulty). Confidence scores are Beta-distributed so that
correct answers skew confident and wrong ones skew unconfident, with a
calibration knob controlling how separable the two are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InvalidInput
from .prediction import ConfidenceMethod, PredictionRecord, TokenProbs, confidence, exact_match

__all__ = [
    "SynthStage",
    "SynthConfig",
    "generate",
    "StageCalibration",
    "CalibrationReport",
    "calibration_report",
]


@dataclass(frozen=True)
class SynthStage:
    """One simulated reader stage: its log name, passage count, and skill."""

    name: str
    passages: int
    capability: float


@dataclass(frozen=True)
class SynthConfig:
    """Knobs of the synthetic benchmark.

    Args:
        n_questions: number of questions (0 produces empty logs).
        stages: simulated stages, cheapest first; capabilities must be
            non-decreasing and passage counts strictly increasing after the
            closed-book stage (passages=0) if one is included.
        difficulty_sharpness: steepness of the logistic accuracy curve.
        calibration: in [0, 1]; 0 makes confidence independent of
            correctness, 1 makes the two score distributions well separated.
        answer_token_count: tokens per synthetic answer; the per-token
            probability is chosen so the product of token probabilities
            recovers the drawn confidence score.
        seed: base seed; every question gets an independent substream, so
            output is byte-identical per config.
    """

    n_questions: int
    stages: tuple[SynthStage, ...]
    difficulty_sharpness: float = 6.0
    calibration: float = 0.8
    answer_token_count: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.n_questions < 0:
            raise InvalidInput("n_questions must be >= 0")
        if not self.stages:
            raise InvalidInput("at least one stage is required")
        names = [s.name for s in self.stages]
        if len(set(names)) != len(names):
            raise InvalidInput("stage names must be unique")
        caps = [s.capability for s in self.stages]
        if any(b < a for a, b in zip(caps, caps[1:])):
            raise InvalidInput("stage capabilities must be non-decreasing")
        prev = None
        for s in self.stages:
            if s.passages < 0:
                raise InvalidInput("passage counts must be >= 0")
            if prev is not None and s.passages <= prev:
                raise InvalidInput("passage counts must be strictly increasing")
            prev = s.passages
        if not self.difficulty_sharpness > 0:
            raise InvalidInput("difficulty_sharpness must be > 0")
        if not 0.0 <= self.calibration <= 1.0:
            raise InvalidInput("calibration must lie in [0, 1]")
        if self.answer_token_count < 1:
            raise InvalidInput("answer_token_count must be >= 1")
        if self.seed < 0:
            raise InvalidInput("seed must be >= 0")


# Confidence scores are Beta(2 + 8*calibration, 2) when correct and
# Beta(2, 2 + 8*calibration) when wrong: at calibration=0 both collapse to
# the same Beta(2, 2), at calibration=1 they are well separated.
_BETA_BASE = 2.0
_BETA_SPREAD = 8.0

# Beta draws can round to 0.0 in float; token probabilities must stay in (0, 1].
_SCORE_FLOOR = 1e-12


def generate(config: SynthConfig) -> dict[str, dict[str, PredictionRecord]]:
    """Generate per-stage prediction logs for a synthetic benchmark.

    Returns a stage -> qid -> record mapping covering every question at every
    stage. Each question uses its own seeded substream, so records do not
    depend on generation order and the whole output is deterministic per
    config.
    """
    logs: dict[str, dict[str, PredictionRecord]] = {s.name: {} for s in config.stages}
    a = config.difficulty_sharpness
    rho = config.calibration
    n_tok = config.answer_token_count
    for i in range(config.n_questions):
        rng = np.random.default_rng(np.random.SeedSequence((config.seed, i)))
        qid = f"q{i:05d}"
        difficulty = rng.random()
        # Length varies independently of difficulty, so question length
        # carries no signal about which stage gets a question right.
        length = int(rng.integers(8, 72))
        question = f"question {qid} " + "x" * length
        gold = (f"gold answer {qid}",)
        for stage in config.stages:
            p_correct = 1.0 / (1.0 + math.exp(-a * (stage.capability - difficulty)))
            correct = bool(rng.random() < p_correct)
            if correct:
                alpha, beta = _BETA_BASE + _BETA_SPREAD * rho, _BETA_BASE
            else:
                alpha, beta = _BETA_BASE, _BETA_BASE + _BETA_SPREAD * rho
            score = float(rng.beta(alpha, beta))
            score = min(max(score, _SCORE_FLOOR), 1.0)
            per_token = score ** (1.0 / n_tok)
            prediction = gold[0] if correct else f"wrong answer {qid}"
            logs[stage.name][qid] = PredictionRecord(
                qid=qid,
                stage_id=stage.name,
                question=question,
                prediction=prediction,
                token_probs=TokenProbs((per_token,) * n_tok),
                n_passages=stage.passages,
                gold=gold,
            )
    return logs


@dataclass(frozen=True)
class StageCalibration:
    """Per-stage summary of how informative the confidence scores are."""

    stage: str
    n: int
    accuracy: float
    correlation: float
    mean_confidence_correct: float | None
    mean_confidence_incorrect: float | None


@dataclass(frozen=True)
class CalibrationReport:
    """Calibration summaries for every stage, under one confidence method."""

    method: ConfidenceMethod
    stages: tuple[StageCalibration, ...]

    def to_text(self) -> str:
        lines = [f"calibration report (method={self.method.value})"]
        for s in self.stages:
            mc = "-" if s.mean_confidence_correct is None else f"{s.mean_confidence_correct:.4f}"
            mi = "-" if s.mean_confidence_incorrect is None else f"{s.mean_confidence_incorrect:.4f}"
            lines.append(
                f"  stage={s.stage} n={s.n} accuracy={s.accuracy:.4f} "
                f"conf_correct={mc} conf_incorrect={mi} correlation={s.correlation:.4f}"
            )
        return "\n".join(lines)


def _pearson(xs: list[float], ys: list[float]) -> float:
    """Pearson correlation with the zero-variance convention of 0.0."""
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    cov = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = math.fsum((x - mx) ** 2 for x in xs)
    vy = math.fsum((y - my) ** 2 for y in ys)
    if vx == 0.0 or vy == 0.0:
        return 0.0
    return cov / math.sqrt(vx * vy)


def calibration_report(
    logs: Mapping[str, Mapping[str, PredictionRecord]],
    method: ConfidenceMethod = ConfidenceMethod.PPA,
) -> CalibrationReport:
    """Measure, per stage, how well confidence separates right from wrong.

    Reports exact-match accuracy, mean confidence on correct and incorrect
    predictions, and the Pearson correlation between confidence and
    correctness. Requires gold answers on every record.
    """
    method = ConfidenceMethod(method)
    stages = []
    for name, records in logs.items():
        if not records:
            continue
        confs: list[float] = []
        corrects: list[float] = []
        for qid in sorted(records):
            rec = records[qid]
            if rec.gold is None:
                raise InvalidInput(
                    f"record for question {qid!r} at stage {name!r} has no gold answers"
                )
            confs.append(confidence(method, rec.token_probs))
            corrects.append(1.0 if exact_match(rec.prediction, rec.gold) else 0.0)
        right = [c for c, ok in zip(confs, corrects) if ok]
        wrong = [c for c, ok in zip(confs, corrects) if not ok]
        first = records[next(iter(sorted(records)))]
        stages.append(
            (
                first.n_passages,
                StageCalibration(
                    stage=name,
                    n=len(confs),
                    accuracy=math.fsum(corrects) / len(corrects),
                    correlation=_pearson(confs, corrects),
                    mean_confidence_correct=math.fsum(right) / len(right) if right else None,
                    mean_confidence_incorrect=math.fsum(wrong) / len(wrong) if wrong else None,
                ),
            )
        )
    if not stages:
        raise InvalidInput("calibration needs at least one non-empty stage log")
    stages.sort(key=lambda t: (t[0], t[1].stage))
    return CalibrationReport(method, tuple(s for _, s in stages))
