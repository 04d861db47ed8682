"""Shared builders for prediction logs and policies used across test modules."""

from qcascade import (
    CascadePolicy,
    CostModel,
    PredictionRecord,
    StageSpec,
)


def make_record(qid, stage, probs, correct=True, question=None, n_passages=0, gold_present=True):
    """Build a record whose prediction matches gold iff ``correct``."""
    gold = (f"answer {qid}",)
    return PredictionRecord(
        qid=qid,
        stage_id=stage,
        question=question if question is not None else f"question text {qid}",
        prediction=gold[0] if correct else f"wrong {qid}",
        token_probs=tuple(probs),
        n_passages=n_passages,
        gold=gold if gold_present else None,
    )


def unit_cost_policy(passages=(1,), method="ppa", thresholds=None, mode="upper_bound"):
    """K=len(passages) cascade with c_cb = c_ob = 1 for easy hand arithmetic."""
    if thresholds is None:
        thresholds = [0.5] * len(passages)
    stages = [StageSpec("cb", "cb", 0, thresholds[0])]
    for i, s in enumerate(passages):
        tau = thresholds[i + 1] if i + 1 < len(passages) else None
        stages.append(StageSpec(f"ob{s}", "ob", s, tau))
    return CascadePolicy(stages=tuple(stages), method=method, cost=CostModel(1.0, 1.0, mode))


def random_toy_logs(rng, n_questions, passages, discrete=True):
    """Logs where confidences repeat (discrete grid) to exercise tie handling."""
    stages = ["cb"] + [f"ob{s}" for s in passages]
    logs = []
    conf_by_stage = []
    correct_by_stage = []
    for si, stage in enumerate(stages):
        confs = {}
        corrects = {}
        for i in range(n_questions):
            qid = f"q{i:02d}"
            conf = rng.choice([0.1, 0.25, 0.5, 0.75, 0.9]) if discrete else rng.random()
            correct = rng.random() < 0.3 + 0.2 * si
            confs[qid] = conf
            corrects[qid] = correct
            logs.append(
                make_record(
                    qid,
                    stage,
                    [conf],
                    correct=correct,
                    n_passages=0 if si == 0 else passages[si - 1],
                )
            )
        conf_by_stage.append(confs)
        correct_by_stage.append(corrects)
    return logs, conf_by_stage, correct_by_stage
