"""Offline cascade replay: exits, costs, laziness, error paths."""

import pytest
from hypothesis import given, settings, strategies as st

from qcascade import (
    CascadePolicy,
    CostModel,
    InvalidInput,
    MissingStageRecord,
    StageSpec,
    accuracy,
    dataset_cost,
    group_records,
    run_offline,
)
from qcascade.errors import DuplicateRecord

from helpers import make_record, unit_cost_policy


def test_worked_two_question_example(two_question_logs, k1_policy):
    outcomes = run_offline(two_question_logs, k1_policy)
    assert [o.qid for o in outcomes] == ["q1", "q2"]
    q1, q2 = outcomes
    assert (q1.exit_stage, q1.cost, q1.correct) == (0, 1.0, True)
    assert q1.confidence_at_exit == 0.9
    assert (q2.exit_stage, q2.cost, q2.correct) == (1, 2.0, True)
    # q2's confidence is re-measured at its exit stage, not carried over
    assert q2.confidence_at_exit == 0.7
    assert accuracy(outcomes) == 1.0
    assert dataset_cost(o.cost for o in outcomes) == 1.5


def test_prediction_comes_from_exit_stage(two_question_logs, k1_policy):
    outcomes = run_offline(two_question_logs, k1_policy)
    assert outcomes[1].stage_name == "ob1"
    assert outcomes[1].prediction == "answer q2"


def test_tie_stays_at_cheaper_stage():
    logs = [
        make_record("q1", "cb", [0.5]),
        make_record("q1", "ob1", [0.9], n_passages=1),
    ]
    policy = unit_cost_policy(thresholds=[0.5])
    (out,) = run_offline(logs, policy)
    assert out.exit_stage == 0


def test_deep_stages_are_lazy():
    # no ob1 record for q1 — harmless, q1 never escalates
    logs = [make_record("q1", "cb", [0.99])]
    (out,) = run_offline(logs, unit_cost_policy(thresholds=[0.5]))
    assert out.exit_stage == 0
    assert out.path.used == (0,)


def test_missing_record_where_escalation_lands():
    logs = [make_record("q1", "cb", [0.1])]
    with pytest.raises(MissingStageRecord) as exc:
        run_offline(logs, unit_cost_policy(thresholds=[0.5]))
    assert exc.value.qid == "q1"
    assert exc.value.stage == "ob1"


def test_closed_book_only_cascade():
    logs = [make_record("q1", "cb", [0.01], correct=False)]
    policy = CascadePolicy(
        stages=(StageSpec("cb", "cb", 0),), method="ppa", cost=CostModel(2.0, 1.0)
    )
    (out,) = run_offline(logs, policy)
    assert out.exit_stage == 0
    assert out.cost == 2.0
    assert out.correct is False
    assert out.path.used == ()


def test_gold_less_records_cost_but_do_not_score():
    logs = [make_record("q1", "cb", [0.9], gold_present=False)]
    (out,) = run_offline(logs, unit_cost_policy(thresholds=[0.5]))
    assert out.correct is None
    with pytest.raises(InvalidInput):
        accuracy([out])


def test_question_set_is_entry_stage_qids():
    logs = [
        make_record("q1", "cb", [0.9]),
        # an ob1-only qid is not part of the run
        make_record("stray", "ob1", [0.9], n_passages=1),
    ]
    outcomes = run_offline(logs, unit_cost_policy(thresholds=[0.5]))
    assert [o.qid for o in outcomes] == ["q1"]


def test_empty_logs_give_empty_run():
    assert run_offline([], unit_cost_policy(thresholds=[0.5])) == []


def test_logs_without_entry_stage_are_an_error():
    logs = [make_record("q1", "ob1", [0.9], n_passages=1)]
    with pytest.raises(InvalidInput):
        run_offline(logs, unit_cost_policy(thresholds=[0.5]))


def test_duplicate_records_rejected():
    logs = [make_record("q1", "cb", [0.9]), make_record("q1", "cb", [0.8])]
    with pytest.raises(DuplicateRecord):
        group_records(logs)


def test_three_stage_exit_bookkeeping():
    logs = [
        make_record("q1", "cb", [0.1]),
        make_record("q1", "ob2", [0.2], n_passages=2),
        make_record("q1", "ob5", [0.3], n_passages=5),
    ]
    policy = unit_cost_policy(passages=(2, 5), thresholds=[0.5, 0.5])
    (out,) = run_offline(logs, policy)
    assert out.exit_stage == 2
    assert out.stage_name == "ob5"
    assert out.path.used == (1, 1)
    assert out.cost == 1.0 + 2.0 + 5.0


@settings(max_examples=60, deadline=None)
@given(
    confs=st.lists(
        st.tuples(
            st.floats(min_value=0.01, max_value=1.0),
            st.floats(min_value=0.01, max_value=1.0),
        ),
        min_size=1,
        max_size=8,
    ),
    tau_lo=st.floats(min_value=0.0, max_value=1.0),
    tau_hi=st.floats(min_value=0.0, max_value=1.0),
)
def test_raising_the_threshold_never_lowers_cost(confs, tau_lo, tau_hi):
    lo, hi = sorted((tau_lo, tau_hi))
    logs = []
    for i, (c_cb, c_ob) in enumerate(confs):
        logs.append(make_record(f"q{i}", "cb", [c_cb]))
        logs.append(make_record(f"q{i}", "ob1", [c_ob], n_passages=1))
    cost_lo = dataset_cost(
        o.cost for o in run_offline(logs, unit_cost_policy(thresholds=[lo]))
    )
    cost_hi = dataset_cost(
        o.cost for o in run_offline(logs, unit_cost_policy(thresholds=[hi]))
    )
    assert cost_lo <= cost_hi
