"""Accuracy-cost curves: threshold sweeps, Pareto frontiers, AUC, baselines.

A curve is a set of (mean FLOPs per question, exact-match accuracy) points,
each produced by one threshold assignment of a fixed cascade. Sweeping the
thresholds traces the whole operating range from "always trust the cheap
stage" to "always escalate".
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .cascade import CascadeOutcome, CascadePolicy, Logs, _as_stage_table, validate_policy
from .costs import EscalationPath, instance_cost
from .errors import (
    GridTooLarge,
    InvalidInput,
    MissingStageRecord,
    TargetUnreachable,
)
from .prediction import confidence, exact_match

__all__ = [
    "CurvePoint",
    "AccuracyCostCurve",
    "accuracy",
    "pareto_frontier",
    "auc",
    "cost_at_accuracy",
    "build_curve_k1",
    "sweep_multi",
    "stage_anchor_points",
    "baseline_random",
    "baseline_random_sampled",
    "baseline_heuristic",
    "common_cost_range",
]

# Hard cap on threshold combinations a sweep may enumerate.
MAX_SWEEP_COMBINATIONS = 1_000_000


@dataclass(frozen=True)
class CurvePoint:
    """One operating point: mean cost, accuracy, and the thresholds behind it.

    Baseline points carry an empty thresholds tuple — no threshold assignment
    produced them.
    """

    cost: float
    accuracy: float
    thresholds: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if not 0.0 <= self.accuracy <= 1.0:
            raise InvalidInput(f"accuracy {self.accuracy!r} outside [0, 1]")
        if not self.cost >= 0.0:
            raise InvalidInput(f"cost {self.cost!r} must be >= 0")


class AccuracyCostCurve:
    """Curve points normalized to strictly increasing cost.

    Points with equal cost collapse to the one with the highest accuracy
    (threshold tuple as the deterministic tie-break). Accuracy need not be
    monotone — see :func:`pareto_frontier` for the reduced curve.
    """

    def __init__(self, points: Iterable[CurvePoint]):
        pts = list(points)
        if not pts:
            raise InvalidInput("a curve needs at least one point")
        best: dict[float, CurvePoint] = {}
        for p in pts:
            held = best.get(p.cost)
            if (
                held is None
                or p.accuracy > held.accuracy
                or (p.accuracy == held.accuracy and p.thresholds < held.thresholds)
            ):
                best[p.cost] = p
        self.points: tuple[CurvePoint, ...] = tuple(
            best[c] for c in sorted(best)
        )

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, AccuracyCostCurve) and self.points == other.points

    def __repr__(self) -> str:
        return f"AccuracyCostCurve({len(self.points)} points)"

    @property
    def costs(self) -> tuple[float, ...]:
        return tuple(p.cost for p in self.points)

    @property
    def accuracies(self) -> tuple[float, ...]:
        return tuple(p.accuracy for p in self.points)


def accuracy(outcomes: Sequence[CascadeOutcome]) -> float:
    """Fraction of outcomes whose exit prediction matched a gold answer."""
    if not outcomes:
        raise InvalidInput("accuracy needs at least one outcome")
    unresolved = [o.qid for o in outcomes if o.correct is None]
    if unresolved:
        raise InvalidInput(
            f"outcomes without gold answers cannot be scored: {unresolved[:5]}"
        )
    return sum(1 for o in outcomes if o.correct) / len(outcomes)


def pareto_frontier(points: Union[AccuracyCostCurve, Iterable[CurvePoint]]) -> AccuracyCostCurve:
    """Reduce points to those where accuracy strictly rises with cost.

    Walking the cost-deduplicated points in increasing cost order, a point
    survives iff its accuracy strictly exceeds every cheaper survivor's.
    The cheapest point always survives.
    """
    curve = points if isinstance(points, AccuracyCostCurve) else AccuracyCostCurve(points)
    kept: list[CurvePoint] = []
    for p in curve.points:
        if not kept or p.accuracy > kept[-1].accuracy:
            kept.append(p)
    return AccuracyCostCurve(kept)


def auc(
    curve: AccuracyCostCurve,
    cost_range: tuple[float, float] | None = None,
) -> float:
    """Cost-normalized area under the accuracy-cost curve.

    Accuracy is linearly interpolated between curve points and extrapolated
    as constant beyond the cheapest/most expensive point; the integral over
    ``cost_range`` (default: the curve's own span) is divided by the range
    width, so the result is a mean accuracy in [0, 1].
    """
    pts = curve.points
    if len(pts) < 2:
        raise InvalidInput("AUC needs a curve with at least two points")
    xs = np.asarray(curve.costs, dtype=float)
    ys = np.asarray(curve.accuracies, dtype=float)
    if cost_range is None:
        lo, hi = float(xs[0]), float(xs[-1])
    else:
        lo, hi = float(cost_range[0]), float(cost_range[1])
    if not lo < hi:
        raise InvalidInput(f"cost range must satisfy lo < hi, got [{lo!r}, {hi!r}]")
    inner = [float(c) for c in xs if lo < c < hi]
    grid = sorted({lo, hi, *inner})
    # np.interp clamps outside the curve span = constant extrapolation.
    vals = np.interp(grid, xs, ys)
    widths = [grid[i + 1] - grid[i] for i in range(len(grid) - 1)]
    areas = [
        (vals[i] + vals[i + 1]) / 2.0 * widths[i] for i in range(len(grid) - 1)
    ]
    # Normalizing by the summed widths (not hi - lo directly) keeps constant
    # curves exact: both sums see the same rounding.
    return math.fsum(areas) / math.fsum(widths)


def cost_at_accuracy(curve: AccuracyCostCurve, target: float) -> float:
    """Smallest cost at which the (interpolated) curve reaches ``target``.

    Scans segments left to right and linearly interpolates inside the first
    one that crosses the target. Raises :class:`TargetUnreachable` if even
    the best point stays below it.
    """
    pts = curve.points
    if len(pts) < 2:
        raise InvalidInput("intersection needs a curve with at least two points")
    if pts[0].accuracy >= target:
        return pts[0].cost
    for left, right in itertools.pairwise(pts):
        if right.accuracy >= target:
            # left.accuracy < target <= right.accuracy on the first crossing.
            frac = (target - left.accuracy) / (right.accuracy - left.accuracy)
            return left.cost + frac * (right.cost - left.cost)
    raise TargetUnreachable(target, max(p.accuracy for p in pts))


class _SweepTable:
    """Confidence/correctness of every (stage, question) pair, computed once.

    Threshold sweeps re-evaluate the same records thousands of times; this
    table front-loads the per-record work so each threshold assignment is a
    vectorized comparison. Results are bit-identical to running
    :func:`~qcascade.cascade.run_offline` per assignment.
    """

    def __init__(self, logs: Logs, policy: CascadePolicy):
        validate_policy(policy)
        table = _as_stage_table(logs)
        entry = policy.stages[0].name
        if entry not in table:
            raise InvalidInput(f"logs contain no records for entry stage {entry!r}")
        self.policy = policy
        self.qids = sorted(table[entry])
        if not self.qids:
            raise InvalidInput("sweeps need at least one question")
        n_stages = len(policy.stages)
        conf_rows: list[list[float]] = []
        correct_rows: list[list[bool]] = []
        self.question_text: dict[str, str] = {}
        for idx, stage in enumerate(policy.stages):
            conf_row: list[float] = []
            correct_row: list[bool] = []
            for qid in self.qids:
                try:
                    rec = table[stage.name][qid]
                except KeyError:
                    raise MissingStageRecord(qid, stage.name) from None
                if rec.gold is None:
                    raise InvalidInput(
                        f"record for question {qid!r} at stage {stage.name!r} "
                        "has no gold answers; curves need scored logs"
                    )
                conf_row.append(confidence(policy.method, rec.token_probs))
                correct_row.append(exact_match(rec.prediction, rec.gold))
                if idx == 0:
                    self.question_text[qid] = rec.question
            conf_rows.append(conf_row)
            correct_rows.append(correct_row)
        self.conf = np.asarray(conf_rows, dtype=float)          # (n_stages, n)
        self.correct = np.asarray(correct_rows, dtype=bool)     # (n_stages, n)
        self.n = len(self.qids)
        # FLOPs at each possible exit stage (same for every question).
        ob = policy.ob_passages
        self.exit_cost = [
            instance_cost(
                policy.cost,
                EscalationPath(
                    tuple(1 if k <= e else 0 for k in range(1, n_stages)), ob
                ),
            )
            for e in range(n_stages)
        ]

    def exits_for(self, taus: Sequence[float]) -> np.ndarray:
        """Exit stage of every question under one threshold assignment."""
        k = len(self.policy.stages) - 1
        exits = np.full(self.n, k, dtype=int)
        undecided = np.ones(self.n, dtype=bool)
        for i, tau in enumerate(taus):
            stays = undecided & (self.conf[i] >= tau)
            exits[stays] = i
            undecided &= ~stays
        return exits

    def evaluate_exits(self, exits: np.ndarray) -> tuple[float, float]:
        """(mean cost, accuracy) for an explicit per-question exit assignment."""
        costs = [self.exit_cost[e] for e in exits]
        mean_cost = math.fsum(costs) / self.n
        n_correct = int(self.correct[exits, np.arange(self.n)].sum())
        return mean_cost, n_correct / self.n

    def evaluate(self, taus: Sequence[float]) -> tuple[float, float]:
        """(mean cost, accuracy) under one threshold assignment."""
        return self.evaluate_exits(self.exits_for(taus))


def _just_above(values: Iterable[float]) -> float:
    """Smallest representable threshold that escalates every given confidence.

    Capped at 1.0 to stay a legal threshold; if the maximum confidence is
    exactly 1.0 no threshold can escalate it (ties stay), so the cap is only
    cosmetic there.
    """
    return min(math.nextafter(max(values), math.inf), 1.0)


def _quantile_candidates(values: np.ndarray, grid_size: int) -> list[float]:
    """Observed-confidence quantiles plus the two sentinel thresholds.

    Quantile indices use integer arithmetic rather than a float position
    (which can round one ulp below an integer and skip a value), so a grid
    of at least ``len(values)`` provably selects every observed confidence.
    """
    srt = np.sort(values)
    n = len(srt)
    idx = {(j * (n - 1)) // (grid_size - 1) for j in range(grid_size)}
    return sorted({0.0, _just_above(values), *(float(srt[i]) for i in idx)})


def build_curve_k1(logs: Logs, policy: CascadePolicy) -> AccuracyCostCurve:
    """Exhaustive single-threshold sweep of a two-stage cascade.

    Candidate thresholds are every distinct entry-stage confidence plus the
    sentinels 0.0 (trust everything) and just-above-max (escalate
    everything); together these hit every escalation set a threshold can
    induce. Returns the full cost-deduplicated curve, not its Pareto
    frontier — apply :func:`pareto_frontier` for that.
    """
    if len(policy.stages) != 2:
        raise InvalidInput(
            f"single-threshold sweep needs exactly 2 stages, got {len(policy.stages)}"
        )
    table = _SweepTable(logs, policy)
    cands = sorted({0.0, _just_above(table.conf[0]), *(float(c) for c in table.conf[0])})
    points = []
    for tau in cands:
        cost, acc = table.evaluate((tau,))
        points.append(CurvePoint(cost, acc, (tau,)))
    return AccuracyCostCurve(points)


def sweep_multi(
    logs: Logs,
    policy: CascadePolicy,
    grid_size: int = 9,
    *,
    frontier: bool = True,
) -> AccuracyCostCurve:
    """Grid sweep over all non-final thresholds of a multi-stage cascade.

    Each non-final stage contributes ``grid_size`` quantiles of its observed
    confidences plus the two sentinel thresholds; the Cartesian product of
    those per-stage candidate sets is evaluated. Raises
    :class:`GridTooLarge` if the product exceeds
    ``MAX_SWEEP_COMBINATIONS``. Returns the Pareto frontier by default
    (``frontier=False`` keeps every cost-deduplicated point).
    """
    if len(policy.stages) < 2:
        raise InvalidInput("sweeping needs at least one non-final stage")
    if grid_size < 2:
        raise InvalidInput(f"grid_size must be >= 2, got {grid_size}")
    table = _SweepTable(logs, policy)
    k = len(policy.stages) - 1
    candidate_sets = [_quantile_candidates(table.conf[i], grid_size) for i in range(k)]
    total = math.prod(len(c) for c in candidate_sets)
    if total > MAX_SWEEP_COMBINATIONS:
        raise GridTooLarge(
            f"{total} threshold combinations exceed the cap of {MAX_SWEEP_COMBINATIONS}; "
            "lower grid_size"
        )
    points = []
    for taus in itertools.product(*candidate_sets):
        cost, acc = table.evaluate(taus)
        points.append(CurvePoint(cost, acc, taus))
    curve = AccuracyCostCurve(points)
    return pareto_frontier(curve) if frontier else curve


def stage_anchor_points(logs: Logs, policy: CascadePolicy) -> list[CurvePoint]:
    """Fixed-depth reference points: everyone exits at stage e, for each e.

    Anchor e costs the full escalation through stage e and scores stage e's
    own predictions; these are the endpoints any question-order strategy
    interpolates between.
    """
    table = _SweepTable(logs, policy)
    points = []
    for e in range(len(policy.stages)):
        exits = np.full(table.n, e, dtype=int)
        cost, acc = table.evaluate_exits(exits)
        points.append(CurvePoint(cost, acc))
    return points


def baseline_random(
    anchors: Sequence[CurvePoint], points_per_leg: int = 11
) -> AccuracyCostCurve:
    """Expected curve of escalating uniformly random question subsets.

    A random fraction f escalated from anchor e to anchor e+1 lands, in
    expectation, at the straight-line blend of the two anchors; the curve is
    therefore the anchor chain sampled at ``points_per_leg`` evenly spaced
    fractions per leg.
    """
    if len(anchors) < 2:
        raise InvalidInput("the random baseline needs at least two anchor points")
    if points_per_leg < 2:
        raise InvalidInput(f"points_per_leg must be >= 2, got {points_per_leg}")
    points = []
    for a, b in itertools.pairwise(anchors):
        for j in range(points_per_leg):
            f = j / (points_per_leg - 1)
            points.append(
                CurvePoint(
                    (1.0 - f) * a.cost + f * b.cost,
                    (1.0 - f) * a.accuracy + f * b.accuracy,
                )
            )
    return AccuracyCostCurve(points)


def baseline_random_sampled(
    logs: Logs,
    policy: CascadePolicy,
    seed: int,
    points_per_leg: int = 11,
) -> AccuracyCostCurve:
    """Random baseline with actually sampled subsets instead of expectations.

    One uniform draw per (leg, question) decides escalation: question j
    escalates leg l at fraction f iff u[l, j] < f, so subsets are nested as
    f grows and the curve endpoints coincide with the anchors. Deterministic
    for a given seed.
    """
    if points_per_leg < 2:
        raise InvalidInput(f"points_per_leg must be >= 2, got {points_per_leg}")
    table = _SweepTable(logs, policy)
    k = len(policy.stages) - 1
    if k < 1:
        raise InvalidInput("the random baseline needs at least one open-book stage")
    u = np.random.default_rng(seed).random((k, table.n))
    points = []
    for leg in range(1, k + 1):
        for j in range(points_per_leg):
            f = j / (points_per_leg - 1)
            exits = np.full(table.n, leg - 1, dtype=int)
            exits[u[leg - 1] < f] = leg
            cost, acc = table.evaluate_exits(exits)
            points.append(CurvePoint(cost, acc))
    return AccuracyCostCurve(points)


def baseline_heuristic(logs: Logs, policy: CascadePolicy) -> AccuracyCostCurve:
    """Question-length escalation baseline.

    Orders questions by text length in characters, longest first (qid as the
    tie-break), and escalates the top m for every cutoff m; deeper stages
    escalate their top-m out of a fully escalated previous stage. Returns the
    Pareto-reduced curve.
    """
    table = _SweepTable(logs, policy)
    k = len(policy.stages) - 1
    if k < 1:
        raise InvalidInput("the length heuristic needs at least one open-book stage")
    order = sorted(
        range(table.n),
        key=lambda i: (-len(table.question_text[table.qids[i]]), table.qids[i]),
    )
    rank = np.empty(table.n, dtype=int)
    for pos, i in enumerate(order):
        rank[i] = pos
    points = []
    for leg in range(1, k + 1):
        start = 0 if leg == 1 else 1  # m=0 duplicates the previous leg's m=n point
        for m in range(start, table.n + 1):
            exits = np.full(table.n, leg - 1, dtype=int)
            exits[rank < m] = leg
            cost, acc = table.evaluate_exits(exits)
            points.append(CurvePoint(cost, acc))
    return pareto_frontier(points)


def common_cost_range(curves: Iterable[AccuracyCostCurve]) -> tuple[float, float]:
    """Cost interval shared by all curves: [max of minima, min of maxima]."""
    curves = list(curves)
    if not curves:
        raise InvalidInput("need at least one curve")
    lo = max(c.points[0].cost for c in curves)
    hi = min(c.points[-1].cost for c in curves)
    if not lo < hi:
        raise InvalidInput(f"curves share no cost range: [{lo!r}, {hi!r}]")
    return lo, hi
