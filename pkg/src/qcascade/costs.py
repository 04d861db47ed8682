"""FLOPs accounting for closed-book and open-book cascade stages.

A question always pays one closed-book inference. Each open-book iteration it
escalates into adds passage-encoding cost on top. Two accounting modes exist:

* ``UPPER_BOUND`` — every iteration re-encodes all of its passages, so
  iteration k costs ``S_k * c_ob``.
* ``ENCODER_REUSE`` — passage encodings are cached across iterations, so
  iteration k only pays for the passages it adds: ``(S_k - S_{k-1}) * c_ob``.
  Summed over a full escalation this telescopes to ``S_m * c_ob``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .errors import InvalidInput

__all__ = [
    "StageKind",
    "CostMode",
    "CostModel",
    "EscalationPath",
    "stage_cost",
    "instance_cost",
    "dataset_cost",
]


class StageKind(str, Enum):
    """Whether a stage reads evidence passages."""

    CB = "cb"
    OB = "ob"


class CostMode(str, Enum):
    """Passage-encoding accounting across open-book iterations."""

    UPPER_BOUND = "upper_bound"
    ENCODER_REUSE = "encoder_reuse"


@dataclass(frozen=True)
class CostModel:
    """Per-inference FLOPs constants.

    Args:
        c_cb: FLOPs of one closed-book inference.
        c_ob: FLOPs of encoding and reading one passage in an open-book stage.
        mode: how repeated passage encodings are charged (see module docstring).
    """

    c_cb: float
    c_ob: float
    mode: CostMode = CostMode.UPPER_BOUND

    def __post_init__(self) -> None:
        object.__setattr__(self, "c_cb", float(self.c_cb))
        object.__setattr__(self, "c_ob", float(self.c_ob))
        object.__setattr__(self, "mode", CostMode(self.mode))
        if not self.c_cb >= 0.0:
            raise InvalidInput(f"c_cb must be >= 0, got {self.c_cb!r}")
        if not self.c_ob > 0.0:
            raise InvalidInput(f"c_ob must be > 0, got {self.c_ob!r}")


@dataclass(frozen=True)
class EscalationPath:
    """Which open-book iterations ran for one question.

    ``used[k]`` is 1 if iteration k+1 ran, else 0; escalation never skips an
    iteration, so the ones form a prefix. ``passages[k]`` is that iteration's
    passage count; counts are positive and strictly increasing.
    """

    used: tuple[int, ...]
    passages: tuple[int, ...]

    def __post_init__(self) -> None:
        used = tuple(int(m) for m in self.used)
        passages = tuple(int(s) for s in self.passages)
        if len(used) != len(passages):
            raise InvalidInput("need exactly one usage indicator per iteration")
        if any(m not in (0, 1) for m in used):
            raise InvalidInput("usage indicators must be 0 or 1")
        if any(used[i] < used[i + 1] for i in range(len(used) - 1)):
            raise InvalidInput("escalation cannot skip an iteration")
        prev = 0
        for s in passages:
            if s <= prev:
                raise InvalidInput(
                    "passage counts must be positive and strictly increasing, "
                    f"got {passages!r}"
                )
            prev = s
        object.__setattr__(self, "used", used)
        object.__setattr__(self, "passages", passages)

    @property
    def depth(self) -> int:
        """Number of open-book iterations that actually ran."""
        return sum(self.used)


def stage_cost(model: CostModel, kind: StageKind, s_k: int = 0, s_prev: int = 0) -> float:
    """FLOPs charged for one stage of one question.

    Args:
        model: the cost constants and accounting mode.
        kind: closed-book or open-book.
        s_k: passage count of this stage (must be 0 for closed-book).
        s_prev: passage count of the previous open-book iteration, 0 if none.
    """
    kind = StageKind(kind)
    if kind is StageKind.CB:
        if s_k != 0:
            raise InvalidInput("closed-book stages read no passages")
        return model.c_cb
    if s_k < 1:
        raise InvalidInput("open-book stages need at least one passage")
    if s_prev < 0 or s_prev >= s_k:
        raise InvalidInput(
            f"previous iteration must use fewer passages: s_prev={s_prev}, s_k={s_k}"
        )
    if model.mode is CostMode.ENCODER_REUSE:
        return (s_k - s_prev) * model.c_ob
    return s_k * model.c_ob


def instance_cost(model: CostModel, path: EscalationPath) -> float:
    """Total FLOPs one question paid along its escalation path.

    The closed-book stage is always charged; each used open-book iteration
    adds its :func:`stage_cost`.
    """
    total = model.c_cb
    s_prev = 0
    for m, s in zip(path.used, path.passages):
        if not m:
            break
        total += stage_cost(model, StageKind.OB, s, s_prev)
        s_prev = s
    return total


def dataset_cost(costs: Iterable[float]) -> float:
    """Mean per-question FLOPs over a dataset. Requires at least one instance."""
    values = [float(c) for c in costs]
    if not values:
        raise InvalidInput("dataset cost needs at least one instance")
    return math.fsum(values) / len(values)
