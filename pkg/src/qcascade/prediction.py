"""Per-stage reader predictions, confidence estimators, and exact-match scoring."""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

from .errors import InvalidInput

__all__ = [
    "ConfidenceMethod",
    "TokenProbs",
    "PredictionRecord",
    "confidence",
    "normalize_answer",
    "exact_match",
]


class ConfidenceMethod(str, Enum):
    """How a sequence of per-token probabilities is folded into one confidence score.

    Members
    -------
    PPA
        Product of all token probabilities.
    PF
        Probability of the first generated token.
    PFL
        Mean of the first and last token probabilities.
    PA
        Mean over all token probabilities.
    """

    PPA = "ppa"
    PF = "pf"
    PFL = "pfl"
    PA = "pa"


@dataclass(frozen=True)
class TokenProbs:
    """Max-softmax probability of each generated answer token, in generation order.

    Must be non-empty, and every value must lie in (0, 1].
    """

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        try:
            vals = tuple(float(v) for v in self.values)
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"token probabilities must be numbers: {exc}") from exc
        if not vals:
            raise InvalidInput("token probabilities must be non-empty")
        for v in vals:
            if not 0.0 < v <= 1.0:
                raise InvalidInput(f"token probability {v!r} outside (0, 1]")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class PredictionRecord:
    """One reader stage's output for one question.

    ``n_passages`` is the number of evidence passages the reader consumed
    (0 for a closed-book stage). ``gold`` is the optional tuple of reference
    answers; records without it cannot be scored, only costed.
    """

    qid: str
    stage_id: str
    question: str
    prediction: str
    token_probs: TokenProbs
    n_passages: int
    gold: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.qid:
            raise InvalidInput("qid must be non-empty")
        if not self.stage_id:
            raise InvalidInput("stage_id must be non-empty")
        if not isinstance(self.token_probs, TokenProbs):
            object.__setattr__(self, "token_probs", TokenProbs(tuple(self.token_probs)))
        if not isinstance(self.n_passages, int) or isinstance(self.n_passages, bool):
            raise InvalidInput("n_passages must be an integer")
        if self.n_passages < 0:
            raise InvalidInput("n_passages must be >= 0")
        if self.gold is not None:
            gold = tuple(self.gold)
            if not gold:
                raise InvalidInput("gold must be non-empty when present")
            if not all(isinstance(g, str) for g in gold):
                raise InvalidInput("gold answers must be strings")
            object.__setattr__(self, "gold", gold)


def confidence(method: Union[ConfidenceMethod, str], probs: Union[TokenProbs, Iterable[float]]) -> float:
    """Fold per-token probabilities into a single confidence score in (0, 1].

    Args:
        method: one of :class:`ConfidenceMethod` (enum member or its string value).
        probs: the token probabilities; anything :class:`TokenProbs` accepts.

    Returns:
        The aggregated score. All four methods coincide for single-token answers.
    """
    if not isinstance(probs, TokenProbs):
        probs = TokenProbs(tuple(probs))
    method = ConfidenceMethod(method)
    v = probs.values
    if method is ConfidenceMethod.PF:
        return v[0]
    if method is ConfidenceMethod.PFL:
        return (v[0] + v[-1]) / 2.0
    if method is ConfidenceMethod.PA:
        # fsum is exact but the final division can land one ulp outside
        # [min, max] (e.g. mean of three 0.1s); the mean must stay inside.
        return min(max(math.fsum(v) / len(v), min(v)), max(v))
    # PPA: summing logs instead of multiplying avoids underflow on long
    # generations. exp/log round-off must never push the score above the
    # smallest factor, so clamp to min(v).
    if len(v) == 1:
        return v[0]
    score = math.exp(math.fsum(map(math.log, v)))
    return min(score, min(v))


_ARTICLES = frozenset({"a", "an", "the"})


def normalize_answer(text: str) -> str:
    """Normalize an answer string for exact-match comparison.

    Lowercases, removes Unicode punctuation (category ``P*``), drops the
    English articles "a"/"an"/"the" as whole words, and collapses runs of
    whitespace to single spaces. Idempotent.
    """
    lowered = text.lower()
    stripped = "".join(
        ch for ch in lowered if not unicodedata.category(ch).startswith("P")
    )
    tokens = [t for t in stripped.split() if t not in _ARTICLES]
    return " ".join(tokens)


def exact_match(prediction: str, golds: Sequence[str]) -> bool:
    """True iff the normalized prediction equals any normalized gold answer."""
    if not golds:
        raise InvalidInput("at least one gold answer is required")
    normalized = normalize_answer(prediction)
    return any(normalize_answer(g) == normalized for g in golds)
