from dataclasses import dataclass

from .errors import AdapterError


def stage_name(passages: int) -> str:
    """Canonical stage id for a passage budget: cb for 0, obN otherwise."""
    return "cb" if passages == 0 else f"ob{passages}"


@dataclass(frozen=True)
class AdapterConfig:
    """Everything a reader run needs besides the questions themselves.

    ``stages`` lists the passage budget of each cascade stage (0 means the
    closed-book stage); budgets must be strictly increasing so the dumped
    logs describe a well-formed cascade.
    """

    model_path: str
    stages: tuple[int, ...] = (0,)
    device: str = "cpu"
    max_new_tokens: int = 16
    passage_token_budget: int = 250

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(int(s) for s in self.stages))
        if not self.model_path:
            raise AdapterError("model_path must be non-empty")
        if not self.stages:
            raise AdapterError("at least one stage is required")
        if self.stages[0] < 0:
            raise AdapterError("passage budgets must be >= 0")
        if any(b <= a for a, b in zip(self.stages, self.stages[1:])):
            raise AdapterError("stage passage budgets must be strictly increasing")
        if self.max_new_tokens < 1:
            raise AdapterError("max_new_tokens must be >= 1")
        if self.passage_token_budget < 1:
            raise AdapterError("passage_token_budget must be >= 1")

    @property
    def stage_names(self) -> tuple[str, ...]:
        return tuple(stage_name(s) for s in self.stages)
