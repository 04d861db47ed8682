"""Greedy seq2seq reader producing answers with per-token probabilities."""

import threading

import torch
from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

from .config import AdapterConfig
from .errors import AdapterError


def trim_trailing_eos(ids: list[int], eos_id) -> list[int]:
    """Drop the end-of-sequence token if generation stopped on one.

    The remaining ids are exactly the answer tokens, so token probabilities
    truncated to this length line up one-to-one with them.
    """
    if eos_id is not None and ids and ids[-1] == eos_id:
        return ids[:-1]
    return ids


class GreedyReader:
    """A loaded seq2seq model answering questions by greedy decoding.

    Decoding is deterministic (no sampling, no beams), so identical inputs
    always produce identical answers and probabilities; a lock serializes
    generation so one instance can sit behind a threaded server.
    """

    def __init__(self, config: AdapterConfig):
        self.config = config
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(config.model_path)
            self.model = AutoModelForSeq2SeqLM.from_pretrained(config.model_path)
        except (OSError, ValueError) as exc:
            raise AdapterError(f"cannot load model from {config.model_path!r}: {exc}") from exc
        self.model.to(config.device)
        self.model.eval()
        self._lock = threading.Lock()

    def _truncate_passage(self, passage: str) -> str:
        ids = self.tokenizer(passage, add_special_tokens=False)["input_ids"]
        budget = self.config.passage_token_budget
        if len(ids) <= budget:
            return passage
        return self.tokenizer.decode(ids[:budget], skip_special_tokens=True)

    def build_prompt(self, question: str, passages: tuple[str, ...] = ()) -> str:
        if not passages:
            return f"question: {question}"
        context = " ".join(self._truncate_passage(p) for p in passages)
        return f"question: {question} context: {context}"

    def answer(
        self, question: str, passages: tuple[str, ...] = (), max_new_tokens: int | None = None
    ) -> tuple[str, list[float]]:
        """Greedy-decode an answer; returns (prediction, per-token max softmax)."""
        if max_new_tokens is None:
            max_new_tokens = self.config.max_new_tokens
        if max_new_tokens < 1:
            raise AdapterError("max_new_tokens must be >= 1")
        prompt = self.build_prompt(question, tuple(passages))
        encoded = self.tokenizer(prompt, return_tensors="pt").to(self.config.device)
        with self._lock, torch.no_grad():
            out = self.model.generate(
                **encoded,
                do_sample=False,
                num_beams=1,
                min_new_tokens=1,
                max_new_tokens=max_new_tokens,
                output_scores=True,
                return_dict_in_generate=True,
            )
        generated = out.sequences[0][1:].tolist()  # [0] is the decoder start token
        kept = trim_trailing_eos(generated, self.model.config.eos_token_id)
        probs = [
            float(torch.softmax(step[0], dim=-1).max()) for step in out.scores[: len(kept)]
        ]
        prediction = self.tokenizer.decode(kept, skip_special_tokens=True)
        return prediction, probs
