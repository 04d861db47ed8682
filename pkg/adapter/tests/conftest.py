import json

import pytest
import torch
from transformers import ByT5Tokenizer, T5Config, T5ForConditionalGeneration
from transformers.utils import logging as hf_logging

from qcascade_adapter import AdapterConfig, GreedyReader
from sample_questions import QUESTIONS

hf_logging.set_verbosity_error()
hf_logging.disable_progress_bar()


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    """A tiny byte-level seq2seq model with fixed random weights.

    Small enough to build in milliseconds, deterministic because the weights
    are seeded, and fully offline: the byte tokenizer needs no vocab files.
    """
    target = tmp_path_factory.mktemp("tiny-model")
    config = T5Config(
        vocab_size=384,
        d_model=32,
        d_kv=8,
        d_ff=64,
        num_layers=2,
        num_heads=2,
        decoder_start_token_id=0,
        pad_token_id=0,
        eos_token_id=1,
    )
    torch.manual_seed(0)
    T5ForConditionalGeneration(config).save_pretrained(target)
    ByT5Tokenizer().save_pretrained(target)
    return str(target)


@pytest.fixture(scope="session")
def reader(model_dir):
    return GreedyReader(AdapterConfig(model_dir, stages=(0, 2), max_new_tokens=8))




@pytest.fixture(scope="session")
def questions_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "questions.jsonl"
    path.write_text(
        "".join(json.dumps(q, ensure_ascii=False) + "\n" for q in QUESTIONS),
        encoding="utf-8",
    )
    return path
