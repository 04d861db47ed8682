"""Seq2seq reader adapter for confidence-cascade pipelines.

Wraps a local Hugging Face seq2seq model behind two entry points: ``dump_logs``
writes per-stage prediction logs in the cascade JSONL schema, and ``serve``
answers the POST /v1/predict wire contract for live cascade runs. Decoding is
always greedy, so both are deterministic for a fixed model.
"""

from .config import AdapterConfig, stage_name
from .dump import QuestionItem, dump_logs, load_questions
from .errors import AdapterError
from .reader import GreedyReader, trim_trailing_eos
from .server import PREDICT_ROUTE, build_server, serve

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "GreedyReader",
    "PREDICT_ROUTE",
    "QuestionItem",
    "build_server",
    "dump_logs",
    "load_questions",
    "serve",
    "stage_name",
    "trim_trailing_eos",
    "__version__",
]
