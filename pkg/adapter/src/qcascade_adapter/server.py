"""HTTP backend answering POST /v1/predict for live cascade runs."""

import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import AdapterError
from .reader import GreedyReader

log = logging.getLogger("qcascade_adapter")

PREDICT_ROUTE = "/v1/predict"


def _parse_request(raw: bytes):
    try:
        obj = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise AdapterError("request body must be a JSON object")
    if not isinstance(obj, dict):
        raise AdapterError("request body must be a JSON object")
    question = obj.get("question")
    if not isinstance(question, str) or not question:
        raise AdapterError("'question' must be a non-empty string")
    passages = obj.get("passages", [])
    if not isinstance(passages, list) or not all(isinstance(p, str) for p in passages):
        raise AdapterError("'passages' must be an array of strings")
    max_new_tokens = obj.get("max_new_tokens")
    if max_new_tokens is not None and (
        isinstance(max_new_tokens, bool)
        or not isinstance(max_new_tokens, int)
        or max_new_tokens < 1
    ):
        raise AdapterError("'max_new_tokens' must be a positive integer")
    return question, tuple(passages), max_new_tokens


def build_server(reader: GreedyReader, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind (but do not start) a server; port 0 picks a free port."""

    class Handler(BaseHTTPRequestHandler):
        def _reply(self, status: int, payload: dict) -> None:
            body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self) -> None:
            if self.path != PREDICT_ROUTE:
                self._reply(404, {"error": f"unknown route {self.path}"})
                return
            length = int(self.headers.get("Content-Length") or 0)
            try:
                question, passages, max_new_tokens = _parse_request(self.rfile.read(length))
            except AdapterError as exc:
                self._reply(400, {"error": str(exc)})
                return
            try:
                prediction, probs = reader.answer(question, passages, max_new_tokens)
            except Exception as exc:  # surface inference failures as HTTP 500
                log.exception("inference failed")
                self._reply(500, {"error": str(exc)})
                return
            self._reply(200, {"prediction": prediction, "token_probs": probs})

        def log_message(self, fmt, *args):
            log.debug("%s %s", self.address_string(), fmt % args)

    return ThreadingHTTPServer((host, port), Handler)


def serve(reader: GreedyReader, host: str = "127.0.0.1", port: int = 8080) -> None:
    """Serve until interrupted."""
    server = build_server(reader, host, port)
    log.info("serving on http://%s:%d%s", *server.server_address, PREDICT_ROUTE)
    try:
        server.serve_forever()
    finally:
        server.server_close()
