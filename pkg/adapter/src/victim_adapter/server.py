"""Adapter server: wraps a classifier callable behind the wire protocol.

Protocol (HTTP/1.1, JSON bodies):
  GET  /v1/info        -> {"k", "shape", "concurrent_safe", "applies_softmax"}
  POST /v1/query       -> {"shape": [T,H,W,C], "dtype": "f32le",
                           "data": base64 row-major little-endian f32}
                          response {"probs": [K floats]}
  POST /v1/query_batch -> {"items": [<query bodies>]} -> {"probs": [[...]]}
Errors: 400 {"error"} for malformed payloads or shape/dtype mismatch,
500 {"error"} with a sanitized message when the wrapped model raises.

The wrapped callable maps a float64 (T,H,W,C) array to K scores. If its
outputs do not sum to ~1 (outside [0.99, 1.01] on a startup probe) they are
treated as logits and softmaxed; either way the response is renormalized
onto the probability simplex. Queries are serialized through a lock unless
the model is declared reentrant.
"""
from __future__ import annotations

import base64
import importlib
import json
import logging
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

__all__ = ["AdapterConfig", "AdapterServer", "load_entrypoint"]

logger = logging.getLogger("victim_adapter")


def load_entrypoint(spec: str):
    """Resolve 'package.module:function' to the callable."""
    module_name, sep, attr = spec.partition(":")
    if not sep or not module_name or not attr:
        raise ValueError(f"entrypoint must be 'module:function', got {spec!r}")
    module = importlib.import_module(module_name)
    try:
        fn = getattr(module, attr)
    except AttributeError as exc:
        raise ValueError(f"{module_name!r} has no attribute {attr!r}") from exc
    if not callable(fn):
        raise ValueError(f"{spec!r} is not callable")
    return fn


@dataclass
class AdapterConfig:
    entrypoint: str
    shape: tuple[int, int, int, int]
    port: int = 8080
    host: str = "127.0.0.1"
    mean: tuple[float, ...] | None = None  # per-channel, applied before the model
    std: tuple[float, ...] | None = None
    max_batch: int = 64
    reentrant: bool = False  # wrapped model safe for concurrent calls

    def __post_init__(self):
        self.shape = tuple(int(d) for d in self.shape)
        if len(self.shape) != 4 or any(d < 1 for d in self.shape):
            raise ValueError(f"shape must be four positive dims, got {self.shape}")
        c = self.shape[3]
        for name, vals in (("mean", self.mean), ("std", self.std)):
            if vals is not None and len(vals) != c:
                raise ValueError(f"{name} needs {c} per-channel values")
        if self.std is not None and any(s == 0.0 for s in self.std):
            raise ValueError("std values must be nonzero")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")


class ModelError(RuntimeError):
    """Wrapped-model exception, sanitized for the client."""


def decode_tensor(body: dict, expected_shape: tuple[int, ...]) -> np.ndarray:
    if not isinstance(body, dict):
        raise ValueError("query body must be a JSON object")
    if body.get("dtype") != "f32le":
        raise ValueError(f"unsupported dtype {body.get('dtype')!r}")
    shape = body.get("shape")
    if not isinstance(shape, list) or not all(isinstance(d, int) and d >= 1 for d in shape):
        raise ValueError(f"bad shape {shape!r}")
    if tuple(shape) != expected_shape:
        raise ValueError(f"expected shape {list(expected_shape)}, got {shape}")
    try:
        raw = base64.b64decode(body["data"], validate=True)
    except Exception as exc:
        raise ValueError(f"bad base64 payload: {exc}") from exc
    count = int(np.prod(shape))
    if len(raw) != 4 * count:
        raise ValueError(f"payload is {len(raw)} bytes, expected {4 * count}")
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - np.max(z))
    return e / e.sum()


class _WrappedModel:
    """Normalization, logits detection, simplex projection, serialization."""

    def __init__(self, cfg: AdapterConfig):
        self.cfg = cfg
        self.fn = load_entrypoint(cfg.entrypoint)
        self._lock = None if cfg.reentrant else threading.Lock()
        probe = self._raw_call(np.zeros(cfg.shape))
        self.k = probe.size
        if self.k < 2:
            raise ValueError(f"model returned {self.k} scores; need >= 2 classes")
        self.applies_softmax = not (0.99 <= float(probe.sum()) <= 1.01)

    def _raw_call(self, x: np.ndarray) -> np.ndarray:
        if self.cfg.mean is not None:
            x = x - np.asarray(self.cfg.mean)
        if self.cfg.std is not None:
            x = x / np.asarray(self.cfg.std)
        try:
            out = np.asarray(self.fn(x), dtype=np.float64).ravel()
        except Exception as exc:
            raise ModelError(f"model raised {type(exc).__name__}") from exc
        if not np.all(np.isfinite(out)):
            raise ModelError("model returned non-finite scores")
        return out

    def probs(self, x: np.ndarray) -> np.ndarray:
        if self._lock is not None:
            with self._lock:
                out = self._raw_call(x)
        else:
            out = self._raw_call(x)
        if out.size != self.k:
            raise ModelError(f"model returned {out.size} scores, declared {self.k}")
        if self.applies_softmax:
            out = softmax(out)
        out = np.clip(out, 0.0, None)
        total = out.sum()
        if total <= 0.0:
            raise ModelError("model scores sum to zero after clipping")
        return out / total


class _Handler(BaseHTTPRequestHandler):
    server_version = "VictimAdapter/0.1"

    def log_message(self, *args):  # latency lines come from the logger instead
        pass

    def _send(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path != "/v1/info":
            self._send(404, {"error": "not found"})
            return
        model = self.server.model
        self._send(200, {
            "k": model.k,
            "shape": list(model.cfg.shape),
            "concurrent_safe": model.cfg.reentrant,
            "applies_softmax": model.applies_softmax,
        })

    def do_POST(self):
        if self.path not in ("/v1/query", "/v1/query_batch"):
            self._send(404, {"error": "not found"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length))
        except (ValueError, json.JSONDecodeError):
            self._send(400, {"error": "invalid JSON body"})
            return
        if self.path == "/v1/query":
            items, single = [body], True
        else:
            items = body.get("items") if isinstance(body, dict) else None
            if not isinstance(items, list) or not items:
                self._send(400, {"error": "items must be a nonempty list"})
                return
            if len(items) > self.server.model.cfg.max_batch:
                self._send(400, {"error": f"batch larger than {self.server.model.cfg.max_batch}"})
                return
            single = False
        model = self.server.model
        results = []
        start = time.perf_counter()
        for item in items:
            try:
                x = decode_tensor(item, model.cfg.shape)
            except ValueError as exc:
                self._send(400, {"error": str(exc)})
                return
            try:
                p = model.probs(x)
            except ModelError as exc:
                self._send(500, {"error": str(exc)})
                return
            results.append([float(v) for v in p])
        latency_ms = (time.perf_counter() - start) * 1000.0
        logger.info("%s n=%d latency_ms=%.2f", self.path, len(items), latency_ms)
        self._send(200, {"probs": results[0] if single else results})


class AdapterServer:
    """Threaded HTTP server around a wrapped model; context manager."""

    def __init__(self, cfg: AdapterConfig):
        self.cfg = cfg
        self.model = _WrappedModel(cfg)
        self.httpd = ThreadingHTTPServer((cfg.host, cfg.port), _Handler)
        self.httpd.model = self.model
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    def start(self) -> "AdapterServer":
        self._thread.start()
        logger.info("serving %s (k=%d, shape=%s, applies_softmax=%s) on %s",
                    self.cfg.entrypoint, self.model.k, self.model.cfg.shape,
                    self.model.applies_softmax, self.url)
        return self

    def serve_forever(self) -> None:
        logger.info("serving %s on %s", self.cfg.entrypoint, self.url)
        self.httpd.serve_forever()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread.is_alive():
            self._thread.join(timeout=5)

    def __enter__(self) -> "AdapterServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
