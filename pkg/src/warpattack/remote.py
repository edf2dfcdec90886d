"""Wire protocol for remote victims, the HTTP client, and an in-repo mock
server used by feature-gated remote tests.

Protocol (HTTP/1.1, JSON bodies):
  GET  /v1/info        -> {"k": int, "shape": [T,H,W,C], "concurrent_safe": bool}
  POST /v1/query       -> {"shape": [T,H,W,C], "dtype": "f32le",
                           "data": base64 row-major little-endian f32}
                          response {"probs": [K floats]}
  POST /v1/query_batch -> {"items": [<query bodies>]} -> {"probs": [[...], ...]}
Errors: 400 with {"error": str} for shape/dtype mismatch; 503 for busy
(the client retries with capped exponential backoff, max 3 retries).
"""
from __future__ import annotations

import base64
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import requests

from .core import VideoTensor
from .losses import ProbVector
from .victims import VictimInfo, VictimOracle

__all__ = [
    "encode_tensor",
    "decode_tensor",
    "RemoteVictim",
    "RemoteTransportError",
    "RemoteProtocolError",
    "MockVictimServer",
]


def encode_tensor(arr: np.ndarray) -> dict:
    data = np.ascontiguousarray(arr, dtype="<f4").tobytes(order="C")
    return {
        "shape": [int(d) for d in arr.shape],
        "dtype": "f32le",
        "data": base64.b64encode(data).decode("ascii"),
    }


def decode_tensor(body: dict) -> np.ndarray:
    if body.get("dtype") != "f32le":
        raise ValueError(f"unsupported dtype {body.get('dtype')!r}")
    shape = body.get("shape")
    if not isinstance(shape, list) or not all(isinstance(d, int) and d >= 1 for d in shape):
        raise ValueError(f"bad shape {shape!r}")
    try:
        raw = base64.b64decode(body["data"], validate=True)
    except Exception as exc:
        raise ValueError(f"bad base64 payload: {exc}") from exc
    count = int(np.prod(shape))
    if len(raw) != 4 * count:
        raise ValueError(f"payload is {len(raw)} bytes, expected {4 * count}")
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)


class RemoteTransportError(RuntimeError):
    pass


class RemoteProtocolError(RuntimeError):
    pass


class RemoteVictim(VictimOracle):
    """Client for the wire protocol above."""

    def __init__(self, endpoint: str, timeout: float = 30.0, max_retries: int = 3,
                 backoff: float = 0.1, backoff_cap: float = 2.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.backoff_cap = backoff_cap
        self._info: VictimInfo | None = None

    def _request(self, method: str, path: str, body: dict | None = None) -> dict:
        url = self.endpoint + path
        for attempt in range(self.max_retries + 1):
            try:
                if method == "GET":
                    resp = requests.get(url, timeout=self.timeout)
                else:
                    resp = requests.post(url, json=body, timeout=self.timeout)
            except requests.RequestException as exc:
                raise RemoteTransportError(f"{method} {url}: {exc}") from exc
            if resp.status_code == 503 and attempt < self.max_retries:
                time.sleep(min(self.backoff * 2**attempt, self.backoff_cap))
                continue
            if resp.status_code != 200:
                try:
                    detail = resp.json().get("error", resp.text)
                except ValueError:
                    detail = resp.text
                raise RemoteProtocolError(f"{method} {url}: HTTP {resp.status_code}: {detail}")
            try:
                return resp.json()
            except ValueError as exc:
                raise RemoteProtocolError(f"{method} {url}: non-JSON response") from exc
        raise RemoteTransportError(f"{method} {url}: retries exhausted")

    def info(self) -> VictimInfo:
        if self._info is None:
            data = self._request("GET", "/v1/info")
            try:
                self._info = VictimInfo(
                    k=int(data["k"]),
                    shape=tuple(int(d) for d in data["shape"]),
                    concurrent_safe=bool(data.get("concurrent_safe", False)),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise RemoteProtocolError(f"malformed /v1/info response: {data}") from exc
        return self._info

    def query(self, x: VideoTensor) -> ProbVector:
        self._check_shape(x)  # before any network call
        data = self._request("POST", "/v1/query", encode_tensor(x.data))
        probs = data.get("probs")
        if not isinstance(probs, list):
            raise RemoteProtocolError(f"malformed /v1/query response: {data}")
        return ProbVector(np.asarray(probs, dtype=np.float64))

    def query_batch(self, xs: list[VideoTensor]) -> list[ProbVector]:
        for x in xs:
            self._check_shape(x)
        body = {"items": [encode_tensor(x.data) for x in xs]}
        data = self._request("POST", "/v1/query_batch", body)
        probs = data.get("probs")
        if not isinstance(probs, list) or len(probs) != len(xs):
            raise RemoteProtocolError(f"malformed /v1/query_batch response: {data}")
        return [ProbVector(np.asarray(p, dtype=np.float64)) for p in probs]


class _Handler(BaseHTTPRequestHandler):
    server_version = "MockVictim/1.0"

    def log_message(self, *args):  # quiet in tests
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
        info = self.server.victim.info()
        self._send(200, {
            "k": info.k,
            "shape": list(info.shape),
            "concurrent_safe": info.concurrent_safe,
        })

    def do_POST(self):
        if self.server.busy_responses > 0:
            self.server.busy_responses -= 1
            self._send(503, {"error": "model busy"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length))
        except (ValueError, json.JSONDecodeError):
            self._send(400, {"error": "invalid JSON body"})
            return
        if self.path == "/v1/query":
            self._handle_items([body], single=True)
        elif self.path == "/v1/query_batch":
            items = body.get("items")
            if not isinstance(items, list) or not items:
                self._send(400, {"error": "items must be a nonempty list"})
                return
            self._handle_items(items, single=False)
        else:
            self._send(404, {"error": "not found"})

    def _handle_items(self, items: list, single: bool) -> None:
        victim = self.server.victim
        expected = victim.info().shape
        results = []
        for item in items:
            try:
                arr = decode_tensor(item)
            except ValueError as exc:
                self._send(400, {"error": str(exc)})
                return
            if tuple(arr.shape) != expected:
                self._send(400, {"error": f"expected shape {list(expected)}, got {list(arr.shape)}"})
                return
            probs = victim.query(VideoTensor(arr))
            results.append([float(p) for p in probs.probs])
        self._send(200, {"probs": results[0] if single else results})


class MockVictimServer:
    """Serve an in-process victim over the wire protocol, in a thread."""

    def __init__(self, victim: VictimOracle, port: int = 0):
        self.httpd = ThreadingHTTPServer(("127.0.0.1", port), _Handler)
        self.httpd.victim = victim
        self.httpd.busy_responses = 0  # tests set this to exercise 503 retries
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    def __enter__(self) -> "MockVictimServer":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        self._thread.join(timeout=5)
