"""Loopback HTTP stub: serves an attestation document at both well-known
paths and answers JSON-RPC tools/call requests from a behavior map.

Used by the end-to-end tests and the demo script. The served document bytes
are exactly the configured bytes, the same at both discovery paths, and
per-route request counters remain readable after shutdown.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Mapping

from .admission import WELL_KNOWN_PATHS
from .sad import AttestationDocument, serialize_document

__all__ = ["StubServer", "StubServerConfig", "serve"]


@dataclass
class StubServerConfig:
    """What the stub serves. ``sad_bytes`` of None means the server is
    unattested and 404s both well-known paths. Behavior values are either a
    constant JSON result or a callable taking the tools/call arguments."""

    sad_bytes: bytes | None = None
    tool_behaviors: Mapping[str, Any] = field(default_factory=dict)
    host: str = "127.0.0.1"
    port: int = 0
    mcp_path: str = "/mcp"

    @classmethod
    def for_document(
        cls, document: AttestationDocument, tool_behaviors: Mapping[str, Any] | None = None, **kwargs: Any
    ) -> "StubServerConfig":
        return cls(
            sad_bytes=serialize_document(document).encode("utf-8"),
            tool_behaviors=dict(tool_behaviors or {}),
            **kwargs,
        )


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, format: str, *args: Any) -> None:  # noqa: A002 - stdlib signature
        pass

    def _count(self) -> None:
        server: _Server = self.server  # type: ignore[assignment]
        with server.counter_lock:
            key = f"{self.command} {self.path}"
            server.counters[key] = server.counters.get(key, 0) + 1

    def _send(self, status: int, body: bytes, content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:
        self._count()
        server: _Server = self.server  # type: ignore[assignment]
        config = server.config
        if self.path in WELL_KNOWN_PATHS:
            if config.sad_bytes is None:
                self._send(404, b'{"error": "no attestation document"}')
            else:
                self._send(200, config.sad_bytes)
            return
        self._send(404, b'{"error": "not found"}')

    def do_POST(self) -> None:
        self._count()
        server: _Server = self.server  # type: ignore[assignment]
        config = server.config
        if self.path != config.mcp_path:
            self._send(404, b'{"error": "not found"}')
            return
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw)
        except ValueError:
            self._send(
                200,
                json.dumps(
                    {"jsonrpc": "2.0", "id": None,
                     "error": {"code": -32700, "message": "parse error"}}
                ).encode("utf-8"),
            )
            return
        self._send(200, json.dumps(self._dispatch(config, payload)).encode("utf-8"))

    @staticmethod
    def _dispatch(config: StubServerConfig, payload: Any) -> dict[str, Any]:
        request_id = payload.get("id") if isinstance(payload, dict) else None
        if not isinstance(payload, dict) or payload.get("method") != "tools/call":
            return {
                "jsonrpc": "2.0",
                "id": request_id,
                "error": {"code": -32601, "message": "method not found"},
            }
        params = payload.get("params") or {}
        name = params.get("name")
        behavior = config.tool_behaviors.get(name)
        if behavior is None:
            return {
                "jsonrpc": "2.0",
                "id": request_id,
                "error": {"code": -32602, "message": f"unknown tool: {name!r}"},
            }
        arguments = params.get("arguments") or {}
        result = behavior(arguments) if callable(behavior) else behavior
        return {"jsonrpc": "2.0", "id": request_id, "result": result}


class _Server(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, config: StubServerConfig) -> None:
        super().__init__((config.host, config.port), _Handler)
        self.config = config
        self.counters: dict[str, int] = {}
        self.counter_lock = threading.Lock()


class StubServer:
    """Running stub plus its counters. ``shutdown`` is idempotent and leaves
    the counters readable."""

    def __init__(self, config: StubServerConfig) -> None:
        self._server = _Server(config)
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.05), daemon=True
        )
        self._thread.start()
        self._down = False

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def counters(self) -> dict[str, int]:
        with self._server.counter_lock:
            return dict(self._server.counters)

    def tools_call_count(self, mcp_path: str = "/mcp") -> int:
        return self.counters.get(f"POST {mcp_path}", 0)

    def shutdown(self) -> None:
        if self._down:
            return
        self._down = True
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)


def serve(config: StubServerConfig) -> StubServer:
    """Start the stub on a background thread and return its handle. Binding
    failures (port already taken) raise OSError."""
    return StubServer(config)
