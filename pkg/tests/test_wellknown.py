"""Loopback attestation/tool stub: discovery routes, dispatch, counters."""

from __future__ import annotations

import json
import urllib.error
import urllib.request

import pytest

from atsa import (
    StubServer,
    StubServerConfig,
    WELL_KNOWN_PATHS,
    serialize_document,
    serve,
)


def _get(url):
    try:
        with urllib.request.urlopen(url, timeout=5) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as err:
        return err.code, err.read()


def _post(url, payload):
    body = payload if isinstance(payload, bytes) else json.dumps(payload).encode("utf-8")
    req = urllib.request.Request(
        url, data=body, headers={"Content-Type": "application/json"}, method="POST"
    )
    try:
        with urllib.request.urlopen(req, timeout=5) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


@pytest.fixture
def server(signed_doc):
    config = StubServerConfig.for_document(
        signed_doc, tool_behaviors={"list_labels": {"labels": ["inbox", "sent"]}}
    )
    stub = serve(config)
    yield stub
    stub.shutdown()


def test_sad_served_byte_identically_at_both_paths(server, signed_doc):
    expected = serialize_document(signed_doc).encode("utf-8")
    for path in WELL_KNOWN_PATHS:
        status, body = _get(server.url + path)
        assert status == 200
        assert body == expected


def test_unattested_server_404s_both_paths():
    stub = serve(StubServerConfig(sad_bytes=None, tool_behaviors={}))
    try:
        for path in WELL_KNOWN_PATHS:
            status, _ = _get(stub.url + path)
            assert status == 404
    finally:
        stub.shutdown()


def test_unknown_path_is_404(server):
    status, _ = _get(server.url + "/.well-known/other")
    assert status == 404
    status, _ = _get(server.url + "/")
    assert status == 404


def test_tools_call_constant_behavior(server):
    status, resp = _post(
        server.url + "/mcp",
        {"jsonrpc": "2.0", "id": 7, "method": "tools/call",
         "params": {"name": "list_labels", "arguments": {}}},
    )
    assert status == 200
    assert resp == {"jsonrpc": "2.0", "id": 7, "result": {"labels": ["inbox", "sent"]}}


def test_tools_call_callable_behavior(signed_doc):
    config = StubServerConfig.for_document(
        signed_doc, tool_behaviors={"echo": lambda args: {"got": args}}
    )
    stub = serve(config)
    try:
        _, resp = _post(
            stub.url + "/mcp",
            {"jsonrpc": "2.0", "id": 1, "method": "tools/call",
             "params": {"name": "echo", "arguments": {"a": 1}}},
        )
        assert resp["result"] == {"got": {"a": 1}}
    finally:
        stub.shutdown()


def test_unknown_tool_is_invalid_params(server):
    _, resp = _post(
        server.url + "/mcp",
        {"jsonrpc": "2.0", "id": 2, "method": "tools/call",
         "params": {"name": "delete_everything", "arguments": {}}},
    )
    assert resp["error"]["code"] == -32602


def test_unknown_method_is_method_not_found(server):
    _, resp = _post(
        server.url + "/mcp", {"jsonrpc": "2.0", "id": 3, "method": "tools/list"}
    )
    assert resp["error"]["code"] == -32601


def test_parse_error_is_minus_32700(server):
    _, resp = _post(server.url + "/mcp", b"{nope")
    assert resp["error"]["code"] == -32700


def test_counters_track_routes(server):
    _get(server.url + WELL_KNOWN_PATHS[0])
    _get(server.url + WELL_KNOWN_PATHS[0])
    _get(server.url + WELL_KNOWN_PATHS[1])
    assert server.tools_call_count() == 0
    _post(
        server.url + "/mcp",
        {"jsonrpc": "2.0", "id": 1, "method": "tools/call",
         "params": {"name": "list_labels", "arguments": {}}},
    )
    counters = server.counters
    assert counters[f"GET {WELL_KNOWN_PATHS[0]}"] == 2
    assert counters[f"GET {WELL_KNOWN_PATHS[1]}"] == 1
    assert server.tools_call_count() == 1


def test_shutdown_is_idempotent_and_preserves_counters(signed_doc):
    stub = serve(StubServerConfig.for_document(signed_doc, tool_behaviors={}))
    _get(stub.url + WELL_KNOWN_PATHS[0])
    stub.shutdown()
    stub.shutdown()
    assert stub.counters[f"GET {WELL_KNOWN_PATHS[0]}"] == 1
    with pytest.raises(OSError):
        urllib.request.urlopen(stub.url + WELL_KNOWN_PATHS[0], timeout=1)


def test_for_document_serializes_once(signed_doc):
    config = StubServerConfig.for_document(signed_doc, tool_behaviors={})
    assert config.sad_bytes == serialize_document(signed_doc).encode("utf-8")
