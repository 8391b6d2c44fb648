import json
import socket
import threading
import time

import pytest

from ndsuggest.protocol import ProtocolHandler, encode
from ndsuggest.server import parse_address
from ndsuggest.session import SessionConfig
from tests.conftest import REFERENCE_TEXT


class TestHandler:
    def test_start_execute_roundtrip(self):
        h = ProtocolHandler()
        try:
            r = h.handle({"id": 1, "kind": "start", "conjecture": REFERENCE_TEXT})
            assert r["kind"] == "ok"
            assert r["result"]["epoch"] == 1
            assert r["result"]["proof"]["lines"][0].endswith("Open")

            r = h.handle({"id": 2, "kind": "get-suggestions"})
            pais = [s["args"] for s in r["result"]["suggestions"]]
            assert "ImpI{c:C}" in pais

            r = h.handle({"id": 3, "kind": "execute", "command": "ImpI", "args": "ImpI{c:C}"})
            assert r["kind"] == "ok" and r["result"]["epoch"] == 2
        finally:
            h.close()

    def test_error_mapping(self):
        h = ProtocolHandler()
        try:
            r = h.handle({"id": 1, "kind": "execute", "command": "ImpI", "args": "ImpI{c:C}"})
            assert r["kind"] == "error" and r["code"] == "protocol-error"
            h.handle({"id": 2, "kind": "start", "conjecture": REFERENCE_TEXT})
            r = h.handle({"id": 3, "kind": "execute", "command": "ImpI", "args": "ImpI{c:L9}"})
            assert r["kind"] == "error" and r["code"] == "tactic-error"
            r = h.handle({"id": 4, "kind": "start", "conjecture": "(a:o b:o)"})
            assert r["kind"] == "error" and r["code"] == "input-error"
            r = h.handle({"id": 5, "kind": "nonsense"})
            assert r["kind"] == "error" and r["code"] == "protocol-error"
        finally:
            h.close()

    def test_handle_line_rejects_bad_json(self):
        h = ProtocolHandler()
        try:
            r = h.handle_line("{not json")
            assert r["kind"] == "error" and r["code"] == "protocol-error"
            assert h.handle_line("   ") is None
        finally:
            h.close()

    def test_event_subscription(self):
        events = []
        h = ProtocolHandler(on_event=events.append)
        try:
            h.handle({"id": 1, "kind": "start", "conjecture": REFERENCE_TEXT})
            r = h.handle({"id": 2, "kind": "subscribe"})
            assert r["result"]["subscribed"] is True
            h.handle({"id": 3, "kind": "execute", "command": "ImpI", "args": "ImpI{c:C}"})
            deadline = time.monotonic() + 5.0
            while time.monotonic() < deadline:
                kinds = [e["event"]["kind"] for e in events]
                if "proof-updated" in kinds and "suggestions-updated" in kinds:
                    break
                time.sleep(0.01)
            kinds = [e["event"]["kind"] for e in events]
            assert "proof-updated" in kinds and "suggestions-updated" in kinds
            seqs = [e["event"]["seq"] for e in events]
            assert seqs == sorted(seqs)
        finally:
            h.close()

    def test_get_state_resync(self):
        h = ProtocolHandler()
        try:
            h.handle({"id": 1, "kind": "start", "conjecture": REFERENCE_TEXT})
            h.handle({"id": 2, "kind": "execute", "command": "ImpI", "args": "ImpI{c:C}"})
            r = h.handle({"id": 3, "kind": "get-state"})
            state = r["result"]
            assert state["epoch"] == 2
            assert state["classification"] == "HO"
            assert len(state["proof"]["lines"]) == 3
            assert any(s["command"] == "EqSubst" for s in state["suggestions"])
            assert state["resources"]["agents"]
        finally:
            h.close()

    def test_set_config_live_threshold(self):
        h = ProtocolHandler()
        try:
            h.handle({"id": 1, "kind": "start", "conjecture": REFERENCE_TEXT})
            r = h.handle({"id": 2, "kind": "set-config", "threshold": 0.1})
            assert r["kind"] == "ok"
            resources = h.handle({"id": 3, "kind": "get-resources"})["result"]
            # every baseline exceeds 0.1, so everything retires
            assert all(a["retired"] for a in resources["agents"])
        finally:
            h.close()

    def test_set_focus(self):
        h = ProtocolHandler()
        try:
            h.handle({"id": 1, "kind": "start", "conjecture": "(a:o & b:o) & (b & a)"})
            h.handle({"id": 2, "kind": "execute", "command": "AndI",
                      "args": "AndI{p1:~,p2:~,c:C}"})
            r = h.handle({"id": 3, "kind": "set-focus", "label": "L1"})
            assert r["kind"] == "ok" and r["result"]["epoch"] == 3
            r = h.handle({"id": 4, "kind": "set-focus", "label": "C"})
            assert r["kind"] == "error" and r["code"] == "focus-error"
        finally:
            h.close()


class TestTcpServer:
    def test_roundtrip_over_socket(self):
        # serve on an ephemeral port, discover it from the listening socket
        from ndsuggest.server import _Connection, _Server

        srv = _Server(("127.0.0.1", 0), _Connection)
        srv.session_config = SessionConfig()
        port = srv.server_address[1]
        t = threading.Thread(target=srv.serve_forever, kwargs={"poll_interval": 0.05},
                             daemon=True)
        t.start()
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=5.0) as sock:
                f = sock.makefile("rw", encoding="utf-8")

                def request(msg):
                    f.write(encode(msg) + "\n")
                    f.flush()
                    while True:
                        line = f.readline()
                        out = json.loads(line)
                        if out.get("kind") in ("ok", "error"):
                            return out

                r = request({"id": 1, "kind": "start", "conjecture": REFERENCE_TEXT})
                assert r["kind"] == "ok"
                r = request({"id": 2, "kind": "subscribe"})
                assert r["result"]["subscribed"] is True
                r = request({"id": 3, "kind": "execute", "command": "ImpI", "args": "ImpI{c:C}"})
                assert r["result"]["epoch"] == 2
                # events arrive interleaved; read a few lines
                sock.settimeout(5.0)
                got_event = False
                for _ in range(20):
                    line = f.readline()
                    if not line:
                        break
                    msg = json.loads(line)
                    if msg.get("kind") == "event":
                        got_event = True
                        break
                assert got_event
        finally:
            srv.shutdown()
            srv.server_close()

    def test_parse_address(self):
        assert parse_address("127.0.0.1:9100") == ("127.0.0.1", 9100)
        assert parse_address(":9100") == ("127.0.0.1", 9100)
        assert parse_address("9100") == ("127.0.0.1", 9100)


class TestWebApp:
    def test_websocket_bridge(self):
        fastapi = pytest.importorskip("fastapi")
        from fastapi.testclient import TestClient

        from ndsuggest.server import build_web_app

        app = build_web_app(SessionConfig(), static_dir=None)
        client = TestClient(app)
        with client.websocket_connect("/ws") as ws:
            ws.send_text(encode({"id": 1, "kind": "start", "conjecture": REFERENCE_TEXT}))
            r = json.loads(ws.receive_text())
            assert r["kind"] == "ok" and r["result"]["epoch"] == 1
            ws.send_text(encode({"id": 2, "kind": "get-suggestions"}))
            r = json.loads(ws.receive_text())
            assert any(s["args"] == "ImpI{c:C}" for s in r["result"]["suggestions"])
