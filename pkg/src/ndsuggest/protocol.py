"""JSON message protocol spoken over sockets, pipes and WebSockets.

See ``docs/protocol.md`` for the schemas.  A ``ProtocolHandler`` owns at
most one session and turns request dicts into response dicts; transports
only frame messages and pump subscription events.
"""

from __future__ import annotations

import dataclasses
import json
import queue
import threading
from typing import Any, Callable, Optional

from .errors import ProverError
from .session import Session, SessionConfig


def encode(msg: dict) -> str:
    return json.dumps(msg, separators=(",", ":"), sort_keys=True)


def decode(line: str) -> dict:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"not valid JSON: {e}") from e
    if not isinstance(msg, dict):
        raise ProtocolError("messages must be JSON objects")
    return msg


class ProtocolError(ProverError):
    code = "protocol-error"


def config_from_payload(payload: dict, base: SessionConfig) -> SessionConfig:
    known = {
        "mode": str,
        "threshold": float,
        "window": int,
        "penalty": float,
        "min_active": int,
        "second_chance": float,
        "max_results": int,
        "prover_label": str,
        "atom_limit": int,
        "debounce_ms": float,
        "resource_interval_ms": float,
    }
    kw: dict[str, Any] = {}
    for key, conv in known.items():
        if key in payload:
            try:
                kw[key] = conv(payload[key])
            except (TypeError, ValueError) as e:
                raise ProtocolError(f"bad config value for {key}: {payload[key]!r}") from e
    if "exclude" in payload:
        excl = payload["exclude"]
        if not isinstance(excl, list) or not all(isinstance(x, str) for x in excl):
            raise ProtocolError("exclude must be a list of command names")
        kw["excluded_commands"] = frozenset(excl)
    if "enabled_agents" in payload:
        enabled = payload["enabled_agents"]
        if not isinstance(enabled, list) or not all(isinstance(x, str) for x in enabled):
            raise ProtocolError("enabled_agents must be a list of agent ids")
        kw["enabled_agents"] = frozenset(enabled)
    unknown = set(payload) - set(known) - {"exclude", "enabled_agents"}
    if unknown:
        raise ProtocolError(f"unknown config field(s): {sorted(unknown)}")
    return dataclasses.replace(base, **kw)


class ProtocolHandler:
    """Stateful request dispatcher for one connection."""

    def __init__(
        self,
        base_config: SessionConfig | None = None,
        on_event: Optional[Callable[[dict], None]] = None,
    ):
        self.base_config = base_config or SessionConfig()
        self.session: Optional[Session] = None
        self.on_event = on_event
        self._event_queue: Optional[queue.Queue] = None
        self._pump: Optional[threading.Thread] = None
        self._pump_stop = threading.Event()

    # -- event pump -------------------------------------------------------------

    def _start_pump(self) -> None:
        assert self.session is not None
        self._stop_pump()
        self._pump_stop.clear()
        self._event_queue = self.session.subscribe()
        q = self._event_queue

        def pump():
            while not self._pump_stop.is_set():
                try:
                    ev = q.get(timeout=0.1)
                except queue.Empty:
                    continue
                if self.on_event is not None:
                    self.on_event(
                        {
                            "kind": "event",
                            "event": {
                                "seq": ev.seq,
                                "kind": ev.kind,
                                "epoch": ev.epoch,
                                "payload": ev.payload,
                            },
                        }
                    )

        self._pump = threading.Thread(target=pump, daemon=True, name="event-pump")
        self._pump.start()

    def _stop_pump(self) -> None:
        self._pump_stop.set()
        if self._pump is not None:
            self._pump.join(timeout=1.0)
            self._pump = None
        if self._event_queue is not None and self.session is not None:
            self.session.unsubscribe(self._event_queue)
            self._event_queue = None

    def close(self) -> None:
        self._stop_pump()
        if self.session is not None:
            self.session.close()
            self.session = None

    # -- dispatch -------------------------------------------------------------------

    def handle_line(self, line: str) -> Optional[dict]:
        line = line.strip()
        if not line:
            return None
        try:
            msg = decode(line)
        except ProtocolError as e:
            return {"id": None, "kind": "error", "code": e.code, "message": str(e)}
        return self.handle(msg)

    def handle(self, msg: dict) -> dict:
        msg_id = msg.get("id")
        kind = msg.get("kind")
        try:
            result = self._dispatch(kind, msg)
            return {"id": msg_id, "kind": "ok", "result": result}
        except ProverError as e:
            return {
                "id": msg_id,
                "kind": "error",
                "code": getattr(e, "code", "error"),
                "message": str(e),
            }

    def _require_session(self) -> Session:
        if self.session is None:
            raise ProtocolError("no session; send a start request first")
        return self.session

    def _dispatch(self, kind: str, msg: dict) -> dict:
        if kind == "start":
            conjecture = msg.get("conjecture")
            if not isinstance(conjecture, str):
                raise ProtocolError("start needs a conjecture string")
            config = config_from_payload(msg.get("config", {}), self.base_config)
            if self.session is not None:
                self.close()
            self.session = Session.start(conjecture, config)
            if self.on_event is not None and self._event_queue is None:
                pass  # events only flow after an explicit subscribe
            return {"epoch": self.session.epoch, "proof": self.session.proof_payload()}

        if kind == "execute":
            s = self._require_session()
            command = msg.get("command")
            args = msg.get("args")
            if not isinstance(command, str) or not isinstance(args, str):
                raise ProtocolError("execute needs command and args strings")
            s.execute(command, args)
            return {"epoch": s.epoch, "proof": s.proof_payload()}

        if kind == "get-suggestions":
            s = self._require_session()
            return {"epoch": s.epoch, "suggestions": s.suggestion_payloads()}

        if kind == "get-state":
            s = self._require_session()
            cls = s.classification()
            return {
                "epoch": s.epoch,
                "proof": s.proof_payload(),
                "suggestions": s.suggestion_payloads(),
                "classification": None if cls is None else str(cls),
                "resources": s.resource_payload(),
            }

        if kind == "get-resources":
            s = self._require_session()
            return s.resource_payload()

        if kind == "set-focus":
            s = self._require_session()
            label = msg.get("label")
            if not isinstance(label, str):
                raise ProtocolError("set-focus needs a label string")
            s.set_focus(label)
            return {"epoch": s.epoch, "proof": s.proof_payload()}

        if kind == "subscribe":
            self._require_session()
            self._start_pump()
            return {"subscribed": True}

        if kind == "set-config":
            s = self._require_session()
            payload = {k: v for k, v in msg.items() if k not in ("id", "kind")}
            s.set_config(config_from_payload(payload, s.config))
            return {"applied": True}

        raise ProtocolError(f"unknown request kind {kind!r}")
