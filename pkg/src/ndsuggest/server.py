"""Transports for the JSON session protocol.

* ``serve_tcp``: newline-delimited JSON over a local TCP socket, one
  session per connection.
* ``serve_pipe``: the same framing over standard input/output.
* ``build_web_app`` / ``serve_web``: WebSocket endpoint at ``/ws`` (one
  JSON message per frame) plus the static browser client, served by
  FastAPI; optional, only imported in web mode.

No ``from __future__ import annotations`` here: FastAPI must evaluate
the endpoint annotations against names imported inside the factory.
"""

import socketserver
import sys
import threading
from pathlib import Path
from typing import Optional

from .protocol import ProtocolHandler, encode
from .session import SessionConfig


def parse_address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host:
        host = "127.0.0.1"
    return host, int(port)


class _Connection(socketserver.StreamRequestHandler):
    def handle(self):
        write_lock = threading.Lock()

        def send(msg: dict) -> None:
            data = (encode(msg) + "\n").encode("utf-8")
            with write_lock:
                try:
                    self.wfile.write(data)
                    self.wfile.flush()
                except (BrokenPipeError, OSError):
                    pass

        handler = ProtocolHandler(self.server.session_config, on_event=send)
        try:
            for raw in self.rfile:
                response = handler.handle_line(raw.decode("utf-8", "replace"))
                if response is not None:
                    send(response)
        finally:
            handler.close()


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve_tcp(
    address: str,
    config: Optional[SessionConfig] = None,
    ready: Optional[threading.Event] = None,
) -> None:
    """Serve sessions over TCP until interrupted."""
    host, port = parse_address(address)
    with _Server((host, port), _Connection) as server:
        server.session_config = config or SessionConfig()
        bound = server.server_address
        print(f"listening on {bound[0]}:{bound[1]}", flush=True)
        if ready is not None:
            ready.set()
        try:
            server.serve_forever(poll_interval=0.2)
        except KeyboardInterrupt:
            pass


def serve_pipe(config: Optional[SessionConfig] = None) -> int:
    """Speak the protocol over stdin/stdout (one session)."""
    write_lock = threading.Lock()

    def send(msg: dict) -> None:
        with write_lock:
            sys.stdout.write(encode(msg) + "\n")
            sys.stdout.flush()

    handler = ProtocolHandler(config, on_event=send)
    try:
        for line in sys.stdin:
            response = handler.handle_line(line)
            if response is not None:
                send(response)
    finally:
        handler.close()
    return 0


# ---------------------------------------------------------------------------
# Browser transport

def frontend_dist() -> Optional[Path]:
    for candidate in (
        Path(__file__).resolve().parent.parent.parent / "frontend" / "dist",
        Path.cwd() / "frontend" / "dist",
    ):
        if candidate.is_dir():
            return candidate
    return None


def build_web_app(config: Optional[SessionConfig] = None, static_dir: Optional[Path] = None):
    """FastAPI app bridging WebSocket frames to the protocol handler."""
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect
    from fastapi.responses import FileResponse
    from fastapi.staticfiles import StaticFiles

    app = FastAPI()
    base_config = config or SessionConfig()
    static = static_dir or frontend_dist()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        import asyncio

        import anyio

        loop = asyncio.get_event_loop()
        outgoing: asyncio.Queue = asyncio.Queue()

        def send(msg: dict) -> None:
            # called from session threads; all frames leave via one writer
            loop.call_soon_threadsafe(outgoing.put_nowait, msg)

        async def writer():
            while True:
                msg = await outgoing.get()
                await ws.send_text(encode(msg))

        handler = ProtocolHandler(base_config, on_event=send)
        writer_task = asyncio.ensure_future(writer())
        try:
            while True:
                raw = await ws.receive_text()
                response = await anyio.to_thread.run_sync(handler.handle_line, raw)
                if response is not None:
                    send(response)
        except WebSocketDisconnect:
            pass
        finally:
            writer_task.cancel()
            handler.close()

    if static is not None:
        index = static / "index.html"

        @app.get("/")
        async def root():
            return FileResponse(index)

        app.mount("/", StaticFiles(directory=static), name="static")

    return app


def serve_web(address: str, config: Optional[SessionConfig] = None) -> None:
    import uvicorn

    host, port = parse_address(address)
    app = build_web_app(config)
    uvicorn.run(app, host=host, port=port, log_level="warning")
