"""Network front for the relay core.

Two endpoints speaking the same newline-delimited envelope protocol:

* a raw TCP port (simulator replays, scripted clients, tests);
* a websocket port for the browser watch face — one envelope per
  websocket text message.

All connections share one asyncio loop, so relay-core mutations and
event-log appends are naturally serialized; per-connection frame order
is preserved by the per-connection reader loop and outbound queue. A
background task sweeps expiries once a second on the injected clock.
"""

from __future__ import annotations

import asyncio
import logging
import time
from typing import Callable
from urllib.parse import parse_qs, urlsplit

from websockets.asyncio.server import ServerConnection, serve as ws_serve

from .errors import AnimoError, ProtocolError
from .protocol import Envelope, Kind, decode, encode, state_from_payload
from .relay import RelayCore

log = logging.getLogger("animo.server")


def error_code(exc: AnimoError) -> str:
    # class name -> snake_case wire code, e.g. NotPaired -> not_paired
    name = type(exc).__name__
    return "".join(("_" + c.lower()) if c.isupper() else c for c in name).lstrip("_")


class _Session:
    """One connected client, transport-agnostic."""

    def __init__(self, server: "RelayServer", send_raw: Callable[[bytes], None]):
        self.server = server
        self.send_raw = send_raw
        self.user_id: str | None = None

    def send(self, env: Envelope) -> None:
        self.send_raw(encode(env))

    def close_user(self) -> None:
        if self.user_id is not None:
            self.server.core.detach_session(self.user_id)
            self.user_id = None

    def handle_frame(self, frame: bytes | str) -> None:
        now = self.server.clock()
        try:
            env = decode(frame)
        except ProtocolError as exc:
            self.send(
                Envelope(kind=Kind.ERROR, ts=now,
                         payload={"code": error_code(exc), "detail": str(exc)})
            )
            return
        try:
            self._dispatch(env, now)
        except AnimoError as exc:
            self.send(
                Envelope(kind=Kind.ERROR, ts=now, msg_id=env.msg_id,
                         payload={"code": error_code(exc), "detail": str(exc)})
            )

    def _dispatch(self, env: Envelope, now: float) -> None:
        core = self.server.core
        if env.kind is Kind.HELLO:
            user_id = env.payload.get("user_id") or env.sender
            if not user_id:
                self.send(
                    Envelope(kind=Kind.ERROR, ts=now,
                             payload={"code": "invariant_violation",
                                      "detail": "hello requires user_id"})
                )
                return
            self.hello(user_id, env.payload.get("token"), now)
            return
        if self.user_id is None:
            self.send(
                Envelope(kind=Kind.ERROR, ts=now,
                         payload={"code": "not_paired", "detail": "say hello first"})
            )
            return
        if env.kind is Kind.SEND_ANIMO:
            core.send_animo(self.user_id, state_from_payload(env.payload), now=now)
        elif env.kind is Kind.MARK_READ:
            assert env.msg_id is not None  # guaranteed by decode
            self.send(core.mark_read(self.user_id, env.msg_id, now=now))
        else:
            self.send(
                Envelope(kind=Kind.ERROR, ts=now,
                         payload={"code": "unknown_kind",
                                  "detail": f"clients do not send {env.kind.value}"})
            )

    def hello(self, user_id: str, token: str | None, now: float) -> None:
        core = self.server.core
        self.user_id = user_id
        core.attach_session(user_id, self.send)
        for target, out in core.hello(user_id, token, now):
            if target == user_id:
                self.send(out)
            else:
                core_send = core.sessions.get(target)
                if core_send is not None:
                    core_send(out)


class RelayServer:
    def __init__(
        self,
        core: RelayCore,
        host: str = "127.0.0.1",
        port: int = 7464,
        ws_port: int = 7465,
        clock: Callable[[], float] = time.time,
        sweep_interval: float = 1.0,
    ):
        self.core = core
        self.host = host
        self.port = port
        self.ws_port = ws_port
        self.clock = clock
        self.sweep_interval = sweep_interval
        self._tcp_server: asyncio.Server | None = None
        self._ws_server = None
        self._sweeper: asyncio.Task | None = None

    async def start(self) -> None:
        self._tcp_server = await asyncio.start_server(self._tcp_conn, self.host, self.port)
        self._ws_server = await ws_serve(self._ws_conn, self.host, self.ws_port)
        self._sweeper = asyncio.create_task(self._sweep_loop())
        log.info("relay listening on tcp %s:%d, ws %s:%d",
                 self.host, self.port, self.host, self.ws_port)

    async def stop(self) -> None:
        if self._sweeper is not None:
            self._sweeper.cancel()
        if self._tcp_server is not None:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
        if self._ws_server is not None:
            self._ws_server.close()
            await self._ws_server.wait_closed()

    async def serve_forever(self) -> None:
        await self.start()
        assert self._tcp_server is not None
        async with self._tcp_server:
            await self._tcp_server.serve_forever()

    async def _sweep_loop(self) -> None:
        while True:
            await asyncio.sleep(self.sweep_interval)
            self.core.expire_sweep(self.clock())

    async def _tcp_conn(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        session = _Session(self, lambda data: writer.write(data))
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                session.handle_frame(line)
                await writer.drain()
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            session.close_user()
            writer.close()

    async def _ws_conn(self, connection: ServerConnection) -> None:
        queue: asyncio.Queue[bytes] = asyncio.Queue()
        session = _Session(self, queue.put_nowait)

        async def pump() -> None:
            while True:
                await connection.send((await queue.get()).decode())

        sender = asyncio.create_task(pump())
        try:
            # query-string hello lets the watch face connect with plain url params
            query = parse_qs(urlsplit(connection.request.path).query)
            user_id = (query.get("user_id") or [None])[0]
            if user_id:
                token = (query.get("token") or [None])[0]
                session.hello(user_id, token, self.clock())
            async for message in connection:
                session.handle_frame(message)
        except Exception:
            pass
        finally:
            sender.cancel()
            session.close_user()
