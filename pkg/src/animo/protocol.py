"""Wire format: newline-delimited JSON envelopes, version 1.

One envelope per frame. The same frames travel over the raw TCP
endpoint and the browser websocket endpoint, so every client — watch
face, simulator, tests — speaks exactly this. Canonical encoding
(sorted keys, no whitespace) keeps frames byte-stable for a given
envelope, which the protocol docs rely on for byte-exact examples.

decode() is total over garbage: every malformed input maps to a typed
ProtocolError, never a crash or a half-built envelope.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .engine import AnimoState, Band, Color, Shape, state_violation
from .errors import (
    InvariantViolation,
    MalformedFrame,
    UnknownKind,
    UnsupportedVersion,
)

PROTOCOL_VERSION = 1


class Kind(str, Enum):
    HELLO = "hello"
    PAIRED = "paired"
    SEND_ANIMO = "send_animo"
    ANIMO_DELIVERED = "animo_delivered"
    MARK_READ = "mark_read"
    READ_ACK = "read_ack"
    EXPIRED = "expired"
    ERROR = "error"


@dataclass(frozen=True)
class Envelope:
    kind: Kind
    payload: dict[str, Any] = field(default_factory=dict)
    msg_id: str | None = None
    sender: str | None = None
    ts: float = 0.0
    version: int = PROTOCOL_VERSION


def state_to_payload(state: AnimoState) -> dict[str, Any]:
    return {
        "animo_id": state.animo_id,
        "color": state.color.value,
        "band": state.band.value,
        "shape": state.shape.value,
        "computed_at": state.computed_at,
    }


def state_from_payload(payload: dict[str, Any]) -> AnimoState:
    """Rebuild an AnimoState from wire fields, enforcing its invariants."""
    try:
        state = AnimoState(
            shape=Shape(payload["shape"]),
            animo_id=str(payload["animo_id"]),
            color=Color(payload["color"]),
            band=Band(payload["band"]),
            computed_at=float(payload["computed_at"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise InvariantViolation(f"bad animo state payload: {exc}") from exc
    reason = state_violation(state)
    if reason is not None:
        raise InvariantViolation(reason)
    return state


def _check_payload(kind: Kind, env: Envelope) -> None:
    p = env.payload
    if kind is Kind.HELLO:
        # client hello carries user_id; the server's hello ack carries server info
        if "user_id" in p and not isinstance(p["user_id"], str):
            raise InvariantViolation("hello user_id must be a string")
    elif kind in (Kind.SEND_ANIMO, Kind.ANIMO_DELIVERED):
        state_from_payload(p)
    elif kind in (Kind.MARK_READ, Kind.READ_ACK, Kind.EXPIRED):
        if env.msg_id is None:
            raise InvariantViolation(f"{kind.value} requires msg_id")
    elif kind is Kind.ERROR:
        if not isinstance(p.get("code"), str):
            raise InvariantViolation("error envelope requires a string code")


def encode(env: Envelope) -> bytes:
    """Serialize one envelope to a newline-terminated frame.

    Invariant-breaking envelopes (e.g. a high-band white animo) are
    rejected here, before any bytes leave the process.
    """
    _check_payload(env.kind, env)
    obj = {
        "v": env.version,
        "kind": env.kind.value,
        "msg_id": env.msg_id,
        "sender": env.sender,
        "ts": env.ts,
        "payload": env.payload,
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode() + b"\n"


def decode(frame: bytes | str) -> Envelope:
    """Parse and invariant-check one frame."""
    if isinstance(frame, bytes):
        try:
            text = frame.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedFrame(f"frame is not utf-8: {exc}") from exc
    else:
        text = frame
    text = text.strip()
    if not text:
        raise MalformedFrame("empty frame")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedFrame(f"invalid json: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedFrame("frame is not a json object")

    version = obj.get("v")
    if not isinstance(version, int):
        raise MalformedFrame("missing integer version field 'v'")
    if version != PROTOCOL_VERSION:
        raise UnsupportedVersion(f"version {version} not supported (speak {PROTOCOL_VERSION})")

    kind_raw = obj.get("kind")
    if not isinstance(kind_raw, str):
        raise MalformedFrame("missing kind")
    try:
        kind = Kind(kind_raw)
    except ValueError:
        raise UnknownKind(f"unknown kind {kind_raw!r}") from None

    msg_id = obj.get("msg_id")
    if msg_id is not None and not isinstance(msg_id, str):
        raise MalformedFrame("msg_id must be a string or null")
    sender = obj.get("sender")
    if sender is not None and not isinstance(sender, str):
        raise MalformedFrame("sender must be a string or null")
    ts = obj.get("ts", 0.0)
    if not isinstance(ts, (int, float)) or isinstance(ts, bool):
        raise MalformedFrame("ts must be a number")
    payload = obj.get("payload", {})
    if not isinstance(payload, dict):
        raise MalformedFrame("payload must be an object")

    env = Envelope(
        kind=kind, payload=payload, msg_id=msg_id, sender=sender, ts=ts, version=version
    )
    _check_payload(kind, env)
    return env
