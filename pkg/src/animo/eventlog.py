"""Append-only event log: one JSON object per line, strictly increasing seq.

The log is the system of record — analytics never looks at live relay
state, only at what was appended here. Appends are serialized through a
single lock so seq stays strictly increasing no matter who is writing.
Lines are written with sorted keys and no whitespace, and None fields
are omitted, so a given event always serializes to the same bytes.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

from .errors import CorruptLog


class EventKind(str, Enum):
    PAIRED = "paired"
    SENT = "sent"
    DELIVERED = "delivered"
    LOST = "lost"
    READ = "read"
    EXPIRED = "expired"
    STATE_CHANGED = "state_changed"


@dataclass(frozen=True, slots=True)
class Event:
    seq: int
    ts: float
    kind: EventKind
    dyad_id: str
    msg_id: str | None = None
    sender: str | None = None
    receiver: str | None = None

    def to_line(self) -> str:
        obj: dict[str, object] = {
            "seq": self.seq,
            "ts": self.ts,
            "kind": self.kind.value,
            "dyad_id": self.dyad_id,
        }
        if self.msg_id is not None:
            obj["msg_id"] = self.msg_id
        if self.sender is not None:
            obj["sender"] = self.sender
        if self.receiver is not None:
            obj["receiver"] = self.receiver
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def parse_event_line(line: str, lineno: int = 0) -> Event:
    try:
        obj = json.loads(line)
        return Event(
            seq=int(obj["seq"]),
            ts=float(obj["ts"]),
            kind=EventKind(obj["kind"]),
            dyad_id=str(obj["dyad_id"]),
            msg_id=obj.get("msg_id"),
            sender=obj.get("sender"),
            receiver=obj.get("receiver"),
        )
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise CorruptLog(f"event log line {lineno}: {exc}") from exc


def iter_events(path: str) -> Iterator[Event]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                yield parse_event_line(line, lineno)


def read_events(path: str) -> list[Event]:
    return list(iter_events(path))


class EventLog:
    """Single-writer append log. path=None keeps events in memory only."""

    def __init__(self, path: str | None = None):
        self.path = path
        self.events: list[Event] = []
        self._lock = threading.Lock()
        self._seq = 0
        self._fh = None
        if path is not None:
            if os.path.exists(path):
                for ev in iter_events(path):
                    if ev.seq <= self._seq:
                        raise CorruptLog(f"seq not strictly increasing at {ev.seq}")
                    self._seq = ev.seq
                    self.events.append(ev)
            self._fh = open(path, "a", encoding="utf-8")

    def append(
        self,
        kind: EventKind,
        ts: float,
        dyad_id: str,
        msg_id: str | None = None,
        sender: str | None = None,
        receiver: str | None = None,
    ) -> Event:
        with self._lock:
            self._seq += 1
            ev = Event(
                seq=self._seq,
                ts=ts,
                kind=kind,
                dyad_id=dyad_id,
                msg_id=msg_id,
                sender=sender,
                receiver=receiver,
            )
            self.events.append(ev)
            if self._fh is not None:
                self._fh.write(ev.to_line() + "\n")
                self._fh.flush()
            return ev

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "EventLog":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()
