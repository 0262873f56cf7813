"""Relay core: pairing registry, partner-only routing, delivery lifecycle.

Transport-agnostic. The network server and the simulator both drive
this same object; sessions are plain callables that receive protocol
envelopes. Time is always injected — every operation takes `now` — so
TTL behavior is deterministic under a virtual clock.

Delivery state machine: Sent -> {Delivered, Lost}; Delivered ->
{Read, Expired}; Read and Expired are terminal. A delivered message is
readable while now - delivered_at <= ttl and expires strictly after.
"""

from __future__ import annotations

import heapq
import json
import os
import tempfile
from dataclasses import dataclass
from enum import Enum
from random import Random
from typing import Callable, Iterable

from .engine import AnimoSpec, AnimoState, Shape, catalog_index, state_violation
from .errors import (
    AlreadyPaired,
    AlreadyTerminal,
    ExpiredMessage,
    InvalidState,
    NotPaired,
    NotRecipient,
    SelfPair,
    UnknownMessage,
)
from .eventlog import EventKind, EventLog
from .protocol import Envelope, Kind, state_to_payload

DEFAULT_TTL_SECS = 10.0
DEFAULT_REPLY_WINDOW_SECS = 600.0

SessionSend = Callable[[Envelope], None]


@dataclass(frozen=True, slots=True)
class Dyad:
    dyad_id: str
    user_a: str  # circle
    user_b: str  # diamond

    def partner_of(self, user_id: str) -> str:
        return self.user_b if user_id == self.user_a else self.user_a

    def shape_of(self, user_id: str) -> Shape:
        return Shape.CIRCLE if user_id == self.user_a else Shape.DIAMOND


class DeliveryState(str, Enum):
    SENT = "sent"
    DELIVERED = "delivered"
    LOST = "lost"
    READ = "read"
    EXPIRED = "expired"


@dataclass(slots=True)
class DeliveryRecord:
    msg_id: str
    sender: str
    receiver: str
    dyad_id: str
    state: DeliveryState
    sent_at: float
    delivered_at: float | None = None
    read_at: float | None = None
    expired_at: float | None = None


class PairingRegistry:
    """user -> dyad mapping; a user belongs to at most one dyad, ever.

    Shape assignment is positional and permanent: first user of the pair
    is circle, second is diamond.
    """

    def __init__(self, snapshot_path: str | None = None):
        self.snapshot_path = snapshot_path
        self.dyads: dict[str, Dyad] = {}
        self._by_user: dict[str, Dyad] = {}
        if snapshot_path is not None and os.path.exists(snapshot_path):
            self._load(snapshot_path)

    def pair(self, user_a: str, user_b: str) -> Dyad:
        if user_a == user_b:
            raise SelfPair(f"{user_a!r} cannot pair with themselves")
        for u in (user_a, user_b):
            if u in self._by_user:
                raise AlreadyPaired(f"{u!r} is already paired")
        dyad = Dyad(dyad_id=f"d{len(self.dyads) + 1:03d}", user_a=user_a, user_b=user_b)
        self.dyads[dyad.dyad_id] = dyad
        self._by_user[user_a] = dyad
        self._by_user[user_b] = dyad
        if self.snapshot_path is not None:
            self._save(self.snapshot_path)
        return dyad

    def dyad_of(self, user_id: str) -> Dyad | None:
        return self._by_user.get(user_id)

    def _save(self, path: str) -> None:
        # atomic rewrite: the snapshot is tiny and never appended
        payload = {
            "dyads": [
                {"dyad_id": d.dyad_id, "user_a": d.user_a, "user_b": d.user_b}
                for d in self.dyads.values()
            ]
        }
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def _load(self, path: str) -> None:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        for rec in payload.get("dyads", []):
            dyad = Dyad(dyad_id=rec["dyad_id"], user_a=rec["user_a"], user_b=rec["user_b"])
            self.dyads[dyad.dyad_id] = dyad
            self._by_user[dyad.user_a] = dyad
            self._by_user[dyad.user_b] = dyad


class RelayCore:
    """The server's brain, minus the sockets."""

    def __init__(
        self,
        catalog: Iterable[AnimoSpec],
        event_log: EventLog | None = None,
        ttl_secs: float = DEFAULT_TTL_SECS,
        loss: float = 0.0,
        rng: Random | None = None,
        registry_path: str | None = None,
    ):
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"loss must be in [0, 1], got {loss}")
        if ttl_secs <= 0:
            raise ValueError("ttl_secs must be positive")
        self.catalog_by_id = catalog_index(catalog)
        self.log = event_log if event_log is not None else EventLog()
        self.ttl_secs = float(ttl_secs)
        self.loss = float(loss)
        self.rng = rng if rng is not None else Random()
        self.registry = PairingRegistry(registry_path)
        self.records: dict[str, DeliveryRecord] = {}
        self.sessions: dict[str, SessionSend] = {}
        self._waiting: dict[str, str] = {}  # pairing token -> user_id
        self._expiry_heap: list[tuple[float, str]] = []
        self._msg_seq = 0
        # resuming an existing log: keep assigning fresh msg_ids after the old ones
        for ev in self.log.events:
            if ev.msg_id is not None and ev.msg_id.startswith("m"):
                try:
                    self._msg_seq = max(self._msg_seq, int(ev.msg_id[1:]))
                except ValueError:
                    pass

    # --- sessions -----------------------------------------------------------

    def attach_session(self, user_id: str, send: SessionSend) -> None:
        self.sessions[user_id] = send

    def detach_session(self, user_id: str) -> None:
        self.sessions.pop(user_id, None)

    def _push(self, user_id: str, env: Envelope) -> None:
        send = self.sessions.get(user_id)
        if send is not None:
            send(env)

    # --- pairing --------------------------------------------------------------

    def pair_users(self, user_a: str, user_b: str, now: float) -> Dyad:
        dyad = self.registry.pair(user_a, user_b)
        self.log.append(
            EventKind.PAIRED, ts=now, dyad_id=dyad.dyad_id, sender=user_a, receiver=user_b
        )
        return dyad

    def _paired_envelope(self, dyad: Dyad, user_id: str, now: float) -> Envelope:
        partner = dyad.partner_of(user_id)
        return Envelope(
            kind=Kind.PAIRED,
            ts=now,
            payload={
                "dyad_id": dyad.dyad_id,
                "user_id": user_id,
                "shape": dyad.shape_of(user_id).value,
                "partner_id": partner,
                "partner_shape": dyad.shape_of(partner).value,
                "ttl_secs": self.ttl_secs,
                "catalog": [
                    {
                        "id": s.animo_id,
                        "motion_name": s.motion_name,
                        "energy_band": s.energy_band.value,
                        "category_tag": s.category_tag.value,
                    }
                    for s in self.catalog_by_id.values()
                ],
            },
        )

    def hello(self, user_id: str, token: str | None, now: float) -> list[tuple[str, Envelope]]:
        """Handshake step: ack, and resolve pairing via the shared token.

        Returns (target_user, envelope) routing instructions; the caller
        owns actually transmitting them.
        """
        out: list[tuple[str, Envelope]] = [
            (
                user_id,
                Envelope(
                    kind=Kind.HELLO,
                    ts=now,
                    payload={"server": "animo-relay", "ttl_secs": self.ttl_secs},
                ),
            )
        ]
        dyad = self.registry.dyad_of(user_id)
        if dyad is not None:
            out.append((user_id, self._paired_envelope(dyad, user_id, now)))
            return out
        # a re-hello supersedes any token this user was waiting on
        self._waiting = {t: u for t, u in self._waiting.items() if u != user_id}
        if token is None or token == "":
            return out
        waiting = self._waiting.get(token)
        if waiting is None:
            self._waiting[token] = user_id
            return out
        del self._waiting[token]
        dyad = self.pair_users(waiting, user_id, now)
        out.append((waiting, self._paired_envelope(dyad, waiting, now)))
        out.append((user_id, self._paired_envelope(dyad, user_id, now)))
        return out

    # --- message lifecycle -----------------------------------------------------

    def send_animo(
        self,
        sender: str,
        state: AnimoState,
        now: float,
        loss: float | None = None,
        rng: Random | None = None,
    ) -> str:
        dyad = self.registry.dyad_of(sender)
        if dyad is None:
            raise NotPaired(f"{sender!r} has no partner")
        reason = state_violation(state, self.catalog_by_id)
        if reason is not None:
            raise InvalidState(reason)
        drop_p = self.loss if loss is None else loss
        draw = (self.rng if rng is None else rng).random()
        receiver = dyad.partner_of(sender)
        self._msg_seq += 1
        msg_id = f"m{self._msg_seq:06d}"
        rec = DeliveryRecord(
            msg_id=msg_id,
            sender=sender,
            receiver=receiver,
            dyad_id=dyad.dyad_id,
            state=DeliveryState.SENT,
            sent_at=now,
        )
        self.records[msg_id] = rec
        self.log.append(
            EventKind.SENT, ts=now, dyad_id=dyad.dyad_id,
            msg_id=msg_id, sender=sender, receiver=receiver,
        )
        if draw < drop_p or receiver not in self.sessions:
            # configured connectivity loss, or no partner session to hand off to
            rec.state = DeliveryState.LOST
            self.log.append(
                EventKind.LOST, ts=now, dyad_id=dyad.dyad_id,
                msg_id=msg_id, sender=sender, receiver=receiver,
            )
            return msg_id
        rec.state = DeliveryState.DELIVERED
        rec.delivered_at = now
        heapq.heappush(self._expiry_heap, (now, msg_id))
        self.log.append(
            EventKind.DELIVERED, ts=now, dyad_id=dyad.dyad_id,
            msg_id=msg_id, sender=sender, receiver=receiver,
        )
        self._push(
            receiver,
            Envelope(
                kind=Kind.ANIMO_DELIVERED,
                msg_id=msg_id,
                sender=sender,
                ts=now,
                payload={
                    **state_to_payload(state),
                    "vibrate": True,
                    "expires_at": now + self.ttl_secs,
                },
            ),
        )
        return msg_id

    def mark_read(self, receiver: str, msg_id: str, now: float) -> Envelope:
        rec = self.records.get(msg_id)
        if rec is None:
            raise UnknownMessage(f"no message {msg_id!r}")
        if receiver != rec.receiver:
            raise NotRecipient(f"{receiver!r} is not the recipient of {msg_id}")
        if rec.state is not DeliveryState.DELIVERED:
            raise AlreadyTerminal(f"{msg_id} is {rec.state.value}, not readable")
        assert rec.delivered_at is not None
        if now - rec.delivered_at > self.ttl_secs:
            # late tap: the message is gone; expire it now rather than
            # waiting for the sweep so state and log agree immediately
            self._expire(rec, now)
            raise ExpiredMessage(f"{msg_id} expired before the read arrived")
        rec.state = DeliveryState.READ
        rec.read_at = now
        self.log.append(
            EventKind.READ, ts=now, dyad_id=rec.dyad_id,
            msg_id=msg_id, sender=rec.sender, receiver=receiver,
        )
        return Envelope(
            kind=Kind.READ_ACK, msg_id=msg_id, ts=now, payload={"read_at": now}
        )

    def _expire(self, rec: DeliveryRecord, now: float) -> None:
        rec.state = DeliveryState.EXPIRED
        rec.expired_at = now
        self.log.append(
            EventKind.EXPIRED, ts=now, dyad_id=rec.dyad_id,
            msg_id=rec.msg_id, sender=rec.sender, receiver=rec.receiver,
        )
        self._push(
            rec.receiver,
            Envelope(kind=Kind.EXPIRED, msg_id=rec.msg_id, ts=now, payload={}),
        )

    def expire_sweep(self, now: float) -> int:
        """Expire every delivered message older than the TTL. Idempotent."""
        count = 0
        while self._expiry_heap and now - self._expiry_heap[0][0] > self.ttl_secs:
            _, msg_id = heapq.heappop(self._expiry_heap)
            rec = self.records[msg_id]
            if rec.state is DeliveryState.DELIVERED:
                self._expire(rec, now)
                count += 1
        return count

    # --- state-change notifications ---------------------------------------------

    def record_state_change(self, user_id: str, now: float) -> None:
        """Log a debounced band-change buzz for a paired user."""
        dyad = self.registry.dyad_of(user_id)
        if dyad is None:
            raise NotPaired(f"{user_id!r} has no partner")
        self.log.append(
            EventKind.STATE_CHANGED, ts=now, dyad_id=dyad.dyad_id, sender=user_id
        )
