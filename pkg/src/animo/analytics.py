"""Event-log replay and usage statistics.

Pure batch computation over an event list: validate the log (every
message must walk a legal delivery state machine, every user belongs to
at most one dyad, routing stays inside dyads), then reduce it to the
per-dyad counters the usage reports are built from.

A "reply" is a Read matched to a later Sent by the same reader within
the reply window (greedy earliest match, strictly-after / inclusive-end
window: read_ts < sent_ts <= read_ts + window, each Sent consumable by
at most one Read). Percentages are integer, half-up, relative to sent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import CorruptLog
from .eventlog import Event, EventKind
from .relay import DEFAULT_REPLY_WINDOW_SECS

_LEGAL_NEXT: dict[str | None, set[EventKind]] = {
    None: {EventKind.SENT},
    EventKind.SENT.value: {EventKind.DELIVERED, EventKind.LOST},
    EventKind.DELIVERED.value: {EventKind.READ, EventKind.EXPIRED},
}


@dataclass(slots=True)
class MessageTrace:
    msg_id: str
    dyad_id: str
    sender: str
    receiver: str
    state: EventKind
    sent_at: float
    delivered_at: float | None = None
    read_at: float | None = None
    expired_at: float | None = None


@dataclass(slots=True)
class Replay:
    """Validated view of a log: dyad membership plus per-message traces."""

    dyads: dict[str, tuple[str, str]] = field(default_factory=dict)
    messages: dict[str, MessageTrace] = field(default_factory=dict)
    events: list[Event] = field(default_factory=list)


def replay(events: list[Event], ttl: float | None = None) -> Replay:
    """Validate and index a log; raises CorruptLog on any illegal record.

    When ttl is given, Read events are additionally checked against the
    ephemerality window (read_at - delivered_at <= ttl).
    """
    out = Replay(events=list(events))
    user_dyad: dict[str, str] = {}
    last_seq = 0
    for ev in events:
        if ev.seq <= last_seq:
            raise CorruptLog(f"seq not strictly increasing at {ev.seq}")
        last_seq = ev.seq

        if ev.kind is EventKind.PAIRED:
            if ev.dyad_id in out.dyads:
                raise CorruptLog(f"dyad {ev.dyad_id} paired twice")
            if ev.sender is None or ev.receiver is None or ev.sender == ev.receiver:
                raise CorruptLog(f"seq {ev.seq}: malformed pairing")
            for u in (ev.sender, ev.receiver):
                if u in user_dyad:
                    raise CorruptLog(f"user {u!r} is a member of two dyads")
                user_dyad[u] = ev.dyad_id
            out.dyads[ev.dyad_id] = (ev.sender, ev.receiver)
            continue

        if ev.dyad_id not in out.dyads:
            raise CorruptLog(f"seq {ev.seq}: unknown dyad {ev.dyad_id}")

        if ev.kind is EventKind.STATE_CHANGED:
            if ev.sender not in out.dyads[ev.dyad_id]:
                raise CorruptLog(f"seq {ev.seq}: state change by non-member")
            continue

        # everything else is a message lifecycle event
        if ev.msg_id is None or ev.sender is None or ev.receiver is None:
            raise CorruptLog(f"seq {ev.seq}: {ev.kind.value} missing message fields")
        pair = out.dyads[ev.dyad_id]
        if {ev.sender, ev.receiver} != set(pair):
            raise CorruptLog(
                f"seq {ev.seq}: ({ev.sender}, {ev.receiver}) is not dyad {ev.dyad_id}"
            )
        trace = out.messages.get(ev.msg_id)
        prev = None if trace is None else trace.state.value
        if ev.kind not in _LEGAL_NEXT.get(prev, set()):
            raise CorruptLog(
                f"seq {ev.seq}: illegal transition {prev} -> {ev.kind.value} for {ev.msg_id}"
            )
        if trace is None:
            out.messages[ev.msg_id] = MessageTrace(
                msg_id=ev.msg_id,
                dyad_id=ev.dyad_id,
                sender=ev.sender,
                receiver=ev.receiver,
                state=ev.kind,
                sent_at=ev.ts,
            )
            continue
        if (trace.sender, trace.receiver, trace.dyad_id) != (ev.sender, ev.receiver, ev.dyad_id):
            raise CorruptLog(f"seq {ev.seq}: message {ev.msg_id} changed endpoints")
        trace.state = ev.kind
        if ev.kind is EventKind.DELIVERED:
            trace.delivered_at = ev.ts
        elif ev.kind is EventKind.READ:
            trace.read_at = ev.ts
            if ttl is not None and trace.delivered_at is not None:
                if ev.ts - trace.delivered_at > ttl:
                    raise CorruptLog(
                        f"seq {ev.seq}: {ev.msg_id} read {ev.ts - trace.delivered_at:.3f}s "
                        f"after delivery, ttl {ttl}"
                    )
        elif ev.kind is EventKind.EXPIRED:
            trace.expired_at = ev.ts
    return out


@dataclass(frozen=True, slots=True)
class UsageStats:
    dyad_id: str
    sent: int
    read: int
    replied: int
    lost: int

    @property
    def read_pct(self) -> int:
        return _pct(self.read, self.sent)

    @property
    def replied_pct(self) -> int:
        return _pct(self.replied, self.sent)

    def to_json(self) -> dict[str, object]:
        return {
            "dyad_id": self.dyad_id,
            "sent": self.sent,
            "read": self.read,
            "read_pct": self.read_pct,
            "read_ratio": self.read / self.sent if self.sent else 0.0,
            "replied": self.replied,
            "replied_pct": self.replied_pct,
            "replied_ratio": self.replied / self.sent if self.sent else 0.0,
            "lost": self.lost,
        }


def _pct(count: int, sent: int) -> int:
    """Integer percent of sent, rounded half-up, exactly (no float steps)."""
    if sent == 0:
        return 0
    return (200 * count + sent) // (2 * sent)


def match_replies(
    reads: list[tuple[float, int, str]],
    sends: list[tuple[float, int, str]],
    window: float = DEFAULT_REPLY_WINDOW_SECS,
) -> int:
    """Count reads answered by the reader within the window.

    reads: (ts, seq, reader); sends: (ts, seq, sender). Greedy earliest
    match in time order; one send satisfies at most one read. A send at
    exactly read_ts does not count (it cannot be a response to the
    read); one at exactly read_ts + window does.
    """
    sends_by_user: dict[str, list[tuple[float, int]]] = {}
    for ts, seq, sender in sorted(sends, key=lambda s: (s[0], s[1])):
        sends_by_user.setdefault(sender, []).append((ts, seq))
    cursor: dict[str, int] = {}
    matched = 0
    for read_ts, _, reader in sorted(reads, key=lambda r: (r[0], r[1])):
        cand = sends_by_user.get(reader)
        if not cand:
            continue
        i = cursor.get(reader, 0)
        while i < len(cand) and cand[i][0] <= read_ts:
            i += 1
        cursor[reader] = i
        if i < len(cand) and cand[i][0] <= read_ts + window:
            matched += 1
            cursor[reader] = i + 1
    return matched


def compute_stats(
    events: list[Event],
    dyad_id: str | None = None,
    reply_window: float = DEFAULT_REPLY_WINDOW_SECS,
) -> UsageStats:
    """Per-dyad counters (or whole-log when dyad_id is None)."""
    rep = replay(events)
    if dyad_id is not None and dyad_id not in rep.dyads:
        raise CorruptLog(f"no such dyad in log: {dyad_id}")
    sent = read = lost = 0
    reads: list[tuple[float, int, str]] = []
    sends: list[tuple[float, int, str]] = []
    for ev in events:
        if dyad_id is not None and ev.dyad_id != dyad_id:
            continue
        if ev.kind is EventKind.SENT:
            sent += 1
            sends.append((ev.ts, ev.seq, ev.sender))  # type: ignore[arg-type]
        elif ev.kind is EventKind.READ:
            read += 1
            reads.append((ev.ts, ev.seq, ev.receiver))  # type: ignore[arg-type]
        elif ev.kind is EventKind.LOST:
            lost += 1
    replied = match_replies(reads, sends, reply_window)
    return UsageStats(
        dyad_id=dyad_id if dyad_id is not None else "*",
        sent=sent,
        read=read,
        replied=replied,
        lost=lost,
    )


def compute_all_stats(
    events: list[Event], reply_window: float = DEFAULT_REPLY_WINDOW_SECS
) -> dict[str, UsageStats]:
    rep = replay(events)
    return {
        dyad_id: compute_stats(events, dyad_id, reply_window)
        for dyad_id in sorted(rep.dyads)
    }


@dataclass(slots=True)
class HourHistogram:
    """Sent/read counts per local hour of day, split weekday/weekend."""

    sent_weekday: list[int] = field(default_factory=lambda: [0] * 24)
    sent_weekend: list[int] = field(default_factory=lambda: [0] * 24)
    read_weekday: list[int] = field(default_factory=lambda: [0] * 24)
    read_weekend: list[int] = field(default_factory=lambda: [0] * 24)

    def csv_lines(self) -> list[str]:
        lines = ["hour,sent_weekday,sent_weekend,read_weekday,read_weekend"]
        for h in range(24):
            lines.append(
                f"{h},{self.sent_weekday[h]},{self.sent_weekend[h]},"
                f"{self.read_weekday[h]},{self.read_weekend[h]}"
            )
        return lines


def hourly_histogram(events: list[Event]) -> HourHistogram:
    replay(events)
    hist = HourHistogram()
    for ev in events:
        if ev.kind not in (EventKind.SENT, EventKind.READ):
            continue
        dt = datetime.fromtimestamp(ev.ts, tz=timezone.utc)
        weekday = dt.weekday() < 5
        if ev.kind is EventKind.SENT:
            buckets = hist.sent_weekday if weekday else hist.sent_weekend
        else:
            buckets = hist.read_weekday if weekday else hist.read_weekend
        buckets[dt.hour] += 1
    return hist
