"""Shared fixtures and independent oracles used across the suite."""

from __future__ import annotations

from fractions import Fraction

import pytest

from animo.engine import default_catalog
from animo.eventlog import Event, EventKind


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


def exact_mean(values) -> Fraction:
    """Arithmetic-mean oracle in exact rational arithmetic."""
    vals = [Fraction(v) for v in values]
    return sum(vals, Fraction(0)) / len(vals)


def brute_force_replies(reads, sends, window=600.0) -> int:
    """Exhaustive maximum reply matching; the oracle the greedy matcher
    must equal. reads: (ts, seq, reader); sends: (ts, seq, sender)."""
    reads = sorted(reads, key=lambda r: (r[0], r[1]))
    sends = sorted(sends, key=lambda s: (s[0], s[1]))

    def best(i: int, used: frozenset[int]) -> int:
        if i == len(reads):
            return 0
        read_ts, _, reader = reads[i]
        top = best(i + 1, used)  # leave this read unmatched
        for j, (send_ts, _, sender) in enumerate(sends):
            if j in used or sender != reader:
                continue
            if read_ts < send_ts <= read_ts + window:
                top = max(top, 1 + best(i + 1, used | {j}))
        return top

    return best(0, frozenset())


class LogBuilder:
    """Hand-assemble a valid event log for analytics tests."""

    def __init__(self):
        self.events: list[Event] = []
        self._seq = 0
        self._msg = 0

    def _add(self, kind, ts, dyad_id, msg_id=None, sender=None, receiver=None):
        self._seq += 1
        ev = Event(
            seq=self._seq, ts=ts, kind=kind, dyad_id=dyad_id,
            msg_id=msg_id, sender=sender, receiver=receiver,
        )
        self.events.append(ev)
        return ev

    def paired(self, dyad_id, user_a, user_b, ts=0.0):
        return self._add(EventKind.PAIRED, ts, dyad_id, sender=user_a, receiver=user_b)

    def new_msg(self) -> str:
        self._msg += 1
        return f"x{self._msg:06d}"

    def sent(self, dyad_id, sender, receiver, ts, msg_id=None):
        msg_id = msg_id or self.new_msg()
        self._add(EventKind.SENT, ts, dyad_id, msg_id, sender, receiver)
        return msg_id

    def delivered(self, dyad_id, sender, receiver, ts, msg_id):
        self._add(EventKind.DELIVERED, ts, dyad_id, msg_id, sender, receiver)

    def lost(self, dyad_id, sender, receiver, ts, msg_id):
        self._add(EventKind.LOST, ts, dyad_id, msg_id, sender, receiver)

    def read(self, dyad_id, sender, receiver, ts, msg_id):
        self._add(EventKind.READ, ts, dyad_id, msg_id, sender, receiver)

    def expired(self, dyad_id, sender, receiver, ts, msg_id):
        self._add(EventKind.EXPIRED, ts, dyad_id, msg_id, sender, receiver)


def build_dyad_log(counts: list[tuple[int, int, int]], spacing: float = 1000.0):
    """Synthesize a log with exact per-dyad (sent, read, replied) counts.

    Per dyad: `replied` clusters of send->read->reply-send, then
    `read - replied` of send->read, then plain sends, spaced far enough
    apart that the reply matcher can only match inside a cluster.
    """
    lb = LogBuilder()
    for d, _ in enumerate(counts):
        lb.paired(f"d{d + 1:03d}", f"a{d + 1}", f"b{d + 1}", ts=0.0)
    for d, (n_sent, n_read, n_replied) in enumerate(counts):
        assert n_replied <= n_read <= n_sent and n_sent - n_read - n_replied >= 0
        dyad, a, b = f"d{d + 1:03d}", f"a{d + 1}", f"b{d + 1}"
        t = 10.0
        for _ in range(n_replied):  # read with a reply from the reader
            m = lb.sent(dyad, a, b, t)
            lb.delivered(dyad, a, b, t, m)
            lb.read(dyad, a, b, t + 2.0, m)
            m2 = lb.sent(dyad, b, a, t + 3.0)
            lb.delivered(dyad, b, a, t + 3.0, m2)
            lb.expired(dyad, b, a, t + 14.0, m2)
            t += spacing
        for _ in range(n_read - n_replied):  # read, never answered
            m = lb.sent(dyad, a, b, t)
            lb.delivered(dyad, a, b, t, m)
            lb.read(dyad, a, b, t + 2.0, m)
            t += spacing
        for _ in range(n_sent - n_read - n_replied):  # ignored sends
            m = lb.sent(dyad, a, b, t)
            lb.delivered(dyad, a, b, t, m)
            lb.expired(dyad, a, b, t + 11.0, m)
            t += spacing
    return lb.events
