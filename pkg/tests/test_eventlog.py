import pytest

from animo.errors import CorruptLog
from animo.eventlog import EventKind, EventLog, parse_event_line, read_events


def test_append_read_roundtrip(tmp_path):
    path = str(tmp_path / "log.jsonl")
    with EventLog(path) as log:
        log.append(EventKind.PAIRED, ts=1.0, dyad_id="d001", sender="a", receiver="b")
        log.append(EventKind.SENT, ts=2.0, dyad_id="d001", msg_id="m1", sender="a", receiver="b")
    got = read_events(path)
    assert [e.seq for e in got] == [1, 2]
    assert got[1].msg_id == "m1" and got[1].kind is EventKind.SENT


def test_seq_resumes_from_existing_file(tmp_path):
    path = str(tmp_path / "log.jsonl")
    with EventLog(path) as log:
        log.append(EventKind.PAIRED, ts=1.0, dyad_id="d001", sender="a", receiver="b")
    with EventLog(path) as log:
        ev = log.append(EventKind.SENT, ts=2.0, dyad_id="d001", msg_id="m1", sender="a", receiver="b")
    assert ev.seq == 2
    assert [e.seq for e in read_events(path)] == [1, 2]


def test_lines_are_byte_stable(tmp_path):
    path = str(tmp_path / "log.jsonl")
    with EventLog(path) as log:
        log.append(EventKind.SENT, ts=2.5, dyad_id="d001", msg_id="m1", sender="a", receiver="b")
    line = open(path, encoding="utf-8").read()
    assert line == '{"dyad_id":"d001","kind":"sent","msg_id":"m1","receiver":"b","sender":"a","seq":1,"ts":2.5}\n'


def test_in_memory_log():
    log = EventLog()
    log.append(EventKind.PAIRED, ts=1.0, dyad_id="d001", sender="a", receiver="b")
    assert len(log.events) == 1 and log.path is None


def test_parse_rejects_garbage():
    with pytest.raises(CorruptLog):
        parse_event_line("not json", 1)
    with pytest.raises(CorruptLog):
        parse_event_line('{"seq": 1}', 1)


def test_corrupt_seq_on_load(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text(
        '{"dyad_id":"d","kind":"paired","seq":2,"sender":"a","receiver":"b","ts":1.0}\n'
        '{"dyad_id":"d","kind":"paired","seq":2,"sender":"c","receiver":"e","ts":2.0}\n'
    )
    with pytest.raises(CorruptLog):
        EventLog(str(path))
