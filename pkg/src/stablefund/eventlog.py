"""Append-only, SHA-256 hash-chained event log.

Each record hashes ``prev_hash || canonical(seq, timestamp, kind, payload)``.
The canonical encoding is length-prefixed and big-endian so that it is
unambiguous and independent of dict ordering or JSON formatting:

    seq        u64
    timestamp  u64
    kind       u32 length + UTF-8
    payload    tagged value (see ``_encode_value``)

The JSON Lines export is itself canonical: ``check_log`` rejects any line that
does not re-serialize to exactly the same bytes, so a single flipped byte is
caught even where JSON parsing would paper over it.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

from .errors import ClockError, LogFormatError

ZERO_HASH = bytes(32)
FIELD_ORDER = ("seq", "timestamp", "kind", "payload", "prev_hash", "hash")


def _encode_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack(">I", len(raw)) + raw


def _encode_value(value: Any) -> bytes:
    if value is None:
        return b"n"
    if isinstance(value, bool):
        return b"?" + (b"\x01" if value else b"\x00")
    if isinstance(value, int):
        raw = value.to_bytes((value.bit_length() + 8) // 8, "big", signed=True)
        return b"i" + struct.pack(">I", len(raw)) + raw
    if isinstance(value, str):
        return b"s" + _encode_str(value)
    if isinstance(value, (list, tuple)):
        return b"l" + struct.pack(">I", len(value)) + b"".join(_encode_value(v) for v in value)
    if isinstance(value, dict):
        parts = [b"d", struct.pack(">I", len(value))]
        for key in sorted(value, key=lambda k: k.encode("utf-8")):
            if not isinstance(key, str):
                raise TypeError(f"payload keys must be str, got {key!r}")
            parts.append(_encode_str(key))
            parts.append(_encode_value(value[key]))
        return b"".join(parts)
    raise TypeError(f"unsupported payload value {value!r}")


def canonical_bytes(seq: int, timestamp: int, kind: str, payload: dict) -> bytes:
    return struct.pack(">QQ", seq, timestamp) + _encode_str(kind) + _encode_value(payload)


def record_hash(prev_hash: bytes, seq: int, timestamp: int, kind: str, payload: dict) -> bytes:
    return hashlib.sha256(prev_hash + canonical_bytes(seq, timestamp, kind, payload)).digest()


def _normalize(value: Any) -> Any:
    # sorted dicts and lists only, so the JSON export is already canonical
    if isinstance(value, dict):
        return {k: _normalize(value[k]) for k in sorted(value)}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    return value


@dataclass(frozen=True)
class EventRecord:
    seq: int
    timestamp: int
    kind: str
    payload: dict
    prev_hash: bytes
    hash: bytes

    def to_json(self) -> str:
        body = {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "kind": self.kind,
            "payload": self.payload,
            "prev_hash": self.prev_hash.hex(),
            "hash": self.hash.hex(),
        }
        return json.dumps(body, separators=(",", ":"), ensure_ascii=True)


@dataclass(frozen=True)
class ChainVerdict:
    ok: bool
    bad_seq: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "ok" if self.ok else f"bad at seq {self.bad_seq}: {self.reason}"


class EventLog:
    """The append-only log. Only :meth:`append` mutates it."""

    def __init__(self):
        self._records: list[EventRecord] = []
        self._listeners: list[Callable[[EventRecord], None]] = []

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def __getitem__(self, index):
        return self._records[index]

    @property
    def records(self) -> tuple[EventRecord, ...]:
        return tuple(self._records)

    @property
    def head(self) -> bytes:
        return self._records[-1].hash if self._records else ZERO_HASH

    def subscribe(self, listener: Callable[[EventRecord], None]) -> None:
        self._listeners.append(listener)

    def append(self, kind: str, payload: dict, timestamp: int) -> EventRecord:
        if self._records and timestamp < self._records[-1].timestamp:
            raise ClockError(f"timestamp {timestamp} precedes last event")
        seq = len(self._records)
        payload = _normalize(payload)
        prev = self.head
        rec = EventRecord(seq, timestamp, kind, payload, prev, record_hash(prev, seq, timestamp, kind, payload))
        self._records.append(rec)
        for listener in self._listeners:
            listener(rec)
        return rec

    def to_jsonl(self) -> str:
        return export_jsonl(self._records)


def export_jsonl(records: Iterable[EventRecord]) -> str:
    return "".join(rec.to_json() + "\n" for rec in records)


def verify_chain(records: Sequence[EventRecord], start: int = 0, prev_hash: bytes = ZERO_HASH,
                 last_timestamp: int = 0) -> ChainVerdict:
    """Recompute every link. ``start``/``prev_hash`` let callers verify a log incrementally."""
    prev = prev_hash
    last_ts = last_timestamp
    for index, rec in enumerate(records, start):
        if rec.seq != index:
            return ChainVerdict(False, index, f"expected seq {index}, found {rec.seq}")
        if rec.prev_hash != prev:
            return ChainVerdict(False, index, "prev_hash does not link to previous record")
        if rec.timestamp < last_ts:
            return ChainVerdict(False, index, "timestamp decreases")
        try:
            expected = record_hash(rec.prev_hash, rec.seq, rec.timestamp, rec.kind, rec.payload)
        except (TypeError, struct.error, OverflowError) as exc:
            return ChainVerdict(False, index, f"unencodable record: {exc}")
        if rec.hash != expected:
            return ChainVerdict(False, index, "hash mismatch")
        prev = rec.hash
        last_ts = rec.timestamp
    return ChainVerdict(True)


def _parse_hash(text: Any, line: int) -> bytes:
    if not isinstance(text, str) or len(text) != 64 or text != text.lower():
        raise LogFormatError(line, "hash must be 64 lowercase hex characters")
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise LogFormatError(line, "hash is not hex") from None


def _parse_line(line: str, line_no: int) -> EventRecord:
    try:
        body = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogFormatError(line_no, f"invalid JSON: {exc.msg}") from None
    if not isinstance(body, dict) or tuple(body) != FIELD_ORDER:
        raise LogFormatError(line_no, "keys must be exactly " + ",".join(FIELD_ORDER))
    seq, ts, kind, payload = body["seq"], body["timestamp"], body["kind"], body["payload"]
    for name, v in (("seq", seq), ("timestamp", ts)):
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < 2**64:
            raise LogFormatError(line_no, f"{name} must be a u64")
    if not isinstance(kind, str) or not isinstance(payload, dict):
        raise LogFormatError(line_no, "bad kind or payload type")
    rec = EventRecord(seq, ts, kind, _normalize(payload), _parse_hash(body["prev_hash"], line_no),
                      _parse_hash(body["hash"], line_no))
    if rec.to_json() != line:
        raise LogFormatError(line_no, "line is not in canonical form")
    return rec


def _lines(text: str) -> list[str]:
    if text and not text.endswith("\n"):
        raise LogFormatError(text.count("\n"), "missing trailing newline")
    return text.split("\n")[:-1] if text else []


def parse_jsonl(text: str) -> list[EventRecord]:
    """Parse an exported log, requiring every line to be in canonical form."""
    return [_parse_line(line, i) for i, line in enumerate(_lines(text))]


def check_log(text: str) -> ChainVerdict:
    """Verify an exported ``events.jsonl``, stopping at the first bad line.

    A line that is malformed or not canonical is reported at its index.
    """
    try:
        lines = _lines(text)
    except LogFormatError as exc:
        # the unterminated tail is the last (partial) record
        return ChainVerdict(False, exc.line, str(exc))
    prev = ZERO_HASH
    last_ts = 0
    for index, line in enumerate(lines):
        try:
            rec = _parse_line(line, index)
        except LogFormatError as exc:
            return ChainVerdict(False, index, str(exc))
        verdict = verify_chain([rec], start=index, prev_hash=prev, last_timestamp=last_ts)
        if not verdict:
            return verdict
        prev, last_ts = rec.hash, rec.timestamp
    return ChainVerdict(True)
