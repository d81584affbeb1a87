"""Wire protocol: length-prefixed JSON frames over a stream socket.

Every frame is a 4-byte big-endian payload length followed by one UTF-8
JSON object with the fields type, seq, session_tick, and payload. Encoding
is canonical (sorted keys, no whitespace), which makes snapshot streams
byte-comparable across runs. Unknown payload fields are ignored on decode;
unknown message types are rejected. The full grammar lives in
docs/protocol.md.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

MESSAGE_TYPES = ("Hello", "Welcome", "InputFrame", "Snapshot", "Event", "Goodbye")

MAX_FRAME_BYTES = 16 * 1024 * 1024
_HEADER = struct.Struct(">I")


class ProtocolError(Exception):
    pass


class MalformedFrame(ProtocolError):
    pass


class UnknownType(ProtocolError):
    pass


class SeqRegression(ProtocolError):
    pass


@dataclass(frozen=True)
class WireMessage:
    type: str
    seq: int
    session_tick: int
    payload: dict = field(default_factory=dict)


def encode_message(msg: WireMessage) -> bytes:
    """Canonical frame bytes (header plus JSON body) for a message."""
    if msg.type not in MESSAGE_TYPES:
        raise UnknownType(f"cannot encode message type {msg.type!r}")
    body = json.dumps(
        {
            "type": msg.type,
            "seq": msg.seq,
            "session_tick": msg.session_tick,
            "payload": msg.payload,
        },
        sort_keys=True,
        separators=(",", ":"),
        allow_nan=False,
    ).encode("utf-8")
    if len(body) > MAX_FRAME_BYTES:
        raise MalformedFrame(f"frame body of {len(body)} bytes exceeds limit")
    return _HEADER.pack(len(body)) + body


def decode_message(frame: bytes) -> WireMessage:
    """Decode one full frame (header included). Trailing bytes, truncation,
    bad JSON, or non-object bodies raise MalformedFrame."""
    if len(frame) < _HEADER.size:
        raise MalformedFrame("frame shorter than length header")
    (length,) = _HEADER.unpack_from(frame)
    if length > MAX_FRAME_BYTES:
        raise MalformedFrame(f"declared length {length} exceeds limit")
    body = frame[_HEADER.size:]
    if len(body) != length:
        raise MalformedFrame(
            f"declared length {length} but got {len(body)} body bytes")
    return _decode_body(body)


def _decode_body(body: bytes) -> WireMessage:
    try:
        data = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFrame(f"undecodable frame body: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedFrame("frame body is not a JSON object")
    msg_type = data.get("type")
    if not isinstance(msg_type, str) or msg_type not in MESSAGE_TYPES:
        raise UnknownType(f"unknown message type {msg_type!r}")
    seq = data.get("seq")
    tick = data.get("session_tick")
    if not isinstance(seq, int) or not isinstance(tick, int):
        raise MalformedFrame("seq and session_tick must be integers")
    payload = data.get("payload", {})
    if not isinstance(payload, dict):
        raise MalformedFrame("payload must be an object")
    return WireMessage(type=msg_type, seq=seq, session_tick=tick, payload=payload)


class FrameDecoder:
    """Incremental framer: feed raw bytes, collect complete messages."""

    def __init__(self) -> None:
        self._buffer = bytearray()

    def feed(self, data: bytes) -> list[WireMessage]:
        self._buffer.extend(data)
        messages: list[WireMessage] = []
        while True:
            if len(self._buffer) < _HEADER.size:
                break
            (length,) = _HEADER.unpack_from(self._buffer)
            if length > MAX_FRAME_BYTES:
                raise MalformedFrame(f"declared length {length} exceeds limit")
            end = _HEADER.size + length
            if len(self._buffer) < end:
                break
            body = bytes(self._buffer[_HEADER.size:end])
            del self._buffer[:end]
            messages.append(_decode_body(body))
        return messages


class SeqTracker:
    """Enforces strictly increasing seq numbers per sender."""

    def __init__(self) -> None:
        self._last: dict[object, int] = {}

    def check(self, sender: object, seq: int) -> None:
        last = self._last.get(sender)
        if last is not None and seq <= last:
            raise SeqRegression(f"seq {seq} after {last} from {sender!r}")
        self._last[sender] = seq

    def forget(self, sender: object) -> None:
        self._last.pop(sender, None)
