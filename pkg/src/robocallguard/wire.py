"""Binary wire format for the simulated session protocol.

Message layout (big-endian)::

    'R' 'G' | version=0x01 | kind | session_id:u64 | caller_len:u8 caller digits | payload_len:u32 payload

AUDIO and PROMPT payloads carry one serialized :class:`AudioFrame`::

    index:u32 | duration_ms:u16 | energy:f64 | n_tokens:u16 | (len:u8 utf-8 bytes)*

Frames are self-delimiting, so a recording is stored as plain concatenation.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

from robocallguard.audio import AudioFrame

MAGIC = b"RG"
VERSION = 1
MAX_PAYLOAD = 1 << 20
HEADER = struct.Struct(">2sBBQ")
LENGTH_PREFIX = struct.Struct(">I")
FRAME_HEAD = struct.Struct(">IHdH")


class MessageKind(enum.IntEnum):
    INVITE = 1
    RINGING = 2
    ANSWER = 3
    AUDIO = 4
    PROMPT = 5
    HANGUP = 6
    DENY = 7


PAYLOAD_KINDS = frozenset({MessageKind.AUDIO, MessageKind.PROMPT})


@dataclass(frozen=True, order=True)
class CallerId:
    digits: str

    def __post_init__(self) -> None:
        if not (isinstance(self.digits, str) and self.digits.isascii() and self.digits.isdigit()):
            raise ValueError(f"caller id must be decimal digits, got {self.digits!r}")
        if not 7 <= len(self.digits) <= 15:
            raise ValueError(f"caller id must have 7-15 digits, got {len(self.digits)}")

    def __str__(self) -> str:
        return self.digits


# Decode errors. Each corruption class has its own exception so callers can tell them apart.


class DecodeError(ValueError):
    pass


class BadMagicError(DecodeError):
    pass


class BadVersionError(DecodeError):
    pass


class UnknownKindError(DecodeError):
    pass


class TruncatedError(DecodeError):
    def __init__(self, field: str, needed: int, available: int):
        self.field = field
        super().__init__(f"truncated at {field}: need {needed} bytes, have {available}")


class BadCallerIdError(DecodeError):
    pass


class FieldMismatchError(DecodeError):
    """Caller id or payload present (or absent) contrary to the message kind."""


class TrailingBytesError(DecodeError):
    pass


class OversizePayloadError(ValueError):
    pass


@dataclass(frozen=True)
class WireMessage:
    kind: MessageKind
    session_id: int
    caller_id: CallerId | None = None
    payload: bytes = b""

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MessageKind(self.kind))
        if not 0 <= self.session_id < 1 << 64:
            raise ValueError(f"session id out of u64 range: {self.session_id}")
        if (self.caller_id is not None) != (self.kind == MessageKind.INVITE):
            raise ValueError(f"{self.kind.name} must {'' if self.kind == MessageKind.INVITE else 'not '}carry a caller id")
        if bool(self.payload) != (self.kind in PAYLOAD_KINDS):
            raise ValueError(f"{self.kind.name} payload presence violates the message layout")
        if len(self.payload) > MAX_PAYLOAD:
            raise OversizePayloadError(f"payload of {len(self.payload)} bytes exceeds {MAX_PAYLOAD}")

    @property
    def frame(self) -> AudioFrame:
        return decode_frame(self.payload)


def encode_message(msg: WireMessage) -> bytes:
    if len(msg.payload) > MAX_PAYLOAD:
        raise OversizePayloadError(f"payload of {len(msg.payload)} bytes exceeds {MAX_PAYLOAD}")
    caller = msg.caller_id.digits.encode("ascii") if msg.caller_id else b""
    return b"".join(
        (
            HEADER.pack(MAGIC, VERSION, int(msg.kind), msg.session_id),
            bytes((len(caller),)),
            caller,
            LENGTH_PREFIX.pack(len(msg.payload)),
            msg.payload,
        )
    )


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, field: str) -> bytes:
        available = len(self.data) - self.pos
        if available < n:
            raise TruncatedError(field, n, available)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk


def decode_message(data: bytes) -> WireMessage:
    r = _Reader(bytes(data))
    if r.take(2, "magic") != MAGIC:
        raise BadMagicError(f"bad magic {data[:2]!r}")
    version = r.take(1, "version")[0]
    if version != VERSION:
        raise BadVersionError(f"unsupported version {version}")
    kind_byte = r.take(1, "kind")[0]
    try:
        kind = MessageKind(kind_byte)
    except ValueError:
        raise UnknownKindError(f"unknown message kind {kind_byte}") from None
    (session_id,) = struct.unpack(">Q", r.take(8, "session_id"))
    caller_len = r.take(1, "caller_length")[0]
    caller_raw = r.take(caller_len, "caller_id")
    (payload_len,) = LENGTH_PREFIX.unpack(r.take(4, "payload_length"))
    if payload_len > MAX_PAYLOAD:
        raise OversizePayloadError(f"declared payload of {payload_len} bytes exceeds {MAX_PAYLOAD}")
    payload = r.take(payload_len, "payload")
    if r.pos != len(r.data):
        raise TrailingBytesError(f"{len(r.data) - r.pos} bytes after message end")

    caller = None
    if caller_len:
        try:
            caller = CallerId(caller_raw.decode("ascii"))
        except (UnicodeDecodeError, ValueError) as exc:
            raise BadCallerIdError(f"invalid caller id bytes {caller_raw!r}") from exc
    if (caller is not None) != (kind == MessageKind.INVITE):
        raise FieldMismatchError(f"{kind.name} with caller length {caller_len}")
    if bool(payload) != (kind in PAYLOAD_KINDS):
        raise FieldMismatchError(f"{kind.name} with payload length {payload_len}")
    return WireMessage(kind, session_id, caller, payload)


def encode_frame(frame: AudioFrame) -> bytes:
    parts = [FRAME_HEAD.pack(frame.index, frame.duration_ms, frame.energy, len(frame.tokens))]
    for token in frame.tokens:
        raw = token.encode("utf-8")
        if len(raw) > 255:
            raise ValueError(f"token too long for the frame format: {token[:20]!r}...")
        parts.append(bytes((len(raw),)))
        parts.append(raw)
    return b"".join(parts)


def _decode_frame_at(data: bytes, pos: int) -> tuple[AudioFrame, int]:
    if len(data) - pos < FRAME_HEAD.size:
        raise TruncatedError("frame_header", FRAME_HEAD.size, len(data) - pos)
    index, duration_ms, energy, n_tokens = FRAME_HEAD.unpack_from(data, pos)
    pos += FRAME_HEAD.size
    tokens = []
    for _ in range(n_tokens):
        if pos >= len(data):
            raise TruncatedError("token_length", 1, 0)
        n = data[pos]
        pos += 1
        if len(data) - pos < n:
            raise TruncatedError("token", n, len(data) - pos)
        tokens.append(data[pos : pos + n].decode("utf-8"))
        pos += n
    return AudioFrame(index, duration_ms, energy, tuple(tokens)), pos


def decode_frame(data: bytes) -> AudioFrame:
    frame, pos = _decode_frame_at(data, 0)
    if pos != len(data):
        raise TrailingBytesError(f"{len(data) - pos} bytes after frame end")
    return frame


def encode_frames(frames: Iterable[AudioFrame]) -> bytes:
    return b"".join(encode_frame(f) for f in frames)


def decode_frames(data: bytes) -> list[AudioFrame]:
    frames = []
    pos = 0
    while pos < len(data):
        frame, pos = _decode_frame_at(data, pos)
        frames.append(frame)
    return frames


# Optional byte-stream transport: each message preceded by a 4-byte big-endian length.


def frame_message(data: bytes) -> bytes:
    return LENGTH_PREFIX.pack(len(data)) + data


def write_message(stream: BinaryIO, msg: WireMessage) -> None:
    stream.write(frame_message(encode_message(msg)))


def read_message(stream: BinaryIO) -> WireMessage | None:
    """Read one length-prefixed message; ``None`` on clean end of stream."""
    head = stream.read(LENGTH_PREFIX.size)
    if not head:
        return None
    if len(head) < LENGTH_PREFIX.size:
        raise TruncatedError("stream_length", LENGTH_PREFIX.size, len(head))
    (n,) = LENGTH_PREFIX.unpack(head)
    body = stream.read(n)
    if len(body) < n:
        raise TruncatedError("stream_body", n, len(body))
    return decode_message(body)


class StreamDecoder:
    """Incremental length-prefixed deframer for chunked byte streams."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> Iterator[WireMessage]:
        self._buf.extend(chunk)
        while len(self._buf) >= LENGTH_PREFIX.size:
            (n,) = LENGTH_PREFIX.unpack_from(self._buf)
            if len(self._buf) < LENGTH_PREFIX.size + n:
                break
            body = bytes(self._buf[LENGTH_PREFIX.size : LENGTH_PREFIX.size + n])
            del self._buf[: LENGTH_PREFIX.size + n]
            yield decode_message(body)

    @property
    def pending(self) -> int:
        return len(self._buf)
