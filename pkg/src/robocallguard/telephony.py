"""Simulated telephony network: a broker, a dialer endpoint and an incoming-call handler.

Everything runs in one process on a virtual clock with one tick per audio frame.
Delivery is lossless and immediate: a message sent during a tick is processed
within the same tick. Within a tick handlers act before dialers, so a PROMPT
frame emitted at tick t is heard by the caller before it sends its frame for t.
"""

from __future__ import annotations

import enum
import logging
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Protocol

from robocallguard.audio import FRAME_MS, AudioFrame
from robocallguard.interceptor import InitialDisposition, ScreeningList, initial_disposition
from robocallguard.wire import (
    CallerId,
    MessageKind,
    StreamDecoder,
    WireMessage,
    decode_message,
    encode_frame,
    encode_message,
    frame_message,
)

logger = logging.getLogger(__name__)

INVITE_TIMEOUT_S = 30


class VirtualClock:
    """Integer tick counter; one tick is one frame duration."""

    def __init__(self, frame_ms: int = FRAME_MS):
        self.frame_ms = frame_ms
        self._tick = 0
        self._lock = threading.Lock()

    @property
    def tick(self) -> int:
        return self._tick

    def now_s(self) -> float:
        return self._tick * self.frame_ms / 1000

    def advance(self, ticks: int = 1) -> int:
        with self._lock:
            self._tick += ticks
            return self._tick

    def ticks(self, seconds: float) -> int:
        return round(seconds * 1000 / self.frame_ms)


class SessionState(enum.Enum):
    IDLE = "Idle"
    INVITING = "Inviting"
    SCREENING = "Screening"
    RINGING_CALLEE = "RingingCallee"
    CONNECTED = "Connected"
    TERMINATED = "Terminated"


S = SessionState
TRANSITIONS: dict[SessionState, frozenset[SessionState]] = {
    S.IDLE: frozenset({S.INVITING}),
    S.INVITING: frozenset({S.SCREENING, S.RINGING_CALLEE, S.TERMINATED}),
    S.SCREENING: frozenset({S.RINGING_CALLEE, S.TERMINATED}),
    S.RINGING_CALLEE: frozenset({S.CONNECTED, S.TERMINATED}),
    S.CONNECTED: frozenset({S.TERMINATED}),
    S.TERMINATED: frozenset(),
}


class ProtocolError(RuntimeError):
    pass


@dataclass
class Session:
    session_id: int
    state: SessionState = SessionState.IDLE
    reason: str = ""
    transcript: list[tuple[int, str, MessageKind]] = field(default_factory=list)
    history: list[tuple[int, SessionState]] = field(default_factory=list)

    def transition(self, new: SessionState, tick: int) -> None:
        if new not in TRANSITIONS[self.state]:
            raise ProtocolError(
                f"session {self.session_id}: illegal transition {self.state.value} -> {new.value}"
            )
        self.state = new
        self.history.append((tick, new))

    def log(self, tick: int, direction: str, kind: MessageKind) -> None:
        self.transcript.append((tick, direction, kind))

    @property
    def active(self) -> bool:
        return self.state is not SessionState.TERMINATED


class Endpoint:
    phase = 0

    def __init__(self, network: Network, address: str):
        self.network = network
        self.address = address
        network.register(self)

    def on_message(self, msg: WireMessage) -> None:
        raise NotImplementedError

    def on_tick(self) -> None:
        pass


class Network:
    """Message broker and simulation driver.

    ``transport="stream"`` pushes every message through the length-prefixed
    byte-stream framing instead of handing encoded bytes over directly.
    """

    def __init__(self, clock: VirtualClock | None = None, *, first_session_id: int = 1, transport: str = "memory"):
        if transport not in ("memory", "stream"):
            raise ValueError(f"unknown transport {transport!r}")
        self.clock = clock or VirtualClock()
        self.transport = transport
        self._endpoints: dict[str, Endpoint] = {}
        self._routes: dict[int, tuple[str, str]] = {}
        self._queue: deque[tuple[str, bytes]] = deque()
        self._decoders: dict[str, StreamDecoder] = {}
        self._next_sid = first_session_id
        self._lock = threading.Lock()
        self._delivering = False
        self.delivered = 0

    def register(self, endpoint: Endpoint) -> None:
        if endpoint.address in self._endpoints:
            raise ValueError(f"address {endpoint.address!r} already registered")
        self._endpoints[endpoint.address] = endpoint
        self._decoders[endpoint.address] = StreamDecoder()

    def new_session_id(self) -> int:
        with self._lock:
            sid = self._next_sid
            self._next_sid = (self._next_sid + 1) % (1 << 64)
            return sid

    def send(self, src: str, msg: WireMessage, dst: str | None = None) -> None:
        if msg.kind == MessageKind.INVITE:
            if dst is None:
                raise ValueError("INVITE needs a destination address")
            self._routes[msg.session_id] = (src, dst)
        elif dst is None:
            a, b = self._routes[msg.session_id]
            dst = b if src == a else a
        data = encode_message(msg)
        if self.transport == "stream":
            data = frame_message(data)
        self._queue.append((dst, data))
        self.deliver()

    def deliver(self) -> None:
        if self._delivering:
            return
        self._delivering = True
        try:
            while self._queue:
                dst, data = self._queue.popleft()
                endpoint = self._endpoints.get(dst)
                if endpoint is None:
                    logger.debug("dropping message for unknown address %s", dst)
                    continue
                if self.transport == "stream":
                    messages = list(self._decoders[dst].feed(data))
                else:
                    messages = [decode_message(data)]
                for msg in messages:
                    self.delivered += 1
                    endpoint.on_message(msg)
        finally:
            self._delivering = False

    def tick(self) -> None:
        for endpoint in sorted(self._endpoints.values(), key=lambda e: e.phase):
            endpoint.on_tick()
            self.deliver()
        self.clock.advance()

    def run_until(self, done: Callable[[], bool], max_ticks: int = 100_000) -> None:
        for _ in range(max_ticks):
            if done():
                return
            self.tick()
        if not done():
            raise RuntimeError(f"simulation did not settle within {max_ticks} ticks")


# ---------------------------------------------------------------- callee side


@dataclass(frozen=True)
class CalleeEvent:
    kind: str  # "Ring" or "BlockedNotification"
    time_s: float
    session_id: int
    transcript: str = ""
    caller_name: str = ""
    label: str = ""
    recording_ref: str = ""
    transcript_ref: str = ""


class CalleeLog:
    """What the phone owner sees. Ringing calls are picked up immediately."""

    def __init__(self) -> None:
        self.events: list[CalleeEvent] = []

    def rings(self, session_id: int | None = None) -> list[CalleeEvent]:
        return [e for e in self.events if e.kind == "Ring" and session_id in (None, e.session_id)]

    def notifications(self, session_id: int | None = None) -> list[CalleeEvent]:
        return [e for e in self.events if e.kind == "BlockedNotification" and session_id in (None, e.session_id)]


class CallChannel:
    """Handler-side view of an answered call: caller audio in, VA prompts out."""

    def __init__(self, handler: IncomingCallHandler, session: Session, caller_id: CallerId):
        self.handler = handler
        self.session = session
        self.caller_id = caller_id
        self.answer_tick = handler.network.clock.tick
        self.frames: list[AudioFrame] = []
        self.prompts_sent = 0
        self.caller_hangup_tick: int | None = None
        self.driver: Callable[[], None] | None = None

    @property
    def session_id(self) -> int:
        return self.session.session_id

    @property
    def local_tick(self) -> int:
        return self.handler.network.clock.tick - self.answer_tick

    @property
    def caller_hung_up(self) -> bool:
        return self.caller_hangup_tick is not None

    def send_prompt(self, frame: AudioFrame) -> None:
        if self.session.state is not SessionState.SCREENING:
            raise ProtocolError(f"session {self.session_id}: PROMPT outside screening")
        self.prompts_sent += 1
        self.handler._send(self.session, WireMessage(MessageKind.PROMPT, self.session_id, payload=encode_frame(frame)))

    def hangup(self) -> None:
        if self.session.active:
            self.handler._send(self.session, WireMessage(MessageKind.HANGUP, self.session_id))
            self.session.reason = self.session.reason or "va hangup"
            self.session.transition(SessionState.TERMINATED, self.handler.network.clock.tick)

    def forward(self, transcript: str, caller_name: str) -> CalleeEvent:
        return self.handler.ring_callee(self.session, transcript=transcript, caller_name=caller_name)


class IncomingCallHandler(Endpoint):
    """Callee-side endpoint (ICH): interception, silent pickup and forwarding."""

    phase = 0

    def __init__(
        self,
        network: Network,
        address: str,
        lists: ScreeningList | None = None,
        callee: CalleeLog | None = None,
        on_unknown: Callable[[CallChannel], None] | None = None,
        on_disposition: Callable[[Session, CallerId, InitialDisposition], None] | None = None,
    ):
        super().__init__(network, address)
        self.lists = lists or ScreeningList()
        self.callee = callee or CalleeLog()
        self.on_unknown = on_unknown
        self.on_disposition = on_disposition
        self.sessions: dict[int, Session] = {}
        self.channels: dict[int, CallChannel] = {}
        self.dispositions: dict[int, InitialDisposition] = {}

    @property
    def now_s(self) -> float:
        return self.network.clock.now_s()

    def _send(self, session: Session, msg: WireMessage) -> None:
        session.log(self.network.clock.tick, "out", msg.kind)
        self.network.send(self.address, msg)

    def _session(self, msg: WireMessage) -> Session:
        session = self.sessions.get(msg.session_id)
        if session is None:
            raise ProtocolError(f"{msg.kind.name} for unknown session {msg.session_id}")
        return session

    def on_message(self, msg: WireMessage) -> None:
        tick = self.network.clock.tick
        if msg.kind == MessageKind.INVITE:
            if msg.session_id in self.sessions:
                raise ProtocolError(f"duplicate INVITE for session {msg.session_id}")
            session = Session(msg.session_id)
            session.transition(SessionState.INVITING, tick)
            session.log(tick, "in", msg.kind)
            self.sessions[msg.session_id] = session
            self._intercept(session, msg)
            return
        session = self._session(msg)
        session.log(tick, "in", msg.kind)
        if msg.kind == MessageKind.AUDIO:
            if session.state is SessionState.SCREENING:
                self.channels[msg.session_id].frames.append(msg.frame)
            elif session.state is not SessionState.CONNECTED:
                raise ProtocolError(f"session {msg.session_id}: AUDIO in state {session.state.value}")
        elif msg.kind == MessageKind.HANGUP:
            if session.active:
                session.reason = "caller hangup"
                session.transition(SessionState.TERMINATED, tick)
                channel = self.channels.get(msg.session_id)
                if channel is not None:
                    channel.caller_hangup_tick = tick
        else:
            raise ProtocolError(f"session {msg.session_id}: unexpected {msg.kind.name} at handler")

    def _intercept(self, session: Session, invite: WireMessage) -> None:
        assert invite.caller_id is not None
        disposition = initial_disposition(invite.caller_id, self.lists)
        self.dispositions[session.session_id] = disposition
        if disposition is InitialDisposition.PASS_WHITELISTED:
            self.ring_callee(session)
        elif disposition is InitialDisposition.DROP_BLACKLISTED:
            self._send(session, WireMessage(MessageKind.DENY, session.session_id))
            session.reason = "denied"
            session.transition(SessionState.TERMINATED, self.network.clock.tick)
        if self.on_disposition is not None:
            self.on_disposition(session, invite.caller_id, disposition)
        if disposition is InitialDisposition.SCREEN_UNKNOWN:
            channel = self.answer_call(invite)
            if self.on_unknown is not None:
                self.on_unknown(channel)

    def answer_call(self, invite: WireMessage) -> CallChannel:
        """Silent pickup: ANSWER goes to the caller and nothing reaches the callee."""
        session = self._session(invite)
        if session.state is not SessionState.INVITING or invite.session_id in self.channels:
            raise ProtocolError(f"session {invite.session_id}: duplicate ANSWER")
        assert invite.caller_id is not None
        session.transition(SessionState.SCREENING, self.network.clock.tick)
        channel = CallChannel(self, session, invite.caller_id)
        self.channels[invite.session_id] = channel
        self._send(session, WireMessage(MessageKind.ANSWER, invite.session_id))
        return channel

    def ring_callee(self, session: Session, transcript: str = "", caller_name: str = "") -> CalleeEvent:
        """Ring the owner's phone; the owner picks up at once.

        A session the caller already left still produces the Ring (a missed call
        with its transcript) but no signaling.
        """
        tick = self.network.clock.tick
        event = CalleeEvent("Ring", self._event_time(session), session.session_id, transcript, caller_name)
        self.callee.events.append(event)
        if not session.active:
            return event
        session.transition(SessionState.RINGING_CALLEE, tick)
        self._send(session, WireMessage(MessageKind.RINGING, session.session_id))
        # the owner picks up straight away
        session.transition(SessionState.CONNECTED, tick)
        self._send(session, WireMessage(MessageKind.ANSWER, session.session_id))
        return event

    def notify_blocked(self, session_id: int, label: str, recording_ref: str, transcript_ref: str) -> CalleeEvent:
        session = self.sessions[session_id]
        event = CalleeEvent(
            "BlockedNotification",
            self._event_time(session),
            session_id,
            label=label,
            recording_ref=recording_ref,
            transcript_ref=transcript_ref,
        )
        self.callee.events.append(event)
        return event

    def _event_time(self, session: Session) -> float:
        channel = self.channels.get(session.session_id)
        start = channel.answer_tick if channel is not None else self.network.clock.tick
        return (self.network.clock.tick - start) * self.network.clock.frame_ms / 1000

    def on_tick(self) -> None:
        for channel in list(self.channels.values()):
            if channel.driver is not None:
                channel.driver()


# ---------------------------------------------------------------- caller side


class CallerBehavior(Protocol):
    def hear(self, frame: AudioFrame, tick: int) -> None: ...

    def next_frame(self, index: int, tick: int) -> AudioFrame | None:
        """Audio for this tick, or ``None`` to hang up."""
        ...


class SilentCaller:
    def hear(self, frame: AudioFrame, tick: int) -> None:
        pass

    def next_frame(self, index: int, tick: int) -> AudioFrame | None:
        return AudioFrame(index)


@dataclass
class CallHandle:
    session: Session
    callee_address: str
    caller_id: CallerId
    behavior: CallerBehavior
    invite_tick: int
    audio_sent: int = 0
    prompts: list[AudioFrame] = field(default_factory=list)

    @property
    def session_id(self) -> int:
        return self.session.session_id

    @property
    def state(self) -> SessionState:
        return self.session.state

    @property
    def reason(self) -> str:
        return self.session.reason

    @property
    def settled(self) -> bool:
        return self.session.state in (SessionState.CONNECTED, SessionState.TERMINATED)


class Dialer(Endpoint):
    """Caller-side endpoint (PCD): places calls and streams caller audio."""

    phase = 1

    def __init__(self, network: Network, address: str):
        super().__init__(network, address)
        self.calls: dict[int, CallHandle] = {}

    def place_call(self, callee_address: str, caller_id: CallerId, behavior: CallerBehavior | None = None) -> CallHandle:
        tick = self.network.clock.tick
        session = Session(self.network.new_session_id())
        handle = CallHandle(session, callee_address, caller_id, behavior or SilentCaller(), tick)
        self.calls[session.session_id] = handle
        session.transition(SessionState.INVITING, tick)
        self._send(handle, WireMessage(MessageKind.INVITE, session.session_id, caller_id), dst=callee_address)
        return handle

    def hangup(self, handle: CallHandle, reason: str = "caller hangup") -> None:
        if handle.session.active:
            self._send(handle, WireMessage(MessageKind.HANGUP, handle.session_id))
            handle.session.reason = reason
            handle.session.transition(SessionState.TERMINATED, self.network.clock.tick)

    def _send(self, handle: CallHandle, msg: WireMessage, dst: str | None = None) -> None:
        handle.session.log(self.network.clock.tick, "out", msg.kind)
        self.network.send(self.address, msg, dst)

    def on_message(self, msg: WireMessage) -> None:
        tick = self.network.clock.tick
        handle = self.calls.get(msg.session_id)
        if handle is None:
            raise ProtocolError(f"{msg.kind.name} for unknown session {msg.session_id}")
        session = handle.session
        session.log(tick, "in", msg.kind)
        kind = msg.kind
        if kind == MessageKind.ANSWER:
            if session.state is SessionState.INVITING:
                session.transition(SessionState.SCREENING, tick)
            elif session.state is SessionState.RINGING_CALLEE:
                session.transition(SessionState.CONNECTED, tick)
            else:
                raise ProtocolError(f"session {msg.session_id}: duplicate ANSWER in state {session.state.value}")
        elif kind == MessageKind.RINGING:
            session.transition(SessionState.RINGING_CALLEE, tick)
        elif kind == MessageKind.DENY:
            session.reason = "denied"
            session.transition(SessionState.TERMINATED, tick)
        elif kind == MessageKind.HANGUP:
            if session.active:
                session.reason = session.reason or "remote hangup"
                session.transition(SessionState.TERMINATED, tick)
        elif kind == MessageKind.PROMPT:
            frame = msg.frame
            handle.prompts.append(frame)
            handle.behavior.hear(frame, tick)
        else:
            raise ProtocolError(f"session {msg.session_id}: unexpected {kind.name} at dialer")

    def on_tick(self) -> None:
        tick = self.network.clock.tick
        timeout = self.network.clock.ticks(INVITE_TIMEOUT_S)
        for handle in list(self.calls.values()):
            session = handle.session
            if session.state is SessionState.INVITING and tick - handle.invite_tick >= timeout:
                session.reason = "unreachable"
                session.transition(SessionState.TERMINATED, tick)
            elif session.state in (SessionState.SCREENING, SessionState.CONNECTED):
                frame = handle.behavior.next_frame(handle.audio_sent, tick)
                if frame is None:
                    self.hangup(handle)
                    continue
                if frame.index != handle.audio_sent:
                    frame = AudioFrame(handle.audio_sent, frame.duration_ms, frame.energy, frame.tokens)
                handle.audio_sent += 1
                self._send(handle, WireMessage(MessageKind.AUDIO, handle.session_id, payload=encode_frame(frame)))
