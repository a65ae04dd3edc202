"""Spam Detector control core: the screening timeline for calls from unknown numbers.

Timeline on the virtual clock, t = 0 at silent pickup:

* ``[0, greeting)``: greeting asking who the caller wants to reach.
* Name spotting runs on every tick until ``t2``; a hit forwards the call.
* ``t1``: reminder prompt of length ``t3``; caller silence during it decides
  Human (silence >= t3/2) or Robocall.
* ``[t2 - closing, t2)``: closing prompt, then hangup at ``t2``.
* Blocked calls labeled Human are relabeled Robocall when the caller said
  "press" or "enter".
"""

from __future__ import annotations

import enum
import hashlib
import logging
import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from robocallguard.audio import FRAME_MS, SPEECH_ENERGY, AudioFrame, VadConfig, silence_seconds, silent_frames
from robocallguard.interceptor import InitialDisposition, ScreeningList, load_lists
from robocallguard.kws import KeywordHit, NameModel, NameSpotter
from robocallguard.telephony import (
    CallChannel,
    CalleeEvent,
    CalleeLog,
    IncomingCallHandler,
    Network,
    ProtocolError,
    Session,
)
from robocallguard.text import normalize
from robocallguard.transcription import AsrNoise, TranscriptDoc, transcribe
from robocallguard.wire import CallerId, encode_frames

logger = logging.getLogger(__name__)

__all__ = [
    "CalleeEvent",
    "Disposition",
    "Label",
    "LabelBasis",
    "OutcomeStore",
    "Policy",
    "PolicyError",
    "Screener",
    "ScreeningOutcome",
    "TimerConfig",
    "VirtualAssistant",
    "keyword_override",
    "label_from_silence",
    "load_policy",
    "parse_policy",
    "screen_call",
]

PROMPTS = {
    "greeting": "hello you have reached a call assistant please say the name of the person you are trying to reach",
    "reminder": "sorry i did not catch that who are you trying to reach",
    "closing": "this person is not available thank you goodbye",
    "ask_caller_name": "may i ask who is calling",
}
OVERRIDE_KEYWORDS = frozenset({"press", "enter"})


class Label(enum.Enum):
    HUMAN = "Human"
    ROBOCALL = "Robocall"


class LabelBasis(enum.Enum):
    SILENCE_RULE = "silence_rule"
    KEYWORD_OVERRIDE = "keyword_override"
    NONE = "none"


class Disposition(enum.Enum):
    FORWARDED = "Forwarded"
    BLOCKED_HUMAN = "BlockedHuman"
    BLOCKED_ROBOCALL = "BlockedRobocall"
    WHITELIST_PASS = "WhitelistPass"
    BLACKLIST_DROP = "BlacklistDrop"

    @property
    def blocked(self) -> bool:
        return self in (Disposition.BLOCKED_HUMAN, Disposition.BLOCKED_ROBOCALL)


@dataclass(frozen=True)
class TimerConfig:
    t1_s: float = 20.0
    t2_s: float = 35.0
    t3_s: float = 5.0
    grace_s: float = 10.0
    greeting_s: float = 5.0
    caller_name_window_s: float = 5.0
    closing_s: float = 5.0
    ask_name_s: float = 2.0

    def __post_init__(self) -> None:
        if not 0 < self.greeting_s < self.t1_s < self.t1_s + self.t3_s <= self.t2_s:
            raise ValueError(
                "timers must satisfy 0 < greeting < t1 < t1 + t3 <= t2, got "
                f"greeting={self.greeting_s} t1={self.t1_s} t3={self.t3_s} t2={self.t2_s}"
            )
        if not math.isclose(self.grace_s, self.t2_s - (self.t1_s + self.t3_s), abs_tol=1e-9):
            raise ValueError(f"grace {self.grace_s} != t2 - (t1 + t3) = {self.t2_s - self.t1_s - self.t3_s}")
        if not 0 <= self.closing_s <= self.grace_s:
            raise ValueError("closing prompt must fit inside the grace period")
        if self.caller_name_window_s < 0 or self.ask_name_s < 0:
            raise ValueError("negative forwarding durations")
        for name, value in vars(self).items():
            if not math.isclose(value * 1000 / FRAME_MS, round(value * 1000 / FRAME_MS), abs_tol=1e-9):
                raise ValueError(f"{name}={value} is not a whole number of {FRAME_MS} ms frames")


@dataclass(frozen=True)
class Policy:
    names: NameModel
    lists: ScreeningList = field(default_factory=ScreeningList)
    timers: TimerConfig = field(default_factory=TimerConfig)
    vad: VadConfig = field(default_factory=VadConfig)
    asr: AsrNoise = field(default_factory=AsrNoise)
    seed: int = 0


class PolicyError(ValueError):
    pass


_POLICY_KEYS = {
    "names", "t1", "t2", "t3", "grace", "greeting", "caller_name_window", "lists",
    "miss_probability", "seed", "max_edit_distance", "word_error_rate",
    "voice_threshold", "hangover_frames",
}  # fmt: skip


def parse_policy(text: str, base_dir: Path = Path("."), source: str = "<policy>") -> Policy:
    """Parse ``key = value`` lines. ``lists`` paths are resolved against ``base_dir``."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise PolicyError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        if key not in _POLICY_KEYS:
            raise PolicyError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise PolicyError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value

    def num(key: str, default: float, kind: type = float):
        try:
            return kind(values[key]) if key in values else default
        except ValueError:
            raise PolicyError(f"{source}: {key} must be {kind.__name__}, got {values[key]!r}") from None

    if "names" not in values:
        raise PolicyError(f"{source}: 'names' is required")
    t1, t2, t3 = num("t1", 20.0), num("t2", 35.0), num("t3", 5.0)
    try:
        timers = TimerConfig(
            t1_s=t1,
            t2_s=t2,
            t3_s=t3,
            grace_s=num("grace", t2 - t1 - t3),
            greeting_s=num("greeting", 5.0),
            caller_name_window_s=num("caller_name_window", 5.0),
            closing_s=min(5.0, t2 - t1 - t3),
        )
        seed = num("seed", 0, int)
        names = NameModel(
            tuple(n.strip() for n in values["names"].split(",") if n.strip()),
            max_edit_distance=num("max_edit_distance", 1, int),
            miss_probability=num("miss_probability", 0.0),
            seed=seed,
        )
        vad = VadConfig(num("voice_threshold", 0.1), num("hangover_frames", 0, int))
        asr = AsrNoise(num("word_error_rate", 0.0), seed)
    except ValueError as exc:
        if isinstance(exc, PolicyError):
            raise
        raise PolicyError(f"{source}: {exc}") from None
    lists = load_lists(base_dir / values["lists"]) if "lists" in values else ScreeningList()
    return Policy(names=names, lists=lists, timers=timers, vad=vad, asr=asr, seed=seed)


def load_policy(path: str | Path) -> Policy:
    path = Path(path)
    return parse_policy(path.read_text(encoding="utf-8"), path.parent, str(path))


def label_from_silence(silence_s: float, t3_s: float) -> Label:
    """Human iff the caller stayed silent for at least half the reminder."""
    if not 0 <= silence_s <= t3_s:
        raise ValueError(f"silence {silence_s} s outside [0, {t3_s}]")
    return Label.HUMAN if silence_s >= t3_s / 2 else Label.ROBOCALL


def keyword_override(transcript: str) -> bool:
    return not OVERRIDE_KEYWORDS.isdisjoint(normalize(transcript))


@dataclass
class ScreeningOutcome:
    session_id: int
    caller_id: CallerId
    disposition: Disposition
    label_basis: LabelBasis = LabelBasis.NONE
    hit: KeywordHit | None = None
    caller_name: str = ""
    transcript: TranscriptDoc | None = None
    recording: tuple[AudioFrame, ...] | None = None
    silence_s: float | None = None
    silence_label: Label | None = None
    reminder_s: float | None = None
    hangup_s: float | None = None
    ring_s: float | None = None
    ended_by: str = ""
    prompts: tuple[tuple[float, str], ...] = ()
    recording_path: str = ""
    transcript_path: str = ""
    error: str = ""

    @property
    def label(self) -> Label | None:
        if self.disposition is Disposition.BLOCKED_HUMAN:
            return Label.HUMAN
        if self.disposition is Disposition.BLOCKED_ROBOCALL:
            return Label.ROBOCALL
        return None


class OutcomeStore:
    """Writes recordings, transcripts and the notification log under ``out_dir``."""

    FOLDERS = {
        Disposition.BLOCKED_ROBOCALL: "robocaller",
        Disposition.BLOCKED_HUMAN: "human",
        Disposition.FORWARDED: "forwarded",
    }
    LOG_NAME = "notifications.log"

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)

    def save(self, outcome: ScreeningOutcome) -> None:
        folder = self.FOLDERS.get(outcome.disposition)
        if folder is None:
            return
        directory = self.out_dir / folder
        directory.mkdir(parents=True, exist_ok=True)
        stem = str(outcome.session_id)
        recording = f"{folder}/{stem}.frames"
        transcript = f"{folder}/{stem}.txt"
        (self.out_dir / recording).write_bytes(encode_frames(outcome.recording or ()))
        text = outcome.transcript.render() if outcome.transcript else ""
        (self.out_dir / transcript).write_text(text, encoding="utf-8", newline="\n")
        outcome.recording_path = recording
        outcome.transcript_path = transcript

    def log_notification(self, event: CalleeEvent, label: str, transcript_path: str) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        with open(self.out_dir / self.LOG_NAME, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{event.time_s:.1f}\t{label}\t{event.session_id}\t{transcript_path}\n")


def derive_seed(seed: int, session_id: int, purpose: str) -> int:
    digest = hashlib.blake2b(struct.pack(">QQ", seed & (2**64 - 1), session_id) + purpose.encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "big")


class _Prompt:
    def __init__(self, name: str, text: str, start_tick: int, n_ticks: int):
        self.name = name
        self.words = normalize(text)
        self.start_tick = start_tick
        self.n_ticks = n_ticks
        self.emitted: list[str] = []

    def tokens_at(self, offset: int) -> tuple[str, ...]:
        n = len(self.words)
        return tuple(w for j, w in enumerate(self.words) if j * self.n_ticks // n == offset)

    def done(self, tick: int) -> bool:
        return tick >= self.start_tick + self.n_ticks


class Screener:
    """Per-session screening state machine, driven once per tick by the handler."""

    def __init__(
        self,
        channel: CallChannel,
        policy: Policy,
        store: OutcomeStore | None = None,
        on_done: Callable[[ScreeningOutcome], None] | None = None,
    ):
        self.channel = channel
        self.policy = policy
        self.store = store
        self.on_done = on_done
        sid = channel.session_id
        self.names = replace(policy.names, seed=derive_seed(policy.names.seed, sid, "kws"))
        self.asr = replace(policy.asr, seed=derive_seed(policy.asr.seed, sid, "asr"))
        clock = channel.handler.network.clock
        self.frame_ms = clock.frame_ms
        t = policy.timers
        self.t1 = clock.ticks(t.t1_s)
        self.t2 = clock.ticks(t.t2_s)
        self.t3 = clock.ticks(t.t3_s)
        self.greeting = clock.ticks(t.greeting_s)
        self.closing = clock.ticks(t.closing_s)
        self.ask = clock.ticks(t.ask_name_s)
        self.capture = clock.ticks(t.caller_name_window_s)

        self.outcome: ScreeningOutcome | None = None
        self.prompt: _Prompt | None = None
        self.played: list[_Prompt] = []
        self.silence_s: float | None = None
        self.label: Label | None = None
        self.hit: KeywordHit | None = None
        self.forward_tick: int | None = None
        self.spotter = NameSpotter(self.names)
        channel.driver = self.on_tick

    def _seconds(self, ticks: int) -> float:
        return ticks * self.frame_ms / 1000

    def _start_prompt(self, name: str, n_ticks: int, tick: int) -> None:
        self.prompt = _Prompt(name, PROMPTS[name], tick, n_ticks)
        self.played.append(self.prompt)

    def _emit_prompt(self, tick: int) -> None:
        p = self.prompt
        if p is None:
            return
        if p.done(tick):
            self.prompt = None
            return
        tokens = p.tokens_at(tick - p.start_tick)
        p.emitted.extend(tokens)
        self.channel.send_prompt(AudioFrame(tick, self.frame_ms, SPEECH_ENERGY, tokens))

    def _prompt_lines(self) -> list[tuple[float, str]]:
        return [(self._seconds(p.start_tick), " ".join(p.emitted)) for p in self.played if p.emitted]

    def _transcript(self) -> TranscriptDoc:
        return transcribe(self.channel.frames, self._prompt_lines(), self.asr, doc_id=str(self.channel.session_id))

    def _spot(self, tick: int) -> KeywordHit | None:
        return self.spotter.update(self.channel.frames, self._seconds(tick))

    def _measure_silence(self) -> None:
        frames = list(self.channel.frames)
        needed = self.t1 + self.t3
        if len(frames) < needed:
            # audio missing after a caller hangup counts as silence
            frames += silent_frames(len(frames), needed - len(frames), self.frame_ms)
        t = self.policy.timers
        self.silence_s = silence_seconds(frames, t.t1_s, t.t3_s, self.policy.vad)
        self.label = label_from_silence(self.silence_s, t.t3_s)

    def on_tick(self) -> None:
        if self.outcome is not None:
            return
        tick = self.channel.local_tick
        try:
            if self.forward_tick is not None:
                self._forwarding_tick(tick)
                return
            hit = self._spot(tick)
            if hit is not None and hit.time_s < self.policy.timers.t2_s:
                self._begin_forward(hit, tick)
                return
            if self.channel.caller_hung_up:
                self._finish_blocked(tick, ended_by="caller")
                return
            if tick >= self.t2:
                self._finish_blocked(tick, ended_by="va")
                return
            if tick == self.t1:
                self._start_prompt("reminder", self.t3, tick)
            if tick == self.t1 + self.t3:
                self._measure_silence()
            if tick == self.t2 - self.closing and self.closing > 0:
                self._start_prompt("closing", self.closing, tick)
            if tick == 0:
                self._start_prompt("greeting", self.greeting, tick)
            self._emit_prompt(tick)
        except ProtocolError as exc:
            self._fail(tick, exc)

    def _begin_forward(self, hit: KeywordHit, tick: int) -> None:
        self.hit = hit
        self.forward_tick = tick
        self.prompt = None
        if self.ask > 0:
            self._start_prompt("ask_caller_name", self.ask, tick)
        self._forwarding_tick(tick)

    def _forwarding_tick(self, tick: int) -> None:
        assert self.forward_tick is not None and self.hit is not None
        ring_tick = self.forward_tick + self.ask + self.capture
        if tick < ring_tick and not self.channel.caller_hung_up:
            self._emit_prompt(tick)
            return
        frames = self.channel.frames
        capture_start = self.forward_tick + self.ask
        caller_name = " ".join(tok for f in frames[capture_start:ring_tick] for tok in f.tokens)
        transcript = self._transcript()
        outcome = self._new_outcome(Disposition.FORWARDED, transcript)
        outcome.hit = self.hit
        outcome.caller_name = caller_name
        outcome.ended_by = "forwarded"
        outcome.ring_s = self._seconds(tick)
        if self.channel.caller_hung_up:
            # caller gave up after saying the name: the callee still gets the ring and context
            outcome.ended_by = "caller"
            outcome.hangup_s = self._seconds(self.channel.caller_hangup_tick - self.channel.answer_tick)
        ring = self.channel.forward(transcript.render(), caller_name)
        if self.store is not None:
            self.store.save(outcome)
            self.store.log_notification(ring, "forwarded", outcome.transcript_path)
        self._done(outcome)

    def _finish_blocked(self, tick: int, ended_by: str) -> None:
        if self.label is None:
            self._measure_silence()
        assert self.label is not None
        if ended_by == "va":
            self.channel.hangup()
            hangup_tick = tick
        else:
            assert self.channel.caller_hangup_tick is not None
            hangup_tick = self.channel.caller_hangup_tick - self.channel.answer_tick
        transcript = self._transcript()
        label, basis = self.label, LabelBasis.SILENCE_RULE
        if label is Label.HUMAN and keyword_override(transcript.caller_text):
            label, basis = Label.ROBOCALL, LabelBasis.KEYWORD_OVERRIDE
        disposition = Disposition.BLOCKED_ROBOCALL if label is Label.ROBOCALL else Disposition.BLOCKED_HUMAN
        outcome = self._new_outcome(disposition, transcript)
        outcome.label_basis = basis
        outcome.hangup_s = self._seconds(hangup_tick)
        outcome.ended_by = ended_by
        if self.store is not None:
            self.store.save(outcome)
        event = self.channel.handler.notify_blocked(
            outcome.session_id, label.value, outcome.recording_path, outcome.transcript_path
        )
        if self.store is not None:
            self.store.log_notification(event, label.value.lower(), outcome.transcript_path)
        self._done(outcome)

    def _fail(self, tick: int, exc: Exception) -> None:
        logger.warning("session %s failed: %s", self.channel.session_id, exc)
        if self.label is None:
            self._measure_silence()
        disposition = Disposition.BLOCKED_HUMAN if self.label is Label.HUMAN else Disposition.BLOCKED_ROBOCALL
        outcome = self._new_outcome(disposition, self._transcript())
        outcome.label_basis = LabelBasis.SILENCE_RULE
        outcome.hangup_s = self._seconds(tick)
        outcome.ended_by = "error"
        outcome.error = str(exc)
        if self.store is not None:
            self.store.save(outcome)
        self._done(outcome)

    def _new_outcome(self, disposition: Disposition, transcript: TranscriptDoc) -> ScreeningOutcome:
        reminder = next((p for p in self.played if p.name == "reminder"), None)
        return ScreeningOutcome(
            session_id=self.channel.session_id,
            caller_id=self.channel.caller_id,
            disposition=disposition,
            transcript=transcript,
            recording=tuple(self.channel.frames),
            silence_s=self.silence_s,
            silence_label=self.label,
            reminder_s=self._seconds(reminder.start_tick) if reminder else None,
            prompts=tuple((self._seconds(p.start_tick), p.name) for p in self.played),
        )

    def _done(self, outcome: ScreeningOutcome) -> None:
        self.outcome = outcome
        self.prompt = None
        self.channel.driver = None
        if self.on_done is not None:
            self.on_done(outcome)


def screen_call(
    channel: CallChannel,
    policy: Policy,
    network: Network | None = None,
    store: OutcomeStore | None = None,
    max_ticks: int = 100_000,
) -> ScreeningOutcome:
    """Screen one answered call, advancing the simulation until it resolves."""
    network = network or channel.handler.network
    screener = Screener(channel, policy, store)
    network.run_until(lambda: screener.outcome is not None, max_ticks)
    assert screener.outcome is not None
    return screener.outcome


class VirtualAssistant:
    """Incoming-call handler wired to the interceptor and one screener per unknown call."""

    def __init__(
        self,
        network: Network,
        address: str,
        policy: Policy,
        callee: CalleeLog | None = None,
        store: OutcomeStore | None = None,
    ):
        self.policy = policy
        self.store = store
        self.outcomes: dict[int, ScreeningOutcome] = {}
        self.screeners: dict[int, Screener] = {}
        self.handler = IncomingCallHandler(
            network,
            address,
            policy.lists,
            callee,
            on_unknown=self._screen,
            on_disposition=self._intercepted,
        )

    @property
    def callee(self) -> CalleeLog:
        return self.handler.callee

    def _screen(self, channel: CallChannel) -> None:
        self.screeners[channel.session_id] = Screener(channel, self.policy, self.store, self._record)

    def _record(self, outcome: ScreeningOutcome) -> None:
        self.outcomes[outcome.session_id] = outcome

    def _intercepted(self, session: Session, caller: CallerId, disposition: InitialDisposition) -> None:
        if disposition is InitialDisposition.PASS_WHITELISTED:
            self._record(ScreeningOutcome(session.session_id, caller, Disposition.WHITELIST_PASS, ring_s=0.0, ended_by="forwarded"))
        elif disposition is InitialDisposition.DROP_BLACKLISTED:
            self._record(ScreeningOutcome(session.session_id, caller, Disposition.BLACKLIST_DROP, hangup_s=0.0, ended_by="va"))
