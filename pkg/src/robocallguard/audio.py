"""Simulated call audio: annotated frame streams, rendering and voice activity detection.

Audio is never sampled. A stream is a list of fixed-duration frames, each with a
synthetic energy value and the words spoken inside it, so downstream keyword
spotting and transcription are exact unless noise is injected on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from robocallguard.text import normalize

FRAME_MS = 100
SPEECH_ENERGY = 1.0
DEFAULT_RATE_WPS = 2.5


@dataclass(frozen=True)
class AudioFrame:
    index: int
    duration_ms: int = FRAME_MS
    energy: float = 0.0
    tokens: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError(f"frame index must be non-negative, got {self.index}")
        if self.duration_ms <= 0:
            raise ValueError(f"frame duration must be positive, got {self.duration_ms}")
        if not self.energy >= 0:
            raise ValueError(f"frame energy must be non-negative, got {self.energy}")
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))

    @property
    def start_s(self) -> float:
        return self.index * self.duration_ms / 1000


@dataclass(frozen=True)
class Utterance:
    """One scripted stretch of caller speech.

    ``text`` may be given as a string; it is normalized into a word tuple.
    """

    text: tuple[str, ...]
    start_offset_s: float = 0.0
    speaking_rate_wps: float = DEFAULT_RATE_WPS
    trailing_pause_s: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.text, str):
            object.__setattr__(self, "text", tuple(normalize(self.text)))
        else:
            object.__setattr__(self, "text", tuple(self.text))
        if self.start_offset_s < 0:
            raise ValueError(f"negative utterance offset {self.start_offset_s}")
        if self.speaking_rate_wps <= 0:
            raise ValueError(f"speaking rate must be positive, got {self.speaking_rate_wps}")
        if self.trailing_pause_s < 0:
            raise ValueError(f"negative trailing pause {self.trailing_pause_s}")

    def start_frame(self, frame_ms: int = FRAME_MS) -> int:
        return math.floor(_exact(self.start_offset_s) * 1000 / frame_ms)

    def span_frames(self, frame_ms: int = FRAME_MS) -> int:
        """Frames occupied by speech: ceil(words / rate / frame duration)."""
        seconds = Fraction(len(self.text)) / _exact(self.speaking_rate_wps)
        return math.ceil(seconds * 1000 / frame_ms)

    def reserved_frames(self, frame_ms: int = FRAME_MS) -> int:
        """Speech frames plus the trailing pause, used for overlap checks."""
        pause = math.ceil(_exact(self.trailing_pause_s) * 1000 / frame_ms)
        return self.span_frames(frame_ms) + pause

    def end_s(self, frame_ms: int = FRAME_MS) -> float:
        return (self.start_frame(frame_ms) + self.span_frames(frame_ms)) * frame_ms / 1000


@dataclass(frozen=True)
class VadConfig:
    voice_threshold: float = 0.1
    hangover_frames: int = 0

    def __post_init__(self) -> None:
        if not self.voice_threshold > 0:
            raise ValueError(f"voice threshold must be positive, got {self.voice_threshold}")
        if self.hangover_frames < 0:
            raise ValueError(f"hangover must be non-negative, got {self.hangover_frames}")


class OverlapError(ValueError):
    def __init__(self, first: Utterance, second: Utterance):
        self.pair = (first, second)
        super().__init__(
            f"utterances overlap: {' '.join(first.text)!r} at {first.start_offset_s}s "
            f"and {' '.join(second.text)!r} at {second.start_offset_s}s"
        )


def _exact(value: float) -> Fraction:
    # decimal literal semantics: 0.1 is one tenth, not its binary neighbour
    return Fraction(repr(float(value)))


def frame_count(duration_s: float, frame_ms: int = FRAME_MS) -> int:
    return math.ceil(_exact(duration_s) * 1000 / frame_ms)


def speech_frames(utterance: Utterance, *, frame_ms: int = FRAME_MS, energy: float = SPEECH_ENERGY) -> list[AudioFrame]:
    """Frames for one utterance, indexed from 0; words spread evenly in order."""
    span = utterance.span_frames(frame_ms)
    buckets: list[list[str]] = [[] for _ in range(span)]
    n = len(utterance.text)
    for j, word in enumerate(utterance.text):
        buckets[j * span // n].append(word)
    return [AudioFrame(i, frame_ms, energy, tuple(b)) for i, b in enumerate(buckets)]


def render_utterances(
    script: Sequence[Utterance],
    total_duration_s: float,
    *,
    frame_ms: int = FRAME_MS,
    speech_energy: float = SPEECH_ENERGY,
    vad_config: VadConfig | None = None,
) -> list[AudioFrame]:
    """Render a caller script into exactly ceil(total / frame) frames.

    Frames inside an utterance span carry ``speech_energy`` and that utterance's
    words; all other frames are silent with no tokens.
    """
    if vad_config is not None and speech_energy < vad_config.voice_threshold:
        raise ValueError("speech energy is below the voice threshold")
    n_frames = frame_count(total_duration_s, frame_ms)
    ordered = sorted(script, key=lambda u: u.start_frame(frame_ms))
    for prev, nxt in zip(ordered, ordered[1:]):
        if prev.start_frame(frame_ms) + prev.reserved_frames(frame_ms) > nxt.start_frame(frame_ms):
            raise OverlapError(prev, nxt)

    frames = [AudioFrame(i, frame_ms) for i in range(n_frames)]
    for utt in ordered:
        start = utt.start_frame(frame_ms)
        if start + utt.span_frames(frame_ms) > n_frames:
            raise ValueError(
                f"utterance at {utt.start_offset_s}s runs past the {total_duration_s}s stream"
            )
        for f in speech_frames(utt, frame_ms=frame_ms, energy=speech_energy):
            frames[start + f.index] = AudioFrame(start + f.index, frame_ms, f.energy, f.tokens)
    return frames


def script_duration_s(script: Sequence[Utterance], frame_ms: int = FRAME_MS) -> float:
    """Earliest stream length that holds every utterance including trailing pauses."""
    end = max((u.start_frame(frame_ms) + u.reserved_frames(frame_ms) for u in script), default=0)
    return end * frame_ms / 1000


def vad(frame: AudioFrame, config: VadConfig) -> bool:
    """Single-frame decision; the threshold is inclusive."""
    return frame.energy >= config.voice_threshold


def vad_stream(frames: Sequence[AudioFrame], config: VadConfig) -> list[bool]:
    """Per-frame decisions with hangover: a voiced frame keeps the next ``hangover_frames`` voiced."""
    out = []
    remaining = 0
    for frame in frames:
        if vad(frame, config):
            out.append(True)
            remaining = config.hangover_frames
        elif remaining > 0:
            out.append(True)
            remaining -= 1
        else:
            out.append(False)
    return out


def _window(frames: Sequence[AudioFrame], start_s: float, length_s: float) -> tuple[int, int]:
    if not frames:
        raise ValueError("empty frame stream")
    frame_ms = frames[0].duration_ms
    start_f = _exact(start_s) * 1000 / frame_ms
    n_f = _exact(length_s) * 1000 / frame_ms
    if start_f.denominator != 1 or n_f.denominator != 1:
        raise ValueError(f"window [{start_s}, +{length_s}) s is not aligned to {frame_ms} ms frames")
    start, n = int(start_f), int(n_f)
    if start < 0 or n < 0 or start + n > len(frames):
        raise ValueError(
            f"window [{start_s}, {start_s + length_s}) s exceeds the {len(frames)}-frame stream"
        )
    return start, n


def silence_seconds(
    frames: Sequence[AudioFrame], window_start_s: float, window_len_s: float, config: VadConfig
) -> float:
    """Unvoiced frames in the window times the frame duration.

    Hangover carried in from frames before the window is honoured.
    """
    start, n = _window(frames, window_start_s, window_len_s)
    voiced = vad_stream(frames[: start + n], config)[start:]
    silent = n - sum(voiced)
    return silent * frames[0].duration_ms / 1000


def voiced_seconds(
    frames: Sequence[AudioFrame], window_start_s: float, window_len_s: float, config: VadConfig
) -> float:
    start, n = _window(frames, window_start_s, window_len_s)
    voiced = vad_stream(frames[: start + n], config)[start:]
    return sum(voiced) * frames[0].duration_ms / 1000


def silent_frames(start_index: int, count: int, frame_ms: int = FRAME_MS) -> list[AudioFrame]:
    return [AudioFrame(start_index + i, frame_ms) for i in range(count)]
