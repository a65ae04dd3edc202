"""Correct-name keyword spotting over a caller's annotated token stream."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Iterator, Sequence

from robocallguard.audio import AudioFrame
from robocallguard.text import levenshtein, normalize

__all__ = ["KeywordHit", "NameModel", "NameSpotter", "normalize", "spot", "spot_all"]


@dataclass(frozen=True)
class NameModel:
    """Correct names (1-3 words each) plus the fuzzy-match and miss model."""

    names: tuple[str, ...]
    max_edit_distance: int = 1
    miss_probability: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.names, str):
            raise TypeError("names must be a collection of strings, not a single string")
        cleaned = []
        for name in self.names:
            words = normalize(name)
            if not words:
                raise ValueError(f"name {name!r} is empty after normalization")
            if len(words) > 3:
                raise ValueError(f"name {name!r} has more than 3 words")
            cleaned.append(" ".join(words))
        if not cleaned:
            raise ValueError("at least one correct name is required")
        object.__setattr__(self, "names", tuple(sorted(set(cleaned))))
        if self.max_edit_distance < 0:
            raise ValueError("max_edit_distance must be non-negative")
        if not 0 <= self.miss_probability < 1:
            raise ValueError(f"miss_probability must be in [0, 1), got {self.miss_probability}")

    @property
    def name_words(self) -> list[tuple[str, tuple[str, ...]]]:
        return [(n, tuple(n.split())) for n in self.names]


@dataclass(frozen=True)
class KeywordHit:
    name: str
    time_s: float
    matched_text: tuple[str, ...]


def _miss_draw(seed: int, position: int, name: str) -> float:
    # counter-based draw: one independent uniform per (occurrence, name), stable across rescans
    digest = hashlib.blake2b(
        struct.pack(">QQ", seed & (2**64 - 1), position) + name.encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big") / 2**64


def _tokens_upto(frames: Sequence[AudioFrame], upto_s: float) -> list[tuple[str, AudioFrame]]:
    upto_ms = round(upto_s * 1000)
    out = []
    for frame in frames:
        if (frame.index + 1) * frame.duration_ms > upto_ms:
            break
        out.extend((tok, frame) for tok in frame.tokens)
    return out


def _match(words: Sequence[str], end: int, parts: tuple[str, ...], max_edit: int) -> bool:
    start = end - len(parts) + 1
    if start < 0:
        return False
    dist = 0
    for got, want in zip(words[start : end + 1], parts):
        dist += levenshtein(got, want)
        if dist > max_edit:
            return False
    return True


def iter_occurrences(
    frames: Sequence[AudioFrame], model: NameModel, upto_s: float
) -> Iterator[tuple[KeywordHit, bool]]:
    """Name occurrences in stream order, each flagged True when the miss model drops it."""
    if upto_s < 0:
        raise ValueError("upto_s must be non-negative")
    stream = _tokens_upto(frames, upto_s)
    words = [tok for tok, _ in stream]
    for end in range(len(stream)):
        for name, parts in model.name_words:
            if not _match(words, end, parts, model.max_edit_distance):
                continue
            missed = model.miss_probability > 0 and _miss_draw(model.seed, end, name) < model.miss_probability
            window = tuple(words[end - len(parts) + 1 : end + 1])
            yield KeywordHit(name, stream[end][1].start_s, window), missed


class NameSpotter:
    """Incremental form of :func:`spot` for a growing frame stream.

    Each call only examines words that arrived since the previous one, so
    screening a call costs linear rather than quadratic time. The first
    non-missed occurrence is returned once, by the call that first sees it.
    """

    def __init__(self, model: NameModel):
        self.model = model
        self.words: list[str] = []
        self.starts: list[float] = []
        self.frames_seen = 0

    def update(self, frames: Sequence[AudioFrame], upto_s: float) -> KeywordHit | None:
        upto_ms = round(upto_s * 1000)
        first_new = len(self.words)
        while self.frames_seen < len(frames):
            frame = frames[self.frames_seen]
            if (frame.index + 1) * frame.duration_ms > upto_ms:
                break
            self.words.extend(frame.tokens)
            self.starts.extend([frame.start_s] * len(frame.tokens))
            self.frames_seen += 1
        m = self.model
        for end in range(first_new, len(self.words)):
            for name, parts in m.name_words:
                if not _match(self.words, end, parts, m.max_edit_distance):
                    continue
                if m.miss_probability > 0 and _miss_draw(m.seed, end, name) < m.miss_probability:
                    continue
                return KeywordHit(name, self.starts[end], tuple(self.words[end - len(parts) + 1 : end + 1]))
        return None


def spot_all(frames: Sequence[AudioFrame], model: NameModel, upto_s: float) -> list[tuple[KeywordHit, bool]]:
    return list(iter_occurrences(frames, model, upto_s))


def spot(frames: Sequence[AudioFrame], model: NameModel, upto_s: float) -> KeywordHit | None:
    """First non-missed correct-name occurrence among tokens heard by ``upto_s``.

    Only frames that end at or before ``upto_s`` are scanned. The hit time is the
    start of the frame holding the last word of the name.
    """
    for hit, missed in iter_occurrences(frames, model, upto_s):
        if not missed:
            return hit
    return None
