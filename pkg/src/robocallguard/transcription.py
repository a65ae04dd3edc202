"""Transcriber: speaker-turn transcripts from recorded caller frames and VA prompts."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from robocallguard.audio import AudioFrame
from robocallguard.text import UNK, normalize

VA = "VA"
CALLER = "CALLER"
# a caller pause at least this long starts a new turn
TURN_GAP_S = 1.0


@dataclass(frozen=True)
class AsrNoise:
    word_error_rate: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.word_error_rate < 1:
            raise ValueError(f"word_error_rate must be in [0, 1), got {self.word_error_rate}")


@dataclass(frozen=True)
class TranscriptLine:
    time_s: float
    speaker: str
    text: str

    def render(self) -> str:
        return f"{self.speaker}: {self.text}"


@dataclass(frozen=True)
class TranscriptDoc:
    doc_id: str
    text: tuple[str, ...]
    source: str = "screened_call"
    lines: tuple[TranscriptLine, ...] = field(default=(), compare=False)

    @property
    def caller_tokens(self) -> tuple[str, ...]:
        if not self.lines:
            return self.text
        return tuple(tok for line in self.lines if line.speaker == CALLER for tok in line.text.split())

    @property
    def caller_text(self) -> str:
        return " ".join(self.caller_tokens)

    def render(self) -> str:
        if not self.lines:
            return " ".join(self.text) + ("\n" if self.text else "")
        return "".join(line.render() + "\n" for line in self.lines)


def _caller_turns(frames: Sequence[AudioFrame], breaks: Sequence[float]) -> list[TranscriptLine]:
    turns: list[TranscriptLine] = []
    current: list[str] = []
    start_s = last_s = 0.0
    for frame in frames:
        if not frame.tokens:
            continue
        t = frame.start_s
        if current and (t - last_s >= TURN_GAP_S or any(last_s < b <= t for b in breaks)):
            turns.append(TranscriptLine(start_s, CALLER, " ".join(current)))
            current = []
        if not current:
            start_s = t
        current.extend(frame.tokens)
        last_s = t
    if current:
        turns.append(TranscriptLine(start_s, CALLER, " ".join(current)))
    return turns


def transcribe(
    frames: Sequence[AudioFrame],
    prompts: Sequence[tuple[float, str]] = (),
    noise: AsrNoise = AsrNoise(),
    doc_id: str = "",
) -> TranscriptDoc:
    """Interleave VA prompt lines and caller turns in time order.

    With a nonzero word error rate each caller token is independently replaced by
    ``<unk>``; the draw sequence depends only on the seed, so token count and
    order never change.
    """
    prompt_lines = [TranscriptLine(t, VA, " ".join(normalize(text))) for t, text in prompts]
    caller_lines = _caller_turns(frames, [t for t, _ in prompts])
    if noise.word_error_rate > 0:
        rng = random.Random(noise.seed)
        noisy = []
        for line in caller_lines:
            words = [UNK if rng.random() < noise.word_error_rate else w for w in line.text.split()]
            noisy.append(TranscriptLine(line.time_s, CALLER, " ".join(words)))
        caller_lines = noisy
    # VA first on equal timestamps: the prompt is what the caller answers
    lines = sorted(prompt_lines + caller_lines, key=lambda ln: (ln.time_s, ln.speaker != VA))
    tokens = tuple(tok for line in lines for tok in line.text.split())
    return TranscriptDoc(doc_id, tokens, "screened_call", tuple(lines))


def parse_transcript(text: str, doc_id: str = "") -> TranscriptDoc:
    """Read a transcript file back; files without speaker prefixes are treated as caller speech."""
    lines = []
    plain = []
    for raw in text.splitlines():
        speaker, sep, rest = raw.partition(":")
        if sep and speaker.strip() in (VA, CALLER):
            lines.append(TranscriptLine(0.0, speaker.strip(), " ".join(normalize(rest))))
        else:
            plain.extend(normalize(raw))
    if lines:
        if plain:
            lines.append(TranscriptLine(0.0, CALLER, " ".join(plain)))
        tokens = tuple(tok for line in lines for tok in line.text.split())
        return TranscriptDoc(doc_id, tokens, "corpus_file", tuple(lines))
    return TranscriptDoc(doc_id, tuple(plain), "corpus_file")


def load_corpus(corpus_dir: str | Path) -> list[TranscriptDoc]:
    """All ``*.txt`` files in a directory, sorted by doc id (the filename stem)."""
    paths = sorted(Path(corpus_dir).glob("*.txt"), key=lambda p: p.stem)
    return [parse_transcript(p.read_text(encoding="utf-8"), p.stem) for p in paths]
