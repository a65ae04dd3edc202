"""Token normalization shared by keyword spotting, transcription and clustering."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

UNK = "<unk>"


def normalize(text: str) -> list[str]:
    """Lowercase, split on whitespace and strip non-alphanumeric characters from token edges.

    Tokens that are empty after stripping are dropped. The ASR marker ``<unk>`` is
    passed through untouched. ``normalize(" ".join(normalize(s))) == normalize(s)``.
    """
    tokens = []
    for raw in text.lower().split():
        if raw == UNK:
            tokens.append(raw)
            continue
        start, end = 0, len(raw)
        while start < end and not raw[start].isalnum():
            start += 1
        while end > start and not raw[end - 1].isalnum():
            end -= 1
        if start < end:
            tokens.append(raw[start:end])
    return tokens


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    data = resources.files("robocallguard").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    words = set()
    for line in data.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


@lru_cache(maxsize=65536)
def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]
