"""Call Interceptor: initial disposition of a call from its caller ID alone."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

from robocallguard.wire import CallerId


class InitialDisposition(enum.Enum):
    PASS_WHITELISTED = "PassWhitelisted"
    DROP_BLACKLISTED = "DropBlacklisted"
    SCREEN_UNKNOWN = "ScreenUnknown"


class ListFormatError(ValueError):
    def __init__(self, path: str, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class ListConflictError(ValueError):
    def __init__(self, ids: list[CallerId]):
        self.ids = sorted(ids)
        super().__init__("caller ids both whitelisted and blacklisted: " + ", ".join(map(str, self.ids)))


@dataclass(frozen=True)
class ScreeningList:
    user_whitelist: frozenset[CallerId] = field(default_factory=frozenset)
    global_whitelist: frozenset[CallerId] = field(default_factory=frozenset)
    blacklist: frozenset[CallerId] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        for name in ("user_whitelist", "global_whitelist", "blacklist"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        overlap = (self.user_whitelist | self.global_whitelist) & self.blacklist
        if overlap:
            raise ListConflictError(list(overlap))

    @property
    def whitelist(self) -> frozenset[CallerId]:
        return self.user_whitelist | self.global_whitelist


def initial_disposition(caller: CallerId, lists: ScreeningList) -> InitialDisposition:
    # whitelist first; the lists are disjoint so the order only fixes determinism
    if caller in lists.user_whitelist or caller in lists.global_whitelist:
        return InitialDisposition.PASS_WHITELISTED
    if caller in lists.blacklist:
        return InitialDisposition.DROP_BLACKLISTED
    return InitialDisposition.SCREEN_UNKNOWN


_SECTIONS = {"W": "user_whitelist", "G": "global_whitelist", "B": "blacklist"}


def parse_lists(text: str, source: str = "<lists>") -> ScreeningList:
    """Parse ``<W|G|B> <digits>`` lines; ``#`` starts a comment."""
    sets: dict[str, set[CallerId]] = {name: set() for name in _SECTIONS.values()}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in _SECTIONS:
            raise ListFormatError(source, lineno, f"expected '<W|G|B> <digits>', got {line!r}")
        try:
            caller = CallerId(parts[1])
        except ValueError as exc:
            raise ListFormatError(source, lineno, str(exc)) from None
        sets[_SECTIONS[parts[0]]].add(caller)
    return ScreeningList(**{k: frozenset(v) for k, v in sets.items()})


def load_lists(path: str | Path) -> ScreeningList:
    path = Path(path)
    return parse_lists(path.read_text(encoding="utf-8"), str(path))
