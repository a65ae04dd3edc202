"""Hypothesis strategies and seeded generators shared by unit and acceptance tests."""

import random

from hypothesis import strategies as st

from robocallguard.audio import AudioFrame
from robocallguard.wire import PAYLOAD_KINDS, CallerId, MessageKind, WireMessage, encode_frame

caller_ids = st.text(alphabet="0123456789", min_size=7, max_size=15).map(CallerId)
tokens = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=12)
frames = st.builds(
    AudioFrame,
    st.integers(0, 2**32 - 1),
    st.integers(1, 2**16 - 1),
    st.floats(0, 1e6, allow_nan=False),
    st.lists(tokens, max_size=4).map(tuple),
)


@st.composite
def messages(draw):
    kind = draw(st.sampled_from(list(MessageKind)))
    sid = draw(st.integers(0, 2**64 - 1))
    caller = draw(caller_ids) if kind == MessageKind.INVITE else None
    payload = encode_frame(draw(frames)) if kind in PAYLOAD_KINDS else b""
    return WireMessage(kind, sid, caller, payload)


def random_message(rng: random.Random) -> WireMessage:
    """Plain-random counterpart of ``messages`` for bulk runs."""
    kind = rng.choice(list(MessageKind))
    sid = rng.getrandbits(64)
    caller = None
    if kind == MessageKind.INVITE:
        caller = CallerId("".join(rng.choice("0123456789") for _ in range(rng.randint(7, 15))))
    payload = b""
    if kind in PAYLOAD_KINDS:
        words = tuple(
            "".join(rng.choice("abcdefghijklmnopqrstuvwxyz<>é") for _ in range(rng.randint(1, 9)))
            for _ in range(rng.randint(0, 5))
        )
        frame = AudioFrame(rng.getrandbits(32), rng.randint(1, 65535), rng.uniform(0, 10), words)
        payload = encode_frame(frame)
    return WireMessage(kind, sid, caller, payload)
