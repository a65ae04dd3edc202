"""Virtual-assistant call screening on a simulated telephony network."""

from robocallguard.audio import AudioFrame, Utterance, VadConfig, render_utterances, silence_seconds, vad
from robocallguard.interceptor import InitialDisposition, ScreeningList, initial_disposition, load_lists
from robocallguard.kws import KeywordHit, NameModel, normalize, spot
from robocallguard.screening import (
    Disposition,
    Policy,
    ScreeningOutcome,
    TimerConfig,
    keyword_override,
    label_from_silence,
    load_policy,
    screen_call,
)
from robocallguard.wire import CallerId, MessageKind, WireMessage, decode_message, encode_message

__version__ = "0.1.0"

__all__ = [
    "AudioFrame",
    "CallerId",
    "Disposition",
    "InitialDisposition",
    "KeywordHit",
    "MessageKind",
    "NameModel",
    "Policy",
    "ScreeningList",
    "ScreeningOutcome",
    "TimerConfig",
    "Utterance",
    "VadConfig",
    "WireMessage",
    "decode_message",
    "encode_message",
    "initial_disposition",
    "keyword_override",
    "label_from_silence",
    "load_lists",
    "load_policy",
    "normalize",
    "render_utterances",
    "screen_call",
    "silence_seconds",
    "spot",
    "vad",
]
