import pytest

from robocallguard.audio import AudioFrame
from robocallguard.interceptor import ScreeningList
from robocallguard.telephony import (
    CallChannel,
    CalleeLog,
    Dialer,
    IncomingCallHandler,
    Network,
    ProtocolError,
    Session,
    SessionState,
    SilentCaller,
    VirtualClock,
)
from robocallguard.wire import CallerId, MessageKind, WireMessage

CALLER = CallerId("5550001111")


class Recorder:
    """Caller behaviour that logs the tick each PROMPT arrives on."""

    def __init__(self):
        self.heard = []

    def hear(self, frame, tick):
        self.heard.append((tick, frame))

    def next_frame(self, index, tick):
        return AudioFrame(index)


def setup(lists=None, on_unknown=None, transport="memory"):
    net = Network(transport=transport)
    handler = IncomingCallHandler(net, "va", lists, CalleeLog(), on_unknown=on_unknown)
    dialer = Dialer(net, "pcd")
    return net, handler, dialer


def test_clock():
    clock = VirtualClock()
    assert clock.ticks(35) == 350
    clock.advance(3)
    assert clock.tick == 3 and clock.now_s() == pytest.approx(0.3)


def test_illegal_transition_is_an_error():
    s = Session(1)
    s.transition(SessionState.INVITING, 0)
    with pytest.raises(ProtocolError):
        s.transition(SessionState.CONNECTED, 1)
    s.transition(SessionState.TERMINATED, 1)
    with pytest.raises(ProtocolError):
        s.transition(SessionState.INVITING, 2)


def test_blacklisted_call_is_denied():
    net, handler, dialer = setup(ScreeningList(blacklist={CALLER}))
    call = dialer.place_call("va", CALLER)
    net.run_until(lambda: call.settled, 10)
    assert call.state is SessionState.TERMINATED and call.reason == "denied"
    assert call.audio_sent == 0
    assert handler.callee.events == []


@pytest.mark.parametrize("transport", ["memory", "stream"])
def test_screened_call_streams_one_frame_per_tick(transport):
    channels: list[CallChannel] = []

    def drive(channel):
        channels.append(channel)

        def tick():
            if channel.local_tick >= 350:
                channel.hangup()
                channel.driver = None

        channel.driver = tick

    net, handler, dialer = setup(on_unknown=drive, transport=transport)
    call = dialer.place_call("va", CALLER, SilentCaller())
    net.run_until(lambda: call.settled, 1000)
    assert call.audio_sent == 350
    assert len(channels[0].frames) == 350
    assert [f.index for f in channels[0].frames] == list(range(350))
    assert call.session.transcript[-1][1:] == ("in", MessageKind.HANGUP)
    assert call.state is SessionState.TERMINATED
    assert handler.sessions[call.session_id].state is SessionState.TERMINATED
    # silent pickup: the callee saw nothing
    assert handler.callee.events == []


def test_concurrent_calls_get_distinct_sessions():
    net, handler, dialer = setup(on_unknown=lambda ch: None)
    a = dialer.place_call("va", CALLER)
    b = dialer.place_call("va", CallerId("5550002222"))
    assert a.session_id != b.session_id
    assert set(handler.channels) == {a.session_id, b.session_id}


def test_prompt_reaches_caller_in_same_tick():
    def drive(channel):
        channel.driver = lambda: channel.send_prompt(AudioFrame(channel.local_tick, energy=1.0, tokens=("hello",)))

    net, handler, dialer = setup(on_unknown=drive)
    rec = Recorder()
    dialer.place_call("va", CALLER, rec)
    for _ in range(3):
        sent_at = net.clock.tick
        net.tick()
        assert rec.heard[-1][0] == sent_at


def test_duplicate_answer_is_an_error():
    net, handler, dialer = setup(on_unknown=lambda ch: None)
    call = dialer.place_call("va", CALLER)
    invite = WireMessage(MessageKind.INVITE, call.session_id, CALLER)
    with pytest.raises(ProtocolError, match="duplicate ANSWER"):
        handler.answer_call(invite)
    with pytest.raises(ProtocolError, match="duplicate ANSWER"):
        dialer.on_message(WireMessage(MessageKind.ANSWER, call.session_id))


def test_unreachable_after_thirty_seconds():
    net = Network()
    dialer = Dialer(net, "pcd")
    call = dialer.place_call("nobody", CALLER)
    net.run_until(lambda: call.settled, 400)
    assert call.reason == "unreachable"
    assert call.session.history[-1] == (300, SessionState.TERMINATED)


def test_whitelisted_call_rings_and_connects():
    net, handler, dialer = setup(ScreeningList(user_whitelist={CALLER}))
    call = dialer.place_call("va", CALLER)
    assert call.state is SessionState.CONNECTED
    assert [e.kind for e in handler.callee.events] == ["Ring"]
    assert handler.channels == {}


def test_caller_hangup_marks_channel():
    def drive(channel):
        channel.driver = lambda: None

    net, handler, dialer = setup(on_unknown=drive)
    call = dialer.place_call("va", CALLER)
    for _ in range(5):
        net.tick()
    dialer.hangup(call)
    channel = handler.channels[call.session_id]
    assert channel.caller_hung_up and channel.caller_hangup_tick == 5
    with pytest.raises(ProtocolError):
        channel.send_prompt(AudioFrame(0))


def test_registering_address_twice_fails():
    net = Network()
    Dialer(net, "x")
    with pytest.raises(ValueError):
        Dialer(net, "x")
