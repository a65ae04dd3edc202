from hypothesis import given
from hypothesis import strategies as st

from robocallguard.audio import Utterance, render_utterances
from robocallguard.text import UNK
from robocallguard.transcription import AsrNoise, load_corpus, parse_transcript, transcribe


def test_prompt_only():
    doc = transcribe([], [(0.0, "State the name")])
    assert doc.render() == "VA: state the name\n"


def test_interleaves_by_time():
    frames = render_utterances([Utterance("taylor", 6.0)], 8.0)
    doc = transcribe(frames, [(0.0, "who are you calling")])
    assert doc.render() == "VA: who are you calling\nCALLER: taylor\n"


def test_turns_split_on_gap_and_on_prompt():
    frames = render_utterances([Utterance("one two", 0.0), Utterance("three", 1.2), Utterance("four", 3.0)], 5.0)
    doc = transcribe(frames, [(2.5, "reminder")])
    assert [ln.render() for ln in doc.lines] == ["CALLER: one two three", "VA: reminder", "CALLER: four"]
    frames = render_utterances([Utterance("one", 0.0), Utterance("two", 1.4)], 3.0)
    assert len(transcribe(frames).lines) == 2


def test_noiseless_is_lossless():
    script = [Utterance("hello can you forward my call", 0.0), Utterance("to taylor", 4.0)]
    frames = render_utterances(script, 6.0)
    assert transcribe(frames).caller_tokens == ("hello", "can", "you", "forward", "my", "call", "to", "taylor")


@given(st.lists(st.sampled_from(["a", "b", "press", "taylor"]), min_size=1, max_size=30), st.floats(0, 0.99), st.integers(0, 2**32))
def test_noise_is_substitution_only(words, w, seed):
    frames = render_utterances([Utterance(tuple(words), 0.0)], 20.0)
    clean = transcribe(frames).caller_tokens
    noisy = transcribe(frames, noise=AsrNoise(w, seed)).caller_tokens
    assert len(noisy) == len(clean)
    assert all(n == c or n == UNK for n, c in zip(noisy, clean))
    assert transcribe(frames, noise=AsrNoise(w, seed)).caller_tokens == noisy


def test_parse_round_trip_and_plain_files(tmp_path):
    frames = render_utterances([Utterance("press one", 1.0)], 3.0)
    doc = transcribe(frames, [(0.0, "hello")], doc_id="x")
    back = parse_transcript(doc.render(), "x")
    assert back.caller_tokens == ("press", "one")
    assert parse_transcript("Press ONE now\n", "y").caller_tokens == ("press", "one", "now")
    (tmp_path / "b.txt").write_text("beta\n")
    (tmp_path / "a.txt").write_text("alpha\n")
    (tmp_path / "ignored.md").write_text("x")
    assert [d.doc_id for d in load_corpus(tmp_path)] == ["a", "b"]
