import filecmp

from robocallguard.synth import (
    CALLEE_NAME,
    contains_name,
    labeling_suite,
    robocall_corpus,
    words_for_seconds,
    write_shipped_data,
)


def test_shipped_data_is_regenerable(data_dir, tmp_path):
    write_shipped_data(tmp_path)
    files = sorted(p.relative_to(tmp_path).as_posix() for p in tmp_path.rglob("*") if p.is_file())
    shipped = sorted(p.relative_to(data_dir).as_posix() for p in data_dir.rglob("*") if p.is_file())
    assert files == shipped
    _, mismatch, errors = filecmp.cmpfiles(data_dir, tmp_path, files, shallow=False)
    assert mismatch == [] and errors == []


def test_robocalls_never_say_the_name():
    corpus = robocall_corpus()
    assert len(corpus) == 50
    assert not any(contains_name(text, (CALLEE_NAME,)) for text in corpus.values())


def test_contains_name_is_fuzzy():
    assert contains_name("hi is tailor there")
    assert not contains_name("hi is tyler there")


def test_labeling_suite_shape():
    suite = labeling_suite()
    assert len(suite) == 100
    assert sum(s.expected.value == "BlockedHuman" for s in suite) == 10
    long_ones = [s for s in suite if s.scenario_id.startswith("long")]
    # long pitches must outlast the reminder window
    assert all(len(s.script[0].text) >= words_for_seconds(30.0) for s in long_ones)
