import pytest

from robocallguard.interceptor import (
    InitialDisposition,
    ListConflictError,
    ListFormatError,
    ScreeningList,
    initial_disposition,
    load_lists,
    parse_lists,
)
from robocallguard.wire import CallerId

A, B, C = CallerId("5550001"), CallerId("5550002"), CallerId("5550003")


def test_dispositions():
    lists = ScreeningList(user_whitelist={A}, global_whitelist={B}, blacklist={C})
    assert initial_disposition(A, lists) is InitialDisposition.PASS_WHITELISTED
    assert initial_disposition(B, lists) is InitialDisposition.PASS_WHITELISTED
    assert initial_disposition(C, lists) is InitialDisposition.DROP_BLACKLISTED
    assert initial_disposition(CallerId("5550004"), lists) is InitialDisposition.SCREEN_UNKNOWN


def test_empty_file(tmp_path):
    path = tmp_path / "lists.txt"
    path.write_text("")
    assert load_lists(path) == ScreeningList()


def test_one_of_each():
    lists = parse_lists("# header\nW 5550001\n\nG 5550002  # trailing comment\nB 5550003\n")
    assert lists == ScreeningList(frozenset({A}), frozenset({B}), frozenset({C}))


def test_conflict_lists_ids():
    with pytest.raises(ListConflictError) as info:
        parse_lists("W 5550001\nB 5550001\n")
    assert info.value.ids == [A]


def test_global_whitelist_conflict_too():
    with pytest.raises(ListConflictError):
        ScreeningList(global_whitelist={A}, blacklist={A})


@pytest.mark.parametrize("line", ["X 5550001", "W", "W 555-0001", "W 5550001 extra", "W 123"])
def test_malformed_line_reports_line_number(line):
    with pytest.raises(ListFormatError) as info:
        parse_lists(f"W 5550009\n{line}\n", "lists.txt")
    assert info.value.lineno == 2
    assert "lists.txt:2" in str(info.value)
