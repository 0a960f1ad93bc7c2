import pytest
from hypothesis import given
from hypothesis import strategies as st

from prepub.errors import MalformedHandle
from prepub.handles import Handle, is_valid_handle, validate_handle


def test_valid_handle_has_four_parts():
    h = validate_handle("RePEc:aa:bb:cc")
    assert len(h.parts) == 4
    assert h.archive == "aa"


def test_three_segments_rejected():
    with pytest.raises(MalformedHandle) as exc:
        validate_handle("RePEc:aa:bb")
    assert "segment-count" in exc.value.detail


def test_case_folding_on_first_two_segments_only():
    assert validate_handle("repec:AA:bb:cc") == validate_handle("RePEc:aa:bb:cc")
    assert validate_handle("RePEc:aa:BB:cc") != validate_handle("RePEc:aa:bb:cc")
    assert validate_handle("RePEc:aa:bb:CC") != validate_handle("RePEc:aa:bb:cc")


def test_hash_agrees_with_equality():
    a = validate_handle("repec:AA:bb:cc")
    b = validate_handle("RePEc:aa:bb:cc")
    assert len({a, b}) == 1


@pytest.mark.parametrize(
    "raw,rule",
    [
        ("RePEc:aa:bb", "segment-count"),
        ("RePEc:aa:bb:cc:dd", "segment-count"),
        ("RePEc::bb:cc", "empty-segment"),
        ("RePEc:aa:bb:", "empty-segment"),
        ("RePEc:a a:bb:cc", "whitespace"),
        ("RePEc:aa:b\tb:cc", "whitespace"),
        ("XxPEc:aa:bb:cc", "first-segment"),
        ("", "segment-count"),
    ],
)
def test_first_violated_rule_named(raw, rule):
    with pytest.raises(MalformedHandle) as exc:
        validate_handle(raw)
    assert exc.value.detail.startswith(rule)


def test_normalized_raw_is_canonical():
    h = validate_handle("repec:AA:Bb:Cc")
    assert h.raw == "RePEc:aa:Bb:Cc"


@given(st.text())
def test_validation_is_total(raw):
    try:
        h = validate_handle(raw)
    except MalformedHandle:
        return
    assert isinstance(h, Handle)
    # Re-validating the normalized form is stable.
    assert validate_handle(h.raw) == h


def test_is_valid_handle():
    assert is_valid_handle("RePEc:aa:bb:cc")
    assert not is_valid_handle("nope")
