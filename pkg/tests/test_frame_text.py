import random

import pytest

from canlab.errors import (
    BadHexError,
    DataLengthError,
    IdRangeError,
    OddDigitCountError,
)
from canlab.frame import CanFrame, format_frame_text, parse_frame_text

from helpers import random_frame


def test_parse_tachymeter_exploit_frame():
    frame = parse_frame_text("244#0000009999")
    assert frame.can_id == 0x244
    assert not frame.rtr
    assert frame.dlc == 5
    assert frame.data == bytes([0x00, 0x00, 0x00, 0x99, 0x99])


def test_parse_blinker_exploit_frame():
    frame = parse_frame_text("188#030000")
    assert (frame.can_id, frame.dlc, frame.data) == (0x188, 3, bytes([3, 0, 0]))


def test_parse_empty_payload():
    frame = parse_frame_text("000#")
    assert (frame.can_id, frame.rtr, frame.dlc, frame.data) == (0, False, 0, b"")


def test_parse_is_case_insensitive():
    assert parse_frame_text("19b#00000a") == parse_frame_text("19B#00000A")


def test_parse_remote_frames():
    assert parse_frame_text("244#R") == CanFrame.remote_frame(0x244, 0)
    assert parse_frame_text("244#r5") == CanFrame.remote_frame(0x244, 5)


@pytest.mark.parametrize(
    "text,error",
    [
        ("ZZZ#00", BadHexError),
        ("244", BadHexError),
        ("#00", BadHexError),
        ("bad##", BadHexError),
        ("244#0q", BadHexError),
        ("244#000", OddDigitCountError),
        ("FFF#00", IdRangeError),
        ("244#" + "00" * 9, DataLengthError),
        ("1234#00", BadHexError),  # 4 id digits never parse
    ],
)
def test_parse_rejects_each_failure_mode_distinctly(text, error):
    with pytest.raises(error):
        parse_frame_text(text)


def test_format_doors_frame():
    frame = CanFrame.data_frame(0x19B, bytes([0, 0, 8]))
    assert format_frame_text(frame) == "19B#000008"


def test_format_zero_frame():
    assert format_frame_text(CanFrame.data_frame(0, b"")) == "000#"


def test_text_roundtrip_on_random_frames():
    rng = random.Random(0xC0FFEE)
    for _ in range(1000):
        frame = random_frame(rng)
        assert parse_frame_text(format_frame_text(frame)) == frame


def test_frame_invariants_enforced():
    with pytest.raises(ValueError):
        CanFrame(0x800, False, 0, b"")
    with pytest.raises(ValueError):
        CanFrame(0x100, False, 9, bytes(9))
    with pytest.raises(ValueError):
        CanFrame(0x100, False, 2, bytes(3))
    with pytest.raises(ValueError):
        CanFrame(0x100, True, 0, b"\x01")
