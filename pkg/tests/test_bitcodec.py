import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canlab.bitcodec import (
    RECESSIVE,
    as_bits,
    crc15,
    decode_bits,
    encode_bits,
    stuff_bits,
    unstuff_bits,
)
from canlab.errors import (
    BitStreamError,
    CrcMismatchError,
    StuffingViolationError,
    TruncatedStreamError,
)
from canlab.frame import CanFrame

from helpers import random_bitstream, random_frame
from oracles import crc15_longdiv


def has_six_run(bits) -> bool:
    run = 0
    prev = None
    for b in list(bits):
        if b == prev:
            run += 1
            if run >= 6:
                return True
        else:
            prev = b
            run = 1
    return False


# --- crc15 -------------------------------------------------------------


def test_crc_zero_input_is_zero():
    for length in (0, 1, 7, 37, 96):
        assert crc15([0] * length) == 0


def test_crc_single_recessive_bit_matches_oracle():
    assert crc15([1]) == crc15_longdiv([1]) == 0x4599


def test_crc_matches_long_division_oracle():
    rng = random.Random(1234)
    for _ in range(1000):
        bits = random_bitstream(rng)
        assert crc15(bits) == crc15_longdiv(bits)


# --- stuffing ----------------------------------------------------------


def test_stuff_inserts_complement_after_five():
    assert list(stuff_bits([1, 1, 1, 1, 1])) == [1, 1, 1, 1, 1, 0]
    assert list(stuff_bits([0, 0, 0, 0, 0])) == [0, 0, 0, 0, 0, 1]


def test_stuff_leaves_short_runs_alone():
    assert list(stuff_bits([0, 1, 0, 1, 0])) == [0, 1, 0, 1, 0]


def test_stuff_counts_inserted_bits_in_following_runs():
    # 5 zeros, stuff 1, then four more 1s complete a new 5-run of ones
    bits = [0, 0, 0, 0, 0, 1, 1, 1, 1]
    stuffed = list(stuff_bits(bits))
    assert stuffed == [0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 0]


def test_unstuff_rejects_six_run():
    with pytest.raises(StuffingViolationError):
        unstuff_bits([1, 1, 1, 1, 1, 1])


def test_stuff_roundtrip_random():
    rng = random.Random(99)
    for _ in range(1000):
        bits = random_bitstream(rng)
        stuffed = stuff_bits(bits)
        assert not has_six_run(stuffed)
        assert list(unstuff_bits(stuffed)) == bits


@given(st.lists(st.integers(0, 1), max_size=200))
@settings(max_examples=200)
def test_stuff_roundtrip_property(bits):
    stuffed = stuff_bits(bits)
    assert not has_six_run(stuffed)
    assert list(unstuff_bits(stuffed)) == bits


def test_as_bits_rejects_non_binary():
    with pytest.raises(ValueError):
        as_bits([0, 1, 2])


# --- frame encode/decode -----------------------------------------------


def test_zero_frame_is_44_bits_before_stuffing():
    frame = CanFrame.data_frame(0, b"")
    head = [0] + [0] * 11 + [0] + [0, 0] + [0, 0, 0, 0]
    assert len(head) == 19
    core = head + [(crc15(head) >> k) & 1 for k in range(14, -1, -1)]
    assert len(core) + 10 == 44
    encoded = encode_bits(frame)
    assert len(encoded) == len(stuff_bits(core)) + 10


def test_encode_ends_with_recessive_tail():
    rng = random.Random(5)
    for _ in range(50):
        encoded = encode_bits(random_frame(rng))
        # CRC delimiter, ACK slot, ACK delimiter, then 7 EOF bits
        assert list(encoded[-10:]) == [RECESSIVE] * 10


def test_all_ff_payload_has_no_six_run_before_delimiter():
    frame = CanFrame.data_frame(0x7FF, b"\xff" * 8)
    encoded = encode_bits(frame)
    assert not has_six_run(encoded[:-10])


def test_roundtrip_random_frames():
    rng = random.Random(0xBEEF)
    for _ in range(2000):
        frame = random_frame(rng)
        assert decode_bits(encode_bits(frame)) == frame


@given(
    st.integers(0, 0x7FF),
    st.one_of(st.none(), st.binary(max_size=8)),
    st.integers(0, 8),
)
@settings(max_examples=200)
def test_roundtrip_property(can_id, data, rtr_dlc):
    if data is None:
        frame = CanFrame.remote_frame(can_id, rtr_dlc)
    else:
        frame = CanFrame.data_frame(can_id, data)
    encoded = encode_bits(frame)
    assert not has_six_run(encoded[:-10])
    assert decode_bits(encoded) == frame


def test_flipped_data_bit_fails_crc():
    rng = random.Random(31)
    flips = 0
    for _ in range(200):
        frame = random_frame(rng, rtr_probability=0.0)
        if frame.dlc == 0:
            continue
        encoded = np.array(encode_bits(frame))
        # flip one bit inside the data field region (after the stuffed
        # header; index 25 is safely inside data for dlc >= 2)
        idx = rng.randrange(20, 19 + 8 * frame.dlc)
        encoded[idx] ^= 1
        with pytest.raises((CrcMismatchError, StuffingViolationError, BitStreamError)):
            decode_bits(encoded)
        flips += 1
    assert flips > 100


def test_truncated_stream_detected():
    frame = CanFrame.data_frame(0x244, bytes(5))
    encoded = encode_bits(frame)
    with pytest.raises(TruncatedStreamError):
        decode_bits(encoded[:30])
    with pytest.raises(TruncatedStreamError):
        decode_bits(encoded[:-5])


def test_missing_sof_rejected():
    frame = CanFrame.data_frame(0x244, bytes(5))
    encoded = np.array(encode_bits(frame))
    encoded[0] = 1
    with pytest.raises(BitStreamError):
        decode_bits(encoded)


def test_trailing_garbage_rejected():
    frame = CanFrame.data_frame(0x100, b"\x42")
    encoded = np.concatenate([encode_bits(frame), np.array([1, 1], dtype=np.uint8)])
    with pytest.raises(BitStreamError):
        decode_bits(encoded)


def test_ack_slot_may_be_overwritten_dominant():
    frame = CanFrame.data_frame(0x100, b"\x42")
    encoded = np.array(encode_bits(frame))
    encoded[-9] = 0  # a receiver acknowledged
    assert decode_bits(encoded) == frame
