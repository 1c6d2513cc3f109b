"""Shared generators for randomized tests."""

import random

from canlab.frame import CanFrame


def random_frame(rng: random.Random, rtr_probability: float = 0.15) -> CanFrame:
    can_id = rng.randrange(0x800)
    dlc = rng.randrange(9)
    if rng.random() < rtr_probability:
        return CanFrame.remote_frame(can_id, dlc)
    return CanFrame.data_frame(can_id, bytes(rng.randrange(256) for _ in range(dlc)))


def random_bitstream(rng: random.Random, max_len: int = 128) -> list[int]:
    return [rng.randrange(2) for _ in range(rng.randrange(max_len + 1))]
