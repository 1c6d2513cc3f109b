#!/usr/bin/env python3
"""Compare the codec's jit-compiled kernels against the pure-python path.

Runs each hot kernel and a full frame encode/decode roundtrip under both
backends in one process. The same comparison is what CANLAB_NO_NUMBA=1
switches at import time.

Usage: python benchmarks/bench_codec.py [--frames 20000]
"""

import argparse
import random
import time

import numpy as np

from canlab import _kernels, bitcodec
from canlab.frame import CanFrame


def random_frames(count: int, seed: int = 1) -> list[CanFrame]:
    rng = random.Random(seed)
    frames = []
    for _ in range(count):
        dlc = rng.randrange(9)
        frames.append(
            CanFrame.data_frame(rng.randrange(0x800), bytes(rng.randrange(256) for _ in range(dlc)))
        )
    return frames


def bench(label: str, fn, repeat: int = 3) -> float:
    best = min(timeit_once(fn) for _ in range(repeat))
    print(f"  {label:<28} {best:8.3f} s")
    return best


def timeit_once(fn) -> float:
    started = time.perf_counter()
    fn()
    return time.perf_counter() - started


def kernel_workload(kernels, streams):
    def run():
        for bits in streams:
            kernels.crc15(bits)
            stuffed = kernels.stuff(bits)
            kernels.unstuff_limit(stuffed, -1)
    return run


def roundtrip_workload(frames):
    def run():
        for frame in frames:
            assert bitcodec.decode_bits(bitcodec.encode_bits(frame)) == frame
    return run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=20_000,
                        help="frames per roundtrip run")
    parser.add_argument("--streams", type=int, default=50_000,
                        help="bit streams per kernel run")
    args = parser.parse_args()

    pure = _kernels.load_kernels(force_pure=True)
    jit = _kernels.load_kernels(force_pure=False)
    have_numba = jit.backend == "numba"
    if not have_numba:
        print("numba unavailable: timing the pure backend only")

    rng = np.random.default_rng(7)
    streams = [
        rng.integers(0, 2, size=n, dtype=np.uint8)
        for n in rng.integers(40, 140, size=args.streams)
    ]
    frames = random_frames(args.frames)

    if have_numba:
        # trigger compilation outside the timed region
        warm = streams[0]
        jit.crc15(warm)
        jit.unstuff_limit(jit.stuff(warm), -1)

    results = {}
    print(f"kernel workload ({args.streams} streams):")
    results["pure-kernels"] = bench("python kernels", kernel_workload(pure, streams))
    if have_numba:
        results["jit-kernels"] = bench("numba kernels", kernel_workload(jit, streams))

    print(f"frame roundtrip ({args.frames} frames):")
    saved = _kernels.active
    try:
        _kernels.active = pure
        results["pure-roundtrip"] = bench("python encode+decode", roundtrip_workload(frames))
        if have_numba:
            _kernels.active = jit
            results["jit-roundtrip"] = bench("numba encode+decode", roundtrip_workload(frames))
    finally:
        _kernels.active = saved

    if have_numba:
        print("speedups (python / numba):")
        print(f"  kernels   {results['pure-kernels'] / results['jit-kernels']:6.1f}x")
        print(f"  roundtrip {results['pure-roundtrip'] / results['jit-roundtrip']:6.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
