"""Bit-level hot loops: CRC-15, stuffing, unstuffing.

Two interchangeable backends over numpy uint8 bit arrays:

* ``numba`` — the default when numba imports; loops are ``@njit``-compiled
  (cached on disk, so the compile cost is paid once per machine).
* ``python`` — plain loops over the same arrays, selected automatically
  when numba is unavailable or forced with ``CANLAB_NO_NUMBA=1``.

``benchmarks/bench_codec.py`` times one against the other.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

CRC15_POLY = 0x4599  # x^15+x^14+x^10+x^8+x^7+x^4+x^3+1, leading term dropped
CRC15_MASK = 0x7FFF


# --- numba-friendly sources (array indexing only) ---------------------------

def _crc15_arr(bits):
    crc = 0
    for i in range(bits.shape[0]):
        crcnxt = bits[i] ^ ((crc >> 14) & 1)
        crc = (crc << 1) & 0x7FFF
        if crcnxt:
            crc ^= 0x4599
    return crc


def _stuff_arr(bits):
    n = bits.shape[0]
    out = np.empty(n + n // 4 + 2, np.uint8)
    j = 0
    run = 0
    prev = np.uint8(2)
    for i in range(n):
        b = bits[i]
        out[j] = b
        j += 1
        if b == prev:
            run += 1
        else:
            prev = b
            run = 1
        if run == 5:
            comp = np.uint8(1 - b)
            out[j] = comp
            j += 1
            prev = comp
            run = 1
    return out[:j]


def _unstuff_limit_arr(bits, limit):
    # limit < 0 unstuffs the whole input; otherwise stops once `limit`
    # output bits exist (consuming a pending stuff bit first).
    # Returns (out, n_out, consumed, violation_index_or_minus_1).
    n = bits.shape[0]
    cap = n if limit < 0 else limit
    out = np.empty(cap, np.uint8)
    j = 0
    run = 0
    prev = np.uint8(2)
    i = 0
    while i < n and j < cap:
        b = bits[i]
        out[j] = b
        j += 1
        if b == prev:
            run += 1
        else:
            prev = b
            run = 1
        if run == 5 and i + 1 < n:
            nxt = bits[i + 1]
            if nxt == b:
                return out, j, i + 2, i + 1
            i += 1
            prev = nxt
            run = 1
        i += 1
    return out, j, i, -1


# --- plain-python fallbacks (list iteration is faster uncompiled) -----------

def _crc15_py(bits):
    crc = 0
    for b in bits.tolist():
        crcnxt = b ^ ((crc >> 14) & 1)
        crc = (crc << 1) & 0x7FFF
        if crcnxt:
            crc ^= 0x4599
    return crc


def _stuff_py(bits):
    out = []
    run = 0
    prev = 2
    for b in bits.tolist():
        out.append(b)
        if b == prev:
            run += 1
        else:
            prev = b
            run = 1
        if run == 5:
            comp = 1 - b
            out.append(comp)
            prev = comp
            run = 1
    return np.array(out, dtype=np.uint8)


def _unstuff_limit_py(bits, limit):
    seq = bits.tolist()
    n = len(seq)
    cap = n if limit < 0 else limit
    out = []
    run = 0
    prev = 2
    i = 0
    while i < n and len(out) < cap:
        b = seq[i]
        out.append(b)
        if b == prev:
            run += 1
        else:
            prev = b
            run = 1
        if run == 5 and i + 1 < n:
            nxt = seq[i + 1]
            if nxt == b:
                return np.array(out, dtype=np.uint8), len(out), i + 2, i + 1
            i += 1
            prev = nxt
            run = 1
        i += 1
    return np.array(out, dtype=np.uint8), len(out), i, -1


def _pure_requested() -> bool:
    return os.environ.get("CANLAB_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")


def load_kernels(force_pure: bool | None = None) -> SimpleNamespace:
    """Build a kernel namespace for the requested backend.

    `force_pure=None` honours the `CANLAB_NO_NUMBA` env var; True/False
    overrides it (used by the benchmark to compare both in one process).
    """
    pure = _pure_requested() if force_pure is None else force_pure
    if not pure:
        try:
            from numba import njit
        except ImportError:
            pure = True
    if pure:
        return SimpleNamespace(
            backend="python",
            crc15=_crc15_py,
            stuff=_stuff_py,
            unstuff_limit=_unstuff_limit_py,
        )
    jit = njit(cache=True)
    return SimpleNamespace(
        backend="numba",
        crc15=jit(_crc15_arr),
        stuff=jit(_stuff_arr),
        unstuff_limit=jit(_unstuff_limit_arr),
    )


active = load_kernels()
