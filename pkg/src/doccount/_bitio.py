"""Bit-level primitives shared by the bitvector encodings.

All bit streams use little-endian order within bytes: bit k of a stream lives in
byte k >> 3 at bit position k & 7. Variable-length codes are the classic
gamma/delta family; payload bits of a code are written low bit first.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + (
        (x >> np.uint64(2)) & np.uint64(0x3333333333333333)
    )
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True, inline="always")
def bit_length(x):
    n = 0
    while x > 0:
        x >>= 1
        n += 1
    return n


@njit(cache=True, inline="always")
def read_bit(buf, pos):
    return (buf[pos >> 3] >> (pos & 7)) & 1


@njit(cache=True, inline="always")
def write_bits(buf, pos, value, nbits):
    """Write the low nbits of value at bit offset pos; returns the new offset."""
    for k in range(nbits):
        if (value >> k) & 1:
            buf[(pos + k) >> 3] |= np.uint8(1 << ((pos + k) & 7))
    return pos + nbits


@njit(cache=True, inline="always")
def read_bits(buf, pos, nbits):
    x = np.int64(0)
    for k in range(nbits):
        x |= np.int64((buf[(pos + k) >> 3] >> ((pos + k) & 7)) & 1) << k
    return x


@njit(cache=True, inline="always")
def delta_size(x):
    """Bit length of the delta code of x >= 1."""
    lx = bit_length(x)
    ll = bit_length(lx)
    return 2 * ll - 1 + lx - 1


@njit(cache=True, inline="always")
def write_delta(buf, pos, x):
    """Append the delta code of x >= 1 at bit offset pos; returns the new offset."""
    lx = bit_length(x)
    ll = bit_length(lx)
    pos += ll - 1  # unary zeros of the gamma prefix
    buf[pos >> 3] |= np.uint8(1 << (pos & 7))
    pos += 1
    pos = write_bits(buf, pos, lx & ((1 << (ll - 1)) - 1), ll - 1)
    pos = write_bits(buf, pos, x & ((1 << (lx - 1)) - 1), lx - 1)
    return pos


@njit(cache=True, inline="always")
def read_delta(buf, pos):
    """Decode one delta code at bit offset pos; returns (value, new offset)."""
    z = 0
    while read_bit(buf, pos) == 0:
        z += 1
        pos += 1
    pos += 1
    lx = np.int64(1) << z | read_bits(buf, pos, z)
    pos += z
    x = np.int64(1) << (lx - 1) | read_bits(buf, pos, lx - 1)
    pos += lx - 1
    return x, pos


@njit(cache=True)
def pack_width(values, w):
    """Pack values into consecutive w-bit little-endian fields."""
    nbytes = (len(values) * w + 7) // 8
    buf = np.zeros(max(nbytes, 1), np.uint8)
    pos = 0
    for i in range(len(values)):
        pos = write_bits(buf, pos, values[i], w)
    return buf


@njit(cache=True)
def unpack_at(buf, w, idx):
    """Read the w-bit field stored at index idx by pack_width."""
    if w == 0:
        return np.int64(0)
    return read_bits(buf, idx * w, w)


@njit(cache=True)
def unpack_all(buf, w, count):
    out = np.zeros(count, np.int64)
    for i in range(count):
        out[i] = unpack_at(buf, w, i)
    return out
