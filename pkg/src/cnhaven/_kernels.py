"""Compiled inner loops for the three memory stages.

These mirror the pure-Python stage implementations in hash_core block for
block; the differential tests bind the two paths together. Everything here
works on dense little-endian u64 views of the scratchpad.

Type discipline: numba silently unifies mixed int64/uint64 arithmetic to
float64, so every constant that touches scratchpad words is a np.uint64 and
signed work (the division step) converts explicitly at the boundary.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .primitives.aes import T0, T1, T2, T3

_T0 = np.array(T0, dtype=np.uint64)
_T1 = np.array(T1, dtype=np.uint64)
_T2 = np.array(T2, dtype=np.uint64)
_T3 = np.array(T3, dtype=np.uint64)

_FF = np.uint64(0xFF)
_U32 = np.uint64(0xFFFFFFFF)
_SH8 = np.uint64(8)
_SH16 = np.uint64(16)
_SH24 = np.uint64(24)
_SH32 = np.uint64(32)
_SH3 = np.uint64(3)
_ONE_I = np.int64(1)
_FIVE_I = np.int64(5)
_ZERO_I = np.int64(0)

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT, inline="always")
def _aes_round_words(lo, hi, klo, khi):
    x0 = lo & _U32
    x1 = lo >> _SH32
    x2 = hi & _U32
    x3 = hi >> _SH32
    y0 = _T0[x0 & _FF] ^ _T1[(x1 >> _SH8) & _FF] ^ _T2[(x2 >> _SH16) & _FF] \
        ^ _T3[x3 >> _SH24] ^ (klo & _U32)
    y1 = _T0[x1 & _FF] ^ _T1[(x2 >> _SH8) & _FF] ^ _T2[(x3 >> _SH16) & _FF] \
        ^ _T3[x0 >> _SH24] ^ (klo >> _SH32)
    y2 = _T0[x2 & _FF] ^ _T1[(x3 >> _SH8) & _FF] ^ _T2[(x0 >> _SH16) & _FF] \
        ^ _T3[x1 >> _SH24] ^ (khi & _U32)
    y3 = _T0[x3 & _FF] ^ _T1[(x0 >> _SH8) & _FF] ^ _T2[(x1 >> _SH16) & _FF] \
        ^ _T3[x2 >> _SH24] ^ (khi >> _SH32)
    return y0 | (y1 << _SH32), y2 | (y3 << _SH32)


@njit(**_JIT, inline="always")
def _aes10_all(blocks, keys):
    # all eight 128-bit blocks through the ten round keys; blocks mutate
    for j in range(8):
        lo = blocks[2 * j]
        hi = blocks[2 * j + 1]
        for r in range(10):
            lo, hi = _aes_round_words(lo, hi, keys[2 * r], keys[2 * r + 1])
        blocks[2 * j] = lo
        blocks[2 * j + 1] = hi


@njit(**_JIT, inline="always")
def _mix_blocks(blocks):
    # new[i] = old[i] ^ old[i+1 mod 8], the inter-block propagation step
    t_lo = blocks[0]
    t_hi = blocks[1]
    for j in range(7):
        blocks[2 * j] ^= blocks[2 * j + 2]
        blocks[2 * j + 1] ^= blocks[2 * j + 3]
    blocks[14] ^= t_lo
    blocks[15] ^= t_hi


@njit(**_JIT, inline="always")
def _umul128(x, y):
    a = x >> _SH32
    b = x & _U32
    c = y >> _SH32
    d = y & _U32
    bd = b * d
    mid = (bd >> _SH32) + ((b * c) & _U32) + ((a * d) & _U32)
    hi = a * c + ((b * c) >> _SH32) + ((a * d) >> _SH32) + (mid >> _SH32)
    lo = (mid << _SH32) | (bd & _U32)
    return hi, lo


@njit(**_JIT, inline="always")
def _div_trunc(n, d):
    # C-style truncated signed division; numba's // floors like Python
    if d == -_ONE_I:
        return -n
    q = n // d
    if n % d != _ZERO_I and (n ^ d) < _ZERO_I:
        q += _ONE_I
    return q


@njit(**_JIT)
def explode_kernel(pad, keys, blocks, premix_iters, mix_on):
    """Fill the pad: per group, re-encrypt the 8 blocks, store, propagate."""
    for _ in range(premix_iters):
        _aes10_all(blocks, keys)
        _mix_blocks(blocks)
    n_groups = pad.shape[0] // 16
    for g in range(n_groups):
        _aes10_all(blocks, keys)
        base = g * 16
        for k in range(16):
            pad[base + k] = blocks[k]
        if mix_on:
            _mix_blocks(blocks)


@njit(**_JIT)
def shuffle_kernel(pad, a_lo, a_hi, b_lo, b_hi, iterations, mask,
                   div_tweak, record, addrs):
    """The memory-hard loop over a dense u64 pad view.

    div_tweak: 0 = no division step, 1 = divisor-index feedback, 2 = the
    same with the divisor bit-inverted before the index xor.
    When record is true, the per-iteration byte addresses land in addrs
    (2 or 3 per iteration depending on div_tweak).
    """
    idx = a_lo
    t = 0
    for _ in range(iterations):
        off = idx & mask
        base = off >> _SH3
        c_lo, c_hi = _aes_round_words(pad[base], pad[base + 1], a_lo, a_hi)
        pad[base] = b_lo ^ c_lo
        pad[base + 1] = b_hi ^ c_hi
        idx = c_lo

        off2 = idx & mask
        base2 = off2 >> _SH3
        cl = pad[base2]
        ch = pad[base2 + 1]
        hi, lo = _umul128(idx, cl)
        a_lo += hi
        a_hi += lo
        pad[base2] = a_lo
        pad[base2 + 1] = a_hi
        a_lo ^= cl
        a_hi ^= ch
        idx = a_lo

        if div_tweak != 0:
            off3 = idx & mask
            base3 = off3 >> _SH3
            n = np.int64(pad[base3])
            d = np.int64(np.int32(pad[base3 + 1] & _U32))
            q = _div_trunc(n, d | _FIVE_I)
            pad[base3] = np.uint64(n ^ q)
            if div_tweak == 2:
                idx = np.uint64((~d) ^ q)
            else:
                idx = np.uint64(d ^ q)
            if record:
                addrs[t] = np.uint32(off)
                addrs[t + 1] = np.uint32(off2)
                addrs[t + 2] = np.uint32(off3)
                t += 3
        elif record:
            addrs[t] = np.uint32(off)
            addrs[t + 1] = np.uint32(off2)
            t += 2

        b_lo = c_lo
        b_hi = c_hi


@njit(**_JIT)
def implode_kernel(pad, keys, xout, passes, mix_on, extra_rounds):
    """Fold the pad back into the 8 blocks, then the dry re-encryption tail."""
    n_groups = pad.shape[0] // 16
    for _ in range(passes):
        for g in range(n_groups):
            base = g * 16
            for k in range(16):
                xout[k] ^= pad[base + k]
            _aes10_all(xout, keys)
            if mix_on:
                _mix_blocks(xout)
    for _ in range(extra_rounds):
        _aes10_all(xout, keys)
        if mix_on:
            _mix_blocks(xout)


def warmup() -> None:
    """Compile (or load from cache) every kernel on a 2-group pad."""
    pad = np.zeros(32, dtype=np.uint64)
    keys = np.arange(20, dtype=np.uint64)
    blocks = np.arange(16, dtype=np.uint64)
    explode_kernel(pad, keys, blocks.copy(), 2, True)
    explode_kernel(pad, keys, blocks.copy(), 0, False)
    addrs = np.empty(12, dtype=np.uint32)
    for tweak in (0, 1, 2):
        shuffle_kernel(pad, np.uint64(1), np.uint64(2), np.uint64(3),
                       np.uint64(4), 4, np.uint64(0xF0), tweak, True, addrs)
    implode_kernel(pad, keys, blocks.copy(), 2, True, 16)
    implode_kernel(pad, keys, blocks.copy(), 1, False, 0)
