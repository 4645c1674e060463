"""Groestl-256 (tweaked final-round version, 512-bit state, 10 rounds).

State is held as 8 column words (u64, row 0 in the most significant byte).
SubBytes + ShiftBytes + MixBytes are fused into per-row lookup tables.
"""

from __future__ import annotations

from .aes import SBOX, _gf_mul

_M64 = (1 << 64) - 1

_SHIFT_P = (0, 1, 2, 3, 4, 5, 6, 7)
_SHIFT_Q = (1, 3, 5, 7, 0, 2, 4, 6)

# MixBytes circulant: out_row[r] = sum over k of _COEF[k] * in_row[(r+k) % 8].
_COEF = (2, 2, 3, 4, 5, 3, 5, 7)


def _build_tables() -> tuple[tuple[int, ...], ...]:
    tables = []
    for row in range(8):
        tab = []
        for x in range(256):
            s = SBOX[x]
            word = 0
            for out_row in range(8):
                coef = _COEF[(row - out_row) % 8]
                word |= _gf_mul(coef, s) << (56 - 8 * out_row)
            tab.append(word)
        tables.append(tuple(tab))
    return tuple(tables)


_T = _build_tables()


def _perm(cols: list[int], shifts: tuple[int, ...], is_q: bool) -> list[int]:
    t = _T
    for r in range(10):
        if is_q:
            cols = [c ^ _M64 ^ ((j << 4) ^ r) for j, c in enumerate(cols)]
        else:
            cols = [c ^ (((j << 4) ^ r) << 56) for j, c in enumerate(cols)]
        out = []
        for j in range(8):
            acc = 0
            for i in range(8):
                byte = (cols[(j + shifts[i]) % 8] >> (56 - 8 * i)) & 0xFF
                acc ^= t[i][byte]
            out.append(acc)
        cols = out
    return cols


def _to_cols(block: bytes) -> list[int]:
    return [int.from_bytes(block[8 * j:8 * j + 8], "big") for j in range(8)]


def groestl256(data: bytes) -> bytes:
    h = [0] * 8
    h[7] = 256  # length encoding in the last two state bytes
    n_blocks = len(data) // 64 + 1
    if len(data) % 64 > 55:
        n_blocks += 1
    padded = data + b"\x80" + bytes(64 * n_blocks - len(data) - 9) + n_blocks.to_bytes(8, "big")
    for b in range(n_blocks):
        m = _to_cols(padded[64 * b:64 * b + 64])
        pin = [hc ^ mc for hc, mc in zip(h, m)]
        p_out = _perm(pin, _SHIFT_P, False)
        q_out = _perm(m, _SHIFT_Q, True)
        h = [p ^ q ^ hc for p, q, hc in zip(p_out, q_out, h)]
    final = _perm(list(h), _SHIFT_P, False)
    out = [f ^ hc for f, hc in zip(final, h)]
    return b"".join(c.to_bytes(8, "big") for c in out[4:])
