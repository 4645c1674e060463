"""Blake-256 (14-round, pre-standardization version used by CryptoNote)."""

from __future__ import annotations

_IV = (
    0x6A09E667, 0xBB67AE85, 0x3C6EF372, 0xA54FF53A,
    0x510E527F, 0x9B05688C, 0x1F83D9AB, 0x5BE0CD19,
)

_U = (
    0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344,
    0xA4093822, 0x299F31D0, 0x082EFA98, 0xEC4E6C89,
    0x452821E6, 0x38D01377, 0xBE5466CF, 0x34E90C6C,
    0xC0AC29B7, 0xC97C50DD, 0x3F84D5B5, 0xB5470917,
)

_SIGMA = (
    (0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15),
    (14, 10, 4, 8, 9, 15, 13, 6, 1, 12, 0, 2, 11, 7, 5, 3),
    (11, 8, 12, 0, 5, 2, 15, 13, 10, 14, 3, 6, 7, 1, 9, 4),
    (7, 9, 3, 1, 13, 12, 11, 14, 2, 6, 5, 10, 4, 0, 15, 8),
    (9, 0, 5, 7, 2, 4, 10, 15, 14, 1, 11, 12, 6, 8, 3, 13),
    (2, 12, 6, 10, 0, 11, 8, 3, 4, 13, 7, 5, 15, 14, 1, 9),
    (12, 5, 1, 15, 14, 13, 4, 10, 0, 7, 6, 3, 9, 2, 8, 11),
    (13, 11, 7, 14, 12, 1, 3, 9, 5, 0, 15, 4, 8, 6, 2, 10),
    (6, 15, 14, 9, 11, 3, 0, 8, 12, 2, 13, 7, 1, 4, 10, 5),
    (10, 2, 8, 4, 7, 6, 1, 5, 15, 11, 9, 14, 3, 12, 13, 0),
)

_M32 = 0xFFFFFFFF

# (state indices, sigma pair index) for the 8 G applications of one round.
_G_SCHEDULE = (
    (0, 4, 8, 12, 0), (1, 5, 9, 13, 1), (2, 6, 10, 14, 2), (3, 7, 11, 15, 3),
    (0, 5, 10, 15, 4), (1, 6, 11, 12, 5), (2, 7, 8, 13, 6), (3, 4, 9, 14, 7),
)


def _compress(h: list[int], block: bytes, t: int, nullt: bool) -> None:
    m = [int.from_bytes(block[4 * i:4 * i + 4], "big") for i in range(16)]
    v = h + list(_U[:8])
    if not nullt:
        t0 = t & _M32
        t1 = (t >> 32) & _M32
        v[12] ^= t0
        v[13] ^= t0
        v[14] ^= t1
        v[15] ^= t1
    for r in range(14):
        s = _SIGMA[r % 10]
        for ia, ib, ic, id_, g in _G_SCHEDULE:
            x, y = s[2 * g], s[2 * g + 1]
            a, b, c, d = v[ia], v[ib], v[ic], v[id_]
            a = (a + b + (m[x] ^ _U[y])) & _M32
            d ^= a
            d = ((d >> 16) | (d << 16)) & _M32
            c = (c + d) & _M32
            b ^= c
            b = ((b >> 12) | (b << 20)) & _M32
            a = (a + b + (m[y] ^ _U[x])) & _M32
            d ^= a
            d = ((d >> 8) | (d << 24)) & _M32
            c = (c + d) & _M32
            b ^= c
            b = ((b >> 7) | (b << 25)) & _M32
            v[ia], v[ib], v[ic], v[id_] = a, b, c, d
    for i in range(8):
        h[i] ^= v[i] ^ v[i + 8]


def blake256(data: bytes) -> bytes:
    h = list(_IV)
    bitlen = len(data) * 8
    # All blocks that consist purely of message bytes.
    n_full = len(data) // 64
    rem = len(data) - 64 * n_full
    if rem == 0 and n_full > 0:
        n_full -= 1
        rem = 64
    for i in range(n_full):
        _compress(h, data[64 * i:64 * i + 64], 512 * (i + 1), False)
    tail = data[64 * n_full:]
    # Padding: 0x80, zeros, 0x01 at byte 55, then the 64-bit big-endian bit
    # count. The counter for a block covers message bits only; a block with
    # no message bits compresses with the counter suppressed.
    if rem <= 54:
        block = bytearray(64)
        block[:rem] = tail
        block[rem] = 0x80
        block[55] |= 0x01
        block[56:64] = bitlen.to_bytes(8, "big")
        _compress(h, bytes(block), bitlen, bitlen == 0)
    elif rem == 55:
        block = bytearray(64)
        block[:55] = tail
        block[55] = 0x81
        block[56:64] = bitlen.to_bytes(8, "big")
        _compress(h, bytes(block), bitlen, False)
    else:
        # Padding spills into an extra block that carries no message bits.
        block = bytearray(64)
        block[:rem] = tail
        if rem < 64:
            block[rem] = 0x80
        _compress(h, bytes(block), bitlen, False)
        block2 = bytearray(64)
        if rem == 64:
            block2[0] = 0x80
        block2[55] |= 0x01
        block2[56:64] = bitlen.to_bytes(8, "big")
        _compress(h, bytes(block2), 0, True)
    return b"".join(x.to_bytes(4, "big") for x in h)
