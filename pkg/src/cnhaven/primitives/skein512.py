"""Skein-512 with 256-bit output, the Skein flavour CryptoNote settled on.

Built from Threefish-512 in UBI chaining mode: a configuration block fixes
the output size, message blocks are chained with per-block tweaks, and an
output block turns the final chaining value into the digest.
"""

from __future__ import annotations

_M64 = (1 << 64) - 1
_C240 = 0x1BD11BDAA9FC1A22

# Threefish-512 rotation constants, rounds d mod 8 by mix pair
_ROT = (
    (46, 36, 19, 37),
    (33, 27, 14, 42),
    (17, 49, 36, 39),
    (44, 9, 54, 56),
    (39, 30, 34, 24),
    (13, 50, 10, 17),
    (25, 29, 39, 43),
    (8, 35, 56, 22),
)

# word order after the mix layer of each round
_PERM = (2, 1, 4, 7, 6, 5, 0, 3)

_T_CFG = 4
_T_MSG = 48
_T_OUT = 63
_FLAG_FIRST = 1 << 62
_FLAG_FINAL = 1 << 63


def _rotl(x: int, n: int) -> int:
    return ((x << n) | (x >> (64 - n))) & _M64


def _threefish512(key: tuple[int, ...], tweak: tuple[int, int], block: bytes) -> list[int]:
    ks = list(key) + [_C240 ^ key[0] ^ key[1] ^ key[2] ^ key[3]
                      ^ key[4] ^ key[5] ^ key[6] ^ key[7]]
    t = (tweak[0], tweak[1], tweak[0] ^ tweak[1])
    w = [int.from_bytes(block[8 * i:8 * i + 8], "little") for i in range(8)]

    def inject(s: int) -> None:
        for i in range(8):
            w[i] = (w[i] + ks[(s + i) % 9]) & _M64
        w[5] = (w[5] + t[s % 3]) & _M64
        w[6] = (w[6] + t[(s + 1) % 3]) & _M64
        w[7] = (w[7] + s) & _M64

    for d in range(72):
        if d % 4 == 0:
            inject(d // 4)
        rot = _ROT[d % 8]
        for j in range(4):
            a, b = w[2 * j], w[2 * j + 1]
            a = (a + b) & _M64
            w[2 * j], w[2 * j + 1] = a, _rotl(b, rot[j]) ^ a
        w = [w[p] for p in _PERM]
    inject(18)
    return w


def _ubi(chain: tuple[int, ...], message: bytes, type_code: int) -> tuple[int, ...]:
    blocks = [message[i:i + 64] for i in range(0, len(message), 64)] or [b""]
    position = 0
    g = chain
    for n, blk in enumerate(blocks):
        position += len(blk)
        t0 = position
        t1 = type_code << 56
        if n == 0:
            t1 |= _FLAG_FIRST
        if n == len(blocks) - 1:
            t1 |= _FLAG_FINAL
        padded = blk + bytes(64 - len(blk))
        enc = _threefish512(g, (t0, t1), padded)
        m = [int.from_bytes(padded[8 * i:8 * i + 8], "little") for i in range(8)]
        g = tuple(e ^ mi for e, mi in zip(enc, m))
    return g


def _config_chain() -> tuple[int, ...]:
    cfg = bytearray(32)
    cfg[0:4] = b"SHA3"
    cfg[4:6] = (1).to_bytes(2, "little")
    cfg[8:16] = (256).to_bytes(8, "little")
    return _ubi((0,) * 8, bytes(cfg), _T_CFG)


_IV = _config_chain()


def skein512_256(data: bytes) -> bytes:
    g = _ubi(_IV, data, _T_MSG)
    out = _ubi(g, bytes(8), _T_OUT)
    return b"".join(w.to_bytes(8, "little") for w in out[:4])
