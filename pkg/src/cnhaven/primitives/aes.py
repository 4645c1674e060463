"""Single AES encryption rounds and the truncated AES-256 key schedule.

The round here matches the hardware single-round encrypt instruction:
ShiftRows, SubBytes, MixColumns, then XOR with the round key. There is no
keyless final-round variant anywhere in this package. Tables are generated
at import from the field arithmetic rather than hardcoded.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import BadSeedLength


def _xtime(x: int) -> int:
    x <<= 1
    return (x ^ 0x11B) & 0xFF if x & 0x100 else x


def _gf_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a = _xtime(a)
        b >>= 1
    return out


def _gf_pow(x: int, e: int) -> int:
    out = 1
    while e:
        if e & 1:
            out = _gf_mul(out, x)
        x = _gf_mul(x, x)
        e >>= 1
    return out


def _build_sbox() -> bytes:
    # Multiplicative inverse (x^254, with 0 -> 0) followed by the affine map.
    sbox = bytearray(256)
    for x in range(256):
        inv = _gf_pow(x, 254) if x else 0
        s = inv
        y = inv
        for _ in range(4):
            y = ((y << 1) | (y >> 7)) & 0xFF
            s ^= y
        sbox[x] = s ^ 0x63
    return bytes(sbox)


SBOX = _build_sbox()

# T-tables for the composite SubBytes+MixColumns on little-endian u32 columns.
# T0[x] = [2s, s, s, 3s] packed LE; T1..T3 are byte rotations of T0.


def _build_tables() -> tuple[tuple[int, ...], ...]:
    t0 = []
    for x in range(256):
        s = SBOX[x]
        t0.append(_gf_mul(s, 2) | (s << 8) | (s << 16) | (_gf_mul(s, 3) << 24))
    tables = [tuple(t0)]
    for shift in (8, 16, 24):
        tables.append(tuple(((v << shift) | (v >> (32 - shift))) & 0xFFFFFFFF for v in t0))
    return tuple(tables)


T0, T1, T2, T3 = _build_tables()


@dataclass(frozen=True)
class Block128:
    """16 bytes, also viewable as two little-endian 64-bit words."""

    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) != 16:
            raise ValueError("Block128 needs exactly 16 bytes")

    @classmethod
    def zero(cls) -> "Block128":
        return cls(bytes(16))

    @classmethod
    def from_words(cls, lo: int, hi: int) -> "Block128":
        return cls(lo.to_bytes(8, "little") + hi.to_bytes(8, "little"))

    @property
    def lo(self) -> int:
        return int.from_bytes(self.data[:8], "little")

    @property
    def hi(self) -> int:
        return int.from_bytes(self.data[8:], "little")

    def __xor__(self, other: "Block128") -> "Block128":
        return Block128(bytes(a ^ b for a, b in zip(self.data, other.data)))


@dataclass(frozen=True)
class AesRoundKeys:
    """Exactly 10 round keys, a deterministic function of the 32 seed bytes."""

    keys: tuple[Block128, ...]

    def __post_init__(self) -> None:
        if len(self.keys) != 10:
            raise ValueError("AesRoundKeys needs exactly 10 keys")


def _round_words(x0: int, x1: int, x2: int, x3: int,
                 k0: int, k1: int, k2: int, k3: int) -> tuple[int, int, int, int]:
    y0 = T0[x0 & 0xFF] ^ T1[(x1 >> 8) & 0xFF] ^ T2[(x2 >> 16) & 0xFF] ^ T3[x3 >> 24] ^ k0
    y1 = T0[x1 & 0xFF] ^ T1[(x2 >> 8) & 0xFF] ^ T2[(x3 >> 16) & 0xFF] ^ T3[x0 >> 24] ^ k1
    y2 = T0[x2 & 0xFF] ^ T1[(x3 >> 8) & 0xFF] ^ T2[(x0 >> 16) & 0xFF] ^ T3[x1 >> 24] ^ k2
    y3 = T0[x3 & 0xFF] ^ T1[(x0 >> 8) & 0xFF] ^ T2[(x1 >> 16) & 0xFF] ^ T3[x2 >> 24] ^ k3
    return y0, y1, y2, y3


def aes_round(block: Block128, key: Block128) -> Block128:
    """ShiftRows, SubBytes, MixColumns, XOR key — one encryption round."""
    b = block.data
    k = key.data
    x = [int.from_bytes(b[4 * i:4 * i + 4], "little") for i in range(4)]
    kw = [int.from_bytes(k[4 * i:4 * i + 4], "little") for i in range(4)]
    y = _round_words(*x, *kw)
    return Block128(b"".join(w.to_bytes(4, "little") for w in y))


_RCON = (0x01, 0x02, 0x04, 0x08)


def aes_expand_keys(seed: bytes) -> AesRoundKeys:
    """First 10 round keys of the AES-256 schedule seeded by 32 bytes."""
    if len(seed) != 32:
        raise BadSeedLength(f"seed is {len(seed)} bytes, need 32")
    w = [int.from_bytes(seed[4 * i:4 * i + 4], "little") for i in range(8)]
    # Words are kept little-endian; RotWord/SubWord act on the big-endian
    # word, which in this view is a right-rotate by 8 plus bytewise S-box.
    for i in range(8, 40):
        t = w[i - 1]
        if i % 8 == 0:
            t = ((t >> 8) | (t << 24)) & 0xFFFFFFFF
            t = (SBOX[t & 0xFF] | (SBOX[(t >> 8) & 0xFF] << 8)
                 | (SBOX[(t >> 16) & 0xFF] << 16) | (SBOX[t >> 24] << 24))
            t ^= _RCON[i // 8 - 1]
        elif i % 8 == 4:
            t = (SBOX[t & 0xFF] | (SBOX[(t >> 8) & 0xFF] << 8)
                 | (SBOX[(t >> 16) & 0xFF] << 16) | (SBOX[t >> 24] << 24))
        w.append(w[i - 8] ^ t)
    keys = []
    for i in range(10):
        keys.append(Block128(b"".join(w[4 * i + j].to_bytes(4, "little") for j in range(4))))
    return AesRoundKeys(tuple(keys))
