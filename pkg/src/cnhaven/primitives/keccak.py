"""Keccak-f[1600] permutation and the legacy-padding sponge absorb.

The absorb uses rate 136 with the original 0x01 padding convention (append
0x01, zero-fill, set the top bit of the last rate byte) and returns the full
200-byte state rather than a truncated digest, which is what the rest of the
dataflow consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InputTooShort

_MASK64 = (1 << 64) - 1

RATE_BYTES = 136

# Iota round constants for the 24 rounds.
ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A,
    0x8000000080008000, 0x000000000000808B, 0x0000000080000001,
    0x8000000080008081, 0x8000000000008009, 0x000000000000008A,
    0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089,
    0x8000000000008003, 0x8000000000008002, 0x8000000000000080,
    0x000000000000800A, 0x800000008000000A, 0x8000000080008081,
    0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

# Rho rotation offsets, lane index i = x + 5*y.
ROTATION_OFFSETS = (
    0, 1, 62, 28, 27,
    36, 44, 6, 55, 20,
    3, 10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2, 61, 56, 14,
)


@dataclass
class KeccakState:
    """25 little-endian 64-bit lanes; lane i occupies bytes [8i, 8i+8)."""

    lanes: list[int] = field(default_factory=lambda: [0] * 25)

    def __post_init__(self) -> None:
        if len(self.lanes) != 25:
            raise ValueError("KeccakState needs exactly 25 lanes")

    @classmethod
    def from_bytes(cls, data: bytes) -> "KeccakState":
        if len(data) != 200:
            raise ValueError("state byte view must be exactly 200 bytes")
        return cls([int.from_bytes(data[8 * i:8 * i + 8], "little") for i in range(25)])

    def to_bytes(self) -> bytes:
        return b"".join(lane.to_bytes(8, "little") for lane in self.lanes)

    def copy(self) -> "KeccakState":
        return KeccakState(list(self.lanes))


def _f1600(a: list[int]) -> list[int]:
    """One full 24-round permutation over a 25-lane list (new list returned)."""
    rot = ROTATION_OFFSETS
    for rc in ROUND_CONSTANTS:
        # theta
        c = [a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20] for x in range(5)]
        d = [c[(x + 4) % 5] ^ (((c[(x + 1) % 5] << 1) | (c[(x + 1) % 5] >> 63)) & _MASK64)
             for x in range(5)]
        a = [a[i] ^ d[i % 5] for i in range(25)]
        # rho + pi
        b = [0] * 25
        for x in range(5):
            for y in range(5):
                i = x + 5 * y
                s = rot[i]
                v = a[i]
                b[y + 5 * ((2 * x + 3 * y) % 5)] = ((v << s) | (v >> (64 - s))) & _MASK64 if s else v
        # chi
        a = [b[i] ^ ((~b[(i + 1) % 5 + 5 * (i // 5)]) & b[(i + 2) % 5 + 5 * (i // 5)]) & _MASK64
             for i in range(25)]
        # iota
        a[0] ^= rc
    return a


def keccak_f1600(state: KeccakState) -> KeccakState:
    """24-round Keccak-f[1600] permutation; the input state is not modified."""
    return KeccakState(_f1600(state.lanes))


def keccak_absorb(data: bytes, min_len: int = 43) -> KeccakState:
    """Absorb `data` at rate 136 with 0x01 padding, returning the full state.

    min_len guards the downstream requirement that the input carries a
    complete nonce window; reduced or legacy parameter sets pass their own
    bound (0 disables the check).
    """
    if len(data) < min_len:
        raise InputTooShort(f"input is {len(data)} bytes, minimum is {min_len}")
    lanes = [0] * 25
    # Whole rate-sized blocks.
    pos = 0
    n = len(data)
    while n - pos >= RATE_BYTES:
        block = data[pos:pos + RATE_BYTES]
        for i in range(RATE_BYTES // 8):
            lanes[i] ^= int.from_bytes(block[8 * i:8 * i + 8], "little")
        lanes = _f1600(lanes)
        pos += RATE_BYTES
    # Final padded block.
    tail = bytearray(RATE_BYTES)
    tail[:n - pos] = data[pos:]
    tail[n - pos] = 0x01
    tail[RATE_BYTES - 1] |= 0x80
    for i in range(RATE_BYTES // 8):
        lanes[i] ^= int.from_bytes(tail[8 * i:8 * i + 8], "little")
    return KeccakState(_f1600(lanes))
