"""Keccak permutation and sponge tests against hashlib and published values."""

import hashlib
import random

import pytest

from cnhaven.errors import InputTooShort
from cnhaven.primitives import KeccakState, keccak_absorb, keccak_f1600

# permutation of the all-zero state, the canonical f[1600] check
ZERO_STATE_PERMUTED = (
    0xF1258F7940E1DDE7, 0x84D5CCF933C0478A, 0xD598261EA65AA9EE, 0xBD1547306F80494D,
    0x8B284E056253D057, 0xFF97A42D7F8E6FD4, 0x90FEE5A0A44647C4, 0x8C5BDA0CD6192E76,
    0xAD30A6F71B19059C, 0x30935AB7D08FFC64, 0xEB5AA93F2317D635, 0xA9A6E6260D712103,
    0x81A57C16DBCF555F, 0x43B831CD0347C826, 0x01F22F1A11A5569F, 0x05E5635A21D9AE61,
    0x64BEFEF28CC970F2, 0x613670957BC46611, 0xB87C5A554FD00ECB, 0x8C3EE88A1CCF32C8,
    0x940C7922AE3A2614, 0x1841F924A2C509E4, 0x16F53526E70465C2, 0x75F644E97F30A13B,
    0xEAF1FF7B5CECA249,
)

# legacy pre-standard Keccak-256 (0x01 padding), the variant the absorb stage uses
KECCAK256_VECTORS = [
    (b"", "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"),
    (b"abc", "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"),
    (
        b"The quick brown fox jumps over the lazy dog",
        "4d741b6f1eb29cb2a9b9911c82f56fa8d73b04959d3d9d222895df6c0b28aa15",
    ),
]


def _sha3_256(data: bytes) -> bytes:
    """SHA3-256 composed from the package permutation (0x06 domain padding)."""
    rate = 136
    padded = bytearray(data)
    padded.append(0x06)
    while len(padded) % rate:
        padded.append(0)
    padded[-1] |= 0x80
    state = KeccakState.from_bytes(bytes(200))
    for off in range(0, len(padded), rate):
        block = bytes(padded[off:off + rate]) + bytes(200 - rate)
        state = keccak_f1600(
            KeccakState.from_bytes(bytes(a ^ b for a, b in zip(state.to_bytes(), block))))
    return state.to_bytes()[:32]


def test_permutation_of_zero_state():
    out = keccak_f1600(KeccakState.from_bytes(bytes(200)))
    assert tuple(out.lanes) == ZERO_STATE_PERMUTED


def test_permutation_of_zero_state_twice():
    out = keccak_f1600(keccak_f1600(KeccakState.from_bytes(bytes(200))))
    assert out.lanes[0] == 0x2D5C954DF96ECB3C


def test_permutation_leaves_input_untouched():
    state = KeccakState.from_bytes(bytes(range(200)))
    before = state.to_bytes()
    keccak_f1600(state)
    assert state.to_bytes() == before


def test_sha3_composition_matches_hashlib():
    rng = random.Random(0xC0FFEE)
    for _ in range(60):
        msg = rng.randbytes(rng.randrange(0, 400))
        assert _sha3_256(msg) == hashlib.sha3_256(msg).digest()


@pytest.mark.parametrize("msg,want", KECCAK256_VECTORS)
def test_legacy_keccak256_vectors(msg, want):
    state = keccak_absorb(msg, min_len=0)
    assert state.to_bytes()[:32].hex() == want


def test_absorb_matches_plain_sponge():
    # independent straight-line sponge, multi-block lengths included
    rng = random.Random(42)
    for _ in range(40):
        msg = rng.randbytes(rng.randrange(0, 500))
        padded = bytearray(msg)
        padded.append(0x01)
        while len(padded) % 136:
            padded.append(0)
        padded[-1] |= 0x80
        state = KeccakState.from_bytes(bytes(200))
        for off in range(0, len(padded), 136):
            block = bytes(padded[off:off + 136]) + bytes(64)
            mixed = bytes(a ^ b for a, b in zip(state.to_bytes(), block))
            state = keccak_f1600(KeccakState.from_bytes(mixed))
        assert keccak_absorb(msg, min_len=0).to_bytes() == state.to_bytes()


def test_absorb_enforces_minimum_length():
    with pytest.raises(InputTooShort):
        keccak_absorb(bytes(42))
    keccak_absorb(bytes(43))
    with pytest.raises(InputTooShort):
        keccak_absorb(bytes(10), min_len=11)


def test_state_roundtrip():
    raw = bytes(range(200))
    assert KeccakState.from_bytes(raw).to_bytes() == raw
    with pytest.raises(ValueError):
        KeccakState(lanes=[0] * 24)


def test_state_copy_is_independent():
    a = KeccakState.from_bytes(bytes(200))
    b = a.copy()
    b.lanes[0] = 1
    assert a.lanes[0] == 0
