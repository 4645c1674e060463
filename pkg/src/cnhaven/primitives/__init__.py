"""Cryptographic building blocks: Keccak, AES round primitives, and the
four finalization digests selected by the proof-of-work's output stage."""

from __future__ import annotations

import enum

from .aes import AesRoundKeys, Block128, aes_expand_keys, aes_round
from .blake256 import blake256
from .groestl256 import groestl256
from .jh256 import jh256
from .keccak import KeccakState, keccak_absorb, keccak_f1600
from .skein512 import skein512_256


class FinalHashFamily(enum.IntEnum):
    """Output-stage digest selector, chosen by the final state's low two bits."""

    Blake256 = 0
    Groestl256 = 1
    Jh256 = 2
    Skein256 = 3  # Skein-512 truncated to 256 bits (CryptoNote convention)


_DISPATCH = {
    FinalHashFamily.Blake256: blake256,
    FinalHashFamily.Groestl256: groestl256,
    FinalHashFamily.Jh256: jh256,
    FinalHashFamily.Skein256: skein512_256,
}


def hash_final(family: FinalHashFamily | int, data: bytes) -> bytes:
    """Apply the selected finalization digest; returns the 32-byte result."""
    return _DISPATCH[FinalHashFamily(family)](bytes(data))


__all__ = [
    "AesRoundKeys",
    "Block128",
    "FinalHashFamily",
    "KeccakState",
    "aes_expand_keys",
    "aes_round",
    "blake256",
    "groestl256",
    "hash_final",
    "jh256",
    "keccak_absorb",
    "keccak_f1600",
    "skein512_256",
]
