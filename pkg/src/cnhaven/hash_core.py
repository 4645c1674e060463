"""The full hash dataflow: absorb, explode, shuffle, implode, finalize.

Every stage exists twice: a compiled kernel working on the dense u64 pad
view (the default) and a pure-Python path going through read16/write16.
The Python path is far too slow for real 4 MiB work; it exists so reduced
parameter sets can bind the two implementations together in tests.

AlgoConstants carries every tunable the stages consume, so the same code
runs the production parameter set, the original 2 MiB set used for
cross-validation against published digests, and arbitrarily shrunk sets
for statistical tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from . import _kernels
from .errors import InputTooShort
from .primitives import (
    Block128,
    KeccakState,
    aes_expand_keys,
    aes_round,
    hash_final,
    keccak_absorb,
    keccak_f1600,
)
from .scratchpad import PAD_SIZE, FlatBackend, Op, Scratchpad, Stage

_M64 = (1 << 64) - 1

_DIV_TWEAKS = {"none": 0, "plain": 1, "negated": 2}

Engine = Literal["auto", "compiled", "python"]


@dataclass(frozen=True)
class AlgoConstants:
    """Parameter set for one variant of the algorithm family."""

    iterations: int
    address_mask: int
    scratchpad_bytes: int = PAD_SIZE
    explode_key_bytes: tuple[int, int] = (0, 32)
    explode_init_bytes: tuple[int, int] = (64, 192)
    implode_key_bytes: tuple[int, int] = (32, 64)
    implode_xor_bytes: tuple[int, int] = (64, 192)
    explode_premix_iters: int = 16
    block_mixing: bool = True
    implode_passes: int = 2
    implode_extra_rounds: int = 16
    div_tweak: str = "negated"
    min_input_len: int = 43

    def __post_init__(self) -> None:
        if self.address_mask & 0xF:
            raise ValueError("address_mask must select 16-byte-aligned offsets")
        if self.address_mask >= self.scratchpad_bytes:
            raise ValueError("address_mask reaches outside the scratchpad")
        if self.scratchpad_bytes % 128:
            raise ValueError("scratchpad must hold whole 128-byte groups")
        if self.div_tweak not in _DIV_TWEAKS:
            raise ValueError(f"unknown div_tweak {self.div_tweak!r}")

    def reduced(self, scratchpad_bytes: int, iterations: int) -> "AlgoConstants":
        """Same dataflow on a smaller pad, for statistical and cross-path tests."""
        return replace(self, scratchpad_bytes=scratchpad_bytes, iterations=iterations,
                       address_mask=scratchpad_bytes - 16)


# Production parameter set: 4 MiB pad, 2^18 iterations, negated-divisor tweak.
HAVEN = AlgoConstants(iterations=0x40000, address_mask=0x3FFFF0)

# The original 2 MiB family member. Kept because its digests are published
# and independently implemented, which pins the shared loop skeleton.
ORIGINAL = AlgoConstants(
    iterations=0x80000, address_mask=0x1FFFF0, scratchpad_bytes=2 * 1024 * 1024,
    explode_premix_iters=0, block_mixing=False, implode_passes=1,
    implode_extra_rounds=0, div_tweak="none", min_input_len=0)


@dataclass(frozen=True)
class HashJob:
    """A block template plus the nonce to patch into it."""

    blob: bytes
    nonce: int = 0
    nonce_offset: int = 39

    def __post_init__(self) -> None:
        if not 0 <= self.nonce < 1 << 32:
            raise ValueError("nonce must fit 32 bits")
        if self.nonce_offset < 0 or self.nonce_offset + 4 > len(self.blob):
            raise ValueError("nonce window falls outside the blob")

    def patched(self) -> bytes:
        blob = bytearray(self.blob)
        blob[self.nonce_offset:self.nonce_offset + 4] = self.nonce.to_bytes(4, "little")
        return bytes(blob)


def _pick_engine(pad: Scratchpad, engine: Engine) -> str:
    if engine == "auto":
        return "compiled" if isinstance(pad.backend, FlatBackend) else "python"
    if engine == "compiled" and not isinstance(pad.backend, FlatBackend):
        raise TypeError("compiled engine needs a dense FlatBackend pad")
    return engine


def _keys_u64(key_bytes: bytes) -> np.ndarray:
    keys = aes_expand_keys(key_bytes)
    return np.frombuffer(b"".join(k.data for k in keys.keys), dtype="<u8")


def _signed64(u: int) -> int:
    return u - (1 << 64) if u >= 1 << 63 else u


def _signed32(u: int) -> int:
    return u - (1 << 32) if u >= 1 << 31 else u


def _div_trunc(n: int, d: int) -> int:
    q = abs(n) // abs(d)
    return -q if (n < 0) != (d < 0) else q


def _mix_blocks_py(blocks: list[Block128]) -> None:
    old = list(blocks)
    for j in range(8):
        blocks[j] = old[j] ^ old[(j + 1) % 8]


def explode(state: KeccakState, pad: Scratchpad,
            constants: AlgoConstants = HAVEN, engine: Engine = "auto") -> None:
    """Expand the state into the scratchpad, overwriting all of it."""
    raw = state.to_bytes()
    k0, k1 = constants.explode_key_bytes
    i0, i1 = constants.explode_init_bytes
    if _pick_engine(pad, engine) == "compiled":
        blocks = np.frombuffer(raw[i0:i1], dtype="<u8").copy()
        _kernels.explode_kernel(
            pad.u64_view(), _keys_u64(raw[k0:k1]), blocks,
            constants.explode_premix_iters, constants.block_mixing)
        if pad.tracing:
            n = constants.scratchpad_bytes // 16
            pad.append_trace_columns(
                np.full(n, Op.WRITE, dtype=np.uint8),
                np.full(n, Stage.EXPLODE, dtype=np.uint8),
                np.arange(0, constants.scratchpad_bytes, 16, dtype=np.uint32))
        return
    keys = aes_expand_keys(raw[k0:k1])
    blocks = [Block128(raw[i0 + 16 * j:i0 + 16 * j + 16]) for j in range(8)]
    pad.set_stage(Stage.EXPLODE)
    for _ in range(constants.explode_premix_iters):
        for j in range(8):
            for key in keys.keys:
                blocks[j] = aes_round(blocks[j], key)
        _mix_blocks_py(blocks)
    for base in range(0, constants.scratchpad_bytes, 128):
        for j in range(8):
            for key in keys.keys:
                blocks[j] = aes_round(blocks[j], key)
            pad.write16(base + 16 * j, blocks[j])
        if constants.block_mixing:
            _mix_blocks_py(blocks)


def shuffle(state: KeccakState, pad: Scratchpad,
            constants: AlgoConstants = HAVEN, engine: Engine = "auto") -> None:
    """Run the memory-hard loop; registers start from XORs of state words."""
    h = state.lanes
    a_lo, a_hi = h[0] ^ h[4], h[1] ^ h[5]
    b_lo, b_hi = h[2] ^ h[6], h[3] ^ h[7]
    mask = constants.address_mask
    tweak = _DIV_TWEAKS[constants.div_tweak]
    if _pick_engine(pad, engine) == "compiled":
        per_iter = 3 if tweak else 2
        record = pad.tracing
        addrs = np.empty(constants.iterations * per_iter if record else 0,
                         dtype=np.uint32)
        _kernels.shuffle_kernel(
            pad.u64_view(), np.uint64(a_lo), np.uint64(a_hi), np.uint64(b_lo),
            np.uint64(b_hi), constants.iterations, np.uint64(mask), tweak,
            record, addrs)
        if record:
            # each touched address is a read-modify-write pair
            offsets = np.repeat(addrs, 2)
            ops = np.tile(np.array([Op.READ, Op.WRITE], dtype=np.uint8), len(addrs))
            pad.append_trace_columns(
                ops, np.full(len(offsets), Stage.SHUFFLE, dtype=np.uint8), offsets)
        return
    pad.set_stage(Stage.SHUFFLE)
    idx = a_lo
    for _ in range(constants.iterations):
        off = idx & mask
        c = aes_round(pad.read16(off), Block128.from_words(a_lo, a_hi))
        pad.write16(off, Block128.from_words(b_lo ^ c.lo, b_hi ^ c.hi))
        idx = c.lo

        off2 = idx & mask
        blk = pad.read16(off2)
        cl, ch = blk.lo, blk.hi
        prod = idx * cl
        a_lo = (a_lo + (prod >> 64)) & _M64
        a_hi = (a_hi + (prod & _M64)) & _M64
        pad.write16(off2, Block128.from_words(a_lo, a_hi))
        a_lo ^= cl
        a_hi ^= ch
        idx = a_lo

        if tweak:
            off3 = idx & mask
            blk3 = pad.read16(off3)
            n = _signed64(blk3.lo)
            d = _signed32(blk3.hi & 0xFFFFFFFF)
            q = _div_trunc(n, d | 5)
            pad.write16(off3, Block128.from_words((n ^ q) & _M64, blk3.hi))
            fed = ~d if tweak == 2 else d
            idx = (fed ^ q) & _M64

        b_lo, b_hi = c.lo, c.hi


def implode(state: KeccakState, pad: Scratchpad,
            constants: AlgoConstants = HAVEN, engine: Engine = "auto") -> KeccakState:
    """Fold the scratchpad back into state bytes 64..192; pad is only read."""
    raw = state.to_bytes()
    k0, k1 = constants.implode_key_bytes
    x0, x1 = constants.implode_xor_bytes
    if _pick_engine(pad, engine) == "compiled":
        xout = np.frombuffer(raw[x0:x1], dtype="<u8").copy()
        _kernels.implode_kernel(
            pad.u64_view(), _keys_u64(raw[k0:k1]), xout,
            constants.implode_passes, constants.block_mixing,
            constants.implode_extra_rounds)
        if pad.tracing:
            per_pass = np.arange(0, constants.scratchpad_bytes, 16, dtype=np.uint32)
            offsets = np.concatenate([per_pass] * constants.implode_passes)
            pad.append_trace_columns(
                np.full(len(offsets), Op.READ, dtype=np.uint8),
                np.full(len(offsets), Stage.IMPLODE, dtype=np.uint8), offsets)
        result = xout.tobytes()
    else:
        keys = aes_expand_keys(raw[k0:k1])
        blocks = [Block128(raw[x0 + 16 * j:x0 + 16 * j + 16]) for j in range(8)]
        pad.set_stage(Stage.IMPLODE)
        for _ in range(constants.implode_passes):
            for base in range(0, constants.scratchpad_bytes, 128):
                for j in range(8):
                    blocks[j] ^= pad.read16(base + 16 * j)
                    for key in keys.keys:
                        blocks[j] = aes_round(blocks[j], key)
                if constants.block_mixing:
                    _mix_blocks_py(blocks)
        for _ in range(constants.implode_extra_rounds):
            for j in range(8):
                for key in keys.keys:
                    blocks[j] = aes_round(blocks[j], key)
            if constants.block_mixing:
                _mix_blocks_py(blocks)
        result = b"".join(b.data for b in blocks)
    return KeccakState.from_bytes(raw[:x0] + result + raw[x1:])


def cn_haven_hash(job: HashJob, constants: AlgoConstants = HAVEN,
                  pad: Scratchpad | None = None, engine: Engine = "auto") -> bytes:
    """Full hash of the job's patched blob; returns the 32-byte digest."""
    digest, _ = _run(job.patched(), constants, pad, engine, want_checkpoints=False)
    return digest


def hash_bytes(data: bytes, constants: AlgoConstants = HAVEN,
               pad: Scratchpad | None = None, engine: Engine = "auto") -> bytes:
    """Digest of raw bytes, bypassing the job/nonce packaging."""
    digest, _ = _run(data, constants, pad, engine, want_checkpoints=False)
    return digest


def hash_with_checkpoints(job: HashJob, constants: AlgoConstants = HAVEN,
                          pad: Scratchpad | None = None,
                          engine: Engine = "auto") -> tuple[bytes, dict]:
    """Digest plus the stage-boundary snapshots used by the golden corpus."""
    return _run(job.patched(), constants, pad, engine, want_checkpoints=True)


def _run(blob: bytes, constants: AlgoConstants, pad: Scratchpad | None,
         engine: Engine, want_checkpoints: bool) -> tuple[bytes, dict]:
    state = keccak_absorb(blob, min_len=constants.min_input_len)
    if pad is None:
        pad = Scratchpad(size=constants.scratchpad_bytes)
    elif pad.size != constants.scratchpad_bytes:
        raise ValueError("scratchpad size does not match the parameter set")
    checkpoints: dict = {}
    if want_checkpoints:
        checkpoints["absorb_hex"] = state.to_bytes().hex()
    explode(state, pad, constants, engine)
    if want_checkpoints:
        checkpoints["explode_head_hex"] = pad.to_bytes()[:1024].hex()
    shuffle(state, pad, constants, engine)
    if want_checkpoints:
        checkpoints["shuffle_head_hex"] = pad.to_bytes()[:1024].hex()
    state = implode(state, pad, constants, engine)
    if want_checkpoints:
        checkpoints["implode_state_hex"] = state.to_bytes().hex()
    final = keccak_f1600(state)
    family = final.to_bytes()[0] & 3
    if want_checkpoints:
        checkpoints["family"] = family
    return hash_final(family, final.to_bytes()), checkpoints
