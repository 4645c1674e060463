"""End-to-end acceptance: one test per shipped guarantee, one verdict line each.

Every test prints "[acceptance] <criterion>: PASS/FAIL (<detail>)" so a
log scan shows the whole scorecard. The statistical criteria (selector
distribution, avalanche) default to a reduced parameter set that keeps
the suite fast; set CNHAVEN_FULL_ACCEPTANCE=1 to run them at the full
4 MiB / 2^18-iteration scale.
"""

import dataclasses
import json
import os
import random
import time

import numpy as np
import pytest
from scipy.stats import chisquare

from cnhaven.hash_core import (
    HAVEN,
    HashJob,
    cn_haven_hash,
    hash_bytes,
    hash_with_checkpoints,
)
from cnhaven.mining import JobFile, meets_target, mine
from cnhaven.pipeline_sim import (
    MemLatency,
    PipelineConfig,
    simulate,
    stage_service_ticks,
    theoretical_bounds,
)
from cnhaven.primitives import (
    Block128,
    KeccakState,
    aes_expand_keys,
    aes_round,
    blake256,
    groestl256,
    jh256,
    keccak_f1600,
    skein512_256,
)
from cnhaven.analysis import partition_check
from cnhaven.scratchpad import PAD_SIZE, Op, Scratchpad, Stage

FULL = os.environ.get("CNHAVEN_FULL_ACCEPTANCE") == "1"
SMALL = HAVEN.reduced(scratchpad_bytes=4096, iterations=64)
STAT_CONSTANTS = HAVEN if FULL else SMALL

CORPUS_PATH = "corpus/golden.jsonl"

ZERO_STATE_PERMUTED = (
    0xF1258F7940E1DDE7, 0x84D5CCF933C0478A, 0xD598261EA65AA9EE, 0xBD1547306F80494D,
    0x8B284E056253D057, 0xFF97A42D7F8E6FD4, 0x90FEE5A0A44647C4, 0x8C5BDA0CD6192E76,
    0xAD30A6F71B19059C, 0x30935AB7D08FFC64, 0xEB5AA93F2317D635, 0xA9A6E6260D712103,
    0x81A57C16DBCF555F, 0x43B831CD0347C826, 0x01F22F1A11A5569F, 0x05E5635A21D9AE61,
    0x64BEFEF28CC970F2, 0x613670957BC46611, 0xB87C5A554FD00ECB, 0x8C3EE88A1CCF32C8,
    0x940C7922AE3A2614, 0x1841F924A2C509E4, 0x16F53526E70465C2, 0x75F644E97F30A13B,
    0xEAF1FF7B5CECA249,
)

AES256_SCHEDULE = [
    "000102030405060708090a0b0c0d0e0f",
    "101112131415161718191a1b1c1d1e1f",
    "a573c29fa176c498a97fce93a572c09c",
    "1651a8cd0244beda1a5da4c10640bade",
    "ae87dff00ff11b68a68ed5fb03fc1567",
    "6de1f1486fa54f9275f8eb5373b8518d",
    "c656827fc9a799176f294cec6cd5598b",
    "3de23a75524775e727bf9eb45407cf39",
    "0bdc905fc27b0948ad5245a4c1871c2f",
    "45f5a66017b2d387300d4d33640a820a",
]

AES_ROUND_IN = bytes.fromhex("193de3bea0f4e22b9ac68d2ae9f84808")
AES_ROUND_KEY = bytes.fromhex("a0fafe1788542cb123a339392a6c7605")
AES_ROUND_OUT = bytes.fromhex("a49c7ff2689f352b6b5bea43026a5049")

FINALIST_VECTORS = [
    (blake256, b"", "716f6e863f744b9ac22c97ec7b76ea5f5908bc5b2f67c61510bfc4751384ea7a"),
    (blake256, bytes(72), "d419bad32d504fb7d44d460c42c5593fe544fa4c135dec31e21bd9abdcc22d41"),
    (groestl256, b"", "1a52d11d550039be16107f9c58db9ebcc417f16f736adb2502567119f0083467"),
    (groestl256, b"abc", "f3c1bb19c048801326a7efbcf16e3d7887446249829c379e1840d1a3a1e7d4d2"),
    (jh256, b"", "46e64619c18bb0a92a5e87185a47eef83ca747b8fcc8e1412921357e326df434"),
    (jh256, b"\xcc", "7b1191f13a2667830142541bfc5918543d2a434c7692e70c3e5e9bbdddb7f581"),
    (skein512_256, b"", "39ccc4554a8b31853b9de7a1fe638a24cce6b35a55f2431009e18780335d2621"),
    (skein512_256, b"abc", "0977b339c3c85927071805584d5460d8f20da8389bbe97c59b1cfac291fe9527"),
]


def _verdict(criterion: str, ok: bool, detail: str) -> None:
    line = f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def full_trace():
    """One full-scale traced hash, shared by the structural criteria."""
    pad = Scratchpad(size=HAVEN.scratchpad_bytes)
    pad.trace_capture(True)
    cn_haven_hash(HashJob(bytes(range(64)), nonce=0xA11CE), HAVEN, pad=pad)
    return pad.trace()


def test_oracle_corpus_equivalence():
    with open(CORPUS_PATH) as fp:
        entries = [json.loads(line) for line in fp]
    assert len(entries) == 100
    pad = Scratchpad(size=HAVEN.scratchpad_bytes)
    warm = entries[0]
    hash_with_checkpoints(
        HashJob(bytes.fromhex(warm["blob_hex"]), nonce=warm["nonce"]), pad=pad)

    mismatches = []
    t0 = time.perf_counter()
    for i, entry in enumerate(entries):
        job = HashJob(bytes.fromhex(entry["blob_hex"]), nonce=entry["nonce"])
        digest, checkpoints = hash_with_checkpoints(job, pad=pad)
        if digest.hex() != entry["digest_hex"]:
            mismatches.append((i, "digest_hex"))
        for key, expect in entry["checkpoints"].items():
            if checkpoints.get(key) != expect:
                mismatches.append((i, key))
    elapsed = time.perf_counter() - t0

    ok = not mismatches and elapsed < 60.0
    _verdict("oracle equivalence",
             ok, f"100 jobs, {len(mismatches)} mismatches, {elapsed:.1f}s")


def test_primitive_vectors():
    checks = []
    permuted = keccak_f1600(KeccakState.from_bytes(bytes(200)))
    checks.append(tuple(permuted.lanes) == ZERO_STATE_PERMUTED)

    keys = aes_expand_keys(bytes(range(32))).keys
    checks.append([k.data.hex() for k in keys] == AES256_SCHEDULE)

    checks.append(
        aes_round(Block128(AES_ROUND_IN), Block128(AES_ROUND_KEY)).data
        == AES_ROUND_OUT)
    rng = random.Random(42)
    zero = Block128.zero()
    for _ in range(50):
        x = Block128(rng.randbytes(16))
        k = Block128(rng.randbytes(16))
        checks.append(aes_round(x, k) == aes_round(x, zero) ^ k)

    for fn, msg, want in FINALIST_VECTORS:
        checks.append(fn(msg).hex() == want)

    _verdict("primitive vectors", all(checks),
             f"{sum(checks)}/{len(checks)} vector and property checks")


def test_structural_memory_constants(full_trace):
    recs = full_trace.records
    explode = recs[recs["stage"] == int(Stage.EXPLODE)]
    implode = recs[recs["stage"] == int(Stage.IMPLODE)]
    every_block = np.arange(0, PAD_SIZE, 16, dtype=np.uint32)

    explode_all_writes = (explode["op"] == int(Op.WRITE)).all()
    bytes_written = 16 * len(explode)
    fills_whole_pad = np.array_equal(np.sort(explode["offset"]), every_block)

    implode_all_reads = (implode["op"] == int(Op.READ)).all()
    n = len(every_block)
    two_full_passes = (len(implode) == 2 * n
                       and np.array_equal(implode["offset"][:n], every_block)
                       and np.array_equal(implode["offset"][n:], every_block))

    # the 16 keyed-round repeats touch no memory; pin the constant and show
    # the pipeline actually honors it
    sixteen_repeats = HAVEN.implode_extra_rounds == 16
    fewer = dataclasses.replace(SMALL, implode_extra_rounds=15)
    blob = bytes(range(48))
    repeats_change_result = hash_bytes(blob, SMALL) != hash_bytes(blob, fewer)

    ok = (explode_all_writes and bytes_written == 4_194_304 and fills_whole_pad
          and implode_all_reads and two_full_passes and sixteen_repeats
          and repeats_change_result)
    _verdict("structural constants", ok,
             f"explode wrote {bytes_written} bytes once each, implode read "
             f"{len(implode)} blocks in 2 passes, 16 keyed repeats honored")


def test_family_selector_distribution():
    rng = random.Random(0xACCE55)
    pad = Scratchpad(size=STAT_CONSTANTS.scratchpad_bytes)
    counts = [0, 0, 0, 0]
    trials = 10_000
    for _ in range(trials):
        blob = rng.randbytes(rng.randrange(43, 129))
        _, checkpoints = hash_with_checkpoints(
            HashJob(blob), STAT_CONSTANTS, pad=pad)
        counts[checkpoints["family"]] += 1

    freqs = [c / trials for c in counts]
    within = all(0.23 <= f <= 0.27 for f in freqs)
    p_value = chisquare(counts).pvalue
    ok = within and p_value > 0.01
    _verdict("selector distribution", ok,
             f"freqs {[round(f, 4) for f in freqs]}, chi2 p={p_value:.3f}, "
             f"{'full' if FULL else 'reduced'} scale")


def test_avalanche():
    rng = random.Random(0xA7A1A)
    pad = Scratchpad(size=STAT_CONSTANTS.scratchpad_bytes)
    trials = 1000
    total_flips = 0
    for _ in range(trials):
        blob = bytearray(rng.randbytes(rng.randrange(43, 129)))
        base = hash_bytes(bytes(blob), STAT_CONSTANTS, pad=pad)
        bit = rng.randrange(len(blob) * 8)
        blob[bit // 8] ^= 1 << (bit % 8)
        flipped = hash_bytes(bytes(blob), STAT_CONSTANTS, pad=pad)
        total_flips += (int.from_bytes(base, "little")
                        ^ int.from_bytes(flipped, "little")).bit_count()

    mean = total_flips / trials
    ok = 112.0 <= mean <= 144.0
    _verdict("avalanche", ok,
             f"mean {mean:.2f} of 256 bits over {trials} single-bit flips, "
             f"{'full' if FULL else 'reduced'} scale")


def test_alignment_and_partition_bounds(full_trace):
    offsets = full_trace.records["offset"]
    aligned = int((offsets % 16 == 0).sum())
    in_range = int((offsets < PAD_SIZE).sum())
    single = partition_check([full_trace], PipelineConfig(pipeline_depth=1))

    concurrent = []
    for hash_id in range(8):
        pad = Scratchpad(hash_id=hash_id, size=SMALL.scratchpad_bytes)
        pad.trace_capture(True)
        cn_haven_hash(HashJob(bytes(range(64)), nonce=hash_id), SMALL, pad=pad)
        concurrent.append(pad.trace())
    multi = partition_check(concurrent, PipelineConfig(pipeline_depth=8))

    total = len(full_trace) + sum(len(t) for t in concurrent)
    violations = (single["n_violations"] + multi["n_violations"]
                  + (len(offsets) - aligned) + (len(offsets) - in_range))
    _verdict("alignment and bounds", violations == 0,
             f"{total} traced accesses, {violations} violations")


def test_simulator_soundness():
    base = PipelineConfig()
    bounds = theoretical_bounds(base)
    depth_one = simulate(base, 24).hash_rate_hs
    single_ok = abs(depth_one - bounds["single_hash_rate"]) \
        <= 0.01 * bounds["single_hash_rate"]

    rates = [simulate(dataclasses.replace(base, pipeline_depth=d), 144).hash_rate_hs
             for d in range(1, 129)]
    monotonic = all(a <= b * (1 + 1e-9) for a, b in zip(rates, rates[1:]))

    services = stage_service_ticks(base)
    twice = services["Implode"] == 2 * services["Explode"]
    equal_cost_mem = stage_service_ticks(dataclasses.replace(
        base, mem_latency_ticks=MemLatency(read_fixed=150, write_fixed=150),
        outstanding_limit=1))
    twice = twice and equal_cost_mem["Implode"] == 2 * equal_cost_mem["Explode"]

    jittered = dataclasses.replace(
        base, pipeline_depth=32, mem_latency_ticks=MemLatency(jitter_max=24, seed=11))
    deterministic = simulate(jittered, 64) == simulate(jittered, 64)

    ok = single_ok and monotonic and twice and deterministic
    _verdict("simulator soundness", ok,
             f"depth-1 within {abs(depth_one / bounds['single_hash_rate'] - 1):.4%}"
             f" of bound, monotonic over 1..128: {monotonic}, "
             f"implode=2x explode: {twice}, seed-stable: {deterministic}")


def test_mining_determinism():
    blob_hex = bytes(range(64)).hex()
    presolve = JobFile(blob_hex, difficulty=16, nonce_start=0, nonce_end=192)
    blob = bytes.fromhex(blob_hex)
    expected = next(
        nonce for nonce in range(presolve.nonce_start, presolve.nonce_end)
        if meets_target(cn_haven_hash(HashJob(blob, nonce=nonce), SMALL),
                        presolve.difficulty))

    winners = {mine(presolve, threads=n, constants=SMALL).nonce
               for n in (1, 2, 4, 8)}
    thread_independent = winners == {expected}

    easy = JobFile(blob_hex, difficulty=1, nonce_start=77, nonce_end=100)
    first = mine(easy, constants=SMALL)
    difficulty_one = (first.meets_target and first.nonce == 77
                      and first.hashes_tried == 1)

    _verdict("mining determinism", thread_independent and difficulty_one,
             f"winner {expected} for 1/2/4/8 threads, difficulty-1 took the "
             f"first nonce")
