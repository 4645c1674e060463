"""Trace statistics and partition checking.

The reuse-distance engine is checked against a test-local brute-force
stack model; counting fields are pinned against closed-form values that
follow from the loop structure (one write per block while filling, six
accesses per shuffle iteration with the divided write, four without).
"""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from cnhaven.analysis import TraceStats, _reuse_distances, partition_check, trace_stats
from cnhaven.errors import MalformedTrace
from cnhaven.hash_core import HAVEN, ORIGINAL, HashJob, cn_haven_hash
from cnhaven.scratchpad import PAD_SIZE, AccessTrace, Op, Scratchpad, Stage, region_base

SMALL = HAVEN.reduced(scratchpad_bytes=4096, iterations=64)
SMALL_PLAIN = ORIGINAL.reduced(scratchpad_bytes=4096, iterations=64)

BLOB = bytes(range(48))


def _traced_hash(constants, hash_id=0, engine="python", nonce=7):
    pad = Scratchpad(hash_id=hash_id, size=constants.scratchpad_bytes)
    pad.trace_capture(True)
    digest = cn_haven_hash(HashJob(BLOB, nonce=nonce), constants, pad=pad, engine=engine)
    return digest, pad.trace()


def _stage_slice(trace, stage):
    return AccessTrace(trace.records[trace.records["stage"] == stage])


def _stack_distances(blocks):
    """Reference reuse distances: position in a most-recent-first stack."""
    order = []
    out = []
    for b in blocks:
        try:
            i = order.index(b)
        except ValueError:
            out.append(-1)
        else:
            out.append(i)
            order.pop(i)
        order.insert(0, b)
    return out


def _median_from_hist(hist):
    total = sum(hist.values())
    seen = 0
    for value in sorted(hist):
        seen += hist[value]
        if seen * 2 >= total:
            return value
    return None


def _synthetic(offsets, op=Op.WRITE, stage=Stage.EXPLODE):
    n = len(offsets)
    return AccessTrace.from_columns(
        np.full(n, int(op), np.uint8), np.full(n, int(stage), np.uint8),
        np.asarray(offsets, np.uint32))


class TestTraceStats:
    def test_empty_trace_is_all_zero(self):
        stats = trace_stats(AccessTrace())
        assert stats == TraceStats()
        assert stats.total_accesses == 0
        assert stats.address_entropy_bits == 0.0
        assert stats.reuse_distance_quantiles == {"p50": None, "p90": None, "p99": None}

    def test_single_record(self):
        stats = trace_stats(_synthetic([32]))
        assert stats.total_accesses == 1
        assert stats.writes == {"explode": 1}
        assert stats.reads == {}
        assert stats.stride_histogram == {}
        assert stats.sequential_run_lengths == {1: 1}
        assert stats.address_entropy_bits == 0.0

    def test_filling_sweep_is_one_sequential_run(self):
        n = 256
        stats = trace_stats(_synthetic(np.arange(n) * 16))
        assert stats.total_accesses == n
        assert stats.stride_histogram == {16: n - 1}
        assert stats.sequential_run_lengths == {n: 1}
        assert math.isclose(stats.address_entropy_bits, 8.0)

    def test_stride_histogram_keeps_sign(self):
        stats = trace_stats(_synthetic([0, 16, 48, 16]))
        assert stats.stride_histogram == {16: 1, 32: 1, -32: 1}

    def test_run_lengths_split_on_any_other_stride(self):
        # strides 16,16,96,128,16 -> maximal runs of 3, 1, and 2 accesses
        stats = trace_stats(_synthetic([0, 16, 32, 128, 256, 272]))
        assert stats.sequential_run_lengths == {3: 1, 1: 1, 2: 1}

    def test_entropy_of_repeated_address_is_zero(self):
        stats = trace_stats(_synthetic([64] * 100))
        assert stats.address_entropy_bits == 0.0

    def test_reuse_engine_matches_stack_model(self):
        rng = np.random.default_rng(99)
        blocks = rng.integers(0, 37, size=500).astype(np.int64)
        got = _reuse_distances(blocks, 37)
        assert got.tolist() == _stack_distances(blocks.tolist())

    def test_reuse_quantiles_of_cyclic_pattern(self):
        # 0,1,2 repeated: every revisit sees exactly the other two blocks
        stats = trace_stats(_synthetic([0, 16, 32] * 40))
        assert stats.reuse_distance_quantiles == {"p50": 2.0, "p90": 2.0, "p99": 2.0}

    def test_all_first_touches_leave_quantiles_empty(self):
        stats = trace_stats(_synthetic([0, 16, 32, 48]))
        assert stats.reuse_distance_quantiles == {"p50": None, "p90": None, "p99": None}

    def test_totals_and_entropy_are_order_independent(self):
        _, trace = _traced_hash(SMALL)
        base = trace_stats(trace)
        rng = np.random.default_rng(5)
        perm = rng.permutation(len(trace))
        recs = trace.records
        shuffled = AccessTrace.from_columns(
            recs["op"][perm], recs["stage"][perm], recs["offset"][perm])
        redone = trace_stats(shuffled)
        assert redone.total_accesses == base.total_accesses
        assert redone.reads == base.reads
        assert redone.writes == base.writes
        assert math.isclose(redone.address_entropy_bits, base.address_entropy_bits)

    def test_counts_match_loop_structure(self):
        _, trace = _traced_hash(SMALL)
        stats = trace_stats(trace)
        n_blocks = SMALL.scratchpad_bytes // 16
        assert stats.writes["explode"] == n_blocks
        assert "explode" not in stats.reads
        shuffle = trace_stats(_stage_slice(trace, Stage.SHUFFLE))
        assert shuffle.total_accesses == SMALL.iterations * 6
        assert shuffle.reads["shuffle"] == shuffle.writes["shuffle"]
        implode = trace_stats(_stage_slice(trace, Stage.IMPLODE))
        assert implode.reads["implode"] == SMALL.implode_passes * n_blocks
        assert "implode" not in implode.writes

    def test_plain_parameter_set_shuffles_in_fours(self):
        _, trace = _traced_hash(SMALL_PLAIN)
        shuffle = trace_stats(_stage_slice(trace, Stage.SHUFFLE))
        assert shuffle.total_accesses == SMALL_PLAIN.iterations * 4

    def test_full_scale_shuffle_looks_random(self):
        _, trace = _traced_hash(HAVEN, engine="compiled")
        stats = trace_stats(_stage_slice(trace, Stage.SHUFFLE))
        assert stats.total_accesses == HAVEN.iterations * 6
        assert stats.address_entropy_bits >= 16.0
        assert stats.address_entropy_bits <= 18.0
        assert _median_from_hist(stats.sequential_run_lengths) == 1

    def test_rejects_non_trace_and_malformed(self):
        with pytest.raises(MalformedTrace):
            trace_stats([(0, 0, 0)])
        bad = _synthetic([0, 16, 32])
        bad.records["seq"][2] = 0
        with pytest.raises(MalformedTrace):
            trace_stats(bad)

    def test_to_dict_is_json_ready(self):
        stats = trace_stats(_synthetic([0, 16, 0]))
        d = stats.to_dict()
        assert d["stride_histogram"] == {"16": 1, "-16": 1}
        assert d["total_accesses"] == 3
        assert set(d) == {
            "total_accesses", "reads", "writes", "stride_histogram",
            "sequential_run_lengths", "address_entropy_bits",
            "reuse_distance_quantiles"}


class TestPartitionCheck:
    CONFIG = SimpleNamespace(pipeline_depth=8)

    def _trace_for(self, hash_id):
        _, trace = _traced_hash(SMALL, hash_id=hash_id, nonce=hash_id)
        return trace

    def test_eight_concurrent_hashes_comply(self):
        traces = [self._trace_for(i) for i in range(8)]
        report = partition_check(traces, self.CONFIG)
        assert report["ok"]
        assert report["n_violations"] == 0
        assert report["n_traces"] == 8
        assert report["n_records"] == sum(len(t) for t in traces)

    def test_forged_record_is_pinned_to_its_seq(self):
        trace = self._trace_for(3)
        k = 1000
        trace.records["offset"][k] = PAD_SIZE + 32  # lands in hash 4's region
        report = partition_check([trace], self.CONFIG)
        assert not report["ok"]
        assert report["n_violations"] == 1
        v = report["violations"][0]
        assert v["record_index"] == k
        assert v["seq"] == int(trace.records["seq"][k])
        assert v["hash_id"] == 3
        assert v["reason"] == "offset escapes the region"
        neighbor = region_base(4, self.CONFIG)
        assert neighbor <= v["absolute_address"] < neighbor + PAD_SIZE

    def test_unowned_hash_id_is_reported(self):
        trace = _synthetic([0, 16])
        trace.records["hash_id"] = 9
        report = partition_check([trace], self.CONFIG)
        assert report["n_violations"] == 2
        assert all(v["reason"] == "hash_id outside pipeline depth"
                   for v in report["violations"])

    def test_misaligned_offset_is_reported(self):
        trace = _synthetic([0, 8, 16])
        report = partition_check([trace], self.CONFIG)
        assert report["n_violations"] == 1
        assert report["violations"][0]["reason"] == "misaligned offset"
        assert report["violations"][0]["record_index"] == 1

    def test_no_traces_is_vacuously_ok(self):
        report = partition_check([], self.CONFIG)
        assert report == {"n_traces": 0, "n_records": 0, "n_violations": 0,
                          "violations": [], "ok": True}
