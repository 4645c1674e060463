"""Trace statistics: how irregular is the traffic, and does it stay in lane.

trace_stats condenses one access trace into the numbers the memory system
cares about: per-stage read/write totals, the stride histogram (burst
opportunity), maximal +16-stride run lengths, address entropy at 16-byte
granularity, and exact LRU reuse-distance quantiles. partition_check
verifies multi-hash traces against the contiguous region layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import MalformedTrace
from .scratchpad import PAD_SIZE, AccessTrace, Op, region_base

_STAGE_NAMES = ("explode", "shuffle", "implode")


@dataclass
class TraceStats:
    total_accesses: int = 0
    reads: dict = field(default_factory=dict)
    writes: dict = field(default_factory=dict)
    stride_histogram: dict = field(default_factory=dict)
    sequential_run_lengths: dict = field(default_factory=dict)
    address_entropy_bits: float = 0.0
    reuse_distance_quantiles: dict = field(
        default_factory=lambda: {"p50": None, "p90": None, "p99": None})

    def to_dict(self) -> dict:
        return {
            "total_accesses": self.total_accesses,
            "reads": dict(self.reads),
            "writes": dict(self.writes),
            "stride_histogram": {str(k): v for k, v in self.stride_histogram.items()},
            "sequential_run_lengths": {
                str(k): v for k, v in self.sequential_run_lengths.items()},
            "address_entropy_bits": self.address_entropy_bits,
            "reuse_distance_quantiles": dict(self.reuse_distance_quantiles),
        }


@njit(cache=True, nogil=True)
def _reuse_distances(blocks, n_blocks):
    """Exact LRU stack distances via a Fenwick tree over last-access times.

    Returns, per access, the number of distinct blocks touched since the
    previous access to the same block, or -1 on first touch.
    """
    n = blocks.shape[0]
    out = np.empty(n, np.int64)
    last = np.full(n_blocks, -1, np.int64)
    tree = np.zeros(n + 1, np.int64)
    for i in range(n):
        b = blocks[i]
        t_prev = last[b]
        if t_prev < 0:
            out[i] = -1
        else:
            s = 0
            j = i
            while j > 0:
                s += tree[j]
                j -= j & (-j)
            j = t_prev + 1
            while j > 0:
                s -= tree[j]
                j -= j & (-j)
            out[i] = s
            j = t_prev + 1
            while j <= n:
                tree[j] -= 1
                j += j & (-j)
        j = i + 1
        while j <= n:
            tree[j] += 1
            j += j & (-j)
        last[b] = i
    return out


def _run_length_histogram(strides: np.ndarray) -> dict:
    # a run of k accesses has k-1 consecutive +16 strides
    is_seq = strides == 16
    boundaries = np.flatnonzero(~is_seq)
    seg_lengths = np.diff(np.concatenate(([-1], boundaries, [len(strides)]))) - 1
    run_lengths = seg_lengths + 1  # strides -> accesses
    values, counts = np.unique(run_lengths, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def trace_stats(trace: AccessTrace) -> TraceStats:
    """All statistics in one pass over the record array."""
    if not isinstance(trace, AccessTrace):
        raise MalformedTrace("expected an AccessTrace")
    trace.validate()
    recs = trace.records
    n = len(recs)
    if n == 0:
        return TraceStats()

    reads: dict = {}
    writes: dict = {}
    combo = recs["stage"].astype(np.int64) * 2 + recs["op"]
    counts = np.bincount(combo, minlength=6)
    for s, name in enumerate(_STAGE_NAMES):
        if counts[2 * s]:
            reads[name] = int(counts[2 * s])
        if counts[2 * s + 1]:
            writes[name] = int(counts[2 * s + 1])

    offsets = recs["offset"].astype(np.int64)
    strides = np.diff(offsets)
    values, stride_counts = np.unique(strides, return_counts=True)
    stride_histogram = {int(v): int(c) for v, c in zip(values, stride_counts)}
    runs = _run_length_histogram(strides)

    blocks = offsets >> 4
    block_counts = np.bincount(blocks)
    p = block_counts[block_counts > 0] / n
    entropy = float(-(p * np.log2(p)).sum())

    distances = _reuse_distances(blocks, int(blocks.max()) + 1)
    finite = distances[distances >= 0]
    if len(finite):
        q50, q90, q99 = np.quantile(finite, [0.5, 0.9, 0.99])
        quantiles = {"p50": float(q50), "p90": float(q90), "p99": float(q99)}
    else:
        quantiles = {"p50": None, "p90": None, "p99": None}

    return TraceStats(
        total_accesses=n, reads=reads, writes=writes,
        stride_histogram=stride_histogram, sequential_run_lengths=runs,
        address_entropy_bits=entropy, reuse_distance_quantiles=quantiles)


def partition_check(traces: list[AccessTrace], config) -> dict:
    """Verify every record's absolute address stays inside its own region.

    Offsets are region-relative, so a record escapes its lane exactly when
    its offset reaches past the region size (or its hash_id has no region).
    Violations are report content; nothing raises.
    """
    violations = []
    n_records = 0
    for t_idx, trace in enumerate(traces):
        recs = trace.records
        n_records += len(recs)
        bad_id = recs["hash_id"] >= config.pipeline_depth
        bad_offset = (recs["offset"] >= PAD_SIZE) | (recs["offset"] % 16 != 0)
        for i in np.flatnonzero(bad_id | bad_offset):
            hash_id = int(recs["hash_id"][i])
            offset = int(recs["offset"][i])
            if bad_id[i]:
                reason = "hash_id outside pipeline depth"
                absolute = None
            else:
                reason = ("misaligned offset" if offset % 16
                          else "offset escapes the region")
                absolute = region_base(hash_id, config) + offset
            violations.append({
                "trace_index": t_idx, "record_index": int(i),
                "seq": int(recs["seq"][i]), "hash_id": hash_id,
                "offset": offset, "absolute_address": absolute,
                "reason": reason,
            })
    return {
        "n_traces": len(traces),
        "n_records": n_records,
        "n_violations": len(violations),
        "violations": violations,
        "ok": not violations,
    }
