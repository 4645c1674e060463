"""Per-hash 4 MiB working memory with optional access tracing.

A Scratchpad wraps one region of a MemoryBackend and checks alignment and
bounds on every access. Tracing, when enabled, records (op, stage, offset)
for each access; records are kept columnar so multi-million-entry traces
stay cheap to build and analyze. Multiple in-flight hashes share one backend
by claiming disjoint regions, mirroring how distinct nonces partition a
physical memory into per-hash windows.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator, NamedTuple, Protocol, TextIO

import numpy as np

from .errors import BadHashId, MalformedTrace, Misaligned, OutOfBounds
from .primitives import Block128

PAD_SIZE = 4 * 1024 * 1024
BLOCK_SIZE = 16
MODELED_MEMORY_BYTES = 8 * 1024 ** 3

TRACE_MAGIC = b"CNHT"
TRACE_VERSION = 1

# Binary trace layout: 14-byte header, then 16 bytes per record.
_HEADER = struct.Struct("<4sHQ")
RECORD_DTYPE = np.dtype(
    [("op", "u1"), ("stage", "u1"), ("hash_id", "<u2"), ("seq", "<u8"), ("offset", "<u4")]
)


class Op:
    READ = 0
    WRITE = 1


class Stage:
    EXPLODE = 0
    SHUFFLE = 1
    IMPLODE = 2


_STAGE_NAMES = ("explode", "shuffle", "implode")
_OP_NAMES = ("read", "write")


class AccessRecord(NamedTuple):
    op: int
    hash_id: int
    byte_offset: int
    stage: int
    seq: int


class MemoryBackend(Protocol):
    """Storage contract: per-region 16-byte blocks with read-after-write."""

    def read_block(self, region: int, offset: int) -> Block128: ...

    def write_block(self, region: int, offset: int, block: Block128) -> None: ...

    def latency(self, op: int) -> int: ...


class FlatBackend:
    """Zero-latency in-memory backend holding `n_regions` contiguous regions."""

    def __init__(self, n_regions: int = 1, region_size: int = PAD_SIZE):
        if region_size <= 0 or region_size % BLOCK_SIZE:
            raise ValueError("region_size must be a positive multiple of 16")
        if n_regions * region_size > MODELED_MEMORY_BYTES:
            raise ValueError("backend exceeds the 8 GiB modeled memory")
        self.n_regions = n_regions
        self.region_size = region_size
        self._buf = np.zeros(n_regions * region_size, dtype=np.uint8)

    def read_block(self, region: int, offset: int) -> Block128:
        base = region * self.region_size + offset
        return Block128(self._buf[base:base + 16].tobytes())

    def write_block(self, region: int, offset: int, block: Block128) -> None:
        base = region * self.region_size + offset
        self._buf[base:base + 16] = np.frombuffer(block.data, dtype=np.uint8)

    def latency(self, op: int) -> int:
        return 0

    def region_view_u64(self, region: int) -> np.ndarray:
        """Dense little-endian u64 view of one region, for the compiled kernels."""
        base = region * self.region_size
        return self._buf[base:base + self.region_size].view(np.uint64)

    def region_bytes(self, region: int) -> bytes:
        base = region * self.region_size
        return self._buf[base:base + self.region_size].tobytes()


@dataclass
class AccessTrace:
    """Ordered access records, stored as one structured array.

    metadata is carried in memory only (input digest, nonce, config id and
    the like); the binary and JSON-lines formats persist just the records.
    """

    records: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=RECORD_DTYPE))
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.records.dtype != RECORD_DTYPE:
            raise MalformedTrace("records must use the packed trace dtype")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[AccessRecord]:
        for rec in self.records:
            yield AccessRecord(
                op=int(rec["op"]), hash_id=int(rec["hash_id"]),
                byte_offset=int(rec["offset"]), stage=int(rec["stage"]),
                seq=int(rec["seq"]))

    @classmethod
    def from_columns(cls, op: np.ndarray, stage: np.ndarray, offset: np.ndarray,
                     hash_id: int = 0, seq_start: int = 0,
                     metadata: dict | None = None) -> "AccessTrace":
        n = len(op)
        if len(stage) != n or len(offset) != n:
            raise MalformedTrace("column lengths differ")
        recs = np.empty(n, dtype=RECORD_DTYPE)
        recs["op"] = op
        recs["stage"] = stage
        recs["hash_id"] = hash_id
        recs["seq"] = np.arange(seq_start, seq_start + n, dtype=np.uint64)
        recs["offset"] = offset
        return cls(recs, metadata or {})

    @classmethod
    def concat(cls, traces: list["AccessTrace"]) -> "AccessTrace":
        """Join already-ordered traces; seq values are kept as they are."""
        if not traces:
            return cls()
        recs = np.concatenate([t.records for t in traces])
        meta = dict(traces[0].metadata)
        return cls(recs, meta)

    def validate(self) -> None:
        """Checks the per-trace invariants; raises MalformedTrace on the first hit."""
        r = self.records
        if len(r) == 0:
            return
        if len(r) > 1 and not (r["seq"][1:] > r["seq"][:-1]).all():
            raise MalformedTrace("seq is not strictly increasing")
        if (r["op"] > 1).any():
            raise MalformedTrace("op out of range")
        if (r["stage"] > 2).any():
            raise MalformedTrace("stage out of range")

    # -- binary format -----------------------------------------------------

    def save(self, fp: BinaryIO) -> None:
        fp.write(_HEADER.pack(TRACE_MAGIC, TRACE_VERSION, len(self.records)))
        fp.write(self.records.tobytes())

    @classmethod
    def load(cls, fp: BinaryIO) -> "AccessTrace":
        head = fp.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise MalformedTrace("truncated header")
        magic, version, count = _HEADER.unpack(head)
        if magic != TRACE_MAGIC:
            raise MalformedTrace(f"bad magic {magic!r}")
        if version != TRACE_VERSION:
            raise MalformedTrace(f"unsupported version {version}")
        body = fp.read(count * RECORD_DTYPE.itemsize)
        if len(body) != count * RECORD_DTYPE.itemsize:
            raise MalformedTrace("record area shorter than the header count")
        recs = np.frombuffer(body, dtype=RECORD_DTYPE).copy()
        return cls(recs)

    def save_path(self, path: str) -> None:
        with open(path, "wb") as fp:
            self.save(fp)

    @classmethod
    def load_path(cls, path: str) -> "AccessTrace":
        with open(path, "rb") as fp:
            return cls.load(fp)

    # -- JSON-lines debug format --------------------------------------------

    def save_jsonl(self, fp: TextIO) -> None:
        for rec in self.records:
            fp.write(json.dumps({
                "op": int(rec["op"]), "stage": int(rec["stage"]),
                "hash_id": int(rec["hash_id"]), "seq": int(rec["seq"]),
                "offset": int(rec["offset"]),
            }) + "\n")

    @classmethod
    def load_jsonl(cls, fp: TextIO) -> "AccessTrace":
        rows = []
        for lineno, line in enumerate(fp, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rows.append((obj["op"], obj["stage"], obj["hash_id"],
                             obj["seq"], obj["offset"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MalformedTrace(f"line {lineno}: {exc}") from exc
        return cls(np.array(rows, dtype=RECORD_DTYPE))


class Scratchpad:
    """One hash computation's working buffer.

    Owns one region of a backend; by default a private zeroed FlatBackend.
    Accesses must be 16-byte aligned and inside the region. set_stage tags
    subsequent trace records; hash_core flips it as the dataflow advances.
    """

    def __init__(self, hash_id: int = 0, backend: MemoryBackend | None = None,
                 region: int = 0, size: int = PAD_SIZE):
        self.hash_id = hash_id
        self.size = size
        self.backend = backend if backend is not None else FlatBackend(1, size)
        self.region = region
        self._tracing = False
        self._stage = Stage.EXPLODE
        self._seq_next = 0
        self._chunks: list[np.ndarray] = []
        self._pending: list[tuple[int, int, int]] = []  # (op, stage, offset)

    # -- access -------------------------------------------------------------

    def _check(self, offset: int) -> None:
        if offset % BLOCK_SIZE:
            raise Misaligned(f"offset {offset} is not 16-byte aligned")
        if not 0 <= offset < self.size:
            raise OutOfBounds(f"offset {offset} outside [0, {self.size})")

    def read16(self, offset: int) -> Block128:
        self._check(offset)
        if self._tracing:
            self._pending.append((Op.READ, self._stage, offset))
        return self.backend.read_block(self.region, offset)

    def write16(self, offset: int, block: Block128) -> None:
        self._check(offset)
        if self._tracing:
            self._pending.append((Op.WRITE, self._stage, offset))
        self.backend.write_block(self.region, offset, block)

    # -- tracing ------------------------------------------------------------

    def trace_capture(self, enable: bool) -> None:
        self._tracing = enable

    @property
    def tracing(self) -> bool:
        return self._tracing

    def set_stage(self, stage: int) -> None:
        self._stage = stage

    def _flush_pending(self) -> None:
        if not self._pending:
            return
        n = len(self._pending)
        recs = np.empty(n, dtype=RECORD_DTYPE)
        op, stage, offset = zip(*self._pending)
        recs["op"] = op
        recs["stage"] = stage
        recs["hash_id"] = self.hash_id
        recs["seq"] = np.arange(self._seq_next, self._seq_next + n, dtype=np.uint64)
        recs["offset"] = offset
        self._seq_next += n
        self._chunks.append(recs)
        self._pending.clear()

    def append_trace_columns(self, op: np.ndarray, stage: np.ndarray,
                             offset: np.ndarray) -> None:
        """Bulk append used by the compiled kernels' analytic trace emitters."""
        if not self._tracing:
            return
        self._flush_pending()
        n = len(op)
        recs = np.empty(n, dtype=RECORD_DTYPE)
        recs["op"] = op
        recs["stage"] = stage
        recs["hash_id"] = self.hash_id
        recs["seq"] = np.arange(self._seq_next, self._seq_next + n, dtype=np.uint64)
        recs["offset"] = offset
        self._seq_next += n
        self._chunks.append(recs)

    def trace(self, metadata: dict | None = None) -> AccessTrace:
        self._flush_pending()
        if not self._chunks:
            return AccessTrace(metadata=metadata or {})
        return AccessTrace(np.concatenate(self._chunks), metadata or {})

    def clear_trace(self) -> None:
        self._chunks.clear()
        self._pending.clear()
        self._seq_next = 0

    # -- misc ---------------------------------------------------------------

    def u64_view(self) -> np.ndarray:
        """Little-endian u64 view of the whole region, for the kernels."""
        backend = self.backend
        if isinstance(backend, FlatBackend):
            return backend.region_view_u64(self.region)
        raise TypeError("dense view requires a FlatBackend")

    def to_bytes(self) -> bytes:
        backend = self.backend
        if isinstance(backend, FlatBackend):
            return backend.region_bytes(self.region)
        return b"".join(
            self.backend.read_block(self.region, off).data
            for off in range(0, self.size, BLOCK_SIZE))


def read16(pad: Scratchpad, offset: int) -> Block128:
    return pad.read16(offset)


def write16(pad: Scratchpad, offset: int, block: Block128) -> None:
    pad.write16(offset, block)


def trace_capture(pad: Scratchpad, enable: bool) -> None:
    pad.trace_capture(enable)


def region_base(hash_id: int, config) -> int:
    """Byte base of the 4 MiB region owned by hash_id under `config`.

    Regions are laid out contiguously at hash_id * 4 MiB, which keeps them
    disjoint and, at the maximum depth of 128, well under the 8 GiB of
    modeled memory.
    """
    depth = config.pipeline_depth
    if not 0 <= hash_id < depth:
        raise BadHashId(f"hash_id {hash_id} outside [0, {depth})")
    base = hash_id * PAD_SIZE
    if base + PAD_SIZE > MODELED_MEMORY_BYTES:
        raise BadHashId(f"hash_id {hash_id} region exceeds modeled memory")
    return base
