"""Memory-hard proof-of-work toolkit: a bit-exact 4 MiB-scratchpad hash,
traced memory access capture, a discrete-event model of the pipelined
multi-hash accelerator, trace statistics, and a nonce miner."""

from __future__ import annotations

from .analysis import TraceStats, partition_check, trace_stats
from .errors import (
    BadHashId,
    BadSeedLength,
    CnHavenError,
    ConfigInvalid,
    Deadlock,
    InputTooShort,
    JobError,
    MalformedTrace,
    Misaligned,
    OutOfBounds,
)
from .hash_core import (
    HAVEN,
    ORIGINAL,
    AlgoConstants,
    HashJob,
    cn_haven_hash,
    hash_bytes,
    hash_with_checkpoints,
)
from .mining import JobFile, ShareResult, meets_target, mine, share_target
from .pipeline_sim import (
    MemLatency,
    PipelineConfig,
    SimReport,
    StageModel,
    simulate,
    stage_service_ticks,
    sweep,
    theoretical_bounds,
)
from .scratchpad import (
    PAD_SIZE,
    AccessRecord,
    AccessTrace,
    FlatBackend,
    MemoryBackend,
    Op,
    Scratchpad,
    Stage,
    region_base,
)

__version__ = "0.1.0"

__all__ = [
    "AccessRecord",
    "AccessTrace",
    "AlgoConstants",
    "BadHashId",
    "BadSeedLength",
    "CnHavenError",
    "ConfigInvalid",
    "Deadlock",
    "FlatBackend",
    "HAVEN",
    "HashJob",
    "InputTooShort",
    "JobError",
    "JobFile",
    "MalformedTrace",
    "MemLatency",
    "MemoryBackend",
    "Misaligned",
    "ORIGINAL",
    "Op",
    "OutOfBounds",
    "PAD_SIZE",
    "PipelineConfig",
    "Scratchpad",
    "ShareResult",
    "SimReport",
    "Stage",
    "StageModel",
    "TraceStats",
    "cn_haven_hash",
    "hash_bytes",
    "hash_with_checkpoints",
    "meets_target",
    "mine",
    "partition_check",
    "region_base",
    "share_target",
    "simulate",
    "stage_service_ticks",
    "sweep",
    "theoretical_bounds",
    "trace_stats",
]
