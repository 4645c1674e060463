"""Event-driven model of the pipelined multi-hash accelerator.

Five stages (Keccak, Explode, Shuffle, Implode, Finalize) communicate
through bounded FIFOs, with Shuffle alone in the fast clock domain. Time
is counted in shuffle-domain ticks as exact rationals, so the two domains
never drift. Each stage serves a whole hash as one aggregate job whose
service time comes from its per-item cost plus a memory model: Explode
and Implode stream sequential bursts that overlap up to outstanding_limit
requests, while Shuffle pays the full round trip for every dependent
read. The same service-time table drives both simulate() and the
closed-form theoretical_bounds(), so the two agree by construction at
pipeline depth one.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import sqrt

import numpy as np

from .errors import CnHavenError, ConfigInvalid, Deadlock
from .hash_core import HAVEN

_ITERATIONS = HAVEN.iterations
_N_BLOCKS = HAVEN.scratchpad_bytes // 16
_N_GROUPS = HAVEN.scratchpad_bytes // 128
_DEPENDENT_READS = 3   # per shuffle iteration; each must return before the next
_ACCESSES_PER_ITER = 6

STAGE_NAMES = ("Keccak", "Explode", "Shuffle", "Implode", "Finalize")
FIFO_NAMES = tuple(f"{a.lower()}_to_{b.lower()}"
                   for a, b in zip(STAGE_NAMES, STAGE_NAMES[1:]))


@dataclass(frozen=True)
class StageModel:
    name: str
    cycles_per_item: int
    clock_domain: str  # "shuffle" or "other"


# Items are 128-byte groups for Explode/Implode, loop iterations for
# Shuffle, and whole messages for Keccak/Finalize. The costs are modeling
# defaults (10 pipelined AES rounds per group), overridable via
# PipelineConfig.stages.
DEFAULT_STAGES = (
    StageModel("Keccak", 24, "other"),
    StageModel("Explode", 10, "other"),
    StageModel("Shuffle", 1, "shuffle"),
    StageModel("Implode", 10, "other"),
    StageModel("Finalize", 100, "other"),
)


@dataclass(frozen=True)
class MemLatency:
    read_fixed: int = 100
    write_fixed: int = 20
    jitter_max: int = 0
    seed: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    pipeline_depth: int = 1
    shuffle_clock_mhz: int = 500
    other_clock_mhz: int = 200
    fifo_depths: tuple = (16, 16, 16, 16)
    mem_latency_ticks: MemLatency = field(default_factory=MemLatency)
    outstanding_limit: int = 32
    n_kernels: int = 1
    pcs_per_kernel: int = 1
    stages: tuple = DEFAULT_STAGES

    def __post_init__(self):
        if isinstance(self.mem_latency_ticks, dict):
            object.__setattr__(self, "mem_latency_ticks",
                               MemLatency(**self.mem_latency_ticks))
        if not isinstance(self.fifo_depths, tuple):
            object.__setattr__(self, "fifo_depths", tuple(self.fifo_depths))
        if not isinstance(self.stages, tuple):
            object.__setattr__(self, "stages", tuple(self.stages))

    def validate(self) -> None:
        if not 1 <= self.pipeline_depth <= 128:
            raise ConfigInvalid("pipeline_depth must be in 1..128")
        if self.shuffle_clock_mhz <= 0 or self.other_clock_mhz <= 0:
            raise ConfigInvalid("clock frequencies must be positive")
        if len(self.fifo_depths) != len(FIFO_NAMES):
            raise ConfigInvalid(f"fifo_depths needs {len(FIFO_NAMES)} entries")
        if any(not isinstance(d, int) or d < 1 for d in self.fifo_depths):
            raise ConfigInvalid("fifo_depths must be positive integers")
        m = self.mem_latency_ticks
        if m.read_fixed < 0 or m.write_fixed < 0 or m.jitter_max < 0:
            raise ConfigInvalid("memory latencies must be non-negative")
        if self.outstanding_limit < 1:
            raise ConfigInvalid("outstanding_limit must be at least 1")
        if self.n_kernels < 1 or self.pcs_per_kernel < 1:
            raise ConfigInvalid("n_kernels and pcs_per_kernel must be at least 1")
        names = tuple(s.name for s in self.stages)
        if names != STAGE_NAMES:
            raise ConfigInvalid(f"stages must be {STAGE_NAMES} in order")
        if any(s.cycles_per_item < 1 for s in self.stages):
            raise ConfigInvalid("cycles_per_item must be positive")
        domains = [s.clock_domain for s in self.stages]
        if domains.count("shuffle") != 1 or set(domains) - {"shuffle", "other"}:
            raise ConfigInvalid("exactly one stage may sit in the shuffle domain")

    def to_dict(self) -> dict:
        return {
            "pipeline_depth": self.pipeline_depth,
            "shuffle_clock_mhz": self.shuffle_clock_mhz,
            "other_clock_mhz": self.other_clock_mhz,
            "fifo_depths": list(self.fifo_depths),
            "mem_latency_ticks": {
                "read_fixed": self.mem_latency_ticks.read_fixed,
                "write_fixed": self.mem_latency_ticks.write_fixed,
                "jitter_max": self.mem_latency_ticks.jitter_max,
                "seed": self.mem_latency_ticks.seed,
            },
            "outstanding_limit": self.outstanding_limit,
            "n_kernels": self.n_kernels,
            "pcs_per_kernel": self.pcs_per_kernel,
        }


@dataclass(frozen=True)
class SimReport:
    hashes_completed: int
    sim_ticks: dict
    hash_rate_hs: float
    stage_utilization: dict
    fifo_occupancy: dict
    mem_requests: dict
    bottleneck: str | None
    config: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "hashes_completed": self.hashes_completed,
            "sim_ticks": dict(self.sim_ticks),
            "hash_rate_hs": self.hash_rate_hs,
            "stage_utilization": dict(self.stage_utilization),
            "fifo_occupancy": {k: dict(v) for k, v in self.fifo_occupancy.items()},
            "mem_requests": {
                "reads": self.mem_requests["reads"],
                "writes": self.mem_requests["writes"],
                "latency_histogram": {
                    str(k): v
                    for k, v in self.mem_requests["latency_histogram"].items()},
            },
            "bottleneck": self.bottleneck,
        }
        if self.config is not None:
            out["config"] = self.config
        return out


@dataclass(frozen=True)
class SweepError:
    config: dict
    error: str

    def to_dict(self) -> dict:
        return {"config": self.config, "error": self.error}


def _tick_ratio(config: PipelineConfig) -> Fraction:
    """Shuffle-domain ticks per other-domain cycle."""
    return Fraction(config.shuffle_clock_mhz, config.other_clock_mhz)


def _stream_ticks(n_requests: int, per_request: Fraction, limit: int) -> Fraction:
    """Burstable sequential stream: the port moves one block per tick and
    keeps up to `limit` requests in flight, so throughput is the smaller of
    the two."""
    return n_requests * max(Fraction(1), Fraction(per_request) / limit)


def stage_service_ticks(config: PipelineConfig, jitter: str = "none") -> dict:
    """Per-hash service time of every stage, in shuffle-domain ticks.

    jitter="none" gives the zero-jitter floor; jitter="mean" adds the
    expected jitter_max/2 to each memory request, which is what the
    closed-form bounds use.
    """
    r = _tick_ratio(config)
    mem = config.mem_latency_ticks
    extra = Fraction(mem.jitter_max, 2) if jitter == "mean" else Fraction(0)
    read = mem.read_fixed + extra
    write = mem.write_fixed + extra
    limit = config.outstanding_limit
    cost = {s.name: s.cycles_per_item for s in config.stages}
    domain = {s.name: s.clock_domain for s in config.stages}

    def in_ticks(name, cycles):
        return cycles * (Fraction(1) if domain[name] == "shuffle" else r)

    return {
        "Keccak": in_ticks("Keccak", cost["Keccak"]),
        "Explode": max(in_ticks("Explode", cost["Explode"] * _N_GROUPS),
                       _stream_ticks(_N_BLOCKS, write, limit)),
        "Shuffle": _ITERATIONS * (in_ticks("Shuffle", cost["Shuffle"])
                                  + _DEPENDENT_READS * read),
        "Implode": max(in_ticks("Implode", cost["Implode"] * 2 * _N_GROUPS),
                       _stream_ticks(2 * _N_BLOCKS, read, limit)),
        "Finalize": in_ticks("Finalize", cost["Finalize"]),
    }


def _shuffle_servers(config: PipelineConfig, nominal: dict) -> int:
    """Concurrent shuffle chains: bounded by in-flight hashes, by the
    outstanding-request budget (one dependent read in flight per chain),
    and by the unit's issue rate of one access per tick."""
    per_hash_accesses = _ITERATIONS * _ACCESSES_PER_ITER
    issue_cap = int(nominal["Shuffle"] / per_hash_accesses)
    return max(1, min(config.pipeline_depth, config.outstanding_limit, issue_cap))


def _sum_uniform(rng: np.random.Generator, count: int, jitter_max: int) -> int:
    """Total of `count` iid uniform integer jitters on [0, jitter_max]."""
    if count == 0 or jitter_max == 0:
        return 0
    if count <= 256:
        return int(rng.integers(0, jitter_max + 1, size=count).sum())
    mean = count * jitter_max / 2
    var = count * ((jitter_max + 1) ** 2 - 1) / 12
    sample = round(rng.normal(mean, sqrt(var)))
    return int(min(max(sample, 0), count * jitter_max))


def _spread_histogram(hist: dict, total: int, fixed: int, jitter_max: int) -> None:
    """Add `total` requests spread evenly over [fixed, fixed+jitter_max]."""
    if total == 0:
        return
    bins = jitter_max + 1
    per, rem = divmod(total, bins)
    for i in range(bins):
        count = per + (1 if i < rem else 0)
        if count:
            hist[fixed + i] = hist.get(fixed + i, 0) + count


class _Sim:
    """Tandem queue of aggregate-service stations with bounded FIFOs.

    A station that finishes a hash while its output FIFO is full keeps the
    server occupied until space appears; that backpressure is what makes
    fifo_depths matter. The heap carries only completion events; admission
    and hand-offs cascade synchronously after each one.
    """

    def __init__(self, config: PipelineConfig, n_hashes: int):
        self.config = config
        self.n = n_hashes
        self.rng = np.random.default_rng(config.mem_latency_ticks.seed)
        nominal = stage_service_ticks(config, jitter="none")
        self.nominal = nominal
        self.servers = [1, 1, _shuffle_servers(config, nominal), 1, 1]
        self.free = list(self.servers)
        self.fifos = [deque() for _ in FIFO_NAMES]
        self.caps = list(config.fifo_depths)
        self.blocked = [deque() for _ in FIFO_NAMES]
        self.heap: list = []
        self.event_seq = 0
        self.injected = 0
        self.completed = 0
        self.in_flight = 0
        self.started: dict = {}
        self.busy = [Fraction(0)] * len(STAGE_NAMES)
        self.fifo_acc = [Fraction(0)] * len(FIFO_NAMES)
        self.fifo_last = [Fraction(0)] * len(FIFO_NAMES)
        self.fifo_max = [0] * len(FIFO_NAMES)
        self.t_end = Fraction(0)

    # -- service times -------------------------------------------------------

    def service(self, stage: int, _hash_id: int) -> Fraction:
        mem = self.config.mem_latency_ticks
        limit = self.config.outstanding_limit
        jmax = mem.jitter_max
        name = STAGE_NAMES[stage]
        base = self.nominal[name]
        if jmax == 0:
            return base
        if name == "Explode":
            jit = _sum_uniform(self.rng, _N_BLOCKS, jmax)
            return max(base, _stream_ticks(_N_BLOCKS, mem.write_fixed, limit)
                       + Fraction(jit, limit))
        if name == "Shuffle":
            jit = _sum_uniform(self.rng, _DEPENDENT_READS * _ITERATIONS, jmax)
            return base + jit
        if name == "Implode":
            jit = _sum_uniform(self.rng, 2 * _N_BLOCKS, jmax)
            return max(base, _stream_ticks(2 * _N_BLOCKS, mem.read_fixed, limit)
                       + Fraction(jit, limit))
        return base

    # -- fifo bookkeeping ------------------------------------------------------

    def _fifo_touch(self, b: int, t: Fraction) -> None:
        self.fifo_acc[b] += len(self.fifos[b]) * (t - self.fifo_last[b])
        self.fifo_last[b] = t

    def _fifo_push(self, b: int, h: int, t: Fraction) -> None:
        self._fifo_touch(b, t)
        self.fifos[b].append(h)
        self.fifo_max[b] = max(self.fifo_max[b], len(self.fifos[b]))

    def _fifo_pop(self, b: int, t: Fraction) -> int:
        self._fifo_touch(b, t)
        return self.fifos[b].popleft()

    # -- event machinery -------------------------------------------------------

    def _schedule(self, stage: int, h: int, t: Fraction) -> None:
        self.free[stage] -= 1
        self.started[(stage, h)] = t
        done = t + self.service(stage, h)
        heapq.heappush(self.heap, (done, self.event_seq, stage, h))
        self.event_seq += 1

    def _release(self, stage: int, h: int, t: Fraction) -> None:
        self.busy[stage] += t - self.started.pop((stage, h))
        self.free[stage] += 1

    def _drain_blocked(self, b: int, t: Fraction) -> None:
        while self.blocked[b] and len(self.fifos[b]) < self.caps[b]:
            h = self.blocked[b].popleft()
            self._fifo_push(b, h, t)
            self._release(b, h, t)
            self._try_start(b, t)
            self._try_start(b + 1, t)

    def _pull_input(self, stage: int, t: Fraction):
        if stage == 0:
            if self.injected >= self.n or self.in_flight >= self.config.pipeline_depth:
                return None
            h = self.injected
            self.injected += 1
            self.in_flight += 1
            return h
        b = stage - 1
        if not self.fifos[b]:
            return None
        h = self._fifo_pop(b, t)
        self._drain_blocked(b, t)
        return h

    def _try_start(self, stage: int, t: Fraction) -> None:
        while self.free[stage] > 0:
            h = self._pull_input(stage, t)
            if h is None:
                return
            self._schedule(stage, h, t)

    def _finish(self, stage: int, h: int, t: Fraction) -> None:
        if stage == len(STAGE_NAMES) - 1:
            self._release(stage, h, t)
            self.completed += 1
            self.in_flight -= 1
            self._try_start(stage, t)
            self._try_start(0, t)
            return
        b = stage
        if len(self.fifos[b]) < self.caps[b]:
            self._fifo_push(b, h, t)
            self._release(stage, h, t)
            self._try_start(stage, t)
            self._try_start(stage + 1, t)
        else:
            self.blocked[b].append(h)

    def run(self) -> None:
        self._try_start(0, Fraction(0))
        while self.heap:
            t, _, stage, h = heapq.heappop(self.heap)
            self.t_end = t
            self._finish(stage, h, t)
        if self.completed != self.n:
            raise Deadlock(
                f"no event can fire with {self.n - self.completed} hashes "
                f"unfinished; check FIFO sizing")


def _mem_request_stats(config: PipelineConfig, n_hashes: int) -> dict:
    mem = config.mem_latency_ticks
    reads_per_hash = _DEPENDENT_READS * _ITERATIONS + 2 * _N_BLOCKS
    writes_per_hash = 3 * _ITERATIONS + _N_BLOCKS
    hist: dict = {}
    _spread_histogram(hist, n_hashes * reads_per_hash, mem.read_fixed, mem.jitter_max)
    _spread_histogram(hist, n_hashes * writes_per_hash, mem.write_fixed, mem.jitter_max)
    return {
        "reads": n_hashes * reads_per_hash,
        "writes": n_hashes * writes_per_hash,
        "latency_histogram": dict(sorted(hist.items())),
    }


def simulate(config: PipelineConfig, n_hashes: int) -> SimReport:
    """Run the event model to completion and aggregate the report.

    Deterministic for a given (config, n_hashes); the only randomness is
    the seeded latency jitter.
    """
    config.validate()
    if n_hashes < 0:
        raise ConfigInvalid("n_hashes must be non-negative")
    if n_hashes == 0:
        return SimReport(
            hashes_completed=0,
            sim_ticks={"shuffle": 0.0, "other": 0.0},
            hash_rate_hs=0.0,
            stage_utilization={name: 0.0 for name in STAGE_NAMES},
            fifo_occupancy={name: {"min": 0, "mean": 0.0, "max": 0}
                            for name in FIFO_NAMES},
            mem_requests=_mem_request_stats(config, 0),
            bottleneck=None,
        )

    sim = _Sim(config, n_hashes)
    sim.run()
    t_end = sim.t_end
    shuffle_hz = config.shuffle_clock_mhz * 1_000_000
    rate = float(n_hashes * config.n_kernels * shuffle_hz / t_end)
    utilization = {
        name: float(sim.busy[i] / (t_end * sim.servers[i]))
        for i, name in enumerate(STAGE_NAMES)
    }
    occupancy = {}
    for b, name in enumerate(FIFO_NAMES):
        sim._fifo_touch(b, t_end)
        occupancy[name] = {
            "min": 0,
            "mean": float(sim.fifo_acc[b] / t_end),
            "max": sim.fifo_max[b],
        }
    bottleneck = max(utilization, key=utilization.get)
    return SimReport(
        hashes_completed=sim.completed,
        sim_ticks={"shuffle": float(t_end),
                   "other": float(t_end / _tick_ratio(config))},
        hash_rate_hs=rate,
        stage_utilization=utilization,
        fifo_occupancy=occupancy,
        mem_requests=_mem_request_stats(config, n_hashes),
        bottleneck=bottleneck,
    )


def theoretical_bounds(config: PipelineConfig) -> dict:
    """Closed-form rate ceilings, in hashes per second.

    single_hash_rate: one hash alone through every stage in sequence.
    memory_bound_rate: aggregate port bandwidth over per-hash traffic,
    one 16-byte block per tick per pseudo-channel.
    pipeline_bound_rate: one shuffle chain limited by its dependent
    round trips, the term pipelining across hashes has to beat.
    """
    config.validate()
    shuffle_hz = config.shuffle_clock_mhz * 1_000_000
    services = stage_service_ticks(config, jitter="mean")
    single = shuffle_hz / float(sum(services.values()))

    blocks_per_hash = 3 * _N_BLOCKS + _ACCESSES_PER_ITER * _ITERATIONS
    ports = config.n_kernels * config.pcs_per_kernel
    memory = ports * shuffle_hz / blocks_per_hash

    mem = config.mem_latency_ticks
    cost = {s.name: s.cycles_per_item for s in config.stages}
    round_trip = cost["Shuffle"] + _DEPENDENT_READS * (
        mem.read_fixed + mem.jitter_max / 2)
    pipeline = shuffle_hz / (_ITERATIONS * round_trip)

    return {
        "single_hash_rate": single,
        "memory_bound_rate": memory,
        "pipeline_bound_rate": pipeline,
        "min_rate": min(single, memory, pipeline),
    }


def sweep(config_grid: list, n_hashes: int) -> list:
    """One report per config, order-preserving; a config that fails to
    validate or simulate yields a SweepError entry instead of aborting."""
    if not config_grid:
        raise ConfigInvalid("config grid is empty")
    results = []
    for config in config_grid:
        try:
            results.append(replace(simulate(config, n_hashes),
                                   config=config.to_dict()))
        except CnHavenError as exc:
            cfg = config.to_dict() if isinstance(config, PipelineConfig) else repr(config)
            results.append(SweepError(config=cfg, error=str(exc)))
    return results


def sweep_rows(results: list) -> list:
    """Flatten sweep results into uniform dict rows for delimited output."""
    rows = []
    for entry in results:
        row = {
            "pipeline_depth": None, "shuffle_clock_mhz": None,
            "other_clock_mhz": None, "read_fixed": None, "write_fixed": None,
            "jitter_max": None, "seed": None, "outstanding_limit": None,
            "n_kernels": None, "pcs_per_kernel": None,
            "hash_rate_hs": None, "bottleneck": None,
            "shuffle_utilization": None, "error": None,
        }
        cfg = entry.config if isinstance(entry.config, dict) else None
        if cfg:
            mem = cfg["mem_latency_ticks"]
            row.update({
                "pipeline_depth": cfg["pipeline_depth"],
                "shuffle_clock_mhz": cfg["shuffle_clock_mhz"],
                "other_clock_mhz": cfg["other_clock_mhz"],
                "read_fixed": mem["read_fixed"], "write_fixed": mem["write_fixed"],
                "jitter_max": mem["jitter_max"], "seed": mem["seed"],
                "outstanding_limit": cfg["outstanding_limit"],
                "n_kernels": cfg["n_kernels"],
                "pcs_per_kernel": cfg["pcs_per_kernel"],
            })
        if isinstance(entry, SweepError):
            row["error"] = entry.error
        else:
            row["hash_rate_hs"] = entry.hash_rate_hs
            row["bottleneck"] = entry.bottleneck
            row["shuffle_utilization"] = entry.stage_utilization["Shuffle"]
        rows.append(row)
    return rows
