"""Nonce search against a pool-style difficulty target.

A nonce is a share when the last 8 digest bytes, read as a little-endian
64-bit integer, fall below floor(2^64 / difficulty); --strict-target
swaps in the full 256-bit network rule (digest x difficulty < 2^256).
Workers claim nonces from a shared counter in ascending order and each
owns its scratchpad, so the winning nonce is the lowest share in the
range no matter how many threads run.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from .errors import JobError
from .hash_core import HAVEN, AlgoConstants, HashJob, cn_haven_hash
from .scratchpad import Scratchpad

_U64 = 1 << 64
_U256 = 1 << 256


@dataclass(frozen=True)
class JobFile:
    blob_hex: str
    nonce_offset: int = 39
    difficulty: int = 1
    nonce_start: int = 0
    nonce_end: int = 1 << 32

    _FIELDS = ("blob_hex", "nonce_offset", "difficulty", "nonce_start", "nonce_end")

    def validate(self) -> bytes:
        """Returns the decoded blob; raises JobError on any bad field."""
        try:
            blob = bytes.fromhex(self.blob_hex)
        except (ValueError, TypeError) as exc:
            raise JobError(f"blob_hex does not decode: {exc}") from None
        if not 1 <= self.difficulty < _U64:
            raise JobError("difficulty must be in [1, 2^64)")
        if not 0 <= self.nonce_start < self.nonce_end <= 1 << 32:
            raise JobError("nonce range must be a non-empty 32-bit interval")
        if not 0 <= self.nonce_offset <= len(blob) - 4:
            raise JobError("nonce_offset window falls outside the blob")
        return blob

    @classmethod
    def from_dict(cls, data: dict) -> "JobFile":
        if not isinstance(data, dict):
            raise JobError("job must be a JSON object")
        unknown = set(data) - set(cls._FIELDS)
        if unknown:
            raise JobError(f"unknown job fields: {sorted(unknown)}")
        if "blob_hex" not in data:
            raise JobError("job is missing blob_hex")
        job = cls(**data)
        job.validate()
        return job

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self._FIELDS}


@dataclass(frozen=True)
class ShareResult:
    nonce: int | None
    digest_hex: str | None
    meets_target: bool
    hashes_tried: int
    elapsed_s: float
    hash_rate: float
    interrupted: bool = False

    def to_dict(self) -> dict:
        return {
            "nonce": self.nonce,
            "digest_hex": self.digest_hex,
            "meets_target": self.meets_target,
            "hashes_tried": self.hashes_tried,
            "elapsed_s": self.elapsed_s,
            "hash_rate": self.hash_rate,
            "interrupted": self.interrupted,
        }


def share_target(difficulty: int) -> int:
    if not 1 <= difficulty < _U64:
        raise JobError("difficulty must be in [1, 2^64)")
    return _U64 // difficulty


def meets_target(digest: bytes, difficulty: int, strict: bool = False) -> bool:
    if strict:
        return int.from_bytes(digest, "little") * difficulty < _U256
    return int.from_bytes(digest[24:], "little") < share_target(difficulty)


class _Search:
    """Shared claim counter plus the stop rule.

    Nonces are handed out in ascending order. Once a share at nonce k is
    known, claiming stops above k, but claims below k already in flight
    still finish, so the final minimum is the lowest share in the range.
    """

    def __init__(self, start: int, end: int):
        self.lock = threading.Lock()
        self.next_nonce = start
        self.end = end
        self.stop_at = end  # exclusive claim ceiling
        self.found: list[tuple[int, bytes]] = []
        self.tried = 0
        self.abort = threading.Event()

    def claim(self) -> int | None:
        with self.lock:
            if self.next_nonce >= min(self.end, self.stop_at):
                return None
            nonce = self.next_nonce
            self.next_nonce += 1
            return nonce

    def report(self, nonce: int, digest: bytes, is_share: bool) -> None:
        with self.lock:
            self.tried += 1
            if is_share:
                self.found.append((nonce, digest))
                self.stop_at = min(self.stop_at, nonce)


def _worker(search: _Search, blob: bytes, job: JobFile,
            constants: AlgoConstants, strict: bool, engine: str) -> None:
    pad = Scratchpad(size=constants.scratchpad_bytes)
    while not search.abort.is_set():
        nonce = search.claim()
        if nonce is None:
            return
        digest = cn_haven_hash(
            HashJob(blob, nonce=nonce, nonce_offset=job.nonce_offset),
            constants, pad=pad, engine=engine)
        search.report(nonce, digest, meets_target(digest, job.difficulty, strict))


def mine(job: JobFile, threads: int = 1, constants: AlgoConstants = HAVEN,
         strict_target: bool = False, engine: str = "auto") -> ShareResult:
    """Scans [nonce_start, nonce_end) and returns the lowest share found,
    or a no-share result carrying the search statistics. An interrupt
    stops the workers and returns partial statistics."""
    blob = job.validate()
    if threads < 1:
        raise JobError("threads must be at least 1")
    threads = min(threads, job.nonce_end - job.nonce_start)
    search = _Search(job.nonce_start, job.nonce_end)
    t0 = time.perf_counter()
    pool = [threading.Thread(target=_worker, daemon=True,
                             args=(search, blob, job, constants, strict_target, engine))
            for _ in range(threads)]
    interrupted = False
    for t in pool:
        t.start()
    try:
        for t in pool:
            while t.is_alive():
                t.join(timeout=0.25)
    except KeyboardInterrupt:
        interrupted = True
        search.abort.set()
        for t in pool:
            t.join()
    elapsed = time.perf_counter() - t0
    rate = search.tried / elapsed if elapsed > 0 else 0.0
    if search.found:
        nonce, digest = min(search.found)
        return ShareResult(nonce, digest.hex(), True, search.tried,
                           elapsed, rate, interrupted)
    return ShareResult(None, None, False, search.tried, elapsed, rate, interrupted)
