"""Command-line front end.

Exit codes: 0 success, 1 verification mismatch, 2 malformed input or
configuration, 3 nonce range exhausted without a share. With --json every
result and every error is a single machine-parsable JSON object on
stdout; human-readable messages go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

from .analysis import partition_check, trace_stats
from .errors import (
    CnHavenError,
    ConfigInvalid,
    InputTooShort,
    JobError,
    MalformedTrace,
)
from .hash_core import HAVEN, HashJob, cn_haven_hash
from .mining import JobFile, mine
from .pipeline_sim import (
    MemLatency,
    PipelineConfig,
    SimReport,
    simulate,
    sweep,
    sweep_rows,
    theoretical_bounds,
)
from .scratchpad import AccessTrace, Scratchpad, Stage

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_BAD_INPUT = 2
EXIT_EXHAUSTED = 3

_STAGE_BY_NAME = {"explode": Stage.EXPLODE, "shuffle": Stage.SHUFFLE,
                  "implode": Stage.IMPLODE}


class _CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_BAD_INPUT):
        super().__init__(message)
        self.code = code


def _emit(payload: dict, as_json: bool, human: str | None = None) -> None:
    if as_json:
        print(json.dumps(payload, indent=2))
    elif human is not None:
        print(human)


def _default_threads() -> int:
    env = os.environ.get("CNHAVEN_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


# -- hash ----------------------------------------------------------------------


def cmd_hash(args) -> int:
    try:
        blob = bytes.fromhex(args.blob_hex)
    except ValueError as exc:
        raise _CliError(f"blob is not valid hex: {exc}") from None
    try:
        if len(blob) < HAVEN.min_input_len:
            raise InputTooShort(
                f"input is {len(blob)} bytes, minimum is {HAVEN.min_input_len}")
        job = HashJob(blob, nonce=args.nonce, nonce_offset=args.nonce_offset)
        pad = Scratchpad(size=HAVEN.scratchpad_bytes)
        if args.trace:
            pad.trace_capture(True)
        digest = cn_haven_hash(job, HAVEN, pad=pad)
    except (CnHavenError, ValueError) as exc:
        raise _CliError(f"{type(exc).__name__}: {exc}") from None
    if args.trace:
        pad.trace(metadata={"nonce": args.nonce}).save_path(args.trace)
    _emit({"digest_hex": digest.hex()}, args.json, digest.hex())
    return EXIT_OK


# -- mine ----------------------------------------------------------------------


def _load_job(path: str) -> JobFile:
    try:
        if path == "-":
            data = json.load(sys.stdin)
        else:
            with open(path) as fp:
                data = json.load(fp)
    except OSError as exc:
        raise _CliError(f"cannot read job file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise _CliError(f"job file is not valid JSON: {exc}") from None
    try:
        return JobFile.from_dict(data)
    except JobError as exc:
        raise _CliError(str(exc)) from None


def cmd_mine(args) -> int:
    job = _load_job(args.job)
    result = mine(job, threads=args.threads, strict_target=args.strict_target)
    payload = result.to_dict()
    if result.meets_target:
        human = (f"share nonce={result.nonce} digest={result.digest_hex}\n"
                 f"tried {result.hashes_tried} hashes in {result.elapsed_s:.2f}s "
                 f"({result.hash_rate:.2f} H/s)")
        _emit(payload, args.json, human)
        return EXIT_OK
    reason = "interrupted" if result.interrupted else "range exhausted"
    _emit(payload, args.json,
          f"no share ({reason}): tried {result.hashes_tried} hashes in "
          f"{result.elapsed_s:.2f}s ({result.hash_rate:.2f} H/s)")
    return EXIT_EXHAUSTED


# -- verify --------------------------------------------------------------------


def _check_entry(entry: dict) -> list:
    from .hash_core import hash_with_checkpoints

    blob = bytes.fromhex(entry["blob_hex"])
    digest, got = hash_with_checkpoints(HashJob(blob, nonce=entry["nonce"]))
    failures = []
    if digest.hex() != entry["digest_hex"]:
        failures.append("digest_hex")
    for key, expect in entry["checkpoints"].items():
        if got.get(key) != expect:
            failures.append(f"checkpoints.{key}")
    return failures


def cmd_verify(args) -> int:
    try:
        with open(args.corpus) as fp:
            lines = [line for line in fp if line.strip()]
        entries = [json.loads(line) for line in lines]
    except OSError as exc:
        raise _CliError(f"cannot read corpus: {exc}") from None
    except json.JSONDecodeError as exc:
        raise _CliError(f"corpus is not valid JSONL: {exc}") from None

    failures = []
    for i, entry in enumerate(entries):
        try:
            bad_fields = _check_entry(entry)
        except (KeyError, ValueError, CnHavenError) as exc:
            raise _CliError(f"corpus entry {i} is malformed: {exc!r}") from None
        if bad_fields:
            failures.append({"index": i, "fields": bad_fields})
            if not args.json:
                print(f"entry {i}: FAIL ({', '.join(bad_fields)})")
        elif not args.json:
            print(f"entry {i}: ok")

    payload = {"entries": len(entries), "passed": len(entries) - len(failures),
               "failures": failures}
    if not entries:
        print("warning: 0 entries in corpus", file=sys.stderr)
    _emit(payload, args.json,
          f"{payload['passed']}/{payload['entries']} entries verified")
    return EXIT_MISMATCH if failures else EXIT_OK


# -- simulate / sweep ----------------------------------------------------------


def _build_config(args, overrides: dict) -> PipelineConfig:
    base: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fp:
                base = json.load(fp)
        except OSError as exc:
            raise _CliError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise _CliError(f"config is not valid JSON: {exc}") from None
        if not isinstance(base, dict):
            raise _CliError("config file must hold a JSON object")
    base.update(overrides)
    if args.seed is not None:
        mem = dict(base.get("mem_latency_ticks", {}))
        mem["seed"] = args.seed
        base["mem_latency_ticks"] = mem
    try:
        config = PipelineConfig(**base)
        config.validate()
    except (TypeError, ConfigInvalid) as exc:
        raise _CliError(f"invalid config: {exc}") from None
    return config


def cmd_simulate(args) -> int:
    overrides = {}
    if args.depth is not None:
        overrides["pipeline_depth"] = args.depth
    config = _build_config(args, overrides)
    report = simulate(config, args.hashes)
    bounds = theoretical_bounds(config)
    payload = report.to_dict()
    payload["theoretical_bounds"] = bounds
    util = ", ".join(f"{k} {v:.2f}" for k, v in report.stage_utilization.items())
    human = (f"{report.hashes_completed} hashes at {report.hash_rate_hs:.2f} H/s "
             f"(bound {bounds['min_rate']:.2f} H/s)\n"
             f"bottleneck: {report.bottleneck}\nutilization: {util}")
    _emit(payload, args.json, human)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        depths = sorted({int(d) for d in args.depths.split(",") if d.strip()})
    except ValueError as exc:
        raise _CliError(f"bad --depths list: {exc}") from None
    if not depths:
        raise _CliError("--depths is empty")
    base = _build_config(args, {})
    grid = [dataclasses.replace(base, pipeline_depth=d) for d in depths]
    results = sweep(grid, args.hashes)
    rows = sweep_rows(results)

    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "sweep.json")
    with open(json_path, "w") as fp:
        json.dump([r.to_dict() for r in results], fp, indent=2)
    csv_path = os.path.join(args.out, "sweep.csv")
    with open(csv_path, "w", newline="") as fp:
        writer = csv.DictWriter(fp, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)

    from .plotting import save_sweep_figures

    figures = save_sweep_figures(results, args.out)
    payload = {"rows": rows, "files": [json_path, csv_path, *figures]}
    lines = [f"depth {row['pipeline_depth']}: "
             + (f"error: {row['error']}" if row["error"]
                else f"{row['hash_rate_hs']:.2f} H/s ({row['bottleneck']})")
             for row in rows]
    lines += [f"wrote {p}" for p in payload["files"]]
    _emit(payload, args.json, "\n".join(lines))
    return EXIT_OK


# -- analyze -------------------------------------------------------------------


def cmd_analyze(args) -> int:
    try:
        if args.trace.endswith(".jsonl"):
            with open(args.trace) as fp:
                trace = AccessTrace.load_jsonl(fp)
        else:
            trace = AccessTrace.load_path(args.trace)
    except OSError as exc:
        raise _CliError(f"cannot read trace: {exc}") from None
    except MalformedTrace as exc:
        raise _CliError(f"malformed trace: {exc}") from None

    overall = trace_stats(trace)
    per_stage = {}
    for name, stage in _STAGE_BY_NAME.items():
        sub = AccessTrace(trace.records[trace.records["stage"] == int(stage)])
        if len(sub):
            per_stage[name] = trace_stats(sub)
    config = PipelineConfig(pipeline_depth=args.depth)
    partitions = partition_check([trace], config)

    report = {
        "trace": args.trace,
        "overall": overall.to_dict(),
        "stages": {name: stats.to_dict() for name, stats in per_stage.items()},
        "partition_check": partitions,
    }
    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "analyze.json")
    with open(json_path, "w") as fp:
        json.dump(report, fp, indent=2)

    from .plotting import save_trace_figures

    figures = save_trace_figures(overall, per_stage, args.out)
    # stdout gets the scalars; full histograms live in analyze.json
    payload = {
        "trace": args.trace,
        "files": [json_path, *figures],
        "total_accesses": overall.total_accesses,
        "address_entropy_bits": overall.address_entropy_bits,
        "reuse_distance_quantiles": overall.reuse_distance_quantiles,
        "partition_ok": partitions["ok"],
        "n_violations": partitions["n_violations"],
    }
    human = "\n".join([
        f"{overall.total_accesses} accesses, entropy "
        f"{overall.address_entropy_bits:.2f} bits",
        f"partition check: {'ok' if partitions['ok'] else 'VIOLATIONS'} "
        f"({partitions['n_violations']} violations)",
        *(f"wrote {p}" for p in payload["files"]),
    ])
    _emit(payload, args.json, human)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cnhaven",
        description="Memory-hard proof-of-work tools: hashing, mining, "
                    "pipeline simulation, and trace analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hash", help="hash a hex blob")
    p.add_argument("blob_hex")
    p.add_argument("--nonce", type=int, default=0)
    p.add_argument("--nonce-offset", type=int, default=39)
    p.add_argument("--trace", metavar="PATH",
                   help="write the memory access trace to PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_hash)

    p = sub.add_parser("mine", help="search a nonce range for a share")
    p.add_argument("--job", required=True, metavar="PATH",
                   help="JSON job file, or - for stdin")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--strict-target", action="store_true",
                   help="use the full 256-bit target rule")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_mine)

    p = sub.add_parser("verify", help="recompute a golden corpus")
    p.add_argument("--corpus", default="corpus/golden.jsonl")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("simulate", help="run the pipeline model once")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--hashes", type=int, default=64)
    p.add_argument("--config", metavar="PATH", help="JSON PipelineConfig fields")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep pipeline depths, write CSV and figures")
    p.add_argument("--depths", default="1,2,4,8,16,32,64,128")
    p.add_argument("--hashes", type=int, default=64)
    p.add_argument("--config", metavar="PATH", help="JSON PipelineConfig fields")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="sweep_out", metavar="DIR")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("analyze", help="summarize a trace, write JSON and figures")
    p.add_argument("trace", metavar="TRACE")
    p.add_argument("--out", default="analysis_out", metavar="DIR")
    p.add_argument("--depth", type=int, default=128,
                   help="pipeline depth for the partition check")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_analyze)

    return parser


def main(argv: list | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.json:
            print(json.dumps({"error": str(exc), "exit_code": exc.code}))
        return exc.code
    except CnHavenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.json:
            print(json.dumps({"error": str(exc), "exit_code": EXIT_BAD_INPUT}))
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
