"""Figure rendering for the report-producing CLI paths.

Every function takes already-computed report objects, writes PNGs into a
directory, and returns the paths. Rendering is headless (Agg); nothing
here ever opens a window.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .pipeline_sim import STAGE_NAMES, SimReport


def _save(fig, out_dir: str, name: str) -> str:
    path = os.path.join(out_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_sweep_figures(results: list, out_dir: str) -> list:
    """Throughput and per-stage utilization against pipeline depth."""
    os.makedirs(out_dir, exist_ok=True)
    reports = [r for r in results
               if isinstance(r, SimReport) and r.config is not None]
    if not reports:
        return []
    reports = sorted(reports, key=lambda r: r.config["pipeline_depth"])
    depths = [r.config["pipeline_depth"] for r in reports]
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(depths, [r.hash_rate_hs for r in reports], marker="o")
    ax.set_xlabel("pipeline depth (in-flight hashes)")
    ax.set_ylabel("hash rate (H/s)")
    ax.set_xscale("log", base=2)
    ax.set_title("Throughput vs pipeline depth")
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir, "hash_rate_vs_depth.png"))

    fig, ax = plt.subplots(figsize=(6, 4))
    for stage in STAGE_NAMES:
        ax.plot(depths, [r.stage_utilization[stage] for r in reports],
                marker=".", label=stage)
    ax.set_xlabel("pipeline depth (in-flight hashes)")
    ax.set_ylabel("stage utilization")
    ax.set_xscale("log", base=2)
    ax.set_ylim(0, 1.05)
    ax.set_title("Stage utilization vs pipeline depth")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir, "stage_utilization_vs_depth.png"))
    return paths


def save_trace_figures(overall, per_stage: dict, out_dir: str) -> list:
    """Stride histogram, sequential-run lengths, and per-stage access mix."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    top = sorted(overall.stride_histogram.items(),
                 key=lambda kv: kv[1], reverse=True)[:30]
    top.sort(key=lambda kv: kv[0])
    if top:
        fig, ax = plt.subplots(figsize=(7, 4))
        labels = [str(stride) for stride, _ in top]
        ax.bar(range(len(top)), [count for _, count in top])
        ax.set_xticks(range(len(top)))
        ax.set_xticklabels(labels, rotation=60, fontsize=7)
        ax.set_yscale("log")
        ax.set_xlabel("stride (bytes, 30 most frequent)")
        ax.set_ylabel("count")
        ax.set_title("Access stride histogram")
        paths.append(_save(fig, out_dir, "stride_histogram.png"))

    runs = sorted(overall.sequential_run_lengths.items())
    if runs:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.bar([str(length) for length, _ in runs], [count for _, count in runs])
        ax.set_yscale("log")
        ax.set_xlabel("maximal +16-stride run length (accesses)")
        ax.set_ylabel("count")
        ax.set_title("Sequential run lengths")
        ax.tick_params(axis="x", labelsize=7)
        paths.append(_save(fig, out_dir, "run_lengths.png"))

    stages = list(per_stage)
    if stages:
        fig, ax = plt.subplots(figsize=(6, 4))
        width = 0.4
        xs = range(len(stages))
        reads = [sum(per_stage[s].reads.values()) for s in stages]
        writes = [sum(per_stage[s].writes.values()) for s in stages]
        ax.bar([x - width / 2 for x in xs], reads, width, label="reads")
        ax.bar([x + width / 2 for x in xs], writes, width, label="writes")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(stages)
        ax.set_ylabel("accesses")
        ax.set_title("Access mix by stage")
        ax.legend()
        paths.append(_save(fig, out_dir, "stage_mix.png"))
    return paths
