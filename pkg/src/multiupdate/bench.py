"""Benchmark harness: algorithms x m over seeded permutation runs.

Protocol: R runs per cell, run r processing the dataset in the order given
by permutation(n, base_seed + r). The permutations are computed once and
shared by every (algorithm, m) cell so columns stay comparable. Cells
aggregate mistake rate, update count, and per-run thread-CPU seconds as
mean +/- sample std (n-1 denominator; 0 when R = 1).

Runs may execute in parallel (BENCH_THREADS / the threads argument) — each
run owns its learner and the aggregation is by run index, so parallel and
serial invocations emit identical numbers; cpu_seconds is thread time and
does not see the scheduling.
"""
from __future__ import annotations

import hashlib
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .binary import BINARY_KINDS
from .data import BINARY_SPACE, Dataset, as_learning_instances, permute
from .engine import CountingMode, LoopConfig, RunStats, check_norm_bound, run_sequence, trace_records
from .errors import ConfigError
from .multiclass import MULTICLASS_KINDS
from .params import HyperParams

log = logging.getLogger(__name__)

METRICS = ("mistake_rate", "updates", "cpu_seconds")
# Byte-identical CSV output is part of the contract, so the CSV view carries
# only the deterministic metrics; timings live in the table view.
CSV_METRICS = ("mistake_rate", "updates")


def resolve_algorithms(spec: str | list[str], label_space: str) -> list[str]:
    """Expand an --algos value ('all' or comma list) against the label space."""
    catalog = BINARY_KINDS if label_space == BINARY_SPACE else MULTICLASS_KINDS
    other = MULTICLASS_KINDS if label_space == BINARY_SPACE else BINARY_KINDS
    if isinstance(spec, str):
        names = [a.strip() for a in spec.split(",") if a.strip()] if spec != "all" else list(catalog)
    else:
        names = list(spec)
    if not names:
        raise ConfigError("no algorithms requested")
    for name in names:
        if name in catalog:
            continue
        if name in other:
            raise ConfigError(
                f"algorithm {name!r} does not match the dataset's {label_space} label space"
            )
        raise ConfigError(f"unknown algorithm {name!r} (valid for {label_space}: {list(catalog)})")
    return names


@dataclass
class CellSummary:
    algorithm: str
    m: int
    mean: dict[str, float]
    std: dict[str, float]


@dataclass
class AuditFailure:
    algorithm: str
    m: int
    run: int
    instance: int
    lhs: float
    rhs: float


@dataclass
class BenchmarkResult:
    dataset_name: str
    n: int
    d: int
    num_classes: int
    runs: int
    base_seed: int
    counting_mode: CountingMode
    cells: list[CellSummary] = field(default_factory=list)
    audited_instances: int = 0
    audit_min_slack: float = math.inf
    audit_failures: list[AuditFailure] = field(default_factory=list)
    permutation_fingerprints: list[str] = field(default_factory=list)

    @property
    def audit_passed(self) -> bool:
        return not self.audit_failures


def _mean_std(values: list[float]) -> tuple[float, float]:
    r = len(values)
    mean = sum(values) / r
    if r == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (r - 1)
    return mean, math.sqrt(var)


def _fingerprint(perm: list[int]) -> str:
    h = hashlib.sha1()
    for i in perm:
        h.update(i.to_bytes(8, "little"))
    return h.hexdigest()[:12]


# Worker context for process-pool runs: populated in the parent before the
# pool forks, inherited read-only by the children, so per-task pickling stays
# tiny (kind, m, run index).
_CTX: dict = {}


def _run_one(kind: str, m: int, run_index: int):
    sequences = _CTX["sequences"]
    cfg = LoopConfig(m=m, counting_mode=_CTX["counting_mode"], stop_early=_CTX["stop_early"])
    _, trace, stats = run_sequence(
        kind, _CTX["hp"], sequences[run_index], _CTX["d"], cfg,
        num_classes=_CTX["num_classes"],
    )
    audit_summary = None
    if _CTX["audit"]:
        report = check_norm_bound(trace, m)
        audit_summary = (
            len(report.instances),
            report.min_slack,
            [(b.index, b.lhs, b.rhs) for b in report.failures],
        )
    rows = None
    if _CTX["want_trace"]:
        rows = trace_records(trace, algorithm=kind, m=m, run=run_index)
    return stats, audit_summary, rows


def run_benchmark(dataset: Dataset, algorithms: list[str], m_values: list[int],
                  runs: int, base_seed: int, *,
                  counting_mode: CountingMode = CountingMode.FIRST_PREDICTION,
                  stop_early: bool = True,
                  hp: HyperParams | None = None,
                  threads: int | None = None,
                  audit: bool = False,
                  trace_fh=None) -> BenchmarkResult:
    """Run the full sweep; cells appear in algorithm order, then ascending m."""
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    if not m_values:
        raise ConfigError("at least one m value is required")
    for m in m_values:
        if m < 1:
            raise ConfigError(f"m values must be >= 1, got {m}")
    hp = hp or HyperParams()
    algorithms = resolve_algorithms(algorithms, dataset.label_space)

    instances = as_learning_instances(dataset)
    n = len(instances)
    num_classes = dataset.num_classes if dataset.label_space != BINARY_SPACE else None

    perms = [permute(n, base_seed + r) for r in range(runs)]
    fingerprints = [_fingerprint(p) for p in perms]
    for r, fp in enumerate(fingerprints):
        log.debug("run %d permutation fingerprint %s (shared across all cells)", r, fp)
    sequences = [[instances[i] for i in perm] for perm in perms]

    if threads is None:
        threads = int(os.environ.get("BENCH_THREADS", "1"))
    threads = max(1, min(threads, runs))

    _CTX.update(
        sequences=sequences, d=dataset.d, num_classes=num_classes, hp=hp,
        counting_mode=counting_mode, stop_early=stop_early,
        audit=audit, want_trace=trace_fh is not None,
    )
    result = BenchmarkResult(
        dataset_name=dataset.name or "dataset", n=n, d=dataset.d,
        num_classes=dataset.num_classes, runs=runs, base_seed=base_seed,
        counting_mode=counting_mode, permutation_fingerprints=fingerprints,
    )

    pool = None
    try:
        if threads > 1:
            import multiprocessing
            pool = ProcessPoolExecutor(max_workers=threads,
                                       mp_context=multiprocessing.get_context("fork"))
        for kind in algorithms:
            for m in sorted(set(m_values)):
                if pool is not None:
                    outputs = list(pool.map(_run_one, [kind] * runs, [m] * runs, range(runs)))
                else:
                    outputs = [_run_one(kind, m, r) for r in range(runs)]
                per_run: list[RunStats] = [o[0] for o in outputs]
                cell = CellSummary(algorithm=kind, m=m, mean={}, std={})
                for metric in METRICS:
                    mean, std = _mean_std([getattr(s, metric) for s in per_run])
                    cell.mean[metric] = mean
                    cell.std[metric] = std
                result.cells.append(cell)
                for r, (_, audit_summary, rows) in enumerate(outputs):
                    if audit_summary is not None:
                        checked, min_slack, failures = audit_summary
                        result.audited_instances += checked
                        result.audit_min_slack = min(result.audit_min_slack, min_slack)
                        for idx, lhs, rhs in failures:
                            result.audit_failures.append(
                                AuditFailure(kind, m, r, idx, lhs, rhs))
                    if rows is not None:
                        import json
                        for row in rows:
                            trace_fh.write(json.dumps(row, separators=(",", ":")) + "\n")
    finally:
        if pool is not None:
            pool.shutdown()
        _CTX.clear()
    return result


_TABLE_LABELS = {"mistake_rate": "Mistake Rate", "updates": "NB of Updates",
                 "cpu_seconds": "Cpu Time"}


def _cell_text(metric: str, mean: float, std: float) -> str:
    digits = 4 if metric == "mistake_rate" else 2
    return f"{mean:.{digits}f} +/- {std:.{digits}f}"


def emit(result: BenchmarkResult, fmt: str) -> str:
    """Render a result as an aligned table or as CSV text."""
    if fmt == "csv":
        lines = ["algorithm,m,metric,mean,std"]
        for cell in result.cells:
            for metric in CSV_METRICS:
                lines.append(f"{cell.algorithm},{cell.m},{metric},"
                             f"{cell.mean[metric]!r},{cell.std[metric]!r}")
        return "\n".join(lines) + "\n"
    if fmt != "table":
        raise ConfigError(f"unknown output format {fmt!r} (expected table or csv)")

    m_values = sorted({c.m for c in result.cells})
    algorithms = list(dict.fromkeys(c.algorithm for c in result.cells))
    by_key = {(c.algorithm, c.m): c for c in result.cells}
    header = (f"Dataset: {result.dataset_name} (n={result.n}, d={result.d}, "
              f"classes={result.num_classes})   runs: {result.runs}   "
              f"seed: {result.base_seed}   mode: {result.counting_mode.value}")
    algo_w = max(len("Algorithm"), max(len(a) for a in algorithms))
    metric_w = max(len(v) for v in _TABLE_LABELS.values())
    col_w = {}
    for m in m_values:
        cells = [_cell_text(metric, by_key[(a, m)].mean[metric], by_key[(a, m)].std[metric])
                 for a in algorithms for metric in METRICS]
        col_w[m] = max(len(f"m={m}"), max(len(c) for c in cells))
    lines = [header]
    head = f"{'Algorithm':<{algo_w}}  {'Metric':<{metric_w}}"
    for m in m_values:
        head += f"  {f'm={m}':<{col_w[m]}}"
    lines.append(head)
    lines.append("-" * len(head))
    for a in algorithms:
        for j, metric in enumerate(METRICS):
            row = f"{a if j == 0 else '':<{algo_w}}  {_TABLE_LABELS[metric]:<{metric_w}}"
            for m in m_values:
                cell = by_key[(a, m)]
                row += f"  {_cell_text(metric, cell.mean[metric], cell.std[metric]):<{col_w[m]}}"
            lines.append(row.rstrip())
        lines.append("-" * len(head))
    return "\n".join(lines) + "\n"
