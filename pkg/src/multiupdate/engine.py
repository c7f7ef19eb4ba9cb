"""The repeated-update engine and the norm-bound audit.

One instance is processed by up to m predict/update cycles on the same
(x, y) — with m=1 this reduces bit-for-bit to the classic
predict-once/update-once protocol. A mistake is judged from the first
cycle's prediction (default) or fractionally over all cycles; updates are
counted over all cycles either way.

Every processed instance leaves enough in the trace to verify, after the
fact, that the final state norm obeys

    ||w*|| <= ||w0|| + sqrt(M) * (sum_j ||delta_j||^2)^(1/2)

where w0/w* are the audited state vector before/after the instance's cycles
and the delta_j are the per-cycle changes of that same vector. The
inequality is Cauchy-Schwarz on the telescoped updates, so it must hold on
every engine-produced trace; the audit exists to catch accounting bugs, not
to test the math.
"""
from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

from .binary import BinaryLearner, make_binary
from .core import SparseVector, UpdateInfo
from .errors import DataError
from .multiclass import MulticlassLearner, make_multiclass
from .params import HyperParams


class CountingMode(enum.Enum):
    """How inner-cycle predictions turn into the mistake statistic."""

    FIRST_PREDICTION = "first"
    PER_ITERATION = "periter"


@dataclass(frozen=True)
class LoopConfig:
    """Inner-loop shape: m cycles per instance, counting mode, early exit."""

    m: int = 1
    counting_mode: CountingMode = CountingMode.FIRST_PREDICTION
    stop_early: bool = True

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")


@dataclass
class InstanceOutcome:
    mistake: bool                      # first-cycle misprediction
    updates: int                       # triggered cycles, in [0, m]
    deltas: list[UpdateInfo]
    w_star_norm: float                 # audited-vector norm after the instance
    cycle_mispredictions: int = 0      # for per-iteration counting
    cycles: int = 0                    # cycles actually executed


@dataclass
class Trace:
    initial_norms: list[float] = field(default_factory=list)
    outcomes: list[InstanceOutcome] = field(default_factory=list)

    def append(self, w0: float, outcome: InstanceOutcome) -> None:
        self.initial_norms.append(w0)
        self.outcomes.append(outcome)

    def __len__(self):
        return len(self.outcomes)


@dataclass
class RunStats:
    mistake_rate: float
    updates: float
    cpu_seconds: float


Learner = BinaryLearner | MulticlassLearner


def _mispredicted(learner: Learner, info: UpdateInfo) -> bool:
    return info.mispredicted


def process_instance(learner: Learner, x: SparseVector, y: int,
                     cfg: LoopConfig) -> InstanceOutcome:
    """Run up to cfg.m predict/update cycles on one (x, y).

    The learner's outer clock is advanced here, once, regardless of how many
    cycles run. With stop_early the loop exits after the first untriggered
    cycle: the learners are deterministic, so every further cycle would
    repeat the same prediction and stay passive.
    """
    learner.begin_instance()
    deltas: list[UpdateInfo] = []
    updates = 0
    cycle_mistakes = 0
    first_mistake = False
    for k in range(cfg.m):
        info = learner.step(x, y)
        deltas.append(info)
        if k == 0:
            first_mistake = info.mispredicted
        if info.mispredicted:
            cycle_mistakes += 1
        if info.triggered:
            updates += 1
        elif cfg.stop_early:
            # The skipped cycles are provably no-ops (deterministic learner,
            # unchanged state), so they would each repeat this cycle's
            # prediction; credit those repeats so early exit never changes
            # the per-iteration mistake statistic.
            if info.mispredicted:
                cycle_mistakes += cfg.m - (k + 1)
            break
    return InstanceOutcome(
        mistake=first_mistake,
        updates=updates,
        deltas=deltas,
        w_star_norm=learner.primary_norm(),
        cycle_mispredictions=cycle_mistakes,
        cycles=len(deltas),
    )


def run_sequence(kind: str, hp: HyperParams, instances: Sequence[tuple[SparseVector, int]],
                 d: int, cfg: LoopConfig, num_classes: int | None = None,
                 ) -> tuple[Learner, Trace, RunStats]:
    """Process an ordered instance sequence from a zero-initialized learner.

    cpu_seconds covers exactly the loop below — thread CPU time, so
    harness-level parallelism does not distort it.
    """
    if not instances:
        raise DataError("cannot run on an empty dataset")
    if num_classes is None:
        learner: Learner = make_binary(kind, d, hp)
    else:
        learner = make_multiclass(kind, num_classes, d, hp)
    trace = Trace()
    mistakes = 0.0
    updates = 0
    started = time.thread_time()
    for x, y in instances:
        w0 = learner.primary_norm()
        outcome = process_instance(learner, x, y, cfg)
        trace.append(w0, outcome)
        updates += outcome.updates
        if cfg.counting_mode is CountingMode.PER_ITERATION:
            mistakes += outcome.cycle_mispredictions / cfg.m
        else:
            mistakes += 1.0 if outcome.mistake else 0.0
    cpu = time.thread_time() - started
    stats = RunStats(mistake_rate=mistakes / len(instances),
                     updates=float(updates), cpu_seconds=cpu)
    return learner, trace, stats


@dataclass
class InstanceBound:
    index: int
    lhs: float        # ||w*||
    rhs: float        # ||w0|| + sqrt(M) * sqrt(sum ||delta||^2)
    slack: float      # rhs - lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + 1e-9 * (1.0 + self.rhs)


@dataclass
class BoundReport:
    instances: list[InstanceBound]

    @property
    def all_passed(self) -> bool:
        return all(b.passed for b in self.instances)

    @property
    def failures(self) -> list[InstanceBound]:
        return [b for b in self.instances if not b.passed]

    @property
    def min_slack(self) -> float:
        return min((b.slack for b in self.instances), default=0.0)


def check_norm_bound(trace: Trace, m: int) -> BoundReport:
    """Verify the accumulated-update norm bound on every traced instance.

    For instance i with pre-instance norm ||w0||, per-cycle squared deltas
    and post-instance norm ||w*||, checks
    ||w*|| <= ||w0|| + sqrt(M) * (sum_j ||delta_j||^2)^(1/2) with
    tolerance 1e-9 * (1 + rhs). M is the configured cycle cap (M >= the
    realized update count by construction).
    """
    if len(trace.initial_norms) != len(trace.outcomes):
        raise ValueError("trace is missing per-instance records")
    results = []
    root_m = math.sqrt(m)
    for i, (w0, outcome) in enumerate(zip(trace.initial_norms, trace.outcomes)):
        if outcome.deltas is None:
            raise ValueError(f"instance {i} has no delta records")
        total_sq = sum(d.delta_sq_norm for d in outcome.deltas)
        rhs = w0 + root_m * math.sqrt(total_sq)
        results.append(InstanceBound(index=i, lhs=outcome.w_star_norm,
                                     rhs=rhs, slack=rhs - outcome.w_star_norm))
    return BoundReport(instances=results)


def trace_records(trace: Trace, **meta) -> list[dict]:
    """Per-instance trace rows for line-delimited export.

    Consecutive rows chain: instance i's initial norm equals instance i-1's
    w_star_norm (the state carries over), but both ends are included so each
    row can be audited standalone.
    """
    rows = []
    for i, (w0, o) in enumerate(zip(trace.initial_norms, trace.outcomes)):
        row = dict(meta)
        row.update(
            instance=i,
            mistake=bool(o.mistake),
            updates=o.updates,
            sum_delta_sq=sum(d.delta_sq_norm for d in o.deltas),
            w_star_norm=o.w_star_norm,
            w0_norm=w0,
        )
        rows.append(row)
    return rows


def write_trace(fh, trace: Trace, **meta) -> None:
    """Write one JSON object per line for offline bound auditing."""
    for row in trace_records(trace, **meta):
        fh.write(json.dumps(row, separators=(",", ":")) + "\n")
