"""Local computation reuse on one satellite, plus the cost and status models.

The per-subtask flow: preprocess the input, probe the reuse table's LSH index
for the nearest prior input of the same task type, gate the match on
structural similarity, and either serve the cached output (paying only the
lookup cost) or run the processor and cache a fresh record. A satellite's
first two subtasks skip the lookup entirely (the table is too empty for a
meaningful probe) but still cache their results.

The reuse-status score combines reuse rate with CPU occupancy, where
occupancy measures time spent in from-scratch processing: a satellite that
mostly serves lookups scores high and is a good collaboration source.
"""

from __future__ import annotations

import dataclasses
from collections import deque
from typing import Callable, Iterable, Literal, Optional

from .domain import GridPosition, InputData, OutputData, ReuseRecord, TaskType
from .errors import TaskFailedError
from .scrt import Scrt
from .similarity import SsimConstants, preprocess, ssim

# Subtasks before this index skip the lookup step.
LOOKUP_WARMUP_TASKS = 2


@dataclasses.dataclass
class ReuseStats:
    """Counters feeding the reuse-status score and the run report."""

    tasks_total: int = 0
    tasks_reused: int = 0
    busy_s: float = 0.0  # accumulated from-scratch compute seconds
    elapsed_s: float = 0.0

    def reuse_rate(self) -> float:
        return self.tasks_reused / max(self.tasks_total, 1)


def srs(stats: ReuseStats, beta: float) -> float:
    """Reuse-status score: beta*reuse_rate + (1-beta)*(1 - occupancy)."""
    rr = stats.reuse_rate()
    c = stats.busy_s / max(stats.elapsed_s, 1e-12)
    c = min(max(c, 0.0), 1.0)
    return beta * rr + (1.0 - beta) * (1.0 - c)


def scratch_cost_s(f_cycles: float, comp_hz: float, include_lookup: bool, w_s: float) -> float:
    """From-scratch service time: optional lookup cost plus cycles/capacity."""
    if comp_hz <= 0:
        raise ValueError("comp_hz must be strictly positive")
    return (w_s if include_lookup else 0.0) + f_cycles / comp_hz


def reuse_cost_s(w_s: float) -> float:
    """Service time when the cached output is served: the lookup cost only."""
    return w_s


@dataclasses.dataclass
class SubtaskOutcome:
    """Result of one subtask: what was returned and what it cost."""

    reused: bool
    result: OutputData
    compute_cost_s: float
    correct: bool  # only the metrics accounting reads this
    scratch_s: float = 0.0  # portion of compute_cost_s spent in the processor
    matched_id: Optional[int] = None
    match_ssim: Optional[float] = None


def task_cost_s(outcomes: Iterable[SubtaskOutcome]) -> float:
    """Total computation cost of a task's subtask sequence."""
    return sum(o.compute_cost_s for o in outcomes)


def total_cost_s(chi: float, psi: float, alpha: int) -> float:
    """Combined objective: alpha * communication cost + computation cost."""
    return alpha * psi + chi


@dataclasses.dataclass
class ReuseParams:
    """Knobs the per-subtask step needs from the run configuration."""

    th_sim: float
    lookup_cost_s: float
    comp_hz: float
    cycles_per_mb: float
    preprocess_dims: tuple[int, int]
    beta: float = 0.5
    srs_occupancy: Literal["task_window", "windowed", "cumulative"] = "task_window"
    occupancy_window_tasks: int = 10
    occupancy_window_s: float = 30.0
    ssim_constants: SsimConstants = SsimConstants()


class SatelliteState:
    """Everything one satellite carries through a run."""

    def __init__(self, position: GridPosition, scrt: Optional[Scrt]):
        self.position = position
        self.scrt = scrt
        self.stats = ReuseStats()
        self.correct_reuses = 0
        self.srs = 0.0
        self.subtask_index = 0
        self.queue: deque = deque()
        self.busy = False
        self.floor_s = 0.0  # earliest next task start (raised by broadcasts)
        self.last_attempt_task: Optional[int] = None  # cooldown bookkeeping
        self.last_completion_s = 0.0
        self._scratch_intervals: deque[tuple[float, float]] = deque()
        self._recent_scratch: deque[bool] = deque()

    def record_scratch(self, start_s: float, end_s: float) -> None:
        if end_s > start_s:
            self._scratch_intervals.append((start_s, end_s))

    def window_busy_s(self, now_s: float, window_s: float) -> float:
        """Scratch-busy seconds inside [now - window, now]."""
        lo = now_s - window_s
        while self._scratch_intervals and self._scratch_intervals[0][1] <= lo:
            self._scratch_intervals.popleft()
        busy = 0.0
        for start, end in self._scratch_intervals:
            if start >= now_s:
                break
            busy += min(end, now_s) - max(start, lo)
        return max(busy, 0.0)

    def stats_snapshot(self, now_s: float,
                       mode: Literal["task_window", "windowed", "cumulative"],
                       window_s: float, window_tasks: int = 10) -> ReuseStats:
        """Stats view used for scoring at ``now_s`` under the configured mode.

        ``task_window`` reads occupancy as reliance on from-scratch
        processing: busy/elapsed are task counts (scratch over total) across
        the last ``window_tasks`` completed subtasks. The two time modes
        divide scratch-busy seconds by wall time, windowed or whole-run.
        """
        if mode == "task_window":
            recent = list(self._recent_scratch)[-window_tasks:]
            return ReuseStats(
                tasks_total=self.stats.tasks_total,
                tasks_reused=self.stats.tasks_reused,
                busy_s=float(sum(recent)) if recent else 1.0,
                elapsed_s=float(len(recent)) if recent else 1.0,
            )
        if mode == "cumulative":
            return ReuseStats(
                tasks_total=self.stats.tasks_total,
                tasks_reused=self.stats.tasks_reused,
                busy_s=self.stats.busy_s,
                elapsed_s=now_s,
            )
        span = min(now_s, window_s)
        return ReuseStats(
            tasks_total=self.stats.tasks_total,
            tasks_reused=self.stats.tasks_reused,
            busy_s=self.window_busy_s(now_s, window_s),
            elapsed_s=span,
        )


Processor = Callable[[InputData, TaskType], OutputData]


def process_subtask(sat: SatelliteState, d: InputData, p: TaskType,
                    oracle: Processor, params: ReuseParams,
                    start_s: float) -> SubtaskOutcome:
    """Run one subtask through the local-reuse flow, mutating the satellite.

    Returns the outcome; the caller owns scheduling (the subtask occupies the
    satellite for ``compute_cost_s`` seconds starting at ``start_s``).
    """
    if sat.scrt is None:
        raise ValueError("satellite has no reuse table; use process_without_reuse")
    do_lookup = sat.subtask_index >= LOOKUP_WARMUP_TASKS
    pre = preprocess(d, params.preprocess_dims)
    f_cycles = params.cycles_per_mb * d.raw_bytes_size

    match = sat.scrt.find_nearest(p.id, pre.vector) if do_lookup else None
    outcome: SubtaskOutcome
    if match is not None:
        match_id, record = match
        score = ssim(pre, record.preprocessed, params.ssim_constants)
        if score > params.th_sim:
            sat.scrt.bump_reuse(match_id)
            result = record.output
            outcome = SubtaskOutcome(
                reused=True,
                result=result,
                compute_cost_s=reuse_cost_s(params.lookup_cost_s),
                correct=result.label == d.hidden_label,
                scratch_s=0.0,
                matched_id=match_id,
                match_ssim=score,
            )
        else:
            outcome = _compute_and_cache(sat, d, p, pre, oracle, params,
                                         f_cycles, do_lookup, start_s)
            outcome.matched_id = match_id
            outcome.match_ssim = score
    else:
        outcome = _compute_and_cache(sat, d, p, pre, oracle, params,
                                     f_cycles, do_lookup, start_s)

    _finish(sat, outcome, start_s, params)
    return outcome


def process_without_reuse(sat: SatelliteState, d: InputData, p: TaskType,
                          oracle: Processor, params: ReuseParams,
                          start_s: float) -> SubtaskOutcome:
    """Plain from-scratch processing: no table, no lookup cost."""
    result = _run_oracle(oracle, d, p)
    scratch = params.cycles_per_mb * d.raw_bytes_size / params.comp_hz
    outcome = SubtaskOutcome(
        reused=False,
        result=result,
        compute_cost_s=scratch,
        correct=result.label == d.hidden_label,
        scratch_s=scratch,
    )
    _finish(sat, outcome, start_s, params)
    return outcome


def _run_oracle(oracle: Processor, d: InputData, p: TaskType) -> OutputData:
    try:
        return oracle(d, p)
    except Exception as exc:  # surfaced uniformly to the engine
        raise TaskFailedError(str(exc)) from exc


def _compute_and_cache(sat: SatelliteState, d: InputData, p: TaskType, pre,
                       oracle: Processor, params: ReuseParams,
                       f_cycles: float, do_lookup: bool,
                       start_s: float) -> SubtaskOutcome:
    result = _run_oracle(oracle, d, p)
    cost = scratch_cost_s(f_cycles, params.comp_hz, do_lookup, params.lookup_cost_s)
    scratch = f_cycles / params.comp_hz
    record = ReuseRecord(
        input=d, preprocessed=pre, task_type=p, output=result,
        reuse_count=0, inserted_at=start_s + cost,
    )
    sat.scrt.insert_record(record)
    return SubtaskOutcome(
        reused=False,
        result=result,
        compute_cost_s=cost,
        correct=result.label == d.hidden_label,
        scratch_s=scratch,
    )


def _finish(sat: SatelliteState, outcome: SubtaskOutcome, start_s: float,
            params: ReuseParams) -> None:
    end_s = start_s + outcome.compute_cost_s
    sat.stats.tasks_total += 1
    if outcome.reused:
        sat.stats.tasks_reused += 1
        if outcome.correct:
            sat.correct_reuses += 1
    if outcome.scratch_s > 0.0:
        sat.stats.busy_s += outcome.scratch_s
        sat.record_scratch(end_s - outcome.scratch_s, end_s)
    sat._recent_scratch.append(not outcome.reused)
    sat.stats.elapsed_s = end_s
    sat.subtask_index += 1
    refresh_srs(sat, params, end_s)


def refresh_srs(sat: SatelliteState, params: ReuseParams, now_s: float) -> float:
    """Recompute and cache the satellite's reuse-status score at ``now_s``."""
    snapshot = sat.stats_snapshot(now_s, params.srs_occupancy,
                                  params.occupancy_window_s,
                                  params.occupancy_window_tasks)
    sat.srs = srs(snapshot, params.beta)
    return sat.srs
