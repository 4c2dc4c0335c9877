"""Deterministic discrete-event simulation core.

One global event clock drives per-satellite FIFO queues. Events at equal
times process in a fixed order (arrivals, completions, collaboration
triggers, broadcast deliveries, then internal wake-ups), each tier in
satellite row-major order, so identical configurations replay to identical
event logs byte for byte.

Scenario semantics:

* ``without_cr``  - every subtask runs from scratch; no table, no lookups.
* ``slcr``        - local reuse only.
* ``sccr_init``   - local reuse plus collaboration without area expansion.
* ``sccr``        - local reuse plus full collaboration.
* ``srs_priority``- collaboration elects the network-wide best source and
                    broadcasts to the whole grid.

Broadcast latency delays each receiver's next task start by its own transfer
time; it occupies the link, never the CPU.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import heapq
import itertools
import json
from typing import Any, Optional

from . import collab, reuse
from .domain import GridPosition, ScenarioConfig, grid_positions, validate_config
from .scrt import Scrt
from .workload import Task, build_oracle, generate

_COLLABORATIVE = {"sccr", "sccr_init", "srs_priority"}

# Seed-stream tag for per-satellite hash geometry.
_LSH_TAG = 7


class EventKind(enum.IntEnum):
    TASK_ARRIVAL = 0
    TASK_COMPLETE = 1
    SCCR_TRIGGER = 2
    BROADCAST_DELIVERED = 3
    WAKE = 4  # internal scheduling tick, never logged

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclasses.dataclass
class EventLogEntry:
    time_s: float
    kind: str
    satellite: Optional[tuple[int, int]]
    payload: dict

    def digest(self) -> str:
        canon = json.dumps(self.payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def line(self) -> str:
        sat = f"{self.satellite[0]},{self.satellite[1]}" if self.satellite else "-"
        return f"{self.time_s:.9f}\t{self.kind}\t{sat}\t{self.digest()}"

    def to_dict(self) -> dict:
        return {
            "time_s": self.time_s,
            "kind": self.kind,
            "satellite": list(self.satellite) if self.satellite else None,
            "payload": self.payload,
        }


@dataclasses.dataclass
class RunReport:
    """Everything one run produces: headline metrics, breakdowns, event log."""

    scenario: str
    n: int
    seed: int
    completion_time_s: float
    reuse_rate: float
    cpu_occupancy: float
    reuse_accuracy: float
    data_transfer_mb: float
    psi_total_s: float
    chi_total_s: float
    total_cost_s: float
    per_satellite: list[dict]
    collab_events: list[dict]
    events: list[EventLogEntry]
    config: dict

    def metrics_row(self) -> dict:
        return {
            "scenario": self.scenario,
            "n": self.n,
            "seed": self.seed,
            "completion_time_s": self.completion_time_s,
            "reuse_rate": self.reuse_rate,
            "cpu_occupancy": self.cpu_occupancy,
            "reuse_accuracy": self.reuse_accuracy,
            "data_transfer_mb": self.data_transfer_mb,
            "total_cost_s": self.total_cost_s,
        }

    def event_lines(self) -> list[str]:
        return [e.line() for e in self.events]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["events"] = [e.to_dict() for e in self.events]
        return d


class _Simulation:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.n = cfg.n
        self.positions = grid_positions(cfg.n)
        self.order = {pos: i for i, pos in enumerate(self.positions)}
        width, height = cfg.preprocess_dims
        self.params = reuse.ReuseParams(
            th_sim=cfg.th_sim,
            lookup_cost_s=cfg.lookup_cost_s,
            comp_hz=cfg.comp_hz,
            cycles_per_mb=cfg.cycles_per_mb,
            preprocess_dims=cfg.preprocess_dims,
            beta=cfg.beta,
            srs_occupancy=cfg.srs_occupancy,
            occupancy_window_tasks=cfg.occupancy_window_tasks,
            occupancy_window_s=cfg.occupancy_window_s,
        )
        self.sats: dict[GridPosition, reuse.SatelliteState] = {}
        for pos in self.positions:
            table = None
            if cfg.scenario != "without_cr":
                table = Scrt(
                    capacity_mb=cfg.storage_mb,
                    dim=width * height,
                    num_tables=cfg.lsh_tables,
                    num_functions=cfg.lsh_functions,
                    seed_entropy=(cfg.seed, _LSH_TAG, pos.row, pos.col),
                )
            self.sats[pos] = reuse.SatelliteState(pos, table)

        self.heap: list[tuple[float, int, int, int, Any]] = []
        self.seq = itertools.count()
        self.log: list[EventLogEntry] = []
        self.outcomes: list[reuse.SubtaskOutcome] = []
        self.collab_events: list[dict] = []
        self.psi_total = 0.0
        self.mb_total = 0.0
        self.completed = 0

    def schedule(self, time_s: float, kind: EventKind, pos: GridPosition, payload: Any) -> None:
        heapq.heappush(self.heap, (time_s, int(kind), self.order[pos], next(self.seq), payload))

    def log_event(self, time_s: float, kind: EventKind, pos: Optional[GridPosition],
                  payload: dict) -> None:
        sat = (pos.row, pos.col) if pos is not None else None
        self.log.append(EventLogEntry(time_s, kind.label, sat, payload))

    # -- scoring ------------------------------------------------------------

    def srs_at(self, pos: GridPosition, now_s: float) -> float:
        sat = self.sats[pos]
        snapshot = sat.stats_snapshot(now_s, self.cfg.srs_occupancy,
                                      self.cfg.occupancy_window_s,
                                      self.cfg.occupancy_window_tasks)
        return reuse.srs(snapshot, self.cfg.beta)

    # -- event handlers -----------------------------------------------------

    def on_arrival(self, now_s: float, pos: GridPosition, task: Task) -> None:
        self.log_event(now_s, EventKind.TASK_ARRIVAL, pos,
                       {"seq": task.seq, "mb": task.input.raw_bytes_size})
        self.sats[pos].queue.append(task)
        self.schedule(now_s, EventKind.WAKE, pos, None)

    def on_wake(self, now_s: float, pos: GridPosition) -> None:
        sat = self.sats[pos]
        if sat.busy or not sat.queue:
            return
        start = max(now_s, sat.floor_s)
        if start > now_s:
            self.schedule(start, EventKind.WAKE, pos, None)
            return
        task = sat.queue.popleft()
        if self.cfg.scenario == "without_cr":
            outcome = reuse.process_without_reuse(sat, task.input, task.task_type,
                                                  self.oracle, self.params, start)
        else:
            outcome = reuse.process_subtask(sat, task.input, task.task_type,
                                            self.oracle, self.params, start)
        sat.busy = True
        self.schedule(start + outcome.compute_cost_s, EventKind.TASK_COMPLETE,
                      pos, (task, outcome))

    def on_complete(self, now_s: float, pos: GridPosition,
                    task: Task, outcome: reuse.SubtaskOutcome) -> None:
        sat = self.sats[pos]
        sat.busy = False
        sat.last_completion_s = now_s
        self.completed += 1
        self.outcomes.append(outcome)
        self.log_event(now_s, EventKind.TASK_COMPLETE, pos, {
            "seq": task.seq,
            "reused": outcome.reused,
            "label": outcome.result.label,
            "cost_s": outcome.compute_cost_s,
        })
        if self.cfg.scenario in _COLLABORATIVE:
            cooled = (sat.last_attempt_task is None or
                      sat.stats.tasks_total - sat.last_attempt_task >= self.cfg.cooldown_tasks)
            if sat.srs < self.cfg.th_co and cooled:
                sat.last_attempt_task = sat.stats.tasks_total
                self.schedule(now_s, EventKind.SCCR_TRIGGER, pos, None)
        self.schedule(now_s, EventKind.WAKE, pos, None)

    def on_trigger(self, now_s: float, pos: GridPosition) -> None:
        sat = self.sats[pos]
        if sat.srs >= self.cfg.th_co:
            return
        srs_of = lambda p: self.srs_at(p, now_s)
        scrt_of = lambda p: self.sats[p].scrt
        if self.cfg.scenario == "srs_priority":
            event, delays = collab.run_srs_priority(
                pos, self.n, srs_of=srs_of, scrt_of=scrt_of, tau=self.cfg.tau,
                channel=self.cfg.channel, now_s=now_s, torus=self.cfg.torus,
            )
        else:
            event, delays = collab.run_sccr(
                pos, self.n, srs_of=srs_of, scrt_of=scrt_of, th_co=self.cfg.th_co,
                tau=self.cfg.tau, channel=self.cfg.channel, now_s=now_s,
                expand=self.cfg.scenario == "sccr", torus=self.cfg.torus,
            )
        payload = {
            "outcome": event.outcome,
            "source": list(event.source) if event.source else None,
            "level": event.area.level,
            "records": event.records_shared,
            "psi_s": event.psi_s,
            "mb": event.mb,
        }
        self.log_event(now_s, EventKind.SCCR_TRIGGER, pos, payload)
        self.collab_events.append({
            "time_s": now_s,
            "requester": list(event.requester),
            "source": list(event.source) if event.source else None,
            "level": event.area.level,
            "area_size": len(event.area.members),
            "records_shared": event.records_shared,
            "batch_mb": event.batch_mb,
            "psi_s": event.psi_s,
            "mb": event.mb,
            "installed": event.installed,
            "skipped": event.skipped,
            "outcome": event.outcome,
        })
        if event.outcome == "helped":
            self.psi_total += event.psi_s
            self.mb_total += event.mb
            for member, delay in delays.items():
                target = self.sats[member]
                target.floor_s = max(target.floor_s, now_s + delay)
            done_at = now_s + (max(delays.values()) if delays else 0.0)
            self.schedule(done_at, EventKind.BROADCAST_DELIVERED, pos, event)

    def on_delivered(self, now_s: float, pos: GridPosition, event: collab.CollabEvent) -> None:
        self.log_event(now_s, EventKind.BROADCAST_DELIVERED, pos, {
            "requester": list(event.requester),
            "source": list(event.source) if event.source else None,
            "records": event.records_shared,
            "mb": event.mb,
        })

    # -- main loop ----------------------------------------------------------

    def run(self) -> RunReport:
        cfg = self.cfg
        tasks = generate(cfg.workload, len(self.positions))
        self.oracle = build_oracle(cfg.workload, cfg.preprocess_dims, tasks)
        total_tasks = 0
        for pos, sat_tasks in zip(self.positions, tasks):
            for task in sat_tasks:
                self.schedule(task.arrival_s, EventKind.TASK_ARRIVAL, pos, task)
                total_tasks += 1

        while self.heap:
            time_s, kind, order, _, payload = heapq.heappop(self.heap)
            pos = self.positions[order]
            kind = EventKind(kind)
            if kind is EventKind.TASK_ARRIVAL:
                self.on_arrival(time_s, pos, payload)
            elif kind is EventKind.TASK_COMPLETE:
                self.on_complete(time_s, pos, *payload)
            elif kind is EventKind.SCCR_TRIGGER:
                self.on_trigger(time_s, pos)
            elif kind is EventKind.BROADCAST_DELIVERED:
                self.on_delivered(time_s, pos, payload)
            else:
                self.on_wake(time_s, pos)

        return self.report(total_tasks)

    def report(self, total_tasks: int) -> RunReport:
        cfg = self.cfg
        completion = max((s.last_completion_s for s in self.sats.values()), default=0.0)
        reused = sum(s.stats.tasks_reused for s in self.sats.values())
        correct = sum(s.correct_reuses for s in self.sats.values())
        total = sum(s.stats.tasks_total for s in self.sats.values())
        chi = reuse.task_cost_s(self.outcomes)
        per_sat = []
        occupancies = []
        for pos in self.positions:
            s = self.sats[pos]
            occ = s.stats.busy_s / completion if completion > 0 else 0.0
            occupancies.append(occ)
            per_sat.append({
                "row": pos.row,
                "col": pos.col,
                "tasks": s.stats.tasks_total,
                "reused": s.stats.tasks_reused,
                "busy_s": s.stats.busy_s,
                "last_completion_s": s.last_completion_s,
                "occupancy": occ,
                "srs": s.srs,
            })
        return RunReport(
            scenario=cfg.scenario,
            n=cfg.n,
            seed=cfg.seed,
            completion_time_s=completion,
            reuse_rate=reused / max(total, 1),
            cpu_occupancy=sum(occupancies) / max(len(occupancies), 1),
            reuse_accuracy=(correct / reused) if reused else 1.0,
            data_transfer_mb=self.mb_total,
            psi_total_s=self.psi_total,
            chi_total_s=chi,
            total_cost_s=reuse.total_cost_s(chi, self.psi_total, cfg.alpha),
            per_satellite=per_sat,
            collab_events=self.collab_events,
            events=self.log,
            config=cfg.model_dump(mode="json"),
        )


def run(cfg: Any) -> RunReport:
    """Run one scenario to quiescence; deterministic in the config."""
    return _Simulation(validate_config(cfg)).run()


SWEEPABLE = {"tau": int, "th_co": float}


def run_sweep(cfg: Any, param: str, values: list) -> list[tuple[float, RunReport]]:
    """One run per swept value, all sharing the base seed and workload."""
    key = param.strip().lower()
    if key not in SWEEPABLE:
        raise ValueError(f"unknown sweep parameter {param!r}; pick from {sorted(SWEEPABLE)}")
    if not values:
        raise ValueError("sweep needs at least one value")
    base = validate_config(cfg).model_dump()
    out = []
    for value in values:
        typed = SWEEPABLE[key](value)
        variant = dict(base)
        variant[key] = typed
        out.append((typed, run(variant)))
    return out


def run_compare(cfg: Any, scenarios: list[str]) -> list[RunReport]:
    """Run several scenarios over one shared seed/workload."""
    if not scenarios:
        raise ValueError("compare needs at least one scenario")
    base = validate_config(cfg).model_dump()
    reports = []
    for scenario in scenarios:
        variant = dict(base)
        variant["scenario"] = scenario
        reports.append(run(variant))
    return reports
