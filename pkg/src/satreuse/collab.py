"""Collaborative record sharing: area construction, source election, broadcast.

A satellite whose reuse-status score drops below ``th_co`` requests help. The
initial collaboration area is its Chebyshev-radius-1 (Moore) neighborhood,
clipped at grid edges unless the torus flag wraps them; one expansion step
widens it to radius 2. The highest-scoring member above ``th_co`` (requester
excluded) becomes the source and pushes its most-reused records to every
other member.

Area construction deliberately scans the whole N x N grid and filters by
Chebyshev distance, so its operation count grows as N^2; ``ProbeCounter``
exposes those counts for complexity checks.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Literal, Optional

from .channel import batch_size_mb, receive_time_s
from .domain import ChannelParams, GridPosition, ReuseRecord
from .errors import AlreadyExpandedError, EmptyAfterExclusionError
from .scrt import Scrt


@dataclasses.dataclass
class ProbeCounter:
    """Counts elementary inspections for complexity assertions."""

    area_cells: int = 0  # grid cells examined while building areas
    srs_reads: int = 0  # status values read during elections


@dataclasses.dataclass(frozen=True)
class CoArea:
    """Collaboration area: requester-centered square of Chebyshev radius ``level``."""

    members: tuple[GridPosition, ...]  # row-major order
    level: int
    requester: GridPosition


@dataclasses.dataclass
class CollabEvent:
    """One collaboration attempt, successful or not."""

    requester: GridPosition
    source: Optional[GridPosition]
    area: CoArea
    records_shared: int
    psi_s: float
    mb: float
    outcome: Literal["helped", "no_source_found"]
    batch_mb: float = 0.0
    installed: int = 0
    skipped: int = 0


def _chebyshev(a: GridPosition, b: GridPosition, n: int, torus: bool) -> int:
    dr = abs(a.row - b.row)
    dc = abs(a.col - b.col)
    if torus:
        dr = min(dr, n - dr)
        dc = min(dc, n - dc)
    return max(dr, dc)


def _area_of_radius(req: GridPosition, n: int, radius: int, torus: bool,
                    probes: Optional[ProbeCounter]) -> tuple[GridPosition, ...]:
    members = []
    for row in range(n):
        for col in range(n):
            if probes is not None:
                probes.area_cells += 1
            pos = GridPosition(row, col)
            if _chebyshev(pos, req, n, torus) <= radius:
                members.append(pos)
    return tuple(members)


def get_co_area(req: GridPosition, n: int, torus: bool = False,
                probes: Optional[ProbeCounter] = None) -> CoArea:
    """Initial area: the requester and its surrounding satellites."""
    if not (0 <= req.row < n and 0 <= req.col < n):
        raise ValueError(f"requester {req} outside {n}x{n} grid")
    return CoArea(members=_area_of_radius(req, n, 1, torus, probes), level=1, requester=req)


def get_expanded_co_area(area: CoArea, n: int, torus: bool = False,
                         probes: Optional[ProbeCounter] = None) -> CoArea:
    """One expansion step: the surroundings of every initial member (radius 2)."""
    if area.level != 1:
        raise AlreadyExpandedError("collaboration area expands at most once")
    return CoArea(
        members=_area_of_radius(area.requester, n, 2, torus, probes),
        level=2,
        requester=area.requester,
    )


SrsLookup = Callable[[GridPosition], float]


def find_srs_max(area: CoArea, srs_of: SrsLookup, exclude: GridPosition,
                 probes: Optional[ProbeCounter] = None) -> tuple[GridPosition, float]:
    """Member with the highest status score, requester excluded.

    Ties resolve to the earliest member in row-major order.
    """
    best: Optional[GridPosition] = None
    best_srs = -1.0
    for member in area.members:
        if member == exclude:
            continue
        if probes is not None:
            probes.srs_reads += 1
        value = srs_of(member)
        if best is None or value > best_srs:
            best = member
            best_srs = value
    if best is None:
        raise EmptyAfterExclusionError("no candidate besides the requester")
    return best, best_srs


ScrtLookup = Callable[[GridPosition], Scrt]


def _execute_share(source: GridPosition, area: CoArea, scrt_of: ScrtLookup,
                   tau: int, channel: ChannelParams, now_s: float,
                   ) -> tuple[CollabEvent, dict[GridPosition, float]]:
    records: list[ReuseRecord] = scrt_of(source).top_records(tau)
    batch_mb = batch_size_mb(records, tau)
    delays: dict[GridPosition, float] = {}
    psi = 0.0
    installed = 0
    skipped = 0
    for member in area.members:
        if member == source:
            continue
        delay = receive_time_s(source, member, batch_mb, channel)
        delays[member] = delay
        psi += delay
        got, missed = scrt_of(member).install_shared(records, now_s + delay)
        installed += got
        skipped += missed
    event = CollabEvent(
        requester=area.requester,
        source=source,
        area=area,
        records_shared=len(records),
        psi_s=psi,
        mb=batch_mb * len(delays),
        outcome="helped",
        batch_mb=batch_mb,
        installed=installed,
        skipped=skipped,
    )
    return event, delays


def _no_source(area: CoArea) -> tuple[CollabEvent, dict[GridPosition, float]]:
    event = CollabEvent(
        requester=area.requester, source=None, area=area, records_shared=0,
        psi_s=0.0, mb=0.0, outcome="no_source_found",
    )
    return event, {}


def run_sccr(req: GridPosition, n: int, *, srs_of: SrsLookup, scrt_of: ScrtLookup,
             th_co: float, tau: int, channel: ChannelParams, now_s: float,
             expand: bool = True, torus: bool = False,
             probes: Optional[ProbeCounter] = None,
             ) -> tuple[CollabEvent, dict[GridPosition, float]]:
    """Full collaboration attempt for a below-threshold requester.

    Elects the best-status neighbor above ``th_co`` in the initial area,
    expanding once if allowed; shares the source's top ``tau`` records with
    every other area member. Returns the event plus each receiver's
    transfer delay. Failures come back as a no_source_found event.
    """
    area = get_co_area(req, n, torus, probes)
    try:
        best, best_srs = find_srs_max(area, srs_of, exclude=req, probes=probes)
    except EmptyAfterExclusionError:
        return _no_source(area)
    if best_srs > th_co:
        return _execute_share(best, area, scrt_of, tau, channel, now_s)
    if not expand:
        return _no_source(area)
    area = get_expanded_co_area(area, n, torus, probes)
    best, best_srs = find_srs_max(area, srs_of, exclude=req, probes=probes)
    if best_srs > th_co:
        return _execute_share(best, area, scrt_of, tau, channel, now_s)
    return _no_source(area)


def run_srs_priority(req: GridPosition, n: int, *, srs_of: SrsLookup,
                     scrt_of: ScrtLookup, tau: int, channel: ChannelParams,
                     now_s: float, torus: bool = False,
                     probes: Optional[ProbeCounter] = None,
                     ) -> tuple[CollabEvent, dict[GridPosition, float]]:
    """Network-wide variant: best status anywhere, broadcast to the whole grid.

    No threshold gates the source, so any requester on a grid with at least
    two satellites gets helped.
    """
    area = CoArea(
        members=_area_of_radius(req, n, max(n - 1, 1), torus, probes),
        level=max(n - 1, 1),
        requester=req,
    )
    try:
        best, _ = find_srs_max(area, srs_of, exclude=req, probes=probes)
    except EmptyAfterExclusionError:
        return _no_source(area)
    return _execute_share(best, area, scrt_of, tau, channel, now_s)
