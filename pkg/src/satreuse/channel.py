"""Inter-satellite link model: Shannon rate over free-space path loss.

Grid geometry maps to physical distance through the constellation spacing:
adjacent satellites in one orbit sit 2*(R_E + h)*sin(pi/N_s) apart, and the
inter-plane spacing defaults to the same value. Broadcast pricing charges
every receiver at the direct source->receiver rate by default; an optional
multi-hop mode routes over axis-aligned grid hops instead.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .domain import ChannelParams, GridPosition, ReuseRecord
from .errors import EmptyAreaError, NonPositiveDistanceError, SamePositionError

SPEED_OF_LIGHT = 2.99792458e8  # m/s
BITS_PER_MB = 8.0e6  # 1 MB = 1e6 bytes


def intra_plane_spacing_m(p: ChannelParams) -> float:
    """Arc chord between adjacent satellites of one orbit."""
    n_s = p.sats_per_orbit or 1
    if n_s < 2:
        # Degenerate single-satellite orbit; chord of a half-circle.
        n_s = 2
    radius_m = (p.earth_radius_km + p.altitude_km) * 1000.0
    return 2.0 * radius_m * math.sin(math.pi / n_s)


def inter_plane_spacing_m(p: ChannelParams) -> float:
    if p.inter_plane_spacing_m is not None:
        return p.inter_plane_spacing_m
    return intra_plane_spacing_m(p)


def _axis_delta(a: int, b: int, n: int, torus: bool) -> int:
    d = abs(a - b)
    if torus and n > 0:
        d = min(d, n - d)
    return d


def distance_m(a: GridPosition, b: GridPosition, p: ChannelParams) -> float:
    """Euclidean distance over the grid embedding with physical spacings."""
    if a == b:
        raise SamePositionError(f"both endpoints at {a}")
    n = p.sats_per_orbit or 0
    dr = _axis_delta(a.row, b.row, n, p.torus)
    dc = _axis_delta(a.col, b.col, n, p.torus)
    return math.hypot(dr * inter_plane_spacing_m(p), dc * intra_plane_spacing_m(p))


def path_loss(dist_m: float, p: ChannelParams) -> float:
    """Free-space loss (4*pi*f_c*d / c)^2, dimensionless."""
    if dist_m <= 0:
        raise NonPositiveDistanceError(f"distance {dist_m} m")
    return (4.0 * math.pi * p.carrier_hz * dist_m / SPEED_OF_LIGHT) ** 2


def noise_power(p: ChannelParams) -> float:
    """Thermal noise power k_B * T * B over the receive bandwidth, in watts."""
    return p.boltzmann * p.noise_temp_k * float(p.bandwidth_hz)


def snr(a: GridPosition, b: GridPosition, p: ChannelParams) -> float:
    """Received signal-to-noise ratio between two grid positions."""
    loss = path_loss(distance_m(a, b, p), p)
    return p.tx_power_w * p.gain_tx * p.gain_rx / (noise_power(p) * loss)


def link_rate(a: GridPosition, b: GridPosition, p: ChannelParams) -> float:
    """Shannon capacity of the a<->b link in bits/s."""
    return float(p.bandwidth_hz) * math.log2(1.0 + snr(a, b, p))


def _step(cur: int, target: int, n: int, torus: bool) -> int:
    """Move one grid slot toward ``target`` (shorter way around on a torus)."""
    if torus and n:
        forward = (target - cur) % n
        backward = (cur - target) % n
        return (cur + 1) % n if forward <= backward else (cur - 1) % n
    return cur + 1 if target > cur else cur - 1


def _hop_path(src: GridPosition, dst: GridPosition, p: ChannelParams) -> list[GridPosition]:
    """Axis-aligned route (rows first, then columns), honoring the torus flag."""
    n = p.sats_per_orbit or 0
    path = [src]
    r, c = src.row, src.col
    while r != dst.row:
        r = _step(r, dst.row, n, p.torus)
        path.append(GridPosition(r, c))
    while c != dst.col:
        c = _step(c, dst.col, n, p.torus)
        path.append(GridPosition(r, c))
    return path


def batch_size_mb(records: Sequence[ReuseRecord], tau: int) -> float:
    """Total payload of the first ``tau`` shared records (input + output)."""
    return sum(r.size_mb for r in records[: max(tau, 0)])


def receive_time_s(src: GridPosition, member: GridPosition, batch_mb: float,
                   p: ChannelParams) -> float:
    """Seconds for one receiver to obtain the full record batch."""
    if batch_mb <= 0.0:
        return 0.0
    bits = batch_mb * BITS_PER_MB
    if not p.multi_hop:
        return bits / link_rate(src, member, p)
    path = _hop_path(src, member, p)
    total = 0.0
    for hop_a, hop_b in zip(path, path[1:]):
        total += bits / link_rate(hop_a, hop_b, p)
    return total


def broadcast_cost_s(src: GridPosition, area: Iterable[GridPosition],
                     records: Sequence[ReuseRecord], tau: int,
                     p: ChannelParams) -> tuple[float, float]:
    """Total broadcast (seconds, MB moved) for sharing ``tau`` records.

    Every area member except the source receives a full copy of the batch;
    the source pays no self-transfer. An empty record batch is free.
    """
    receivers = [m for m in area if m != src]
    if not receivers:
        raise EmptyAreaError("broadcast area contains no receiver")
    batch_mb = batch_size_mb(records, tau)
    if batch_mb <= 0.0:
        return 0.0, 0.0
    total_s = sum(receive_time_s(src, m, batch_mb, p) for m in receivers)
    return total_s, batch_mb * len(receivers)
