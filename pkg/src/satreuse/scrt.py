"""Per-satellite computation reuse table: capacity-bounded record store.

One LSH index per task type. Eviction drops the record with the lowest reuse
count first (ties: oldest insertion, then lowest id), which keeps the same
records the collaboration protocol prefers to share.
"""

from __future__ import annotations

import dataclasses
import io
from typing import Iterable, Optional

import numpy as np

from .domain import ReuseRecord
from .errors import OversizedRecordError, UnknownIdError
from .lsh import LshIndex

_EVICT_NONE = frozenset()


class Scrt:
    """Capacity-bounded reuse record store with per-task-type LSH indexes."""

    def __init__(self, capacity_mb: float, dim: int, num_tables: int,
                 num_functions: int, seed_entropy: tuple[int, ...]):
        if capacity_mb <= 0:
            raise ValueError("capacity must be strictly positive")
        self.capacity_mb = capacity_mb
        self.used_mb = 0.0
        self.records: dict[int, ReuseRecord] = {}
        self._dim = dim
        self._num_tables = num_tables
        self._num_functions = num_functions
        self._seed_entropy = tuple(seed_entropy)
        self._indexes: dict[int, LshIndex] = {}
        self._content: dict[tuple[int, bytes], int] = {}  # dedup refcounts
        self._next_id = 0

    def __len__(self) -> int:
        return len(self.records)

    def _index_for(self, type_id: int) -> LshIndex:
        index = self._indexes.get(type_id)
        if index is None:
            seed = np.random.SeedSequence(self._seed_entropy + (type_id,))
            index = LshIndex(self._dim, self._num_tables, self._num_functions, seed)
            self._indexes[type_id] = index
        return index

    @staticmethod
    def _content_key(r: ReuseRecord) -> tuple[int, bytes]:
        return (r.task_type.id, r.preprocessed.vector.tobytes())

    def _evict(self, record_id: int) -> None:
        record = self.records.pop(record_id)
        self._indexes[record.task_type.id].remove(record_id)
        self.used_mb -= record.size_mb
        key = self._content_key(record)
        self._content[key] -= 1
        if self._content[key] == 0:
            del self._content[key]

    def _eviction_victim(self, protected: frozenset[int]) -> Optional[int]:
        best = None
        best_key = None
        for record_id, record in self.records.items():
            if record_id in protected:
                continue
            key = (record.reuse_count, record.inserted_at, record_id)
            if best_key is None or key < best_key:
                best_key = key
                best = record_id
        return best

    def _insert(self, r: ReuseRecord, protected: frozenset[int]) -> tuple[Optional[int], list[int]]:
        """Store and index ``r``, evicting residents as needed.

        The record being inserted is never its own eviction victim. Returns
        (id, evicted ids); id is None when the record cannot fit without
        evicting a protected record, in which case the insert is rolled back
        (earlier evictions stand).
        """
        record_id = self._next_id
        self._next_id += 1
        self.records[record_id] = r
        self._index_for(r.task_type.id).insert(record_id, r.preprocessed.vector)
        self.used_mb += r.size_mb
        key = self._content_key(r)
        self._content[key] = self._content.get(key, 0) + 1

        evicted: list[int] = []
        untouchable = protected | {record_id}
        while self.used_mb > self.capacity_mb:
            victim = self._eviction_victim(untouchable)
            if victim is None:
                self._evict(record_id)
                return None, evicted
            self._evict(victim)
            evicted.append(victim)
        return record_id, evicted

    def insert_record(self, r: ReuseRecord) -> list[int]:
        """Insert a locally-computed record; returns the evicted record ids."""
        if r.size_mb > self.capacity_mb:
            raise OversizedRecordError(
                f"record of {r.size_mb} MB exceeds capacity {self.capacity_mb} MB"
            )
        record_id, evicted = self._insert(r, _EVICT_NONE)
        return evicted

    def bump_reuse(self, record_id: int) -> int:
        """Increment a record's reuse count by exactly one."""
        record = self.records.get(record_id)
        if record is None:
            raise UnknownIdError(f"record {record_id} not present")
        record.reuse_count += 1
        return record.reuse_count

    def top_records(self, tau: int) -> list[ReuseRecord]:
        """The min(tau, len) records with highest reuse count.

        Ties prefer the newest insertion, then the lowest id; the ordering is
        deterministic.
        """
        ranked = sorted(
            self.records.items(),
            key=lambda kv: (-kv[1].reuse_count, -kv[1].inserted_at, kv[0]),
        )
        return [record for _, record in ranked[: max(tau, 0)]]

    def contains_equivalent(self, r: ReuseRecord) -> bool:
        """True if a record with identical preprocessed vector and task type exists."""
        return self._content_key(r) in self._content

    def install_shared(self, records: Iterable[ReuseRecord], now_s: float) -> tuple[int, int]:
        """Install records received through collaboration.

        Records whose preprocessed vector and task type already exist
        bit-for-bit are skipped. Installed copies restart with reuse_count 0
        and a fresh timestamp. Local residents may be evicted to make room,
        but records installed earlier in the same batch never are; an
        incoming record that cannot fit without evicting a batch member is
        skipped.
        """
        installed = 0
        skipped = 0
        batch: set[int] = set()
        for r in records:
            if self.contains_equivalent(r):
                skipped += 1
                continue
            if r.size_mb > self.capacity_mb:
                skipped += 1
                continue
            copy = dataclasses.replace(r, reuse_count=0, inserted_at=now_s)
            record_id, _ = self._insert(copy, frozenset(batch))
            if record_id is None:
                skipped += 1
            else:
                batch.add(record_id)
                installed += 1
        return installed, skipped

    def find_nearest(self, type_id: int, v: np.ndarray) -> Optional[tuple[int, ReuseRecord]]:
        """Nearest previously-seen input of the given task type, if any."""
        index = self._indexes.get(type_id)
        if index is None or len(index) == 0:
            return None
        record_id = index.find_nearest_neighbor(
            v, lambda i: self.records[i].preprocessed.vector
        )
        if record_id is None:
            return None
        return record_id, self.records[record_id]

    def dump(self) -> str:
        """Human-readable table contents, for debugging and test fixtures."""
        out = io.StringIO()
        out.write(f"capacity_mb={self.capacity_mb} used_mb={self.used_mb:.6f} "
                  f"records={len(self.records)}\n")
        for record_id in sorted(self.records):
            r = self.records[record_id]
            out.write(
                f"  id={record_id} type={r.task_type.id} label={r.output.label} "
                f"size_mb={r.size_mb:.6f} reuse_count={r.reuse_count} "
                f"inserted_at={r.inserted_at:.6f}\n"
            )
        return out.getvalue()
