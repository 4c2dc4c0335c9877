"""Hyperplane locality-sensitive hash index over preprocessed input vectors.

Each of the ``num_tables`` tables hashes a vector to a ``num_functions``-bit
signature (one sign bit per random hyperplane). Candidate retrieval unions
the matching bucket of every table; scoring uses cosine similarity on the
indexed unit vectors. Vectors at angle theta collide in one table with
probability (1 - theta/pi) ** num_functions.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatchError, DuplicateIdError, UnknownIdError


class LshIndex:
    """Sign-of-dot-product hash index; unbounded, eviction is the caller's job."""

    def __init__(self, dim: int, num_tables: int, num_functions: int,
                 seed: np.random.SeedSequence | int):
        if num_tables < 1 or num_functions < 1:
            raise ValueError("need at least one table and one hash function")
        self.dim = dim
        self.num_tables = num_tables
        self.num_functions = num_functions
        rng = np.random.default_rng(seed)
        planes = rng.standard_normal((num_tables, num_functions, dim))
        planes /= np.linalg.norm(planes, axis=2, keepdims=True)
        self._planes = planes
        self._planes.setflags(write=False)
        self._buckets: list[dict[int, list[int]]] = [{} for _ in range(num_tables)]
        self._keys: dict[int, tuple[int, ...]] = {}  # id -> per-table signature

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, record_id: int) -> bool:
        return record_id in self._keys

    def signature(self, table: int, v: np.ndarray) -> int:
        """Signature of ``v`` in one table: bit j set iff dot(v, plane_j) >= 0."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise DimensionMismatchError(f"vector shape {v.shape}, expected ({self.dim},)")
        dots = self._planes[table] @ v
        key = 0
        for j in range(self.num_functions):
            if dots[j] >= 0.0:
                key |= 1 << j
        return key

    def _signatures(self, v: np.ndarray) -> tuple[int, ...]:
        return tuple(self.signature(t, v) for t in range(self.num_tables))

    def insert(self, record_id: int, v: np.ndarray) -> None:
        if record_id in self._keys:
            raise DuplicateIdError(f"id {record_id} already indexed")
        keys = self._signatures(v)
        for table, key in enumerate(keys):
            self._buckets[table].setdefault(key, []).append(record_id)
        self._keys[record_id] = keys

    def remove(self, record_id: int) -> None:
        keys = self._keys.pop(record_id, None)
        if keys is None:
            raise UnknownIdError(f"id {record_id} not indexed")
        for table, key in enumerate(keys):
            bucket = self._buckets[table][key]
            bucket.remove(record_id)
            if not bucket:
                del self._buckets[table][key]

    def candidates(self, v: np.ndarray) -> list[int]:
        """Union of the matching buckets across tables, sorted by id."""
        found: set[int] = set()
        for table in range(self.num_tables):
            key = self.signature(table, v)
            found.update(self._buckets[table].get(key, ()))
        return sorted(found)

    def find_nearest_neighbor(
        self, v: np.ndarray, vector_of: Callable[[int], np.ndarray]
    ) -> Optional[int]:
        """Max-cosine candidate among the union of buckets; ties -> lowest id."""
        v = np.asarray(v, dtype=np.float64)
        best_id: Optional[int] = None
        best_cos = -np.inf
        for record_id in self.candidates(v):
            c = float(np.dot(v, vector_of(record_id)))
            if c > best_cos:
                best_cos = c
                best_id = record_id
        return best_id
