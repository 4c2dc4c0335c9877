"""Task generation and the stand-in processor.

The synthetic workload draws one smooth prototype image per class and emits
tasks as prototype + per-pixel Gaussian noise, so same-class inputs are
highly similar and cross-class inputs are not. The per-task transfer/compute
size is metadata (total volume divided evenly) and is decoupled from the
pixel grid. The processor stands in for a pre-trained model: it labels an
input by the nearest class prototype, which doubles as the ground-truth
reference for reuse accuracy.

Real datasets can be ingested from a directory of portable graymap (PGM)
files, one subdirectory per class.
"""

from __future__ import annotations

import dataclasses
import os
from typing import Optional

import numpy as np

from .domain import GridPosition, InputData, OutputData, TaskType, WorkloadSpec
from .errors import EmptyDirectoryError, InvalidSpecError, UnreadableFileError
from .similarity import preprocess, resize_bilinear

# Seed-stream domain separators so the independent streams never collide.
_PROTO_TAG = 11
_CLASS_TAG = 12
_NOISE_TAG = 13
_ARRIVAL_TAG = 14


@dataclasses.dataclass
class Task:
    """One unit of work bound for a satellite."""

    seq: int  # global task index
    arrival_s: float
    input: InputData
    task_type: TaskType


def class_prototype(spec: WorkloadSpec, class_id: int) -> np.ndarray:
    """Smooth random field in [0, 1] for one class, deterministic per seed."""
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed or 0, _PROTO_TAG, class_id)))
    cw, ch = spec.coarse_dims
    coarse = rng.uniform(0.0, 1.0, size=(ch, cw))
    width, height = spec.image_dims
    return resize_bilinear(coarse, height, width)


def class_sequence(spec: WorkloadSpec) -> np.ndarray:
    """Balanced, shuffled class assignment for every task."""
    seq = np.array([i % spec.num_classes for i in range(spec.total_tasks)], dtype=np.int64)
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed or 0, _CLASS_TAG)))
    rng.shuffle(seq)
    return seq


def _arrival_times(spec: WorkloadSpec, counts: list[int]) -> list[np.ndarray]:
    if spec.arrival == "batch":
        return [np.zeros(c) for c in counts]
    times = []
    for sat_index, count in enumerate(counts):
        rng = np.random.default_rng(
            np.random.SeedSequence((spec.seed or 0, _ARRIVAL_TAG, sat_index))
        )
        gaps = rng.exponential(1.0 / spec.arrival_rate_hz, size=count)
        times.append(np.cumsum(gaps))
    return times


def generate(spec: WorkloadSpec, n_sats: int) -> list[list[Task]]:
    """Per-satellite ordered task lists, dealt round-robin.

    Every pixel, label and arrival time is a pure function of (seed, spec).
    """
    if n_sats < 1:
        raise InvalidSpecError("need at least one satellite")
    if spec.directory is not None:
        return ingest_directory(spec.directory, spec, n_sats)

    prototypes = [class_prototype(spec, k) for k in range(spec.num_classes)]
    classes = class_sequence(spec)
    noise_rng = np.random.default_rng(np.random.SeedSequence((spec.seed or 0, _NOISE_TAG)))
    width, height = spec.image_dims
    task_mb = spec.task_mb

    inputs: list[InputData] = []
    for class_id in classes:
        pixels = prototypes[class_id]
        if spec.noise_sigma > 0.0:
            pixels = np.clip(
                pixels + spec.noise_sigma * noise_rng.standard_normal((height, width)),
                0.0, 1.0,
            )
        inputs.append(InputData(raw_bytes_size=task_mb, pixels=pixels,
                                hidden_label=int(class_id)))
    return _deal(inputs, spec, n_sats)


def _deal(inputs: list[InputData], spec: WorkloadSpec, n_sats: int) -> list[list[Task]]:
    counts = [0] * n_sats
    for i in range(len(inputs)):
        counts[i % n_sats] += 1
    arrivals = _arrival_times(spec, counts)
    per_sat: list[list[Task]] = [[] for _ in range(n_sats)]
    cursor = [0] * n_sats
    for i, d in enumerate(inputs):
        sat = i % n_sats
        per_sat[sat].append(Task(
            seq=i,
            arrival_s=float(arrivals[sat][cursor[sat]]),
            input=d,
            task_type=TaskType(0),
        ))
        cursor[sat] += 1
    return per_sat


class OracleProcessor:
    """Deterministic stand-in for a pre-trained model.

    Labels an input with the class of the nearest prototype (by cosine over
    preprocessed vectors); identical inputs always get identical labels.
    """

    def __init__(self, proto_grids: list[np.ndarray], result_mb: float,
                 preprocess_dims: tuple[int, int]):
        self.result_mb = result_mb
        self._dims = preprocess_dims
        self._proto_vectors = np.stack([
            preprocess(InputData(raw_bytes_size=1.0, pixels=g, hidden_label=k),
                       preprocess_dims).vector
            for k, g in enumerate(proto_grids)
        ])

    @classmethod
    def from_spec(cls, spec: WorkloadSpec, preprocess_dims: tuple[int, int]) -> "OracleProcessor":
        grids = [class_prototype(spec, k) for k in range(spec.num_classes)]
        return cls(grids, spec.result_mb, preprocess_dims)

    @classmethod
    def from_tasks(cls, tasks: list[list["Task"]], spec: WorkloadSpec,
                   preprocess_dims: tuple[int, int]) -> "OracleProcessor":
        """Prototypes as per-class pixel means; used for ingested datasets."""
        sums: dict[int, np.ndarray] = {}
        counts: dict[int, int] = {}
        for sat_tasks in tasks:
            for t in sat_tasks:
                label = t.input.hidden_label
                if label not in sums:
                    sums[label] = np.zeros_like(t.input.pixels)
                    counts[label] = 0
                sums[label] += t.input.pixels
                counts[label] += 1
        grids = [sums[k] / counts[k] for k in sorted(sums)]
        return cls(grids, spec.result_mb, preprocess_dims)

    def __call__(self, d: InputData, p: TaskType) -> OutputData:
        v = preprocess(d, self._dims).vector
        scores = self._proto_vectors @ v
        label = int(np.argmax(scores))  # argmax takes the lowest index on ties
        return OutputData(label=label, result_bytes_size=self.result_mb)


def build_oracle(spec: WorkloadSpec, preprocess_dims: tuple[int, int],
                 tasks: Optional[list[list["Task"]]] = None) -> OracleProcessor:
    """Oracle for a workload: seeded prototypes, or class means when ingesting."""
    if spec.directory is not None:
        if tasks is None:
            raise InvalidSpecError("directory workloads need the ingested tasks")
        return OracleProcessor.from_tasks(tasks, spec, preprocess_dims)
    return OracleProcessor.from_spec(spec, preprocess_dims)


def _read_pgm(path: str) -> np.ndarray:
    """Parse a P2 (ascii) or P5 (binary) portable graymap into [0, 1] floats."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UnreadableFileError(path, str(exc)) from exc

    try:
        # Header: magic, width, height, maxval; '#' comments allowed between.
        tokens: list[bytes] = []
        pos = 0
        while len(tokens) < 4:
            while pos < len(data) and data[pos : pos + 1].isspace():
                pos += 1
            if pos < len(data) and data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
                continue
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            if start == pos:
                raise ValueError("truncated header")
            tokens.append(data[start:pos])
        magic = tokens[0]
        width, height, maxval = (int(t) for t in tokens[1:4])
        if maxval <= 0 or width <= 0 or height <= 0:
            raise ValueError("bad header values")
        if magic == b"P2":
            values = np.array(data[pos:].split(), dtype=np.float64)
        elif magic == b"P5":
            pos += 1  # single whitespace after maxval
            dtype = np.uint8 if maxval < 256 else ">u2"
            values = np.frombuffer(data, dtype=dtype, offset=pos,
                                   count=width * height).astype(np.float64)
        else:
            raise ValueError(f"unsupported magic {magic!r}")
        if values.size != width * height:
            raise ValueError("pixel count mismatch")
        return (values / maxval).reshape(height, width)
    except UnreadableFileError:
        raise
    except Exception as exc:
        raise UnreadableFileError(path, str(exc)) from exc


def ingest_directory(path: str, spec: WorkloadSpec, n_sats: int) -> list[list[Task]]:
    """Load graymap files from per-class subdirectories as the task stream.

    Subdirectory names become class labels (sorted order); each file's size
    on disk sets its transfer size. Distribution and arrivals follow the
    same rules as the synthetic generator.
    """
    if not os.path.isdir(path):
        raise EmptyDirectoryError(f"{path} is not a directory")
    class_dirs = sorted(
        d for d in os.listdir(path) if os.path.isdir(os.path.join(path, d))
    )
    width, height = spec.image_dims
    inputs: list[InputData] = []
    for label, name in enumerate(class_dirs):
        class_dir = os.path.join(path, name)
        for fname in sorted(os.listdir(class_dir)):
            fpath = os.path.join(class_dir, fname)
            if not os.path.isfile(fpath):
                continue
            pixels = resize_bilinear(_read_pgm(fpath), height, width)
            pixels = np.clip(pixels, 0.0, 1.0)
            size_mb = max(os.path.getsize(fpath) / 1.0e6, 1e-9)
            inputs.append(InputData(raw_bytes_size=size_mb, pixels=pixels,
                                    hidden_label=label))
    if not inputs:
        raise EmptyDirectoryError(f"no usable graymap files under {path}")
    return _deal(inputs, spec, n_sats)


def satellite_order(n: int) -> list[GridPosition]:
    """Row-major satellite order used for dealing tasks."""
    return [GridPosition(r, c) for r in range(n) for c in range(n)]
