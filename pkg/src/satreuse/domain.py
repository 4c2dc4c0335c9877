"""Core value types: tasks, records, grid positions, and the run configuration.

Anything numeric-heavy (images, vectors) is a plain dataclass wrapping numpy
arrays; the configuration family is pydantic so it validates itself and plugs
straight into the HTTP service.
"""

from __future__ import annotations

import dataclasses
from typing import Any, Literal, Optional

import numpy as np
import pydantic
from pydantic import BaseModel, Field

from .errors import ConfigError

SCENARIOS = ("without_cr", "srs_priority", "slcr", "sccr_init", "sccr")


@dataclasses.dataclass(frozen=True)
class TaskType:
    """A processing service identifier (e.g. a land-use classifier)."""

    id: int

    def __post_init__(self):
        if self.id < 0:
            raise ValueError("task type id must be non-negative")

    def to_dict(self) -> dict:
        return {"id": self.id}

    @classmethod
    def from_dict(cls, d: dict) -> "TaskType":
        return cls(id=int(d["id"]))


@dataclasses.dataclass
class InputData:
    """A task's raw input.

    ``hidden_label`` is the generator's ground truth. Only the workload
    oracle and the metrics accounting may read it; the reuse and
    collaboration logic never does, which is what makes reuse accuracy
    measurable without a real classifier.
    """

    raw_bytes_size: float  # MB
    pixels: np.ndarray  # 2-D luminance grid, values in [0, 1]
    hidden_label: int

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2:
            raise ValueError("pixels must be a 2-D grid")
        if self.raw_bytes_size <= 0:
            raise ValueError("raw_bytes_size must be positive")
        lo, hi = float(self.pixels.min()), float(self.pixels.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "raw_bytes_size": self.raw_bytes_size,
            "pixels": self.pixels.tolist(),
            "hidden_label": self.hidden_label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InputData":
        return cls(
            raw_bytes_size=float(d["raw_bytes_size"]),
            pixels=np.asarray(d["pixels"], dtype=np.float64),
            hidden_label=int(d["hidden_label"]),
        )


@dataclasses.dataclass
class PreprocessedInput:
    """Resized, flattened, unit-normalized input.

    ``vector`` has Euclidean norm 1 and length width*height. ``norm`` is the
    pre-normalization Euclidean norm, so the resized luminance grid can be
    reconstructed as ``vector.reshape(h, w) * norm`` (image statistics are
    meaningless after L2 scaling, so similarity gating works on that grid).
    """

    vector: np.ndarray
    dims: tuple[int, int]  # (width, height)
    norm: float

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=np.float64)
        w, h = self.dims
        if self.vector.shape != (w * h,):
            raise ValueError("vector length must equal width*height")

    def grid(self) -> np.ndarray:
        """Pre-normalization pixel grid, shape (height, width)."""
        w, h = self.dims
        return (self.vector * self.norm).reshape(h, w)

    def to_dict(self) -> dict:
        return {"vector": self.vector.tolist(), "dims": list(self.dims), "norm": self.norm}

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessedInput":
        return cls(
            vector=np.asarray(d["vector"], dtype=np.float64),
            dims=(int(d["dims"][0]), int(d["dims"][1])),
            norm=float(d["norm"]),
        )


@dataclasses.dataclass
class OutputData:
    """Result of running (or reusing) a task."""

    label: int
    result_bytes_size: float  # MB

    def __post_init__(self):
        if self.result_bytes_size <= 0:
            raise ValueError("result_bytes_size must be positive")

    def to_dict(self) -> dict:
        return {"label": self.label, "result_bytes_size": self.result_bytes_size}

    @classmethod
    def from_dict(cls, d: dict) -> "OutputData":
        return cls(label=int(d["label"]), result_bytes_size=float(d["result_bytes_size"]))


@dataclasses.dataclass
class ReuseRecord:
    """A cached input/output pair plus its reuse bookkeeping.

    ``reuse_count`` starts at 0 and is reset to 0 again whenever the record
    is installed on another satellite through collaboration.
    """

    input: InputData
    preprocessed: PreprocessedInput
    task_type: TaskType
    output: OutputData
    reuse_count: int = 0
    inserted_at: float = 0.0  # simulation seconds

    def __post_init__(self):
        if self.reuse_count < 0:
            raise ValueError("reuse_count must be non-negative")

    @property
    def size_mb(self) -> float:
        return self.input.raw_bytes_size + self.output.result_bytes_size

    def to_dict(self) -> dict:
        return {
            "input": self.input.to_dict(),
            "preprocessed": self.preprocessed.to_dict(),
            "task_type": self.task_type.to_dict(),
            "output": self.output.to_dict(),
            "reuse_count": self.reuse_count,
            "inserted_at": self.inserted_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReuseRecord":
        return cls(
            input=InputData.from_dict(d["input"]),
            preprocessed=PreprocessedInput.from_dict(d["preprocessed"]),
            task_type=TaskType.from_dict(d["task_type"]),
            output=OutputData.from_dict(d["output"]),
            reuse_count=int(d["reuse_count"]),
            inserted_at=float(d["inserted_at"]),
        )


class GridPosition(tuple):
    """(row, col) position on the N x N grid; row = orbit, col = in-orbit slot.

    Subclassing tuple keeps positions hashable, orderable (row-major) and
    cheap to use as dict keys.
    """

    __slots__ = ()

    def __new__(cls, row: int, col: int):
        if row < 0 or col < 0:
            raise ValueError("grid position must be non-negative")
        return super().__new__(cls, (int(row), int(col)))

    @property
    def row(self) -> int:
        return self[0]

    @property
    def col(self) -> int:
        return self[1]

    def to_dict(self) -> dict:
        return {"row": self.row, "col": self.col}

    @classmethod
    def from_dict(cls, d: dict) -> "GridPosition":
        return cls(row=d["row"], col=d["col"])

    def __repr__(self) -> str:
        return f"GridPosition({self.row}, {self.col})"


def grid_positions(n: int) -> list[GridPosition]:
    """All positions of an n x n grid in row-major order."""
    return [GridPosition(r, c) for r in range(n) for c in range(n)]


class ChannelParams(BaseModel):
    """Inter-satellite link parameters (Shannon rate over free-space loss).

    ``bandwidth_hz`` and ``sats_per_orbit`` may be left unset; config
    validation fills them from the run-level bandwidth and grid side.
    """

    model_config = pydantic.ConfigDict(extra="forbid")

    bandwidth_hz: Optional[float] = None
    tx_power_w: float = 10.0
    gain_tx: float = 19952.62  # linear; ~43 dBi, a ~0.5 m dish at 26 GHz
    gain_rx: float = 19952.62
    carrier_hz: float = 26.0e9
    noise_temp_k: float = 290.0
    boltzmann: float = 1.380649e-23
    altitude_km: float = 550.0
    earth_radius_km: float = 6371.0
    sats_per_orbit: Optional[int] = None
    inter_plane_spacing_m: Optional[float] = None  # defaults to intra-plane spacing
    multi_hop: bool = False  # price broadcasts hop by hop instead of direct
    torus: bool = False

    @pydantic.field_validator(
        "tx_power_w", "gain_tx", "gain_rx", "carrier_hz", "noise_temp_k",
        "boltzmann", "altitude_km", "earth_radius_km",
    )
    @classmethod
    def _positive(cls, v, info):
        if v <= 0:
            raise ValueError("must be strictly positive")
        return v


class WorkloadSpec(BaseModel):
    """Synthetic clustered-image workload description."""

    model_config = pydantic.ConfigDict(extra="forbid")

    total_tasks: int = 625
    total_mb: float = 12817.0
    num_classes: int = 21
    image_dims: tuple[int, int] = (256, 256)  # (width, height)
    noise_sigma: float = 0.02
    arrival: Literal["batch", "poisson"] = "batch"
    arrival_rate_hz: Optional[float] = None  # per-satellite, required for poisson
    result_mb: float = 0.01
    coarse_dims: tuple[int, int] = (8, 8)  # prototype base resolution
    seed: Optional[int] = None  # defaults to the run seed
    directory: Optional[str] = None  # ingest graymap files instead of generating

    @pydantic.field_validator("total_tasks", "num_classes")
    @classmethod
    def _pos_int(cls, v):
        if v <= 0:
            raise ValueError("must be strictly positive")
        return v

    @pydantic.field_validator("total_mb", "result_mb")
    @classmethod
    def _pos(cls, v):
        if v <= 0:
            raise ValueError("must be strictly positive")
        return v

    @pydantic.field_validator("noise_sigma")
    @classmethod
    def _nonneg(cls, v):
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @pydantic.model_validator(mode="after")
    def _poisson_rate(self):
        if self.arrival == "poisson":
            if self.arrival_rate_hz is None or self.arrival_rate_hz <= 0:
                raise ValueError("poisson arrival requires arrival_rate_hz > 0")
        return self

    @property
    def task_mb(self) -> float:
        return self.total_mb / self.total_tasks


class ScenarioConfig(BaseModel):
    """A full run description. Omitted fields take the standard defaults."""

    model_config = pydantic.ConfigDict(extra="forbid")

    n: int = 5  # grid side
    seed: int = 0
    scenario: Literal["without_cr", "srs_priority", "slcr", "sccr_init", "sccr"] = "sccr"
    bandwidth_hz: float = 20.0e6
    comp_hz: float = 3.0e9
    storage_mb: float = 512.0
    lsh_tables: int = 1
    lsh_functions: int = 2
    beta: float = 0.5
    th_sim: float = 0.7
    th_co: float = 0.5
    tau: int = 11
    alpha: int = 1
    lookup_cost_s: float = 0.005
    cycles_per_mb: float = 3.0e9
    preprocess_dims: tuple[int, int] = (64, 64)  # (width, height)
    torus: bool = False
    cooldown_tasks: int = 10  # completed subtasks between collaboration attempts
    # Occupancy feeding the reuse-status score: fraction of the last
    # occupancy_window_tasks subtasks computed from scratch ("task_window"),
    # or scratch-busy seconds over wall time ("windowed"/"cumulative").
    srs_occupancy: Literal["task_window", "windowed", "cumulative"] = "task_window"
    occupancy_window_tasks: int = 10
    occupancy_window_s: float = 30.0
    workload: WorkloadSpec = Field(default_factory=WorkloadSpec)
    channel: ChannelParams = Field(default_factory=ChannelParams)

    @pydantic.field_validator("n")
    @classmethod
    def _n_pos(cls, v):
        if v < 1:
            raise ValueError("grid side must be >= 1")
        return v

    @pydantic.field_validator("beta", "th_co")
    @classmethod
    def _unit_interval(cls, v, info):
        if not 0.0 <= v <= 1.0:
            raise ValueError("out of range [0, 1]")
        return v

    @pydantic.field_validator("th_sim")
    @classmethod
    def _sim_range(cls, v):
        if not -1.0 <= v <= 1.0:
            raise ValueError("out of range [-1, 1]")
        return v

    @pydantic.field_validator("tau")
    @classmethod
    def _tau_nonneg(cls, v):
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @pydantic.field_validator("alpha")
    @classmethod
    def _alpha_binary(cls, v):
        if v not in (0, 1):
            raise ValueError("must be 0 or 1")
        return v

    @pydantic.field_validator(
        "bandwidth_hz", "comp_hz", "storage_mb", "cycles_per_mb", "occupancy_window_s"
    )
    @classmethod
    def _positive(cls, v, info):
        if v <= 0:
            raise ValueError("must be strictly positive")
        return v

    @pydantic.field_validator("lsh_tables", "lsh_functions")
    @classmethod
    def _lsh_pos(cls, v):
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @pydantic.field_validator("lookup_cost_s")
    @classmethod
    def _lookup_nonneg(cls, v):
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @pydantic.field_validator("cooldown_tasks")
    @classmethod
    def _cooldown_nonneg(cls, v):
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @pydantic.field_validator("occupancy_window_tasks")
    @classmethod
    def _window_tasks_pos(cls, v):
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @pydantic.field_validator("preprocess_dims")
    @classmethod
    def _dims_pos(cls, v):
        if v[0] < 1 or v[1] < 1:
            raise ValueError("dimensions must be >= 1")
        return v


def validate_config(raw: Any) -> ScenarioConfig:
    """Build a validated, fully-resolved configuration.

    Accepts a mapping (possibly empty or partial) or an existing
    ScenarioConfig. Fields that depend on other fields (channel bandwidth,
    satellites per orbit, torus, workload seed) are resolved here so the
    returned config is self-contained.

    Raises ConfigError listing every (field, reason) violation.
    """
    if isinstance(raw, ScenarioConfig):
        raw = raw.model_dump()
    if raw is None:
        raw = {}
    try:
        cfg = ScenarioConfig.model_validate(raw)
    except pydantic.ValidationError as exc:
        errors = []
        for err in exc.errors():
            field = ".".join(str(p) for p in err["loc"]) or "<root>"
            errors.append((field, err["msg"]))
        raise ConfigError(errors) from None

    channel = cfg.channel.model_copy(
        update={
            "bandwidth_hz": cfg.channel.bandwidth_hz or cfg.bandwidth_hz,
            "sats_per_orbit": cfg.channel.sats_per_orbit or cfg.n,
            "torus": cfg.torus,
        }
    )
    workload = cfg.workload
    if workload.seed is None:
        workload = workload.model_copy(update={"seed": cfg.seed})
    return cfg.model_copy(update={"channel": channel, "workload": workload})
