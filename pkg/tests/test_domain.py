"""Domain types: validation, defaults, serialization round-trips."""

import numpy as np
import pytest

from satreuse.domain import (
    GridPosition,
    InputData,
    OutputData,
    PreprocessedInput,
    ReuseRecord,
    TaskType,
    validate_config,
)
from satreuse.errors import ConfigError


def test_empty_config_takes_defaults():
    cfg = validate_config({})
    assert cfg.bandwidth_hz == 20.0e6
    assert cfg.comp_hz == 3.0e9
    assert cfg.lsh_tables == 1
    assert cfg.lsh_functions == 2
    assert cfg.beta == 0.5
    assert cfg.th_sim == 0.7
    assert cfg.tau == 11
    assert cfg.th_co == 0.5
    assert cfg.n == 5


def test_full_standard_config_accepted():
    cfg = validate_config({
        "n": 5, "bandwidth_hz": 20e6, "comp_hz": 3e9, "lsh_tables": 1,
        "lsh_functions": 2, "beta": 0.5, "th_sim": 0.7, "tau": 11, "th_co": 0.5,
    })
    assert cfg.th_sim == 0.7


def test_beta_out_of_range_names_field():
    with pytest.raises(ConfigError) as exc:
        validate_config({"beta": 1.5})
    assert any(field == "beta" for field, _ in exc.value.errors)


@pytest.mark.parametrize("field,value", [
    ("th_sim", 1.5),
    ("th_co", -0.1),
    ("tau", -1),
    ("alpha", 2),
    ("bandwidth_hz", 0.0),
    ("comp_hz", -1.0),
    ("storage_mb", 0.0),
    ("lsh_tables", 0),
    ("n", 0),
])
def test_invariant_violations_rejected(field, value):
    with pytest.raises(ConfigError) as exc:
        validate_config({field: value})
    assert any(f == field for f, _ in exc.value.errors)


def test_resolution_fills_channel_and_workload():
    cfg = validate_config({"n": 7, "seed": 9, "bandwidth_hz": 1.0e7, "torus": True})
    assert cfg.channel.bandwidth_hz == 1.0e7
    assert cfg.channel.sats_per_orbit == 7
    assert cfg.channel.torus is True
    assert cfg.workload.seed == 9


def test_random_valid_configs_satisfy_invariants():
    rng = np.random.default_rng(0)
    for _ in range(200):
        raw = {
            "n": int(rng.integers(1, 12)),
            "seed": int(rng.integers(0, 1 << 31)),
            "beta": float(rng.uniform(0, 1)),
            "th_sim": float(rng.uniform(-1, 1)),
            "th_co": float(rng.uniform(0, 1)),
            "tau": int(rng.integers(0, 40)),
            "alpha": int(rng.integers(0, 2)),
            "bandwidth_hz": float(rng.uniform(1e6, 1e9)),
            "comp_hz": float(rng.uniform(1e8, 1e10)),
            "storage_mb": float(rng.uniform(1, 4096)),
        }
        cfg = validate_config(raw)
        assert 0.0 <= cfg.beta <= 1.0
        assert -1.0 <= cfg.th_sim <= 1.0
        assert 0.0 <= cfg.th_co <= 1.0
        assert cfg.tau >= 0
        assert cfg.alpha in (0, 1)
        assert cfg.bandwidth_hz > 0 and cfg.comp_hz > 0 and cfg.storage_mb > 0


def _sample_record() -> ReuseRecord:
    pixels = np.linspace(0, 1, 12).reshape(3, 4)
    vec = pixels.ravel()
    vec = vec / np.linalg.norm(vec)
    return ReuseRecord(
        input=InputData(raw_bytes_size=2.5, pixels=pixels, hidden_label=3),
        preprocessed=PreprocessedInput(vector=vec, dims=(4, 3),
                                       norm=float(np.linalg.norm(pixels))),
        task_type=TaskType(0),
        output=OutputData(label=3, result_bytes_size=0.01),
        reuse_count=4,
        inserted_at=12.5,
    )


def test_round_trip_all_domain_types():
    record = _sample_record()
    back = ReuseRecord.from_dict(record.to_dict())
    assert np.array_equal(back.input.pixels, record.input.pixels)
    assert np.array_equal(back.preprocessed.vector, record.preprocessed.vector)
    assert back.input.raw_bytes_size == record.input.raw_bytes_size
    assert back.input.hidden_label == record.input.hidden_label
    assert back.task_type == record.task_type
    assert back.output == record.output
    assert back.reuse_count == record.reuse_count
    assert back.inserted_at == record.inserted_at

    pos = GridPosition(2, 4)
    assert GridPosition.from_dict(pos.to_dict()) == pos

    cfg = validate_config({"n": 7, "beta": 0.25})
    assert validate_config(cfg.model_dump()) == cfg


def test_grid_position_ordering_is_row_major():
    assert GridPosition(0, 5) < GridPosition(1, 0)
    assert GridPosition(1, 2) < GridPosition(1, 3)


def test_pixel_bounds_enforced():
    with pytest.raises(ValueError):
        InputData(raw_bytes_size=1.0, pixels=np.array([[0.0, 1.2]]), hidden_label=0)
    with pytest.raises(ValueError):
        InputData(raw_bytes_size=0.0, pixels=np.array([[0.5]]), hidden_label=0)


def test_output_size_positive():
    with pytest.raises(ValueError):
        OutputData(label=1, result_bytes_size=0.0)
