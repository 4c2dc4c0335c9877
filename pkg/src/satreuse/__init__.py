"""Satellite edge-grid computation-reuse simulator."""

__version__ = "0.1.0"

from .domain import ScenarioConfig, validate_config  # noqa: F401
from .engine import RunReport, run, run_compare, run_sweep  # noqa: F401
