"""Scenario catalog, run configuration, execution and persistence."""

from .config import (
    PRESETS,
    SCENARIOS,
    ConfigError,
    RunConfig,
    Seeds,
    parse_config,
    resolve,
    with_seeds,
)
from .runner import RunManifest, find_regime, replace_output, run_scenario, sweep
from . import snapshots

__all__ = [
    "PRESETS", "SCENARIOS", "ConfigError", "RunConfig", "Seeds",
    "parse_config", "resolve", "with_seeds", "RunManifest", "find_regime",
    "replace_output", "run_scenario", "sweep", "snapshots",
]
