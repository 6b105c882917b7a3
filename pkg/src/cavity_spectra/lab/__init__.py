"""Experiment configuration, orchestration and reports."""
from .config import KINDS, SCHEMA, load_config, resolve_config, validate_config
from .runner import Report, run

__all__ = ["KINDS", "SCHEMA", "Report", "load_config", "resolve_config", "run", "validate_config"]
