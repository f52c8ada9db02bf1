from .config import (
    DEFAULT_CONFIG,
    config_hash,
    default_config_yaml,
    load_config,
)
from .runrecord import RunRecord, run_lock
from .stages import PipelineRun
from .report import render_report
from .cli import main

__all__ = [
    "DEFAULT_CONFIG",
    "PipelineRun",
    "RunRecord",
    "config_hash",
    "default_config_yaml",
    "load_config",
    "main",
    "render_report",
    "run_lock",
]
