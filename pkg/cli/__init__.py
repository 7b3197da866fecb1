"""Command-line commands and report writing."""

from cli.commands import (
    ANALYSES,
    AnalyzeOptions,
    cmd_analyze,
    cmd_enumerate,
    cmd_run,
    cmd_simulate,
)
from cli.reports import ReportWriter, provenance, to_jsonable

__all__ = [
    "ANALYSES",
    "AnalyzeOptions",
    "ReportWriter",
    "cmd_analyze",
    "cmd_enumerate",
    "cmd_run",
    "cmd_simulate",
    "provenance",
    "to_jsonable",
]
