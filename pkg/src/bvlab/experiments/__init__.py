"""Experiment registry, reports and the ``lab`` command line."""

from .report import Check, ScenarioConfig, ScenarioReport, emit_report, reverify
from .scenarios import SCENARIOS, prepared, run_scenario

__all__ = ["Check", "ScenarioConfig", "ScenarioReport", "SCENARIOS", "emit_report", "prepared",
           "reverify", "run_scenario"]
