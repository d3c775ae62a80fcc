"""Shared fixtures: the committed golden scenarios, integrated once per session."""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from hkdelay.cli import _verify_one
from hkdelay.scenario_io import load_scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

GOLDEN_NAMES = (
    "general_delay5",
    "pinned_leader_delay5",
    "steered_leader_delay1",
    "two_leaders_delay5",
    "multi_leader_delay5",
)


class GoldenRun:
    def __init__(self, name: str):
        self.name = name
        self.path = SCENARIO_DIR / f"{name}.json"
        self.scenario = load_scenario(self.path)
        text, ok, traj, cert, reports = _verify_one(str(self.path), self.scenario)
        self.report_text = text
        self.verify_ok = ok
        self.trajectory = traj
        self.certificate = cert
        self.reports = {r.name: r for r in reports}


@pytest.fixture(scope="session")
def golden_runs() -> dict[str, GoldenRun]:
    return {name: GoldenRun(name) for name in GOLDEN_NAMES}
