"""Python front end to the DOC simulator core."""

import json
from pathlib import Path

from . import _docsim
from ._docsim import (
    ScenarioError,
    SolverError,
    control_to_probability,
    probability_to_control,
    punishment_F,
    stability_check,
    tune_gains,
)

__all__ = [
    "ScenarioError",
    "SolverError",
    "load",
    "validate",
    "solve",
    "run",
    "episode",
    "control_to_probability",
    "probability_to_control",
    "punishment_F",
    "stability_check",
    "tune_gains",
]


def _text(scenario):
    if isinstance(scenario, (str, Path)) and Path(scenario).is_file():
        return Path(scenario).read_text()
    if isinstance(scenario, dict):
        return json.dumps(scenario)
    return str(scenario)


def load(path):
    """Scenario file as a dict."""
    return json.loads(Path(path).read_text())


def validate(scenario):
    """Name of a valid scenario; raises ScenarioError otherwise."""
    return _docsim.validate(_text(scenario))


def solve(scenario):
    """Optimal configuration, tuned gains and punishment parameters."""
    return _docsim.solve(_text(scenario))


def run(scenario, seed=1):
    """Run the scenario's experiment. Returns summary rows and tables."""
    return _docsim.run(_text(scenario), seed)


def episode(scenario, seed=1, replication=0, honest_only=False):
    """One episode: p trajectory, throughput and channel time after warmup."""
    return _docsim.episode(_text(scenario), seed, replication, honest_only)
