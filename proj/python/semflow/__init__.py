"""Python interface to the semflow pipeline engine."""

import json

from . import _core
from ._core import SemflowError

__all__ = [
    "SemflowError",
    "Agent",
    "format_step",
    "parse_step",
    "plans",
    "run_pipeline",
    "select_plan",
]


def run_pipeline(pipeline, catalog, mock_rules, data_root=".", policy=None, workers=1):
    """Run a pipeline file against the mock provider and return (records, stats)."""
    policy_text = json.dumps(policy) if policy is not None else None
    records, stats = _core.run_pipeline(
        str(pipeline), str(catalog), str(mock_rules), str(data_root), policy_text, workers
    )
    return json.loads(records), json.loads(stats)


def plans(pipeline, catalog, data_root=".", policy=None):
    policy_text = json.dumps(policy) if policy is not None else None
    return json.loads(_core.plans(str(pipeline), str(catalog), str(data_root), policy_text))


def parse_step(text):
    return json.loads(_core.parse_step(text))


def format_step(step):
    return _core.format_step(json.dumps(step))


def select_plan(estimates, policy):
    """Name of the chosen entry among dicts with name, cost_usd, time_s and quality."""
    return _core.select_plan(json.dumps(list(estimates)), json.dumps(policy))


class Agent:
    """Chat session whose reasoning model replays `script` in order."""

    def __init__(self, dataset_root, catalog, mock_rules, script):
        self._agent = _core.ScriptedAgent(str(dataset_root), str(catalog), str(mock_rules), list(script))

    def send(self, message):
        """Steps appended while handling `message`."""
        return json.loads(self._agent.send(message))

    @property
    def state(self):
        return json.loads(self._agent.state())

    def export(self):
        pipeline_file, script = self._agent.export_bundle()
        return pipeline_file, script
