"""Ice-storm resilience planning: scenario generation, planning and reports."""

import json
import os

from ._core import (
    ParseError,
    SolverError,
    ValidationError,
    accumulate_thickness,
    corridor_failure_prob,
    partition_horizon,
    penalty_at,
    repair_time_sample,
    run_cli,
    segment_failure_prob,
    solve_mps,
    wt_failure_prob,
)
from ._core import generate_scenarios as _generate

__all__ = [
    "ParseError",
    "SolverError",
    "ValidationError",
    "accumulate_thickness",
    "corridor_failure_prob",
    "generate_scenarios",
    "partition_horizon",
    "penalty_at",
    "plan",
    "repair_time_sample",
    "run_cli",
    "segment_failure_prob",
    "solve_mps",
    "wt_failure_prob",
]


def generate_scenarios(config, seed=None, count=None, threads=1):
    """Scenario set for `config` as a dict (meta plus one entry per scenario)."""
    return json.loads(_generate(os.fspath(config), seed, count, threads))


def plan(config, out, xi=None, mode=None, seed=None):
    """Runs `icegrid plan` and returns the parsed plan.json.

    Raises RuntimeError on usage or configuration errors; an infeasible plan
    is returned with ``feasible`` false.
    """
    args = ["plan", "--config", os.fspath(config), "--out", os.fspath(out)]
    if xi is not None:
        args += ["--xi", str(xi)]
    if mode is not None:
        args += ["--mode", mode]
    if seed is not None:
        args += ["--seed", str(seed)]
    code, _, err = run_cli(args)
    if code == 2:
        raise RuntimeError(err.strip())
    with open(os.path.join(os.fspath(out), "plan.json")) as f:
        return json.load(f)
