"""Python front end of the stablab core."""

import json

from . import _core
from ._core import InvalidInput, Objective, Unsupported, bound_ids, tstar

__all__ = [
    "InvalidInput",
    "Objective",
    "Unsupported",
    "bound_ids",
    "check_cocoercive",
    "check_descent",
    "check_update_expansiveness",
    "constants",
    "coupled_run",
    "estimate_constants",
    "evaluate_bound",
    "make_hard_instance",
    "make_neighbors",
    "make_objective",
    "run",
    "run_cli",
    "schedule_alpha",
    "tstar",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def make_objective(config):
    return _core.make_objective(_text(config))


def constants(objective):
    return json.loads(objective.constants_json())


def make_hard_instance(config, n):
    return _core.make_hard_instance(_text(config), n)


def make_neighbors(distribution, n, i, seed, identical=False):
    return _core.make_neighbors(_text(distribution), n, i, seed, identical)


def estimate_constants(objective, N, seed):
    return json.loads(_core.estimate_constants(objective, N, seed))


def check_descent(objective, beta, eta, N, seed):
    return json.loads(_core.check_descent(objective, beta, eta, N, seed))


def check_cocoercive(objective, beta, eta, N, seed):
    return json.loads(_core.check_cocoercive(objective, beta, eta, N, seed))


def check_update_expansiveness(objective, alpha, mode, N, seed):
    return json.loads(_core.check_update_expansiveness(objective, alpha, mode, N, seed))


def schedule_alpha(schedule, t):
    return _core.schedule_alpha(_text(schedule), t)


def run(objective, S, schedule, scheme, T, seed, swa=False):
    return _core.run(objective, S, _text(schedule), scheme, T, seed, swa)


def coupled_run(objective, S, S_prime, differing_index, schedule, scheme, T, seed):
    return _core.coupled_run(objective, S, S_prime, differing_index, _text(schedule), scheme, T, seed)


def evaluate_bound(bound_id, inputs):
    return json.loads(_core.evaluate_bound(bound_id, _text(inputs)))


def run_cli(args):
    """Runs the command-line tool in-process; returns (exit code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
