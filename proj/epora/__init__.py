"""Equity-aware online resource allocation: generators, LP benchmark,
policy simulator, experiment runner.

Instances and metrics cross the boundary as JSON (strings or parsed dicts);
``simulate`` below returns the parsed dict.
"""

import json as _json

try:
    from . import _core
except ImportError:  # in-tree test runs put the extension on sys.path
    import _core  # type: ignore

EporaError = _core.EporaError

poisson_pmf = _core.poisson_pmf
truncated_poisson_mean = _core.truncated_poisson_mean
capacity_utilization = _core.capacity_utilization
alg_tau_envelope = _core.alg_tau_envelope

generate_lower_bound = _core.generate_lower_bound
generate_homogeneous = _core.generate_homogeneous
generate_table1 = _core.generate_table1
validate_instance = _core.validate_instance
apply_scarcity = _core.apply_scarcity
filter_min_capacity = _core.filter_min_capacity
solve_lp = _core.solve_lp
run_experiment = _core.run_experiment


def simulate(instance_json, policy, replications, seed, rho=-1.0, b_floor=1,
             cache_dir=""):
    """Run one policy; returns the metrics report as a dict."""
    return _json.loads(
        _core.simulate(instance_json, policy, replications, seed, rho,
                       b_floor, cache_dir))


__all__ = [
    "EporaError",
    "poisson_pmf",
    "truncated_poisson_mean",
    "capacity_utilization",
    "alg_tau_envelope",
    "generate_lower_bound",
    "generate_homogeneous",
    "generate_table1",
    "validate_instance",
    "apply_scarcity",
    "filter_min_capacity",
    "solve_lp",
    "simulate",
    "run_experiment",
]
