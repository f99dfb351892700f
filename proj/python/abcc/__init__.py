"""Byzantine-tolerant atomic register under continuous churn.

Thin wrapper over the native module: parameter constraint checking,
deterministic simulation, trace checking and the uniform-threshold
counterexample.
"""

try:
    # installed wheel: the extension lives inside the package
    from ._abcc import (
        check_params,
        check_trace,
        counterexample_uniform,
        feasible_interval,
        min_ns_min,
        run_scenario,
        simulate,
        strategy_names,
        table_report,
    )
except ImportError:  # development build: extension on PYTHONPATH
    from _abcc import (
        check_params,
        check_trace,
        counterexample_uniform,
        feasible_interval,
        min_ns_min,
        run_scenario,
        simulate,
        strategy_names,
        table_report,
    )

__all__ = [
    "check_params",
    "check_trace",
    "counterexample_uniform",
    "feasible_interval",
    "min_ns_min",
    "run_scenario",
    "simulate",
    "strategy_names",
    "table_report",
]
