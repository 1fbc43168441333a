"""Two-layer ReLU networks trained on hinge loss, with geometric-condition
checks, phase detection, landscape audits and the experiment commands."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import (
    ConfigError,
    _cmd_gc_prob,
    _cmd_landscape_audit,
    _cmd_norm_hist,
    _cmd_sweep_angle,
    _cmd_sweep_width,
    _cmd_trace_dynamics,
    _cmd_train,
)

_COMMANDS = {
    "train": _cmd_train,
    "sweep-angle": _cmd_sweep_angle,
    "sweep-width": _cmd_sweep_width,
    "norm-hist": _cmd_norm_hist,
    "gc-prob": _cmd_gc_prob,
    "trace-dynamics": _cmd_trace_dynamics,
    "landscape-audit": _cmd_landscape_audit,
}


def run_command(name, config=None, out="out", seed=None, runs=None, threads=1):
    """Run an experiment command with a config dict; outputs go to `out`."""
    try:
        fn = _COMMANDS[name]
    except KeyError:
        raise ConfigError(f"unknown command {name!r}; expected one of {sorted(_COMMANDS)}") from None
    fn(_json.dumps(config or {}), str(out), seed=seed, runs=runs, threads=threads)
    return out


__all__ = [name for name in dir() if not name.startswith("_")]
