"""Two qubits in a common Lorentzian bath: non-Markovian quantum state diffusion,
master equations and closed-form solutions, with concurrence and fidelity."""

import json

from ._core import (
    ConfigError,
    ModelParams,
    NumericalError,
    analytic_concurrence,
    analytic_rdm,
    concurrence,
    fidelity,
    integrate_master,
    preset_state,
    run_ensemble,
)
from . import _core

__all__ = [
    "ConfigError",
    "ModelParams",
    "NumericalError",
    "analytic_concurrence",
    "analytic_rdm",
    "concurrence",
    "density",
    "fidelity",
    "integrate_master",
    "preset_state",
    "run_command",
    "run_ensemble",
    "steady_state",
]


def density(psi):
    """|psi><psi| for a length-4 state vector."""
    import numpy as np

    psi = np.asarray(psi, dtype=complex).reshape(4)
    return np.outer(psi, psi.conj())


def steady_state(rho0, params, t_ref=0.0):
    return json.loads(_core.steady_state(rho0, params, t_ref))


def run_command(command, config, output="", threads=0):
    """Runs a CLI subcommand on a config dict. Returns (exit_code, log_text)."""
    return _core.run_command(command, json.dumps(config), output, threads)
