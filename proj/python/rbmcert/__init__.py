"""Stability certificates and tail checks for reflected Brownian motion.

Thin wrappers over the compiled ``_core`` module. Functions ending in
``_json`` in the core return JSON text; the wrappers here decode it.
"""

import json

from . import _core
from ._core import (
    CapabilityError,
    DomainError,
    Error,
    InputError,
    NumericalError,
    PolyhedralCone,
    SrbmSpec,
    VerificationError,
    command_names,
    compute_k_const,
    compute_lambda_max,
    fit_tail_rate,
    gap_system,
    is_completely_s,
    is_reflection_nonsingular_m,
    is_s_matrix,
    is_strictly_copositive,
    is_z_matrix,
    minimize_quadratic_on_simplex,
    philox4x32,
    r_spectrum,
    sample_stationary,
    skorohod_solve_orthant,
    u_eval,
    v_eval,
)

__all__ = [
    "CapabilityError", "DomainError", "Error", "InputError", "NumericalError", "PolyhedralCone",
    "SrbmSpec", "VerificationError", "certify", "check_conditions", "classify",
    "command_names", "compute_k_const", "compute_lambda_max", "fit_tail_rate",
    "gap_system", "is_completely_s", "is_reflection_nonsingular_m", "is_s_matrix",
    "is_strictly_copositive", "is_z_matrix", "m_matrix_certificate",
    "minimize_quadratic_on_simplex", "philox4x32", "r_spectrum", "run_command",
    "sample_stationary", "skorohod_solve_orthant", "stability_check", "u_eval", "v_eval",
]


def classify(matrix):
    return json.loads(_core.classify_json(matrix))


def check_conditions(spec, q):
    return json.loads(_core.check_conditions_json(spec, q))


def certify(spec, q, lambda_fraction=0.5):
    return json.loads(_core.certify_json(spec, q, lambda_fraction))


def m_matrix_certificate(r, mu):
    return json.loads(_core.m_matrix_certificate_json(r, mu))


def stability_check(g, sigma2, q_plus=None):
    return json.loads(_core.stability_check_json(g, sigma2, q_plus))


def run_command(name, problem):
    """Run a CLI command on a problem dict. Returns (exit_code, result, summary)."""
    code, text, summary = _core.run_command_json(name, json.dumps(problem))
    return code, json.loads(text), list(summary)
