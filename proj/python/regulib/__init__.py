"""Adaptive internal-model regulator: synthesis, simulation and structural checks."""

import json

from ._regulib import (
    AnalysisError,
    ArgumentError,
    ConfigError,
    IntegrationError,
    RegulibError,
    SynthesisError,
    __version__,
    build_fg,
    deadzone,
    deadzone_vec,
    eig_min_symmetric,
    gain_K,
    hurwitz_coeffs,
    scenario_names,
    sigma,
    solve_lyapunov,
    tilde_e,
    verify_mato,
)
from . import _regulib


def scenario_parameters(name, **overrides):
    return json.loads(_regulib._scenario_parameters(name, json.dumps(overrides)))


def simulate(name, **overrides):
    """Run a registry scenario. Returns t, x (one row per sample), labels and metrics."""
    out = _regulib._simulate(name, json.dumps(overrides))
    out["metrics"] = json.loads(out["metrics"])
    return out


def pe_gram(name, L=0.0, **overrides):
    return json.loads(_regulib._pe_gram(name, json.dumps(overrides), L))


def probe(name, gain="k", max_doublings=11, floor=None, **overrides):
    return json.loads(_regulib._probe(name, gain, max_doublings, floor, json.dumps(overrides)))


def verify(name, **overrides):
    return json.loads(_regulib._verify(name, json.dumps(overrides)))
