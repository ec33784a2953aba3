"""Rough-path, transport and concentration experiments."""

import json

from ._roughlab import (
    cm_norm,
    gaussian_kl,
    gaussian_w2,
    homog_pvar_norm,
    lift_level2,
    list_experiments,
    n_alpha,
    p_variation,
    p_variation_bruteforce,
    rho_pvar,
    sample_brownian,
    sobolev_norm,
    solve_assignment,
    t2_check,
    tail_fit,
    translated_level2,
    version,
    wasserstein,
)
from ._roughlab import _run_experiment_json

__version__ = version()


def run_experiment(config):
    """Run an experiment config (dict or JSON text) in memory.

    Returns a dict with the report CSV text, the overall verdict and the summary.
    """
    text = config if isinstance(config, str) else json.dumps(config)
    csv, holds, summary = _run_experiment_json(text)
    return {"csv": csv, "holds": holds, "summary": json.loads(summary)}
