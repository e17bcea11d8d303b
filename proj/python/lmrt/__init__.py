"""Recursive trees with limited memory.

Schedules are plain dicts, the same objects a sweep config uses::

    {"type": "mesoscopic", "beta": 0.5}
    {"type": "macroscopic", "theta": 0.5}
    {"type": "sarrt_uniform", "theta": 0.0}
    {"type": "full_memory"}
    {"type": "custom_j", "j": [1, 1, 2, ...]}
"""

import json

from ._lmrt import (  # noqa: F401
    GENERATOR,
    IoError,
    NumericError,
    Tree,
    alpha_max,
    branchpoint_cdf,
    branchpoint_sample,
    branchpoint_statistics,
    chain_fluid_deviation,
    derive_seed,
    dkw_epsilon,
    enumerate_shapes,
    explore_ancestral_lines,
    f_beta,
    height_constant_meso,
    height_constants,
    kappa,
    ks_one_sample,
    lambda_mgf,
    legendre,
    macro_degree_pmf,
    meso_degree_pmf,
    mu_of,
    n_j_count,
    phi,
    poisson_gw_shape_probability,
    psi,
    sample_macro_fringe,
    sample_poisson_gw,
    simulate_chain,
    tree_from_csv,
    tv_distance,
)
from . import _lmrt


def mesoscopic(beta):
    return {"type": "mesoscopic", "beta": beta}


def macroscopic(theta):
    return {"type": "macroscopic", "theta": theta}


def sarrt_uniform(theta=0.0):
    return {"type": "sarrt_uniform", "theta": theta}


def grow_tree(schedule, n, seed):
    """Grow T_n and keep the full parent array."""
    return _lmrt._grow_tree(json.dumps(schedule), n, seed)


def grow_streaming(schedule, n, seed):
    """Height and degree histogram without storing the tree."""
    return _lmrt._grow_streaming(json.dumps(schedule), n, seed)


def describe(schedule):
    return _lmrt._describe(json.dumps(schedule))


def spanned_subtree(tree, leaves):
    return json.loads(_lmrt.spanned_subtree(tree, list(leaves)))


def run_sweep(config):
    """Run a sweep config (dict) and return the report as a dict."""
    return json.loads(_lmrt._run_sweep(json.dumps(config)))
