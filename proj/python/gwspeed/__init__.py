"""Biased random walks on Galton-Watson trees: speeds, couplings and bias thresholds."""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    DegenerateCoupling,
    DominanceViolation,
    Error,
    InvalidDistribution,
    PreconditionError,
    Progeny,
    SeriesDivergent,
    __version__,
    acceptance_rate,
    alpha,
    audit_tables,
    beta1,
    closed_form_regular,
    dominates,
    ell_constant,
    ell_fold_check,
    ell_threshold,
    find_k,
    lower_bound_gap,
    numeric_threshold,
    quantile_coupling,
    speed_aidekon,
    speed_ergodic,
    speed_regen,
)
from ._core import run_experiment as _run_experiment


def run_experiment(kind, config, seed=None, workers=None, out=None):
    """Run one CLI experiment and return its result with parsed summary and manifest."""
    r = _run_experiment(kind, str(config), seed, workers, None if out is None else str(out))
    r["summary"] = _json.loads(r["summary"])
    r["manifest"] = _json.loads(r["manifest"])
    return r
