"""Pairwise-likelihood models for mixed ordinal and Gaussian responses.

Thin convenience layer over the compiled ``_core`` module: the heavy lifting
(likelihood evaluation, optimization, sandwich covariance) happens in C++.
"""

import json as _json

from ._core import (
    bvn_cdf,
    bvn_pdf,
    count_parameters,
    parse_formula,
    render_report,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from ._core import fit_csv as _fit_csv
from ._core import simulate_to_csv as _simulate_to_csv
from ._core import toy_config_json as _toy_config_json

__all__ = [
    "bvn_cdf",
    "bvn_pdf",
    "count_parameters",
    "fit",
    "parse_formula",
    "render_report",
    "simulate",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "toy_config",
]

__version__ = "0.1.0"


def fit(data_path, formula, types, *, na="fail", solver="bfgs", standardize=True,
        se=True, threads=1, max_iter=500, tol=1e-5, seed=1):
    """Fit a model to a CSV file and return the result as a dict.

    ``types`` names one of ``"ordinal"``/``"gaussian"`` per response in the
    formula, either as a sequence or as a comma-separated string. The
    returned dict is the same document the CLI writes with ``fit --out``;
    pass it to :func:`render_report` (re-serialized with ``json.dumps``)
    for the human-readable table.
    """
    if isinstance(types, str):
        types = [t.strip() for t in types.split(",")]
    raw = _fit_csv(str(data_path), formula, list(types), na=na, solver=solver,
                   standardize=standardize, se=se, threads=threads,
                   max_iter=max_iter, tol=tol, seed=seed)
    return _json.loads(raw)


def toy_config():
    """Simulation config for the built-in demonstration model, as a dict."""
    return _json.loads(_toy_config_json())


def simulate(config, out_path):
    """Draw a dataset from ``config`` (a dict) and write it as CSV."""
    _simulate_to_csv(_json.dumps(config), str(out_path))
