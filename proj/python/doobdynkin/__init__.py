"""Python bindings for the doobdynkin library."""

import json as _json

from ._core import (
    DEFAULT_SEED,
    DegenerateBasis,
    ImproperPriorNeedsTruncation,
    NonSigmaFinite,
    NotMeasurable,
    SchemaError,
    StepTooLarge,
    UndefinedFiber,
    cli,
    condexp,
    divergence,
    factorize,
    fiducial,
    kalman_mse,
    riccati,
)
from ._core import finite_risk as _finite_risk
from ._core import project as _project

__all__ = [
    "DEFAULT_SEED",
    "DegenerateBasis",
    "ImproperPriorNeedsTruncation",
    "NonSigmaFinite",
    "NotMeasurable",
    "SchemaError",
    "StepTooLarge",
    "UndefinedFiber",
    "cli",
    "condexp",
    "divergence",
    "factorize",
    "fiducial",
    "finite_risk",
    "kalman_mse",
    "project",
    "riccati",
]


def project(ys, gammas, features, ridge=None, min_norm=False):
    """Least-squares fit of gammas on features of ys.

    `features` is a list of dicts such as {"kind": "power", "degree": 1}.
    """
    return _project(list(ys), list(gammas), _json.dumps({"features": list(features)}), ridge, min_norm)


def finite_risk(model):
    """Risks of the posterior-mean rule; `model` is a dict or a JSON string."""
    return _finite_risk(model if isinstance(model, str) else _json.dumps(model))
