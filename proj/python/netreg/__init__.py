"""Regularized 2SLS for social interaction models with many network instruments."""

from ._core import (
    InputError,
    NumericalError,
    distinct_eigenvalues,
    estimate,
    estimate_csv,
    identification_verdict,
    lee_matrix,
    projector,
    q_weights,
    simulate,
)

__all__ = [
    "InputError",
    "NumericalError",
    "distinct_eigenvalues",
    "estimate",
    "estimate_csv",
    "identification_verdict",
    "lee_matrix",
    "projector",
    "q_weights",
    "simulate",
]
