"""Shipped Gumbel calibration coefficients for lattice dimensions 2 and 3.

The dual sup-norm statistic on an N^d lattice under white noise is well
approximated by a Gumbel law whose location mu(N) and scale beta(N) obey

    log mu(N)   = a_mu   + b_mu   * log(log N)
    log beta(N) = a_beta + b_beta * log(log N)

The constants below come from Monte Carlo calibration (200 draws per side
length, side lengths 8..1024 for d=2 and 8..64 for d=3, Gumbel maximum
likelihood per side, then least squares on the log-log scale). They can be
regenerated with the lambda-sample / lambda-fit command line tools and
overridden by pointing --coeffs at the resulting fit file.
"""
from __future__ import annotations

import json

from .lambda_stat import GumbelFitCoefficients

DEFAULT_COEFFICIENTS = {
    2: GumbelFitCoefficients(a_mu=-0.395, b_mu=0.552,
                             a_beta=-1.512, b_beta=-0.247, dim=2),
    3: GumbelFitCoefficients(a_mu=-0.523, b_mu=0.267,
                             a_beta=-2.008, b_beta=-0.598, dim=3),
}


def default_coefficients(dim: int) -> GumbelFitCoefficients:
    try:
        return DEFAULT_COEFFICIENTS[dim]
    except KeyError:
        raise ValueError(
            "no shipped calibration for dimension %d; supply a fit file" % dim
        ) from None


def load_coefficients(path) -> GumbelFitCoefficients:
    """Read coefficients from a fit JSON (as written by the lambda-fit tool)."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        return GumbelFitCoefficients(
            a_mu=float(obj["a_mu"]), b_mu=float(obj["b_mu"]),
            a_beta=float(obj["a_beta"]), b_beta=float(obj["b_beta"]),
            dim=int(obj["dim"]))
    except KeyError as exc:
        raise ValueError("fit file %s is missing field %s" % (path, exc))
