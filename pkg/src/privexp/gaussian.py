"""Exact exponent for jointly Gaussian sources under both budget constraints.

The optimum reduces to a single correlation shrinkage: each budget B
multiplies the usable squared correlation by (1 - 2^{-2B}), so

    theta(rho, R, L) = -0.5 * log2(1 - rho^2 (1 - 2^{-2R}) (1 - 2^{-2L})).

``math.inf`` is accepted for either budget and evaluates the analytic limit.
The one-parameter achievability curve below traces the same optimum over the
variance beta^2 of the quantization noise; its rate-feasible boundary point
recovers the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InfeasibleBeta

__all__ = ["GaussianQuery", "gaussian_tai_exponent", "gaussian_achievable_at_beta"]


@dataclass(frozen=True)
class GaussianQuery:
    """Correlation under the null plus the two budgets, all in bits."""

    rho: float
    rate: float
    leak: float

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise DomainError(f"correlation {self.rho!r} outside [0, 1]")
        if self.rate < 0.0 or self.leak < 0.0:
            raise DomainError("rate and leak must be nonnegative")


def _shrink(budget: float) -> float:
    # 1 - 2^{-2B}, with B = inf giving exactly 1
    if math.isinf(budget):
        return 1.0
    return 1.0 - 2.0 ** (-2.0 * budget)


def gaussian_tai_exponent(q: GaussianQuery) -> float:
    inner = 1.0 - q.rho * q.rho * _shrink(q.rate) * _shrink(q.leak)
    if inner <= 0.0:
        return math.inf
    return -0.5 * math.log2(inner)


def gaussian_achievable_at_beta(q: GaussianQuery, beta_sq: float) -> float:
    """Exponent of the explicit auxiliary choice with quantization noise beta_sq.

    Feasibility: 2^{-2R} (1 - 2^{-2L}) <= beta_sq <= 1 - 2^{-2L}. The lower
    boundary saturates the rate budget and attains the closed form; the upper
    one leaves the description empty and yields zero.
    """
    shrink_l = _shrink(q.leak)
    lo = (1.0 - _shrink(q.rate)) * shrink_l
    hi = shrink_l
    if not lo - 1e-15 <= beta_sq <= hi + 1e-15:
        raise InfeasibleBeta(
            f"beta_sq = {beta_sq!r} outside the feasible range "
            f"[{lo:.6g}, {hi:.6g}]"
        )
    inner = 1.0 - q.rho * q.rho * (shrink_l - beta_sq)
    if inner <= 0.0:
        return math.inf
    return -0.5 * math.log2(inner)
