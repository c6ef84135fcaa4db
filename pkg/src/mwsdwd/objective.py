"""DWD loss, the three penalty variants, and the full penalized objective."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .tensor import assemble, check_factors

COUPLED = "coupled"
SEPARABLE_L2 = "separable-l2"
TENSOR = "tensor"
PENALTY_VARIANTS = (COUPLED, SEPARABLE_L2, TENSOR)


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty variant and strengths.

    coupled:      lambda1 * sum_r prod_k ||u_kr||_1 + (lambda2/2) * ||B||_2^2
    separable-l2: lambda1 * sum_r prod_k ||u_kr||_1 + (lambda2/2) * sum_r prod_k ||u_kr||_2^2
    tensor:       lambda1 * ||B||_1 + (lambda2/2) * ||B||_2^2

    where B is the assembled coefficient tensor. The three coincide at rank 1.
    """

    variant: str = COUPLED
    lambda1: float = 0.0
    lambda2: float = 0.0

    def __post_init__(self):
        if self.variant not in PENALTY_VARIANTS:
            raise ValueError(
                f"unknown penalty variant {self.variant!r}, expected one of {PENALTY_VARIANTS}"
            )
        if not (self.lambda1 >= 0.0 and self.lambda2 >= 0.0):
            raise ValueError("lambda1 and lambda2 must be non-negative")


def dwd_loss(u):
    """V(u) = 1 - u for u <= 1/2, else 1/(4u). Scalar in, scalar out; arrays ok."""
    u = np.asarray(u, dtype=np.float64)
    hi = u > 0.5
    safe = np.where(hi, u, 1.0)
    out = np.where(hi, 0.25 / safe, 1.0 - u)
    return float(out) if out.ndim == 0 else out


def dwd_loss_deriv(u):
    """V'(u) = -1 for u <= 1/2, else -1/(4u^2); continuous at the branch point."""
    u = np.asarray(u, dtype=np.float64)
    hi = u > 0.5
    safe = np.where(hi, u, 1.0)
    out = np.where(hi, -0.25 / (safe * safe), -1.0)
    return float(out) if out.ndim == 0 else out


def penalty(factors, spec):
    """Penalty value of a CP factor set under the given spec."""
    factors, rank = check_factors(factors)
    if spec.variant == TENSOR:
        b = assemble(factors)
        return float(spec.lambda1 * np.sum(np.abs(b)) + 0.5 * spec.lambda2 * np.sum(b * b))
    prod_l1 = np.ones(rank)
    for u in factors:
        prod_l1 *= np.sum(np.abs(u), axis=0)
    l1 = spec.lambda1 * float(prod_l1.sum())
    if spec.variant == COUPLED:
        b = assemble(factors)
        return l1 + 0.5 * spec.lambda2 * float(np.sum(b * b))
    prod_sq = np.ones(rank)
    for u in factors:
        prod_sq *= np.sum(u * u, axis=0)
    return l1 + 0.5 * spec.lambda2 * float(prod_sq.sum())


def decision_scores(x, factors, b0):
    """b0 + <X_i, B> for stacked predictors x of shape (N, P_1..P_K)."""
    x = np.asarray(x, dtype=np.float64)
    b = assemble(factors)
    if x.shape[1:] != b.shape:
        raise DimensionError(f"predictor dims {x.shape[1:]} vs coefficient dims {b.shape}")
    return x.reshape(x.shape[0], -1) @ b.ravel() + b0


def margins(data, factors, b0):
    """y_i * (b0 + <X_i, B>) per subject."""
    return data.y * decision_scores(data.x, factors, b0)


def objective(data, factors, b0, spec):
    """(1/N) sum_i V(y_i (b0 + <X_i, B>)) + penalty(factors, spec)."""
    mu = margins(data, factors, b0)
    return float(np.mean(dwd_loss(mu))) + penalty(factors, spec)
