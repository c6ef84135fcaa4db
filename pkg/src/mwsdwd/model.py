"""Classifier wrapper and the factor normalization used for reporting."""

from dataclasses import dataclass

import numpy as np

from .data import Standardizer
from .errors import DimensionError
from .objective import PenaltySpec
from .tensor import assemble, check_factors


@dataclass(frozen=True)
class Classifier:
    factors: list
    b0: float
    penalty: PenaltySpec
    dims: tuple
    n_train: int = 0
    seed: int = 0
    standardizer: Standardizer | None = None


def make_classifier(res, penalty, dims, n_train=0, seed=0):
    """Wrap a FitResult for scoring and serialization."""
    return Classifier(
        factors=res.factors,
        b0=res.b0,
        penalty=penalty,
        dims=tuple(int(p) for p in dims),
        n_train=int(n_train),
        seed=int(seed),
        standardizer=res.standardizer,
    )


def score(m, x):
    """Decision score <x, B> + b0; accepts one tensor or a stacked batch."""
    x = np.asarray(x, dtype=np.float64)
    single = x.shape == m.dims
    if not single and x.shape[1:] != m.dims:
        raise DimensionError(f"predictor shape {x.shape} does not match model dims {m.dims}")
    if m.standardizer is not None:
        x = m.standardizer.transform(x)
    b = assemble(m.factors)
    if single:
        return float(np.sum(x * b) + m.b0)
    return x.reshape(x.shape[0], -1) @ b.ravel() + m.b0


def predict(m, x):
    """Label by the sign of the score; a score of exactly 0 classifies +1."""
    s = score(m, x)
    if np.ndim(s) == 0:
        return 1.0 if s >= 0 else -1.0
    return np.where(np.asarray(s) >= 0, 1.0, -1.0)


def normalize_factors(factors):
    """Canonical CP scaling: modes beyond the first get unit L2 columns with
    their largest-absolute entry positive (ties break to the lower index);
    magnitudes and compensating signs are absorbed into mode 0. The assembled
    tensor is unchanged; zero columns pass through; idempotent. K=1 factor
    sets are returned as copies unchanged.
    """
    factors, rank = check_factors(factors)
    out = [u.copy() for u in factors]
    for r in range(rank):
        for k in range(1, len(out)):
            col = out[k][:, r]
            nrm = float(np.sqrt(np.sum(col * col)))
            if nrm > 0.0:
                col /= nrm
                out[0][:, r] *= nrm
            imax = int(np.argmax(np.abs(col)))
            if col[imax] < 0.0:
                col *= -1.0
                out[0][:, r] *= -1.0
    return out
