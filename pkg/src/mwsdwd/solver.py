"""Penalized multiway DWD fitting.

Outer loop: alternate over modes, each mode solved by MM-majorized cyclic
coordinate descent (see _sweeps), intercept refreshed inside every block.
Multi-start with path pruning guards against bad local optima.
"""

from dataclasses import dataclass, field

import numpy as np

from . import tensor
from ._sweeps import VARIANT_CODE, _sweep_block
from .data import Dataset, Standardizer
from .errors import DataError, DimensionError, NumericalError
from .objective import (COUPLED, SEPARABLE_L2, PenaltySpec, dwd_loss,
                        penalty as penalty_value)


@dataclass(frozen=True)
class FitConfig:
    """Solver settings.

    epsilon is relative: the outer loop stops when the squared change of the
    assembled coefficient tensor falls below epsilon * max(1, ||B||^2); the
    inner sweeps reuse it scaled to the block. n_starts random initializations
    (factor entries Uniform[0,1], intercept 0) run for prune_after outer
    iterations, then only the best objective continues.
    """

    rank: int = 1
    penalty: PenaltySpec = field(default_factory=PenaltySpec)
    epsilon: float = 1e-6
    max_outer: int = 500
    max_inner: int = 1000
    n_starts: int = 5
    prune_after: int = 3
    seed: int = 0
    standardize: bool = False

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.prune_after < 1:
            raise ValueError("prune_after must be >= 1")


@dataclass(frozen=True)
class FitResult:
    factors: list
    b0: float
    objective_trace: tuple
    converged: bool
    effective_rank: int
    n_outer: int
    chosen_start: int
    standardizer: Standardizer | None = None


def soft_threshold(z, g):
    """sign(z) * max(|z| - g, 0)."""
    if g < 0:
        raise ValueError("threshold must be non-negative")
    az = abs(z) - g
    if az <= 0.0:
        return 0.0
    return az if z > 0 else -az


def effective_rank(factors, rel_tol=0.01):
    """Singular values of the mode-0 unfolding above rel_tol x the largest.

    Zero tensor gives 0. Diagnoses penalty-induced rank shrinkage of a
    nominally rank-R fit.
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    b = tensor.assemble(factors)
    if not b.any():
        return 0
    sv = np.linalg.svd(tensor.matricize(b, 0), compute_uv=False)
    return int(np.sum(sv > rel_tol * sv[0]))


class _Path:
    __slots__ = ("factors", "b0", "margins", "trace", "prev_b", "delta", "ref", "start")

    def __init__(self, factors, b0, start):
        self.factors = factors
        self.b0 = float(b0)
        self.start = start
        self.margins = None
        self.trace = []
        self.prev_b = None
        self.delta = np.inf
        self.ref = 1.0


def _distributed_l1_weights(factors, mode):
    rank = factors[0].shape[1]
    q = np.ones(rank)
    for k, u in enumerate(factors):
        if k != mode:
            q *= np.abs(u).sum(axis=0)
    return q


def update_block(path, x, y, mode, cfg):
    """One mode's full inner solve; mutates path.factors[mode], margins, b0.

    Components whose column is entirely zero in some other mode contribute
    nothing through this mode (their contracted columns vanish), so they are
    pinned at zero here; the objective is unchanged by that pinning.
    """
    facs = path.factors
    u = facs[mode]
    rank = u.shape[1]
    dead = np.zeros(rank, dtype=np.int64)
    for r in range(rank):
        for k, other in enumerate(facs):
            if k != mode and not other[:, r].any():
                dead[r] = 1
                break
    if dead.any():
        u[:, dead == 1] = 0.0
    xt = tensor.project_out_batch(x, facs, mode)
    xtc = np.ascontiguousarray(np.moveaxis(xt, 0, 2))
    # majorizer: the loss curvature is at most 4, so 4 * mean_i xt_i^2
    # bounds the averaged quadratic term; floor at 4 so small contracted
    # predictors never produce a degenerate step size
    quad = 4.0 * np.maximum(1.0, np.mean(xtc * xtc, axis=2))
    w = tensor.gram_hadamard(facs, exclude=mode)
    spec = cfg.penalty
    code = VARIANT_CODE[spec.variant]
    if spec.variant in (COUPLED, SEPARABLE_L2):
        q = _distributed_l1_weights(facs, mode)
        oc = np.zeros((1, rank))
    else:
        q = np.zeros(rank)
        oc = np.ascontiguousarray(tensor.outer_columns(facs, exclude=mode))
    tol = cfg.epsilon * max(1.0, float(np.sum(u * u)) + path.b0 * path.b0)
    b0_new, sweeps = _sweep_block(
        u, path.margins, xtc, y, w, q, quad, oc, dead, path.b0,
        spec.lambda1, spec.lambda2, code, cfg.max_inner, tol)
    path.b0 = float(b0_new)
    return sweeps


def _refresh(path, xflat, y, spec):
    """Recompute margins from scratch and append the objective."""
    b = tensor.assemble(path.factors)
    path.margins[:] = y * (xflat @ b.ravel() + path.b0)
    path.trace.append(float(np.mean(dwd_loss(path.margins))) + penalty_value(path.factors, spec))
    return b


def fit(data, cfg, init=None):
    """Fit the model; returns the best of n_starts paths (single path when
    init=(factors, b0) warm-starts the solve).
    """
    x = np.asarray(data.x, dtype=np.float64)
    y = np.ascontiguousarray(data.y, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        raise DataError("need at least 2 subjects")
    if any(p == 0 for p in x.shape[1:]):
        raise DataError("predictor has an empty mode")
    npos = int(np.sum(y > 0))
    if npos == 0 or npos == n:
        raise DataError("both classes must be present")
    if not np.isfinite(x).all():
        raise NumericalError("non-finite predictor values")
    std = None
    if cfg.standardize:
        std = Standardizer.from_data(x)
        x = std.transform(x)
    x = np.ascontiguousarray(x)
    xflat = x.reshape(n, -1)
    dims = x.shape[1:]
    spec = cfg.penalty

    paths = []
    if init is not None:
        f0, b00 = init
        f0, r0 = tensor.check_factors(f0)
        if r0 != cfg.rank:
            raise DimensionError(f"warm start rank {r0} but config rank {cfg.rank}")
        if tuple(u.shape[0] for u in f0) != dims:
            raise DimensionError("warm start factor rows do not match predictor dims")
        paths.append(_Path([u.copy() for u in f0], b00, 0))
    else:
        for s_idx, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.n_starts)):
            rng = np.random.default_rng(child)
            facs = [rng.random((p, cfg.rank)) for p in dims]
            paths.append(_Path(facs, 0.0, s_idx))

    for path in paths:
        path.margins = np.empty(n)
        path.prev_b = _refresh(path, xflat, y, spec)

    active = paths
    it = 0
    converged = False
    while it < cfg.max_outer:
        it += 1
        for path in active:
            for k in range(len(dims)):
                update_block(path, x, y, k, cfg)
                if not (np.isfinite(path.factors[k]).all() and np.isfinite(path.b0)):
                    raise NumericalError(
                        f"non-finite values updating mode {k} at outer iteration {it}"
                    )
            b_new = _refresh(path, xflat, y, spec)
            diff = b_new - path.prev_b
            path.delta = float(np.sum(diff * diff))
            path.ref = max(1.0, float(np.sum(path.prev_b * path.prev_b)))
            path.prev_b = b_new
        if len(active) > 1 and it >= cfg.prune_after:
            active = [min(active, key=lambda p: p.trace[-1])]
        if len(active) == 1 and active[0].delta <= cfg.epsilon * active[0].ref:
            converged = True
            break

    win = min(active, key=lambda p: p.trace[-1])
    return FitResult(
        factors=win.factors,
        b0=win.b0,
        objective_trace=tuple(win.trace),
        converged=converged,
        effective_rank=effective_rank(win.factors),
        n_outer=it,
        chosen_start=win.start,
        standardizer=std,
    )
