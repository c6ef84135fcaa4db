"""Synthetic two-class tensor data and the Monte Carlo study harness.

Class -1 predictors have standard normal entries (AR(1)-correlated along
each mode when rho > 0, with a separable Kronecker covariance); class +1
adds the mean tensor sqrt(alpha) * M, where M is assembled from CP factors
whose leading rows are standard normal and the rest zero. M is not
normalized, so the realized signal strength varies across truth draws
around alpha * prod(nonzero counts) in squared norm.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._util import resolve_threads
from .data import Dataset
from .errors import DataError, DimensionError, NumericalError
from .model import make_classifier, predict
from .objective import COUPLED, PENALTY_VARIANTS, PenaltySpec
from .solver import FitConfig, fit
from .tensor import assemble
from .tuning import DEFAULT_LAMBDA1_GRID, DEFAULT_LAMBDA2_GRID, CVConfig, select_lambdas

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimDesign:
    """dims are predictor extents; n is the total study size with equal
    classes; nonzero gives the per-mode count of leading rows carrying
    signal (None means dense); alpha scales the class mean; rho is the
    per-mode AR(1) noise correlation.
    """

    dims: tuple
    n: int
    true_rank: int = 1
    nonzero: tuple | None = None
    alpha: float = 0.2
    rho: float = 0.0
    seed: int = 0

    def __post_init__(self):
        dims = tuple(int(p) for p in self.dims)
        if len(dims) == 0 or any(p < 1 for p in dims):
            raise ValueError("dims must be positive extents")
        object.__setattr__(self, "dims", dims)
        if self.n < 2 or self.n % 2:
            raise ValueError("n must be even (equal classes) and >= 2")
        if self.true_rank < 1:
            raise ValueError("true_rank must be >= 1")
        if self.nonzero is not None:
            nz = tuple(int(c) for c in self.nonzero)
            if len(nz) != len(dims) or any(not 1 <= c <= p for c, p in zip(nz, dims)):
                raise ValueError("nonzero counts must lie in [1, extent] per mode")
            object.__setattr__(self, "nonzero", nz)
        if not self.alpha >= 0.0:
            raise ValueError("alpha must be non-negative")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")


@dataclass(frozen=True)
class Metrics:
    cor: float
    mis: float
    tp: float
    tn: float | None


def _ar1_cholesky(p, rho):
    idx = np.arange(p)
    return np.linalg.cholesky(rho ** np.abs(idx[:, None] - idx[None, :]))


def _true_mean(design, ss):
    rng = np.random.default_rng(ss)
    nz = design.nonzero or design.dims
    facs = [rng.standard_normal((p, design.true_rank)) for p in design.dims]
    for u, c in zip(facs, nz):
        u[c:, :] = 0.0
    return math.sqrt(design.alpha) * assemble(facs)


def _draw_class_data(design, ss, mean):
    rng = np.random.default_rng(ss)
    half = design.n // 2
    x = rng.standard_normal((design.n, *design.dims))
    if design.rho > 0.0:
        for k, p in enumerate(design.dims):
            chol = _ar1_cholesky(p, design.rho)
            x = np.moveaxis(np.tensordot(x, chol, axes=([k + 1], [1])), -1, k + 1)
    x[half:] += mean
    y = np.concatenate([np.full(half, -1.0), np.full(half, 1.0)])
    return Dataset(x, y)


def _gen_with_ss(design, ss):
    truth_ss, train_ss, test_ss = ss.spawn(3)
    truth = _true_mean(design, truth_ss)
    train = _draw_class_data(design, train_ss, truth)
    test = _draw_class_data(design, test_ss, truth)
    return train, test, truth


def gen_dataset(design):
    """(train, test, true_mean); train and test are independent same-size draws."""
    return _gen_with_ss(design, np.random.SeedSequence(design.seed))


def eval_metrics(estimate, truth, test):
    """cor: Pearson correlation of the vectorized coefficient tensor with the
    truth; mis: test misclassification; tp/tn: exact-zero support recovery.
    tn is None when the truth has no zero entries.
    """
    bhat = assemble(estimate.factors)
    truth = np.asarray(truth, dtype=np.float64)
    if bhat.shape != truth.shape:
        raise DimensionError(f"coefficient dims {bhat.shape} vs truth {truth.shape}")
    ve, vt = bhat.ravel(), truth.ravel()
    nz = vt != 0.0
    if not nz.any():
        raise DataError("truth has no nonzero entries")
    ce = ve - ve.mean()
    ct = vt - vt.mean()
    den = math.sqrt(float(np.sum(ce * ce)) * float(np.sum(ct * ct)))
    if den == 0.0:
        raise NumericalError("zero variance in vectorized coefficients")
    cor = float(np.dot(ce, ct) / den)
    mis = float(np.mean(predict(estimate, test.x) != test.y))
    tp = float(np.mean(ve[nz] != 0.0))
    tn = float(np.mean(ve[~nz] == 0.0)) if (~nz).any() else None
    return Metrics(cor=cor, mis=mis, tp=tp, tn=tn)


@dataclass(frozen=True)
class MethodSpec:
    """One study method. tune=True selects (lambda1, lambda2) by CV per
    replicate over the given grids; tune=False fits at the fixed lambdas.
    vectorize flattens predictors to one mode first.
    """

    name: str
    rank: int = 1
    variant: str = COUPLED
    vectorize: bool = False
    tune: bool = True
    lambda1: float = 0.0
    lambda2: float = 0.25
    lambda1_grid: tuple = DEFAULT_LAMBDA1_GRID
    lambda2_grid: tuple = DEFAULT_LAMBDA2_GRID
    n_folds: int = 10
    n_starts: int = 5

    def __post_init__(self):
        if self.variant not in PENALTY_VARIANTS:
            raise ValueError(f"unknown penalty variant {self.variant!r}")
        if self.rank < 1 or self.n_folds < 2 or self.n_starts < 1:
            raise ValueError("rank, n_folds, n_starts out of range")


def builtin_method(name, rank=1):
    """Named study methods.

    m-sdwd: CV-tuned sparse fit; full-sdwd: the same on vectorized
    predictors; m-sdwd-l1zero and m-dwd: lambda1 pinned to 0 with lambda2
    still tuned; m-sdwd-separable-l2 / m-sdwd-tensor: CV-tuned under those
    variants.
    """
    table = {
        "m-sdwd": dict(tune=True),
        "full-sdwd": dict(tune=True, vectorize=True),
        "m-sdwd-l1zero": dict(tune=True, lambda1_grid=(0.0,)),
        "m-dwd": dict(tune=True, lambda1_grid=(0.0,)),
        "m-sdwd-separable-l2": dict(tune=True, variant="separable-l2"),
        "m-sdwd-tensor": dict(tune=True, variant="tensor"),
    }
    if name not in table:
        raise DataError(f"unknown method {name!r}, expected one of {sorted(table)}")
    return MethodSpec(name=name, rank=rank, **table[name])


@dataclass(frozen=True)
class StudyRow:
    method: str
    n_reps: int
    n_failed: int
    cor: float
    mis: float
    tp: float
    tn: float | None
    margin_cor: float
    margin_mis: float
    margin_tp: float
    margin_tn: float | None
    prop_cor_gt_half: float
    rank_retention: float


def _vectorized(dataset):
    return Dataset(dataset.x.reshape(dataset.n, -1), dataset.y)


def _warm_chain_fit(data, cfg, lambda1_grid):
    """Refit at the chosen cell the way CV reached it: sweep the grid's
    lambda1 values up to the target ascending, warm-starting each solve from
    the previous one. A cold multi-start at a moderate lambda1 can land on
    the all-zero stationary point; the chain stays in the basin the small
    lambda1 solution found.
    """
    target = cfg.penalty.lambda1
    warm, res = None, None
    for lam1 in lambda1_grid:
        if lam1 > target:
            break
        step = replace(cfg, penalty=replace(cfg.penalty, lambda1=lam1))
        res = fit(data, step, init=warm)
        warm = (res.factors, res.b0)
    return res


def _run_method(spec, train, test, truth, seeds):
    if spec.vectorize:
        train, test = _vectorized(train), _vectorized(test)
        truth = truth.ravel()
    template = FitConfig(
        rank=spec.rank,
        penalty=PenaltySpec(spec.variant, spec.lambda1, spec.lambda2),
        n_starts=spec.n_starts,
        seed=int(seeds[0]),
    )
    if spec.tune:
        cv = select_lambdas(
            train,
            CVConfig(
                n_folds=spec.n_folds,
                lambda1_grid=spec.lambda1_grid,
                lambda2_grid=spec.lambda2_grid,
                seed=int(seeds[1]),
                fit=template,
            ),
        )
        template = replace(
            template, penalty=PenaltySpec(spec.variant, *cv.chosen), seed=int(seeds[2])
        )
        res = _warm_chain_fit(train, template, cv.lambda1_grid)
    else:
        res = fit(train, template)
    clf = make_classifier(res, template.penalty, train.dims)
    met = eval_metrics(clf, truth, test)
    return met, res.effective_rank == spec.rank


def _mean_and_margin(values):
    vals = np.asarray(values, dtype=np.float64)
    mean = float(vals.mean())
    margin = 2.0 * float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    return mean, margin


def run_study(design, methods, n_reps, n_threads=None):
    """Replicated comparison of methods on one design.

    Every method inside a replicate sees the same train/test draw. Rows
    report means with 2-standard-deviation margins across replicates, the
    proportion of replicates with cor > 0.5, and the fraction retaining the
    full fitted rank. Per-replicate failures are recorded, not fatal.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    specs = [m if isinstance(m, MethodSpec) else builtin_method(m) for m in methods]
    if len(specs) == 0:
        raise DataError("no methods given")
    rep_children = np.random.SeedSequence(design.seed).spawn(n_reps)

    def one_rep(rep):
        streams = rep_children[rep].spawn(1 + len(specs))
        train, test, truth = _gen_with_ss(design, streams[0])
        out = []
        for j, spec in enumerate(specs):
            seeds = streams[1 + j].generate_state(3, np.uint64)
            try:
                out.append(_run_method(spec, train, test, truth, seeds))
            except (DataError, DimensionError, NumericalError) as e:
                log.warning("replicate %d method %s failed: %s", rep, spec.name, e)
                out.append(None)
        return out

    workers = resolve_threads(n_threads)
    if workers > 1 and n_reps > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(one_rep, range(n_reps)))
    else:
        per_rep = [one_rep(rep) for rep in range(n_reps)]

    rows = []
    for j, spec in enumerate(specs):
        oks = [per_rep[rep][j] for rep in range(n_reps) if per_rep[rep][j] is not None]
        n_failed = n_reps - len(oks)
        if not oks:
            rows.append(StudyRow(spec.name, n_reps, n_failed, math.nan, math.nan,
                                 math.nan, None, math.nan, math.nan, math.nan, None,
                                 math.nan, math.nan))
            continue
        mets = [m for m, _ in oks]
        cor, m_cor = _mean_and_margin([m.cor for m in mets])
        mis, m_mis = _mean_and_margin([m.mis for m in mets])
        tp, m_tp = _mean_and_margin([m.tp for m in mets])
        if mets[0].tn is None:
            tn = m_tn = None
        else:
            tn, m_tn = _mean_and_margin([m.tn for m in mets])
        prop = float(np.mean([m.cor > 0.5 for m in mets]))
        retention = float(np.mean([ret for _, ret in oks]))
        rows.append(StudyRow(spec.name, n_reps, n_failed, cor, mis, tp, tn,
                             m_cor, m_mis, m_tp, m_tn, prop, retention))
    return rows
