"""Cross-validated (lambda1, lambda2) selection by out-of-fold score t-statistic."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset
from .errors import DataError, DimensionError, NumericalError
from .objective import PenaltySpec
from .solver import FitConfig, fit
from .tensor import assemble

DEFAULT_LAMBDA1_GRID = (1e-4, 0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0)
DEFAULT_LAMBDA2_GRID = (0.25, 0.50, 0.75, 1.00, 3.0, 5.0)


def _clean_grid(grid, name):
    vals = tuple(float(v) for v in grid)
    if len(vals) == 0:
        raise ValueError(f"{name} is empty")
    for v in vals:
        if not (math.isfinite(v) and v >= 0.0):
            raise ValueError(f"{name} values must be finite and non-negative")
    return tuple(sorted(set(vals)))


@dataclass(frozen=True)
class CVConfig:
    """Grid search settings. Grids are sorted ascending and deduplicated;
    lambda1 sweeps run ascending so each solution warm-starts the next.
    Selection maximizes the Welch t-statistic of out-of-fold scores unless
    select_by_misclassification is set; ties prefer larger lambda1, then
    larger lambda2.
    """

    n_folds: int = 10
    lambda1_grid: tuple = DEFAULT_LAMBDA1_GRID
    lambda2_grid: tuple = DEFAULT_LAMBDA2_GRID
    stratified: bool = True
    seed: int = 0
    fit: FitConfig = field(default_factory=FitConfig)
    select_by_misclassification: bool = False

    def __post_init__(self):
        if self.n_folds < 2:
            raise ValueError("n_folds must be >= 2")
        object.__setattr__(self, "lambda1_grid", _clean_grid(self.lambda1_grid, "lambda1_grid"))
        object.__setattr__(self, "lambda2_grid", _clean_grid(self.lambda2_grid, "lambda2_grid"))


@dataclass(frozen=True)
class CVResult:
    lambda1_grid: tuple
    lambda2_grid: tuple
    t_table: np.ndarray
    mis_table: np.ndarray
    chosen: tuple
    fold_ids: np.ndarray
    oof_scores: np.ndarray


def stratified_kfold(y, n_folds, seed=0, stratified=True):
    """Fold id per subject, sizes within 1 of each other overall and per class.

    n_folds == N returns singleton (leave-one-out) folds regardless of the
    stratified flag, since per-class balance is vacuous there.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    n = y.size
    if n_folds < 2:
        raise DataError("n_folds must be >= 2")
    if n_folds > n:
        raise DataError(f"n_folds={n_folds} exceeds {n} subjects")
    if n_folds == n:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    groups = [np.flatnonzero(y < 0), np.flatnonzero(y > 0)] if stratified else [np.arange(n)]
    if stratified:
        small = min(len(g) for g in groups)
        if small < n_folds:
            raise DataError(f"smallest class has {small} members, fewer than {n_folds} folds")
    folds = np.empty(n, dtype=np.int64)
    loads = np.zeros(n_folds, dtype=np.int64)
    for g in groups:
        idx = rng.permutation(g)
        base, extra = divmod(len(g), n_folds)
        sizes = np.full(n_folds, base, dtype=np.int64)
        loads += base
        if extra:
            # extras go to the currently least-loaded folds, low id first
            take = np.argsort(loads, kind="stable")[:extra]
            sizes[take] += 1
            loads[take] += 1
        folds[idx] = np.repeat(np.arange(n_folds), sizes)
    return folds


def welch_t(scores_pos, scores_neg):
    """Unequal-variance two-sample t. Both variances zero gives a signed
    infinite sentinel when the means differ (perfect separation) and 0 when
    they coincide.
    """
    pos = np.asarray(scores_pos, dtype=np.float64).ravel()
    neg = np.asarray(scores_neg, dtype=np.float64).ravel()
    if pos.size < 2 or neg.size < 2:
        raise DataError("each score group needs at least 2 values")
    mp, mn = float(pos.mean()), float(neg.mean())
    vp, vn = float(pos.var(ddof=1)), float(neg.var(ddof=1))
    if vp == 0.0 and vn == 0.0:
        if mp == mn:
            return 0.0
        return math.inf if mp > mn else -math.inf
    return (mp - mn) / math.sqrt(vp / pos.size + vn / neg.size)


def _oof_scores(res, x):
    if res.standardizer is not None:
        x = res.standardizer.transform(x)
    return x.reshape(x.shape[0], -1) @ assemble(res.factors).ravel() + res.b0


def select_lambdas(data, cfg):
    """Grid search with warm-started ascending lambda1 paths per (fold, lambda2)."""
    y = data.y
    n = data.n
    neg, pos = data.class_counts()
    if cfg.n_folds > min(neg, pos):
        raise DataError(
            f"n_folds={cfg.n_folds} exceeds the smallest class size {min(neg, pos)}"
        )
    l1s, l2s = cfg.lambda1_grid, cfg.lambda2_grid
    root = np.random.SeedSequence(cfg.seed)
    children = root.spawn(1 + cfg.n_folds * len(l2s))
    folds = stratified_kfold(y, cfg.n_folds, seed=children[0], stratified=cfg.stratified)
    oof = np.full((len(l1s), len(l2s), n), np.nan)
    for f in range(cfg.n_folds):
        te = np.flatnonzero(folds == f)
        train = data.subset(np.flatnonzero(folds != f))
        x_te = data.x[te]
        for i2, lam2 in enumerate(l2s):
            cell = children[1 + f * len(l2s) + i2]
            seed_int = int(cell.generate_state(1, np.uint64)[0])
            warm = None
            for i1, lam1 in enumerate(l1s):
                fcfg = replace(
                    cfg.fit,
                    penalty=PenaltySpec(cfg.fit.penalty.variant, lam1, lam2),
                    seed=seed_int,
                )
                try:
                    res = fit(train, fcfg, init=warm)
                except (DataError, DimensionError, NumericalError) as e:
                    raise type(e)(
                        f"cv cell lambda1={lam1} lambda2={lam2} fold={f}: {e}"
                    ) from e
                warm = (res.factors, res.b0)
                oof[i1, i2, te] = _oof_scores(res, x_te)

    t_table = np.empty((len(l1s), len(l2s)))
    mis_table = np.empty((len(l1s), len(l2s)))
    pos_mask = y > 0
    best_key, best_pair = None, None
    for i1, lam1 in enumerate(l1s):
        for i2, lam2 in enumerate(l2s):
            s = oof[i1, i2]
            t = welch_t(s[pos_mask], s[~pos_mask])
            pred = np.where(s >= 0, 1.0, -1.0)
            mis = float(np.mean(pred != y))
            t_table[i1, i2] = t
            mis_table[i1, i2] = mis
            stat = -mis if cfg.select_by_misclassification else t
            if math.isnan(stat):
                continue
            key = (stat, lam1, lam2)
            if best_key is None or key > best_key:
                best_key, best_pair = key, (lam1, lam2)
    if best_pair is None:
        raise NumericalError("every grid cell produced undefined selection statistics")
    return CVResult(
        lambda1_grid=l1s,
        lambda2_grid=l2s,
        t_table=t_table,
        mis_table=mis_table,
        chosen=best_pair,
        fold_ids=folds,
        oof_scores=oof,
    )
