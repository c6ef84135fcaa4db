"""Percentile bootstrap confidence intervals for factor weights.

CP scale and sign indeterminacy would make entrywise quantiles across
resamples meaningless, so every replicate is normalized (normalize_factors)
and then aligned to the normalized full-data fit: components matched by
absolute correlation of their vectorized rank-one parts, signs flipped
toward the reference. Compensated flips leave each replicate's assembled
tensor unchanged; at most an overall per-component sign can differ.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._util import resolve_threads
from .errors import DataError, DimensionError
from .model import normalize_factors
from .solver import FitConfig, fit
from .tensor import check_factors, outer_columns

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BootstrapConfig:
    n_boot: int = 500
    quantiles: tuple = (0.025, 0.975)
    seed: int = 0
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.n_boot < 2:
            raise ValueError("n_boot must be >= 2")
        q = tuple(float(v) for v in self.quantiles)
        if len(q) != 2 or not (0.0 < q[0] < q[1] < 1.0):
            raise ValueError("quantiles must be two ascending values strictly inside (0, 1)")
        object.__setattr__(self, "quantiles", q)


@dataclass(frozen=True)
class BootstrapResult:
    factors: list
    b0: float
    lower: list
    upper: list
    converged: tuple
    n_failed: int
    warn: bool
    quantiles: tuple
    replicate_factors: list


def _vec_corr(a, b):
    a = a - a.mean()
    b = b - b.mean()
    den = np.sqrt(np.sum(a * a) * np.sum(b * b))
    if den == 0.0:
        return 0.0
    return float(np.dot(a, b) / den)


def align_to_reference(factors, ref):
    """Permute and sign-flip components of `factors` toward `ref`.

    Components pair greedily by |correlation| of vectorized rank-one parts.
    Within a pair, modes >= 1 flip toward the reference with the flip
    compensated in mode 0 (tensor unchanged); a final mode-0 flip (an overall
    -1 on the component) applies only if mode 0 still anticorrelates.
    """
    factors, rank = check_factors(factors)
    ref, rank_ref = check_factors(ref)
    if rank != rank_ref:
        raise DimensionError(f"rank {rank} vs reference rank {rank_ref}")
    if [u.shape for u in factors] != [u.shape for u in ref]:
        raise DimensionError("factor shapes do not match the reference")
    parts = outer_columns(factors)
    parts_ref = outer_columns(ref)
    c = np.zeros((rank, rank))
    for r in range(rank):
        for s in range(rank):
            c[r, s] = abs(_vec_corr(parts[:, r], parts_ref[:, s]))
    perm = np.empty(rank, dtype=np.int64)
    free = c.copy()
    for _ in range(rank):
        r, s = np.unravel_index(np.argmax(free), free.shape)
        perm[s] = r
        free[r, :] = -1.0
        free[:, s] = -1.0
    out = [u[:, perm].copy() for u in factors]
    for s in range(rank):
        for k in range(1, len(out)):
            if np.dot(out[k][:, s], ref[k][:, s]) < 0.0:
                out[k][:, s] *= -1.0
                out[0][:, s] *= -1.0
        if np.dot(out[0][:, s], ref[0][:, s]) < 0.0:
            out[0][:, s] *= -1.0
    return out


def bootstrap_ci(data, cfg, n_threads=None):
    """Class-preserving resampled fits, aligned, reduced to entrywise quantiles.

    Quantiles use Hazen plotting positions (linear between order statistics,
    attaining the min/max at the extremes), so n_boot=2 gives lower=min,
    upper=max. Convergence failures above 20% of n_boot set the warn flag.
    """
    ref = fit(data, cfg.fit)
    refn = normalize_factors(ref.factors)
    n = data.n
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_boot)

    def one(b):
        idx_ss, fit_ss = children[b].spawn(2)
        rng = np.random.default_rng(idx_ss)
        for _ in range(1000):
            idx = rng.integers(0, n, n)
            ys = data.y[idx]
            if (ys > 0).any() and (ys < 0).any():
                break
        else:  # pragma: no cover - would need a pathological class split
            raise DataError("could not draw a resample containing both classes")
        fcfg = replace(cfg.fit, seed=int(fit_ss.generate_state(1, np.uint64)[0]))
        res = fit(data.subset(idx), fcfg)
        return align_to_reference(normalize_factors(res.factors), refn), res.converged

    workers = resolve_threads(n_threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(cfg.n_boot)))
    else:
        results = [one(b) for b in range(cfg.n_boot)]

    flags = tuple(conv for _, conv in results)
    n_failed = sum(1 for conv in flags if not conv)
    warn = n_failed > 0.2 * cfg.n_boot
    if warn:
        log.warning("%d of %d bootstrap fits did not converge", n_failed, cfg.n_boot)
    reps = [
        np.stack([facs[k] for facs, _ in results], axis=0)
        for k in range(len(refn))
    ]
    lo, hi = cfg.quantiles
    lower = [np.quantile(rk, lo, axis=0, method="hazen") for rk in reps]
    upper = [np.quantile(rk, hi, axis=0, method="hazen") for rk in reps]
    return BootstrapResult(
        factors=refn,
        b0=ref.b0,
        lower=lower,
        upper=upper,
        converged=flags,
        n_failed=n_failed,
        warn=warn,
        quantiles=cfg.quantiles,
        replicate_factors=reps,
    )
