"""Solver behavior: block updates, descent, determinism, warm starts."""

import numpy as np
import pytest

from mwsdwd import (Dataset, DataError, DimensionError, FitConfig, NumericalError,
                    PenaltySpec, assemble, effective_rank, fit, soft_threshold)
from mwsdwd.objective import objective
from mwsdwd.solver import _Path, update_block
from mwsdwd.tuning import DEFAULT_LAMBDA1_GRID

VARIANTS = ("coupled", "separable-l2", "tensor")


def balanced(rng, dims, n):
    x = rng.standard_normal((n, *dims))
    y = np.array([-1.0, 1.0] * (n // 2))
    return Dataset(x, y)


def make_path(facs, b0, data):
    path = _Path([u.copy() for u in facs], b0, 0)
    b = assemble(path.factors)
    path.margins = data.y * (data.x.reshape(data.n, -1) @ b.ravel() + b0)
    return path


def test_soft_threshold():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.5, 1.0) == 0.0
    assert soft_threshold(-0.7, 0.0) == -0.7
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.1)


def test_update_block_worked_example():
    # N=1, K=2, R=1, x=[[1]], y=+1, U=(1),(1), b0=0, no penalty:
    # V'(1) = -0.25, z = 4*1 - (-0.25) = 4.25, new u = 4.25/4 = 1.0625
    x = np.ones((1, 1, 1))
    y = np.ones(1)
    data = Dataset(x, y)
    path = make_path([np.ones((1, 1)), np.ones((1, 1))], 0.0, data)
    cfg = FitConfig(rank=1, penalty=PenaltySpec("coupled", 0.0, 0.0), max_inner=1)
    update_block(path, data.x, data.y, 0, cfg)
    assert path.factors[0][0, 0] == 1.0625
    after = objective(data, path.factors, path.b0, cfg.penalty)
    assert after < 0.25  # started at V(1) = 0.25


def test_update_block_conditional_descent():
    rng = np.random.default_rng(20)
    for trial in range(12):
        data = balanced(rng, (3, 4), 16)
        variant = VARIANTS[trial % 3]
        spec = PenaltySpec(variant, 0.05, 0.5)
        facs = [rng.random((3, 2)), rng.random((4, 2))]
        path = make_path(facs, 0.0, data)
        cfg = FitConfig(rank=2, penalty=spec, max_inner=20)
        before = objective(data, path.factors, path.b0, spec)
        for k in range(2):
            update_block(path, data.x, data.y, k, cfg)
            now = objective(data, path.factors, path.b0, spec)
            assert now <= before + 1e-10
            before = now


def test_update_block_margin_cache_consistent():
    rng = np.random.default_rng(21)
    data = balanced(rng, (4, 3), 20)
    spec = PenaltySpec("coupled", 0.02, 0.3)
    path = make_path([rng.random((4, 2)), rng.random((3, 2))], 0.1, data)
    cfg = FitConfig(rank=2, penalty=spec, max_inner=50)
    for k in (0, 1, 0):
        update_block(path, data.x, data.y, k, cfg)
        b = assemble(path.factors)
        recomputed = data.y * (data.x.reshape(data.n, -1) @ b.ravel() + path.b0)
        assert np.max(np.abs(path.margins - recomputed)) <= 1e-8


def test_huge_lambda1_all_zero_fixed_point():
    rng = np.random.default_rng(22)
    data = balanced(rng, (3, 3), 12)
    cfg = FitConfig(rank=2, penalty=PenaltySpec("coupled", 1e3, 0.5), seed=0)
    res = fit(data, cfg)
    assert not assemble(res.factors).any()
    assert res.effective_rank == 0
    # the all-zero solution is a fixed point: warm-starting from it stays there
    res2 = fit(data, cfg, init=(res.factors, res.b0))
    assert not assemble(res2.factors).any()
    assert res2.objective_trace[-1] == res.objective_trace[-1]


def test_descent_all_variants():
    # acceptance criterion 2 runs 100 instances; this is the quick per-variant check
    rng = np.random.default_rng(23)
    for i in range(12):
        k = int(rng.integers(1, 4))
        dims = tuple(int(v) for v in rng.integers(2, 7, size=k))
        data = balanced(rng, dims, int(rng.integers(4, 21)) // 2 * 2)
        cfg = FitConfig(rank=1 + i % 2, penalty=PenaltySpec(VARIANTS[i % 3], 0.05, 0.5),
                        max_outer=40, n_starts=2, seed=i)
        res = fit(data, cfg)
        trace = np.array(res.objective_trace)
        assert np.all(np.diff(trace) <= 1e-8)


def test_fit_input_validation():
    rng = np.random.default_rng(24)
    x = rng.standard_normal((6, 2, 2))
    with pytest.raises(DataError):
        fit(Dataset(x, np.ones(6)), FitConfig())  # single class
    with pytest.raises(DataError):
        fit(Dataset(x[:1], np.array([1.0])), FitConfig())
    xb = x.copy()
    xb[0, 0, 0] = np.nan
    with pytest.raises(NumericalError):
        fit(Dataset(xb, np.array([-1.0, 1.0] * 3)), FitConfig())
    with pytest.raises(DataError):
        fit(Dataset(np.empty((4, 0)), np.array([-1.0, 1.0, -1.0, 1.0])), FitConfig())


def test_fit_config_validation():
    for bad in (dict(rank=0), dict(epsilon=0.0), dict(max_outer=0), dict(max_inner=0),
                dict(n_starts=0), dict(prune_after=0)):
        with pytest.raises(ValueError):
            FitConfig(**bad)


def test_fit_bit_reproducible():
    rng = np.random.default_rng(25)
    data = balanced(rng, (4, 3), 20)
    for starts in (1, 5):
        cfg = FitConfig(rank=2, penalty=PenaltySpec("coupled", 0.01, 0.5),
                        n_starts=starts, seed=42)
        r1, r2 = fit(data, cfg), fit(data, cfg)
        assert all(np.array_equal(a, b) for a, b in zip(r1.factors, r2.factors))
        assert r1.b0 == r2.b0
        assert r1.objective_trace == r2.objective_trace
        assert r1.chosen_start == r2.chosen_start


def test_warm_start_shape_checks():
    rng = np.random.default_rng(26)
    data = balanced(rng, (3, 3), 12)
    cfg = FitConfig(rank=2)
    with pytest.raises(DimensionError):
        fit(data, cfg, init=([np.ones((3, 1)), np.ones((3, 1))], 0.0))
    with pytest.raises(DimensionError):
        fit(data, cfg, init=([np.ones((4, 2)), np.ones((3, 2))], 0.0))


def test_noiseless_rank1_recovers_bayes_direction():
    # x_i = y_i * mu exactly; the fit must align with the generating direction
    for seed in range(3):
        rng = np.random.default_rng(200 + seed)
        facs = []
        for p in (6, 4, 4):
            v = rng.standard_normal((p, 1))
            facs.append(v / np.linalg.norm(v))
        mu = assemble(facs)
        n = 40
        y = np.array([-1.0, 1.0] * (n // 2))
        x = y[:, None, None, None] * mu[None]
        res = fit(Dataset(x, y), FitConfig(rank=1, penalty=PenaltySpec("coupled", 1e-4, 0.25), seed=seed))
        c = np.corrcoef(assemble(res.factors).ravel(), mu.ravel())[0, 1]
        assert c > 0.95


def test_lambda1_zero_objective_identity():
    # with lambda1=0 the objective is mean loss plus the ridge term only
    rng = np.random.default_rng(27)
    data = balanced(rng, (3, 4), 16)
    spec = PenaltySpec("coupled", 0.0, 0.8)
    res = fit(data, FitConfig(rank=1, penalty=spec, seed=1))
    b = assemble(res.factors)
    mu = data.y * (data.x.reshape(data.n, -1) @ b.ravel() + res.b0)
    u = np.where(mu > 0.5, 0.25 / np.where(mu > 0.5, mu, 1.0), 1.0 - mu)
    want = float(np.mean(u)) + 0.4 * float(np.sum(b * b))
    assert res.objective_trace[-1] == pytest.approx(want, rel=1e-10)


def test_effective_rank():
    assert effective_rank([np.zeros((3, 2)), np.zeros((2, 2))]) == 0
    rng = np.random.default_rng(28)
    assert effective_rank([rng.standard_normal((4, 1)), rng.standard_normal((3, 1))]) == 1
    # orthogonal columns in every mode give a genuinely rank-2 unfolding
    u1 = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    u2 = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert effective_rank([u1, u2]) == 2
    with pytest.raises(ValueError):
        effective_rank([u1, u2], rel_tol=0.0)
    with pytest.raises(ValueError):
        effective_rank([u1, u2], rel_tol=1.0)


def test_zero_count_monotone_along_warm_path():
    # count of exactly-zero factor entries is non-decreasing in lambda1 when
    # each solve warm-starts from the previous one
    from mwsdwd import SimDesign, gen_dataset

    for seed in range(5):
        train, _, _ = gen_dataset(SimDesign(dims=(5, 4), n=40, nonzero=(2, 2),
                                            alpha=0.5, seed=300 + seed))
        counts, warm = [], None
        for lam1 in DEFAULT_LAMBDA1_GRID:
            cfg = FitConfig(rank=1, penalty=PenaltySpec("coupled", lam1, 0.5), seed=seed)
            res = fit(train, cfg, init=warm)
            warm = (res.factors, res.b0)
            counts.append(sum(int(np.sum(u == 0.0)) for u in res.factors))
        assert all(c2 >= c1 for c1, c2 in zip(counts, counts[1:])), counts


def test_warm_and_cold_reach_same_objective():
    # warm starting accelerates; it must not change what is being estimated
    from mwsdwd import SimDesign, gen_dataset

    target, lam2 = 0.05, 0.5
    chain = [l1 for l1 in DEFAULT_LAMBDA1_GRID if l1 <= target]
    for seed in range(10):
        train, _, _ = gen_dataset(SimDesign(dims=(4, 3), n=40, alpha=0.5, seed=100 + seed))
        cold = fit(train, FitConfig(rank=1, penalty=PenaltySpec("coupled", target, lam2), seed=seed))
        warm, res = None, None
        for lam1 in chain:
            res = fit(train, FitConfig(rank=1, penalty=PenaltySpec("coupled", lam1, lam2), seed=seed),
                      init=warm)
            warm = (res.factors, res.b0)
        ow, oc = res.objective_trace[-1], cold.objective_trace[-1]
        assert abs(ow - oc) <= 1e-3 * max(abs(ow), abs(oc))


def test_compiled_and_pure_sweeps_bit_identical():
    # the fast extra must be an accelerator only: no fastmath, same op order
    import mwsdwd._sweeps as sweeps
    import mwsdwd.solver as solver

    if not sweeps.HAVE_NUMBA:
        pytest.skip("numba not installed")
    rng = np.random.default_rng(52)
    data = balanced(rng, (5, 3, 2), 30)
    refs = {}
    for variant in VARIANTS:
        cfg = FitConfig(rank=2, penalty=PenaltySpec(variant, 0.02, 0.5),
                        n_starts=2, seed=1)
        refs[variant] = fit(data, cfg)
    saved = solver._sweep_block, sweeps._pwl_quad_min
    solver._sweep_block = sweeps._sweep_block_impl
    sweeps._pwl_quad_min = sweeps._pwl_quad_min_impl
    try:
        for variant, ref in refs.items():
            cfg = FitConfig(rank=2, penalty=PenaltySpec(variant, 0.02, 0.5),
                            n_starts=2, seed=1)
            res = fit(data, cfg)
            assert all(np.array_equal(a, b) for a, b in zip(res.factors, ref.factors))
            assert res.b0 == ref.b0
            assert res.objective_trace == ref.objective_trace
    finally:
        solver._sweep_block, sweeps._pwl_quad_min = saved
