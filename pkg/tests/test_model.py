import numpy as np
import pytest

from mwsdwd import (Classifier, DimensionError, PenaltySpec, assemble,
                    normalize_factors, predict, score)


def make(facs, b0=0.0):
    dims = tuple(u.shape[0] for u in facs)
    return Classifier(factors=facs, b0=b0, penalty=PenaltySpec(), dims=dims)


def test_score_zero_factors_returns_intercept():
    m = make([np.zeros((2, 1)), np.zeros((3, 1))], b0=0.7)
    rng = np.random.default_rng(30)
    assert score(m, rng.standard_normal((2, 3))) == 0.7
    assert score(m, np.zeros((2, 3))) == 0.7


def test_score_zero_input_returns_intercept():
    rng = np.random.default_rng(31)
    m = make([rng.standard_normal((2, 1)), rng.standard_normal((3, 1))], b0=-1.2)
    assert score(m, np.zeros((2, 3))) == -1.2


def test_score_matches_dense_dot():
    rng = np.random.default_rng(32)
    for _ in range(10):
        facs = [rng.standard_normal((3, 2)), rng.standard_normal((4, 2))]
        m = make(facs, b0=0.3)
        x = rng.standard_normal((3, 4))
        want = float(np.sum(x * assemble(facs))) + 0.3
        assert score(m, x) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_score_batch_and_shape_check():
    rng = np.random.default_rng(33)
    m = make([rng.standard_normal((2, 1)), rng.standard_normal((2, 1))])
    xs = rng.standard_normal((5, 2, 2))
    s = score(m, xs)
    assert s.shape == (5,)
    for i in range(5):
        assert s[i] == pytest.approx(score(m, xs[i]), rel=1e-14)
    with pytest.raises(DimensionError):
        score(m, rng.standard_normal((2, 3)))


def test_predict_sign_rule():
    m = make([np.zeros((2, 1)), np.zeros((2, 1))], b0=2.5)
    x = np.zeros((2, 2))
    assert predict(m, x) == 1.0
    m = make([np.zeros((2, 1)), np.zeros((2, 1))], b0=-0.1)
    assert predict(m, x) == -1.0
    m = make([np.zeros((2, 1)), np.zeros((2, 1))], b0=0.0)
    assert predict(m, x) == 1.0  # tie at exactly zero classifies +1


def test_score_affine_in_x():
    rng = np.random.default_rng(34)
    facs = [rng.standard_normal((3, 2)), rng.standard_normal((3, 2))]
    m = make(facs, b0=0.9)
    x1, x2 = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    a, b = 1.7, -0.4
    lhs = score(m, a * x1 + b * x2)
    rhs = a * score(m, x1) + b * score(m, x2) - (a + b - 1.0) * m.b0
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_normalize_hand_example():
    # u1=(2), u2=(0,-3) -> u2 unit with positive peak, magnitude and sign in u1
    out = normalize_factors([np.array([[2.0]]), np.array([[0.0], [-3.0]])])
    assert np.array_equal(out[1], [[0.0], [1.0]])
    assert np.array_equal(out[0], [[-6.0]])


def test_normalize_preserves_assembled_tensor():
    rng = np.random.default_rng(35)
    for _ in range(15):
        facs = [rng.standard_normal((p, 2)) for p in (3, 4, 2)]
        out = normalize_factors(facs)
        b1, b2 = assemble(facs), assemble(out)
        assert np.max(np.abs(b1 - b2)) <= 1e-12 * max(1.0, np.max(np.abs(b1)))
        for k in (1, 2):
            nrm = np.linalg.norm(out[k], axis=0)
            assert np.allclose(nrm, 1.0, rtol=1e-12)
            for r in range(2):
                col = out[k][:, r]
                assert col[np.argmax(np.abs(col))] > 0


def test_normalize_idempotent():
    rng = np.random.default_rng(36)
    facs = [rng.standard_normal((3, 2)), rng.standard_normal((4, 2))]
    once = normalize_factors(facs)
    twice = normalize_factors(once)
    for a, b in zip(once, twice):
        assert np.array_equal(a, b)


def test_normalize_zero_column_passthrough():
    facs = [np.array([[1.0, 2.0], [0.5, 1.0]]), np.array([[3.0, 0.0], [1.0, 0.0]])]
    out = normalize_factors(facs)
    assert np.array_equal(out[1][:, 1], [0.0, 0.0])
    assert np.array_equal(out[0][:, 1], facs[0][:, 1])


def test_normalize_k1_is_copy():
    facs = [np.array([[1.0], [-2.0]])]
    out = normalize_factors(facs)
    assert np.array_equal(out[0], facs[0])
    assert out[0] is not facs[0]


def test_predict_invariant_under_normalization():
    rng = np.random.default_rng(37)
    facs = [rng.standard_normal((3, 2)), rng.standard_normal((3, 2))]
    m1 = make(facs, b0=0.2)
    m2 = make(normalize_factors(facs), b0=0.2)
    xs = rng.standard_normal((20, 3, 3))
    s1, s2 = score(m1, xs), score(m2, xs)
    assert np.max(np.abs(s1 - s2)) <= 1e-12 * max(1.0, np.max(np.abs(s1)))
    assert np.array_equal(predict(m1, xs), predict(m2, xs))
