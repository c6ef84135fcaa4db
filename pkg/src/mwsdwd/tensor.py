"""Dense multiway arrays and the CP algebra the rest of the package builds on.

Tensors are plain numpy float64 arrays in C (row-major) order, last index
fastest. A CP factor set is a list of K matrices, the k-th of shape
(P_k, R); component r is the outer product of the r-th columns. Modes are
0-based everywhere in code.
"""

import numpy as np

from .errors import DimensionError


def check_factors(factors):
    """Coerce to float64 matrices and validate shared column count.

    Returns (factors, rank). Raises DimensionError on ragged ranks or
    non-matrix entries.
    """
    if len(factors) == 0:
        raise DimensionError("factor list is empty")
    out = []
    rank = -1
    for k, u in enumerate(factors):
        u = np.asarray(u, dtype=np.float64)
        if u.ndim != 2:
            raise DimensionError(f"factor {k} must be a matrix, got {u.ndim} axes")
        if k == 0:
            rank = u.shape[1]
        elif u.shape[1] != rank:
            raise DimensionError(
                f"factor {k} has {u.shape[1]} columns, expected {rank}"
            )
        out.append(u)
    if rank < 1:
        raise DimensionError("rank must be at least 1")
    return out, rank


def inner(a, b):
    """Generalized inner product: sum of elementwise products."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def norm(a, p=2):
    """Entrywise L1 norm (p=1) or Frobenius-style L2 norm (p=2)."""
    a = np.asarray(a, dtype=np.float64)
    if p == 1:
        return float(np.sum(np.abs(a)))
    if p == 2:
        return float(np.sqrt(np.sum(a * a)))
    raise ValueError("p must be 1 or 2")


def outer_columns(factors, exclude=None):
    """Per-component vectorized outer products of the factor columns.

    Skipping mode `exclude` (None keeps every mode), returns a matrix of
    shape (prod of remaining extents, R) whose r-th column is the row-major
    vectorization of the outer product of the remaining modes' r-th columns.
    Row order matches matricize() of the assembled tensor.
    """
    factors, rank = check_factors(factors)
    cols = np.ones((1, rank))
    for k, u in enumerate(factors):
        if k == exclude:
            continue
        # row-major expansion: earlier modes vary slower
        cols = (cols[:, None, :] * u[None, :, :]).reshape(-1, rank)
    return cols


def assemble(factors):
    """Dense tensor of the CP factor set: entry = sum_r prod_k U_k[p_k, r]."""
    factors, _ = check_factors(factors)
    shape = tuple(u.shape[0] for u in factors)
    return outer_columns(factors).sum(axis=1).reshape(shape)


def matricize(t, mode):
    """Mode-k unfolding: rows are mode-k fibers, remaining indices row-major."""
    t = np.asarray(t, dtype=np.float64)
    if not 0 <= mode < t.ndim:
        raise DimensionError(f"mode {mode} out of range for {t.ndim} axes")
    return np.moveaxis(t, mode, 0).reshape(t.shape[mode], -1)


def project_out(x, factors, mode):
    """Contract x over every mode but one against the other factor columns.

    Column r of the (P_mode, R) result is the mode-`mode` fiber contraction
    of x with the outer product of the other modes' r-th columns, so that
    inner(assemble(f), x) == sum_{j,r} U_mode[j,r] * result[j,r].
    """
    x = np.asarray(x, dtype=np.float64)
    factors, _ = check_factors(factors)
    if x.ndim != len(factors):
        raise DimensionError(f"{x.ndim}-way tensor with {len(factors)} factors")
    for k, u in enumerate(factors):
        if k != mode and u.shape[0] != x.shape[k]:
            raise DimensionError(
                f"mode {k} extent {x.shape[k]} does not match factor rows {u.shape[0]}"
            )
    return matricize(x, mode) @ outer_columns(factors, exclude=mode)


def project_out_batch(x, factors, mode):
    """project_out applied along axis 0 of a stacked (N, P_1..P_K) array.

    Returns an (N, P_mode, R) array; axis 0 indexes subjects.
    """
    x = np.asarray(x, dtype=np.float64)
    factors, _ = check_factors(factors)
    if x.ndim != len(factors) + 1:
        raise DimensionError(
            f"expected {len(factors) + 1} axes (subjects first), got {x.ndim}"
        )
    n = x.shape[0]
    xm = np.moveaxis(x, mode + 1, 1).reshape(n, x.shape[mode + 1], -1)
    return xm @ outer_columns(factors, exclude=mode)


def gram_hadamard(factors, exclude=None):
    """Hadamard product of the factor Gram matrices, skipping one mode.

    W[r, r'] = prod_{k != exclude} (u_kr . u_kr'). For the excluded mode k,
    norm(assemble(f), 2)^2 == sum_{r,r'} W[r,r'] * (u_kr . u_kr').
    """
    factors, rank = check_factors(factors)
    w = np.ones((rank, rank))
    for k, u in enumerate(factors):
        if k == exclude:
            continue
        w *= u.T @ u
    return w
