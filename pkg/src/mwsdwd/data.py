"""Labeled tensor datasets and optional per-cell standardization."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError


@dataclass(frozen=True)
class Dataset:
    """N subjects, each a K-way predictor tensor, with labels in {-1, +1}.

    x has shape (N, P_1, ..., P_K); y has shape (N,). Arrays are coerced to
    float64 and frozen read-only so datasets can be shared across threads.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if x.ndim < 2:
            raise DimensionError("predictors need at least one mode beyond subjects")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise DimensionError(
                f"{x.shape[0]} subjects but {y.shape} labels"
            )
        bad = ~np.isin(y, (-1.0, 1.0))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DataError(f"label at position {i} is {y[i]!r}, expected -1 or +1")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def dims(self):
        return self.x.shape[1:]

    def class_counts(self):
        """(count of -1, count of +1)."""
        pos = int(np.sum(self.y > 0))
        return self.n - pos, pos

    def subset(self, idx):
        return Dataset(self.x[idx], self.y[idx])


@dataclass(frozen=True)
class Standardizer:
    """Per-cell centering and scaling learned from training predictors."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def from_data(cls, x):
        x = np.asarray(x, dtype=np.float64)
        mean = x.mean(axis=0)
        sd = x.std(axis=0)
        # constant cells pass through centered, unscaled
        scale = np.where(sd == 0.0, 1.0, sd)
        return cls(mean=mean, scale=scale)

    def transform(self, x):
        x = np.asarray(x, dtype=np.float64)
        return (x - self.mean) / self.scale
