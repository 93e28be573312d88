"""Dataset containers, centering, and sample covariance construction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidInputError


@dataclass(frozen=True)
class DataMatrix:
    """Row-major sample set, ``m`` samples by ``n_features`` columns.

    ``labels`` is an optional length-``m`` integer tag vector used only for
    evaluation and plotting; it never influences a fit.
    """

    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 2:
            raise DimensionError(f"data must be 2-D (samples x features), got ndim={vals.ndim}")
        if vals.shape[0] < 1 or vals.shape[1] < 1:
            raise DimensionError(f"data must be at least 1x1, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("data contains non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.labels is not None:
            labs = np.array(self.labels, dtype=np.int64, copy=True)
            if labs.shape != (vals.shape[0],):
                raise DimensionError(
                    f"labels must have length {vals.shape[0]}, got shape {labs.shape}")
            labs.flags.writeable = False
            object.__setattr__(self, "labels", labs)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CenteredDataset:
    """A DataMatrix with its column means removed, plus the removed means."""

    data: DataMatrix
    mean: np.ndarray


@dataclass(frozen=True)
class CovarianceEstimate:
    """Sample covariance ``X^T X / m`` plus the ridge that was added to it."""

    matrix: np.ndarray
    sample_count: int
    ridge_applied: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def center(raw: DataMatrix) -> CenteredDataset:
    """Remove the column-wise mean from a dataset.

    Labels pass through unchanged. Idempotent on the data part: centering an
    already centered dataset leaves it unchanged up to rounding.
    """
    mean = raw.values.mean(axis=0)
    shifted = raw.values - mean
    return CenteredDataset(data=DataMatrix(shifted, labels=raw.labels), mean=mean)


def sample_covariance(centered: CenteredDataset, ridge: float = 0.0) -> CovarianceEstimate:
    """Covariance ``(1/m) X^T X + ridge * I`` of a centered dataset.

    The divisor is the sample count ``m``, not ``m - 1``. A positive ridge
    makes rank-deficient covariances invertible before a pencil solve; the
    amount added is recorded on the estimate.
    """
    if ridge < 0:
        raise InvalidInputError(f"ridge must be nonnegative, got {ridge}")
    x = centered.data.values
    m = x.shape[0]
    cov = (x.T @ x) / m
    cov = 0.5 * (cov + cov.T)
    if ridge > 0:
        cov = cov + ridge * np.eye(x.shape[1])
    return CovarianceEstimate(matrix=cov, sample_count=m, ridge_applied=float(ridge))


def concat_rows(parts: Sequence[DataMatrix]) -> DataMatrix:
    """Stack several datasets row-wise into one (labels are dropped).

    This is how multiple background datasets are fused: combine first, then
    fit against the combined covariance.
    """
    if not parts:
        raise InvalidInputError("need at least one dataset to concatenate")
    width = parts[0].n_features
    for i, p in enumerate(parts[1:], start=1):
        if p.n_features != width:
            raise DimensionError(
                f"dataset {i} has {p.n_features} features, expected {width}")
    return DataMatrix(np.vstack([p.values for p in parts]))
