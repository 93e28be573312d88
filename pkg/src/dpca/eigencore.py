"""Dense symmetric eigendecomposition, whitening, and pencil solvers.

Everything downstream (the PCA variants, the synthetic-recovery experiments)
is built on four operations:

* :func:`sym_eigendecompose` wraps LAPACK's symmetric eigensolver with a
  descending order and a deterministic sign convention.
* :func:`whitening_factor` builds the symmetric inverse square root of a PSD
  matrix, with a relative eigenvalue floor so rank-deficient inputs remain
  usable.
* :func:`generalized_eig` solves the symmetric-definite pencil ``A u = lam B u``
  by whitening with ``B`` and eigendecomposing the whitened matrix.
* :func:`power_topd` computes leading eigenpairs by deflated power iteration,
  the cheap route for when a dense solve is overkill.

All functions are pure; returned arrays are never aliased to the inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import _accel
from .errors import (
    DimensionError,
    InvalidInputError,
    NonConvergenceError,
    RankZeroError,
    SymmetryError,
)

SYMMETRY_RTOL = 1e-12
DEFAULT_FLOOR_REL = 1e-10

# Count of pencil solves performed, for runtime instrumentation. Reset with
# reset_pencil_solve_count() before a measured section.
_pencil_solves = 0


def pencil_solve_count() -> int:
    return _pencil_solves


def reset_pencil_solve_count() -> None:
    global _pencil_solves
    _pencil_solves = 0


@dataclass(frozen=True)
class EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    ``eigenvalues`` are sorted descending; ``eigenvectors`` holds the matching
    unit-norm eigenvectors as columns, sign-fixed so the largest-magnitude
    entry of each column is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class WhiteningFactor:
    """Symmetric factor ``W`` with ``W^T C W ~= I`` for a PSD matrix ``C``.

    When ``C`` has eigenvalues below ``floor_rel`` times its largest one they
    are floored before inversion; ``floor_applied`` records that this
    happened, in which case the whitening identity holds for the floored
    matrix rather than ``C`` itself.
    """

    factor: np.ndarray
    floor_applied: bool
    floor_value: float

    @property
    def dim(self) -> int:
        return self.factor.shape[0]


@dataclass(frozen=True)
class GeneralizedEigenPairs:
    """Top eigenpairs of a symmetric-definite pencil ``(A, B)``.

    ``eigenvalues`` are descending and nonnegative; ``eigenvectors`` columns
    have unit Euclidean norm and satisfy ``A u ~= lam B u``. Columns follow
    the same sign convention as :class:`EigenDecomposition`.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def count(self) -> int:
        return self.eigenvalues.shape[0]


def _as_square_matrix(mat: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(mat, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise DimensionError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def check_symmetric(mat: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate finiteness and symmetry; returns the matrix as float64.

    Symmetry tolerance is elementwise: ``|A_ij - A_ji| <= 1e-12 * max(1, |A_ij|)``.
    """
    arr = _as_square_matrix(mat, name)
    gap = np.abs(arr - arr.T)
    limit = SYMMETRY_RTOL * np.maximum(1.0, np.abs(arr))
    if not np.all(gap <= limit):
        worst = float(np.max(gap - limit))
        raise SymmetryError(f"{name} is not symmetric within tolerance (excess {worst:.3e})")
    return arr


def apply_sign_convention(vectors: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest-magnitude entry is positive.

    Ties pick the lowest row index. Returns a new array.
    """
    out = np.array(vectors, dtype=np.float64, copy=True)
    for j in range(out.shape[1]):
        col = out[:, j]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            out[:, j] = -col
    return out


def sym_eigendecompose(mat: np.ndarray) -> EigenDecomposition:
    """Eigendecompose a symmetric matrix with deterministic ordering.

    Parameters
    ----------
    mat : (D, D) array_like
        Symmetric, finite matrix.

    Returns
    -------
    EigenDecomposition
        Eigenvalues descending, orthonormal eigenvectors as columns
        satisfying the sign convention.

    Raises
    ------
    SymmetryError
        If ``mat`` deviates from symmetry beyond tolerance.
    InvalidInputError
        If ``mat`` contains NaN or Inf.
    """
    arr = check_symmetric(mat, "matrix")
    vals, vecs = np.linalg.eigh(arr)
    order = np.arange(vals.shape[0])[::-1]  # eigh is ascending; reverse it
    vals = np.ascontiguousarray(vals[order])
    vecs = apply_sign_convention(vecs[:, order])
    return EigenDecomposition(eigenvalues=vals, eigenvectors=vecs)


def whitening_factor(cov: np.ndarray, floor_rel: float = DEFAULT_FLOOR_REL) -> WhiteningFactor:
    """Symmetric inverse square root of a PSD matrix.

    Builds ``W = U diag(max(s_i, floor_rel * s_max))^{-1/2} U^T`` from the
    eigendecomposition ``cov = U diag(s) U^T``. The symmetric root makes the
    result basis-independent and transpose-unambiguous.

    Parameters
    ----------
    cov : (D, D) array_like
        Symmetric PSD matrix.
    floor_rel : float
        Relative eigenvalue floor; eigenvalues below ``floor_rel * s_max``
        (including small negative rounding noise) are raised to that floor.

    Raises
    ------
    RankZeroError
        If the largest eigenvalue is not positive (zero matrix).
    """
    if floor_rel < 0:
        raise InvalidInputError(f"floor_rel must be nonnegative, got {floor_rel}")
    eig = sym_eigendecompose(cov)
    s_max = float(eig.eigenvalues[0])
    if s_max <= 0.0:
        raise RankZeroError("covariance has no positive eigenvalue; cannot whiten")
    floor_value = floor_rel * s_max
    floor_applied = bool(np.any(eig.eigenvalues < floor_value))
    floored = np.maximum(eig.eigenvalues, floor_value)
    if floor_value == 0.0 and np.any(floored <= 0.0):
        # floor_rel == 0 with an exactly singular matrix cannot be inverted
        raise RankZeroError("covariance is singular and the eigenvalue floor is zero")
    inv_root = eig.eigenvectors * (1.0 / np.sqrt(floored))
    factor = inv_root @ eig.eigenvectors.T
    factor = 0.5 * (factor + factor.T)
    return WhiteningFactor(factor=factor, floor_applied=floor_applied, floor_value=floor_value)


def generalized_eig(mat_a: np.ndarray, mat_b: np.ndarray, d: int,
                    floor_rel: float = DEFAULT_FLOOR_REL) -> GeneralizedEigenPairs:
    """Top-``d`` eigenpairs of the symmetric-definite pencil ``(A, B)``.

    Whitens with ``W = whitening_factor(B)``, eigendecomposes the symmetric
    matrix ``W^T A W``, and maps each leading eigenvector ``v`` back as
    ``u = W v`` normalized to unit Euclidean norm. The reported eigenvalues
    are those of the whitened matrix; for nonsingular ``B`` they equal the
    Rayleigh ratios ``u^T A u / u^T B u``.

    Parameters
    ----------
    mat_a, mat_b : (D, D) array_like
        Symmetric PSD matrices defining the pencil.
    d : int
        Number of leading pairs to return, ``1 <= d <= D``.
    floor_rel : float
        Eigenvalue floor forwarded to :func:`whitening_factor`.

    Raises
    ------
    DimensionError
        If ``d`` is out of range or the matrices disagree in shape.
    RankZeroError
        If ``mat_b`` is identically zero.
    """
    global _pencil_solves
    a = check_symmetric(mat_a, "pencil matrix A")
    b = check_symmetric(mat_b, "pencil matrix B")
    if a.shape != b.shape:
        raise DimensionError(f"pencil matrices disagree in shape: {a.shape} vs {b.shape}")
    dim = a.shape[0]
    if not 1 <= d <= dim:
        raise DimensionError(f"requested {d} pairs from a dimension-{dim} pencil")

    white = whitening_factor(b, floor_rel)
    transformed = white.factor.T @ a @ white.factor
    transformed = 0.5 * (transformed + transformed.T)  # kill rounding asymmetry
    eig = sym_eigendecompose(transformed)

    values = np.maximum(eig.eigenvalues[:d], 0.0)
    mapped = white.factor @ eig.eigenvectors[:, :d]
    mapped /= np.linalg.norm(mapped, axis=0)
    vectors = apply_sign_convention(mapped)
    _pencil_solves += 1
    return GeneralizedEigenPairs(eigenvalues=values, eigenvectors=vectors)


LinearOperator = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def power_topd(op: LinearOperator, d: int, tol: float = 1e-10, max_iter: int = 5000,
               seed: int = 0, dim: int | None = None,
               backend: str | None = None) -> GeneralizedEigenPairs:
    """Leading eigenpairs of a symmetric PSD operator by deflated power iteration.

    Each pair iterates ``v <- Av / ||Av||`` until successive Rayleigh
    quotients differ by at most ``tol``, then deflates by subtracting
    ``lam v v^T`` and restarts from a fresh seeded vector. Dense-matrix inputs
    run on the compiled kernel (see :mod:`dpca._accel`); callables run a
    matching pure-python loop with functional deflation.

    Parameters
    ----------
    op : (D, D) array_like or callable
        The operator. A callable must map a length-``D`` vector to ``A v``,
        and ``dim`` must be given.
    d : int
        Number of pairs, ``1 <= d <= D``.
    tol : float
        Convergence threshold on successive Rayleigh quotients; must be > 0.
    max_iter : int
        Iteration budget per pair.
    seed : int
        Seed for the starting vectors.
    dim : int, optional
        Operator dimension, required for callables.
    backend : str, optional
        ``"numba"`` or ``"numpy"`` to force a kernel for dense inputs.

    Raises
    ------
    NonConvergenceError
        If some pair fails to converge within ``max_iter``; carries the best
        iterate and its residual.
    """
    if tol <= 0:
        raise InvalidInputError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise InvalidInputError(f"max_iter must be >= 1, got {max_iter}")

    matrix: np.ndarray | None
    if callable(op):
        if dim is None:
            raise DimensionError("dim is required when the operator is a callable")
        matrix = None
        op_dim = int(dim)
    else:
        matrix = check_symmetric(op, "operator")
        op_dim = matrix.shape[0]
    if not 1 <= d <= op_dim:
        raise DimensionError(f"requested {d} pairs from a dimension-{op_dim} operator")

    rng = np.random.default_rng(seed)
    start = rng.standard_normal((op_dim, d))

    if matrix is not None:
        values, vectors, iters, converged, residuals = _accel.power_deflate(
            matrix, start, tol, max_iter, backend=backend)
        for j in range(d):
            if not converged[j]:
                raise NonConvergenceError(
                    f"power iteration for pair {j} did not converge in {max_iter} iterations",
                    best_eigenvalue=float(values[j]), best_vector=vectors[:, j].copy(),
                    residual=float(residuals[j]), iterations=int(iters[j]))
    else:
        values, vectors = _power_callable(op, start, tol, max_iter)

    order = np.argsort(-values, kind="stable")
    values = np.maximum(values[order], 0.0)
    vectors = apply_sign_convention(vectors[:, order])
    return GeneralizedEigenPairs(eigenvalues=values, eigenvectors=vectors)


def _power_callable(apply_op, start, tol, max_iter):
    # Same iteration as the dense kernels, with deflation applied functionally.
    op_dim, d = start.shape
    values = np.zeros(d)
    vectors = np.zeros((op_dim, d))

    def deflated(v, k):
        # copy so deflation never mutates a buffer owned by the operator
        w = np.array(apply_op(v), dtype=np.float64, copy=True)
        if w.shape != (op_dim,):
            raise DimensionError(f"operator returned shape {w.shape}, expected ({op_dim},)")
        for i in range(k):
            w -= values[i] * (vectors[:, i] @ v) * vectors[:, i]
        return w

    for j in range(d):
        v = start[:, j] / np.linalg.norm(start[:, j])
        q = 0.0
        q_prev = np.inf
        ok = False
        it = 0
        while it < max_iter:
            it += 1
            w = deflated(v, j)
            q = float(v @ w)
            if abs(q - q_prev) <= tol:
                ok = True
                break
            norm_w = float(np.linalg.norm(w))
            if norm_w == 0.0:
                q = 0.0
                ok = True
                break
            v = w / norm_w
            q_prev = q
        if not ok:
            resid = float(np.linalg.norm(deflated(v, j) - q * v))
            raise NonConvergenceError(
                f"power iteration for pair {j} did not converge in {max_iter} iterations",
                best_eigenvalue=q, best_vector=v.copy(), residual=resid, iterations=it)
        values[j] = q
        vectors[:, j] = v
    return values, vectors
