"""Backend selection for the hot power-iteration kernel.

Two interchangeable implementations of deflated power iteration live here:
a numba ``@njit`` kernel and a pure-numpy fallback. The default backend is
numba when importable; setting the environment variable ``DPCA_DISABLE_NUMBA``
to a truthy value (``1``, ``true``, ``yes``) forces the numpy path. Callers
may also pass ``backend="numpy"`` / ``backend="numba"`` explicitly, which is
what ``bench/bench_power.py`` does to time both paths in one process.

Both kernels run the same arithmetic sequence, so they agree to rounding:
for each of the ``d`` requested pairs, iterate ``v <- Av/||Av||`` until two
successive Rayleigh quotients differ by at most ``tol``, then deflate the
working matrix by ``A <- A - q v v^T``.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "DPCA_DISABLE_NUMBA"


def _numba_disabled_by_env() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def _power_deflate_py(mat, start, tol, max_iter):
    # Pure-numpy twin of the njit kernel below. Keep the two in lockstep.
    dim = mat.shape[0]
    d = start.shape[1]
    values = np.zeros(d)
    vectors = np.zeros((dim, d))
    iterations = np.zeros(d, dtype=np.int64)
    converged = np.zeros(d, dtype=np.bool_)
    residuals = np.zeros(d)

    work = mat.copy()
    for j in range(d):
        v = start[:, j].copy()
        v /= np.sqrt(v @ v)
        q = 0.0
        q_prev = np.inf
        it = 0
        while it < max_iter:
            it += 1
            w = work @ v
            q = v @ w
            if abs(q - q_prev) <= tol:
                converged[j] = True
                break
            norm_w = np.sqrt(w @ w)
            if norm_w == 0.0:
                # v lies in the null space of the deflated operator
                q = 0.0
                converged[j] = True
                break
            v = w / norm_w
            q_prev = q
        values[j] = q
        vectors[:, j] = v
        iterations[j] = it
        residuals[j] = np.sqrt(np.sum((work @ v - q * v) ** 2))
        if not converged[j]:
            break
        work -= q * np.outer(v, v)
    return values, vectors, iterations, converged, residuals


@njit(cache=True)
def _power_deflate_nb(mat, start, tol, max_iter):  # pragma: no cover - numba path
    dim = mat.shape[0]
    d = start.shape[1]
    values = np.zeros(d)
    vectors = np.zeros((dim, d))
    iterations = np.zeros(d, dtype=np.int64)
    converged = np.zeros(d, dtype=np.bool_)
    residuals = np.zeros(d)

    work = mat.copy()
    for j in range(d):
        v = start[:, j].copy()
        v /= np.sqrt(np.dot(v, v))
        q = 0.0
        q_prev = np.inf
        it = 0
        while it < max_iter:
            it += 1
            w = np.dot(work, v)
            q = np.dot(v, w)
            if abs(q - q_prev) <= tol:
                converged[j] = True
                break
            norm_w = np.sqrt(np.dot(w, w))
            if norm_w == 0.0:
                q = 0.0
                converged[j] = True
                break
            v = w / norm_w
            q_prev = q
        values[j] = q
        vectors[:, j] = v
        iterations[j] = it
        resid = 0.0
        r = np.dot(work, v)
        for a in range(dim):
            diff = r[a] - q * v[a]
            resid += diff * diff
        residuals[j] = np.sqrt(resid)
        if not converged[j]:
            break
        for a in range(dim):
            va = q * v[a]
            for b in range(dim):
                work[a, b] -= va * v[b]
    return values, vectors, iterations, converged, residuals


def default_backend() -> str:
    """Name of the backend used when none is requested explicitly."""
    if _HAVE_NUMBA and not _numba_disabled_by_env():
        return "numba"
    return "numpy"


def power_deflate(mat: np.ndarray, start: np.ndarray, tol: float, max_iter: int,
                  backend: str | None = None):
    """Run deflated power iteration on a dense symmetric matrix.

    Returns ``(values, vectors, iterations, converged, residuals)`` with one
    entry per requested pair; iteration stops at the first pair that fails to
    converge within ``max_iter``.
    """
    chosen = backend or default_backend()
    mat = np.ascontiguousarray(mat, dtype=np.float64)
    start = np.ascontiguousarray(start, dtype=np.float64)
    if chosen == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return _power_deflate_nb(mat, start, float(tol), int(max_iter))
    if chosen == "numpy":
        return _power_deflate_py(mat, start, float(tol), int(max_iter))
    raise ValueError(f"unknown backend {chosen!r}; expected 'numba' or 'numpy'")
