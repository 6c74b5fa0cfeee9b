"""Dense float64 matrix kernels used by every other module.

All kernels are pure functions on immutable inputs and are safe to call
concurrently.  Randomness never comes from global state: every consumer
derives a counter-based generator from an integer seed plus a string
stream label via :func:`rng`, so any quantity in the package is
reproducible from ``(seed, label)``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError

__all__ = [
    "SvdResult",
    "gaussian",
    "glorot_uniform",
    "ridge_solve_batch",
    "rng",
    "softmax_rows",
    "spd_solve",
    "truncated_svd",
]


def rng(seed: int, label: str) -> np.random.Generator:
    """Return a Philox generator keyed by ``(seed, label)``.

    Distinct labels give statistically independent streams for the same
    seed; the same pair always reproduces the same stream.
    """
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    entropy = (int(seed), int.from_bytes(digest[:8], "little"))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def gaussian(gen: np.random.Generator, rows: int, cols: int, std: float) -> np.ndarray:
    """Draw a ``rows x cols`` matrix with i.i.d. N(0, std^2) entries."""
    return std * gen.standard_normal((rows, cols))


def glorot_uniform(gen: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    """Draw a ``fan_in x fan_out`` matrix, uniform on ±sqrt(6/(fan_in+fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return gen.uniform(-limit, limit, size=(fan_in, fan_out))


def _as_matrix(a, name: str) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class SvdResult:
    """Top-k singular triplets: ``u @ diag(s) @ v.T`` is the best rank-k fit.

    ``u`` is n x k, ``s`` is length k and nonincreasing, ``v`` is d x k.
    Columns of ``v`` are sign-fixed so that each column's
    largest-magnitude entry (lowest index on ties) is nonnegative.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def truncated_svd(m, k: int) -> SvdResult:
    """Compute the top-``k`` singular triplets of a dense matrix.

    Raises ``ValueError`` when ``k`` is outside ``[1, min(n, d)]`` or the
    input has non-finite entries.
    """
    m = _as_matrix(m, "m")
    n, d = m.shape
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k={k} out of bounds for a {n}x{d} matrix")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    u = np.ascontiguousarray(u[:, :k])
    s = np.ascontiguousarray(s[:k])
    v = np.ascontiguousarray(vt[:k].T)
    for j in range(k):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0:
            v[:, j] = -v[:, j]
            u[:, j] = -u[:, j]
    return SvdResult(u=u, s=s, v=v)


def spd_solve(a, b) -> np.ndarray:
    """Solve ``A Z = B`` for symmetric positive definite ``A`` via Cholesky.

    ``A`` must be symmetric to within 1e-10 (relative to its largest
    entry).  A failed factorization raises :class:`NumericalError`.
    """
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"a must be square, got shape {a.shape}")
    if b.shape[0] != n:
        raise ValueError(f"b has {b.shape[0]} rows, expected {n}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and float(np.max(np.abs(a - a.T))) > 1e-10 * scale:
        raise ValueError("a is not symmetric within tolerance 1e-10")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Cholesky factorization failed (matrix not SPD): {exc}") from exc
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def ridge_solve_batch(x, y, lam: float) -> np.ndarray:
    """Return ``(X^T X + lam I)^{-1} X^T Y`` for ``lam > 0``."""
    x = _as_matrix(x, "x")
    y = _as_matrix(y, "y")
    if x.shape[0] < 1:
        raise ValueError("x must have at least one row")
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"x and y row counts differ: {x.shape[0]} vs {y.shape[0]}")
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    d = x.shape[1]
    gram = x.T @ x + lam * np.eye(d)
    return spd_solve(gram, x.T @ y)


def softmax_rows(m) -> np.ndarray:
    """Row-wise softmax with per-row max subtraction for stability."""
    m = _as_matrix(m, "m")
    shifted = m - m.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)
