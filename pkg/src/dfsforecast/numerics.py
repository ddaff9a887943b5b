"""Dense least squares and a finite-difference derivative oracle."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from .errors import ContractViolation

RANK_RTOL = 1e-10

# Central stencils (offsets in units of the step, weights, denominator power).
_STENCILS = {
    0: ((0,), (1.0,), 0, 1.0),
    1: ((-1, 1), (-1.0, 1.0), 1, 2.0),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0), 2, 1.0),
    3: ((-2, -1, 1, 2), (-1.0, 2.0, -2.0, 1.0), 3, 2.0),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0), 4, 1.0),
}


@dataclass(frozen=True)
class LeastSquaresSolution:
    coefficients: np.ndarray
    residual_norm: float
    rank: int


def solve_least_squares(A, b, *, rcond: float = RANK_RTOL, ridge: float = 0.0) -> LeastSquaresSolution:
    """Minimum-norm minimizer of ``||A c - b||_2``.

    Uses a complete orthogonal decomposition: QR with column pivoting,
    rank truncation at ``rcond * |R[0, 0]|``, then an RZ step on the
    retained rows so the returned vector has minimum norm even when
    ``A`` is rank deficient.

    ``ridge > 0`` appends ``sqrt(ridge) * I`` rows (Tikhonov). The reported
    residual is always measured on the original system.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or b.ndim != 1:
        raise ContractViolation(f"expected a matrix and a vector, got shapes {A.shape} and {b.shape}")
    m, n = A.shape
    if m < 1 or m != b.shape[0]:
        raise ContractViolation(f"dimension mismatch: A is {m}x{n}, b has length {b.shape[0]}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ContractViolation("least-squares inputs must be finite")
    if ridge < 0:
        raise ContractViolation(f"ridge must be nonnegative, got {ridge}")

    if ridge > 0:
        Aw = np.vstack([A, np.sqrt(ridge) * np.eye(n)])
        bw = np.concatenate([b, np.zeros(n)])
    else:
        Aw, bw = A, b

    coef = np.zeros(n)
    rank = 0
    if n > 0 and np.any(Aw != 0.0):
        Q, R, piv = linalg.qr(Aw, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        rank = int(np.count_nonzero(diag > rcond * diag[0]))
        rhs = Q[:, :rank].T @ bw
        # R[:rank] = T^T Z^T with Z orthonormal columns: minimum-norm y = Z T^-T rhs.
        Z, T = linalg.qr(R[:rank, :].T, mode="economic")
        w = linalg.solve_triangular(T, rhs, trans="T", lower=False)
        coef[piv] = Z @ w

    resid = float(np.linalg.norm(A @ coef - b))
    return LeastSquaresSolution(coefficients=coef, residual_norm=resid, rank=rank)


def _central(f: Callable[[float], float], x0: float, order: int, step: float) -> float:
    offsets, weights, power, denom = _STENCILS[order]
    total = 0.0
    for k, w in zip(offsets, weights):
        value = f(x0 + k * step)
        if not np.isfinite(value):
            raise FloatingPointError(f"non-finite evaluation f({x0 + k * step!r}) = {value!r}")
        total += w * value
    return total / (denom * step**power)


def finite_diff_derivative(f: Callable[[float], float], x0: float, order: int, step: float | None = None) -> float:
    """Estimate the ``order``-th derivative of ``f`` at ``x0``.

    Central differences at ``step`` and ``step / 2`` combined by one level of
    Richardson extrapolation, so the truncation error is O(step**4).
    """
    if order not in _STENCILS:
        raise ContractViolation(f"order must be in 0..4, got {order}")
    if order == 0:
        return float(_central(f, x0, 0, 1.0))
    if step is None:
        step = 1e-3 * max(1.0, abs(x0))
    if not step > 0:
        raise ContractViolation(f"step must be positive, got {step}")
    coarse = _central(f, x0, order, step)
    fine = _central(f, x0, order, step / 2)
    return float((4.0 * fine - coarse) / 3.0)
