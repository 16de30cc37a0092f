"""Small dense linear-algebra kernel for ridge-regularized Gram matrices.

Gram states carry both A = I + sum(x x^T) and its inverse, maintained
incrementally by the Sherman-Morrison rank-one update so that confidence
widths and least-squares estimates never pay for a full solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Max-entry tolerance for A @ A_inv == I; double precision is comfortable
# here for the dimensions this kernel is used at (d <= a few hundred).
INVERSE_TOL = 1e-9

# Radicand values in [-RADICAND_TOL, 0] are rounding noise and clamp to 0.
RADICAND_TOL = 1e-12

_UNIT_BALL_TOL = 1e-12

# In debug builds, recompute the inverse directly every this many updates.
_RECHECK_EVERY = 1000


class NumericDegeneracyError(ArithmeticError):
    """Raised when maintained matrices drift outside numeric tolerances."""


@dataclass(frozen=True)
class GramState:
    """Regularized Gram matrix A = I_d + sum(x x^T) with maintained inverse."""

    dim: int
    a: np.ndarray
    a_inv: np.ndarray
    n_updates: int = 0


def gram_init(dim: int) -> GramState:
    """Fresh Gram state: A = A^{-1} = I_d."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return GramState(dim=dim, a=np.eye(dim), a_inv=np.eye(dim), n_updates=0)


def gram_update(state: GramState, x: np.ndarray) -> GramState:
    """Rank-one update A += x x^T with Sherman-Morrison inverse maintenance.

    Feature vectors must live in the unit ball. Returns a new state; the
    input is left untouched.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (state.dim,):
        raise ValueError(f"expected vector of shape ({state.dim},), got {x.shape}")
    if np.linalg.norm(x) > 1.0 + _UNIT_BALL_TOL:
        raise ValueError("feature vector lies outside the unit ball")

    a = state.a + np.outer(x, x)
    u = state.a_inv @ x
    a_inv = state.a_inv - np.outer(u, u) / (1.0 + float(x @ u))
    n = state.n_updates + 1
    if n % _RECHECK_EVERY == 0:
        assert np.max(np.abs(a_inv - np.linalg.inv(a))) < INVERSE_TOL, (
            "Sherman-Morrison inverse drifted beyond tolerance"
        )
    return GramState(dim=state.dim, a=a, a_inv=a_inv, n_updates=n)


def quad_width(state: GramState, x: np.ndarray) -> float:
    """sqrt(x^T A^{-1} x), the unscaled confidence width for direction x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (state.dim,):
        raise ValueError(f"expected vector of shape ({state.dim},), got {x.shape}")
    q = float(x @ state.a_inv @ x)
    if q < -RADICAND_TOL:
        raise NumericDegeneracyError(f"negative quadratic form {q}")
    return float(np.sqrt(max(q, 0.0)))


def quad_widths(state: GramState, xs: np.ndarray) -> np.ndarray:
    """quad_width applied to every row of xs (shape (k, d))."""
    xs = np.asarray(xs, dtype=float)
    q = np.einsum("ij,jk,ik->i", xs, state.a_inv, xs)
    low = q.min(initial=0.0)
    if low < -RADICAND_TOL:
        raise NumericDegeneracyError(f"negative quadratic form {low}")
    return np.sqrt(np.clip(q, 0.0, None))


def p_norm(v: np.ndarray, p: float) -> float:
    """(sum |v_i|^p)^(1/p) for p >= 1."""
    if p < 1.0:
        raise ValueError(f"p-norm requires p >= 1, got {p}")
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.sum(np.abs(v) ** p) ** (1.0 / p))


def lower_median(values) -> tuple[float, int]:
    """Element median: value of rank floor((n-1)/2) after a stable sort.

    Returns (value, original index). For odd n this is the standard median;
    for even n the lower of the two central elements. The result is always
    an element of the input, which the median-of-means analysis requires.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("median of empty list")
    order = np.argsort(arr, kind="stable")
    idx = int(order[(arr.size - 1) // 2])
    return float(arr[idx]), idx
