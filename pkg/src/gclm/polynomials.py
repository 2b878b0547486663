"""Shifted Legendre and probabilists' Hermite polynomials.

Degrees 0..3 are evaluated from hard-coded closed forms; higher degrees
use the standard three-term recurrences.  Everything here is pure and
stateless.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

# Ascending coefficient tables for degrees 0..3.
_SHIFTED_LEGENDRE = {
    0: (1.0,),
    1: (-1.0, 2.0),
    2: (1.0, -6.0, 6.0),
    3: (-1.0, 12.0, -30.0, 20.0),
}
_HERMITE = {
    0: (1.0,),
    1: (0.0, 1.0),
    2: (-1.0, 0.0, 1.0),
    3: (0.0, -3.0, 0.0, 1.0),
}

_TABULATED_MAX = 3


def _polyval_ascending(coeffs, x):
    result = np.zeros_like(np.asarray(x, dtype=float))
    for c in reversed(coeffs):
        result = result * x + c
    return result


def eval_shifted_legendre(r: int, u):
    """Evaluate the shifted Legendre polynomial P*_r at u in (0, 1).

    Accepts scalars or arrays; every element of u must be strictly
    inside the unit interval.
    """
    if r < 0:
        raise DomainError(f"degree must be >= 0, got {r}")
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise DomainError("shifted Legendre argument must lie in the open interval (0, 1)")
    if r <= _TABULATED_MAX:
        out = _polyval_ascending(_SHIFTED_LEGENDRE[r], u_arr)
        return out if np.ndim(u) else float(out)

    # (k+1) P*_{k+1}(u) = (2k+1)(2u-1) P*_k(u) - k P*_{k-1}(u)
    t = 2.0 * u_arr - 1.0
    p_prev = np.ones_like(u_arr)
    p_curr = t.copy()
    for k in range(1, r):
        p_next = ((2 * k + 1) * t * p_curr - k * p_prev) / (k + 1)
        p_prev, p_curr = p_curr, p_next
    return p_curr if np.ndim(u) else float(p_curr)


def eval_hermite(r: int, x):
    """Evaluate the probabilists' Hermite polynomial H_r at x.

    Satisfies H_{r+1}(x) = x H_r(x) - r H_{r-1}(x).
    """
    if r < 0:
        raise DomainError(f"degree must be >= 0, got {r}")
    x_arr = np.asarray(x, dtype=float)
    if r <= _TABULATED_MAX:
        out = _polyval_ascending(_HERMITE[r], x_arr)
        return out if np.ndim(x) else float(out)

    h_prev = np.ones_like(x_arr)
    h_curr = x_arr.copy()
    for k in range(1, r):
        h_next = x_arr * h_curr - k * h_prev
        h_prev, h_curr = h_curr, h_next
    return h_curr if np.ndim(x) else float(h_curr)


def shifted_legendre_coefficients(r: int) -> np.ndarray:
    """Ascending coefficients of P*_r, generated by the recurrence."""
    if r < 0:
        raise DomainError(f"degree must be >= 0, got {r}")
    if r <= _TABULATED_MAX:
        return np.asarray(_SHIFTED_LEGENDRE[r], dtype=float)
    p_prev = np.asarray(_SHIFTED_LEGENDRE[_TABULATED_MAX - 1], dtype=float)
    p_curr = np.asarray(_SHIFTED_LEGENDRE[_TABULATED_MAX], dtype=float)
    for k in range(_TABULATED_MAX, r):
        # multiply by (2u - 1): shift for the 2u part, keep for the -1 part
        shifted = np.concatenate(([0.0], 2.0 * p_curr)) - np.concatenate((p_curr, [0.0]))
        p_next = ((2 * k + 1) * shifted - k * np.concatenate((p_prev, [0.0, 0.0]))) / (k + 1)
        p_prev, p_curr = p_curr, p_next
    return p_curr


def hermite_coefficients(r: int) -> np.ndarray:
    """Ascending coefficients of H_r, generated by the recurrence."""
    if r < 0:
        raise DomainError(f"degree must be >= 0, got {r}")
    if r <= _TABULATED_MAX:
        return np.asarray(_HERMITE[r], dtype=float)
    h_prev = np.asarray(_HERMITE[_TABULATED_MAX - 1], dtype=float)
    h_curr = np.asarray(_HERMITE[_TABULATED_MAX], dtype=float)
    for k in range(_TABULATED_MAX, r):
        # H_{k+1} = x H_k - k H_{k-1}
        h_next = np.concatenate(([0.0], h_curr)) - k * np.concatenate((h_prev, [0.0, 0.0]))
        h_prev, h_curr = h_curr, h_next
    return h_curr
