"""Adaptive Simpson quadrature.

Recursive composite Simpson with Richardson correction.  Refinement stops
when the local error estimate drops below the tolerance; hitting the depth
cap without converging raises instead of silently truncating.
"""

from __future__ import annotations

from typing import Callable

__all__ = ["QuadratureError", "adaptive_simpson"]


class QuadratureError(RuntimeError):
    """Raised when the recursion depth cap is hit before convergence."""


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adapt(f, a, b, fa, fm, fb, whole, tol, depth, max_depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    err = (left + right - whole) / 15.0
    if abs(err) <= tol:
        return left + right + err
    if depth >= max_depth:
        raise QuadratureError(
            f"no convergence on [{a}, {b}]: local error {abs(err):.3e} > {tol:.3e} "
            f"at depth {depth}"
        )
    half = tol / 2.0
    return _adapt(f, a, m, fa, flm, fm, left, half, depth + 1, max_depth) + _adapt(
        f, m, b, fm, frm, fb, right, half, depth + 1, max_depth
    )


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_depth: int = 30,
) -> float:
    """Integrate f over [a, b] to the requested local error tolerance.

    Raises
    ------
    QuadratureError
        If the depth cap is reached with the local error still above tol.
    """
    if b <= a:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, b - a)
    return _adapt(f, a, b, fa, fm, fb, whole, tol, 0, max_depth)
