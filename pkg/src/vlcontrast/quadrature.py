"""Adaptive Simpson quadrature.

Self-contained replacement for scipy.integrate.quad, good enough for the
smooth (piecewise, because of positive-part kinks) gamma-density
integrands used by the contrast features.
"""

from __future__ import annotations

from collections.abc import Callable

__all__ = ["adaptive_simpson"]


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width / 6.0 * (fa + 4.0 * fm + fb)


def _adapt(f, a, b, fa, fm, fb, whole, tol, depth) -> float:
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    err = (left + right - whole) / 15.0
    if depth <= 0 or abs(err) <= tol:
        # Richardson extrapolation
        return left + right + err
    half = 0.5 * tol
    return (_adapt(f, a, m, fa, flm, fm, left, half, depth - 1)
            + _adapt(f, m, b, fm, frm, fb, right, half, depth - 1))


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_depth: int = 48,
    initial_panels: int = 1,
) -> float:
    """Integrate f over [a, b] to absolute tolerance tol.

    `initial_panels` forces a uniform pre-split before adaptation; use it
    when f may be identically zero at coarse sample points but not in
    between (positive-part integrands).
    """
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth, initial_panels)
    if a == b:
        return 0.0
    if initial_panels < 1:
        raise ValueError("initial_panels must be >= 1")
    panel_tol = tol / initial_panels
    width = (b - a) / initial_panels
    total = 0.0
    for i in range(initial_panels):
        lo = a + i * width
        hi = b if i == initial_panels - 1 else lo + width
        flo = f(lo)
        fhi = f(hi)
        fmid = f(0.5 * (lo + hi))
        whole = _simpson(flo, fmid, fhi, hi - lo)
        total += _adapt(f, lo, hi, flo, fmid, fhi, whole, panel_tol, max_depth)
    return total
