"""Adaptive Simpson quadrature with caller-supplied break points."""

from __future__ import annotations

from typing import Callable, Iterable


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    breaks: Iterable[float] = (),
    max_depth: int = 50,
) -> tuple[float, float]:
    """Integrate ``f`` over [a, b]; returns (value, estimated absolute error).

    The interval is first cut at every break point strictly inside (a, b),
    so kinks of a piecewise-smooth integrand never sit inside a panel.
    Each piece gets a share of ``tol`` proportional to its length.
    """
    if b <= a:
        return 0.0, 0.0
    cuts = sorted({a, b, *(x for x in breaks if a < x < b)})
    total = 0.0
    err = 0.0
    span = b - a
    for lo, hi in zip(cuts, cuts[1:]):
        v, e = _simpson_piece(f, lo, hi, tol * (hi - lo) / span, max_depth)
        total += v
        err += e
    return total, err


def _simpson_piece(f, a, b, tol, max_depth):
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    # explicit stack keeps deep refinements off the Python call stack
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    err = 0.0
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol or depth >= max_depth:
            # Richardson step lifts the estimate to fifth order
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
    return total, err
