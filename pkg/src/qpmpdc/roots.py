"""Bracketed one-dimensional root isolation.

A dense sign-change scan isolates roots first; isolated brackets are then
polished with Brent's method (bisection safeguarded secant/inverse
quadratic steps).
"""

import numpy as np
from scipy.optimize import brentq

EPS = np.finfo(float).eps


def sign_change_brackets(x, y):
    """Index pairs (k, k+1) of a scan where ``y`` changes sign.

    An exact zero at a scan point counts once, as the bracket (k, k).
    Non-finite samples break the scan and never form a bracket.
    """
    y = np.asarray(y, dtype=float)
    s = np.sign(y)
    out = []
    k = 0
    n = len(y)
    while k < n - 1:
        if not (np.isfinite(y[k]) and np.isfinite(y[k + 1])):
            k += 1
            continue
        if s[k] == 0:
            out.append((k, k))
        elif s[k] * s[k + 1] < 0:
            out.append((k, k + 1))
        k += 1
    if n and np.isfinite(y[-1]) and s[-1] == 0:
        out.append((n - 1, n - 1))
    return out


def scan(f, lo, hi, points):
    """Evaluate vectorized ``f`` on ``points`` equispaced samples of [lo, hi]."""
    x = np.linspace(lo, hi, points)
    return x, np.asarray(f(x), dtype=float)


def polish(f, a, b, xtol):
    """Brent root of scalar ``f`` in the sign-change interval [a, b]."""
    if a == b:
        return a
    if a > b:
        a, b = b, a
    return brentq(f, a, b, xtol=xtol, rtol=4 * EPS, maxiter=500)


def bisect_rows(f, lo, hi, iterations=40):
    """Element-wise bisection of independent problems.

    ``f`` maps an array of abscissae (one per problem) to residuals; each
    problem must have a sign change between its ``lo`` and ``hi`` entries.
    Returns the bracket midpoints after ``iterations`` halvings.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = np.sign(f(lo))
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        fm = np.sign(f(mid))
        left = fm == flo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)
