"""Exact rational linear algebra.

Systems with rational coefficients are scaled to integers row by row and
reduced by fraction-free (Bareiss) Gauss-Jordan elimination, so that every
intermediate is an integer and the only divisions happen at the very end.
Float systems go straight to LAPACK through numpy.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np

from .errors import SingularSystem


def to_fraction(x) -> Fraction:
    """Convert ints, Fractions, "p/q" strings and floats (via their decimal repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(repr(float(x)))
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def _integer_rows(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for i, row in enumerate(a):
        fr = [to_fraction(v) for v in row]
        scale = lcm(*(v.denominator for v in fr)) if fr else 1
        out[i] = [v.numerator * (scale // v.denominator) for v in fr]
    return out


def solve_exact(a, b) -> np.ndarray:
    """Solve ``a x = b`` exactly.

    Parameters
    ----------
    a : (n, n) array-like of rationals
    b : (n,) or (n, r) array-like of rationals

    Returns
    -------
    x : object ndarray of Fraction with the shape of ``b``.
    """
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError("shape mismatch in solve_exact")
    vector = b.ndim == 1
    rhs = b.reshape(n, 1) if vector else b
    if n == 0:
        return np.empty(b.shape, dtype=object)
    m = _integer_rows(np.concatenate([a, rhs], axis=1))
    prev = 1
    for k in range(n):
        if m[k, k] == 0:
            nz = [i for i in range(k + 1, n) if m[i, k] != 0]
            if not nz:
                raise SingularSystem(f"zero pivot in column {k}")
            m[[k, nz[0]]] = m[[nz[0], k]]
        pivot = m[k, k]
        others = np.array([i for i in range(n) if i != k], dtype=int)
        if others.size:
            col = m[others, k].copy()
            m[others] = (m[others] * pivot - np.outer(col, m[k])) // prev
        prev = pivot
    # every diagonal entry now equals the determinant
    det = m[0, 0]
    x = np.empty(rhs.shape, dtype=object)
    for i in range(n):
        for j in range(rhs.shape[1]):
            x[i, j] = Fraction(m[i, n + j], det)
    return x[:, 0] if vector else x


def solve(a, b, exact: bool):
    if exact:
        return solve_exact(a, b)
    try:
        return np.linalg.solve(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
