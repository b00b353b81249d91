"""Small numeric helpers used across modules."""

import numpy as np


def as_matrix(a, name="matrix"):
    from .errors import DimensionMismatch

    arr = np.asarray(a)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    if np.iscomplexobj(arr):
        return arr.astype(np.complex128)
    return arr.astype(np.float64)


def realify(a, tol=1e-8):
    """Drop a negligible imaginary part, else return the input unchanged."""
    a = np.asarray(a)
    if not np.iscomplexobj(a):
        return a
    scale = max(1.0, float(np.max(np.abs(a.real)))) if a.size else 1.0
    if a.size == 0 or np.max(np.abs(a.imag)) <= tol * scale:
        return np.ascontiguousarray(a.real)
    return a


def sort_complex(z):
    """Sort by real part, then imaginary part (both ascending)."""
    z = np.asarray(z, dtype=complex).ravel()
    order = np.lexsort((z.imag, z.real))
    return z[order]


def phase_normalize(v):
    """Scale a vector to unit norm with its largest entry real positive."""
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        return v
    v = v / n
    k = int(np.argmax(np.abs(v)))
    ph = v[k] / abs(v[k])
    return v / ph


def cond2(a):
    """2-norm condition number, inf when numerically singular."""
    if a.size == 0:
        return 1.0
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] == 0.0 or not np.isfinite(s[-1]):
        return np.inf
    return float(s[0] / s[-1])


def is_conjugate_closed(values, tol=1e-8):
    """True when the multiset of values is closed under complex conjugation."""
    vals = list(np.asarray(values, dtype=complex).ravel())
    scale = max(1.0, max((abs(v) for v in vals), default=1.0))
    unmatched = [v for v in vals if abs(v.imag) > tol * scale]
    while unmatched:
        v = unmatched.pop()
        best = None
        for i, w in enumerate(unmatched):
            d = abs(np.conj(v) - w)
            if best is None or d < best[1]:
                best = (i, d)
        if best is None or best[1] > tol * scale:
            return False
        unmatched.pop(best[0])
    return True


def pair_distance(a, b):
    """Greatest-per-element distance of an optimal matching of two multisets.

    Returns inf when the multisets have different sizes.
    """
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return np.inf
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
