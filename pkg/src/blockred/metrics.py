"""Error metrics and frequency-domain summaries for stable LTI systems.

Gramians come from Lyapunov equations, the H2 norm from the controllability
gramian, Hankel singular values from the symmetric product of both gramians,
and the relative reduction error RE compares Hankel power sums of a neglected
subsystem against the full system.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._util import as_matrix
from .errors import (
    DimensionMismatch,
    FeedthroughMismatch,
    NonzeroFeedthrough,
    UnstableSystem,
)
from .sysrep import (
    BlockDiagonalRealization,
    RightMFD,
    StateSpace,
    controller_canonical,
    recompose,
)


@dataclass
class Gramians:
    controllability: np.ndarray
    observability: np.ndarray


@dataclass
class HankelSpectrum:
    """Hankel singular values, largest first."""

    values: np.ndarray

    def power_sum(self, power):
        return float(np.sum(self.values ** power))


@dataclass
class BodeTable:
    """Frequency response samples: omega[k] with |G_ij| and arg G_ij."""

    omega: np.ndarray
    magnitude: np.ndarray  # shape (count, p, m)
    phase_deg: np.ndarray  # shape (count, p, m)


def as_state_space(system):
    """View any supported representation as a plain state-space system."""
    if isinstance(system, StateSpace):
        return system
    if isinstance(system, RightMFD):
        return controller_canonical(system)
    if isinstance(system, BlockDiagonalRealization):
        return recompose(system)
    raise DimensionMismatch(f"unsupported system type {type(system).__name__}")


def _require_stable(sys, what):
    if not sys.is_stable():
        worst = max(sys.poles().real) if sys.n else 0.0
        raise UnstableSystem(f"{what} needs a stable system (max Re pole = {worst:.6g})")


def lyapunov_solve(a, q):
    """Solve A X + X A^T + Q = 0 for symmetric Q."""
    a = as_matrix(a, "A")
    q = as_matrix(q, "Q")
    if a.shape[0] != a.shape[1] or q.shape != a.shape:
        raise DimensionMismatch("A and Q must be square and equally sized")
    if a.shape[0] == 0:
        return np.zeros((0, 0))
    x = scipy.linalg.solve_continuous_lyapunov(a, -q)
    return 0.5 * (x + x.T)


def gramians(system):
    """Controllability and observability gramians of a stable system."""
    sys = as_state_space(system)
    _require_stable(sys, "gramian computation")
    P = lyapunov_solve(sys.A, sys.B @ sys.B.T)
    Q = lyapunov_solve(sys.A.T, sys.C.T @ sys.C)
    return Gramians(P, Q)


def h2_norm(system):
    """H2 norm sqrt(trace(C P C^T)) of a stable strictly proper system."""
    sys = as_state_space(system)
    _require_stable(sys, "the H2 norm")
    dmax = float(np.max(np.abs(sys.D))) if sys.D.size else 0.0
    if dmax > 0.0:
        raise NonzeroFeedthrough(
            "the H2 norm is infinite for systems with nonzero feedthrough"
        )
    if sys.n == 0:
        return 0.0
    P = lyapunov_solve(sys.A, sys.B @ sys.B.T)
    val = float(np.trace(sys.C @ P @ sys.C.T))
    return float(np.sqrt(max(val, 0.0)))


def difference_system(a, b):
    """Realization of G_a - G_b by direct sum."""
    sa = as_state_space(a)
    sb = as_state_space(b)
    if sa.m != sb.m or sa.p != sb.p:
        raise DimensionMismatch(
            f"io shapes differ: {sa.p}x{sa.m} vs {sb.p}x{sb.m}"
        )
    A = scipy.linalg.block_diag(sa.A, sb.A)
    B = np.vstack([sa.B, sb.B])
    C = np.hstack([sa.C, -sb.C])
    return StateSpace(A, B, C, sa.D - sb.D)


def h2_error(a, b):
    """H2 norm of the difference of two systems with equal feedthrough."""
    sa = as_state_space(a)
    sb = as_state_space(b)
    diff = difference_system(sa, sb)
    scale = max(1.0, float(np.max(np.abs(sa.D))), float(np.max(np.abs(sb.D))))
    if diff.D.size and float(np.max(np.abs(diff.D))) > 1e-12 * scale:
        raise FeedthroughMismatch(
            "systems have different feedthrough; the H2 difference is infinite"
        )
    diff = StateSpace(diff.A, diff.B, diff.C, np.zeros_like(diff.D))
    return h2_norm(diff)


def hankel_singular_values(system):
    """Hankel singular values from the gramian pair, largest first."""
    sys = as_state_space(system)
    g = gramians(sys)
    if sys.n == 0:
        return HankelSpectrum(np.zeros(0))
    w, U = np.linalg.eigh(g.controllability)
    w = np.clip(w, 0.0, None)
    S = U * np.sqrt(w)
    M = S.T @ g.observability @ S
    ev = np.linalg.eigvalsh(0.5 * (M + M.T))
    ev = np.clip(ev, 0.0, None)
    sig = np.sqrt(ev)[::-1]
    return HankelSpectrum(np.ascontiguousarray(sig))


def relative_error(full, neglected, hankel_power=4):
    """RE: root of the Hankel power-sum ratio of neglected over full.

    hankel_power selects the exponent (2 or 4) applied to both spectra.
    """
    if hankel_power not in (2, 4):
        raise ValueError(f"hankel_power must be 2 or 4, got {hankel_power}")
    sig_full = hankel_singular_values(full).values
    sig_neg = hankel_singular_values(neglected).values
    denom = float(np.sum(sig_full ** hankel_power))
    numer = float(np.sum(sig_neg ** hankel_power))
    if denom == 0.0:
        return 0.0 if numer == 0.0 else np.inf
    return float(np.sqrt(numer / denom))


def bode_samples(system, wmin=1e-2, wmax=1e3, count=200):
    """Frequency response on a log grid: magnitudes and phases in degrees."""
    sys_like = system if hasattr(system, "transfer") else as_state_space(system)
    if count < 2:
        raise ValueError("count must be at least 2")
    if not (0 < wmin < wmax):
        raise ValueError("need 0 < wmin < wmax")
    omega = np.geomspace(wmin, wmax, count)
    mags = []
    phases = []
    for w in omega:
        G = np.asarray(sys_like.transfer(1j * w), dtype=complex)
        mags.append(np.abs(G))
        phases.append(np.degrees(np.angle(G)))
    return BodeTable(omega, np.array(mags), np.array(phases))
