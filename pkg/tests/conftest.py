"""Shared builders and independent oracles for the test suite.

The oracles deliberately avoid the code paths they check: the Lyapunov
oracle solves the Kronecker-product linear system directly, the H2 oracle
integrates the frequency response numerically, and transfer values come
from plain dense solves.
"""

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from blockred.matpoly import MatrixPolynomial
from blockred.sysrep import StateSpace


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- builders -----------------------------------------------------------------

def random_monic_poly(rng, m, r, root_scale=2.0):
    """Monic matrix polynomial with random (generically simple) structure."""
    coeffs = [np.eye(m)]
    for _ in range(r):
        coeffs.append(root_scale * rng.standard_normal((m, m)))
    return MatrixPolynomial(coeffs)


def random_stable_matrix(rng, n, margin=0.3):
    a = rng.standard_normal((n, n))
    shift = float(np.max(np.linalg.eigvals(a).real))
    return a - (shift + margin + rng.uniform(0.0, 1.0)) * np.eye(n)


def random_stable_system(rng, n, m, p, margin=0.3):
    return StateSpace(
        random_stable_matrix(rng, n, margin),
        rng.standard_normal((n, m)),
        rng.standard_normal((p, n)),
        np.zeros((p, m)),
    )


def random_diagonalizable_stable(rng, n, m, p):
    """Stable system with a well-conditioned eigenbasis and simple spectrum."""
    n_pairs = int(rng.integers(0, n // 2 + 1))
    blocks = []
    used = 0
    re_parts = -np.sort(rng.uniform(0.3, 4.0, size=n))  # distinct enough
    idx = 0
    for _ in range(n_pairs):
        al = re_parts[idx]
        be = rng.uniform(0.4, 3.0)
        blocks.append(np.array([[al, -be], [be, al]]))
        used += 2
        idx += 1
    while used < n:
        blocks.append(np.array([[re_parts[idx]]]))
        used += 1
        idx += 1
    a0 = scipy.linalg.block_diag(*blocks)
    while True:
        t = rng.standard_normal((n, n))
        if np.linalg.cond(t) < 50.0:
            break
    a = t @ a0 @ np.linalg.inv(t)
    return StateSpace(
        a, rng.standard_normal((n, m)), rng.standard_normal((p, n)),
        np.zeros((p, m)),
    )


def planted_block_system(rng, suppress=True):
    """Decoupled stable 2x2 rotation blocks with separated conjugate pole
    pairs and balanced per-block Hankel content; optionally one block's
    output matrix is suppressed 100x.

    Returns (system, index of the weak block, list of block A matrices).
    """
    r = int(rng.integers(3, 5))
    while True:
        alphas = rng.uniform(-2.2, -0.55, size=r)
        betas = rng.uniform(0.4, 2.4, size=r)
        poles = alphas + 1j * betas
        ok = True
        for i in range(r):
            for j in range(i + 1, r):
                lim = 0.15 * max(1.0, abs(poles[i]), abs(poles[j]))
                if (abs(poles[i] - poles[j]) < lim
                        or abs(poles[i] - np.conj(poles[j])) < lim):
                    ok = False
        if ok:
            break
    ablocks, bs, cs = [], [], []
    for i in range(r):
        a = np.array([[alphas[i], -betas[i]], [betas[i], alphas[i]]])
        t = rng.standard_normal((2, 2))
        while abs(np.linalg.det(t)) < 0.3:
            t = rng.standard_normal((2, 2))
        ai = t @ a @ np.linalg.inv(t)
        bi = rng.standard_normal((2, 2))
        ci = rng.standard_normal((2, 2))
        P = scipy.linalg.solve_continuous_lyapunov(ai, -bi @ bi.T)
        Q = scipy.linalg.solve_continuous_lyapunov(ai.T, -ci.T @ ci)
        s_top = np.sqrt(np.max(np.abs(np.linalg.eigvals(P @ Q))))
        ablocks.append(ai)
        bs.append(bi)
        cs.append(ci / s_top)
    weak = int(rng.integers(0, r))
    if suppress:
        cs[weak] = cs[weak] / 100.0
    ss = StateSpace(
        scipy.linalg.block_diag(*ablocks), np.vstack(bs), np.hstack(cs),
        np.zeros((2, 2)),
    )
    return ss, weak, ablocks


def probe_points(rng, count=20, scale=3.0):
    """Complex probe points spread over the right half plane and the axis
    neighborhood, away from typical pole locations."""
    re = rng.uniform(0.2, scale, size=count)
    im = rng.uniform(-scale, scale, size=count)
    return re + 1j * im


# -- oracles ------------------------------------------------------------------

def lyapunov_oracle(a, q):
    """Solve A X + X A^T + Q = 0 through the Kronecker-product system."""
    n = a.shape[0]
    big = np.kron(np.eye(n), a) + np.kron(a, np.eye(n))
    x = np.linalg.solve(big, -q.reshape(-1))
    return x.reshape(n, n)


def transfer_oracle(ss, s):
    """Direct dense evaluation C (sI - A)^-1 B + D."""
    x = np.linalg.solve(s * np.eye(ss.n) - ss.A, ss.B)
    return ss.C @ x + ss.D


def h2_oracle(ss, limit=400):
    """H2 norm by numerical quadrature of the frequency response.

    Integrates ||G(iw)||_F^2 / pi over w >= 0 (the response of a real system
    is conjugate-symmetric in w).
    """
    def dens(w):
        g = transfer_oracle(ss, 1j * w)
        return float(np.sum(np.abs(g) ** 2)) / np.pi

    val, _err = scipy.integrate.quad(dens, 0.0, np.inf, limit=limit)
    return float(np.sqrt(val))


def hankel_oracle(ss):
    """Hankel singular values via the eigenvalues of P Q (dense, unsymmetric)."""
    P = lyapunov_oracle(ss.A, ss.B @ ss.B.T)
    Q = lyapunov_oracle(ss.A.T, ss.C.T @ ss.C)
    w = np.linalg.eigvals(P @ Q)
    w = np.clip(w.real, 0.0, None)
    return np.sort(np.sqrt(w))[::-1]


def poly_value_oracle(P, s):
    """Direct power-sum evaluation of a matrix polynomial at a scalar."""
    m = P.block_size
    total = np.zeros((P.rows, P.cols), dtype=complex)
    r = P.degree
    for i, c in enumerate(P.coeffs):
        total = total + np.asarray(c, dtype=complex) * s ** (r - i)
    return total


def block_value_oracle(P, X, side="right"):
    """Direct power-sum block value: sum A_i X^(r-i) or X^(r-i) A_i."""
    r = P.degree
    m = X.shape[0]
    total = np.zeros_like(np.asarray(X, dtype=complex))
    for i, c in enumerate(P.coeffs):
        power = np.linalg.matrix_power(np.asarray(X, dtype=complex), r - i)
        c = np.asarray(c, dtype=complex)
        total = total + (c @ power if side == "right" else power @ c)
    return total
