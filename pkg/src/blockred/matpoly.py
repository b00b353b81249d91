"""Matrix polynomials: evaluation, latent structure, block division.

A degree-r matrix polynomial is stored leading coefficient first,

    A(s) = C[0] s**r + C[1] s**(r-1) + ... + C[r],

with every coefficient the same (possibly rectangular) shape.  Latent roots
and latent vectors, the block companion matrix, block division by a linear
factor s*I - X, and the scalar determinant polynomial all live here.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._util import as_matrix, cond2, phase_normalize, realify, sort_complex
from .errors import (
    DimensionMismatch,
    InterpolationError,
    NotALatentRoot,
    SingularLeadingCoefficient,
)

# Condition limit for treating a leading coefficient as invertible.
COND_LIMIT = 1e10
DEFAULT_TAU_NULL = 1e-6


@dataclass
class LatentPair:
    """A latent root with its latent vector(s).

    right satisfies A(root) @ right ~ 0; left satisfies left.T @ A(root) ~ 0.
    Residuals are the corresponding 2-norms after unit normalization.
    """

    root: complex
    right: Optional[np.ndarray] = None
    left: Optional[np.ndarray] = None
    residual_right: Optional[float] = None
    residual_left: Optional[float] = None


@dataclass
class BlockDivisionResult:
    quotient: "MatrixPolynomial"
    remainder: np.ndarray
    side: str


class MatrixPolynomial:
    """Matrix polynomial with coefficients stored leading-first."""

    def __init__(self, coeffs):
        mats = [as_matrix(c, f"coefficient {i}") for i, c in enumerate(coeffs)]
        if not mats:
            raise DimensionMismatch("a matrix polynomial needs at least one coefficient")
        shape = mats[0].shape
        for i, c in enumerate(mats):
            if c.shape != shape:
                raise DimensionMismatch(
                    f"coefficient {i} has shape {c.shape}, expected {shape}"
                )
        if np.any([np.iscomplexobj(c) for c in mats]):
            mats = [c.astype(np.complex128) for c in mats]
        for c in mats:
            c.flags.writeable = False
        self.coeffs = tuple(mats)

    # -- basic structure ------------------------------------------------

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def rows(self):
        return self.coeffs[0].shape[0]

    @property
    def cols(self):
        return self.coeffs[0].shape[1]

    @property
    def block_size(self):
        if self.rows != self.cols:
            raise DimensionMismatch(
                f"square blocks required, got {self.rows}x{self.cols}"
            )
        return self.rows

    @property
    def is_square(self):
        return self.rows == self.cols

    @property
    def is_real(self):
        return not any(np.iscomplexobj(c) for c in self.coeffs)

    @property
    def is_monic(self):
        return (
            self.is_square
            and np.max(np.abs(self.coeffs[0] - np.eye(self.rows))) <= 1e-12
        )

    def __repr__(self):
        kind = f"{self.rows}x{self.cols}"
        return f"MatrixPolynomial(degree={self.degree}, blocks={kind})"

    def trimmed(self, tol=0.0):
        """Drop numerically zero leading coefficients (keeps at least one)."""
        scale = max((float(np.max(np.abs(c))) for c in self.coeffs), default=0.0)
        thresh = tol * max(scale, 1.0)
        k = 0
        while k < self.degree and np.max(np.abs(self.coeffs[k])) <= thresh:
            k += 1
        if k == 0:
            return self
        return MatrixPolynomial(self.coeffs[k:])

    # -- evaluation -----------------------------------------------------

    def evaluate(self, s):
        """Value of the polynomial at a complex scalar, by Horner recursion."""
        value = np.array(self.coeffs[0], dtype=complex)
        for c in self.coeffs[1:]:
            value = value * s + c
        if self.is_real and not np.iscomplexobj(np.asarray(s)):
            return value.real
        return value

    def block_value(self, X, side="right"):
        """Value with a square matrix substituted for the scalar variable.

        side "right" computes sum_i C[i] @ X**(r-i); side "left" computes
        sum_i X**(r-i) @ C[i].  Equal to the block division remainder on the
        same side.
        """
        X = as_matrix(X, "X")
        _check_side(side)
        want = self.cols if side == "right" else self.rows
        if X.shape != (want, want):
            raise DimensionMismatch(
                f"X must be {want}x{want} for side '{side}', got {X.shape}"
            )
        value = np.array(self.coeffs[0], dtype=np.result_type(self.coeffs[0], X))
        for c in self.coeffs[1:]:
            value = value @ X + c if side == "right" else X @ value + c
        return value

    def block_divide(self, X, side="right"):
        """Divide by the linear factor (s*I - X) on the given side.

        Right: A(s) = Q(s) @ (s I - X) + R.  Left: A(s) = (s I - X) @ Q(s) + R.
        The quotient has degree r - 1; the remainder is a constant matrix.
        """
        if self.degree < 1:
            raise DimensionMismatch("block division needs degree >= 1")
        X = as_matrix(X, "X")
        _check_side(side)
        want = self.cols if side == "right" else self.rows
        if X.shape != (want, want):
            raise DimensionMismatch(
                f"X must be {want}x{want} for side '{side}', got {X.shape}"
            )
        dtype = np.result_type(self.coeffs[0], X)
        q = [np.array(self.coeffs[0], dtype=dtype)]
        for i in range(1, self.degree):
            prev = q[-1]
            nxt = self.coeffs[i] + (prev @ X if side == "right" else X @ prev)
            q.append(nxt)
        last = q[-1]
        rem = self.coeffs[-1] + (last @ X if side == "right" else X @ last)
        return BlockDivisionResult(MatrixPolynomial(q), rem, side)

    # -- latent structure -----------------------------------------------

    def monic_normalized(self):
        """Equivalent monic polynomial inv(C[0]) @ A(s).

        Latent roots and right latent vectors are unchanged.
        """
        n = self.block_size
        lead = self.coeffs[0]
        if self.is_monic:
            return self
        if cond2(lead) >= COND_LIMIT:
            raise SingularLeadingCoefficient(
                f"leading coefficient condition {cond2(lead):.2e} exceeds {COND_LIMIT:.0e}"
            )
        lu = np.linalg.inv(lead)
        coeffs = [np.eye(n)] + [lu @ c for c in self.coeffs[1:]]
        return MatrixPolynomial([realify(c, 1e-12) for c in coeffs])

    def companion(self):
        """Block companion matrix (bottom block row carries the coefficients).

        For a monic degree-r polynomial with m x m blocks the result is
        r*m x r*m with identity blocks on the superdiagonal and
        [-C[r], ..., -C[1]] along the bottom block row.
        """
        mono = self.monic_normalized()
        m = mono.block_size
        r = mono.degree
        if r == 0:
            return np.zeros((0, 0))
        dtype = complex if not mono.is_real else float
        A = np.zeros((r * m, r * m), dtype=dtype)
        for i in range(r - 1):
            A[i * m:(i + 1) * m, (i + 1) * m:(i + 2) * m] = np.eye(m)
        for j in range(r):
            A[(r - 1) * m:, j * m:(j + 1) * m] = -mono.coeffs[r - j]
        return A

    def latent_roots(self):
        """All r*m latent roots (eigenvalues of the block companion)."""
        C = self.companion()
        if C.shape[0] == 0:
            return np.zeros(0, dtype=complex)
        return sort_complex(np.linalg.eigvals(C))

    def latent_vector(self, root, side="right", tau_null=DEFAULT_TAU_NULL):
        """Unit latent vector at a latent root, from the SVD of A(root).

        Raises NotALatentRoot when the smallest singular value of A(root) is
        not below tau_null relative to the largest.
        """
        _check_side(side)
        self.block_size  # squares only
        A = self.evaluate(complex(root))
        U, sig, Vh = np.linalg.svd(A)
        smax = sig[0] if sig.size else 0.0
        smin = sig[-1] if sig.size else 0.0
        if smax > 0 and smin > tau_null * smax:
            raise NotALatentRoot(
                f"smallest singular value {smin:.3e} vs largest {smax:.3e} "
                f"at s = {complex(root):.6g}"
            )
        if side == "right":
            v = phase_normalize(Vh[-1].conj())
            residual = float(np.linalg.norm(A @ v))
        else:
            v = phase_normalize(U[:, -1].conj())
            residual = float(np.linalg.norm(v @ A))
        return v, residual

    def latent_pair(self, root, tau_null=DEFAULT_TAU_NULL):
        """Both-sided latent information at one root."""
        right, res_r = self.latent_vector(root, "right", tau_null)
        left, res_l = self.latent_vector(root, "left", tau_null)
        return LatentPair(complex(root), right, left, res_r, res_l)

    # -- scalar determinant ---------------------------------------------

    def determinant_polynomial(self):
        """Coefficients of det A(s), descending, by circle interpolation.

        Samples the determinant at r*m + 1 equispaced points on a circle whose
        radius tracks the geometric mean of the latent root magnitudes, then
        recovers the coefficients with an inverse DFT.
        """
        m = self.block_size
        r = self.degree
        N = r * m + 1
        radius = self._interp_radius()
        k = np.arange(N)
        nodes = radius * np.exp(2j * np.pi * k / N)
        d = np.array([np.linalg.det(self.evaluate(z)) for z in nodes])
        if not np.all(np.isfinite(d)):
            raise InterpolationError("determinant samples are not finite")
        c_asc = np.fft.fft(d) / N / radius ** np.arange(N, dtype=float)
        if not np.all(np.isfinite(c_asc)):
            raise InterpolationError("interpolation produced non-finite coefficients")
        if self.is_real:
            c_asc = c_asc.real
        return np.asarray(c_asc[::-1])

    def _interp_radius(self):
        m = self.block_size
        r = self.degree
        if r == 0:
            return 1.0
        d0 = abs(np.linalg.det(self.coeffs[0]))
        dr = abs(np.linalg.det(self.coeffs[-1]))
        if d0 > 0 and dr > 0 and np.isfinite(d0) and np.isfinite(dr):
            return max(1.0, float((dr / d0) ** (1.0 / (r * m))))
        return 1.5


def _check_side(side):
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")


# -- polynomial arithmetic helpers -------------------------------------------

def poly_mul(A, B):
    """Product A(s) @ B(s) of two matrix polynomials."""
    if A.cols != B.rows:
        raise DimensionMismatch(
            f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols} blocks"
        )
    da, db = A.degree, B.degree
    dtype = np.result_type(A.coeffs[0], B.coeffs[0])
    out = [np.zeros((A.rows, B.cols), dtype=dtype) for _ in range(da + db + 1)]
    for i, ca in enumerate(A.coeffs):
        for j, cb in enumerate(B.coeffs):
            out[i + j] = out[i + j] + ca @ cb
    return MatrixPolynomial(out)


def mul_linear(Q, X, side="right"):
    """Product of Q(s) with the linear factor (s*I - X) on the given side."""
    X = as_matrix(X, "X")
    _check_side(side)
    q = Q.coeffs
    dtype = np.result_type(q[0], X)
    out = [np.array(q[0], dtype=dtype)]
    for i in range(1, len(q)):
        prev = q[i - 1]
        out.append(q[i] - (prev @ X if side == "right" else X @ prev))
    last = q[-1]
    out.append(-(last @ X if side == "right" else X @ last))
    return MatrixPolynomial(out)


def right_divmod(N, D):
    """Right polynomial division N(s) = Q(s) @ D(s) + R(s), deg R < deg D.

    D must be monic and square with block size equal to N's column count.
    """
    from .errors import NotMonic

    if not D.is_monic:
        raise NotMonic("right division requires a monic divisor")
    m = D.block_size
    if N.cols != m:
        raise DimensionMismatch(
            f"numerator blocks have {N.cols} columns, divisor is {m}x{m}"
        )
    r = D.degree
    if r == 0:
        return N, MatrixPolynomial([np.zeros((N.rows, m))])
    dn = N.degree
    dtype = np.result_type(N.coeffs[0], D.coeffs[0])
    # ascending storage: work[p] is the coefficient of s**p
    work = [np.array(N.coeffs[dn - p], dtype=dtype) for p in range(dn + 1)]
    while len(work) < r:
        work.append(np.zeros((N.rows, m), dtype=dtype))
    dasc = [D.coeffs[r - p] for p in range(r + 1)]
    qcoeffs = {}
    for p in range(dn, r - 1, -1):
        T = work[p]
        qcoeffs[p - r] = T
        for j in range(r + 1):
            work[p - r + j] = work[p - r + j] - T @ dasc[j]
    if qcoeffs:
        qdeg = max(qcoeffs)
        Q = MatrixPolynomial(
            [qcoeffs.get(qdeg - i, np.zeros((N.rows, m), dtype=dtype)) for i in range(qdeg + 1)]
        )
    else:
        Q = MatrixPolynomial([np.zeros((N.rows, m), dtype=dtype)])
    R = MatrixPolynomial([work[r - 1 - i] for i in range(r)])
    return Q, R
