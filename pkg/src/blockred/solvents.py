"""Solvents (block roots) of matrix polynomials and complete solvent sets.

A right solvent R of a monic A(s) = I s**r + A_1 s**(r-1) + ... + A_r
satisfies R**r + A_1 R**(r-1) + ... + A_r = 0; a left solvent L satisfies
L**r + L**(r-1) A_1 + ... + A_r = 0.  A complete set of r right solvents has
pairwise disjoint spectra whose union is the latent root multiset, and a
nonsingular block Vandermonde matrix.  Solvents are assembled from latent
pairs: R = V diag(roots) inv(V) with latent vectors as columns of V.
"""

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._util import (
    as_matrix,
    cond2,
    is_conjugate_closed,
    pair_distance,
    realify,
    sort_complex,
)
from .errors import (
    DefectiveRoot,
    DependentVectors,
    DimensionMismatch,
    IncompleteSet,
    NoCompleteSetFound,
    SingularVandermonde,
)
from .matpoly import DEFAULT_TAU_NULL, LatentPair, MatrixPolynomial

DEFAULT_EPS_SING = 1e-10
DEFAULT_TAU_GAP = 1e-6
DEFAULT_NODE_BUDGET = 10000


@dataclass
class Solvent:
    """A solvent matrix together with its spectrum and defect residual."""

    matrix: np.ndarray
    side: str = "right"
    eigenvalues: np.ndarray = field(default=None)
    residual: Optional[float] = None

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, "solvent")
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise DimensionMismatch(f"solvent must be square, got {self.matrix.shape}")
        if self.side not in ("right", "left"):
            raise ValueError(f"side must be 'right' or 'left', got {self.side!r}")
        if self.eigenvalues is None:
            self.eigenvalues = sort_complex(np.linalg.eigvals(self.matrix))

    @property
    def size(self):
        return self.matrix.shape[0]


@dataclass
class CompleteSolventSet:
    """A validated complete set with its block Vandermonde matrix."""

    solvents: tuple
    vandermonde: np.ndarray
    condition: float

    @property
    def matrices(self):
        return [s.matrix for s in self.solvents]

    @property
    def block_size(self):
        return self.solvents[0].size

    def __len__(self):
        return len(self.solvents)


def solvent_residual(P, X, side="right"):
    """Relative residual of X as a solvent of P.

    The block value is compared against the sum of the norms of its terms, so
    the result is scale free in both P and X.
    """
    X = as_matrix(X, "X")
    m = P.block_size
    if X.shape != (m, m):
        raise DimensionMismatch(f"X must be {m}x{m}, got {X.shape}")
    r = P.degree
    dtype = np.result_type(P.coeffs[0], X)
    power = np.eye(m, dtype=dtype)
    total = np.zeros((m, m), dtype=dtype)
    scale = 0.0
    for i in range(r, -1, -1):
        term = P.coeffs[i] @ power if side == "right" else power @ P.coeffs[i]
        total = total + term
        scale += float(np.linalg.norm(term))
        if i > 0:
            power = power @ X if side == "right" else X @ power
    return float(np.linalg.norm(total)) / max(scale, 1.0)


def is_solvent(P, X, side="right", tol=1e-8):
    """Whether X solves the polynomial on the given side, at tolerance tol."""
    return solvent_residual(P, X, side) <= tol


def solvent_from_latent(pairs, side="right", polynomial=None, eps_sing=DEFAULT_EPS_SING):
    """Build a solvent from latent pairs via the spectral formula.

    For side "right" the latent vectors become columns of V and
    R = V diag(roots) inv(V); for side "left" they become rows of W and
    L = inv(W) diag(roots) W.  Raises DependentVectors when the vector matrix
    is numerically singular.
    """
    roots = []
    vecs = []
    for p in pairs:
        if isinstance(p, LatentPair):
            v = p.right if side == "right" else p.left
            if v is None:
                raise DependentVectors(f"latent pair at {p.root} lacks a {side} vector")
            roots.append(complex(p.root))
            vecs.append(np.asarray(v, dtype=complex))
        else:
            root, v = p
            roots.append(complex(root))
            vecs.append(np.asarray(v, dtype=complex))
    m = vecs[0].shape[0]
    if len(vecs) != m:
        raise DimensionMismatch(f"need {m} latent pairs for {m}x{m} solvents, got {len(vecs)}")
    V = np.column_stack(vecs)
    c = cond2(V)
    if not np.isfinite(c) or c >= 1.0 / eps_sing:
        raise DependentVectors(f"latent vector matrix condition {c:.3e}")
    lam = np.diag(roots)
    if side == "right":
        M = V @ lam @ np.linalg.inv(V)
    else:
        W = V.T  # rows are the left latent vectors
        M = np.linalg.inv(W) @ lam @ W
    if is_conjugate_closed(roots):
        M = realify(M, 1e-8)
    residual = solvent_residual(polynomial, M, side) if polynomial is not None else None
    return Solvent(M, side, sort_complex(np.asarray(roots)), residual)


def block_vandermonde(matrices):
    """Row-block i of the result is [R_1**i, R_2**i, ..., R_r**i]."""
    mats = [as_matrix(M, f"solvent {i}") for i, M in enumerate(matrices)]
    if not mats:
        raise DimensionMismatch("need at least one solvent")
    m = mats[0].shape[0]
    for M in mats:
        if M.shape != (m, m):
            raise DimensionMismatch("solvents must share one square size")
    r = len(mats)
    rows = []
    powers = [np.eye(m, dtype=np.result_type(*mats, float)) for _ in mats]
    for i in range(r):
        rows.append(list(powers))
        if i < r - 1:
            powers = [P @ M for P, M in zip(powers, mats)]
    return np.block(rows)


def validate_complete_set(
    P,
    matrices,
    tol=1e-8,
    tau_gap=DEFAULT_TAU_GAP,
    eps_sing=DEFAULT_EPS_SING,
    tau_match=1e-6,
):
    """Check the three completeness conditions and package the result.

    Raises IncompleteSet naming the failed condition: "residual" (a matrix is
    not a solvent at tol), "spectrum" (eigenvalue union does not match the
    latent roots), "overlap" (two solvents share spectrum within tau_gap), or
    "vandermonde" (block Vandermonde condition number at or above 1/eps_sing).
    """
    mono = P.monic_normalized()
    m = mono.block_size
    r = mono.degree
    if len(matrices) != r:
        raise IncompleteSet(
            f"need {r} solvents for a degree-{r} polynomial, got {len(matrices)}",
            condition="count",
        )
    solvents = []
    for i, M in enumerate(matrices):
        res = solvent_residual(mono, M, "right")
        if res > tol:
            raise IncompleteSet(
                f"matrix {i} has solvent residual {res:.3e} > {tol:.1e}",
                condition="residual",
            )
        solvents.append(Solvent(M, "right", residual=res))

    roots = mono.latent_roots()
    scale = max(1.0, float(np.max(np.abs(roots))) if roots.size else 1.0)
    union = np.concatenate([s.eigenvalues for s in solvents])
    dist = pair_distance(union, roots)
    if dist > tau_match * scale:
        raise IncompleteSet(
            f"eigenvalue union misses the latent roots by {dist:.3e}",
            condition="spectrum",
        )
    for i in range(len(solvents)):
        for j in range(i + 1, len(solvents)):
            d = np.abs(
                solvents[i].eigenvalues[:, None] - solvents[j].eigenvalues[None, :]
            ).min()
            if d <= tau_gap * scale:
                raise IncompleteSet(
                    f"solvents {i} and {j} share spectrum (gap {d:.3e})",
                    condition="overlap",
                )
    V = block_vandermonde([s.matrix for s in solvents])
    c = cond2(V)
    if not np.isfinite(c) or c >= 1.0 / eps_sing:
        raise IncompleteSet(
            f"block Vandermonde condition {c:.3e} >= {1.0 / eps_sing:.1e}",
            condition="vandermonde",
        )
    return CompleteSolventSet(tuple(solvents), V, c)


def denominator_from_solvents(matrices, eps_sing=DEFAULT_EPS_SING):
    """Monic polynomial having the given matrices as a complete right solvent set.

    Solves [A_r, ..., A_1] V = -[R_1**r, ..., R_r**r] for the coefficients,
    with V the block Vandermonde of the set.
    """
    mats = [as_matrix(M, f"solvent {i}") for i, M in enumerate(matrices)]
    m = mats[0].shape[0]
    r = len(mats)
    V = block_vandermonde(mats)
    c = cond2(V)
    if not np.isfinite(c) or c >= 1.0 / eps_sing:
        raise SingularVandermonde(f"block Vandermonde condition {c:.3e}")
    tops = []
    for M in mats:
        tops.append(np.linalg.matrix_power(M, r))
    rhs = -np.hstack(tops)  # m x (r*m)
    U = np.linalg.solve(V.T, rhs.T).T  # U = rhs @ inv(V), blocks [A_r ... A_1]
    coeffs = [np.eye(m)]
    for j in range(r - 1, -1, -1):
        coeffs.append(realify(U[:, j * m:(j + 1) * m], 1e-8))
    return MatrixPolynomial(coeffs)


# -- constructing complete sets from scratch ---------------------------------

def _cluster_roots(roots, scale):
    """Group numerically equal roots into (value, multiplicity) clusters."""
    tol = 1e-8 * scale
    clusters = []
    for z in roots:  # roots come sorted
        if clusters and abs(z - clusters[-1][0]) <= tol:
            val, mult = clusters[-1]
            clusters[-1] = ((val * mult + z) / (mult + 1), mult + 1)
        else:
            clusters.append((z, 1))
    return clusters


def _conjugate_units(clusters, real_poly, scale):
    """Bundle conjugate cluster pairs so groups stay closed under conjugation.

    Each unit is a list of (root, multiplicity) clusters.  For a real
    polynomial a complex cluster and its mirror travel together; real clusters
    (and every cluster of a complex polynomial) form singleton units.
    """
    tol = 1e-8 * scale
    units = []
    used = [False] * len(clusters)
    for i, (z, mult) in enumerate(clusters):
        if used[i]:
            continue
        used[i] = True
        if real_poly and z.imag > tol:
            # the conjugate partner sorts earlier (negative imaginary part)
            for j, (w, wm) in enumerate(clusters):
                if not used[j] and abs(np.conj(z) - w) <= tol and wm == mult:
                    used[j] = True
                    units.append([(w, wm), (z, mult)])
                    break
            else:
                units.append([(z, mult)])
        elif real_poly and z.imag < -tol:
            for j, (w, wm) in enumerate(clusters):
                if not used[j] and abs(np.conj(z) - w) <= tol and wm == mult:
                    used[j] = True
                    units.append([(z, mult), (w, wm)])
                    break
            else:
                units.append([(z, mult)])
        else:
            units.append([(z, mult)])
    units.sort(key=lambda u: (u[0][0].real, u[0][0].imag))
    return units


def _null_basis(P, lam, mult, tau_null):
    """mult independent right latent vectors at a (possibly repeated) root."""
    A = P.evaluate(complex(lam))
    U, sig, Vh = np.linalg.svd(A)
    thresh = tau_null * max(float(sig[0]), 1e-300)
    if float(sig[-mult]) > thresh:
        raise DefectiveRoot(
            f"root {complex(lam):.6g} with multiplicity {mult} has only "
            f"{int(np.sum(sig <= thresh))} independent latent vectors"
        )
    return Vh[-mult:].conj().T  # orthonormal columns


def solvent_from_roots(P, roots, tau_null=DEFAULT_TAU_NULL, eps_sing=DEFAULT_EPS_SING):
    """Right solvent whose spectrum is the given subset of latent roots.

    Conjugate root pairs of a real polynomial get conjugate vector pairs, so
    the returned matrix is real whenever the subset is conjugate closed.
    """
    mono = P.monic_normalized()
    m = mono.block_size
    roots = list(np.asarray(roots, dtype=complex).ravel())
    if len(roots) != m:
        raise DimensionMismatch(f"need exactly {m} roots, got {len(roots)}")
    scale = max(1.0, max(abs(z) for z in roots))
    clusters = _cluster_roots(sorted(roots, key=lambda z: (z.real, z.imag)), scale)
    pairs = []
    done = {}
    for z, mult in clusters:
        key = (round(z.real, 10), round(abs(z.imag), 10), mult)
        if mono.is_real and abs(z.imag) > 1e-8 * scale and key in done:
            basis = done[key].conj()
        else:
            basis = _null_basis(mono, z, mult, tau_null)
            done[key] = basis
        for k in range(mult):
            pairs.append((z, basis[:, k]))
    return solvent_from_latent(pairs, "right", polynomial=mono, eps_sing=eps_sing)


def compute_complete_set(
    P,
    eps_sing=DEFAULT_EPS_SING,
    tau_gap=DEFAULT_TAU_GAP,
    tau_null=DEFAULT_TAU_NULL,
    node_budget=DEFAULT_NODE_BUDGET,
):
    """Search for a complete right solvent set of a monic-normalizable P.

    Latent roots are clustered, conjugate pairs are kept together, and groups
    of size m are formed greedily from the most negative real parts outward,
    with backtracking when vectors turn out dependent or the Vandermonde
    matrix is ill conditioned.  Raises NoCompleteSetFound when the search
    space (bounded by node_budget) holds no valid grouping.
    """
    mono = P.monic_normalized()
    m = mono.block_size
    r = mono.degree
    if r < 1:
        raise DimensionMismatch("degree must be at least 1")
    if r == 1:
        return validate_complete_set(P, [-np.asarray(mono.coeffs[1])], eps_sing=eps_sing, tau_gap=tau_gap)

    roots = mono.latent_roots()
    scale = max(1.0, float(np.max(np.abs(roots))))
    clusters = _cluster_roots(list(roots), scale)
    units = _conjugate_units(clusters, mono.is_real, scale)
    sizes = [sum(mult for _, mult in u) for u in units]
    if any(sz > m for sz in sizes):
        raise NoCompleteSetFound(
            "a root cluster (with its conjugate) exceeds the block size"
        )

    budget = [node_budget]
    memo = {}

    def build(group_idx):
        key = tuple(group_idx)
        if key in memo:
            return memo[key]
        budget[0] -= 1
        if budget[0] < 0:
            raise NoCompleteSetFound(f"node budget {node_budget} exhausted")
        group_roots = []
        for gi in group_idx:
            for z, mult in units[gi]:
                group_roots.extend([z] * mult)
        try:
            sol = solvent_from_roots(mono, group_roots, tau_null, eps_sing)
            if sol.residual is not None and sol.residual > 1e-6:
                raise DependentVectors(f"solvent residual {sol.residual:.3e}")
        except (DependentVectors, DefectiveRoot) as exc:
            memo[key] = exc
            return exc
        memo[key] = sol
        return sol

    def spectra_disjoint(groups):
        eigs = []
        for g in groups:
            vals = []
            for gi in g:
                for z, mult in units[gi]:
                    vals.extend([z] * mult)
            eigs.append(np.asarray(vals))
        for i in range(len(eigs)):
            for j in range(i + 1, len(eigs)):
                if np.abs(eigs[i][:, None] - eigs[j][None, :]).min() <= tau_gap * scale:
                    return False
        return True

    solution = []

    def dfs(free, groups):
        if not free:
            if not spectra_disjoint(groups):
                return False
            mats = []
            for g in groups:
                sol = build(g)
                if not isinstance(sol, Solvent):
                    return False
                mats.append(sol.matrix)
            V = block_vandermonde(mats)
            c = cond2(V)
            if not np.isfinite(c) or c >= 1.0 / eps_sing:
                return False
            solution.append(groups)
            return True
        seed = free[0]
        rest = free[1:]
        need = m - sizes[seed]
        if need < 0:
            return False
        for combo in _size_combinations(rest, sizes, need):
            group = (seed,) + combo
            sol = build(group)
            if not isinstance(sol, Solvent):
                continue
            remaining = [u for u in rest if u not in combo]
            if dfs(remaining, groups + [group]):
                return True
        return False

    found = dfs(list(range(len(units))), [])
    if not found:
        raise NoCompleteSetFound(
            "no grouping of the latent roots yields a complete solvent set"
        )
    mats = [build(g).matrix for g in solution[0]]
    return validate_complete_set(
        P, mats, tol=1e-6, tau_gap=tau_gap, eps_sing=eps_sing
    )


def _size_combinations(candidates, sizes, need):
    """Index combinations (lexicographic) whose sizes sum exactly to need."""
    if need == 0:
        yield ()
        return
    for k in range(1, len(candidates) + 1):
        for combo in itertools.combinations(candidates, k):
            if sum(sizes[c] for c in combo) == need:
                yield combo
