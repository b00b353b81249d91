"""Model order reduction by solvent elimination.

Two pipelines:

* reduce_latent: work on a right matrix fraction.  Pick the group of latent
  roots farthest into the left half plane, build the solvent they span,
  divide it out of the denominator (and when needed the numerator, whose
  division remainder is neglected), and repeat while the relative error
  stays under threshold.  The step that breaches the threshold is rolled
  back.

* reduce_dominant: work on a state-space system.  Extract the matrix
  fraction, compute a complete solvent set, decouple the system into blocks,
  find the dominant poles, and eliminate blocks that no dominant pole claims,
  then keep eliminating the least dominant blocks while the relative error
  allows.  Optionally individual eigenvalues inside kept blocks are trimmed
  as well.

Every elimination is guarded by the relative error RE of the neglected part
against the full system (and optionally by a relative H2 error gate).
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg

from ._util import cond2, is_conjugate_closed, realify
from .errors import (
    AlreadyMinimal,
    ConjugateBreak,
    DegenerateEigenvector,
    DependentVectors,
    DefectiveRoot,
    DimensionMismatch,
    NoEliminableSolvent,
    NonDiagonalizableBlock,
    NotALatentRoot,
    UnstableSystem,
)
from .dompoles import dominance_index, dominant_poles
from .matpoly import MatrixPolynomial
from .metrics import (
    as_state_space,
    difference_system,
    h2_error,
    h2_norm,
    relative_error,
)
from .solvents import (
    _cluster_roots,
    _conjugate_units,
    compute_complete_set,
    solvent_from_roots,
)
from .sysrep import (
    BlockDiagonalRealization,
    DiagonalBlock,
    RightMFD,
    StateSpace,
    block_diagonalize,
    controller_canonical,
    mfd_from_state_space,
    recompose,
)


@dataclass
class Tolerances:
    """Every tolerance used by the reduction pipelines, in one place."""

    re_threshold: float = 0.01
    h2_threshold: Optional[float] = None
    match_tol: float = 0.1
    tau_null: float = 1e-6
    tau_gap: float = 1e-6
    eps_sing: float = 1e-10
    tau_conv: float = 1e-8
    dominance_cutoff: float = 0.05
    node_budget: int = 10000

    def __post_init__(self):
        for name in (
            "re_threshold", "match_tol", "tau_null", "tau_gap",
            "eps_sing", "tau_conv", "dominance_cutoff",
        ):
            if not (float(getattr(self, name)) > 0.0):
                raise ValueError(f"{name} must be strictly positive")
        if self.h2_threshold is not None and not (float(self.h2_threshold) > 0.0):
            raise ValueError("h2_threshold must be strictly positive when set")
        if int(self.node_budget) < 1:
            raise ValueError("node_budget must be at least 1")


@dataclass
class ReductionReport:
    method: str
    original_order: int
    reduced_order: int
    eliminated: List[str] = field(default_factory=list)
    re_value: float = 0.0
    h2_error: Optional[float] = None
    neglected_numerator_norm: float = 0.0
    threshold: float = 0.0
    iterations: int = 0


def _fmt_value(z):
    z = complex(z)
    if z.imag == 0.0:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}j"


def _fmt_values(values):
    return ", ".join(_fmt_value(z) for z in np.asarray(values, dtype=complex).ravel())


def _strip_feedthrough(sys):
    return StateSpace(sys.A, sys.B, sys.C, np.zeros_like(sys.D))


def _h2_gate(full, candidate, tol):
    """Relative H2 error of a candidate, or None when no gate is configured."""
    if tol.h2_threshold is None:
        return None, True
    err = h2_error(full, candidate)
    base = h2_norm(_strip_feedthrough(as_state_space(full)))
    rel = np.inf if base == 0.0 and err > 0.0 else (0.0 if base == 0.0 else err / base)
    return rel, rel <= tol.h2_threshold


# -- method 1: latent root elimination on the matrix fraction -----------------

def _elimination_candidates(D, tol, limit=200):
    """Conjugate-closed root selections of size m, leftmost roots first."""
    import itertools

    m = D.block_size
    roots = D.latent_roots()
    scale = max(1.0, float(np.max(np.abs(roots))))
    clusters = _cluster_roots(list(roots), scale)
    units = _conjugate_units(clusters, D.is_real, scale)
    sizes = [sum(mult for _, mult in u) for u in units]
    count = 0
    for k in range(1, len(units) + 1):
        for combo in itertools.combinations(range(len(units)), k):
            if sum(sizes[c] for c in combo) != m:
                continue
            sel = []
            for c in combo:
                for z, mult in units[c]:
                    sel.extend([z] * mult)
            yield sel
            count += 1
            if count >= limit:
                return


def reduce_latent(fraction, tol=None, hankel_power=4):
    """Eliminate left-most latent root groups from a right matrix fraction.

    Returns (reduced RightMFD, ReductionReport).  The loop stops when the
    next elimination would push the relative error past the threshold; that
    step is rolled back and never part of the result.
    """
    tol = tol or Tolerances()
    if not isinstance(fraction, RightMFD):
        raise DimensionMismatch("reduce_latent expects a RightMFD")
    if fraction.D.degree <= 1:
        raise AlreadyMinimal("denominator degree is already 1")
    full = controller_canonical(fraction)
    if not full.is_stable():
        worst = float(np.max(full.poles().real))
        raise UnstableSystem(f"reduction needs a stable system (max Re pole {worst:.6g})")

    current = fraction
    eliminated = []
    iterations = 0
    neglected_norm = 0.0
    re_val = 0.0

    while current.D.degree > 1:
        iterations += 1
        solvent = None
        for sel in _elimination_candidates(current.D, tol):
            try:
                solvent = solvent_from_roots(current.D, sel, tol.tau_null, tol.eps_sing)
                break
            except (DependentVectors, DefectiveRoot):
                continue
        if solvent is None:
            if not eliminated:
                raise NoEliminableSolvent(
                    "no conjugate-closed latent root group spans a solvent"
                )
            break

        newD = current.D.block_divide(solvent.matrix, "right").quotient
        if current.N.degree < newD.degree:
            newN = current.N
            rem_norm = 0.0
        else:
            ndiv = current.N.block_divide(solvent.matrix, "right")
            newN = ndiv.quotient
            rem_norm = float(np.linalg.norm(ndiv.remainder))
        candidate = RightMFD(
            MatrixPolynomial([realify(c, 1e-10) for c in newN.coeffs]).trimmed(1e-14),
            MatrixPolynomial([realify(c, 1e-10) for c in newD.coeffs]),
            current.feedthrough,
        )
        cand_ss = controller_canonical(candidate)
        re_c = relative_error(full, difference_system(full, cand_ss), hankel_power)
        _, gate_ok = _h2_gate(full, cand_ss, tol)
        if re_c > tol.re_threshold or not gate_ok:
            break  # roll back this elimination
        current = candidate
        re_val = re_c
        neglected_norm += rem_norm
        eliminated.append(f"solvent eigenvalues [{_fmt_values(solvent.eigenvalues)}]")

    h2_abs = h2_error(full, controller_canonical(current)) if eliminated else 0.0
    report = ReductionReport(
        method="latent",
        original_order=fraction.order,
        reduced_order=current.order,
        eliminated=eliminated,
        re_value=re_val,
        h2_error=h2_abs,
        neglected_numerator_norm=neglected_norm,
        threshold=tol.re_threshold,
        iterations=iterations,
    )
    return current, report


# -- method 2: dominant pole guided block elimination -------------------------

@dataclass
class MatchResult:
    """Which solvents of a complete set are claimed by a pole list."""

    matched: tuple
    unmatched: tuple
    distances: dict

    def __iter__(self):
        # allows: keep, discard = match_solvents_to_poles(...)
        yield set(self.matched)
        yield set(self.unmatched)


def match_solvents_to_poles(solvent_set, poles, match_tol=0.1):
    """Match solvents to poles by relative eigenvalue distance.

    A solvent is kept when some pole lies within match_tol (relative to the
    eigenvalue magnitude) of one of its eigenvalues.
    """
    values = [complex(getattr(p, "value", p)) for p in poles]
    matched = []
    distances = {}
    for i, sol in enumerate(solvent_set.solvents):
        best = np.inf
        for lam in sol.eigenvalues:
            for v in values:
                best = min(best, abs(v - lam) / max(1.0, abs(lam)))
        distances[i] = float(best)
        if best <= match_tol:
            matched.append(i)
    unmatched = tuple(i for i in range(len(solvent_set.solvents)) if i not in matched)
    return MatchResult(tuple(matched), unmatched, distances)


def _modal_components(block, eps_sing):
    """Per-eigenvalue data of one block: (value, input row, output column).

    The input row is z^H B / (z^H w) and the output column is C w, so the
    block transfer is the sum of (column)(row) / (s - value) over components.
    """
    if block.size == 0:
        return []
    theta, vl, vr = scipy.linalg.eig(block.a, left=True, right=True)
    if cond2(vr) >= 1.0 / eps_sing:
        raise NonDiagonalizableBlock(
            f"eigenvector matrix condition {cond2(vr):.3e}"
        )
    out = []
    for i, lam in enumerate(theta):
        w = vr[:, i]
        z = vl[:, i]
        denom = np.vdot(z, w)
        if abs(denom) <= 1e-12:
            raise DegenerateEigenvector(
                f"near-orthogonal eigenvectors at {complex(lam):.6g}"
            )
        brow = (z.conj() @ block.b) / denom
        ccol = block.c @ w
        out.append((complex(lam), brow, ccol))
    return out


def _block_dominance(block, eps_sing=1e-10):
    """Largest per-eigenvalue dominance index carried by one diagonal block."""
    try:
        comps = _modal_components(block, eps_sing)
    except (NonDiagonalizableBlock, DegenerateEigenvector):
        return np.inf  # treat as too important to discard
    best = 0.0
    for lam, brow, ccol in comps:
        residue = np.outer(ccol, brow)
        best = max(best, dominance_index(lam, residue))
    return best


def _neglected(bd, indices):
    """The discarded blocks as a strictly proper system."""
    sel = bd.select(sorted(indices))
    return BlockDiagonalRealization(
        sel.blocks, np.zeros_like(bd.feedthrough), bd.io_shape
    )


def _split_block_values(block, drop_values, eps_sing=1e-10):
    """Split one diagonal block into (kept, dropped) modal realizations.

    drop_values lists eigenvalues of block.a to move into the dropped part;
    for a real block they must form a conjugate-closed set so both halves
    stay real.
    """
    drop_values = list(np.asarray(drop_values, dtype=complex).ravel())
    real_block = not np.iscomplexobj(block.a)
    m = block.b.shape[1]
    p = block.c.shape[0]
    if not drop_values:
        return block, _assemble_modal_block([], m, p, real_block)
    if real_block and not is_conjugate_closed(drop_values):
        raise ConjugateBreak("dropped eigenvalues must form conjugate pairs")
    comps = _modal_components(block, eps_sing)
    scale = max(1.0, max(abs(c[0]) for c in comps))
    taken = [False] * len(comps)
    for v in drop_values:
        best, best_d = None, np.inf
        for i, (lam, _, _) in enumerate(comps):
            if taken[i]:
                continue
            d = abs(lam - v)
            if d < best_d:
                best, best_d = i, d
        if best is None or best_d > 1e-6 * scale:
            raise NotALatentRoot(
                f"{_fmt_value(v)} is not an eigenvalue of this block"
            )
        taken[best] = True
    kept = [comps[i] for i in range(len(comps)) if not taken[i]]
    dropped = [comps[i] for i in range(len(comps)) if taken[i]]
    return (
        _assemble_modal_block(kept, m, p, real_block),
        _assemble_modal_block(dropped, m, p, real_block),
    )


def trim_subsystem_eigen(bd, block, drop, tol=None):
    """Delete selected eigenvalues from one block of a decoupled realization.

    block indexes into bd.blocks and drop lists positions into that block's
    sorted eigenvalue array.  For a real block the dropped values must form a
    conjugate-closed set.  The survivors are rebuilt as a modal realization
    (2x2 rotation blocks for conjugate pairs); a fully emptied block is
    removed from the result.
    """
    tol = tol or Tolerances()
    if not isinstance(bd, BlockDiagonalRealization):
        raise DimensionMismatch("trim_subsystem_eigen expects a decoupled realization")
    blocks = list(bd.blocks)
    bi = int(block)
    if not 0 <= bi < len(blocks):
        raise DimensionMismatch(f"block index {bi} out of range")
    drop_idx = sorted({int(i) for i in np.asarray(drop, dtype=int).ravel()}) if len(
        np.atleast_1d(drop)) else []
    if not drop_idx:
        return bd
    values = blocks[bi].eigenvalues
    if drop_idx[0] < 0 or drop_idx[-1] >= values.size:
        raise DimensionMismatch("eigenvalue index out of range")
    kept_block, _ = _split_block_values(
        blocks[bi], [values[i] for i in drop_idx], tol.eps_sing
    )
    if kept_block.size == 0:
        del blocks[bi]
    else:
        blocks[bi] = kept_block
    return BlockDiagonalRealization(tuple(blocks), bd.feedthrough, bd.io_shape)


def _assemble_modal_block(components, m, p, real_output=True):
    """Modal realization from kept (value, input row, output column) data.

    For a real system a real eigenvalue contributes a 1x1 state and a
    conjugate pair the 2x2 rotation block [[a, -b], [b, a]], driven by the
    real and imaginary parts of its input row and observed through twice the
    real part of its output column next to minus twice the imaginary part.
    """
    order = sorted(range(len(components)),
                   key=lambda i: (components[i][0].real, components[i][0].imag))
    used = [False] * len(components)
    a_parts, b_parts, c_parts = [], [], []
    for i in order:
        if used[i]:
            continue
        used[i] = True
        lam, brow, ccol = components[i]
        if not real_output:
            a_parts.append(np.array([[lam]], dtype=complex))
            b_parts.append(np.asarray(brow, dtype=complex).reshape(1, m))
            c_parts.append(np.asarray(ccol, dtype=complex).reshape(p, 1))
            continue
        if abs(lam.imag) <= 1e-10 * max(1.0, abs(lam)):
            a_parts.append(np.array([[lam.real]]))
            b_parts.append(np.asarray(brow).real.reshape(1, m))
            c_parts.append(np.asarray(ccol).real.reshape(p, 1))
            continue
        # find and consume the conjugate partner
        partner = None
        for j in range(len(components)):
            if not used[j] and abs(np.conj(lam) - components[j][0]) <= 1e-8 * max(1.0, abs(lam)):
                partner = j
                break
        if partner is None:
            raise ConjugateBreak(
                f"eigenvalue {_fmt_value(lam)} kept without its conjugate"
            )
        used[partner] = True
        if lam.imag < 0:  # work with the positive-imaginary member
            lam, brow, ccol = components[partner]
        al, be = lam.real, lam.imag
        brow = np.asarray(brow)
        ccol = np.asarray(ccol)
        a_parts.append(np.array([[al, -be], [be, al]]))
        b_parts.append(np.vstack([brow.real.reshape(1, m), brow.imag.reshape(1, m)]))
        c_parts.append(np.hstack([
            2.0 * ccol.real.reshape(p, 1), -2.0 * ccol.imag.reshape(p, 1)
        ]))
    if not a_parts:
        return DiagonalBlock(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)))
    return DiagonalBlock(
        scipy.linalg.block_diag(*a_parts),
        np.vstack(b_parts),
        np.hstack(c_parts),
    )


def _cutoff_filter(poles, cutoff):
    """Poles whose dominance reaches `cutoff` times the best one found."""
    poles = list(poles)
    if not poles:
        return []
    doms = [float(p.dominance) for p in poles]
    if any(not np.isfinite(d) for d in doms):
        # a pole on the imaginary axis outranks every finite one
        return [p for p, d in zip(poles, doms) if not np.isfinite(d)]
    top = max(doms)
    if top == 0.0:
        return poles
    return [p for p, d in zip(poles, doms) if d >= cutoff * top]


def reduce_dominant(sys, tol=None, k=None, continue_blocks=True, trim_eigen=False,
                    hankel_power=4):
    """Reduce a state-space system by discarding non-dominant solvent blocks.

    Pipeline: extract the right matrix fraction, compute a complete solvent
    set of its denominator, decouple the system into one block per solvent,
    find the dominant poles (count k, or grown adaptively until the matched
    solvent set settles), and discard the blocks no dominant pole claims,
    least dominant first.  When that phase eliminated something and
    continue_blocks is set, elimination proceeds to the least dominant
    claimed blocks, and with trim_eigen to individual eigenvalues of the
    least dominant remaining block (finer granularity once whole blocks stop
    fitting).  Every step is guarded by the relative error of everything
    neglected so far; a step that breaches the threshold is rolled back and
    ends elimination at that granularity.

    Returns (StateSpace, ReductionReport).
    """
    tol = tol or Tolerances()
    if isinstance(sys, RightMFD):
        frac = sys
    else:
        ss_in = as_state_space(sys)
        frac = mfd_from_state_space(ss_in, tol.eps_sing)
    css = controller_canonical(frac)
    if not css.is_stable():
        worst = float(np.max(css.poles().real))
        raise UnstableSystem(
            f"reduction needs a stable system (max Re pole {worst:.6g})"
        )
    cset = compute_complete_set(
        frac.D,
        eps_sing=tol.eps_sing,
        tau_gap=tol.tau_gap,
        tau_null=tol.tau_null,
        node_budget=tol.node_budget,
    )
    bd = block_diagonalize(css, cset, eps_sing=tol.eps_sing)
    n, m = css.n, css.m

    if k is not None:
        count = max(1, min(int(k), n))
        poles = dominant_poles(css, count, tau_conv=tol.tau_conv, eps_sing=tol.eps_sing)
        match = match_solvents_to_poles(
            cset, _cutoff_filter(poles, tol.dominance_cutoff), tol.match_tol
        )
    else:
        count = min(m, n)
        prev = None
        while True:
            poles = dominant_poles(
                css, count, tau_conv=tol.tau_conv, eps_sing=tol.eps_sing
            )
            match = match_solvents_to_poles(
                cset, _cutoff_filter(poles, tol.dominance_cutoff), tol.match_tol
            )
            keep = set(match.matched)
            if keep == prev or count >= n:
                break
            prev = keep
            count = min(n, count + m)

    dom = {i: _block_dominance(bd.blocks[i], tol.eps_sing)
           for i in range(len(bd.blocks))}
    eliminated = []
    discard = set()
    re_val = 0.0
    iterations = 0
    breached = False

    def attempt(idx, label):
        nonlocal discard, re_val, iterations, breached
        iterations += 1
        trial = discard | {idx}
        re_c = relative_error(css, _neglected(bd, trial), hankel_power)
        kept_idx = [i for i in range(len(bd.blocks)) if i not in trial]
        _, gate_ok = _h2_gate(css, bd.select(kept_idx), tol)
        if re_c > tol.re_threshold or not gate_ok:
            breached = True
            return False
        discard = trial
        re_val = re_c
        eliminated.append(label)
        return True

    for i in sorted(match.unmatched, key=lambda j: dom[j]):
        if not attempt(
            i, f"block {i} [{_fmt_values(bd.blocks[i].eigenvalues)}] (no dominant pole)"
        ):
            break

    if continue_blocks and eliminated and not breached:
        for i in sorted(
            (j for j in match.matched if j not in discard), key=lambda j: dom[j]
        ):
            if not attempt(
                i, f"block {i} [{_fmt_values(bd.blocks[i].eigenvalues)}] (least dominant)"
            ):
                break

    work = {i: bd.blocks[i] for i in range(len(bd.blocks)) if i not in discard}
    extra_neglected = []
    if trim_eigen and eliminated and work:
        last = min(work, key=lambda j: dom[j])
        try:
            comps = _modal_components(work[last], tol.eps_sing)
        except (NonDiagonalizableBlock, DegenerateEigenvector):
            comps = []
        real_block = not np.iscomplexobj(work[last].a)
        vals = [c[0] for c in comps]
        scale = max(1.0, max((abs(v) for v in vals), default=1.0))
        units = _conjugate_units(_cluster_roots(vals, scale), real_block, scale)

        def unit_dominance(u):
            best = 0.0
            for z, _mult in u:
                for lam, brow, ccol in comps:
                    if abs(lam - z) <= 1e-6 * scale:
                        best = max(best, dominance_index(lam, np.outer(ccol, brow)))
            return best

        for u in sorted(units, key=unit_dominance):
            drop_vals = []
            for z, mult in u:
                drop_vals.extend([z] * mult)
            try:
                kept_b, dropped_b = _split_block_values(
                    work[last], drop_vals, tol.eps_sing
                )
            except (ConjugateBreak, NotALatentRoot,
                    NonDiagonalizableBlock, DegenerateEigenvector):
                continue
            iterations += 1
            negl_blocks = (tuple(bd.blocks[i] for i in sorted(discard))
                           + tuple(extra_neglected) + (dropped_b,))
            negl = BlockDiagonalRealization(
                negl_blocks, np.zeros_like(bd.feedthrough), bd.io_shape
            )
            re_c = relative_error(css, negl, hankel_power)
            trial_blocks = tuple(
                (kept_b if j == last else work[j])
                for j in sorted(work)
                if (kept_b if j == last else work[j]).size > 0
            )
            cand = BlockDiagonalRealization(trial_blocks, bd.feedthrough, bd.io_shape)
            _, gate_ok = _h2_gate(css, cand, tol)
            if re_c > tol.re_threshold or not gate_ok:
                breached = True
                break
            work[last] = kept_b
            extra_neglected.append(dropped_b)
            re_val = re_c
            eliminated.append(
                f"eigenvalues [{_fmt_values(drop_vals)}] of block {last}"
            )
            if work[last].size == 0:
                break

    final_blocks = tuple(
        work[j] for j in sorted(work) if work[j].size > 0
    )
    reduced_bd = BlockDiagonalRealization(final_blocks, bd.feedthrough, bd.io_shape)
    reduced = recompose(reduced_bd)
    h2_abs = h2_error(css, reduced) if eliminated else 0.0
    report = ReductionReport(
        method="dominant",
        original_order=css.n,
        reduced_order=reduced.n,
        eliminated=eliminated,
        re_value=re_val,
        h2_error=h2_abs,
        neglected_numerator_norm=0.0,
        threshold=tol.re_threshold,
        iterations=iterations,
    )
    return reduced, report
