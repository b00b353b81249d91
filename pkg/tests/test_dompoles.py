import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose

from blockred.dompoles import (
    DominantPole,
    default_shifts,
    dominance_index,
    dominance_order,
    dominant_poles,
    newton_step,
    residue_matrix,
)
from blockred.errors import DegenerateEigenvector, DimensionMismatch, NoConvergence
from blockred.sysrep import StateSpace

from conftest import probe_points, random_diagonalizable_stable


def dense_pole_oracle(ss):
    """All poles with residues and dominance, from one dense eigensolve."""
    w, vl, vr = scipy.linalg.eig(ss.A, left=True, right=True)
    out = []
    for i in range(ss.n):
        x = vr[:, i]
        y = vl[:, i]
        R = np.outer(ss.C @ x, y.conj() @ ss.B) / np.vdot(y, x)
        out.append(DominantPole(complex(w[i]), x, y, R, dominance_index(w[i], R)))
    return out


def test_residue_partial_fraction(rng):
    # the residues of a strictly proper system reassemble its transfer matrix
    ss = random_diagonalizable_stable(rng, 6, 2, 2)
    poles = dense_pole_oracle(ss)
    for s in probe_points(rng, 6):
        total = np.zeros((ss.p, ss.m), dtype=complex)
        for p in poles:
            total += p.residue / (s - p.value)
        assert_allclose(total, ss.transfer(s), rtol=1e-8, atol=1e-10)


def test_residue_matrix_matches_oracle(rng):
    ss = random_diagonalizable_stable(rng, 5, 2, 2)
    w, vl, vr = scipy.linalg.eig(ss.A, left=True, right=True)
    for i in range(ss.n):
        R = residue_matrix(ss, w[i], vr[:, i], vl[:, i])
        want = np.outer(ss.C @ vr[:, i], vl[:, i].conj() @ ss.B) / np.vdot(vl[:, i], vr[:, i])
        assert_allclose(R, want, rtol=1e-12)


def test_residue_matrix_rejects_bad_vectors(rng):
    ss = random_diagonalizable_stable(rng, 4, 2, 2)
    with pytest.raises(DimensionMismatch):
        residue_matrix(ss, -1.0, np.ones(3), np.ones(4))
    x = np.array([1.0, 0.0, 0.0, 0.0])
    y = np.array([0.0, 1.0, 0.0, 0.0])  # orthogonal to x
    with pytest.raises(DegenerateEigenvector):
        residue_matrix(ss, -1.0, x, y)


def test_dominance_index_values():
    R = np.array([[3.0, 0.0], [0.0, 1.0]])
    assert dominance_index(-2.0 + 1.0j, R) == pytest.approx(1.5)
    assert dominance_index(0.0 + 5.0j, R) == np.inf


def test_dominance_order_sorting():
    mk = lambda v, r: DominantPole(v, None, None, np.array([[r]]), dominance_index(v, np.array([[r]])))
    weak = mk(-4.0 + 0j, 1.0)     # 0.25
    strong = mk(-1.0 + 0j, 2.0)   # 2.0
    axis = mk(0.0 + 3.0j, 0.5)    # inf
    out = dominance_order([weak, strong, axis])
    assert [p.value for p in out] == [axis.value, strong.value, weak.value]


def test_newton_step_moves_toward_pole():
    a = np.diag([-1.0, -10.0])
    ss = StateSpace(a, np.array([[1.0], [1.0]]), np.array([[1.0, 1.0]]))
    s0 = -1.3 + 0.1j
    s1, (theta, u, v) = newton_step(ss, s0)
    # the transfer matrix here is scalar, so theta is its value at the shift
    assert theta == pytest.approx(complex(ss.transfer(s0)[0, 0]))
    assert abs(s1 - (-1.0)) < abs(s0 - (-1.0))
    s2, _ = newton_step(ss, s1)
    assert abs(s2 - (-1.0)) < 1e-3


def test_default_shifts_shape(rng):
    ss = random_diagonalizable_stable(rng, 6, 2, 2)
    sh = default_shifts(ss)
    assert len(sh) == 4
    assert all(s.real == pytest.approx(-0.1) for s in sh)


def test_dominant_poles_full_set_matches_dense(rng):
    for _ in range(5):
        n = int(rng.integers(3, 8))
        ss = random_diagonalizable_stable(rng, n, 2, 2)
        got = dominant_poles(ss, n)
        assert len(got) == n
        want = np.sort_complex(np.linalg.eigvals(ss.A))
        assert_allclose(
            np.sort_complex([p.value for p in got]), want, rtol=1e-6, atol=1e-6
        )


def test_dominant_poles_output_is_ordered(rng):
    ss = random_diagonalizable_stable(rng, 6, 2, 2)
    got = dominant_poles(ss, 6)
    doms = [p.dominance for p in got]
    assert all(doms[i] >= doms[i + 1] - 1e-12 for i in range(len(doms) - 1))
    # the reported dominance is consistent with the reported residue
    for p in got:
        assert p.dominance == pytest.approx(dominance_index(p.value, p.residue), rel=1e-8)


def test_dominant_poles_conjugate_closure(rng):
    for _ in range(3):
        ss = random_diagonalizable_stable(rng, 6, 2, 2)
        got = dominant_poles(ss, 6)
        vals = np.array([p.value for p in got])
        for v in vals:
            if abs(v.imag) > 1e-8:
                d = np.min(np.abs(vals - np.conj(v)))
                assert d < 1e-6 * max(1.0, abs(v))


def test_dominant_poles_respects_count(rng):
    ss = random_diagonalizable_stable(rng, 8, 2, 2)
    got = dominant_poles(ss, 2)
    assert len(got) == 2
    # found values are true poles of the system
    eigs = np.linalg.eigvals(ss.A)
    for p in got:
        assert np.min(np.abs(eigs - p.value)) < 1e-6 * max(1.0, abs(p.value))


def test_dominant_poles_custom_shifts():
    a = np.diag([-1.0, -20.0])
    ss = StateSpace(a, np.eye(2), np.eye(2))
    got = dominant_poles(ss, 2, shifts=[-0.5 + 0.2j, -15.0 + 0.2j])
    assert_allclose(
        np.sort([p.value.real for p in got]), [-20.0, -1.0], atol=1e-6
    )


def test_dominant_poles_finds_most_dominant_first():
    # one very strong mode, one weak one, well separated
    a = np.diag([-1.0, -50.0])
    b = np.array([[10.0, 0.0], [0.0, 0.1]])
    ss = StateSpace(a, b, b.T)
    got = dominant_poles(ss, 1)
    assert got[0].value == pytest.approx(-1.0, abs=1e-6)


def test_dominant_poles_rejects_nonsquare(rng):
    ss = StateSpace(-np.eye(2), np.ones((2, 1)), np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        dominant_poles(ss, 1)


def test_dominant_poles_iteration_budget(rng):
    ss = random_diagonalizable_stable(rng, 5, 2, 2)
    with pytest.raises(NoConvergence):
        dominant_poles(ss, 5, max_outer=0)


def test_dominant_poles_empty_requests(rng):
    ss = random_diagonalizable_stable(rng, 4, 2, 2)
    assert dominant_poles(ss, 0) == []
