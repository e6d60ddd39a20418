import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from juntalab import qcore as qc
from juntalab.instances import BLOCK_MODES, LARGE, SMALL, haar_unitary, make_block_oracle, make_relaxed_oracle


def _oracle(n, side, mode, seed=0, override="seeded-random"):
    A = 0b1 if side == SMALL else 0b11
    r = make_relaxed_oracle(n, 1, 1, side, A, override, seed)
    return make_block_oracle(r, mode, seed=seed)


def _random_projector(rng, dim, rank):
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    v = q[:, :rank]
    return v @ v.conj().T


def test_layout_rules():
    lay = qc.RegisterLayout.of(T=3, W=2)
    assert lay.dim == 6 and lay.index(T=2, W=1) == 5
    with pytest.raises(ValueError):
        qc.RegisterLayout((("A", 2), ("A", 2)))
    with pytest.raises(ValueError):
        qc.RegisterLayout.of(A=1 << 13, B=1 << 12)


def test_phase_faithful_signs():
    n = 3
    o = _oracle(n, SMALL, "phase-faithful", seed=4)
    lay = qc.RegisterLayout.of(I=1 << n, W=2)
    amps = np.zeros(lay.dim, dtype=complex)
    amps[::2] = 1 / math.sqrt(1 << n)
    out = qc.apply_block_oracle(qc.StateVector(lay, amps), o).amps[::2] * math.sqrt(1 << n)
    want = np.real(o.blocks[:, 0, 0]).copy()
    want[0] = -1
    assert np.allclose(out, want)


def test_oracle_twice_identity_and_norm(rng):
    n = 3
    lay = qc.RegisterLayout.of(I=1 << n, W=2)
    v = rng.standard_normal(lay.dim) + 1j * rng.standard_normal(lay.dim)
    s = qc.StateVector(lay, v / np.linalg.norm(v))
    refl = _oracle(n, LARGE, "random-reflection", seed=1)
    back = qc.apply_block_oracle(qc.apply_block_oracle(s, refl), refl)
    assert np.max(np.abs(back.amps - s.amps)) < 1e-10
    uni = _oracle(n, SMALL, "random-unitary", seed=2)
    assert abs(qc.apply_block_oracle(s, uni).norm() - 1) < 1e-10


def test_layout_mismatch():
    o = _oracle(3, SMALL, "phase-faithful")
    with pytest.raises(ValueError):
        qc.apply_block_oracle(qc.StateVector.basis(qc.RegisterLayout.of(I=4, W=2)), o)


@pytest.mark.parametrize("sign", [1, -1])
def test_reflectionize_fixed_blocks(sign):
    o = _oracle(2, SMALL, "phase-faithful")
    o.blocks[:] = sign * np.eye(2)
    r = qc.reflectionize(o)
    assert np.allclose(r.blocks[:, :, 0], sign * np.eye(3)[0])


@pytest.mark.parametrize("mode", BLOCK_MODES)
@pytest.mark.parametrize("side", [SMALL, LARGE])
def test_reflectionize_sweep(mode, side):
    for n in range(2, 7):
        o = qc.reflectionize(_oracle(n, side, mode, seed=n))
        assert o.reflection_residual() < 1e-10
        assert o.unitarity_residual() < 1e-10
        assert o.promise_residual() < 1e-10


def test_reflectionize_eigenvalues(rng):
    o = _oracle(2, SMALL, "random-unitary", seed=9)
    for blk in qc.reflectionize(o).blocks:
        ev = np.linalg.eigvals(blk)
        assert np.all(np.minimum(np.abs(ev - 1), np.abs(ev + 1)) < 1e-8)


def test_amplified_probability_examples():
    assert qc.amplified_probability(0.0, 7) == 0
    assert qc.amplified_probability(1.0, 3) == pytest.approx(1, abs=1e-12)
    assert qc.amplified_probability(math.sin(math.pi / 10) ** 2, 2) == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("marked_count", [0, 1, 3, 8])
@pytest.mark.parametrize("rounds", [0, 1, 2, 5])
def test_amplify_matches_closed_form(marked_count, rounds, rng):
    A = qc.MatrixOp(haar_unitary(8, rng))
    marked = np.zeros(8, bool)
    marked[:marked_count] = True
    p = qc.success_probability(A, marked)
    op = qc.amplitude_amplify(A, marked, rounds)
    assert abs(qc.success_probability(op, marked) - qc.amplified_probability(p, rounds)) < 1e-9
    assert op.unitarity_residual() < 1e-9


def test_amplify_rejects_negative():
    with pytest.raises(ValueError):
        qc.amplitude_amplify(qc.MatrixOp(np.eye(2)), np.array([1, 0]), -1)


def test_phase_estimation_examples():
    assert qc.phase_estimation(np.eye(3), np.ones(3) / math.sqrt(3), 3)[0] == pytest.approx(1)
    U = np.exp(2j * math.pi * 3 / 8) * np.eye(2)
    assert qc.phase_estimation(U, np.array([1, 0]), 3)[3] == pytest.approx(1)
    D = np.diag([1, np.exp(2j * math.pi * 0.3)])
    P = qc.phase_estimation(D, np.array([0, 1]), 4)
    assert np.argmax(P) == 5
    assert P[4] + P[5] >= 8 / math.pi ** 2


def test_phase_estimation_rejects_nonunitary():
    with pytest.raises(ValueError):
        qc.phase_estimation(2 * np.eye(2), np.array([1, 0]), 2)
    with pytest.raises(ValueError):
        qc.phase_estimation(np.eye(2), np.array([1, 0]), 0)


@given(st.integers(1, 16), st.integers(1, 4), st.integers(0, 2**20))
def test_phase_estimation_matches_circuit(dim, a, seed):
    rng = np.random.default_rng(seed)
    U = haar_unitary(dim, rng)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    exact = qc.phase_estimation(U, v, a)
    assert abs(exact.sum() - 1) < 1e-10
    assert np.max(np.abs(exact - qc.literal_phase_estimation(U, v, a))) < 1e-9


def test_controlled_and_composed(rng):
    U = qc.MatrixOp(haar_unitary(3, rng))
    C = U.controlled().matrix()
    assert np.allclose(C[:3, :3], np.eye(3)) and np.allclose(C[3:, 3:], U.mat)
    assert np.allclose(U.then(U.inverse()).matrix(), np.eye(3))
    B = qc.BlockDiagonalOp(np.stack([U.mat, U.mat.conj().T]))
    assert B.unitarity_residual() < 1e-12
    assert np.allclose(B.inverse().matrix() @ B.matrix(), np.eye(6))


def _dense_two_reflection(Q, P, psi, a):
    I = np.eye(Q.shape[0])
    V = (I - 2 * P @ P.conj().T) @ (I - 2 * Q @ Q.conj().T)
    return qc.phase_estimation(V, psi, a)


@given(st.integers(0, 2**20))
def test_jordan_spectrum_matches_dense(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 12))
    rq, rp = int(rng.integers(0, dim + 1)), int(rng.integers(0, dim + 1))
    Q = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))[0][:, :rq]
    P = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))[0][:, :rp]
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    psi /= np.linalg.norm(psi)
    a = 5
    dense = _dense_two_reflection(Q, P, psi, a)
    for fn in (qc.two_reflection_spectrum(Q, P, psi),
               qc.spectrum_from_gram(Q.conj().T @ P, Q.conj().T @ psi, P.conj().T @ psi, 1.0)):
        assert np.max(np.abs(qc.distribution_from_spectrum(*fn, a) - dense)) < 1e-8


def test_jordan_shared_vectors():
    # a vector inside both images sits at phase 0, one inside neither also at 0
    Q = np.eye(3)[:, :2]
    P = np.eye(3)[:, 1:2]
    ph, wt = qc.two_reflection_spectrum(Q, P, np.array([0, 1, 0]))
    assert wt[np.argmin(qc.phase_distance(ph))] == pytest.approx(1)


def test_gap_check_examples(rng):
    P = _random_projector(rng, 6, 2)
    w = (np.eye(6) - P) @ rng.standard_normal(6)
    lhs, rhs, ok = qc.spectral_gap_check(P, P, w, 0.3)
    assert lhs < 1e-12 and ok
    P2 = _random_projector(rng, 6, 3)
    lhs, rhs, ok = qc.spectral_gap_check(P, P2, w, 0.0)
    assert lhs < 1e-9 and ok


def test_gap_check_preconditions(rng):
    P = _random_projector(rng, 4, 2)
    with pytest.raises(ValueError):
        qc.spectral_gap_check(P, 2 * P, np.zeros(4), 0.1)
    with pytest.raises(ValueError):
        qc.spectral_gap_check(P, P, P @ np.ones(4), 0.1)


@given(st.integers(0, 2**20))
def test_gap_check_random(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 33))
    P1 = _random_projector(rng, dim, int(rng.integers(0, dim + 1)))
    P2 = _random_projector(rng, dim, int(rng.integers(0, dim + 1)))
    w = (np.eye(dim) - P1) @ (rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    assert qc.spectral_gap_check(P1, P2, w, float(rng.uniform(0, math.pi)))[2]


def test_phase_distance():
    assert qc.phase_distance(2 * math.pi - 0.1) == pytest.approx(0.1)
    assert qc.phase_distance(math.pi) == pytest.approx(math.pi)
