import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from juntalab import qggt as qg
from juntalab.boolfn import popcount
from juntalab.instances import BLOCK_MODES, LARGE, SMALL, make_block_oracle, make_relaxed_oracle
from juntalab.qcore import oracle_blocks, reflectionize, spectral_gap_check
from juntalab.symqft import pairings, qft_matrix, specht_vector


def _spec(rng, n, k):
    return qg.LambdaSpec(n, k, tuple(rng.standard_normal(n - k + 1)))


def _oracle(n, k, d, side, mode, seed=0, override="seeded-random"):
    A = (1 << (k if side == SMALL else k + d)) - 1
    r = make_relaxed_oracle(n, k, d, side, A, override, seed)
    return reflectionize(make_block_oracle(r, mode, seed=seed))


def test_spec_validation():
    with pytest.raises(ValueError):
        qg.LambdaSpec(4, 1, (1.0, 1.0))
    with pytest.raises(ValueError):
        qg.QggtConfig(C1=0)
    with pytest.raises(ValueError):
        qg.QggtConfig(a=2).bits(10.0)


def test_build_w_example():
    w, wt = qg.build_w(qg.LambdaSpec(4, 1, (1.0,) * 4), 0)
    assert np.allclose(w, [4, 6, 2 * math.sqrt(6), 2, 0])
    assert np.linalg.norm(wt) == pytest.approx(1)


def test_build_w_top_level(rng):
    spec = _spec(rng, 7, 2)
    w, _ = qg.build_w(spec, 2)
    for l in range(2, 6):
        assert w[l - 2] == pytest.approx(spec.alpha[l] * math.sqrt(math.comb(3, l - 2)))
    with pytest.raises(ValueError):
        qg.build_w(spec, 3)


def test_zero_alpha():
    spec = qg.LambdaSpec(5, 2, (0.0,) * 4)
    w, wt = qg.build_w(spec, 1)
    assert not np.any(w) and not np.any(wt)
    assert qg.lambda_basis(spec).shape[1] == 0
    assert not np.any(qg.lambda_bruteforce(spec))


def test_only_empty_coefficient():
    L = qg.lambda_bruteforce(qg.LambdaSpec(4, 2, (1.0, 0.0, 0.0)))
    want = np.zeros((16, 16))
    want[0, 0] = 1
    assert np.allclose(L, want)


def test_rank_n6_k2(rng):
    spec = _spec(rng, 6, 2)
    L = qg.lambda_bruteforce(spec)
    assert round(np.trace(L).real) == 15 == qg.expected_rank(6, 2)
    assert qg.lambda_basis(spec).shape[1] == 15


@pytest.mark.parametrize("n", range(2, 11))
def test_blocks_match_bruteforce(n):
    rng = np.random.default_rng(n)
    for k in range(0, min(4, n // 2) + 1):
        spec = _spec(rng, n, k)
        F = qft_matrix(n)
        L = qg.lambda_bruteforce(spec)
        assert np.max(np.abs(F.T @ L @ F - qg.lambda_fourier_blocks(spec))) < 1e-9
        Qb = qg.lambda_basis(spec)
        assert np.max(np.abs(Qb @ Qb.conj().T - L)) < 1e-9


@pytest.mark.parametrize("n,k", [(4, 1), (5, 2), (6, 2), (7, 3)])
def test_decompose_identity(n, k):
    rng = np.random.default_rng(n * 10 + k)
    spec = _spec(rng, n, k)
    for t in range(k + 1):
        for pr in itertools.islice(pairings(n, t), 3):
            a, b = [p[0] for p in pr], [p[1] for p in pr]
            top = specht_vector(n, n - k, t, a, b)
            image = sum(top[T] * qg.psi_T(spec, T) for T in range(1 << n) if top[T])
            want = sum(spec.alpha[l] * math.comb(n - l - t, k - t) * specht_vector(n, l, t, a, b)
                       for l in range(t, n - k + 1))
            assert np.max(np.abs(image - want)) < 1e-9


@pytest.mark.parametrize("mode", ["direct", "walk"])
def test_reflection_fixes_psi(mode, rng):
    n, k = 6, 2
    spec = _spec(rng, n, k)
    for T in range(1 << n):
        if popcount(T) == n - k:
            v = qg.psi_T(spec, T)
            assert np.max(np.abs(qg.reflect_lambda(v, spec, mode) - v)) < 1e-9


@given(st.integers(1, 10), st.data())
def test_walk_equals_direct_and_squares_to_identity(n, data):
    k = data.draw(st.integers(0, n // 2))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**20)))
    spec = qg.LambdaSpec(n, k, tuple(rng.standard_normal(n - k + 1) + 1j * rng.standard_normal(n - k + 1)))
    V = rng.standard_normal((1 << n, 3)) + 1j * rng.standard_normal((1 << n, 3))
    D = qg.reflect_lambda(V, spec, "direct")
    assert np.max(np.abs(qg.reflect_lambda(V, spec, "walk") - D)) < 1e-8
    assert np.max(np.abs(qg.reflect_lambda(D, spec, "direct") - V)) < 1e-9


def test_reflect_rejects():
    spec = qg.LambdaSpec(3, 1, (1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        qg.reflect_lambda(np.zeros(4), spec)
    with pytest.raises(ValueError):
        qg.reflect_lambda(np.zeros(8), spec, "stroll")


@pytest.mark.parametrize("n,k,d", [(4, 1, 1), (5, 1, 2), (6, 2, 1)])
def test_witness_fixed_point(n, k, d):
    B = (1 << (k + d)) - 1
    oracle = _oracle(n, k, d, LARGE, "random-reflection", seed=n)
    spec, _, _ = qg.algorithm_spec(n, k, d)
    u = qg.witness(n, k, d, B)
    assert np.max(np.abs(qg.reflect_lambda(u, spec) + u)) < 1e-9
    full = np.zeros((1 << n, oracle.workspace), dtype=complex)
    full[:, 0] = u
    full = full.reshape(-1)
    assert np.linalg.norm(qg.apply_walk(full, oracle, spec) - full) < 1e-9 * np.linalg.norm(full)
    assert abs(u[0]) / np.linalg.norm(u) >= 1 / math.sqrt(1 + 1 / 8 ** 2) - 1e-12


@pytest.mark.parametrize("n,k,d", [(4, 1, 1), (5, 2, 1)])
def test_small_side_gap(n, k, d):
    oracle = _oracle(n, k, d, SMALL, "phase-faithful", override="ones")
    spec, W, gamma = qg.algorithm_spec(n, k, d)
    cfg = qg.QggtConfig()
    delta = cfg.delta(W)
    w_dim = oracle.workspace
    L = qg.lambda_bruteforce(spec)
    e0 = np.zeros((w_dim, w_dim))
    e0[0, 0] = 1
    Lt = np.kron(L, e0)
    P1 = np.eye(Lt.shape[0]) - Lt
    O = np.zeros_like(P1, dtype=complex)
    for S, blk in enumerate(oracle_blocks(oracle)):
        O[S * w_dim:(S + 1) * w_dim, S * w_dim:(S + 1) * w_dim] = blk
    P2 = (np.eye(O.shape[0]) - O) / 2
    A = (1 << k) - 1
    w = np.zeros(((1 << n), w_dim), dtype=complex)
    w[:, 0] = qg.psi_T(spec, ((1 << n) - 1) & ~A)
    w = w.reshape(-1)
    start = np.zeros_like(w)
    start[0] = 1
    assert np.allclose(P2 @ w, start)
    lhs, rhs, ok = spectral_gap_check(P1, P2, w, 2 * delta)
    assert ok
    assert lhs <= delta * math.sqrt(1 + (8 * W) ** 2) + 1e-9


@pytest.mark.parametrize("mode", BLOCK_MODES)
@pytest.mark.parametrize("side", [SMALL, LARGE])
def test_compressed_matches_dense(mode, side):
    for n, k, d in [(3, 1, 1), (4, 1, 2), (4, 2, 1)]:
        oracle = _oracle(n, k, d, side, mode, seed=n + k)
        res = qg.qggt_run(oracle, k, d)
        assert abs(res.acceptance_probability - qg.full_space_acceptance(oracle, k, d)) < 1e-9
        assert (res.decision == SMALL) == (side == SMALL)


def test_run_reports_queries():
    oracle = _oracle(5, 1, 1, SMALL, "random-reflection")
    res = qg.qggt_run(oracle, 1, 1)
    assert res.queries == 2 ** res.a - 1
    assert res.a == math.ceil(math.log2(2 * math.pi * 64 * res.W)) + 3
    assert set(res.to_dict()) >= {"decision", "acceptance_probability", "queries", "a", "delta"}


def test_run_rejects_non_reflection():
    r = make_relaxed_oracle(4, 1, 1, SMALL, 0b1, "zeros")
    oracle = make_block_oracle(r, "random-unitary", seed=1, workspace=3)
    with pytest.raises(ValueError):
        qg.qggt_run(oracle, 1, 1)


def test_padding():
    assert qg.padded_size(3, 2, 1) == 5
    assert qg.padded_size(10, 2, 1) == 10
    oracle = _oracle(3, 2, 1, SMALL, "random-reflection")
    res = qg.qggt_run(oracle, 2, 1)
    assert res.n_padded == 5 and res.decision == SMALL


def test_decision_independent_of_irrelevant_blocks():
    n, k, d = 5, 1, 2
    for side, size in ((SMALL, k), (LARGE, k + d)):
        for A in range(1 << n):
            if popcount(A) != size:
                continue
            r = make_relaxed_oracle(n, k, d, side, A, "seeded-random", A)
            decisions = {qg.qggt_run(reflectionize(make_block_oracle(r, m, seed=A)), k, d).decision
                         for m in BLOCK_MODES}
            assert decisions == {side}
