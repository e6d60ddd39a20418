"""The reflection about Lambda and the phase-estimation gap group tester."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .adversary import build_ggt_solution
from .boolfn import popcount, popcounts
from .instances import BlockOracle, SMALL, LARGE
from .qcore import distribution_from_spectrum, oracle_blocks, phase_distance, spectrum_from_gram
from .symqft import FourierIndex, qft_forward, qft_inverse, specht_dimension, valid_strings

MAX_BRUTE_N = 12


@dataclass(frozen=True)
class LambdaSpec:
    """Coefficients alpha_0..alpha_{n-k} of the vectors psi_T = sum_l alpha_l sum_{B in T, |B|=l} |B>."""

    n: int
    k: int
    alpha: tuple

    def __post_init__(self):
        if not 0 <= self.k <= self.n:
            raise ValueError("need 0 <= k <= n")
        if len(self.alpha) != self.n - self.k + 1:
            raise ValueError("alpha must have n-k+1 entries")

    def coeff(self, l: int) -> complex:
        return self.alpha[l] if 0 <= l <= self.n - self.k else 0.0


@dataclass(frozen=True)
class QggtConfig:
    C1: float = 8.0
    C: float = 64.0
    a: int | None = None  # ancilla bits; derived from W when None
    pad: int = 3

    def __post_init__(self):
        if self.C1 <= 0 or self.C <= 0:
            raise ValueError("C1 and C must be positive")

    def delta(self, W: float) -> float:
        return 1.0 / (self.C * W)

    def bits(self, W: float) -> int:
        need = math.ceil(math.log2(2 * math.pi / self.delta(W))) + self.pad
        if self.a is None:
            return need
        if self.a < need:
            raise ValueError(f"a={self.a} is below the required {need} ancilla bits")
        return self.a


def padded_size(n: int, k: int, d: int) -> int:
    """Universe size after adding dummy elements: at least k+d and larger than 2k."""
    return max(n, k + d, 2 * k + 1)


def algorithm_spec(n: int, k: int, d: int, C1: float = 8.0) -> tuple[LambdaSpec, float, float]:
    """The Lambda of the tester: alpha_0 = 1, alpha_s = gamma * (adversary alpha_s). Returns (spec, W, gamma)."""
    sol = build_ggt_solution(n, k, d)
    gamma = C1 * math.sqrt(sol.W)
    alpha = [1.0] + [0.0] * (n - k)
    for s in range(1, sol.smax + 1):
        alpha[s] = gamma * float(sol.alpha[s - 1])
    return LambdaSpec(n, k, tuple(alpha)), sol.W, gamma


def build_w(spec: LambdaSpec, t: int) -> tuple[np.ndarray, np.ndarray]:
    """w_t[l] for l = t..n-t and its normalized copy (zero stays zero)."""
    n, k = spec.n, spec.k
    if t > k or t < 0:
        raise ValueError("need 0 <= t <= k")
    w = np.zeros(n - 2 * t + 1, dtype=np.result_type(*spec.alpha, float))
    for l in range(t, n - k + 1):
        w[l - t] = spec.coeff(l) * math.comb(n - l - t, k - t) * math.sqrt(math.comb(n - 2 * t, l - t))
    norm = np.linalg.norm(w)
    return w, (w / norm if norm > 0 else w.copy())


def psi_T(spec: LambdaSpec, T: int) -> np.ndarray:
    n = spec.n
    idx = np.arange(1 << n)
    inside = (idx & ~T) == 0
    coeff = np.array([spec.coeff(l) for l in range(n + 1)], dtype=complex)
    return np.where(inside, coeff[popcounts(n)], 0)


def lambda_bruteforce(spec: LambdaSpec) -> np.ndarray:
    """Orthogonal projector onto span{psi_T : |T| = n-k}."""
    n, k = spec.n, spec.k
    if n > MAX_BRUTE_N:
        raise ValueError(f"n must be at most {MAX_BRUTE_N}")
    Ts = [T for T in range(1 << n) if popcount(T) == n - k]
    mat = np.array([psi_T(spec, T) for T in Ts]).T
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((1 << n, 1 << n), dtype=complex)
    rank = int(np.sum(s > 1e-9 * s[0]))
    U = u[:, :rank]
    return U @ U.conj().T


def lambda_fourier_blocks(spec: LambdaSpec) -> np.ndarray:
    """The matrix sum_t (w~_t w~_t^*) x I in the Fourier basis (canonical order)."""
    n = spec.n
    idx = FourierIndex(n)
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for t in range(min(spec.k, n // 2) + 1):
        _, wt = build_w(spec, t)
        off, nl, nx = idx.block(t)
        blk = np.kron(np.outer(wt, wt.conj()), np.eye(nx))
        out[off:off + nl * nx, off:off + nl * nx] = blk
    return out


def lambda_basis(spec: LambdaSpec) -> np.ndarray:
    """Orthonormal basis (columns, subset basis) of the image of Lambda."""
    n = spec.n
    idx = FourierIndex(n)
    cols = []
    for t in range(min(spec.k, n // 2) + 1):
        _, wt = build_w(spec, t)
        if not np.any(wt):
            continue
        off, nl, nx = idx.block(t)
        blk = np.zeros((1 << n, nx), dtype=wt.dtype)
        for j in range(nx):
            blk[off + j:off + nl * nx:nx, j] = wt
        cols.append(blk)
    if not cols:
        return np.zeros((1 << n, 0))
    return qft_forward(np.hstack(cols), n)


def _walk_rotations(spec: LambdaSpec, t: int):
    """Givens rotations (c_l, s_l) on levels (l, l+1) unloading w~_t one level at a time.

    Level amplitudes come from the ratio c_{l+1}/c_l = (n-l-k)/sqrt((n-l-t)(l+1-t));
    the remaining weight above each level fixes the rotation angle.
    """
    n, k = spec.n, spec.k
    levels = list(range(t, n - t + 1))
    c = [float(math.comb(n - 2 * t, k - t))]
    for l in levels[:-1]:
        if l >= n - k:
            c.append(0.0)
        else:
            c.append(c[-1] * (n - l - k) / math.sqrt((n - l - t) * (l + 1 - t)))
    amps = np.array([spec.coeff(l) * c[i] for i, l in enumerate(levels)], dtype=complex)
    norm2 = float(np.sum(np.abs(amps) ** 2))
    if norm2 == 0:
        return None
    amps = amps / math.sqrt(norm2)
    # remaining weight below each level, summed from the top for accuracy
    R = np.cumsum((np.abs(amps) ** 2)[::-1])[::-1]
    rots = []
    for i in range(len(levels) - 1):
        if R[i + 1] <= 1e-30:
            break
        root = math.sqrt(R[i])
        rots.append((amps[i] / root, math.sqrt(R[i + 1]) / root))
    m = len(rots)
    phase = amps[m] / abs(amps[m])
    return rots, phase


def _apply_rotations(blk: np.ndarray, rots, phase, inverse: bool) -> None:
    last = len(rots)
    if inverse:
        blk[last] *= np.conj(phase)
    seq = reversed(list(enumerate(rots))) if inverse else enumerate(rots)
    for i, (cc, ss) in seq:
        a, b = blk[i].copy(), blk[i + 1].copy()
        if inverse:
            blk[i] = np.conj(cc) * a + ss * b
            blk[i + 1] = -ss * a + cc * b
        else:
            blk[i] = cc * a - ss * b
            blk[i + 1] = ss * a + np.conj(cc) * b
    if not inverse:
        blk[last] *= phase


def reflect_lambda(state: np.ndarray, spec: LambdaSpec, mode: str = "direct") -> np.ndarray:
    """Apply 2*Lambda - I to a subset-basis vector (or to each column of a matrix)."""
    n, k = spec.n, spec.k
    v = np.asarray(state)
    if v.shape[0] != 1 << n:
        raise ValueError("state must live on the 2^n subset basis")
    if mode not in ("direct", "walk"):
        raise ValueError("mode must be 'direct' or 'walk'")
    y = np.array(qft_inverse(v, n), dtype=complex)
    idx = FourierIndex(n)
    for t in range(n // 2 + 1):
        off, nl, nx = idx.block(t)
        seg = y[off:off + nl * nx]
        blk = seg.reshape(nl, nx, *v.shape[1:])
        if t > k:
            blk *= -1
            continue
        if mode == "direct":
            _, wt = build_w(spec, t)
            if not np.any(wt):
                blk *= -1
                continue
            proj = np.tensordot(wt.conj(), blk, axes=(0, 0))
            blk[...] = 2 * np.multiply.outer(wt, proj) - blk
        else:
            plan = _walk_rotations(spec, t)
            if plan is None:
                blk *= -1
                continue
            rots, phase = plan
            _apply_rotations(blk, rots, phase, inverse=True)
            blk[1:] *= -1
            _apply_rotations(blk, rots, phase, inverse=False)
    return qft_forward(y, n)


@lru_cache(maxsize=64)
def _setup(n: int, k: int, d: int, C1: float):
    spec, W, gamma = algorithm_spec(n, k, d, C1)
    Qb = lambda_basis(spec)
    return spec, W, gamma, Qb


@dataclass
class QggtResult:
    decision: str  # "small" (accept) or "large" (reject)
    acceptance_probability: float
    queries: int
    a: int
    delta: float
    W: float
    n: int
    n_padded: int
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"decision": self.decision, "acceptance_probability": self.acceptance_probability,
                "queries": self.queries, "a": self.a, "delta": self.delta, "W": self.W,
                "n_padded": self.n_padded}


def _compressed_overlaps(oracle: BlockOracle, Qb: np.ndarray, tol: float = 1e-12):
    """Overlap data of the compressed walk space.

    For a reflection O_S the plane span{|0>, O_S|0>} is invariant, so each S
    contributes at most one extra basis vector. Returns the quantities that
    spectral routines need for psi = |empty>|0>.
    """
    blocks = oracle_blocks(oracle)
    v = blocks[:, :, 0]
    c = v[:, 0].real
    s = np.linalg.norm(v - np.outer(c, np.eye(1, oracle.workspace)[0]), axis=1)
    flat = s <= tol
    minus = flat & (c < 0)
    plane = ~flat
    # columns of the -1 eigenspace basis: unit vectors on flat -1 branches, and
    # ((1-c)|S,0> - s|S,e>)/sqrt(2-2c) on the two-dimensional branches
    rows = np.concatenate([np.flatnonzero(minus), np.flatnonzero(plane)])
    coef0 = np.concatenate([np.ones(int(minus.sum())),
                            (1 - c[plane]) / np.sqrt(2 - 2 * c[plane])])
    M = Qb[rows, :].conj().T * coef0[None, :]
    qpsi = Qb[0, :].conj()
    ppsi = np.where(rows == 0, coef0, 0.0)
    return M, qpsi, ppsi


def qggt_spectrum(oracle: BlockOracle, k: int, d: int, cfg: QggtConfig = QggtConfig()):
    """Eigenphases of U = O_f R_Lambda and the weights of the start state |empty>|0>."""
    n_pad = padded_size(oracle.n, k, d)
    if n_pad != oracle.n:
        oracle = oracle.pad(n_pad)
    spec, W, gamma, Qb = _setup(n_pad, k, d, float(cfg.C1))
    M, qpsi, ppsi = _compressed_overlaps(oracle, Qb)
    phases, weights = spectrum_from_gram(M, qpsi, ppsi, 1.0)
    # U = O R = -(I - 2 Pi_P)(I - 2 Pi_Q): shift every phase by pi
    return np.mod(phases + np.pi, 2 * np.pi), weights, W


def window_outcomes(a: int, delta: float) -> np.ndarray:
    N = 1 << a
    js = np.arange(N)
    return js[phase_distance(2 * np.pi * js / N) <= delta]


def qggt_run(oracle: BlockOracle, k: int, d: int, cfg: QggtConfig = QggtConfig()) -> QggtResult:
    """Exact acceptance probability of the phase-estimation tester on a reflection oracle."""
    if oracle.reflection_residual() > 1e-9:
        raise ValueError("oracle blocks must be reflections (apply reflectionize first)")
    if k < 1 or d < 1:
        raise ValueError("need k, d >= 1")
    phases, weights, W = qggt_spectrum(oracle, k, d, cfg)
    delta = cfg.delta(W)
    a = cfg.bits(W)
    near = distribution_from_spectrum(phases, weights, a, window_outcomes(a, delta)).sum()
    p_acc = float(min(max(1.0 - near, 0.0), 1.0))
    return QggtResult(SMALL if p_acc >= 0.5 else LARGE, p_acc, (1 << a) - 1, a, delta, W,
                      oracle.n, padded_size(oracle.n, k, d))


def witness(n: int, k: int, d: int, B: int, C1: float = 8.0) -> np.ndarray:
    """u = gamma|empty> - sum_s beta_s sum_{|S|=s, |S cap B|=1} |S> on the subset register."""
    sol = build_ggt_solution(n, k, d)
    gamma = C1 * math.sqrt(sol.W)
    u = -sol.psi(B).astype(complex)
    u[0] = gamma
    return u


def apply_walk(vec: np.ndarray, oracle: BlockOracle, spec: LambdaSpec, mode: str = "direct") -> np.ndarray:
    """U = O_f R with R = 2 (Lambda x |0><0|_W) - I, on a (2^n * w) vector laid out as (I, W)."""
    w = oracle.workspace
    t = np.array(vec, dtype=complex).reshape(1 << oracle.n, w)
    out = -t
    out[:, 0] = reflect_lambda(t[:, 0], spec, mode)
    out = np.einsum("sij,sj->si", oracle_blocks(oracle), out)
    return out.reshape(-1)


def explicit_walk_operator(oracle: BlockOracle, spec: LambdaSpec) -> np.ndarray:
    """Dense U on the full (uncompressed) I x W space; small n only."""
    n, w = oracle.n, oracle.workspace
    L = lambda_bruteforce(spec)
    e0 = np.zeros((w, w))
    e0[0, 0] = 1
    R = 2 * np.kron(L, e0) - np.eye((1 << n) * w)
    O = np.zeros(((1 << n) * w, (1 << n) * w), dtype=complex)
    blocks = oracle_blocks(oracle)
    for S in range(1 << n):
        O[S * w:(S + 1) * w, S * w:(S + 1) * w] = blocks[S]
    return O @ R


def full_space_acceptance(oracle: BlockOracle, k: int, d: int, cfg: QggtConfig = QggtConfig()) -> float:
    """Reference acceptance probability from a dense eigendecomposition of U (small n)."""
    from .qcore import eigen_spectrum
    n_pad = padded_size(oracle.n, k, d)
    if n_pad != oracle.n:
        oracle = oracle.pad(n_pad)
    spec, W, _ = algorithm_spec(n_pad, k, d, cfg.C1)
    U = explicit_walk_operator(oracle, spec)
    start = np.zeros(U.shape[0], dtype=complex)
    start[0] = 1
    phases, weights = eigen_spectrum(U, start)
    a = cfg.bits(W)
    near = distribution_from_spectrum(phases, weights, a, window_outcomes(a, cfg.delta(W))).sum()
    return float(1.0 - near)


def expected_rank(n: int, k: int) -> int:
    return sum(specht_dimension(n, t) for t in range(min(k, n // 2) + 1))
