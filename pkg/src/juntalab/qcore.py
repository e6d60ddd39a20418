"""Exact state-vector simulation primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .instances import BlockOracle

DIMENSION_CAP = 1 << 24


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]
    cap: int = DIMENSION_CAP

    def __post_init__(self):
        names = [name for name, _ in self.registers]
        if len(set(names)) != len(names):
            raise ValueError("register names must be unique")
        if any(d < 1 for _, d in self.registers):
            raise ValueError("register dimensions must be positive")
        if self.dim > self.cap:
            raise ValueError(f"total dimension {self.dim} exceeds the cap {self.cap}")

    @classmethod
    def of(cls, **dims: int) -> "RegisterLayout":
        return cls(tuple(dims.items()))

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.registers]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.registers)

    @property
    def dim(self) -> int:
        return math.prod(self.shape)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"layout has no register {name!r}") from None

    def index(self, **values: int) -> int:
        """Flat index of the basis state with the given register values (others 0)."""
        coords = [values.get(name, 0) for name in self.names]
        return int(np.ravel_multi_index(coords, self.shape))


@dataclass(frozen=True)
class StateVector:
    layout: RegisterLayout
    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex)
        if a.shape != (self.layout.dim,):
            raise ValueError("amplitude array does not match the layout")
        object.__setattr__(self, "amps", a)

    @classmethod
    def basis(cls, layout: RegisterLayout, **values: int) -> "StateVector":
        a = np.zeros(layout.dim, dtype=complex)
        a[layout.index(**values)] = 1
        return cls(layout, a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.layout.shape)

    def probabilities(self, name: str) -> np.ndarray:
        ax = self.layout.axis(name)
        p = np.abs(self.tensor()) ** 2
        other = tuple(i for i in range(p.ndim) if i != ax)
        return p.sum(axis=other)


class UnitaryOp:
    """Linear operator on C^dim with apply / inverse / controlled forms."""

    dim: int

    def apply(self, vec: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "UnitaryOp":
        raise NotImplementedError

    def __call__(self, state):
        if isinstance(state, StateVector):
            return StateVector(state.layout, self.apply(state.amps))
        return self.apply(np.asarray(state))

    def matrix(self) -> np.ndarray:
        return self.apply(np.eye(self.dim, dtype=complex))

    def unitarity_residual(self) -> float:
        m = self.matrix()
        return float(np.max(np.abs(m.conj().T @ m - np.eye(self.dim))))

    def controlled(self) -> "UnitaryOp":
        """|0><0| x I + |1><1| x U, control qubit as the leading factor."""
        return ControlledOp(self)

    def then(self, other: "UnitaryOp") -> "UnitaryOp":
        return ComposedOp([self, other])


class MatrixOp(UnitaryOp):
    def __init__(self, mat: np.ndarray):
        m = np.asarray(mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        self.mat = m
        self.dim = m.shape[0]

    def apply(self, vec):
        return self.mat @ vec

    def inverse(self):
        return MatrixOp(self.mat.conj().T)

    def matrix(self):
        return self.mat.copy()


class FunctionOp(UnitaryOp):
    def __init__(self, dim: int, forward: Callable, backward: Callable):
        self.dim = dim
        self._f, self._b = forward, backward

    def apply(self, vec):
        return self._f(vec)

    def inverse(self):
        return FunctionOp(self.dim, self._b, self._f)


class ComposedOp(UnitaryOp):
    """Applies ops[0] first, then ops[1], and so on."""

    def __init__(self, ops: Sequence[UnitaryOp]):
        ops = list(ops)
        if not ops:
            raise ValueError("need at least one operator")
        if len({op.dim for op in ops}) != 1:
            raise ValueError("dimension mismatch in composition")
        self.ops = ops
        self.dim = ops[0].dim

    def apply(self, vec):
        for op in self.ops:
            vec = op.apply(vec)
        return vec

    def inverse(self):
        return ComposedOp([op.inverse() for op in reversed(self.ops)])


class BlockDiagonalOp(UnitaryOp):
    """Direct sum of blocks keyed by the value of a control register (control-major layout)."""

    def __init__(self, blocks: np.ndarray):
        b = np.asarray(blocks, dtype=complex)
        if b.ndim != 3 or b.shape[1] != b.shape[2]:
            raise ValueError("blocks must have shape (c, w, w)")
        self.blocks = b
        self.dim = b.shape[0] * b.shape[1]

    def apply(self, vec):
        c, w, _ = self.blocks.shape
        v = vec.reshape(c, w, *vec.shape[1:])
        out = np.einsum("sij,sj...->si...", self.blocks, v)
        return out.reshape(vec.shape)

    def inverse(self):
        return BlockDiagonalOp(np.conj(np.transpose(self.blocks, (0, 2, 1))))


class ControlledOp(UnitaryOp):
    def __init__(self, op: UnitaryOp):
        self.op = op
        self.dim = 2 * op.dim

    def apply(self, vec):
        half = self.op.dim
        out = np.array(vec, dtype=complex, copy=True)
        out[half:] = self.op.apply(out[half:])
        return out

    def inverse(self):
        return ControlledOp(self.op.inverse())


def oracle_blocks(oracle: BlockOracle) -> np.ndarray:
    """Blocks with the empty-set branch replaced by -I (it stands for the extra |0> state)."""
    b = oracle.blocks.copy()
    b[0] = -np.eye(oracle.workspace)
    return b


def apply_block_oracle(state: StateVector, oracle: BlockOracle) -> StateVector:
    lay = state.layout
    ai, aw = lay.axis("I"), lay.axis("W")
    if lay.shape[ai] != 1 << oracle.n or lay.shape[aw] != oracle.workspace:
        raise ValueError("layout does not match the oracle's registers")
    t = np.moveaxis(state.tensor(), (ai, aw), (0, 1))
    out = np.einsum("sij,sj...->si...", oracle_blocks(oracle), t)
    out = np.moveaxis(out, (0, 1), (ai, aw))
    return StateVector(lay, out.reshape(-1))


def reflectionize(oracle: BlockOracle) -> BlockOracle:
    """Turn every block into a reflection with the same action on |0>.

    The workspace gains one basis state e (index w). With V the Hadamard on
    span{|0>, e} and R the reflection about (|0>+e)/sqrt2, the new block is
    (O V)^-1 R (O V), where O acts trivially on e.
    """
    w = oracle.workspace
    ext = np.zeros((oracle.blocks.shape[0], w + 1, w + 1), dtype=complex)
    ext[:, :w, :w] = oracle.blocks
    ext[:, w, w] = 1
    V = np.eye(w + 1, dtype=complex)
    h = 1 / math.sqrt(2)
    V[np.ix_([0, w], [0, w])] = [[h, h], [h, -h]]
    plus = np.zeros(w + 1)
    plus[0] = plus[w] = h
    R = 2 * np.outer(plus, plus) - np.eye(w + 1)
    OV = ext @ V
    new = np.einsum("sji,jk,skl->sil", OV.conj(), R, OV)
    return BlockOracle(oracle.n, new, oracle.side, oracle.A, oracle.relevant,
                       {**oracle.meta, "reflectionized": True})


def amplified_probability(p: float, rounds: int) -> float:
    """Success probability after `rounds` Grover iterates from initial probability p."""
    if p <= 0:
        return 0.0
    theta = math.asin(math.sqrt(min(p, 1.0)))
    return math.sin((2 * rounds + 1) * theta) ** 2


def amplitude_amplify(A: UnitaryOp, marked: np.ndarray, rounds: int) -> UnitaryOp:
    """A followed by `rounds` applications of Q = -A R0 A^-1 R_marked."""
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    marked = np.asarray(marked, dtype=bool)
    if marked.shape != (A.dim,):
        raise ValueError("marked mask must cover every basis state")
    sign = np.where(marked, -1.0, 1.0)
    Ainv = A.inverse()

    def refl_marked(v):
        return sign.reshape(-1, *([1] * (v.ndim - 1))) * v

    def refl_zero(v):
        v = np.array(v, dtype=complex, copy=True)
        v[0] *= -1
        return v

    def q(v):
        return -A.apply(refl_zero(Ainv.apply(refl_marked(v))))

    def q_inv(v):
        return -refl_marked(A.apply(refl_zero(Ainv.apply(v))))

    Q = FunctionOp(A.dim, q, q_inv)
    return ComposedOp([A] + [Q] * rounds)


def success_probability(op: UnitaryOp, marked: np.ndarray) -> float:
    start = np.zeros(op.dim, dtype=complex)
    start[0] = 1
    out = op.apply(start)
    return float(np.sum(np.abs(out[np.asarray(marked, dtype=bool)]) ** 2))


def fejer_kernel(theta, a: int) -> np.ndarray:
    """|sum_{m<2^a} e^{i m theta}|^2 / 2^{2a}."""
    N = 1 << a
    th = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
    half = np.sin(th / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sin(N * th / 2) ** 2 / (N * N * half ** 2)
    near = np.abs(half) < 1e-12
    return np.where(near, 1.0, val)


def merge_spectrum(phases: np.ndarray, weights: np.ndarray, tol: float = 1e-9):
    """Merge eigenphases closer than tol (on the circle), summing their weights."""
    ph = np.mod(np.asarray(phases, dtype=float), 2 * np.pi)
    wt = np.asarray(weights, dtype=float)
    if ph.size == 0:
        return ph, wt
    order = np.argsort(ph)
    ph, wt = ph[order], wt[order]
    groups = [[0]]
    for i in range(1, ph.size):
        if ph[i] - ph[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    if len(groups) > 1 and ph[0] + 2 * np.pi - ph[-1] <= tol:
        groups[0] = groups.pop() + groups[0]
    out_ph = np.array([ph[g[0]] for g in groups])
    out_wt = np.array([wt[g].sum() for g in groups])
    return out_ph, out_wt


def eigen_spectrum(U: np.ndarray, initial: np.ndarray, check: bool = True):
    """Eigenphases of a unitary matrix and the weights of `initial` on each eigenspace."""
    U = np.asarray(U, dtype=complex)
    if check:
        res = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
        if res >= 1e-8:
            raise ValueError(f"operator is not unitary (residual {res:.2e})")
    T, Z = scipy.linalg.schur(U, output="complex")
    lam = np.diag(T)
    lam = lam / np.abs(lam)
    phases = np.mod(np.angle(lam), 2 * np.pi)
    weights = np.abs(Z.conj().T @ np.asarray(initial, dtype=complex)) ** 2
    return merge_spectrum(phases, weights)


def distribution_from_spectrum(phases, weights, a: int, outcomes=None) -> np.ndarray:
    N = 1 << a
    js = np.arange(N) if outcomes is None else np.asarray(outcomes)
    grid = 2 * np.pi * js / N
    K = fejer_kernel(np.asarray(phases)[:, None] - grid[None, :], a)
    return np.asarray(weights) @ K


def phase_estimation(U, initial, a: int) -> np.ndarray:
    """Exact outcome distribution of a-bit phase estimation on U started from `initial`."""
    if a < 1:
        raise ValueError("need at least one ancilla bit")
    mat = U.matrix() if isinstance(U, UnitaryOp) else np.asarray(U)
    vec = initial.amps if isinstance(initial, StateVector) else np.asarray(initial)
    phases, weights = eigen_spectrum(mat, vec)
    return distribution_from_spectrum(phases, weights, a)


def literal_phase_estimation(U, initial, a: int) -> np.ndarray:
    """Gate-by-gate simulation: Hadamards, controlled powers U^(2^i), inverse QFT."""
    mat = U.matrix() if isinstance(U, UnitaryOp) else np.asarray(U, dtype=complex)
    vec = initial.amps if isinstance(initial, StateVector) else np.asarray(initial, dtype=complex)
    N = 1 << a
    state = np.tile(vec, (N, 1)).astype(complex) / math.sqrt(N)
    power = mat.copy()
    for i in range(a):
        sel = (np.arange(N) >> i) & 1 == 1
        state[sel] = state[sel] @ power.T
        power = power @ power
    out = np.fft.fft(state, axis=0) / math.sqrt(N)
    return np.sum(np.abs(out) ** 2, axis=1)


def phase_distance(phi):
    phi = np.mod(phi, 2 * np.pi)
    return np.minimum(phi, 2 * np.pi - phi)


def two_reflection_spectrum(Q: np.ndarray, P: np.ndarray, psi: np.ndarray, eps: float = 1e-7):
    """Spectrum of V = (I - 2 Pi_P)(I - 2 Pi_Q) as seen from psi.

    Q and P hold orthonormal bases (as columns) of the two projectors' images.
    Uses the principal-angle (Jordan) decomposition, so the cost scales with
    the projector ranks rather than with the ambient dimension.
    """
    psi = np.asarray(psi, dtype=complex)
    return spectrum_from_overlaps(Q.conj().T @ P, Q.conj().T @ psi, P.conj().T @ psi,
                                  float(np.vdot(psi, psi).real), eps)


def spectrum_from_overlaps(M: np.ndarray, qpsi: np.ndarray, ppsi: np.ndarray,
                           norm2: float, eps: float = 1e-7):
    """Core of two_reflection_spectrum, given M = Q^H P, Q^H psi, P^H psi and ||psi||^2."""
    if M.size:
        X, s, Yh = np.linalg.svd(M, full_matrices=False)
    else:
        X = np.zeros((M.shape[0], 0))
        Yh = np.zeros((0, M.shape[1]))
        s = np.zeros(0)
    c = np.clip(s, 0.0, 1.0)
    aq = X.conj().T @ qpsi
    ap = Yh @ ppsi
    phases, weights = [], []
    sn = np.sqrt(np.clip(1 - c * c, 0.0, None))
    common = sn <= eps
    if np.any(common):
        phases.append(np.zeros(int(common.sum())))
        weights.append(np.abs(aq[common]) ** 2)
    blk = ~common
    if np.any(blk):
        theta = np.arctan2(sn[blk], c[blk])
        ar = (ap[blk] - c[blk] * aq[blk]) / sn[blk]
        phases += [2 * theta, -2 * theta]
        weights += [np.abs(aq[blk] + 1j * ar) ** 2 / 2, np.abs(aq[blk] - 1j * ar) ** 2 / 2]
    extra_p = max(float(np.sum(np.abs(ppsi) ** 2) - np.sum(np.abs(ap) ** 2)), 0.0)
    extra_q = max(float(np.sum(np.abs(qpsi) ** 2) - np.sum(np.abs(aq) ** 2)), 0.0)
    phases.append(np.array([np.pi]))
    weights.append(np.array([extra_p + extra_q]))
    used = sum(float(np.sum(w)) for w in weights)
    phases.append(np.array([0.0]))
    weights.append(np.array([max(norm2 - used, 0.0)]))
    return merge_spectrum(np.concatenate(phases), np.concatenate(weights))


def spectrum_from_gram(M: np.ndarray, qpsi: np.ndarray, ppsi: np.ndarray, norm2: float,
                       eps: float = 1e-7, tiny: float = 1e-9):
    """Same output as spectrum_from_overlaps, from an eigendecomposition of M M^H.

    Only M @ ppsi is needed on the P side, which avoids an SVD of the wide
    matrix M. Directions of Q with singular value below `tiny` are orthogonal
    to P and land at phase pi together with the rest of P.
    """
    lam, X = np.linalg.eigh(M @ M.conj().T)
    s = np.sqrt(np.clip(lam, 0.0, 1.0))
    aq = X.conj().T @ qpsi
    mp = X.conj().T @ (M @ ppsi)
    ok = s > tiny
    ap = np.zeros_like(aq)
    ap[ok] = mp[ok] / s[ok]
    sn = np.sqrt(np.clip(1 - s * s, 0.0, None))
    phases, weights = [], []
    common = ok & (sn <= eps)
    if np.any(common):
        phases.append(np.zeros(int(common.sum())))
        weights.append(np.abs(aq[common]) ** 2)
    blk = ok & ~common
    if np.any(blk):
        theta = np.arctan2(sn[blk], s[blk])
        ar = (ap[blk] - s[blk] * aq[blk]) / sn[blk]
        phases += [2 * theta, -2 * theta]
        weights += [np.abs(aq[blk] + 1j * ar) ** 2 / 2, np.abs(aq[blk] - 1j * ar) ** 2 / 2]
    extra_p = max(float(np.sum(np.abs(ppsi) ** 2) - np.sum(np.abs(ap[ok]) ** 2)), 0.0)
    extra_q = max(float(np.sum(np.abs(qpsi) ** 2) - np.sum(np.abs(aq[ok]) ** 2)), 0.0)
    phases.append(np.array([np.pi]))
    weights.append(np.array([extra_p + extra_q]))
    used = sum(float(np.sum(w)) for w in weights)
    phases.append(np.array([0.0]))
    weights.append(np.array([max(norm2 - used, 0.0)]))
    return merge_spectrum(np.concatenate(phases), np.concatenate(weights))


def _is_projector(P: np.ndarray, tol: float = 1e-9) -> bool:
    return (np.max(np.abs(P @ P - P)) < tol) and (np.max(np.abs(P - P.conj().T)) < tol)


def spectral_gap_check(P1: np.ndarray, P2: np.ndarray, w: np.ndarray, delta: float):
    """Check ||P_delta P2 w|| <= (delta/2)||w|| for w in ker P1, with P_delta the
    eigenprojector of (2P2-I)(2P1-I) on phases within delta of 0."""
    P1, P2 = np.asarray(P1, dtype=complex), np.asarray(P2, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if not (_is_projector(P1) and _is_projector(P2)):
        raise ValueError("inputs must be orthogonal projectors")
    if np.linalg.norm(P1 @ w) > 1e-9 * max(1.0, np.linalg.norm(w)):
        raise ValueError("w must lie in the kernel of the first projector")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    I = np.eye(P1.shape[0])
    U = (2 * P2 - I) @ (2 * P1 - I)
    T, Z = scipy.linalg.schur(U, output="complex")
    lam = np.diag(T)
    theta = np.angle(lam / np.abs(lam))
    sel = np.abs(theta) <= delta
    Zs = Z[:, sel]
    lhs = float(np.linalg.norm(Zs @ (Zs.conj().T @ (P2 @ w))))
    rhs = float(delta / 2 * np.linalg.norm(w))
    return lhs, rhs, lhs <= rhs + 1e-9
