"""Oracles and function families used as test instances."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .boolfn import BooleanFunction, elements_of, mask_of, parity, popcount

SMALL, LARGE = "small", "large"
OVERRIDE_POLICIES = ("zeros", "ones", "seeded-random", "exact")
BLOCK_MODES = ("phase-faithful", "random-reflection", "random-unitary")


class IntersectionOracle:
    """Answers 1 iff the query set meets the hidden set A."""

    def __init__(self, n: int, A: int):
        if A >> n:
            raise ValueError("A is not a subset of [n]")
        self.n = n
        self.A = A
        self.queries = 0

    def __call__(self, S: int) -> int:
        self.queries += 1
        return int(S & self.A != 0)

    def clone(self) -> "IntersectionOracle":
        return IntersectionOracle(self.n, self.A)


def _hash_bit(seed: int, S: int) -> int:
    h = hashlib.blake2b(f"{seed}:{S}".encode(), digest_size=1).digest()
    return h[0] & 1


class RelaxedOracle:
    """Gap group-testing oracle: forced answers on one side, override elsewhere."""

    def __init__(self, n: int, k: int, d: int, side: str, A: int,
                 override: str = "zeros", seed: int = 0):
        if side not in (SMALL, LARGE):
            raise ValueError(f"side must be '{SMALL}' or '{LARGE}'")
        if override not in OVERRIDE_POLICIES:
            raise ValueError(f"unknown override policy {override!r}")
        if A >> n:
            raise ValueError("A is not a subset of [n]")
        want = k if side == SMALL else k + d
        if popcount(A) != want:
            raise ValueError(f"|A| = {popcount(A)} but the {side} side needs {want}")
        self.n, self.k, self.d = n, k, d
        self.side, self.A = side, A
        self.override, self.seed = override, seed
        self.queries = 0

    def forced(self, S: int) -> bool:
        """True when the promise fixes the answer on S."""
        hit = S & self.A != 0
        return (not hit) if self.side == SMALL else hit

    def override_value(self, S: int) -> int:
        if self.override == "zeros":
            return 0
        if self.override == "ones":
            return 1
        if self.override == "exact":
            return int(S & self.A != 0)
        return _hash_bit(self.seed, S)

    def value(self, S: int) -> int:
        """Oracle value without touching the query counter."""
        if self.forced(S):
            return 0 if self.side == SMALL else 1
        return self.override_value(S)

    def __call__(self, S: int) -> int:
        self.queries += 1
        return self.value(S)

    def clone(self) -> "RelaxedOracle":
        return RelaxedOracle(self.n, self.k, self.d, self.side, self.A, self.override, self.seed)

    def describe(self) -> dict:
        return {"n": self.n, "k": self.k, "d": self.d, "side": self.side,
                "A": elements_of(self.A), "override": self.override, "seed": self.seed}


def make_relaxed_oracle(n: int, k: int, d: int, side: str, A: int,
                        override_policy: str = "zeros", seed: int = 0) -> RelaxedOracle:
    return RelaxedOracle(n, k, d, side, A, override_policy, seed)


def haar_unitaries(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """A stack of independent Haar-random unitaries, shape (count, dim, dim)."""
    shape = (count, dim, dim)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitaries(1, dim, rng)[0]


def haar_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_reflection(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = haar_vector(dim, rng)
    return np.eye(dim) - 2 * np.outer(v, v.conj())


def random_reflections(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.eye(dim) - 2 * v[:, :, None] * v.conj()[:, None, :]


@dataclass
class BlockOracle:
    """Block-diagonal oracle: blocks[S] acts on the workspace of the S branch."""

    n: int
    blocks: np.ndarray  # shape (2^n, w, w)
    side: str | None = None
    A: int | None = None
    relevant: np.ndarray | None = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim != 3 or b.shape[0] != 1 << self.n or b.shape[1] != b.shape[2]:
            raise ValueError("blocks must have shape (2^n, w, w)")
        self.blocks = b

    @property
    def workspace(self) -> int:
        return self.blocks.shape[1]

    def unitarity_residual(self) -> float:
        w = self.workspace
        prod = np.einsum("sji,sjk->sik", self.blocks.conj(), self.blocks)
        return float(np.max(np.abs(prod - np.eye(w))))

    def reflection_residual(self) -> float:
        sq = np.einsum("sij,sjk->sik", self.blocks, self.blocks)
        return float(np.max(np.abs(sq - np.eye(self.workspace))))

    def promise_residual(self) -> float:
        """Largest violation of O_S|0> = +-|0> on the promised branches."""
        if self.side is None:
            return 0.0
        idx = np.arange(1 << self.n)
        hit = (idx & self.A) != 0
        target = np.zeros(self.workspace, dtype=complex)
        target[0] = 1
        if self.side == SMALL:
            rows, sign = ~hit, 1
        else:
            rows, sign = hit, -1
        cols = self.blocks[rows][:, :, 0]
        if cols.size == 0:
            return 0.0
        return float(np.max(np.abs(cols - sign * target)))

    def pad(self, n_new: int) -> "BlockOracle":
        """Extend the universe with dummy elements that the oracle ignores."""
        if n_new < self.n:
            raise ValueError("cannot shrink the universe")
        idx = np.arange(1 << n_new) & ((1 << self.n) - 1)
        rel = None if self.relevant is None else self.relevant[idx]
        return BlockOracle(n_new, self.blocks[idx], self.side, self.A, rel,
                           {**self.meta, "padded_from": self.n})


def make_block_oracle(relaxed: RelaxedOracle, irrelevant_mode: str = "phase-faithful",
                      seed: int = 0, workspace: int = 2) -> BlockOracle:
    """Quantum block oracle respecting the relaxed oracle's promise."""
    if irrelevant_mode not in BLOCK_MODES:
        raise ValueError(f"unknown mode {irrelevant_mode!r}")
    if workspace < 2:
        raise ValueError("workspace dimension must be at least 2")
    rng = np.random.default_rng(seed)
    n, w = relaxed.n, workspace
    size = 1 << n
    relevant = np.array([relaxed.forced(S) for S in range(size)], dtype=bool)
    if irrelevant_mode == "phase-faithful":
        signs = np.array([(-1) ** relaxed.value(S) for S in range(size)])
        blocks = signs[:, None, None] * np.eye(w, dtype=complex)
    else:
        sign = 1 if relaxed.side == SMALL else -1
        blocks = np.broadcast_to(np.eye(w, dtype=complex), (size, w, w)).copy()
        free = np.flatnonzero(~relevant)
        if irrelevant_mode == "random-reflection":
            blocks[free, :2, :2] = random_reflections(len(free), 2, rng)
        else:
            blocks[free] = haar_unitaries(len(free), w, rng)
        fixed = np.flatnonzero(relevant)
        blocks[fixed] *= sign
        if irrelevant_mode == "random-unitary" and w > 1:
            # the promise pins only the |0> column; the rest may rotate freely
            blocks[fixed, 1:, 1:] = sign * haar_unitaries(len(fixed), w - 1, rng)
    return BlockOracle(n, blocks, relaxed.side, relaxed.A, relevant,
                       {"mode": irrelevant_mode, "seed": seed, **relaxed.describe()})


def addressing_function(g: Sequence[int], n_addr: int | None = None) -> BooleanFunction:
    """f(y z) = (-1)^{y_{g(z)}}: y is the low block of n_addr bits, z the high block.

    g lists the 1-based images of the addresses 1..m in order.
    """
    m = len(g)
    if m < 1 or m & (m - 1):
        raise ValueError("the number of addresses must be a power of two")
    if n_addr is None:
        n_addr = max(g)
    if min(g) < 1 or max(g) > n_addr:
        raise ValueError("images of g must lie in [n_addr]")
    b = m.bit_length() - 1
    n = n_addr + b
    idx = np.arange(1 << n)
    z = idx >> n_addr
    target = np.asarray(g)[z] - 1
    y_bit = (idx >> target) & 1
    return BooleanFunction(n, 1 - 2 * y_bit)


def random_k_junta(n: int, k: int, core: BooleanFunction, positions: Iterable[int]) -> BooleanFunction:
    positions = sorted(positions)
    if len(positions) != k or len(set(positions)) != k:
        raise ValueError("positions must be k distinct variables")
    if core.n != k:
        raise ValueError("core arity must equal k")
    if positions and (positions[0] < 1 or positions[-1] > n):
        raise ValueError("positions must lie in [n]")
    idx = np.arange(1 << n)
    key = np.zeros(1 << n, dtype=np.int64)
    for pos, j in enumerate(positions):
        key |= ((idx >> (j - 1)) & 1) << pos
    return BooleanFunction(n, core.table[key])


def parity_on(n: int, variables: Iterable[int]) -> BooleanFunction:
    return parity(n, mask_of(variables))
