"""Fourier transform over the subset module M^n = span{|S> : S subset of [n]}.

The Fourier basis is indexed by triples (t, l, x): t labels the two-row
irreducible (n-t, t), l the level |S| = l, and x is a Gelfand-Tsetlin string
of length n stored as an integer (bit m-1 <-> position m). Position m records
the branching choice at stage m, 1 meaning t was incremented there.

Canonical ordering of the triples: by t, then l, then x as an integer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

MAX_MATRIX_N = 12


def is_valid_string(x: int, n: int, t: int) -> bool:
    if x >> n or bin(x).count("1") != t:
        return False
    ones = 0
    for m in range(1, n + 1):
        ones += (x >> (m - 1)) & 1
        if 2 * ones > m:
            return False
    return True


@lru_cache(maxsize=None)
def valid_strings(n: int, t: int) -> tuple[int, ...]:
    """All Gelfand-Tsetlin strings for shape (n-t, t), ascending as integers."""
    if t < 0 or 2 * t > n:
        return ()
    out = []
    # grow strings position by position, keeping the prefix condition
    frontier = [(0, 0)]  # (value, ones)
    for m in range(1, n + 1):
        nxt = []
        for val, ones in frontier:
            nxt.append((val, ones))
            if 2 * (ones + 1) <= m and ones < t:
                nxt.append((val | (1 << (m - 1)), ones + 1))
        frontier = nxt
    out = sorted(v for v, ones in frontier if ones == t)
    return tuple(out)


def specht_dimension(n: int, t: int) -> int:
    if t < 0 or 2 * t > n:
        return 0
    return math.comb(n, t) - (math.comb(n, t - 1) if t >= 1 else 0)


def string_repr(x: int, n: int) -> str:
    """Position 1 first, e.g. '01' means the bit at position 2 is set."""
    return "".join(str((x >> m) & 1) for m in range(n))


def string_value(s: str) -> int:
    return sum(1 << m for m, c in enumerate(s) if c == "1")


@dataclass(frozen=True)
class FourierIndex:
    """Enumeration of the Fourier-basis triples of M^n in canonical order."""

    n: int

    @property
    def keys(self) -> list[tuple[int, int, int]]:
        return _keys(self.n)

    def position(self, t: int, l: int, x: int) -> int:
        return _positions(self.n)[(t, l, x)]

    def block(self, t: int) -> tuple[int, int, int]:
        """(offset, number of levels, number of strings) of the t block."""
        return _blocks(self.n)[t]

    @property
    def tmax(self) -> int:
        return self.n // 2


@lru_cache(maxsize=None)
def _keys(n: int) -> list[tuple[int, int, int]]:
    return [(t, l, x) for t in range(n // 2 + 1) for l in range(t, n - t + 1)
            for x in valid_strings(n, t)]


@lru_cache(maxsize=None)
def _positions(n: int) -> dict:
    return {key: i for i, key in enumerate(_keys(n))}


@lru_cache(maxsize=None)
def _blocks(n: int) -> dict:
    out = {}
    offset = 0
    for t in range(n // 2 + 1):
        nl, nx = n - 2 * t + 1, len(valid_strings(n, t))
        out[t] = (offset, nl, nx)
        offset += nl * nx
    return out


def specht_vector(n: int, l: int, t: int, a: Sequence[int], b: Sequence[int]) -> np.ndarray:
    """({a1}-{b1}) x ... x ({at}-{bt}) x (sum of (l-t)-subsets of the rest), as a 2^n vector."""
    a, b = list(a), list(b)
    if len(a) != t or len(b) != t:
        raise ValueError("a and b must each have t elements")
    used = a + b
    if len(set(used)) != 2 * t:
        raise ValueError("a and b must be disjoint sequences of distinct elements")
    if any(j < 1 or j > n for j in used):
        raise ValueError("elements must lie in [n]")
    if not 0 <= t <= min(l, n - l):
        raise ValueError("need t <= min(l, n-l)")
    rest = [j for j in range(1, n + 1) if j not in used]
    vec = np.zeros(1 << n)
    tails = [sum(1 << (j - 1) for j in c) for c in itertools.combinations(rest, l - t)]
    for choice in itertools.product((0, 1), repeat=t):
        head = 0
        for i, c in enumerate(choice):
            head |= 1 << ((b[i] if c else a[i]) - 1)
        sign = -1 if sum(choice) % 2 else 1
        for tail in tails:
            vec[head | tail] += sign
    return vec


def pairings(n: int, t: int):
    """All sets of t disjoint pairs (a_i < b_i) from [n], with a_1 < a_2 < ..."""
    def rec(avail, left):
        if left == 0:
            yield []
            return
        for i, x in enumerate(avail):
            if len(avail) - i < 2 * left:
                break
            rest = avail[i + 1:]
            for y in rest:
                remaining = [z for z in rest if z != y]
                for tail in rec(remaining, left - 1):
                    yield [(x, y)] + tail
    yield from rec(list(range(1, n + 1)), t)


@lru_cache(maxsize=None)
def specht_span(n: int, l: int, t: int) -> np.ndarray:
    """Orthonormal basis (2^n x dim) of S_l(t), from all Specht vectors by SVD."""
    vecs = [specht_vector(n, l, t, [p[0] for p in pr], [p[1] for p in pr]) for pr in pairings(n, t)]
    mat = np.array(vecs).T
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > 1e-9 * s[0]))
    return u[:, :rank]


@lru_cache(maxsize=None)
def _gt_basis(n: int) -> dict:
    if n == 0:
        return {(0, 0, 0): np.ones(1)}
    prev = _gt_basis(n - 1)
    half = 1 << (n - 1)
    out = {}

    def lift(v, add):
        w = np.zeros(2 * half)
        if add:
            w[half:] = v
        else:
            w[:half] = v
        return w

    for t in range(n // 2 + 1):
        for l in range(t, n - t + 1):
            for x in valid_strings(n, t):
                last = (x >> (n - 1)) & 1
                xp = x & (half - 1)
                t0 = t - last
                D = n - 2 * t0
                c_stay = math.sqrt((n - l - t0) / D)
                c_move = math.sqrt((l - t0) / D)
                v = np.zeros(2 * half)
                if last == 0:
                    if c_stay:
                        v += c_stay * lift(prev[(t0, l, xp)], False)
                    if c_move:
                        v += c_move * lift(prev[(t0, l - 1, xp)], True)
                else:
                    if c_move:
                        v += c_move * lift(prev[(t0, l, xp)], False)
                    if c_stay:
                        v -= c_stay * lift(prev[(t0, l - 1, xp)], True)
                out[(t, l, x)] = v
    return out


def gt_basis(n: int) -> dict[tuple[int, int, int], np.ndarray]:
    """Explicit Fourier basis vectors e^n_l(t, x), keyed by (t, l, x), built by the branching recursion."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return dict(_gt_basis(n))


@dataclass(frozen=True)
class _Plan:
    n: int
    stages: tuple  # forward sparse maps, applied in order
    stages_t: tuple


@lru_cache(maxsize=None)
def _plan(n: int) -> _Plan:
    """Sparse stage maps of the streaming transform.

    Stage m consumes the last string bit (position m), undoes the t increment,
    applies the conditioned 2x2 rotation, and emits output element m.
    """
    keys = [(t, l, x, 0) for (t, l, x) in _keys(n)]
    stages = []
    for m in range(n, 0, -1):
        top = 1 << (m - 1)
        out_index: dict = {}
        rows, cols, vals = [], [], []
        for i, (t, l, x, a) in enumerate(keys):
            b = 1 if x & top else 0
            xp = x & ~top
            t0 = t - b
            D = m - 2 * t0
            c_stay = math.sqrt((m - l - t0) / D)
            c_move = math.sqrt((l - t0) / D)
            if b == 0:
                terms = ((0, c_stay), (1, c_move))
            else:
                terms = ((0, c_move), (1, -c_stay))
            for bit, c in terms:
                if c == 0:
                    continue
                key = (t0, l - bit, xp, a | (top if bit else 0))
                j = out_index.setdefault(key, len(out_index))
                rows.append(j)
                cols.append(i)
                vals.append(c)
        new_keys = list(out_index)
        if m == 1:
            # final stage: order outputs by the subset bitmask
            perm = np.array([k[3] for k in new_keys])
            rows = list(perm[np.array(rows)])
            new_keys = [None] * len(new_keys)
        size = 1 << n
        mat = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
        stages.append(mat)
        keys = new_keys
    if n == 0:
        stages.append(sp.identity(1, format="csr"))
    return _Plan(n, tuple(stages), tuple(s.T.tocsr() for s in stages))


def qft_forward(vec: np.ndarray, n: int) -> np.ndarray:
    """Fourier-basis coordinates (canonical order) -> subset-basis coordinates.

    Accepts a vector of length 2^n or a matrix whose columns are such vectors.
    """
    v = np.asarray(vec)
    if v.shape[0] != 1 << n:
        raise ValueError("length must be 2^n")
    for stage in _plan(n).stages:
        v = stage @ v
    return v


def qft_inverse(vec: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(vec)
    if v.shape[0] != 1 << n:
        raise ValueError("length must be 2^n")
    for stage in reversed(_plan(n).stages_t):
        v = stage @ v
    return v


def qft_apply(state, n: int, direction: str = "forward"):
    """Streaming transform on a sparse state.

    forward: state maps (t, l, x) -> amplitude; returns the 2^n subset-basis vector.
    inverse: state is a 2^n vector (or a map S -> amplitude); returns a map (t, l, x) -> amplitude.
    """
    if direction == "forward":
        if isinstance(state, Mapping):
            pos = _positions(n)
            vec = np.zeros(1 << n, dtype=complex)
            for key, amp in state.items():
                if key not in pos:
                    raise ValueError(f"{key} is not a valid (t, l, x) triple for n={n}")
                vec[pos[key]] += amp
        else:
            vec = np.asarray(state)
        return qft_forward(vec, n)
    if direction == "inverse":
        if isinstance(state, Mapping):
            vec = np.zeros(1 << n, dtype=complex)
            for S, amp in state.items():
                if not 0 <= S < 1 << n:
                    raise ValueError(f"{S} is not a subset of [{n}]")
                vec[S] += amp
        else:
            vec = np.asarray(state)
        out = qft_inverse(vec, n)
        return {key: out[i] for i, key in enumerate(_keys(n)) if out[i] != 0}
    raise ValueError("direction must be 'forward' or 'inverse'")


def qft_matrix(n: int) -> np.ndarray:
    """Explicit unitary whose columns are the transform of the canonical basis inputs."""
    if n > MAX_MATRIX_N:
        raise ValueError(f"n must be at most {MAX_MATRIX_N}")
    return qft_forward(np.eye(1 << n), n)


def unitarity_residual(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))))


def recursion_residual(n: int) -> float:
    """Largest deviation of the transform's columns at n from the branching rule applied to those at n-1."""
    if not 1 <= n <= MAX_MATRIX_N:
        raise ValueError(f"n must lie in [1, {MAX_MATRIX_N}]")
    F, G = qft_matrix(n), qft_matrix(n - 1)
    pos_n, pos_p = _positions(n), _positions(n - 1)
    half = 1 << (n - 1)
    worst = 0.0
    for (t, l, x), i in pos_n.items():
        b = (x >> (n - 1)) & 1
        xp = x & (half - 1)
        t0 = t - b
        D = n - 2 * t0
        stay, move = math.sqrt((n - l - t0) / D), math.sqrt((l - t0) / D)
        lo = pos_p.get((t0, l, xp))
        hi = pos_p.get((t0, l - 1, xp))
        low = G[:, lo] if lo is not None else np.zeros(half)
        high = G[:, hi] if hi is not None else np.zeros(half)
        if b == 0:
            want = np.concatenate([stay * low, move * high])
        else:
            want = np.concatenate([move * low, -stay * high])
        worst = max(worst, float(np.max(np.abs(F[:, i] - want))))
    return worst


def specht_residual(n: int) -> float:
    """Largest distance of a transform column from its brute-force Specht span S_l(t)."""
    F = qft_matrix(n)
    worst = 0.0
    for (t, l, x), i in _positions(n).items():
        B = specht_span(n, l, t)
        v = F[:, i]
        worst = max(worst, float(np.linalg.norm(v - B @ (B.T @ v))))
    return worst
