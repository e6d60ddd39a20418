"""Exact Fourier analysis of Boolean functions f: {0,1}^n -> {+1, -1}.

Inputs are indexed by integers: bit j-1 of the index i is the value of x_j.
Subsets of [n] use the same bitmask encoding (element j <-> bit j-1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_ARITY = 24
DISTANCE_WORK_LIMIT = 10**8


def mask_of(elements: Iterable[int]) -> int:
    """Bitmask of a collection of 1-based elements."""
    m = 0
    for j in elements:
        if j < 1:
            raise ValueError(f"elements are 1-based, got {j}")
        m |= 1 << (j - 1)
    return m


def elements_of(mask: int) -> list[int]:
    """Sorted 1-based elements of a bitmask."""
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def popcounts(n: int) -> np.ndarray:
    """Hamming weights of 0..2^n-1."""
    w = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        w[1 << j:1 << (j + 1)] = w[:1 << j] + 1
    return w


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along axis 0 (returns a new array)."""
    a = np.array(values, dtype=np.result_type(np.asarray(values).dtype, float), copy=True)
    size = a.shape[0]
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < size:
        view = a.reshape(size // (2 * h), 2, h, *a.shape[1:])
        lo = view[:, 0].copy()
        view[:, 0] += view[:, 1]
        view[:, 1] = lo - view[:, 1]
        h *= 2
    return a


@dataclass(frozen=True)
class BooleanFunction:
    n: int
    table: np.ndarray

    def __post_init__(self):
        if not 0 <= self.n <= MAX_ARITY:
            raise ValueError(f"arity {self.n} outside [0, {MAX_ARITY}]")
        t = np.asarray(self.table)
        if t.shape != (1 << self.n,):
            raise ValueError(f"table must have length 2^{self.n}")
        if not np.all((t == 1) | (t == -1)):
            raise ValueError("table entries must be +1 or -1")
        t = t.astype(np.int8)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_callable(cls, n: int, fn) -> "BooleanFunction":
        """Build from fn(bits) where bits[j-1] = x_j; fn returns +-1."""
        vals = [fn(tuple((i >> j) & 1 for j in range(n))) for i in range(1 << n)]
        return cls(n, np.array(vals))

    @classmethod
    def from_bits(cls, n: int, bits: Sequence[int]) -> "BooleanFunction":
        """Build from 0/1 outputs b with f = (-1)^b."""
        b = np.asarray(bits, dtype=np.int64)
        return cls(n, 1 - 2 * b)

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def bits(self) -> np.ndarray:
        return ((1 - self.table.astype(np.int64)) // 2).astype(np.int8)

    def __eq__(self, other):
        return (isinstance(other, BooleanFunction) and self.n == other.n
                and np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))


@dataclass(frozen=True)
class FourierSpectrum:
    n: int
    coeffs: np.ndarray  # coeffs[S] = f^(S), S a bitmask

    def __getitem__(self, S: int) -> float:
        return float(self.coeffs[S])

    def weight(self) -> float:
        return float(np.sum(self.coeffs ** 2))

    def inverse(self) -> np.ndarray:
        """Values f(x) reconstructed from the coefficients."""
        return fwht(self.coeffs)


def constant(n: int, value: int = 1) -> BooleanFunction:
    return BooleanFunction(n, np.full(1 << n, value))


def parity(n: int, S: int | None = None) -> BooleanFunction:
    """The character chi_S; S defaults to [n]."""
    if S is None:
        S = (1 << n) - 1
    w = popcounts(n)[np.arange(1 << n) & S] if n else np.zeros(1, dtype=np.int64)
    return BooleanFunction(n, 1 - 2 * (w % 2))


def and_function(n: int) -> BooleanFunction:
    """AND in the +-1 convention: -1 only on the all-ones input."""
    t = np.ones(1 << n)
    t[-1] = -1
    return BooleanFunction(n, t)


def random_function(n: int, rng: np.random.Generator) -> BooleanFunction:
    return BooleanFunction(n, rng.choice(np.array([1, -1]), size=1 << n))


def fourier_transform(f: BooleanFunction) -> FourierSpectrum:
    coeffs = fwht(f.table.astype(float)) / (1 << f.n)
    coeffs.setflags(write=False)
    return FourierSpectrum(f.n, coeffs)


def _full(n: int) -> int:
    return (1 << n) - 1


def influence(f: BooleanFunction, S: int, spectrum: FourierSpectrum | None = None) -> float:
    """Fourier mass on sets meeting S."""
    if S & ~_full(f.n):
        raise ValueError("S is not a subset of [n]")
    spec = spectrum if spectrum is not None else fourier_transform(f)
    hits = (np.arange(1 << f.n) & S) != 0
    return float(np.sum(spec.coeffs[hits] ** 2))


def all_influences(f: BooleanFunction) -> np.ndarray:
    """Influence of every subset at once: result[S] = Inf_S(f)."""
    sq = fourier_transform(f).coeffs ** 2
    # sum of squares over T contained in a mask (zeta transform)
    sub = sq.copy()
    for j in range(f.n):
        bit = 1 << j
        view = sub.reshape(-1, 2, bit)
        view[:, 1] += view[:, 0]
    full = _full(f.n)
    return np.clip(sub[full] - sub[full ^ np.arange(1 << f.n)], 0.0, None)


def variable_influences(f: BooleanFunction) -> np.ndarray:
    """Inf_j for j = 1..n (index j-1)."""
    spec = fourier_transform(f)
    sq = spec.coeffs ** 2
    idx = np.arange(1 << f.n)
    return np.array([sq[(idx >> j) & 1 == 1].sum() for j in range(f.n)])


def disagreement_count(f: BooleanFunction, S: int) -> tuple[int, int]:
    """Exact (numerator, denominator) of Pr[f(x) != f(y)] where y resamples x on S."""
    n = f.n
    cube = f.table.reshape((2,) * n) if n else f.table
    axes = tuple(n - j for j in elements_of(S))
    size = 1 << popcount(S)
    if not axes:
        return 0, 1
    neg = np.sum(cube == -1, axis=axes, dtype=np.int64)
    pos = size - neg
    cosets = (1 << n) // size
    return int(np.sum(2 * pos * neg)), cosets * size * size


def resampling_influence(f: BooleanFunction, S: int) -> Fraction:
    """Twice the probability that resampling the S-coordinates changes f (exact)."""
    num, den = disagreement_count(f, S)
    return 2 * Fraction(num, den)


def influence_order(f: BooleanFunction) -> list[int]:
    """Variables sorted by non-increasing influence, smaller index first on ties."""
    inf = variable_influences(f)
    return sorted(range(1, f.n + 1), key=lambda j: (-round(inf[j - 1], 12), j))


def sub_influence(f: BooleanFunction, S: int, k: int, order: Sequence[int] | None = None,
                  cutoff: int | None = None) -> float:
    """Truncated influence: variables in the first `cutoff` positions of `order` get zero.

    For a later variable j, SubInf_j is the Fourier mass on sets T whose
    intersection with the order positions cutoff+1..pos(j) is exactly {j}.
    cutoff defaults to 200k.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if order is None:
        order = influence_order(f)
    if sorted(order) != list(range(1, f.n + 1)):
        raise ValueError("order must be a permutation of [n]")
    if cutoff is None:
        cutoff = 200 * k
    sq = fourier_transform(f).coeffs ** 2
    idx = np.arange(1 << f.n)
    total = 0.0
    window = 0
    for pos, j in enumerate(order):
        bit = 1 << (j - 1)
        if pos < cutoff:
            continue
        window |= bit
        if S & bit:
            total += sq[(idx & window) == bit].sum()
    return float(total)


def relevant_variables(f: BooleanFunction) -> int:
    """Bitmask of variables that f actually depends on (exact flip test)."""
    idx = np.arange(1 << f.n)
    out = 0
    for j in range(f.n):
        if np.any(f.table != f.table[idx ^ (1 << j)]):
            out |= 1 << j
    return out


def distance_to_k_junta(f: BooleanFunction, k: int) -> Fraction:
    """Exact normalized Hamming distance from f to the nearest k-junta."""
    n = f.n
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if math.comb(n, k) * (1 << n) > DISTANCE_WORK_LIMIT:
        raise ValueError("distance computation exceeds the work guard")
    cube = (f.table.reshape((2,) * n) == -1).astype(np.int64) if n else (f.table == -1).astype(np.int64)
    best = None
    for W in itertools.combinations(range(1, n + 1), k):
        free = tuple(n - j for j in range(1, n + 1) if j not in W)
        if free:
            neg = cube.sum(axis=free)
            size = 1 << len(free)
            cost = int(np.minimum(neg, size - neg).sum())
        else:
            cost = 0
        if best is None or cost < best:
            best = cost
            if cost == 0:
                break
    return Fraction(best, 1 << n)


def nearest_junta(f: BooleanFunction, W: Iterable[int]) -> BooleanFunction:
    """Majority-vote junta on the variables W (ties go to +1)."""
    n = f.n
    W = sorted(set(W))
    idx = np.arange(1 << n)
    key = np.zeros(1 << n, dtype=np.int64)
    for pos, j in enumerate(W):
        key |= ((idx >> (j - 1)) & 1) << pos
    neg = np.bincount(key, weights=(f.table == -1), minlength=1 << len(W))
    tot = np.bincount(key, minlength=1 << len(W))
    sign = np.where(neg * 2 > tot, -1, 1)
    return BooleanFunction(n, sign[key])


def read_truth_table(path: str | Path) -> BooleanFunction:
    lines = Path(path).read_text().split()
    if len(lines) < 2 or not lines[0].startswith("n="):
        raise ValueError("truth-table file must start with 'n=<int>' then the table line")
    n = int(lines[0][2:])
    body = lines[1]
    if len(body) != 1 << n or set(body) - {"0", "1"}:
        raise ValueError(f"table line must have 2^{n} characters from {{0,1}}")
    return BooleanFunction.from_bits(n, [int(c) for c in body])


def format_truth_table(f: BooleanFunction) -> str:
    return f"n={f.n}\n" + "".join("1" if v == -1 else "0" for v in f.table) + "\n"


def write_truth_table(f: BooleanFunction, path: str | Path) -> None:
    Path(path).write_text(format_truth_table(f))
