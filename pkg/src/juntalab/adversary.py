"""Dual adversary solutions: gap group testing, AND, preprocessing and composition."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .boolfn import popcount, popcounts

PSD_TOL = 1e-9
_PATTERN = np.array([[1, 0, 0, 1],
                     [0, 1, 1, 0],
                     [0, 1, 1, 0],
                     [1, 0, 0, 1]], dtype=float)


def T_sum(a: int, b: int) -> Fraction:
    """sum_{i=0}^{a} C(a,i)/C(b,i), which equals (b+1)/(b-a+1)."""
    if not 0 <= a <= b:
        raise ValueError("need 0 <= a <= b")
    return sum((Fraction(math.comb(a, i), math.comb(b, i)) for i in range(a + 1)), Fraction(0))


def T_closed(a: int, b: int) -> Fraction:
    return Fraction(b + 1, b - a + 1)


@dataclass(frozen=True)
class GgtSolution:
    n: int
    k: int
    d: int
    alpha: np.ndarray  # alpha[s-1] for s = 1..n-k-d+1
    beta: np.ndarray
    W: float

    @property
    def smax(self) -> int:
        return self.n - self.k - self.d + 1

    def coefficient(self, s: int, large: bool) -> float:
        if 1 <= s <= self.smax:
            return float((self.beta if large else self.alpha)[s - 1])
        return 0.0

    def psi(self, A: int) -> np.ndarray:
        """psi_S[A] for every S (the vector whose outer products give X_S entries)."""
        n = self.n
        size = popcount(A)
        idx = np.arange(1 << n)
        w = popcounts(n)
        coeff = np.zeros(n + 2)
        if size == self.k:
            coeff[1:self.smax + 1] = self.alpha
            mask = (idx & A) == 0
        elif size == self.k + self.d:
            coeff[1:self.smax + 1] = self.beta
            mask = popcounts(n)[idx & A] == 1
        else:
            raise ValueError("A must have size k or k+d")
        return np.where(mask, coeff[w], 0.0)

    def domain(self) -> list[int]:
        return [A for A in range(1 << self.n) if popcount(A) in (self.k, self.k + self.d)]

    def diagonal(self, A: int) -> float:
        return float(np.sum(self.psi(A) ** 2))

    def to_generic(self) -> "GenericSolution":
        """Explicit solution over the variables S (all subsets); inputs are the strings Intersects_A."""
        dom = self.domain()
        idx = np.arange(1 << self.n)
        inputs = [tuple(((idx & A) != 0).astype(int)) for A in dom]
        values = [int(popcount(A) == self.k + self.d) for A in dom]
        psis = np.array([self.psi(A) for A in dom])  # (D, nvars)
        X = np.einsum("aj,bj->jab", psis, psis)
        return GenericSolution(inputs, values, X)


def build_ggt_solution(n: int, k: int, d: int) -> GgtSolution:
    if k < 1 or d < 1 or n < k + d:
        raise ValueError("need k, d >= 1 and n >= k + d")
    smax = n - k - d + 1
    alpha, beta = np.zeros(smax), np.zeros(smax)
    W = 0.0
    for s in range(1, smax + 1):
        P = 1.0 / ((n - k) * math.comb(n - k - 1, s - 1))
        A = math.comb(n - k, s)
        B = (k + d) * math.comb(n - k - d, s - 1)
        alpha[s - 1] = math.sqrt(P * math.sqrt(B / A))
        beta[s - 1] = math.sqrt(P * math.sqrt(A / B))
        W += A * alpha[s - 1] ** 2
    alpha.setflags(write=False)
    beta.setflags(write=False)
    return GgtSolution(n, k, d, alpha, beta, W)


def pair_sum(sol: GgtSolution, l: int) -> float:
    """sum_S X_S[A,B] for |B minus A| = l, via the count l*C(n-k-l, s-1)."""
    n, k = sol.n, sol.k
    return sum(sol.alpha[s - 1] * sol.beta[s - 1] * l * math.comb(n - k - l, s - 1)
               for s in range(1, sol.smax + 1))


def feasibility_residual(sol: GgtSolution) -> float:
    n, k, d = sol.n, sol.k, sol.d
    ls = range(d, min(k + d, n - k) + 1)
    return max(abs(pair_sum(sol, l) - 1.0) for l in ls)


def literal_feasibility_residual(sol: GgtSolution) -> float:
    """Same residual by summing psi_S[A] psi_S[B] over every S and every pair (A, B)."""
    dom = sol.domain()
    small = [A for A in dom if popcount(A) == sol.k]
    large = [B for B in dom if popcount(B) == sol.k + sol.d]
    ps = {A: sol.psi(A) for A in dom}
    worst = 0.0
    for A in small:
        for B in large:
            worst = max(worst, abs(float(ps[A] @ ps[B]) - 1.0))
    return worst


def irrelevant_sets(sol: GgtSolution, A: int) -> np.ndarray:
    """Mask over S of the variables irrelevant for input A (zero diagonal)."""
    return sol.psi(A) == 0


@dataclass
class GenericSolution:
    """Adversary solution with explicit matrices X[j] over a finite domain."""

    inputs: list[tuple[int, ...]]
    values: list[int]
    X: np.ndarray  # (nvars, D, D)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        D = len(self.inputs)
        if self.X.shape[1:] != (D, D) or len(self.values) != D:
            raise ValueError("matrix shape does not match the domain")
        if any(len(x) != self.X.shape[0] for x in self.inputs):
            raise ValueError("input length must equal the number of variables")

    @property
    def nvars(self) -> int:
        return self.X.shape[0]

    def _bits(self) -> np.ndarray:
        return np.array(self.inputs, dtype=np.int8).reshape(len(self.inputs), self.nvars)

    def _differ_pairs(self):
        v = np.array(self.values)
        return v[:, None] != v[None, :]

    def objective(self) -> float:
        diag = np.einsum("jaa->a", self.X)
        return float(diag.max())

    def feasibility_residual(self) -> float:
        bits = self._bits()
        diff = (bits[:, None, :] != bits[None, :, :])  # (D, D, nvars)
        sums = np.einsum("abj,jab->ab", diff, self.X)
        mask = self._differ_pairs()
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(sums[mask] - 1.0)))

    def new_condition_residual(self) -> float:
        """Violation of: X_j[x,y] = 0 when x_j = y_j, and sum_j X_j[x,y] = 1, for F(x) != F(y)."""
        bits = self._bits()
        same = (bits[:, None, :] == bits[None, :, :])
        mask = self._differ_pairs()
        if not mask.any():
            return 0.0
        leak = np.abs(np.einsum("abj,jab->ab", same, np.abs(self.X)))[mask].max()
        total = np.abs(self.X.sum(axis=0)[mask] - 1.0).max()
        return float(max(leak, total))

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(Xj).min() for Xj in self.X))

    def relevant(self, a: int, tol: float = 1e-12) -> set[int]:
        return {j for j in range(self.nvars) if abs(self.X[j, a, a]) > tol}

    def irrelevance_consistent(self, tol: float = 1e-12) -> bool:
        """Every pair with different values shares a relevant, differing variable."""
        bits = self._bits()
        diag = np.abs(np.einsum("jaa->ja", self.X)) > tol
        v = self.values
        for a, b in itertools.combinations(range(len(self.inputs)), 2):
            if v[a] == v[b]:
                continue
            if not np.any(diag[:, a] & diag[:, b] & (bits[a] != bits[b])):
                return False
        return True


def and_example_solution(n: int) -> GenericSolution:
    """Solution for AND on inputs of weight >= n-1, objective sqrt(n)."""
    if n < 1:
        raise ValueError("n must be positive")
    ones = tuple([1] * n)
    inputs = [ones] + [tuple(0 if i == j else 1 for i in range(n)) for j in range(n)]
    values = [1] + [0] * n
    D = len(inputs)
    X = np.zeros((n, D, D))
    for j in range(n):
        psi = np.zeros(D)
        psi[0] = n ** -0.25
        psi[1 + j] = n ** 0.25
        X[j] = np.outer(psi, psi)
    return GenericSolution(inputs, values, X, {"function": "AND", "n": n})


def identity_bit_solution() -> GenericSolution:
    """Trivial solution for the 1-bit identity G(x) = x."""
    return GenericSolution([(0,), (1,)], [0, 1], np.ones((1, 2, 2)), {"function": "identity"})


def normalize_condition(sol: GenericSolution) -> GenericSolution:
    """Zero out same-coordinate entries via a Hadamard product with a PSD pattern."""
    if sol.feasibility_residual() > 1e-9:
        raise ValueError("input solution is not feasible")
    bits = sol._bits()
    vals = np.array(sol.values)
    X = np.empty_like(sol.X)
    for j in range(sol.nvars):
        g = 2 * vals + bits[:, j]
        X[j] = sol.X[j] * _PATTERN[np.ix_(g, g)]
    return GenericSolution(list(sol.inputs), list(sol.values), X, {**sol.meta, "normalized": True})


def compose_solutions(F_sol: GenericSolution, G_sols: Sequence[GenericSolution],
                      row_limit: int = 10**6) -> GenericSolution:
    """Solution for F(G_1(x_1), ..., G_n(x_n)) on the irrelevant-variable composed domain."""
    if len(G_sols) != F_sol.nvars:
        raise ValueError("need one inner solution per outer variable")
    if F_sol.new_condition_residual() > 1e-9:
        raise ValueError("outer solution must satisfy the strengthened condition; normalize it first")
    widths = [G.nvars for G in G_sols]
    if math.prod(1 << w for w in widths) > row_limit:
        raise ValueError("composed domain too large to enumerate")
    inner_index = [{x: i for i, x in enumerate(G.inputs)} for G in G_sols]
    relevant = [F_sol.relevant(a) for a in range(len(F_sol.inputs))]
    rows, zs = [], []
    for parts in itertools.product(*[itertools.product((0, 1), repeat=w) for w in widths]):
        for a, z in enumerate(F_sol.inputs):
            ok = True
            for j in relevant[a]:
                i = inner_index[j].get(parts[j])
                if i is None or G_sols[j].values[i] != z[j]:
                    ok = False
                    break
            if ok:
                rows.append(parts)
                zs.append(a)
                break
    D = len(rows)
    zs = np.array(zs)
    blocks = []
    for j, G in enumerate(G_sols):
        pos = np.array([inner_index[j].get(r[j], -1) for r in rows])
        valid = pos >= 0
        outer = F_sol.X[j][np.ix_(zs, zs)]
        for i in range(G.nvars):
            inner = np.zeros((D, D))
            sel = np.ix_(valid, valid)
            inner[sel] = G.X[i][np.ix_(pos[valid], pos[valid])]
            blocks.append(outer * inner)
    inputs = [tuple(b for part in r for b in part) for r in rows]
    values = [F_sol.values[a] for a in zs]
    return GenericSolution(inputs, values, np.array(blocks),
                           {"composed": True, "outer_rows": zs.tolist()})


def unweighted_adversary_value(inputs: dict, relation: Sequence[tuple]) -> float:
    """sqrt(m m' / (l l')) for a relation between two input sets.

    inputs maps a label to its bit string; relation lists (x_label, y_label).
    """
    if not relation:
        raise ValueError("relation must be non-empty")
    xs = sorted({x for x, _ in relation}, key=str)
    ys = sorted({y for _, y in relation}, key=str)
    m = min(sum(1 for x2, _ in relation if x2 == x) for x in xs)
    mp = min(sum(1 for _, y2 in relation if y2 == y) for y in ys)
    nv = len(next(iter(inputs.values())))
    l = lp = 0
    for x in xs:
        partners = [inputs[y] for x2, y in relation if x2 == x]
        for j in range(nv):
            l = max(l, sum(1 for y in partners if y[j] != inputs[x][j]))
    for y in ys:
        partners = [inputs[x] for x, y2 in relation if y2 == y]
        for j in range(nv):
            lp = max(lp, sum(1 for x in partners if x[j] != inputs[y][j]))
    if l == 0 or lp == 0:
        raise ValueError("related inputs must differ somewhere")
    return math.sqrt(m * mp / (l * lp))


def ggt_relation(n: int, k: int):
    """All k-subsets related to the full set [n], as Intersects_A strings over all S."""
    idx = np.arange(1 << n)
    full = (1 << n) - 1
    inputs = {full: tuple(((idx & full) != 0).astype(int))}
    rel = []
    for c in itertools.combinations(range(n), k):
        A = sum(1 << j for j in c)
        inputs[A] = tuple(((idx & A) != 0).astype(int))
        rel.append((full, A))
    return inputs, rel
