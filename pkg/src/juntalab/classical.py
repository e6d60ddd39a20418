"""Randomized gap group testers and exact distribution distances."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.stats import binom

from .instances import LARGE, SMALL


@dataclass
class TesterReport:
    decision: str
    queries: int
    seed: int
    trials: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.decision not in (SMALL, LARGE):
            raise ValueError(f"decision must be '{SMALL}' or '{LARGE}'")
        if self.queries < 0:
            raise ValueError("queries must be non-negative")


def sampling_probability(k: int) -> float:
    # 1/k degenerates at k=1 (every sample is [n]), so use 1/2 there
    return 1.0 / max(k, 2)


def sampling_threshold(k: int, d: int) -> float:
    p = sampling_probability(k)
    return ((1 - (1 - p) ** k) + (1 - (1 - p) ** (k + d))) / 2


def default_repetitions(k: int, d: int) -> int:
    return math.ceil(48 * (1 + (k / d) ** 2))


def _random_subset(n: int, p: float, rng: np.random.Generator) -> int:
    picks = np.flatnonzero(rng.random(n) < p)
    return int(sum(1 << int(j) for j in picks))


def sampling_tester(oracle, k: int, d: int, repetitions: int | None = None, seed: int = 0) -> TesterReport:
    """Count how often a random set meets A and compare with the midpoint threshold."""
    if k < 1 or d < 1:
        raise ValueError("need k, d >= 1")
    reps = default_repetitions(k, d) if repetitions is None else repetitions
    if reps < 1:
        raise ValueError("repetitions must be positive")
    rng = np.random.default_rng(seed)
    p = sampling_probability(k)
    hits = sum(oracle(_random_subset(oracle.n, p, rng)) for _ in range(reps))
    freq = hits / reps
    thr = sampling_threshold(k, d)
    return TesterReport(LARGE if freq > thr else SMALL, reps, seed,
                        {"repetitions": reps, "frequency": freq, "threshold": thr, "p": p})


def split_budget(k: int) -> int:
    return math.ceil(10 * math.log2(max(k, 2)))


def partition_query_budget(k: int) -> int:
    # at most 2k steps, each with budget attempts of two queries, plus the first query
    return 4 * k * split_budget(k) + 1


def partition_tester(oracle, k: int, seed: int = 0) -> TesterReport:
    """Refine a partition of sets with f = 1 by random halving; more than k parts means large."""
    if k < 1:
        raise ValueError("need k >= 1")
    rng = np.random.default_rng(seed)
    n = oracle.n
    full = (1 << n) - 1
    queries = 1
    if not oracle(full):
        return TesterReport(SMALL, queries, seed, {"parts": 0, "steps": 0})
    budget = split_budget(k)
    active, inactive = [full], []
    steps = 0
    while active:
        S = active.pop()
        steps += 1
        elems = np.array([j for j in range(n) if S >> j & 1])
        for _ in range(budget):
            side = rng.random(len(elems)) < 0.5
            S1 = int(sum(1 << int(j) for j in elems[side]))
            S2 = S ^ S1
            a, b = oracle(S1), oracle(S2)
            queries += 2
            if a and b:
                active += [S1, S2]
                break
        else:
            inactive.append(S)
        if len(active) + len(inactive) > k:
            return TesterReport(LARGE, queries, seed,
                                {"parts": len(active) + len(inactive), "steps": steps})
    return TesterReport(SMALL, queries, seed, {"parts": len(inactive), "steps": steps})


def _trial(args):
    tester, factory, k, d, seed = args
    oracle = factory(seed)
    if tester == "sampling":
        return sampling_tester(oracle, k, d, seed=seed)
    return partition_tester(oracle, k, seed=seed)


def run_trials(tester: str, factory: Callable, k: int, d: int, seeds, workers: int = 1) -> list[TesterReport]:
    """Independent trials in seed order; results do not depend on the worker count.

    factory(seed) must return a fresh oracle, and must be picklable when workers > 1.
    """
    if tester not in ("sampling", "partition"):
        raise ValueError("tester must be 'sampling' or 'partition'")
    jobs = [(tester, factory, k, d, int(s)) for s in seeds]
    if workers <= 1:
        return [_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def error_summary(reports: list[TesterReport], truth: str) -> dict:
    q = [r.queries for r in reports]
    wrong = sum(r.decision != truth for r in reports)
    return {"trials": len(reports), "error_rate": wrong / len(reports) if reports else 0.0,
            "queries": {"mean": float(np.mean(q)) if q else 0.0, "max": max(q, default=0)}}


def hypergeom_pmf(n: int, K: int, m: int) -> list[Fraction]:
    total = math.comb(n, m)
    return [Fraction(math.comb(K, i) * math.comb(n - K, m - i), total) for i in range(m + 1)]


def hypergeom_tv(n: int, k: int, d: int, m: int) -> Fraction:
    """Exact total variation between the overlap counts of a random m-set with sets of size k and k+d."""
    if min(n, k, d, m) < 0 or k + d > n or m > n:
        raise ValueError("need 0 <= k, d, m and k+d <= n, m <= n")
    p, q = hypergeom_pmf(n, k, m), hypergeom_pmf(n, k + d, m)
    return sum((abs(a - b) for a, b in zip(p, q)), Fraction(0)) / 2


def binom_tv_kolmogorov(k: int, d: int, p: float) -> tuple[float, float]:
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if k < 1 or d < 1:
        raise ValueError("need k, d >= 1")
    support = np.arange(k + d + 1)
    small, large = binom.pmf(support, k, p), binom.pmf(support, k + d, p)
    tv = 0.5 * float(np.sum(np.abs(small - large)))
    # upper tails P[X >= l], summed from the top
    tail_s = np.cumsum(small[::-1])[::-1]
    tail_l = np.cumsum(large[::-1])[::-1]
    return tv, float(np.max(np.abs(tail_l - tail_s)))


def lower_bound_sample_size(n: int, k: int, d: int) -> int:
    return math.floor(min(n / 4, n * (k + d) / d ** 2))
