"""Quantum junta tester built from influence testing and the gap group tester."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from .boolfn import (DISTANCE_WORK_LIMIT, BooleanFunction, all_influences, distance_to_k_junta, fwht,
                     popcount, popcounts, relevant_variables, variable_influences)
from .instances import LARGE, SMALL, BlockOracle, random_reflections
from .qcore import FunctionOp, amplified_probability, amplitude_amplify, success_probability
from .qggt import QggtConfig, qggt_run

ATTEMPTS = 9
NONE = "none"


def influence_rounds(delta: float) -> int:
    """Upper end M of the round schedule: ceil((pi/4) / asin sqrt(delta/2))."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    return math.ceil((math.pi / 4) / math.asin(math.sqrt(delta / 2)))


def scheduled_probability(p: float, M: int, attempts: int = ATTEMPTS) -> float:
    """Acceptance of `attempts` runs, each with a uniform round count in [0, M)."""
    if p <= 0:
        return 0.0
    q = sum(amplified_probability(p, r) for r in range(M)) / M
    return 1.0 - (1.0 - q) ** attempts


@dataclass
class InfluenceTest:
    f: BooleanFunction
    V: int
    delta: float
    influence: float
    rounds: int  # M
    attempts: int
    acceptance_probability: float

    @property
    def base_probability(self) -> float:
        return self.influence / 2

    @property
    def queries(self) -> int:
        # each application of the sampler evaluates f twice; A and A^-1 per round
        return self.attempts * 2 * (2 * (self.rounds - 1) + 1)

    def circuit(self, rounds: int):
        """Sampler plus `rounds` Grover iterates, with the marked mask, on x (n bits) and r (|V| bits)."""
        n, v = self.f.n, popcount(self.V)
        if n + v > 20:
            raise ValueError("circuit too large to simulate")
        dim = 1 << (n + v)
        norm = math.sqrt(dim)

        def had(vec):
            return fwht(vec) / norm

        A = FunctionOp(dim, had, had)
        return amplitude_amplify(A, resample_marks(self.f, self.V), rounds)


def resample_marks(f: BooleanFunction, V: int) -> np.ndarray:
    """Mask over (r, x) pairs, index r * 2^n + x, true where f(x) != f(y) for y = x with V set to r."""
    n = f.n
    vbits = [j for j in range(n) if V >> j & 1]
    x = np.arange(1 << n)
    out = []
    for r in range(1 << len(vbits)):
        y = x & ~V
        for i, j in enumerate(vbits):
            y |= ((r >> i) & 1) << j
        out.append(f.table[x] != f.table[y])
    return np.concatenate(out)


def influence_tester(f: BooleanFunction, V: int, delta: float, influence: float | None = None,
                     attempts: int = ATTEMPTS) -> InfluenceTest:
    """Accepts with probability >= 0.9 when Inf_V >= delta and never when Inf_V = 0."""
    if V >> f.n:
        raise ValueError("V is not a subset of [n]")
    if influence is None:
        influence = float(all_influences(f)[V])
    if V & relevant_variables(f) == 0:
        influence = 0.0
    M = influence_rounds(delta)
    return InfluenceTest(f, V, delta, influence, M, attempts,
                         scheduled_probability(influence / 2, M, attempts))


def majority_probability(p: float, copies: int) -> float:
    """P[more than half of `copies` independent runs accept]."""
    if p <= 0:
        return 0.0
    return float(binom.sf(copies // 2, copies, p))


def first_kind_delta(eps: float, k: int, l: int) -> float:
    return eps / (2 ** (l + 3) * math.log2(400 * k))


def max_level(k: int) -> int:
    return int(math.floor(math.log2(200 * k)))


def error_reduction_copies(k: int, eps: float) -> int:
    c = math.ceil(10 * math.log(k / eps))
    # odd, so the majority is never tied
    return max(c + (c % 2 == 0), 1)


@dataclass(frozen=True)
class JuntaConfig:
    qggt: QggtConfig = field(default_factory=QggtConfig)
    copies: int | None = None  # error-reduction copies in the compressed mode
    repetitions: int = 3  # majority over whole subtester runs
    trials: int = 200  # second-kind Monte Carlo fallback
    enumerate_limit: int = 20
    cutoff_factor: int = 200


def _three_way(inf: np.ndarray, delta: float, relevant: int):
    idx = np.arange(inf.shape[0])
    zero = (idx & relevant) == 0
    big = ~zero & (inf >= delta * (1 - 1e-12))
    return zero, big


def promise_side(f: BooleanFunction, k: int, d: int, delta: float) -> str:
    """Which side of the gap promise the ideal oracle lands on, if any."""
    if popcount(relevant_variables(f)) <= k:
        return SMALL
    if int(np.sum(variable_influences(f) >= delta * (1 - 1e-12))) >= k + d:
        return LARGE
    return NONE


def ideal_oracle(f: BooleanFunction, delta: float, seed: int = 0, inf: np.ndarray | None = None) -> BlockOracle:
    """-I where Inf_S >= delta, +I where Inf_S = 0, a random reflection in between."""
    inf = all_influences(f) if inf is None else inf
    zero, big = _three_way(inf, delta, relevant_variables(f))
    size = 1 << f.n
    blocks = np.broadcast_to(np.eye(2, dtype=complex), (size, 2, 2)).copy()
    blocks[big] *= -1
    mid = np.flatnonzero(~zero & ~big)
    blocks[mid] = random_reflections(len(mid), 2, np.random.default_rng(seed))
    return BlockOracle(f.n, blocks, meta={"mode": "ideal", "delta": delta, "undefined": int(mid.size)})


def compressed_oracle(f: BooleanFunction, delta: float, copies: int, inf: np.ndarray | None = None) -> BlockOracle:
    """Exact two-dimensional blocks of the error-reduced influence tester with uncompute.

    With q the majority acceptance probability, the tester, a phase flip on
    acceptance and the inverse tester act on span{|0>, O|0>} as
    [[1-2q, s], [s, -(1-2q)]] with s = 2 sqrt(q(1-q)).
    """
    inf = all_influences(f) if inf is None else inf
    zero = (np.arange(1 << f.n) & relevant_variables(f)) == 0
    M = influence_rounds(delta)
    cache: dict = {}
    q = np.zeros(1 << f.n)
    for S in np.flatnonzero(~zero):
        key = round(float(inf[S]), 12)
        if key not in cache:
            cache[key] = majority_probability(scheduled_probability(key / 2, M), copies)
        q[S] = cache[key]
    c = 1 - 2 * q
    s = 2 * np.sqrt(np.clip(q * (1 - q), 0, None))
    blocks = np.empty((1 << f.n, 2, 2), dtype=complex)
    blocks[:, 0, 0], blocks[:, 0, 1] = c, s
    blocks[:, 1, 0], blocks[:, 1, 1] = s, -c
    return BlockOracle(f.n, blocks, meta={"mode": "compressed-circuit", "delta": delta, "copies": copies})


@dataclass
class SubtestResult:
    kind: str  # "first" or "second"
    level: int | None
    delta: float
    acceptance_probability: float  # one run
    majority_probability: float  # after the repetitions
    decision: bool
    promise: str = NONE
    skipped: bool = False
    queries: int = 0
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "level": self.level, "delta": self.delta,
                "acceptance_probability": self.acceptance_probability,
                "majority_probability": self.majority_probability, "accept": self.decision,
                "promise": self.promise, "skipped": self.skipped, "queries": self.queries,
                **self.detail}


def _majority(p: float, reps: int) -> float:
    return majority_probability(p, reps) if reps > 1 else p


def first_kind_tester(f: BooleanFunction, k: int, eps: float, l: int, mode: str = "ideal",
                      cfg: JuntaConfig = JuntaConfig(), seed: int = 0,
                      inf: np.ndarray | None = None) -> SubtestResult:
    if not 0 <= l <= max_level(k):
        raise ValueError(f"level must lie in [0, {max_level(k)}]")
    if mode not in ("ideal", "compressed-circuit"):
        raise ValueError("mode must be 'ideal' or 'compressed-circuit'")
    d = 2 ** l
    delta = first_kind_delta(eps, k, l)
    rng = np.random.default_rng([seed, l])
    if k + d > f.n:
        # no function of n variables has k+d influential ones: the premise is void
        return SubtestResult("first", l, delta, 1.0, 1.0, True, NONE, skipped=True)
    inf = all_influences(f) if inf is None else inf
    if mode == "ideal":
        oracle = ideal_oracle(f, delta, int(rng.integers(2 ** 32)), inf)
        per_call = 1
    else:
        copies = cfg.copies or error_reduction_copies(k, eps)
        oracle = compressed_oracle(f, delta, copies, inf)
        per_call = 2 * copies * ATTEMPTS * 2 * (2 * influence_rounds(delta) - 1)
    res = qggt_run(oracle, k, d, cfg.qggt)
    p = res.acceptance_probability
    pm = _majority(p, cfg.repetitions)
    return SubtestResult("first", l, delta, p, pm, bool(rng.random() < pm),
                         promise_side(f, k, d, delta),
                         queries=cfg.repetitions * res.queries * per_call,
                         detail={"d": d, "a": res.a, "W": res.W})


def second_kind_probability(f: BooleanFunction, k: int, eps: float, inf: np.ndarray | None = None,
                            enumerate_limit: int = 20, trials: int = 200, seed: int = 0) -> tuple[float, bool]:
    """E_V[acceptance of the influence tester on V] with V ~ each element w.p. 1/k; (value, exact?)."""
    delta = eps / (4 * k)
    M = influence_rounds(delta)
    n = f.n
    rel = relevant_variables(f)
    if n <= enumerate_limit:
        inf = all_influences(f) if inf is None else inf
        idx = np.arange(1 << n)
        sizes = popcounts(n)
        weights = (1 / k) ** sizes * (1 - 1 / k) ** (n - sizes)
        acc = np.zeros(1 << n)
        live = (idx & rel) != 0
        cache: dict = {}
        for S in np.flatnonzero(live):
            key = round(float(inf[S]), 12)
            if key not in cache:
                cache[key] = scheduled_probability(key / 2, M)
            acc[S] = cache[key]
        return float(np.dot(weights, acc)), True
    rng = np.random.default_rng(seed)
    total = 0
    for _ in range(trials):
        V = int(sum(1 << j for j in range(n) if rng.random() < 1 / k))
        p = influence_tester(f, V, delta).acceptance_probability
        total += rng.random() < p
    return total / trials, False


def second_kind_tester(f: BooleanFunction, k: int, eps: float, cfg: JuntaConfig = JuntaConfig(),
                       seed: int = 0, inf: np.ndarray | None = None) -> SubtestResult:
    if k < 2:
        raise ValueError("the second-kind tester needs k >= 2")
    p, exact = second_kind_probability(f, k, eps, inf, cfg.enumerate_limit, cfg.trials, seed)
    accept = p <= 0.8
    prob = float(accept)
    n_calls = cfg.trials * ATTEMPTS * 2 * (2 * influence_rounds(eps / (4 * k)) - 1)
    return SubtestResult("second", None, eps / (4 * k), prob, prob, accept,
                         queries=n_calls, detail={"inner_probability": p, "exact": exact})


@dataclass
class JuntaVerdict:
    decision: str  # "junta" or "far"
    acceptance_probability: float
    subtests: list
    k: int
    eps: float
    mode: str
    seed: int

    def to_dict(self) -> dict:
        return {"decision": self.decision, "acceptance_probability": self.acceptance_probability,
                "k": self.k, "eps": self.eps, "mode": self.mode, "seed": self.seed,
                "queries": sum(s.queries for s in self.subtests),
                "subtests": [s.to_dict() for s in self.subtests]}


def junta_test(f: BooleanFunction, k: int, eps: float, mode: str = "ideal",
               cfg: JuntaConfig = JuntaConfig(), seed: int = 0) -> JuntaVerdict:
    """Accept iff every subtester accepts; each subtester is a majority of cfg.repetitions runs."""
    if k < 2:
        raise ValueError("need k >= 2")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    inf = all_influences(f)
    subs = [first_kind_tester(f, k, eps, l, mode, cfg, seed, inf) for l in range(max_level(k) + 1)]
    subs.append(second_kind_tester(f, k, eps, cfg, seed, inf))
    p = float(np.prod([s.majority_probability for s in subs]))
    ok = all(s.decision for s in subs)
    return JuntaVerdict("junta" if ok else "far", p, subs, k, eps, mode, seed)


@dataclass
class NonJuntaCases:
    cases: frozenset
    certified: bool | None  # None when the distance was too costly to compute
    distance: float | None


def classify_nonjunta(f: BooleanFunction, k: int, eps: float, cutoff_factor: int = 200) -> NonJuntaCases:
    """Which of the first-kind (per level) and second-kind conditions f satisfies."""
    dist = None
    if math.comb(f.n, min(k, f.n)) * (1 << f.n) <= DISTANCE_WORK_LIMIT:
        dist = distance_to_k_junta(f, k)
    certified = None if dist is None else dist >= eps
    if certified is False:
        return NonJuntaCases(frozenset(), False, float(dist))
    inf = np.sort(variable_influences(f))[::-1]
    cases = set()
    for l in range(max_level(k) + 1):
        thr = first_kind_delta(eps, k, l)
        if int(np.sum(inf >= thr * (1 - 1e-12))) >= k + 2 ** l:
            cases.add(f"first:{l}")
    if float(np.sum(inf[k:cutoff_factor * k])) <= eps / 2:
        cases.add("second")
    return NonJuntaCases(frozenset(cases), certified, None if dist is None else float(dist))
