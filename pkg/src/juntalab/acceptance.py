"""The acceptance battery: one or more pass/fail lines per criterion."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import adversary as adv
from . import boolfn as bf
from .classical import (binom_tv_kolmogorov, hypergeom_tv, lower_bound_sample_size, partition_query_budget,
                        partition_tester, sampling_tester)
from .instances import (BLOCK_MODES, LARGE, OVERRIDE_POLICIES, SMALL, make_block_oracle, make_relaxed_oracle,
                        parity_on, random_k_junta)
from .junta import (JuntaConfig, classify_nonjunta, first_kind_delta, first_kind_tester, influence_rounds,
                    junta_test, promise_side, scheduled_probability, second_kind_probability)
from .qcore import reflectionize, spectral_gap_check
from .qggt import (LambdaSpec, QggtConfig, algorithm_spec, apply_walk, lambda_bruteforce, lambda_fourier_blocks,
                   padded_size, qggt_run, reflect_lambda, witness)
from .symqft import (qft_matrix, recursion_residual, specht_dimension, specht_residual, unitarity_residual,
                     valid_strings)


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    expected_failure: bool = False  # known to be unattainable as stated
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else ("FAIL (expected)" if self.expected_failure else "FAIL")
        facts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{status}] {self.key:<4} {self.title}: {facts}"

    def to_dict(self) -> dict:
        return {"key": self.key, "title": self.title, "passed": self.passed,
                "expected_failure": self.expected_failure, "detail": {k: _plain(v) for k, v in self.detail.items()}}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _mask(rng: np.random.Generator, n: int, size: int) -> int:
    return bf.mask_of(int(j) + 1 for j in rng.choice(n, size, replace=False))


# 1. transform correctness
def criterion_1() -> list[CriterionResult]:
    rec = max(recursion_residual(n) for n in range(1, 9))
    uni = max(unitarity_residual(qft_matrix(n)) for n in range(0, 11))
    spe = max(specht_residual(n) for n in range(1, 9))
    return [
        CriterionResult("1a", "branching recursion identities, n<=8", rec < 1e-10, {"max_residual": rec}),
        CriterionResult("1b", "transform unitarity, n<=10", uni < 1e-9, {"max_residual": uni}),
        CriterionResult("1c", "columns inside their Specht spans, n<=8", spe < 1e-9, {"max_residual": spe}),
    ]


# 2. dimension bookkeeping
def criterion_2() -> list[CriterionResult]:
    bad = [(n, t) for n in range(0, 15) for t in range(0, n // 2 + 1)
           if len(valid_strings(n, t)) != math.comb(n, t) - (math.comb(n, t - 1) if t else 0)]
    ok_dim = all(sum((n - 2 * t + 1) * specht_dimension(n, t) for t in range(n // 2 + 1)) == 1 << n
                 for n in range(0, 15))
    return [CriterionResult("2", "string counts equal C(n,t)-C(n,t-1), n<=14", not bad and ok_dim,
                            {"mismatches": len(bad), "total_dimension_ok": ok_dim})]


# 3. block law of Lambda
def criterion_3(draws: int = 20, seed: int = 3) -> list[CriterionResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    cases = 0
    for n in range(1, 11):
        F = qft_matrix(n)
        for k in range(0, min(4, n) + 1):
            for _ in range(draws):
                spec = LambdaSpec(n, k, tuple(rng.standard_normal(n - k + 1)))
                L = lambda_bruteforce(spec)
                worst = max(worst, float(np.max(np.abs(F.T @ L @ F - lambda_fourier_blocks(spec)))))
                cases += 1
    return [CriterionResult("3", "Lambda block law against brute force, n<=10, k<=4", worst < 1e-9,
                            {"cases": cases, "max_residual": worst})]


# 4. adversary feasibility and objective
def criterion_4() -> list[CriterionResult]:
    feas, ratio = 0.0, 0.0
    for n in range(2, 17):
        for k in range(1, n):
            for d in range(1, n - k + 1):
                sol = adv.build_ggt_solution(n, k, d)
                feas = max(feas, adv.feasibility_residual(sol))
                ratio = max(ratio, sol.W / math.sqrt(1 + k / d))
    diag = max(abs(adv.and_example_solution(n).objective() - math.sqrt(n)) for n in range(1, 9))
    return [
        CriterionResult("4a", "feasibility residual on n<=16, k+d<=n", feas < 1e-9, {"max_residual": feas}),
        CriterionResult("4b", "W/sqrt(1+k/d) bounded by 10", ratio <= 10, {"max_ratio": ratio}),
        CriterionResult("4c", "AND example objective equals sqrt(n), n<=8", diag < 1e-12, {"max_error": diag}),
    ]


def qggt_grid(nmax: int = 10, kmax: int = 3, dmax: int = 3, cfg: QggtConfig = QggtConfig()):
    """Every hidden set on both sides and every block mode; yields (params, correct-side probability)."""
    idx = 0
    for n in range(2, nmax + 1):
        for k in range(1, kmax + 1):
            for d in range(1, dmax + 1):
                if k + d > n:
                    continue
                for side, size in ((SMALL, k), (LARGE, k + d)):
                    for A in itertools.combinations(range(1, n + 1), size):
                        for mode in BLOCK_MODES:
                            policy = OVERRIDE_POLICIES[idx % len(OVERRIDE_POLICIES)]
                            relaxed = make_relaxed_oracle(n, k, d, side, bf.mask_of(A), policy, idx)
                            oracle = reflectionize(make_block_oracle(relaxed, mode, idx))
                            res = qggt_run(oracle, k, d, cfg)
                            p = res.acceptance_probability
                            yield (n, k, d, side, mode), (p if side == SMALL else 1 - p), res
                            idx += 1


# 5. end-to-end gap group tester
def criterion_5(nmax: int = 10) -> list[CriterionResult]:
    worst = {SMALL: 1.0, LARGE: 1.0}
    where = {}
    count = 0
    const = 0.0
    for key, p, res in qggt_grid(nmax):
        count += 1
        side = key[3]
        if p < worst[side]:
            worst[side], where[side] = p, key
        const = max(const, (res.queries + 1) / math.sqrt(1 + key[1] / key[2]))
    wit = 0.0
    for n in range(2, nmax + 1):
        for k in range(1, 4):
            for d in range(1, 4):
                if k + d > n:
                    continue
                B = (1 << (k + d)) - 1
                for mode in BLOCK_MODES:
                    oracle = reflectionize(make_block_oracle(
                        make_relaxed_oracle(n, k, d, LARGE, B, "seeded-random", n), mode, n))
                    m = padded_size(n, k, d)
                    oracle = oracle.pad(m)
                    spec, _, _ = algorithm_spec(m, k, d)
                    u = witness(m, k, d, B)
                    full = np.zeros(((1 << m), oracle.workspace), dtype=complex)
                    full[:, 0] = u
                    full = full.reshape(-1)
                    wit = max(wit, float(np.linalg.norm(apply_walk(full, oracle, spec) - full) / np.linalg.norm(full)))
    ok = min(worst.values()) >= 2 / 3
    return [
        CriterionResult("5a", "gap group tester correct-side probability >= 2/3", ok,
                        {"instances": count, "worst_small": worst[SMALL], "worst_large": worst[LARGE],
                         "queries_over_sqrt(1+k/d)": const}),
        CriterionResult("5b", "witness is a fixed point of the walk", wit < 1e-9, {"max_residual": wit}),
    ]


# 6. walk versus direct reflection
def criterion_6(states: int = 100, seed: int = 6) -> list[CriterionResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in range(1, 11):
        for k in range(0, n // 2 + 1):
            spec = LambdaSpec(n, k, tuple(rng.standard_normal(n - k + 1)))
            V = rng.standard_normal((1 << n, states)) + 1j * rng.standard_normal((1 << n, states))
            V /= np.linalg.norm(V, axis=0)
            diff = reflect_lambda(V, spec, "walk") - reflect_lambda(V, spec, "direct")
            worst = max(worst, float(np.max(np.linalg.norm(diff, axis=0))))
    return [CriterionResult("6", "walk and direct reflections agree, n<=10", worst < 1e-8, {"max_distance": worst})]


def classical_grid():
    for n in (8, 16, 32, 64):
        for k in (1, 2, 4, 8):
            for d in sorted({1, max(k // 2, 1), k}):
                if k + d <= n:
                    yield n, k, d


# 7. classical testers
def criterion_7(one_sided_runs: int = 2000, trials: int = 100, seed: int = 7) -> list[CriterionResult]:
    rng = np.random.default_rng(seed)
    small_err = 0
    for i in range(one_sided_runs):
        n = int(rng.choice([8, 16, 32]))
        k = int(rng.integers(1, 7))
        policy = OVERRIDE_POLICIES[i % len(OVERRIDE_POLICIES)]
        o = make_relaxed_oracle(n, k, 1, SMALL, _mask(rng, n, k), policy, i)
        small_err += partition_tester(o, k, seed=i).decision != SMALL
    worst = {"sampling": 0.0, "partition": 0.0}
    over_budget = 0
    for n, k, d in classical_grid():
        for tester in worst:
            errors = 0
            for s in range(trials):
                o = make_relaxed_oracle(n, k, d, LARGE, _mask(rng, n, k + d), "seeded-random", s)
                if tester == "sampling":
                    r = sampling_tester(o, k, d, seed=s)
                    over_budget += r.queries > math.ceil(48 * (1 + (k / d) ** 2))
                else:
                    r = partition_tester(o, k, seed=s)
                    over_budget += r.queries > partition_query_budget(k)
                errors += r.decision != LARGE
            worst[tester] = max(worst[tester], errors / trials)
    return [
        CriterionResult("7a", "partition tester never errs on the small side", small_err == 0,
                        {"runs": one_sided_runs, "errors": small_err}),
        CriterionResult("7b", "large-side error <= 1/3 for both testers, n<=64, k<=8, d<=k",
                        max(worst.values()) <= 1 / 3,
                        {"worst_sampling": worst["sampling"], "worst_partition": worst["partition"]}),
        CriterionResult("7c", "query counts within budgets", over_budget == 0, {"violations": over_budget}),
    ]


def hypergeom_grid(nmax: int = 60, kmax: int = 10, spread: float = 1.0):
    for n in range(1, nmax + 1):
        for k in range(1, kmax + 1):
            for d in range(1, k + 1):
                if n >= spread * (k + d):
                    yield n, k, d


# 8. distribution identities
def criterion_8(seed: int = 8) -> list[CriterionResult]:
    rng = np.random.default_rng(seed)
    gap = 0.0
    for _ in range(50):
        k, d = int(rng.integers(1, 30)), int(rng.integers(1, 30))
        tv, ks = binom_tv_kolmogorov(k, d, float(rng.uniform(0.001, 0.999)))
        gap = max(gap, abs(tv - ks))
    exact = hypergeom_tv(4, 1, 1, 2)
    literal = [(float(hypergeom_tv(n, k, d, lower_bound_sample_size(n, k, d))), n, k, d)
               for n, k, d in hypergeom_grid()]
    over = [x for x in literal if x[0] > 0.95]
    far = max(float(hypergeom_tv(n, k, d, lower_bound_sample_size(n, k, d)))
              for n, k, d in hypergeom_grid(spread=2))
    return [
        CriterionResult("8a", "binomial TV equals Kolmogorov distance, 50 points", gap < 1e-12, {"max_gap": gap}),
        CriterionResult("8b", "hypergeometric TV at (4,1,1,2) is 1/3", exact == Fraction(1, 3), {"value": exact}),
        CriterionResult("8c", "hypergeometric TV <= 0.95, n<=60, k<=10, d<=k", not over,
                        {"max": max(literal)[0], "points_over": [x[1:] for x in over]},
                        expected_failure=True),
        CriterionResult("8d", "hypergeometric TV <= 0.95 where n >= 2(k+d)", far <= 0.95, {"max": far}),
    ]


def _far_samples(rng: np.random.Generator, count: int):
    """Random functions and perturbed juntas, n<=5, k<=2, with exact distance to k-juntas."""
    out = []
    while len(out) < count:
        n, k = int(rng.integers(3, 6)), int(rng.integers(1, 3))
        if rng.random() < 0.5:
            f = bf.random_function(n, rng)
        else:
            core = bf.random_function(k, rng)
            g = random_k_junta(n, k, core, sorted(int(j) + 1 for j in rng.choice(n, k, replace=False)))
            table = g.table.copy()
            flips = rng.choice(1 << n, int(rng.integers(1, 4)), replace=False)
            table[flips] *= -1
            f = bf.BooleanFunction(n, table)
        dist = bf.distance_to_k_junta(f, k)
        if dist > 0:
            out.append((f, k, float(dist) * float(rng.uniform(0.2, 1.0))))
    return out


def _juntas(rng: np.random.Generator, n: int, k: int):
    pos = sorted(int(j) + 1 for j in rng.choice(n, k, replace=False))
    yield bf.constant(n)
    yield parity_on(n, pos)
    yield random_k_junta(n, k, bf.and_function(k), pos)
    for _ in range(2):
        yield random_k_junta(n, k, bf.random_function(k, rng), pos)


# 9. junta tester
def criterion_9(seed: int = 9, samples: int = 1000) -> list[CriterionResult]:
    rng = np.random.default_rng(seed)
    eps = 0.1
    acc, rej, rej0 = 1.0, 1.0, 1.0
    for n in range(3, 9):
        for k in (2, 3):
            if k + 1 > n:
                continue
            for f in _juntas(rng, n, k):
                acc = min(acc, junta_test(f, k, eps, seed=n).acceptance_probability)
            par = parity_on(n, range(1, k + 2))
            rej = min(rej, 1 - junta_test(par, k, eps, seed=n).acceptance_probability)
            rej0 = min(rej0, 1 - first_kind_tester(par, k, eps, 0, seed=n).majority_probability)
    # compressed circuit against the ideal oracle on clean influences
    agree, compared, skipped = 0, 0, 0
    k = 2
    for n in range(3, 7):
        fs = list(_juntas(rng, n, k)) + [parity_on(n, range(1, m + 1)) for m in range(1, n + 1)]
        fs += [bf.random_function(n, rng) for _ in range(3)]
        for f in fs:
            inf = bf.all_influences(f)
            for l in (0, 1):
                if k + 2 ** l > n:
                    continue
                delta = first_kind_delta(eps, k, l)
                live = inf[inf > 0]
                if live.size and live.min() < delta or promise_side(f, k, 2 ** l, delta) == "none":
                    skipped += 1
                    continue
                a = first_kind_tester(f, k, eps, l, "ideal", inf=inf).acceptance_probability
                b = first_kind_tester(f, k, eps, l, "compressed-circuit", inf=inf).acceptance_probability
                compared += 1
                agree += (a >= 0.5) == (b >= 0.5)
    # case coverage on certified-far functions
    empty = 0
    uncertified = 0
    for f, k2, e in _far_samples(rng, samples):
        r = classify_nonjunta(f, k2, e)
        empty += not r.cases
        uncertified += r.certified is not True
    # second-kind bound on juntas
    worst2 = 0.0
    for n in range(2, 13):
        for k3 in range(2, 5):
            if k3 > n:
                continue
            for f in _juntas(rng, n, k3):
                worst2 = max(worst2, second_kind_probability(f, k3, eps)[0])
    comp = min(scheduled_probability(inf / 2, influence_rounds(2.0 ** -i))
               for i in range(0, 11) for inf in np.linspace(2.0 ** -i, 1, 200))
    return [
        CriterionResult("9a", "ideal mode accepts juntas and rejects parity on k+1 bits",
                        min(acc, rej, rej0) >= 2 / 3,
                        {"worst_accept": acc, "worst_reject": rej, "worst_reject_first_kind_l0": rej0}),
        CriterionResult("9b", "compressed circuit matches the ideal oracle", compared > 0 and agree == compared,
                        {"compared": compared, "agree": agree, "outside_promise": skipped}),
        CriterionResult("9c", "every certified-far sample satisfies a case", empty == 0 and uncertified == 0,
                        {"samples": samples, "empty": empty}),
        CriterionResult("9d", "second-kind inner probability <= 0.75 on juntas", worst2 <= 0.75, {"max": worst2}),
        CriterionResult("9e", "influence tester accepts with probability >= 0.9 once Inf >= delta", comp >= 0.9,
                        {"min": comp}),
    ]


def _composition_cases():
    and2 = adv.normalize_condition(adv.and_example_solution(2))
    and3 = adv.normalize_condition(adv.and_example_solution(3))
    ident = adv.identity_bit_solution()
    eggt = adv.normalize_condition(adv.build_ggt_solution(3, 1, 1).to_generic())
    yield "AND2(id,id)", adv.compose_solutions(and2, [ident, ident])
    yield "AND3(id,id,id)", adv.compose_solutions(and3, [ident] * 3)
    yield "AND2(AND2,id)", adv.compose_solutions(and2, [adv.and_example_solution(2), ident])
    yield "AND2(AND2,AND2)", adv.compose_solutions(and2, [adv.and_example_solution(2)] * 2)
    yield "EGGT(3,1,1)(id,...)", adv.compose_solutions(eggt, [ident] * eggt.nvars)


# 10. composition
def criterion_10() -> list[CriterionResult]:
    feas, mineig = 0.0, math.inf
    names = []
    for name, sol in _composition_cases():
        names.append(name)
        feas = max(feas, sol.feasibility_residual())
        mineig = min(mineig, sol.min_eigenvalue())
    return [CriterionResult("10", "composed solutions feasible and PSD", feas < 1e-9 and mineig >= -1e-10,
                            {"cases": len(names), "max_residual": feas, "min_eigenvalue": mineig})]


def _random_projector(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    z = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    q, _ = np.linalg.qr(z)
    return q @ q.conj().T


# 11. effective spectral gap
def criterion_11(trials: int = 200, seed: int = 11) -> list[CriterionResult]:
    rng = np.random.default_rng(seed)
    fails = 0
    slack = math.inf
    for _ in range(trials):
        dim = int(rng.integers(2, 65))
        P1 = _random_projector(rng, dim, int(rng.integers(0, dim + 1)))
        P2 = _random_projector(rng, dim, int(rng.integers(0, dim + 1)))
        w = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        w = w - P1 @ w
        delta = float(rng.uniform(0, math.pi))
        lhs, rhs, ok = spectral_gap_check(P1, P2, w, delta)
        fails += not ok
        slack = min(slack, rhs - lhs)
    return [CriterionResult("11", "effective spectral gap bound, dim<=64", fails == 0,
                            {"trials": trials, "failures": fails, "min_slack": slack})]


def reflect_timings(ns=range(6, 13), batch: int = 256, repeats: int = 7, seed: int = 12):
    rng = np.random.default_rng(seed)
    out = []
    for n in ns:
        spec, _, _ = algorithm_spec(n, 2, 2)
        V = rng.standard_normal((1 << n, batch))
        reflect_lambda(V, spec)
        best = math.inf
        for _ in range(repeats):
            t = time.perf_counter()
            reflect_lambda(V, spec)
            best = min(best, time.perf_counter() - t)
        out.append((n, best))
    return out


# 12. scaling
def criterion_12() -> list[CriterionResult]:
    times = reflect_timings()
    x = np.log([2 ** n * n for n, _ in times])
    y = np.log([t for _, t in times])
    slope = float(np.polyfit(x, y, 1)[0])
    return [CriterionResult("12", "reflection time against 2^n n, n=6..12", 0.9 <= slope <= 1.3,
                            {"slope": slope, "seconds": [round(t, 5) for _, t in times]})]


CRITERIA = {str(i): globals()[f"criterion_{i}"] for i in range(1, 13)}


def run_all(selection=None, log=None) -> list[CriterionResult]:
    keys = list(CRITERIA) if not selection else [str(s) for s in selection]
    results = []
    for key in keys:
        if key not in CRITERIA:
            raise KeyError(f"unknown criterion {key}")
        t = time.perf_counter()
        rows = CRITERIA[key]()
        for r in rows:
            r.seconds = time.perf_counter() - t
            if log:
                log(r.line())
        results += rows
    return results


def all_passed(results) -> bool:
    return all(r.passed for r in results)
