"""Command-line front end: every subcommand prints schema-versioned JSON (or CSV)."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from functools import partial
from pathlib import Path

import numpy as np

from . import boolfn as bf
from .instances import (BLOCK_MODES, LARGE, OVERRIDE_POLICIES, SMALL, addressing_function, make_block_oracle,
                        make_relaxed_oracle, parity_on, random_k_junta)

SCHEMA_VERSION = "1"

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class ConfigError(Exception):
    pass


def parse_instance(desc: str, seed: int = 0) -> bf.BooleanFunction:
    """parity:N[:i,j,..] | constant:N | and:N | random:N | random-junta:N:K | addressing:g1,g2,..[:N_ADDR]"""
    kind, _, rest = desc.partition(":")
    parts = rest.split(":") if rest else []
    rng = np.random.default_rng(seed)
    try:
        if kind == "parity":
            n = int(parts[0])
            vars_ = [int(v) for v in parts[1].split(",")] if len(parts) > 1 else range(1, n + 1)
            return parity_on(n, vars_)
        if kind == "constant":
            return bf.constant(int(parts[0]))
        if kind == "and":
            return bf.and_function(int(parts[0]))
        if kind == "random":
            return bf.random_function(int(parts[0]), rng)
        if kind == "random-junta":
            n, k = int(parts[0]), int(parts[1])
            pos = sorted(int(j) + 1 for j in rng.choice(n, k, replace=False))
            return random_k_junta(n, k, bf.random_function(k, rng), pos)
        if kind == "addressing":
            g = [int(v) for v in parts[0].split(",")]
            return addressing_function(g, int(parts[1]) if len(parts) > 1 else None)
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad instance descriptor {desc!r}: {exc}") from exc
    raise ConfigError(f"unknown instance kind {kind!r}")


def _load_function(args) -> bf.BooleanFunction:
    if args.truth_table and args.instance:
        raise ConfigError("give either --truth-table or --instance, not both")
    if args.truth_table:
        try:
            return bf.read_truth_table(args.truth_table)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    if args.instance:
        return parse_instance(args.instance, args.seed)
    raise ConfigError("one of --truth-table or --instance is required")


def _hidden_set(args, size: int) -> int:
    if args.A:
        elems = [int(x) for x in str(args.A).split(",") if x]
        if len(elems) != size:
            raise ConfigError(f"--A must list exactly {size} elements for the {args.side} side")
        return bf.mask_of(elems)
    rng = np.random.default_rng(args.seed)
    return bf.mask_of(int(j) + 1 for j in rng.choice(args.n, size, replace=False))


def cmd_fourier(args) -> dict:
    f = _load_function(args)
    spec = bf.fourier_transform(f)
    coeffs = {",".join(map(str, bf.elements_of(S))) or "{}": float(c)
              for S, c in enumerate(spec.coeffs) if abs(c) > 1e-12}
    out = {"n": f.n, "coefficients": coeffs,
           "influences": [float(x) for x in bf.variable_influences(f)],
           "total_influence": float(sum(bf.variable_influences(f))),
           "relevant": bf.elements_of(bf.relevant_variables(f))}
    if args.k is not None:
        out["k"] = args.k
        out["distance_to_k_junta"] = str(bf.distance_to_k_junta(f, args.k))
    return out


def _classical_oracle(n, k, d, side, A, override, seed):
    return make_relaxed_oracle(n, k, d, side, A, override, seed)


def cmd_ggt_classical(args) -> dict:
    from .classical import error_summary, run_trials
    size = args.k if args.side == SMALL else args.k + args.d
    if size > args.n:
        raise ConfigError("hidden set larger than the universe")
    A = _hidden_set(args, size)
    factory = partial(_classical_oracle, args.n, args.k, args.d, args.side, A, args.override)
    seeds = range(args.seed, args.seed + args.seeds)
    reports = run_trials(args.tester, factory, args.k, args.d, seeds, args.workers)
    summary = error_summary(reports, args.side)
    return {"tester": args.tester, "n": args.n, "k": args.k, "d": args.d, "side": args.side,
            "override": args.override, "A": bf.elements_of(A), "seeds": args.seeds,
            "error_rate": summary["error_rate"], "queries": summary["queries"]}


def cmd_distances(args) -> dict:
    from .classical import binom_tv_kolmogorov, hypergeom_tv, lower_bound_sample_size
    m = args.m if args.m is not None else lower_bound_sample_size(args.n, args.k, args.d)
    tv = hypergeom_tv(args.n, args.k, args.d, m)
    out = {"n": args.n, "k": args.k, "d": args.d, "m": m, "tv": str(tv), "tv_float": float(tv)}
    if args.p is not None:
        btv, ks = binom_tv_kolmogorov(args.k, args.d, args.p)
        out.update({"p": args.p, "binomial_tv": btv, "kolmogorov": ks})
    return out


def cmd_qft(args) -> dict:
    from .symqft import FourierIndex, qft_matrix, recursion_residual, specht_dimension, unitarity_residual
    idx = FourierIndex(args.n)
    out = {"n": args.n, "dimension": 1 << args.n,
           "irreducibles": [{"t": t, "dimension": specht_dimension(args.n, t), "levels": args.n - 2 * t + 1}
                            for t in range(args.n // 2 + 1)],
           "basis_size": len(idx.keys)}
    if args.check:
        out["unitarity_residual"] = unitarity_residual(qft_matrix(args.n))
        if args.n >= 1:
            out["recursion_residual"] = recursion_residual(args.n)
    return out


def cmd_adversary(args) -> dict:
    from .adversary import build_ggt_solution, feasibility_residual
    sol = build_ggt_solution(args.n, args.k, args.d)
    # the explicit X_S matrices are only materialized for small universes
    min_eig = sol.to_generic().min_eigenvalue() if args.n <= 10 else None
    return {"n": args.n, "k": args.k, "d": args.d, "W": sol.W, "min_eigenvalue": min_eig,
            "W_over_sqrt(1+k/d)": sol.W / math.sqrt(1 + args.k / args.d),
            "alpha": [float(a) for a in sol.alpha], "beta": [float(b) for b in sol.beta],
            "feasibility_residual": feasibility_residual(sol)}


def cmd_qggt(args) -> dict:
    from .qcore import reflectionize
    from .qggt import QggtConfig, qggt_run
    size = args.k if args.side == SMALL else args.k + args.d
    if size > args.n:
        raise ConfigError("hidden set larger than the universe")
    A = _hidden_set(args, size)
    relaxed = make_relaxed_oracle(args.n, args.k, args.d, args.side, A, args.override, args.seed)
    oracle = reflectionize(make_block_oracle(relaxed, args.mode, args.seed))
    cfg = QggtConfig(C1=args.C1, C=args.C, a=args.a)
    res = qggt_run(oracle, args.k, args.d, cfg)
    return {"n": args.n, "k": args.k, "d": args.d, "side": args.side, "mode": args.mode,
            "override": args.override, "A": bf.elements_of(A), "C1": args.C1, "C": args.C, "a": res.a,
            "delta": res.delta, "W": res.W, "n_padded": res.n_padded,
            "acceptance_probability": res.acceptance_probability, "decision": res.decision,
            "queries": res.queries}


def cmd_junta(args) -> dict:
    from .junta import JuntaConfig, junta_test
    from .qggt import QggtConfig
    f = _load_function(args)
    cfg = JuntaConfig(qggt=QggtConfig(C1=args.C1, C=args.C), copies=args.copies)
    verdict = junta_test(f, args.k, args.eps, args.mode, cfg, args.seed)
    return {"n": f.n, "instance": args.instance or str(args.truth_table), **verdict.to_dict()}


def cmd_acceptance(args) -> dict:
    from .acceptance import all_passed, run_all
    only = [s for s in str(args.only).split(",") if s] if args.only else None
    log = (lambda line: print(line, file=sys.stderr)) if args.verbose else None
    try:
        results = run_all(only, log)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    return {"criteria": [r.to_dict() for r in results], "all_passed": all_passed(results),
            "expected_failures": [r.key for r in results if not r.passed and r.expected_failure]}


COMMANDS = {
    "fourier": cmd_fourier, "ggt-classical": cmd_ggt_classical, "distances": cmd_distances,
    "qft": cmd_qft, "adversary": cmd_adversary, "qggt": cmd_qggt, "junta": cmd_junta,
    "acceptance-suite": cmd_acceptance,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", type=Path, help="write here instead of stdout")
    common.add_argument("--config", type=Path, help="TOML file whose keys mirror the flags")

    p = argparse.ArgumentParser(prog="juntalab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def function_source(sp):
        sp.add_argument("--truth-table", type=Path)
        sp.add_argument("--instance", help="e.g. parity:5, random-junta:8:2, addressing:1,2")

    def gap(sp):
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--d", type=int, required=True)

    def side(sp):
        sp.add_argument("--side", choices=(SMALL, LARGE), default=SMALL)
        sp.add_argument("--A", help="hidden set as a comma list; random when omitted")
        sp.add_argument("--override", choices=OVERRIDE_POLICIES, default="seeded-random")

    sp = sub.add_parser("fourier", parents=[common], help="spectrum, influences and junta distance")
    function_source(sp)
    sp.add_argument("--k", type=int)

    sp = sub.add_parser("ggt-classical", parents=[common], help="error rate of a classical tester")
    gap(sp)
    side(sp)
    sp.add_argument("--tester", choices=("sampling", "partition"), default="partition")
    sp.add_argument("--seeds", type=int, default=100, help="number of trials")
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("distances", parents=[common], help="exact hypergeometric total variation")
    gap(sp)
    sp.add_argument("--m", type=int)
    sp.add_argument("--p", type=float, help="also compare binomials with this success probability")

    sp = sub.add_parser("qft", parents=[common], help="the subset-module Fourier transform")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--check", action="store_true")

    sp = sub.add_parser("adversary", parents=[common], help="the gap group testing adversary solution")
    gap(sp)

    sp = sub.add_parser("qggt", parents=[common], help="exact run of the quantum gap group tester")
    gap(sp)
    side(sp)
    sp.add_argument("--mode", choices=BLOCK_MODES, default="phase-faithful")
    sp.add_argument("--C1", type=float, default=8.0)
    sp.add_argument("--C", type=float, default=64.0)
    sp.add_argument("--a", type=int)

    sp = sub.add_parser("junta", parents=[common], help="run the junta tester on one function")
    function_source(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--mode", choices=("ideal", "compressed-circuit"), default="ideal")
    sp.add_argument("--copies", type=int)
    sp.add_argument("--C1", type=float, default=8.0)
    sp.add_argument("--C", type=float, default=64.0)

    sp = sub.add_parser("acceptance-suite", parents=[common], help="run the acceptance battery")
    sp.add_argument("--only", help="comma list of criterion numbers")
    sp.add_argument("--verbose", action="store_true", help="stream result lines to stderr")
    return p


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if not known.config or known.command not in COMMANDS:
        return parser.parse_args(argv)
    try:
        data = tomllib.loads(known.config.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    sub = parser._subparsers._group_actions[0].choices[known.command]
    known_dests = {a.dest for a in sub._actions}
    cleaned = {}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in known_dests or dest in ("config", "help"):
            raise ConfigError(f"unknown config key {key!r} for {known.command}")
        cleaned[dest] = value
    # flags given on the command line win over the file
    sub.set_defaults(**cleaned)
    for action in sub._actions:
        if action.dest in cleaned:
            action.required = False
    return parser.parse_args(argv)


def _to_csv(payload: dict) -> str:
    buf = io.StringIO()
    rows = None
    for key in ("criteria", "subtests"):
        if isinstance(payload.get(key), list):
            rows = payload[key]
    if rows is None:
        rows = [payload]
    flat = [{k: (json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v) for k, v in r.items()}
            for r in rows]
    fields = sorted({k for r in flat for k in r})
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(flat)
    return buf.getvalue()


def render(payload: dict, fmt: str) -> str:
    if fmt == "csv":
        return _to_csv(payload)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        result = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"juntalab: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"juntalab: invalid parameters: {exc}", file=sys.stderr)
        return 2
    payload = {"schema_version": SCHEMA_VERSION, "command": args.command, "seed": args.seed, **result}
    text = render(payload, args.format)
    if args.output:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    if args.command == "acceptance-suite" and not result["all_passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
