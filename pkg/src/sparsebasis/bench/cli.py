"""Command-line entry point: experiments, single simulations, PR_Z fits and
the acceptance suite.

Exit codes: 0 success, 1 partial failure (failed trials or criteria),
2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ..circuits import Family, generate_circuit
from ..heuristics import calibrated_R
from ..propagation import SimConfig, run
from ..reference import MAX_DENSE_QUBITS, dense_simulate, fidelity, pr_z_exact
from .experiment import HEURISTIC_METHODS, ExperimentConfig, fit_prz_scaling, measure_prz, run_experiment

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("BASS_THREADS", "1")))
    except ValueError:
        return 1


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, default=float))


def cmd_run(args) -> int:
    try:
        cfg = ExperimentConfig.load(args.config)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.base_seed = args.seed
    result = run_experiment(cfg, args.out or cfg.output or "results", threads=args.threads)
    for entry in result["summary"]:
        line = f"N={entry['n_qubits']} k={entry['k']} {entry['method']}"
        if "median_fidelity" in entry:
            line += f" median F={entry['median_fidelity']:.4g}"
        if "ratio_gm_ratio" in entry:
            line += (f" GM ratio={entry['ratio_gm_ratio']:.3g}"
                     f" [{entry['ratio_ci_lo']:.3g}, {entry['ratio_ci_hi']:.3g}]")
        print(line)
    for path in result.get("paths", {}).values():
        print(f"wrote {path}")
    if result["failures"]:
        print(f"{len(result['failures'])} trials failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = {}
    if args.depth is not None:
        params["p" if args.family == Family.QAOA.value else "depth"] = args.depth
    try:
        circuit = generate_circuit(args.family, args.n, params, args.seed or 0)
        cfg = SimConfig(k=args.k, mode=args.mode, two_qubit_pass=args.two_qubit_pass)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    state, frame, rec = run(circuit, cfg)
    out = {
        "family": args.family,
        "n_qubits": args.n,
        "k": args.k,
        "mode": args.mode,
        "seed": args.seed or 0,
        "circuit_hash": circuit.digest(),
        "gate_count": len(circuit),
        "gamma2_tot": rec.gamma2_tot,
        "R": calibrated_R(rec.gamma2_tot, len(circuit)),
        "final_support": rec.final_support,
        "final_pr": rec.final_pr,
        "truncations": rec.truncations,
        "optimization_calls": rec.optimization_calls,
        "rotations_accepted": rec.rotations_accepted,
        "rotations_reverted": rec.rotations_reverted,
        "wall_time": rec.wall_time,
    }
    if args.n <= MAX_DENSE_QUBITS:
        ref = dense_simulate(circuit)
        out["fidelity"] = fidelity(state, frame, ref)
        out["pr_z"] = pr_z_exact(ref)
    _print_json(out)
    return EXIT_OK


def cmd_fit_prz(args) -> int:
    params = {"depth": args.depth} if args.depth is not None else {}
    try:
        samples = measure_prz(args.family, _int_list(args.n_list), args.trials, params, base_seed=args.seed or 0)
        alpha, err = fit_prz_scaling(samples)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"alpha = {alpha:.4f} +- {err:.4f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import AcceptanceSuite

    suite = AcceptanceSuite(threads=args.threads, seed=args.seed or 0)
    numbers = _int_list(args.criteria) if args.criteria else None
    ok = True
    for res in suite.run_all(numbers):
        print(res.line(), flush=True)
        ok &= res.ok
    return EXIT_OK if ok else EXIT_PARTIAL


def cmd_schmidt_bench(args) -> int:
    try:
        cfg = ExperimentConfig(
            experiment="schmidt_bench",
            family=args.family,
            n_list=_int_list(args.n_list),
            k_list=_int_list(args.k_list),
            trials=args.trials,
            base_seed=args.seed or 0,
            params={"depth": args.depth},
            methods=[dict(m) for m in HEURISTIC_METHODS],
            baseline="topk",
        )
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_experiment(cfg, args.out, threads=args.threads)
    for entry in result["summary"]:
        if entry["method"] == "topk":
            continue
        print(
            f"N={entry['n_qubits']} k={entry['k']} {entry['method']}/topk: "
            f"GM={entry['ratio_gm_ratio']:.3g} wins={entry['ratio_wins']}/{entry['ratio_n']}"
        )
    return EXIT_PARTIAL if result["failures"] else EXIT_OK


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--threads", type=int, default=default(_default_threads()),
                        help="worker threads (env BASS_THREADS)")
    parser.add_argument("--out", default=default(None), help="output directory")
    parser.add_argument("--seed", type=int, default=default(None), help="base seed")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False))


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand; the subcommand
    # copies suppress their defaults so they never mask a leading flag
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    parser = argparse.ArgumentParser(prog="sparsebasis", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run an experiment config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", parents=[common], help="simulate one circuit")
    p.add_argument("--family", default="brickwork1d", choices=[f.value for f in Family])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", default="adaptive", choices=["fixed", "adaptive"])
    p.add_argument("--depth", type=int, default=None, help="layers (rounds p for qaoa)")
    p.add_argument("--two-qubit-pass", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit-prz", parents=[common], help="fit the PR_Z growth exponent")
    p.add_argument("--family", default="brickwork1d", choices=[f.value for f in Family])
    p.add_argument("--n-list", default="8,10,12,14")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--depth", type=int, default=5)
    p.set_defaults(func=cmd_fit_prz)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--criteria", default=None, help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("schmidt-bench", parents=[common], help="top-k against Schmidt-weighted and random truncation")
    p.add_argument("--family", default="brickwork1d", choices=[f.value for f in Family])
    p.add_argument("--n-list", default="12")
    p.add_argument("--k-list", default="512")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--trials", type=int, default=30)
    p.set_defaults(func=cmd_schmidt_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.threads < 1:
        print("config error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
