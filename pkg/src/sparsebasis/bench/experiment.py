"""Trial orchestration: paired method runs on shared circuits, persisted rows
and aggregate statistics."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import linregress

from ..circuits import Family, generate_circuit
from ..heuristics import PRESETS, calibrated_R, violation_check
from ..propagation import SimConfig, run
from ..reference import MAX_DENSE_QUBITS, dense_simulate, fidelity, pr_z_exact
from ..state import SparseState, participation_ratio
from ..stats import geometric_mean, paired_summary

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FIDELITY_FLOOR = 1e-300

DEFAULT_METHODS = [
    {"name": "fixed", "mode": "fixed"},
    {"name": "adaptive", "mode": "adaptive"},
]
TRUNCATION_RULES = ("topk", "schmidt1", "schmidt3", "random")
HEURISTIC_METHODS = [
    {"name": "topk", "mode": "fixed", "truncation": "topk"},
    {"name": "schmidt1", "mode": "fixed", "truncation": "schmidt1"},
    {"name": "schmidt3", "mode": "fixed", "truncation": "schmidt3"},
    {"name": "random", "mode": "fixed", "truncation": "random"},
]


def trial_seed(base_seed: int, n_qubits: int, k: int, family: str, trial: int) -> int:
    """63-bit seed derived from the trial coordinates."""
    h = hashlib.blake2b(digest_size=8)
    h.update(f"{int(base_seed)}|{int(n_qubits)}|{int(k)}|{family}|{int(trial)}".encode())
    return int.from_bytes(h.digest(), "little") >> 1


def sparse_support_pr(state: SparseState) -> float:
    """PR of the retained support; a headroom diagnostic that saturates near k."""
    return participation_ratio(state)


@dataclass
class ExperimentConfig:
    experiment: str
    family: str
    n_list: list[int]
    k_list: list[int]
    trials: int = 10
    base_seed: int = 0
    params: dict = field(default_factory=dict)
    methods: list[dict] = field(default_factory=lambda: [dict(m) for m in DEFAULT_METHODS])
    baseline: str = "fixed"
    sim: dict = field(default_factory=dict)
    estimator: str = "fitted"
    # when set, the circuit seed ignores k so every budget sees the same circuits
    share_circuits_across_k: bool = False
    output: str | None = None
    description: str = ""

    def __post_init__(self):
        Family(self.family)
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not self.n_list or not self.k_list:
            raise ValueError("n_list and k_list must be non-empty")
        names = [m["name"] for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError("method names must be unique")
        if self.baseline not in names:
            raise ValueError(f"baseline {self.baseline!r} is not among the methods")
        if self.estimator not in PRESETS:
            raise ValueError(f"unknown estimator preset {self.estimator!r}")
        for m in self.methods:
            try:
                sim = _sim_config(self, m, 1, None)
            except TypeError as exc:
                raise ValueError(f"method {m.get('name')!r}: {exc}") from None
            if sim.truncation not in TRUNCATION_RULES:
                raise ValueError(f"unknown truncation rule {sim.truncation!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


def _sim_config(cfg: ExperimentConfig, method: dict, k: int, seed: int | None) -> SimConfig:
    opts = dict(cfg.sim)
    opts.update({key: v for key, v in method.items() if key not in ("name",)})
    opts["k"] = k
    opts["seed"] = seed
    return SimConfig(**opts)


def run_trial(cfg: ExperimentConfig, n_qubits: int, k: int, trial: int) -> list[dict]:
    """All methods on one shared circuit instance; one row per method."""
    k_key = 0 if cfg.share_circuits_across_k else k
    seed = trial_seed(cfg.base_seed, n_qubits, k_key, cfg.family, trial)
    circuit = generate_circuit(cfg.family, n_qubits, cfg.params, seed)
    digest = circuit.digest()
    ref = dense_simulate(circuit) if n_qubits <= MAX_DENSE_QUBITS else None
    prz = pr_z_exact(ref) if ref is not None else None
    est = PRESETS[cfg.estimator]
    rows = []
    for method in cfg.methods:
        sim = _sim_config(cfg, method, k, seed)
        state, frame, rec = run(circuit, sim)
        F = fidelity(state, frame, ref) if ref is not None else None
        R = calibrated_R(rec.gamma2_tot, len(circuit), est)
        rows.append(
            {
                "schema_version": SCHEMA_VERSION,
                "experiment": cfg.experiment,
                "family": cfg.family,
                "n_qubits": n_qubits,
                "k": k,
                "trial": trial,
                "seed": seed,
                "circuit_hash": digest,
                "method": method["name"],
                "mode": sim.mode,
                "truncation": sim.truncation,
                "gate_count": len(circuit),
                "fidelity": F,
                "gamma2_tot": rec.gamma2_tot,
                "R": R,
                "violation": violation_check(F, R) if F is not None else None,
                "pr_support": sparse_support_pr(state),
                "pr_z": prz,
                "final_support": rec.final_support,
                "truncations": rec.truncations,
                "optimization_checks": rec.optimization_checks,
                "optimization_calls": rec.optimization_calls,
                "rotations_attempted": rec.rotations_attempted,
                "rotations_accepted": rec.rotations_accepted,
                "rotations_reverted": rec.rotations_reverted,
                "revert_rate": rec.revert_rate,
                "monotonicity_violations": rec.monotonicity_violations,
                "time_propagate": rec.time_propagate,
                "time_truncate": rec.time_truncate,
                "time_optimize": rec.time_optimize,
                "wall_time": rec.wall_time,
            }
        )
    return rows


def _sort_key(row: dict):
    return (row["n_qubits"], row["k"], row["trial"], row["method"])


def collect_rows(cfg: ExperimentConfig, threads: int = 1) -> tuple[list[dict], list[dict]]:
    """Run every (N, k, trial); returns (rows, failures) in deterministic order."""
    tasks = [(n, k, t) for n in cfg.n_list for k in cfg.k_list for t in range(cfg.trials)]

    def work(task):
        n, k, t = task
        try:
            return run_trial(cfg, n, k, t), None
        except Exception as exc:  # a failed trial is logged and the sweep continues
            log.exception("trial N=%d k=%d t=%d failed", n, k, t)
            return [], {"n_qubits": n, "k": k, "trial": t, "error": repr(exc)}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]
    rows = [r for rs, _ in results for r in rs]
    failures = [f for _, f in results if f is not None]
    rows.sort(key=_sort_key)
    return rows, failures


def _clip(values) -> np.ndarray:
    return np.maximum(np.asarray(values, dtype=float), FIDELITY_FLOOR)


def aggregate(rows: list[dict], baseline: str, resamples: int = 4000) -> list[dict]:
    """Per (N, k, method) medians and, for non-baseline methods, paired ratio statistics."""
    groups: dict[tuple, dict[str, dict[int, dict]]] = {}
    for r in rows:
        groups.setdefault((r["n_qubits"], r["k"]), {}).setdefault(r["method"], {})[r["trial"]] = r
    out = []
    for (n, k), by_method in sorted(groups.items()):
        base = by_method.get(baseline, {})
        for method, trials in sorted(by_method.items()):
            fids = [trials[t]["fidelity"] for t in sorted(trials)]
            entry = {
                "schema_version": SCHEMA_VERSION,
                "n_qubits": n,
                "k": k,
                "method": method,
                "baseline": baseline,
                "trials": len(trials),
                "median_gamma2": float(np.median([trials[t]["gamma2_tot"] for t in trials])),
                "median_pr_support": float(np.median([trials[t]["pr_support"] for t in trials])),
                "mean_revert_rate": float(np.mean([trials[t]["revert_rate"] for t in trials])),
                "monotonicity_violations": int(sum(trials[t]["monotonicity_violations"] for t in trials)),
                "median_wall_time": float(np.median([trials[t]["wall_time"] for t in trials])),
            }
            if all(f is not None for f in fids):
                entry["median_fidelity"] = float(np.median(fids))
                entry["gm_fidelity"] = geometric_mean(_clip(fids))
                viol = [trials[t]["violation"] for t in trials]
                entry["violation_rate"] = float(np.mean(viol))
                shared = sorted(set(trials) & set(base))
                if method != baseline and len(shared) >= 1:
                    a = _clip([trials[t]["fidelity"] for t in shared])
                    b = _clip([base[t]["fidelity"] for t in shared])
                    s = paired_summary(a, b, resamples=resamples, rng=0)
                    entry.update({f"ratio_{key}": v for key, v in s.to_dict().items()})
                    wall_a = np.median([trials[t]["wall_time"] for t in shared])
                    wall_b = np.median([base[t]["wall_time"] for t in shared])
                    entry["overhead"] = float(wall_a / wall_b) if wall_b > 0 else None
            out.append(entry)
    return out


def write_outputs(out_dir: str | os.PathLike, cfg: ExperimentConfig, rows, summary, failures) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "rows": out / f"{cfg.experiment}.jsonl",
        "csv": out / f"{cfg.experiment}_summary.csv",
        "summary": out / f"{cfg.experiment}_summary.json",
    }
    with open(paths["rows"], "w") as fh:
        for r in rows:
            fh.write(json.dumps(r) + "\n")
    if summary:
        fields = sorted({key for s in summary for key in s})
        with open(paths["csv"], "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerows(summary)
    with open(paths["summary"], "w") as fh:
        json.dump(
            {
                "schema_version": SCHEMA_VERSION,
                "config": cfg.to_dict(),
                "aggregates": summary,
                "failures": failures,
            },
            fh,
            indent=2,
        )
    return {key: str(p) for key, p in paths.items()}


def run_experiment(cfg: ExperimentConfig, out_dir: str | os.PathLike | None = None, threads: int = 1) -> dict:
    """Run, aggregate and (optionally) persist an experiment."""
    t0 = time.perf_counter()
    rows, failures = collect_rows(cfg, threads)
    summary = aggregate(rows, cfg.baseline)
    result = {"rows": rows, "summary": summary, "failures": failures, "elapsed": time.perf_counter() - t0}
    target = out_dir or cfg.output
    if target is not None:
        result["paths"] = write_outputs(target, cfg, rows, summary, failures)
    return result


def load_rows(path: str | os.PathLike) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


# ------------------------------------------------------------ PR_Z scaling


def measure_prz(family: str, n_list, trials: int, params: dict | None = None, base_seed: int = 0) -> dict[int, list[float]]:
    """Exact PR_Z samples per system size from dense simulation."""
    out = {}
    for n in n_list:
        if n > 20:
            raise ValueError("PR_Z scaling fits are limited to N <= 20")
        out[int(n)] = [
            pr_z_exact(dense_simulate(generate_circuit(family, n, params, trial_seed(base_seed, n, 0, family, t))))
            for t in range(trials)
        ]
    return out


def fit_prz_scaling(samples: dict[int, list[float]], min_trials: int = 10) -> tuple[float, float]:
    """Least-squares slope of log2 GM(PR_Z) against N, with its standard error."""
    if len(samples) < 3:
        raise ValueError("need at least 3 system sizes")
    ns = sorted(samples)
    for n in ns:
        if len(samples[n]) < min_trials:
            raise ValueError(f"need at least {min_trials} trials at N={n}")
    y = [float(np.mean(np.log2(np.asarray(samples[n], dtype=float)))) for n in ns]
    fit = linregress(ns, y)
    return float(fit.slope), float(fit.stderr)
