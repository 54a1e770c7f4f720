from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from sparsebasis.bench.experiment import (
    SCHEMA_VERSION,
    ExperimentConfig,
    aggregate,
    collect_rows,
    fit_prz_scaling,
    load_rows,
    run_experiment,
    sparse_support_pr,
    trial_seed,
)
from sparsebasis.state import SparseState

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def small_config(**kw):
    doc = dict(experiment="small", family="brickwork1d", n_list=[6], k_list=[8], trials=3, params={"depth": 4})
    doc.update(kw)
    return ExperimentConfig(**doc)


class TestSeeds:
    def test_deterministic(self):
        assert trial_seed(0, 12, 100, "qaoa", 3) == trial_seed(0, 12, 100, "qaoa", 3)

    def test_distinct_and_bounded(self):
        seeds = {trial_seed(0, n, k, "qaoa", t) for n in (8, 10) for k in (4, 8) for t in range(5)}
        assert len(seeds) == 20
        assert all(0 <= s < 2**63 for s in seeds)


class TestConfig:
    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_shipped_configs_load(self, path):
        cfg = ExperimentConfig.load(path)
        assert cfg.experiment == path.stem

    @pytest.mark.parametrize(
        "kw",
        [
            {"family": "ising"},
            {"trials": 0},
            {"k_list": []},
            {"baseline": "missing"},
            {"estimator": "magic"},
            {"methods": [{"name": "fixed", "mode": "fixed"}, {"name": "fixed", "mode": "adaptive"}]},
            {"methods": [{"name": "fixed", "mode": "fixed", "warp": 9}]},
            {"methods": [{"name": "fixed", "mode": "fixed", "truncation": "median"}]},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            small_config(**kw)

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            ExperimentConfig.from_dict({**small_config().to_dict(), "colour": "red"})

    def test_round_trip(self):
        cfg = small_config()
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


class TestRows:
    def test_pairing_shares_circuits(self):
        rows, failures = collect_rows(small_config())
        assert not failures and len(rows) == 6
        by_trial = {}
        for r in rows:
            by_trial.setdefault(r["trial"], set()).add(r["circuit_hash"])
            assert r["schema_version"] == SCHEMA_VERSION
        assert all(len(h) == 1 for h in by_trial.values())

    def test_full_budget_is_exact(self):
        rows, _ = collect_rows(small_config(n_list=[4], k_list=[16], trials=1))
        for r in rows:
            assert r["fidelity"] == pytest.approx(1.0, abs=1e-12)
            assert r["gamma2_tot"] == 1.0 and not r["violation"]

    def test_reruns_bit_identical(self):
        a, _ = collect_rows(small_config())
        b, _ = collect_rows(small_config(), threads=3)
        strip = lambda rows: [{k: v for k, v in r.items() if not k.startswith("time_") and k != "wall_time"} for r in rows]
        assert strip(a) == strip(b)

    def test_shared_circuits_across_k(self):
        rows, _ = collect_rows(small_config(k_list=[4, 8], trials=1, share_circuits_across_k=True))
        assert len({r["circuit_hash"] for r in rows}) == 1

    def test_failures_are_recorded(self):
        rows, failures = collect_rows(small_config(n_list=[6, 40], trials=1))
        assert len(rows) == 2 and len(failures) == 1 and failures[0]["n_qubits"] == 40


class TestOutputs:
    def test_files_and_recomputed_summary(self, tmp_path):
        cfg = small_config()
        res = run_experiment(cfg, tmp_path)
        rows = load_rows(res["paths"]["rows"])
        assert rows == json.loads(json.dumps(res["rows"]))
        doc = json.loads(Path(res["paths"]["summary"]).read_text())
        assert doc["schema_version"] == SCHEMA_VERSION
        assert doc["aggregates"] == json.loads(json.dumps(aggregate(rows, cfg.baseline)))
        header = Path(res["paths"]["csv"]).read_text().splitlines()[0].split(",")
        assert "ratio_gm_ratio" in header and "median_fidelity" in header

    def test_ratio_matches_rows(self):
        cfg = small_config(trials=4)
        res = run_experiment(cfg)
        fid = {(r["method"], r["trial"]): r["fidelity"] for r in res["rows"]}
        ratios = [fid[("adaptive", t)] / fid[("fixed", t)] for t in range(4)]
        entry = next(e for e in res["summary"] if e["method"] == "adaptive")
        assert entry["ratio_gm_ratio"] == pytest.approx(np.exp(np.mean(np.log(ratios))), rel=1e-12)
        assert "ratio_gm_ratio" not in next(e for e in res["summary"] if e["method"] == "fixed")


class TestPrzFit:
    def test_exponential(self):
        samples = {n: [2.0 ** (0.7 * n)] * 10 for n in (8, 10, 12, 14)}
        alpha, err = fit_prz_scaling(samples)
        assert alpha == pytest.approx(0.7, abs=1e-12) and err == pytest.approx(0.0, abs=1e-12)

    def test_constant(self):
        alpha, _ = fit_prz_scaling({n: [5.0] * 10 for n in (4, 6, 8)})
        assert alpha == pytest.approx(0.0, abs=1e-12)

    def test_needs_sizes_and_trials(self):
        with pytest.raises(ValueError):
            fit_prz_scaling({4: [1.0] * 10, 6: [1.0] * 10})
        with pytest.raises(ValueError):
            fit_prz_scaling({n: [1.0] * 3 for n in (4, 6, 8)})


class TestSupportPr:
    def test_values(self):
        assert sparse_support_pr(SparseState(3)) == 1.0
        assert sparse_support_pr(SparseState(2, [0, 1, 2, 3], [0.5] * 4)) == pytest.approx(4.0)
