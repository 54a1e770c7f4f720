from __future__ import annotations

import json

import pytest

from sparsebasis.bench.cli import build_parser, main


def write_config(path, **kw):
    doc = dict(experiment="cli", family="brickwork1d", n_list=[6], k_list=[8], trials=2, params={"depth": 3})
    doc.update(kw)
    path.write_text(json.dumps(doc))
    return str(path)


class TestSimulate:
    def test_output(self, capsys):
        assert main(["simulate", "--n", "6", "--k", "64", "--mode", "fixed", "--depth", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["fidelity"] == pytest.approx(1.0, abs=1e-12)
        assert out["gamma2_tot"] == 1.0

    def test_qaoa_depth(self, capsys):
        assert main(["simulate", "--family", "qaoa", "--n", "6", "--k", "8", "--depth", "1"]) == 0
        assert 0 < json.loads(capsys.readouterr().out)["fidelity"] <= 1 + 1e-12

    def test_bad_budget(self, capsys):
        assert main(["simulate", "--n", "4", "--k", "0"]) == 2


class TestRun:
    def test_writes_outputs(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json")
        assert main(["run", cfg, "--out", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / "cli.jsonl").exists()
        assert "GM ratio" in capsys.readouterr().out

    def test_seed_override(self, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        main(["--seed", "5", "run", cfg, "--out", str(tmp_path / "a")])
        main(["run", cfg, "--seed", "5", "--out", str(tmp_path / "b")])
        a = [json.loads(x)["seed"] for x in (tmp_path / "a" / "cli.jsonl").read_text().splitlines()]
        b = [json.loads(x)["seed"] for x in (tmp_path / "b" / "cli.jsonl").read_text().splitlines()]
        assert a == b

    def test_bad_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", family="nonsense")
        assert main(["run", cfg]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert main(["run", str(tmp_path / "absent.json")]) == 2

    def test_partial_failure(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", n_list=[6, 40], trials=1)
        assert main(["run", cfg, "--out", str(tmp_path / "out")]) == 1


class TestMisc:
    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("BASS_THREADS", "3")
        assert build_parser().parse_args(["verify"]).threads == 3
        assert build_parser().parse_args(["verify", "--threads", "2"]).threads == 2

    def test_bad_threads(self):
        assert main(["--threads", "0", "verify", "--criteria", "7"]) == 2

    def test_fit_prz(self, capsys):
        assert main(["fit-prz", "--n-list", "4,6,8", "--trials", "10", "--depth", "2"]) == 0
        assert capsys.readouterr().out.startswith("alpha = ")

    def test_verify_subset(self, capsys):
        assert main(["verify", "--criteria", "7,10"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2 and all(l.startswith("[PASS]") for l in lines)

    def test_schmidt_bench(self, tmp_path, capsys):
        code = main(["schmidt-bench", "--n-list", "6", "--k-list", "8", "--trials", "3", "--out", str(tmp_path)])
        assert code == 0
        assert "schmidt1/topk" in capsys.readouterr().out
