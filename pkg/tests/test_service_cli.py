"""Tests for the HTTP surface and the thin-client CLI."""

import json

import pytest
from fastapi.testclient import TestClient

from qclose import __version__
from qclose.cli import EXIT_CAPACITY, EXIT_CONFIG, EXIT_OK, main
from qclose.service import app


@pytest.fixture()
def client():
    return TestClient(app, raise_server_exceptions=False)


class TestServiceEndpoints:
    def test_health_and_version(self, client):
        assert client.get("/health").json() == {"status": "ok"}
        assert client.get("/version").json() == {"version": __version__}

    def test_run_experiment(self, client):
        resp = client.post("/experiments/run", json={
            "mode": "equality", "n": 4, "epsilon": 0.2, "family": "uniform",
            "trials": 5, "seed": 0, "repeats": 3,
        })
        assert resp.status_code == 200
        record = resp.json()["record"]
        assert record["success_rate"] == 1.0
        assert record["ledger_total"] == record["predicted_ledger_total"]

    def test_explicit_distribution_strings(self, client):
        resp = client.post("/experiments/run", json={
            "mode": "l2", "epsilon": 0.3, "trials": 2, "seed": 1, "repeats": 3,
            "dist_p": ["0.5", "0.5"], "dist_q": ["0.75", "0.25"],
        })
        assert resp.status_code == 200
        assert resp.json()["record"]["l1_true"] == 0.5

    def test_config_error_maps_to_400(self, client):
        resp = client.post("/experiments/run", json={"mode": "l2", "epsilon": 0.2})
        assert resp.status_code == 400
        assert "requires" in resp.json()["detail"]

    def test_capacity_error_maps_to_409(self, client):
        resp = client.post("/experiments/run", json={
            "mode": "lemma_check", "n": 100, "trials": 1,
        })
        assert resp.status_code == 409

    def test_distances(self, client):
        resp = client.post("/distances", json={"p": ["1", "0"], "q": ["0", "1"]})
        body = resp.json()
        assert body["l1"] == pytest.approx(2.0)
        assert body["l2"] == pytest.approx(2**0.5)

    def test_fits(self, client):
        records = []
        for eps in (0.4, 0.2, 0.1):
            run = client.post("/experiments/run", json={
                "mode": "l2", "n": 2, "epsilon": eps, "family": "bump_pair",
                "target_distance": eps, "trials": 1, "seed": 0, "repeats": 3,
            })
            records.append(run.json()["record"])
        resp = client.post("/fits", json={"records": records, "x_axis": "inv_eps"})
        assert resp.status_code == 200
        assert abs(resp.json()["slope"] - 1.0) <= 0.05


class TestCli:
    def test_run_writes_record(self, tmp_path, capsys):
        out = tmp_path / "record.json"
        code = main([
            "--mode", "l2", "--n", "4", "--epsilon", "0.2", "--nu", "0.5",
            "--family", "bump_pair", "--target-distance", "0.2",
            "--trials", "5", "--repeats", "3", "--seed", "7",
            "--out", str(out),
        ])
        assert code == EXIT_OK
        record = json.loads(out.read_text())
        assert record["trials"] == 5
        summary = capsys.readouterr().out
        assert "mode=l2" in summary and "success_rate=" in summary

    def test_dist_file_pair(self, tmp_path, capsys):
        fp = tmp_path / "p.txt"
        fq = tmp_path / "q.txt"
        fp.write_text("0.5\n0.5\n")
        fq.write_text("0.75\n0.25\n")
        code = main([
            "--mode", "equality", "--epsilon", "0.4", "--trials", "3",
            "--repeats", "3", "--dist-file", str(fp), "--dist-file", str(fq),
        ])
        assert code == EXIT_OK
        assert "mode=equality" in capsys.readouterr().out

    def test_config_error_exit_code(self, capsys):
        code = main(["--mode", "l2", "--epsilon", "0.2"])
        assert code == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_capacity_error_exit_code(self, capsys):
        code = main(["--mode", "lemma_check", "--n", "100", "--trials", "1"])
        assert code == EXIT_CAPACITY
        assert "capacity error" in capsys.readouterr().err

    def test_qae_envelope_flags(self, capsys):
        code = main(["--mode", "qae_envelope", "--amplitude", "0.25",
                     "--grover-power", "64", "--trials", "100", "--seed", "3"])
        assert code == EXIT_OK
        assert "success_rate=" in capsys.readouterr().out
