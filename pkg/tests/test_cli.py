import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from lhvprobe import cli, io, lhv
from lhvprobe.measurements import haar_random_settings

DATA = Path(__file__).parent / "data"
F_MIN_REPORTED = 0.509651
# margin of the certificate at F = 0.6 on the frozen canonical optimum
FROZEN_MARGIN_AT_06 = 0.07086658077570718


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def fmin_run(tmp_path_factory):
    # seed 1 reaches the deep basin on its second restart
    out = tmp_path_factory.mktemp("fmin")
    assert run("fmin", "--restarts", 2, "--seed", 1, "--fix-psi-canonical", "--out", out) == 0
    return out


def test_verify_passes(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert run("verify", "--out", out) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"]
    checks = {c["name"]: c for c in report["checks"]}
    assert checks["rho_b_ppt_min_eigenvalue"]["measured"] >= -1e-10
    assert json.loads(json.dumps(report)) == report
    assert io.read_json(out) == report
    manifest = io.read_json(tmp_path / "verify.manifest.json")
    assert manifest["command"] == "verify" and manifest["outputs"] == [str(out)]


def test_verify_with_literal_v4_fails(capsys):
    assert run("verify", "--literal-v4") == 1
    report = json.loads(capsys.readouterr().out)
    checks = {c["name"]: c for c in report["checks"]}
    assert not checks["orthonormal_basis"]["passed"]


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--trials", "0"],
        ["sample", "--trials", "5", "--f", "0.5"],
        ["sample", "--trials", "5", "--state", "mixture"],
        ["sample", "--trials", "5", "--state", "mixture", "--f", "1.5"],
        ["sample", "--trials", "5", "--workers", "0"],
        ["fmin", "--restarts", "0"],
        ["fmin", "--max-iter", "0"],
    ],
)
def test_usage_errors(tmp_path, argv):
    out = tmp_path / "never"
    assert run(*argv, "--out", out) == 2
    assert not out.exists()


def test_sample_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("sample", "--trials", 40, "--seed", 7, "--state", "mixture", "--f", 0.9, "--out", d) == 0
    assert (a / "trials.csv").read_bytes() == (b / "trials.csv").read_bytes()
    lines = (a / "trials.csv").read_text().splitlines()
    assert lines[0] == "index,feasible,value" and len(lines) == 41
    report = io.read_json(a / "campaign.json")
    assert report["feasible_count"] + report["infeasible_count"] == 40
    assert (a / "campaign.manifest.json").exists()


def test_sample_rho_b(tmp_path):
    assert run("sample", "--trials", 200, "--seed", 7, "--out", tmp_path) == 0
    assert io.read_json(tmp_path / "campaign.json")["feasible_count"] == 200


def test_sample_workers_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("LHVPROBE_WORKERS", "2")
    assert run("sample", "--trials", 20, "--seed", 1, "--out", tmp_path / "env") == 0
    assert io.read_json(tmp_path / "env" / "campaign.json")["config"]["worker_count"] == 2
    assert run("sample", "--trials", 20, "--seed", 1, "--workers", 1, "--out", tmp_path / "flag") == 0
    assert io.read_json(tmp_path / "flag" / "campaign.json")["config"]["worker_count"] == 1
    assert (tmp_path / "env" / "trials.csv").read_bytes() == (tmp_path / "flag" / "trials.csv").read_bytes()


def test_sample_prints_drawn_seed(tmp_path, capsys):
    assert run("sample", "--trials", 2, "--out", tmp_path) == 0
    err = capsys.readouterr().err
    seed = int(err.split("seed:")[1].split()[0])
    assert io.read_json(tmp_path / "campaign.manifest.json")["seeds"]["seed"] == seed


def test_fmax_degenerate_settings(tmp_path):
    s = haar_random_settings(3)
    settings = tmp_path / "settings.json"
    io.write_json(settings, io.settings_to_json(type(s)(s.a1, s.a1, s.b1, s.b1)))
    out = tmp_path / "fmax.json"
    assert run("fmax", "--settings", settings, "--psi-canonical", "--out", out) == 0
    doc = io.read_json(out)
    assert doc["value"] == 1.0
    assert len(doc["witness_distribution"]) == 81


def test_fmax_corrupted_json(tmp_path, capsys):
    settings = tmp_path / "settings.json"
    settings.write_text('{"a1": [0, 0, 0,\n  "a2": ]}')
    out = tmp_path / "fmax.json"
    assert run("fmax", "--settings", settings, "--psi-canonical", "--out", out) == 2
    err = capsys.readouterr().err
    assert f"{settings}:2:" in err
    assert not out.exists()


def test_fmax_wrong_schema(tmp_path):
    settings = tmp_path / "settings.json"
    settings.write_text('{"a1": [0, 0]}')
    assert run("fmax", "--settings", settings, "--psi-canonical", "--out", tmp_path / "o.json") == 2


def test_fmax_needs_one_state_source(tmp_path):
    settings = DATA / "canonical_min_settings.json"
    assert run("fmax", "--settings", settings, "--out", tmp_path / "o.json") == 2


def test_fmax_with_state_angles_and_lp_dump(tmp_path):
    out = tmp_path / "fmax.json"
    code = run(
        "fmax",
        "--settings", DATA / "free_min_settings.json",
        "--state-angles", DATA / "free_min_state_angles.json",
        "--dump-lp",
        "--out", out,
    )
    assert code == 0
    doc = io.read_json(out)
    assert doc["value"] == pytest.approx(0.46521002281101, abs=1e-9)
    assert doc["lp"]["outcome"]["status"] == "feasible-optimal"
    threshold = io.threshold_from_json(doc)
    assert threshold.witness_distribution.violations() == []


def test_inputs_not_modified(tmp_path):
    settings = tmp_path / "s.json"
    shutil.copy(DATA / "canonical_min_settings.json", settings)
    before = settings.read_bytes()
    run("fmax", "--settings", settings, "--psi-canonical", "--out", tmp_path / "o.json")
    assert settings.read_bytes() == before


def test_fmin_tiny_budget(tmp_path):
    assert run("fmin", "--restarts", 1, "--max-iter", 1, "--seed", 3, "--out", tmp_path) == 0
    doc = io.read_json(tmp_path / "fmin.json")
    assert len(doc["per_restart_F"]) == 1
    assert 0 <= doc["best_F"] <= 1
    assert (tmp_path / "best_settings.json").exists()
    assert (tmp_path / "fmin.manifest.json").exists()


def test_fmin_settings_feed_fmax(fmin_run, tmp_path):
    best = io.read_json(fmin_run / "fmin.json")["best_F"]
    out = tmp_path / "fmax.json"
    assert run("fmax", "--settings", fmin_run / "best_settings.json", "--psi-canonical", "--out", out) == 0
    value = io.read_json(out)["value"]
    assert abs(value - best) <= 1e-8
    assert abs(value - F_MIN_REPORTED) <= 2e-3


def test_certificate_above_threshold(fmin_run, tmp_path, capsys):
    out = tmp_path / "cert.json"
    code = run(
        "certificate", "--settings", fmin_run / "best_settings.json",
        "--state", "mixture", "--f", 0.6, "--psi-canonical", "--out", out,
    )
    assert code == 0
    doc = io.read_json(out)
    assert doc["margin"] > 0
    cert = io.certificate_from_json(doc)
    values = lhv.deterministic_tables().reshape(81, 36) @ cert.coefficients.reshape(36)
    assert values.max() <= cert.lhv_bound + 1e-9
    table = np.asarray(doc["table"])
    assert cert.coefficients.reshape(36) @ table.reshape(36) == pytest.approx(cert.quantum_value, abs=1e-12)


def test_certificate_frozen_margin(tmp_path):
    out = tmp_path / "cert.json"
    code = run(
        "certificate", "--settings", DATA / "canonical_min_settings.json",
        "--f", 0.6, "--psi-canonical", "--out", out,
    )
    assert code == 0
    assert io.read_json(out)["margin"] == pytest.approx(FROZEN_MARGIN_AT_06, rel=1e-6)


def test_certificate_below_threshold_exits_3(tmp_path, capsys):
    out = tmp_path / "cert.json"
    for name in ("canonical_min_settings.json", "maxent_settings.json"):
        code = run("certificate", "--settings", DATA / name, "--f", 0.3, "--psi-canonical", "--out", out)
        assert code == 3
        witness = json.loads(capsys.readouterr().out)["witness_distribution"]
        assert abs(sum(witness) - 1) < 1e-9
    assert not out.exists()


def test_certificate_with_psi_file(tmp_path):
    psi = tmp_path / "psi.json"
    io.write_json(psi, {"psi": np.pi / 2, "theta": np.pi / 2, "phi": np.pi / 4, "chi1": 0, "chi2": 0, "chi3": 0})
    out = tmp_path / "cert.json"
    code = run("certificate", "--settings", DATA / "canonical_min_settings.json", "--f", 0.6, "--psi", psi, "--out", out)
    assert code == 0


def test_unnormalized_psi_rejected(tmp_path):
    psi = tmp_path / "psi.json"
    io.write_json(psi, [[1, 0]] * 9)
    code = run("certificate", "--settings", DATA / "canonical_min_settings.json", "--f", 0.6, "--psi", psi, "--out", tmp_path / "c.json")
    assert code == 2
