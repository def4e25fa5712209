"""End-to-end tests of the command-line interface."""

import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from ionsense import params
from ionsense.cli import main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    assert rows[-1][0] == "max_abs_deviation"
    data = np.array([[float(v) for v in r] for r in rows[1:-1]])
    summary = np.array([float(v) for v in rows[-1][1:]])
    return header, data, summary


def test_fig2_outputs(tmp_path):
    rc = main(["fig2", "--out", str(tmp_path), "--times", "0:180:40"])
    assert rc == 0
    header, data, summary = read_csv(tmp_path / "fig2.csv")
    assert header == ["t", "p_minus1_numeric", "p_0_numeric", "p_1_numeric",
                      "p_minus1_analytic", "p_0_analytic", "p_1_analytic"]
    # t = 0 row: numeric = analytic = (0, 1, 0)
    np.testing.assert_allclose(data[0, 1:], [0, 1, 0, 0, 1, 0], atol=1e-12)
    assert np.max(summary) <= 0.02
    manifest = json.loads((tmp_path / "fig2_manifest.json").read_text())
    assert manifest["command"] == "fig2"
    assert str(tmp_path / "fig2.csv") in manifest["outputs"]


def period_of_ground_population(data):
    """First full revival time of the numeric ground-state trace."""
    t, p0 = data[:, 0], data[:, 2]
    dips = np.where((p0[1:-1] < p0[:-2]) & (p0[1:-1] < p0[2:]))[0] + 1
    return 2 * t[dips[0]]  # first minimum sits at half the period


def test_fig2_halving_g_doubles_period(tmp_path, monkeypatch):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    cfg = json.loads((CONFIG_DIR / "fig2.json").read_text())
    cfg["run"]["n_max"] = 8
    (tmp_path / "full.json").write_text(json.dumps(cfg))
    cfg_half = json.loads(json.dumps(cfg))
    cfg_half["drive"]["g"] = cfg["drive"]["g"] / 2
    (tmp_path / "half.json").write_text(json.dumps(cfg_half))
    assert main(["fig2", "--config", str(tmp_path / "full.json"),
                 "--out", str(out_a), "--times", "0:400:801"]) == 0
    assert main(["fig2", "--config", str(tmp_path / "half.json"),
                 "--out", str(out_b), "--times", "0:400:801"]) == 0
    _, data_a, _ = read_csv(out_a / "fig2.csv")
    _, data_b, _ = read_csv(out_b / "fig2.csv")
    ratio = period_of_ground_population(data_b) / period_of_ground_population(data_a)
    assert ratio == pytest.approx(2.0, rel=0.05)


def test_fig4_outputs(tmp_path):
    rc = main(["fig4", "--out", str(tmp_path), "--nmax", "6", "--times", "0:99:30"])
    assert rc == 0
    header, data, summary = read_csv(tmp_path / "fig4.csv")
    assert len(header) == 11
    # row sums of both column groups
    np.testing.assert_allclose(data[:, 1:6].sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(data[:, 6:11].sum(axis=1), 1.0, atol=1e-9)
    assert np.max(summary) <= 0.02


def test_fig4_population_ratio_tracks_phase(tmp_path):
    rc = main(["fig4", "--out", str(tmp_path), "--nmax", "6", "--times", "0:99:40"])
    assert rc == 0
    _, data, _ = read_csv(tmp_path / "fig4.csv")
    ip = params.fig4_defaults().internal()
    phi_plus = ip.xi + ip.phi
    expect = math.cos(phi_plus) ** 2
    # columns: p_minus2, p_minus1, p_0, p_1, p_2 (numeric)
    p2 = data[:, 5]
    pm2 = data[:, 1]
    total = p2 + pm2  # = sin^2(2 Omega t) / 2 up to corrections
    mask = total > 0.2
    ratios = p2[mask] / total[mask]
    # the ratio amplifies the O((g/omega)^2) elimination error by 1/total
    np.testing.assert_allclose(ratios, expect, atol=0.05)


def test_wrong_protocol_is_config_error(tmp_path):
    rc = main(["fig2", "--config", str(CONFIG_DIR / "fig4.json"), "--out", str(tmp_path)])
    assert rc == 2


def test_invalid_config_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"protocol": {"kind": "lambda"},
                               "drive": {"g": 1.0, "omega": 0.0, "xi": 0, "F": 1e-23}}))
    assert main(["fig2", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_fisher_report_lambda(tmp_path):
    rc = main(["fisher", "--out", str(tmp_path)])
    assert rc == 0
    rep = json.loads((tmp_path / "fisher_report.json").read_text())
    assert rep["cfi_minus_qfi_max"] <= 1e-8
    assert rep["weak_commutativity_max"] <= 1e-10
    assert rep["si_bounds"]["chart"] == ["F", "xi"]
    assert rep["si_bounds"]["uncertainties"][0] < 1e-21  # yoctonewton scale


def test_fisher_report_fourpod(tmp_path):
    rc = main(["fisher", "--config", str(CONFIG_DIR / "fig4.json"), "--out", str(tmp_path)])
    assert rc == 0
    rep = json.loads((tmp_path / "fisher_report.json").read_text())
    qfi = np.array(rep["qfi"])
    offdiag = qfi - np.diag(np.diag(qfi))
    assert np.max(np.abs(offdiag)) <= 1e-10
    assert rep["delta_xi_equals_delta_phi"]
    crb_diag = rep["crb_diagonal"]
    assert abs(crb_diag[1] - crb_diag[2]) <= 1e-10 * crb_diag[1]


def test_fisher_singular_exit_code(tmp_path):
    # pulse area pi makes sin^2 vanish: no phase information
    rc = main(["fisher", "--out", str(tmp_path), "--area-fraction", "1.0"])
    assert rc == 3


def test_estimate_small_run_and_determinism(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    args = ["estimate", "--config", str(CONFIG_DIR / "fig2.json"),
            "--nu", "2000", "--replications", "25", "--area-fraction", "0.45"]
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    rep_a = (out_a / "estimate_report.json").read_bytes()
    rep_b = (out_b / "estimate_report.json").read_bytes()
    assert rep_a == rep_b
    rep = json.loads(rep_a)
    assert rep["replications"] == 25
    assert not rep["insufficient_replications"]


def test_estimate_single_replication(tmp_path):
    rc = main(["estimate", "--out", str(tmp_path), "--nu", "500", "--replications", "1"])
    assert rc == 0
    rep = json.loads((tmp_path / "estimate_report.json").read_text())
    assert rep["insufficient_replications"]


def test_manifest_written_last_and_lists_outputs(tmp_path):
    assert main(["fig2", "--out", str(tmp_path), "--times", "0:10:5", "--nmax", "4"]) == 0
    manifest = json.loads((tmp_path / "fig2_manifest.json").read_text())
    for output in manifest["outputs"]:
        assert Path(output).exists()
    assert manifest["config"]["run"]["n_max"] == 4  # flag override echoed
