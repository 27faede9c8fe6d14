"""Command-line interface: outputs, manifests, determinism, exit codes."""

import json
import math

import numpy as np
import pytest

from epchain.cli import main


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestSpectrumCommand:
    def test_sweep_with_transitions(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "c.json", {
            "n": 2, "g": 1.0, "J": 1.0, "eta": 0.2,
            "sweep": {"axis": "g", "start": 0.5, "stop": 1.5, "steps": 21},
        })
        out = tmp_path / "spec.csv"
        assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert header[:4] == ["index", "g", "region", "boundary"]
        assert len(rows) == 21
        manifest = json.loads((tmp_path / "spec.csv.manifest.json").read_text())
        assert manifest["tool"] == "epchain"
        transitions = manifest["extras"]["transitions"]
        assert len(transitions) == 2
        assert transitions[0] == pytest.approx(0.8, abs=1e-5)
        assert transitions[1] == pytest.approx(1.2, abs=1e-5)
        regions = [r[2] for r in rows]
        assert regions[0] == "purely_imaginary"
        assert regions[-1] == "purely_real"
        assert "mixed" in regions

    def test_single_point_no_eps(self, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"n": 2, "g": 2.0, "J": 1.0})
        out = tmp_path / "point.csv"
        assert main(["spectrum", "--config", cfg, "--out", str(out), "--detect-eps"]) == 0
        manifest = json.loads((tmp_path / "point.csv.manifest.json").read_text())
        assert manifest["extras"]["exceptional_points"] == []
        _, rows = read_csv(out)
        assert rows[0][1] == "purely_real"

    def test_malformed_json_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["spectrum", "--config", str(bad)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_key_exits_2(self, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"n": 2, "bogus": 1})
        assert main(["spectrum", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2

    def test_missing_config_exits_2(self):
        assert main(["spectrum"]) == 2

    def test_rank_ambiguity_exits_3(self, tmp_path, capsys):
        # a huge rank tolerance lands singular values inside the undecidable
        # window, which must surface as a numeric failure
        cfg = write_json(tmp_path / "c.json", {"n": 2, "g": 1.0, "J": 1.0})
        code = main(["spectrum", "--config", cfg, "--out", str(tmp_path / "x.csv"),
                     "--detect-eps", "--tol", "0.3"])
        assert code == 3
        assert "RankAmbiguity" in capsys.readouterr().err


class TestEntangleCommand:
    def run(self, tmp_path, g, times=None):
        cfg = write_json(tmp_path / f"e{g}.json", {
            "n": 2, "g": g, "J": 1.0, "eta": 0.2,
            "times": times or {"start": 0.0, "stop": 5.0, "steps": 26},
        })
        out = tmp_path / f"ent{g}.csv"
        code = main(["entangle", "--config", cfg, "--out", str(out), "--partition", "1|2"])
        assert code == 0
        _, rows = read_csv(out)
        return rows

    def test_decaying_region(self, tmp_path):
        rows = self.run(tmp_path, 0.79)
        nus = [float(r[1]) for r in rows]
        assert all(b < a for a, b in zip(nus[1:], nus[2:]))

    def test_oscillatory_region(self, tmp_path):
        rows = self.run(tmp_path, 1.59)
        nus = np.array([float(r[1]) for r in rows])
        assert nus.min() > 0.05  # bounded away from full decay
        diffs = np.diff(nus)
        assert (diffs > 0).any() and (diffs < 0).any()

    def test_mixed_region_decays_overall(self, tmp_path):
        rows = self.run(tmp_path, 1.19)
        nus = [float(r[1]) for r in rows]
        assert nus[-1] < nus[1]

    def test_include_cm_columns(self, tmp_path):
        cfg = write_json(tmp_path / "cm.json", {
            "n": 2, "g": 0.5, "J": 1.0, "times": [0.0, 1.0],
        })
        out = tmp_path / "cm.csv"
        assert main(["entangle", "--config", cfg, "--out", str(out), "--include-cm"]) == 0
        header, rows = read_csv(out)
        assert "cm_1_1" in header and "cm_4_4" in header
        assert len(header) == 1 + 2 + 10  # t, two metrics, upper triangle of 4x4

    def test_overflow_truncates_with_warning_row(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "o.json", {
            "n": 2, "eta": 5.0, "times": [0.0, 25.0, 50.0, 75.0, 100.0],
        })
        out = tmp_path / "o.csv"
        assert main(["entangle", "--config", cfg, "--out", str(out)]) == 0
        text = out.read_text()
        assert "warning: truncated at t=75" in text
        assert "overflow" in capsys.readouterr().err.lower()
        manifest = json.loads((tmp_path / "o.csv.manifest.json").read_text())
        assert manifest["extras"]["truncated_at"] == 75.0


class TestFigureCommands:
    def test_fig2_small_grid(self, tmp_path):
        out = tmp_path / "fig2.csv"
        code = main(["fig2", "--g-steps", "5", "--t-steps", "5", "--out", str(out),
                     "--threads", "1"])
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["g", "t", "region", "nu_minus", "log_negativity"]
        assert len(rows) == 25
        manifest = json.loads((tmp_path / "fig2.csv.manifest.json").read_text())
        assert manifest["extras"]["transitions"] == pytest.approx([0.8, 1.2], abs=1e-5)

    def test_fig2_threads_do_not_change_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["fig2", "--g-steps", "4", "--t-steps", "4", "--out", str(a), "--threads", "1"])
        main(["fig2", "--g-steps", "4", "--t-steps", "4", "--out", str(b), "--threads", "2"])
        assert a.read_bytes() == b.read_bytes()

    def test_fig3_tables_and_fit(self, tmp_path, capsys):
        out = tmp_path / "fig3.csv"
        code = main(["fig3", "--ns", "2,3", "--phi-steps", "5", "--fit-max-n", "6",
                     "--t", "3.5", "--out", str(out)])
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["N", "phi", "nu_minus", "neg_log_nu"]
        two_mode = [float(r[2]) for r in rows if r[0] == "2"]
        assert max(two_mode) - min(two_mode) <= 1e-9  # flat in phase
        ratio_path = tmp_path / "fig3_ratio.csv"
        rheader, rrows = read_csv(ratio_path)
        assert rheader == ["N", "t", "ratio"]
        manifest = json.loads((tmp_path / "fig3.csv.manifest.json").read_text())
        fit = manifest["extras"]["ratio_fit"]
        assert fit["c"] == pytest.approx(2.5, abs=0.3)
        assert manifest["extras"]["phi_symmetry_residual"] <= 1e-9

    def test_fig4_grid_and_arc(self, tmp_path):
        out = tmp_path / "fig4.csv"
        code = main(["fig4", "--g-steps", "5", "--arc-steps", "5", "--out", str(out),
                     "--threads", "1"])
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["g1", "g2", "region", "nu_minus_13|2"]
        inside = [r for r in rows if float(r[0]) ** 2 + float(r[1]) ** 2 < 1.9
                  and float(r[0]) > 0 and float(r[1]) > 0]
        assert inside and all(r[2] == "purely_imaginary" for r in inside)
        assert all(float(r[3]) < 0.01 for r in inside)  # decayed at Jt = 5
        outside = [r for r in rows if float(r[0]) ** 2 + float(r[1]) ** 2 > 2.1]
        assert outside and all(float(r[3]) > 0.01 for r in outside)
        aheader, arows = read_csv(tmp_path / "fig4_arc.csv")
        assert aheader == ["varphi", "g1", "g2", "nu_minus_13|2", "nu_closed_form"]
        for row in arows:
            assert float(row[3]) == pytest.approx(float(row[4]), abs=1e-6)

    def test_json_format(self, tmp_path):
        out = tmp_path / "fig3.json"
        code = main(["fig3", "--ns", "2", "--phi-steps", "3", "--fit-max-n", "4",
                     "--out", str(out), "--format", "json"])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["columns"] == ["N", "phi", "nu_minus", "neg_log_nu"]
        assert len(payload["rows"]) == 3


class TestEsScanCommand:
    def test_arc_point_row(self, tmp_path):
        cfg = write_json(tmp_path / "es.json", {
            "g1": [1.0, 1.0, 1], "g2": [1.0, 1.0, 1],
            "J1": [1.0, 1.0, 1], "J2": [1.0, 1.0, 1],
        })
        out = tmp_path / "es.csv"
        assert main(["es-scan", "--config", cfg, "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert header == ["g1", "g2", "J1", "J2", "residual", "on_surface",
                          "ep_order", "block_sizes"]
        assert rows[0][5] == "true"
        assert rows[0][6] == "2"
        assert rows[0][7] == "2+2+1+1"

    def test_default_grid(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["es-scan"]) == 0
        assert (tmp_path / "es_scan.csv").exists()


class TestSelftestCommand:
    def test_passes_by_default(self, capsys):
        assert main(["selftest", "--draws", "8"]) == 0
        out = capsys.readouterr().out
        assert "checks passed" in out
        assert "FAIL" not in out

    def test_injected_fault_fails(self, capsys):
        assert main(["selftest", "--draws", "8", "--inject-fault", "omega"]) == 1
        out = capsys.readouterr().out
        assert "FAIL  propagator_symplectic" in out

    def test_tolerance_override_propagates(self, capsys):
        # impossibly tight thresholds must flip checks to FAIL
        assert main(["selftest", "--draws", "8", "--tol", "1e-30"]) == 1


def test_determinism_identical_config(tmp_path):
    cfg = write_json(tmp_path / "c.json", {
        "n": 2, "g": 1.0, "J": 1.0, "eta": 0.2,
        "sweep": {"axis": "g", "start": 0.5, "stop": 1.5, "steps": 11},
    })
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["spectrum", "--config", cfg, "--out", str(a)])
    main(["spectrum", "--config", cfg, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_float_formatting_17_digits(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"n": 2, "g": 0.0, "J": 1.0, "times": [1.0]})
    out = tmp_path / "t.csv"
    main(["entangle", "--config", cfg, "--out", str(out)])
    _, rows = read_csv(out)
    # e^{-2} printed at full precision round-trips exactly
    assert float(rows[0][1]) == pytest.approx(math.exp(-2.0), abs=1e-9)
    assert len(rows[0][1].split(".")[-1]) >= 15
