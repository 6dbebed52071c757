import json

import pytest

from gprates.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_family_info_burr(capsys):
    code, out, _ = run_cli(capsys, "family-info", "--family", "burr:c=2,k=1")
    assert code == 0
    info = json.loads(out)
    assert info["gamma"] == pytest.approx(0.5)
    assert info["rho"] == pytest.approx(-1.0)
    assert info["xstar"] == "inf"
    assert not info["degenerate_rate"]


def test_family_info_gumbel(capsys):
    code, out, _ = run_cli(capsys, "family-info", "--family", "gumbel")
    info = json.loads(out)
    assert code == 0 and info["gamma"] == 0.0 and info["rho"] == -1.0


def test_family_info_degenerate_gp(capsys):
    code, out, _ = run_cli(capsys, "family-info", "--family", "gp:gamma=-1")
    info = json.loads(out)
    assert code == 0 and info["degenerate_rate"] is True
    assert info["xstar"] == pytest.approx(1.0)


def test_family_info_bad_spec_exits_2(capsys):
    code, _, err = run_cli(capsys, "family-info", "--family", "weibull:k=2")
    assert code == 2 and "unknown family" in err


def test_unknown_command_exits_2(capsys):
    assert main(["frobnicate"]) == 2


def test_distance_exact_gp_panel_is_zero(capsys):
    code, out, _ = run_cli(capsys, "distance", "--family", "gp:gamma=0.5",
                           "--v", "1e4")
    assert code == 0
    panel = json.loads(out)["grid"][0]["metrics"]
    for key in ("H2", "TV", "KL", "D2", "D3"):
        assert abs(panel[key]) <= 1e-12


def test_distance_burr_panel(capsys):
    code, out, _ = run_cli(capsys, "distance", "--family", "burr:c=2,k=1",
                           "--v", "1e4", "--metrics", "h2,tv")
    assert code == 0
    doc = json.loads(out)
    point = doc["grid"][0]
    assert point["metrics"]["H2"] > 0.0
    assert point["metrics"]["KL"] is None
    assert point["abs_A"] == pytest.approx(5.000500050005e-05, rel=1e-9)


def test_distance_rejects_bad_metric(capsys):
    code, _, err = run_cli(capsys, "distance", "--family", "burr:c=2,k=1",
                           "--v", "100", "--metrics", "h2,frobnitz")
    assert code == 2


def test_sweep_csv_deterministic(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    args = ["sweep", "--family", "burr:c=2,k=1", "--v-grid", "1e2:1e4:log:5",
            "--metrics", "h2,tv", "--format", "csv", "--jobs", "1",
            "--seed", "7"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header = out1.read_text().splitlines()[0]
    assert header.startswith("v,t,s_t,c_t,abs_A,H2,H,TV,KL,D2,D3,ratio_sup")
    assert (set(tmp_path.iterdir()) == {out1, out2})


def test_sweep_degenerate_family_exits_3(capsys):
    code, _, err = run_cli(capsys, "sweep", "--family", "gp:gamma=1",
                           "--v-grid", "1e2:1e6:log:5")
    assert code == 3 and "A identically zero" in err


def test_sweep_bad_grid_exits_2(capsys):
    code, _, _ = run_cli(capsys, "sweep", "--family", "burr:c=2,k=1",
                         "--v-grid", "1e2:1e6:cubic:5")
    assert code == 2


def test_sweep_json_contains_fits(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--family", "burr:c=2,k=1",
                           "--v-grid", "1e2:1e6:log:5", "--metrics", "h2",
                           "--format", "json", "--jobs", "1")
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["fitted"]["h"]["slope"] - 1.0) < 0.1
    assert doc["grid"][0]["status"] == "ok"


def test_mc_check_deterministic(capsys):
    args = ["mc-check", "--family", "burr:c=2,k=1", "--v", "1e3",
            "--n", "20000", "--seed", "3"]
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0 and out1 == out2
    doc = json.loads(out1)
    assert doc["h2"]["z"] <= 5.0 and doc["tv"]["z"] <= 5.0


def test_verify_unknown_suite_exits_2(capsys):
    assert main(["verify", "everything"]) == 2


def test_verify_core_passes(tmp_path, capsys):
    code = main(["verify", "core", "--jobs", "1", "--out", str(tmp_path / "art")])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("PASS") >= 3
    verdicts = json.loads((tmp_path / "art" / "verdicts.json").read_text())
    assert all(v["passed"] for v in verdicts)
    assert (tmp_path / "art" / "mc_checks.json").exists()
