import csv
import json
import math

import pytest

from blowflies.cli import main


def read_csv(path):
    lines = path.read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    rows = list(csv.reader(l for l in lines if not l.startswith("#")))
    return meta, rows[0], rows[1:]


def summary(out):
    return json.loads((out / "summary.json").read_text())


def test_equilibria_h_sweep(tmp_path):
    out = tmp_path / "eq"
    assert main(["equilibria", "--out", str(out), "--workers", "1", "--sweep-max", "1.2"]) == 0
    meta, header, rows = read_csv(out / "equilibria_h.csv")
    assert meta[0].startswith("# blowflies ")
    assert any(m.startswith("# params: p=2 mu=0.1 a=0.1 gamma=1 h=0.8 tau=1") for m in meta)
    assert header[:4] == ["h", "exists", "m_low", "m_high"]
    assert rows[0][1] == "true" and rows[-1][1] == "false"
    s = summary(out)
    assert set(s) >= {"params", "derived", "checks"}
    assert set(s["derived"]) == {"tau_limit", "h_star", "tau_bar", "script_i", "J", "windows"}
    assert s["derived"]["h_star"] == pytest.approx(1.030116, abs=1e-4)
    assert (out / "g_curves.csv").exists() and (out / "equilibria_h.svg").read_text().startswith("<svg")


def test_equilibria_empty_sweep(tmp_path):
    out = tmp_path / "eq"
    assert main(["equilibria", "--out", str(out), "--h", "5", "--sweep", "tau", "--workers", "1"]) == 0
    _, header, rows = read_csv(out / "equilibria_tau.csv")
    col = header.index("exists")
    assert rows and all(r[col] == "false" for r in rows)


def test_equilibria_tau_sweep(tmp_path):
    out = tmp_path / "eq"
    assert main(["equilibria", "--preset", "switching-reconciled", "--sweep", "tau", "--out", str(out)]) == 0
    _, header, rows = read_csv(out / "equilibria_tau.csv")
    taus = [float(r[0]) for r in rows if r[1] == "true"]
    assert max(taus) <= 14.81 + 0.05


def test_stability(tmp_path):
    out = tmp_path / "st"
    assert main(["stability", "--out", str(out), "--workers", "2"]) == 0
    d = summary(out)["derived"]
    assert d["tau_bar"] == pytest.approx(14.81, abs=0.05)
    assert d["script_i"][1] == pytest.approx(13.5696, abs=0.01)
    assert [round(hp["tau_star"], 2) for hp in d["J"]] == pytest.approx([4.53, 11.39], abs=0.02)
    _, header, rows = read_csv(out / "s_curves.csv")
    for r in rows:
        vals = [float(x) for x in r[1:] if x not in ("", "nan")]
        assert all(a > b for a, b in zip(vals, vals[1:]))
    assert (out / "windows.csv").exists() and (out / "hopf_points.csv").exists()


def test_stability_empty_interval(tmp_path):
    out = tmp_path / "st"
    args = ["stability", "--p", "2.5", "--mu", "0.1", "--a", "0.1", "--gamma", "1", "--h", "0", "--tau", "1"]
    assert main(args + ["--out", str(out)]) == 0
    s = summary(out)
    assert s["results"]["verdict"] == "stable for all tau < tau_bar"
    assert s["derived"]["script_i"] is None


def test_simulate_panels_and_determinism(tmp_path):
    args = ["simulate", "--taus", "4,4.7,11,11.8", "--workers", "2"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "1"]) == 0
    kinds = [r["kind"] for r in summary(a)["results"]["runs"]]
    assert kinds == ["converged", "periodic", "periodic", "converged"]
    for tag in ("4", "4.7", "11", "11.8"):
        pa, pb = a / f"trajectory_tau_{tag}.csv", b / f"trajectory_tau_{tag}.csv"
        assert pa.read_bytes() == pb.read_bytes()
    meta, header, _ = read_csv(a / "trajectory_tau_4.csv")
    assert header == ["t", "M"]
    assert any(m.startswith("# solver:") and "steps_per_delay=256" in m for m in meta)


def test_simulate_threshold_history(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--preset", "two-equilibria", "--history", "threshold", "--out", str(out)]) == 0
    run = summary(out)["results"]["runs"][0]
    assert run["kind"] == "negative"


def test_simulate_small_delay(tmp_path):
    out = tmp_path / "sim"
    args = ["simulate", "--p", "2", "--mu", "0.1", "--a", "0.1", "--gamma", "1", "--h", "0", "--tau", "0.1"]
    assert main(args + ["--history", "constant", "--c0", "3", "--out", str(out)]) == 0
    run = summary(out)["results"]["runs"][0]
    assert run["kind"] == "converged"
    assert run["limit"] == pytest.approx(10 * (math.log(2) - 0.01), abs=1e-3)


def test_hopf_probe(tmp_path):
    out = tmp_path / "hp"
    assert main(["hopf-probe", "--epsilon", "0.2,0.3", "--out", str(out), "--workers", "2"]) == 0
    probes = summary(out)["results"]["probes"]
    assert [(p["direction"], p["periodic_orbit_stable"]) for p in probes] == [("forward", True), ("backward", True)]
    _, header, rows = read_csv(out / "hopf_probe.csv")
    assert len(rows) == 2 and "sqrt_ratio" in header


def test_hopf_probe_harvest_free(tmp_path):
    out = tmp_path / "hp"
    assert main(["hopf-probe", "--preset", "harvest-free", "--epsilon", "0.2", "--out", str(out)]) == 0
    first = summary(out)["results"]["probes"][0]
    assert (first["direction"], first["periodic_orbit_stable"]) == ("forward", True)


def test_hopf_probe_epsilon_too_large(tmp_path, capsys):
    assert main(["hopf-probe", "--epsilon", "5", "--out", str(tmp_path / "hp")]) == 2
    assert "too large" in capsys.readouterr().err


def test_hopf_probe_without_hopf_points(tmp_path):
    assert main(["hopf-probe", "--preset", "switching", "--out", str(tmp_path / "hp")]) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# two-equilibria set, different harvest\np = 2\nmu = 0.1\na = 0.1\ngamma = 1\nh = 0.5\ntau = 1\nsweep-max = 1.0\n")
    out = tmp_path / "eq"
    assert main(["equilibria", "--preset", "switching", "--config", str(cfg), "--h", "0.6", "--out", str(out)]) == 0
    params = summary(out)["params"]
    assert params["p"] == 2 and params["h"] == 0.6


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("p 2\n")
    assert main(["equilibria", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    bad.write_text("colour = red\n")
    assert main(["equilibria", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["equilibria", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "o")]) == 2


def test_invalid_input_exit_codes(tmp_path):
    out = str(tmp_path / "o")
    assert main(["stability", "--p", "-1", "--out", out]) == 2
    assert main(["stability", "--h", "50", "--out", out]) == 2
    assert main(["simulate", "--steps-per-delay", "8", "--out", out]) == 2
    assert main(["equilibria", "--points", "1", "--out", out]) == 2
    assert main(["equilibria", "--workers", "0", "--out", out]) == 2
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--taus", "4,x"])
    assert info.value.code == 2


def test_report(tmp_path):
    out = tmp_path / "rep"
    code = main(["report", "--out", str(out), "--workers", "2"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert code == manifest["exit_code"]
    checks = {(c["preset"], c["name"]): c for c in manifest["checks"]}
    assert checks[("two-equilibria", "critical harvest h_star")]["status"] == "pass"
    assert checks[("switching-reconciled", "Hopf set J with crossings")]["status"] == "pass"
    assert checks[("switching", "tau_limit = ln(p/gamma)/mu")]["status"] == "deviation"
    assert all(c["status"] != "fail" for c in manifest["checks"] if c["preset"] != "switching")
    # the printed switching parameters do not reproduce the published numbers
    assert checks[("switching", "tau_bar")]["status"] == "fail"
    assert code == 1


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    from blowflies import ConvergenceError, cli

    def boom(config):
        raise ConvergenceError("no convergence")

    monkeypatch.setitem(cli.COMMANDS, "stability", boom)
    assert main(["stability", "--out", str(tmp_path / "o")]) == 3
