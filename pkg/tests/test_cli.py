import csv
import json

import numpy as np
import pytest

from hermann.cli import ConfigError, main, parse_angle, parse_vector

PI = np.pi


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "text,value",
    [("pi/8", PI / 8), ("3*pi/4", 3 * PI / 4), ("-2pi/3", -2 * PI / 3), ("0.25", 0.25), ("1/3", 1 / 3), ("pi", PI)],
)
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, abs=1e-15)


@pytest.mark.parametrize("text", ["", "pie/8", "pi/0", "abc", "1,2"])
def test_parse_angle_rejects(text):
    with pytest.raises(ConfigError):
        parse_angle(text)


def test_parse_vector_broadcast_and_length():
    assert np.allclose(parse_vector("pi/8", 3, "w"), PI / 8)
    with pytest.raises(ConfigError, match="w: expected 2"):
        parse_vector("1,2,3", 2, "w")


def test_analyze_su_pq(tmp_path, capsys):
    code, out, _ = _run(capsys, "analyze", "--entry", "su_pq_so", "--param", "p=3", "--param", "q=2",
                        "--w", "pi/8", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out) == {"austere_finite": False, "austere_pf": True, "minimal": True, "totally_geodesic": False}
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["austere_pf"] is True and report["austere_finite"] is False
    assert report["root_system"]["schema"] == 1
    pf = json.loads((tmp_path / "pf_spectrum.json").read_text())
    assert pf["families"] and pf["schema"] == 1
    rows = list(csv.reader(open(tmp_path / "finite_spectrum.csv")))
    assert rows[0] == ["value", "multiplicity"] and len(rows) > 1


def test_analyze_json_format(tmp_path, capsys):
    code, _, _ = _run(capsys, "analyze", "--entry", "su_pq_so", "--w", "pi/8", "--format", "json", "--out", str(tmp_path))
    assert code == 0
    rows = json.loads((tmp_path / "finite_spectrum.json").read_text())
    assert all(set(r) == {"value", "multiplicity"} for r in rows)


def test_analyze_sigma_eq_tau_origin(tmp_path, capsys):
    code, out, _ = _run(capsys, "analyze", "--entry", "sigma_eq_tau", "--w", "0", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["totally_geodesic"] is True


def test_analyze_named_point(tmp_path, capsys):
    code, out, _ = _run(capsys, "analyze", "--entry", "su_pq_so", "--param", "p=3", "--param", "q=1",
                        "--w", "named:counterexample", "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["austere_pf"] is False


@pytest.mark.parametrize("w", ["pie/8", "1,2,3"])
def test_malformed_w_exit_2(tmp_path, capsys, w):
    code, _, err = _run(capsys, "analyze", "--entry", "su_pq_so", "--w", w, "--out", str(tmp_path))
    assert code == 2
    assert "w:" in err


def test_unknown_entry_exit_2(tmp_path, capsys):
    code, _, err = _run(capsys, "analyze", "--entry", "bogus", "--w", "0", "--out", str(tmp_path))
    assert code == 2 and "entry" in err


def test_bad_params_exit_2(tmp_path, capsys):
    code, _, err = _run(capsys, "analyze", "--entry", "su_pq_so", "--param", "p=1", "--param", "q=1",
                        "--w", "0", "--out", str(tmp_path))
    assert code == 2 and "params" in err


def test_guard_band_point_exit_2(tmp_path, capsys):
    code, _, err = _run(capsys, "analyze", "--entry", "su_pq_so", "--w", str(PI / 2 + 5e-9),
                        "--out", str(tmp_path))
    assert code == 2 and "PhaseAmbiguityError" in err


def test_verify_exit_0(tmp_path, capsys):
    code, out, _ = _run(capsys, "verify", "--entry", "su_pq_so", "--param", "p=3", "--param", "q=2",
                        "--grid", "200", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    assert summary["violations"] == 0 and summary["samples"] >= 200 and summary["counterexamples"] > 0
    rows = list(csv.reader(open(tmp_path / "counterexamples.csv")))
    assert rows[0] == ["w1", "w2", "minimal", "austere_finite", "austere_pf"]
    assert len(rows) - 1 == summary["counterexamples"]


def test_verify_sigma_eq_tau(tmp_path, capsys):
    code, out, _ = _run(capsys, "verify", "--entry", "sigma_eq_tau", "--grid", "50", "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["counterexamples"] == 0


def test_verify_corrupt_exit_1(tmp_path, capsys):
    # index 4 is 2e_1 for (3,2); m(2e_1) = 3 exceeds m(e_1) = 2
    code, _, err = _run(capsys, "verify", "--entry", "su_pq_so", "--param", "p=3", "--param", "q=2",
                        "--grid", "16", "--corrupt-multiplicity", "4=3", "--out", str(tmp_path))
    assert code == 1 and "lemma_multiplicity" in err


def test_verify_axis_grid(tmp_path, capsys):
    code, out, _ = _run(capsys, "verify", "--entry", "su_pq_so", "--grid", "0:pi:64", "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["samples"] >= 60


def test_verify_bad_grid(tmp_path, capsys):
    code, _, err = _run(capsys, "verify", "--entry", "su_pq_so", "--grid", "1:2", "--out", str(tmp_path))
    assert code == 2 and "grid" in err


def test_truncate_table(tmp_path, capsys):
    code, out, _ = _run(capsys, "truncate", "--entry", "su_pq_so", "--w", "pi/8", "--N", "50,100,200",
                        "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "convergence.csv")))
    blocks = {}
    for r in rows:
        blocks.setdefault(r["block"], []).append(float(r["max_deviation"]))
        assert float(r["symmetrization_defect"]) < 1e-12
    assert len(blocks) == 3
    for devs in blocks.values():
        assert all(a > b for a, b in zip(devs, devs[1:]))


def test_truncate_perp_exact(tmp_path, capsys):
    code, _, _ = _run(capsys, "truncate", "--entry", "su_pq_so", "--w", "0", "--N", "20,80", "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "convergence.csv")))
    perp = [r for r in rows if r["kind"] == "perp"]
    assert perp and all(float(r["max_deviation"]) < 1e-12 for r in perp)


@pytest.mark.parametrize("n", ["0", "-3", "a"])
def test_truncate_bad_n(tmp_path, capsys, n):
    code, _, err = _run(capsys, "truncate", "--entry", "su_pq_so", "--N", n, "--out", str(tmp_path))
    assert code == 2 and "N" in err


def test_catalog_list(capsys):
    code, out, _ = _run(capsys, "catalog")
    assert code == 0
    assert "su_pq_so" in [d["name"] for d in json.loads(out)]


def test_catalog_export(tmp_path, capsys):
    code, out, _ = _run(capsys, "catalog", "--entry", "su_pq_so", "--param", "p=4", "--param", "q=2",
                        "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["mismatches"] == 0
    body = json.loads((tmp_path / "catalog_su_pq_so.json").read_text())
    assert body["dims"]["dim_g"] == 35


def test_env_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HERMANN_OUTPUT_DIR", str(tmp_path / "envout"))
    code, _, _ = _run(capsys, "analyze", "--entry", "su_pq_so", "--w", "pi/8")
    assert code == 0
    assert (tmp_path / "envout" / "report.json").exists()


def test_yaml_config_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("entry: su_pq_so\nparams:\n  p: 3\n  q: 1\nw: pi/8\ntol: 1.0e-9\n")
    code, out, _ = _run(capsys, "analyze", "--config", str(cfg), "--out", str(tmp_path / "a"))
    assert code == 0 and json.loads(out)["austere_pf"] is False
    code, out, _ = _run(capsys, "analyze", "--config", str(cfg), "--param", "p=2", "--out", str(tmp_path / "b"))
    assert code == 0 and json.loads(out)["austere_pf"] is True


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("- a\n- b\n")
    code, _, err = _run(capsys, "analyze", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 2 and "config" in err
    code, _, err = _run(capsys, "analyze", "--config", str(tmp_path / "missing.yaml"))
    assert code == 2


def test_bad_tol(tmp_path, capsys):
    code, _, err = _run(capsys, "analyze", "--entry", "su_pq_so", "--w", "0", "--tol", "-1", "--out", str(tmp_path))
    assert code == 2 and "tol" in err


def test_deterministic_outputs(tmp_path, capsys):
    for sub in ("a", "b"):
        assert main(["analyze", "--entry", "su_pq_so", "--param", "p=3", "--param", "q=2", "--w", "pi/8",
                     "--out", str(tmp_path / sub)]) == 0
        assert main(["verify", "--entry", "su_pq_so", "--grid", "64", "--samples", "20", "--seed", "5",
                     "--out", str(tmp_path / sub)]) == 0
    capsys.readouterr()
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
