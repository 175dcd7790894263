import json
import subprocess
import sys

import numpy as np
import pytest

from hambif import bvp as B
from hambif import cli
from hambif import export as X
from hambif import georattle as R
from hambif import systems as S


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, -2.5e-300, 12345678.123456789):
        assert float(X.fmt(v)) == v
    assert X.fmt(np.nan) == "" and X.fmt(True) == "1" and X.fmt(np.int64(3)) == "3"


def test_jsonable_rejects_unknown():
    assert X.jsonable({"a": np.array([1.0, np.inf])}) == {"a": [1.0, None]}
    with pytest.raises(TypeError):
        X.jsonable(object())


def test_empty_diagram_header_only(tmp_path):
    path = X.export(B.BifurcationDiagram(), "csv", tmp_path / "d.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("branch,")


def test_one_ray_locus_one_row(tmp_path):
    sph = S.hypersurface_catalog("sphere")
    loc = R.conjugate_locus(sph, [1.0, 0.0, 0.0], [[1.0, 0.0]], h=0.05)
    lines = X.export(loc, "csv", tmp_path / "l.csv").read_text().splitlines()
    assert len(lines) == 2
    header = lines[0].split(",")
    assert header[:3] == ["ray0", "ray1", "arc"] and header[-3:] == ["corank", "det_residual", "cusp"]


def test_csv_rejects_ragged_rows(tmp_path):
    with pytest.raises(ValueError):
        X.write_csv(tmp_path / "x.csv", ["a", "b"], [[1.0]])


@pytest.mark.parametrize("fmt", ["csv", "json", "svg"])
def test_export_deterministic(tmp_path, fmt):
    b = S.scenario_bvp("example5_fold")
    d = B.sweep(b, None, np.linspace(-0.1, 0.0, 11), np.linspace(-0.5, 0.5, 5))
    a = X.export(d, fmt, tmp_path / f"a.{fmt}").read_bytes()
    c = X.export(d, fmt, tmp_path / f"c.{fmt}").read_bytes()
    assert a == c
    if fmt == "svg":
        assert b"<svg" in a and b">mu0<" in a and b">y0<" in a
    if fmt == "json":
        body = json.loads(a)
        assert body["schema_version"] == X.SCHEMA_VERSION and body["data"]["columns"][0] == "branch"


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        X.export(B.BifurcationDiagram(), "xlsx", tmp_path / "x")


def test_runconfig_validation():
    with pytest.raises(ValueError):
        cli.RunConfig("sweep", steps=0)
    with pytest.raises(ValueError):
        cli.RunConfig("sweep", tau=-1.0)


def run_cli(tmp_path, *args):
    out = tmp_path / "out"
    code = cli.main([*args, "--out", str(out)])
    return code, out


def test_bratu_fold_command(tmp_path, capsys):
    code, out = run_cli(tmp_path, "bratu-fold", "--method", "sv", "--steps", "20", "--format", "json")
    assert code == 0
    res = json.loads((out / "result.json").read_text())["data"]
    assert 3.50 <= res["C_star"] <= 3.52
    man = json.loads((out / "manifest.json").read_text())["data"]
    assert man["config"]["steps"] == 20 and man["tolerances"]["newton_tol"] == B.NEWTON_TOL
    assert sorted(man["outputs"]) == ["bratu_fold.json", "result.json"]
    assert json.loads(capsys.readouterr().out)["C_star"] == res["C_star"]


def test_manifest_reruns_byte_identical(tmp_path):
    code, out = run_cli(tmp_path, "sweep", "--scenario", "example5_fold")
    assert code == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    cfg = json.loads((out / "manifest.json").read_text())["data"]["config"]
    cfg["out_path"] = str(tmp_path / "again")
    cli.run(cli.RunConfig(**cfg))
    again = {p.name: p.read_bytes() for p in (tmp_path / "again").iterdir()}
    assert set(first) == set(again)
    for name in ("sweep.csv", "result.json"):
        assert first[name] == again[name]
    m1, m2 = (json.loads(d["manifest.json"])["data"] for d in (first, again))
    m1["config"].pop("out_path"), m2["config"].pop("out_path")
    assert m1 == m2
    rows = (out / "sweep.csv").read_text().splitlines()[1:]
    for r in rows:
        f = r.split(",")
        assert abs(3 * float(f[2]) ** 2 + float(f[1])) < 1e-8


def test_catastrophe_minus_vertex_at_origin(tmp_path):
    code, out = run_cli(tmp_path, "catastrophe-d4", "--kind", "minus", "--mu4", "0")
    assert code == 0
    v = json.loads((out / "result.json").read_text())["data"]["vertex"]
    assert np.allclose(v["mu"], 0.0, atol=1e-12) and v["jacobian_norm"] < 1e-12


def test_swallowtail_command(tmp_path):
    code, out = run_cli(tmp_path, "swallowtail", "--mu4", "0.24", "--format", "svg")
    assert code == 0
    res = json.loads((out / "result.json").read_text())["data"]
    assert res["max_position_error"] < 1e-4
    assert (out / "swallowtail.svg").exists()


def test_locate_umbilic_command(tmp_path):
    code, out = run_cli(tmp_path, "locate-umbilic", "--scenario", "henon_heiles", "--steps", "10",
                        "--seed", "1.38", "0.0", "1.94")
    assert code == 0
    res = json.loads((out / "result.json").read_text())["data"]
    assert res["corank"] == 2 and res["residual_norm"] < 1e-8


def test_errors_are_machine_readable(tmp_path, capsys):
    code, out = run_cli(tmp_path, "sweep", "--scenario", "no_such_thing")
    assert code == 1
    err = json.loads((out / "error.json").read_text())
    assert set(err) == {"error", "message"}
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1]) == err


def test_usage_errors_exit_2(tmp_path):
    p = subprocess.run([sys.executable, "-m", "hambif.cli", "sweep", "--method", "euler"],
                       capture_output=True, text=True, cwd=tmp_path)
    assert p.returncode == 2
    assert json.loads(p.stderr.strip().splitlines()[-1])["error"] == "usage"


def test_worker_variable(monkeypatch):
    monkeypatch.setenv("HAMBIF_WORKERS", "3")
    assert cli._workers() == 3
    monkeypatch.setenv("HAMBIF_WORKERS", "many")
    with pytest.raises(cli.ConfigError):
        cli._workers()


def test_packaged_scenarios_load():
    for name in ("bratu", "example5_fold", "planar_pitchfork", "henon_heiles", "cyclic_4d",
                 "linear_transformed", "torus_integrable", "henon_heiles_perturbed"):
        sc = cli.resolve_scenario(name)
        assert sc.bvp().tau > 0
