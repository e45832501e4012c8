import csv
import json

import pytest

from csrp.cli import build_report, main
from csrp.config import build_lie, build_spec, config_hash, load_document, resolve
from csrp.covariance import build_bose_model
from csrp.errors import ConfigParseError
from csrp.wick import BoseFields


def write(path, text):
    path.write_text(text)
    return str(path)


def _fields(cfg):
    lie = build_lie(cfg)
    model = build_bose_model(build_spec(cfg, lie), cfg["model"]["null_modes"], cfg["model"]["seed"])
    return BoseFields(model, lie.dim)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def cfg(tmp_path):
    return write(tmp_path / "exp.toml", '[splitting]\ngenus = 1\n[lie_algebra]\npreset = "su2"\n[fock]\nd = 2\n')


def test_validate_writes_manifest(tmp_path, cfg):
    out = tmp_path / "run" / "validate.json"
    assert main(["validate", "--config", cfg, "--out", str(out)]) == 0
    manifest = json.loads((out.parent / "manifest.json").read_text())
    assert manifest["schema_version"] == 1 and manifest["passed"]
    assert manifest["checks"] and all(set(c) >= {"name", "residual", "tolerance", "pass", "report"}
                                      for c in manifest["checks"])
    assert json.loads(out.read_text())["passed"]


def test_partition_free_case_and_report(tmp_path, cfg):
    out = tmp_path / "run" / "z.csv"
    assert main(["partition", "--config", cfg, "--lambda", "0", "--n-max", "8", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [r["n"] for r in rows] == ["1", "2", "4", "8"]
    assert all(float(r["re_z"]) == 1.0 and float(r["im_z"]) == 0.0 for r in rows)
    assert len({r["config_hash"] for r in rows}) == 1 and rows[0]["config_hash"]
    assert all(r["wall_ms"] == "" for r in rows)
    assert main(["report", str(out.parent)]) == 0
    for name in ("summary.txt", "cauchy.dat", "z_profile.dat"):
        assert (out.parent / name).is_file()
    assert build_report(out.parent) == build_report(out.parent)


def test_timing_flag_fills_wall_clock(tmp_path, cfg):
    out = tmp_path / "z.csv"
    assert main(["partition", "--config", cfg, "--n-max", "2", "--no-direct", "--timing", "--out", str(out)]) == 0
    assert all(float(r["wall_ms"]) >= 0 for r in read_rows(out))


def test_config_errors_exit_two(tmp_path):
    missing = write(tmp_path / "a.toml", "[fock]\nd = 2\n")
    assert main(["validate", "--config", missing]) == 2
    unknown = write(tmp_path / "b.toml", "[splitting]\ngenus = 1\ncolour = 3\n")
    assert main(["validate", "--config", unknown]) == 2
    broken = write(tmp_path / "c.toml", "[splitting\n")
    assert main(["validate", "--config", broken]) == 2
    assert main(["validate", "--config", str(tmp_path / "absent.toml")]) == 2


def test_report_without_manifest_exits_three(tmp_path):
    assert main(["report", str(tmp_path)]) == 3


def test_phi_and_psi_from_json(tmp_path, cfg, capsys):
    bose = write(tmp_path / "b.json", json.dumps(
        {"kind": "bose", "monomials": [{"coef": 2.0, "factors": [{"index": 0}, {"index": 0}]}]}))
    assert main(["phi", "--config", cfg, "--poly", bose]) == 0
    value = json.loads(capsys.readouterr().out)["phi"]
    fields = _fields(resolve(load_document(cfg)))
    x = fields.vector(0)
    assert value == pytest.approx(2.0 * fields.pair(x, x), rel=1e-12)
    fermi = write(tmp_path / "f.json", json.dumps(
        {"kind": "fermi", "monomials": [{"factors": [{"index": 0}, {"index": 1}]}]}))
    assert main(["psi", "--config", cfg, "--poly", fermi]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["psi"] == pytest.approx(doc["psi_pfaffian"])
    wrong = write(tmp_path / "w.json", json.dumps({"kind": "fermi", "monomials": []}))
    assert main(["phi", "--config", cfg, "--poly", wrong]) == 2
    out_of_range = write(tmp_path / "r.json", json.dumps(
        {"kind": "bose", "monomials": [{"factors": [{"index": 99}]}]}))
    assert main(["phi", "--config", cfg, "--poly", out_of_range]) == 2


def test_gram_rejects_minus_region_support(tmp_path, cfg):
    # genus 1 without null modes: index 0 is the plus side, index 1 the minus side
    polys = write(tmp_path / "g.json", json.dumps(
        {"kind": "bose", "polynomials": [{"monomials": [{"factors": [{"index": 1}]}]}]}))
    assert main(["gram", "--config", cfg, "--null-modes", "0", "--poly", polys]) == 3
    ok = write(tmp_path / "h.json", json.dumps(
        {"kind": "bose", "polynomials": [{"monomials": [{"factors": [{"index": 0}]}]},
                                          {"monomials": [{"factors": [{"index": 0}, {"index": 0}]}]}]}))
    assert main(["gram", "--config", cfg, "--null-modes", "0", "--poly", ok]) == 0


def test_airy_outputs(tmp_path, cfg):
    out = tmp_path / "run" / "a.csv"
    assert main(["airy", "--config", cfg, "--lambda", "0,0.5", "--method", "gauss_quadrature",
                 "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [r["lambda"] for r in rows] == ["0.0", "0.5"] and rows[0]["config_hash"]
    empty = tmp_path / "e.csv"
    assert main(["airy", "--config", cfg, "--lambda", "", "--out", str(empty)]) == 0
    assert empty.read_text().strip().split(",")[0] == "config_hash" and len(empty.read_text().splitlines()) == 1
    assert main(["airy", "--config", cfg, "--genus", "3", "--method", "gauss_quadrature"]) == 4
    assert main(["report", str(out.parent)]) == 0
    assert (out.parent / "airy_profile.dat").is_file()


def test_interaction_command(tmp_path, cfg, capsys):
    assert main(["interaction", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["pass"] and doc["certificate"]["slack"] >= -1e-8


def test_resolve_and_hash():
    cfg = resolve({"splitting": {"genus": 2}}, {"fock": {"d": 3, "x": None}, "model": {"seed": None}})
    assert cfg["splitting"]["genus"] == 2 and cfg["fock"]["d"] == 3 and cfg["model"]["seed"] == 0
    assert config_hash(cfg) == config_hash(json.loads(json.dumps(cfg)))
    assert config_hash(cfg) != config_hash(resolve({"splitting": {"genus": 3}}))
    with pytest.raises(ConfigParseError):
        resolve({"splitting": {"genus": 1.5}})
    with pytest.raises(ConfigParseError):
        resolve({"splitting": {"genus": 1}, "partition": {"eps": True}})
    with pytest.raises(ConfigParseError):
        resolve({})
