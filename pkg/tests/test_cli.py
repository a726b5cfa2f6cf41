import json
import os

import pytest

from disorderlab import config as cfgmod
from disorderlab.cli import main
from disorderlab.errors import ConfigError
from disorderlab.manifest import RunWriter


# ---------------------------------------------------------------------------
# config parsing and resolution
# ---------------------------------------------------------------------------

def test_parse_config_text():
    raw = cfgmod.parse_config_text(
        "# comment\n"
        "grid.N = 128   # trailing comment\n"
        "f.centers = 3.0, 4.0\n"
        "\n")
    assert raw == {"grid.N": "128", "f.centers": "3.0, 4.0"}


def test_parse_rejects_garbage_line():
    with pytest.raises(ConfigError):
        cfgmod.parse_config_text("not a key value line\n")


def test_resolve_defaults_and_coercion():
    cfg = cfgmod.resolve("spectrum", {"grid.N": "256"}, [])
    assert cfg["grid.N"] == 256
    assert cfg["grid.boundary"] == "dirichlet"
    assert cfg["solver.tol"] == 1e-8


def test_resolve_unknown_key():
    with pytest.raises(ConfigError):
        cfgmod.resolve("islands", {"grid.N": "64"}, [])


def test_resolve_range_check():
    with pytest.raises(ConfigError):
        cfgmod.resolve("spectrum", {"grid.N": "63"}, [])  # odd grid size
    with pytest.raises(ConfigError):
        cfgmod.resolve("islands", {"geometry.gamma": "1.5"}, [])


def test_set_overrides_file(monkeypatch):
    cfg = cfgmod.resolve("spectrum", {"grid.N": "128"}, ["grid.N=512"])
    assert cfg["grid.N"] == 512


def test_env_override(monkeypatch):
    monkeypatch.setenv("DISORDERLAB_GRID__N", "1024")
    cfg = cfgmod.resolve("spectrum", {"grid.N": "128"}, [])
    assert cfg["grid.N"] == 1024
    # --set still wins over the environment
    cfg = cfgmod.resolve("spectrum", {}, ["grid.N=256"])
    assert cfg["grid.N"] == 256


def test_config_hash_stable_under_key_order():
    a = cfgmod.resolve("islands", {"geometry.R": "2.0", "seed": "5"}, [])
    b = cfgmod.resolve("islands", {"seed": "5", "geometry.R": "2.0"}, [])
    assert cfgmod.config_hash(a) == cfgmod.config_hash(b)


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

def test_manifest_records_checksums(tmp_path):
    cfg = cfgmod.resolve("islands", {}, [])
    w = RunWriter(str(tmp_path), "islands", cfg)
    w.write_csv("a.csv", ["x", "y"], [(1.0, 2.0), (3.0, 4.5)])
    w.write_json("b.json", {"k": 1})
    w.finish()
    with open(tmp_path / "manifest.json") as fh:
        m = json.load(fh)
    assert m["command"] == "islands"
    assert set(m["outputs"]) == {"a.csv", "b.json"}
    assert all(len(h) == 64 for h in m["outputs"].values())
    assert m["config_hash"] == cfgmod.config_hash(cfg)


def test_csv_floats_roundtrip(tmp_path):
    w = RunWriter(str(tmp_path), "islands",
                  cfgmod.resolve("islands", {}, []))
    value = 0.1 + 0.2  # not exactly representable in decimal
    w.write_csv("v.csv", ["v"], [(value,)])
    text = (tmp_path / "v.csv").read_text().splitlines()[1]
    assert float(text) == value


# ---------------------------------------------------------------------------
# CLI end to end
# ---------------------------------------------------------------------------

def test_cli_islands_runs(tmp_path):
    out = str(tmp_path / "run")
    rc = main(["islands", "--out", out,
               "--set", "geometry.k_max=2",
               "--set", "density.samples=5000"])
    assert rc == 0
    for name in ("islands.json", "violations.jsonl", "density.csv",
                 "manifest.json"):
        assert os.path.exists(os.path.join(out, name))


def test_cli_unknown_key_exits_2(tmp_path, capsys):
    rc = main(["islands", "--out", str(tmp_path), "--set", "nope=1"])
    assert rc == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "ConfigError"


def test_cli_precondition_exits_3(tmp_path, capsys):
    rc = main(["cook", "--out", str(tmp_path),
               "--set", "model=island",
               "--set", "grid.L=20", "--set", "grid.N=128",
               "--set", "evolve.t_hi=100"])
    assert rc == 3
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "PreconditionError"


def test_cli_seed_flag_overrides(tmp_path):
    out = str(tmp_path / "s")
    rc = main(["islands", "--out", out, "--seed", "77",
               "--set", "geometry.k_max=1",
               "--set", "density.samples=1000"])
    assert rc == 0
    with open(os.path.join(out, "manifest.json")) as fh:
        assert json.load(fh)["seed"] == 77


def test_cli_manifest_rerun_byte_identical(tmp_path):
    first = str(tmp_path / "one")
    second = str(tmp_path / "two")
    args = ["--set", "geometry.kind=dyadic", "--set", "geometry.k_max=3",
            "--set", "grid.L=24", "--set", "grid.N=256",
            "--set", "solver.e_lo=-3", "--set", "solver.e_hi=1",
            "--set", "distribution.a=-2", "--set", "distribution.b=2"]
    assert main(["spectrum", "--out", first] + args) == 0
    assert main(["spectrum", "--out", second,
                 "--config", os.path.join(first, "manifest.json")]) == 0
    for name in ("report.json", "states.csv"):
        a = open(os.path.join(first, name), "rb").read()
        b = open(os.path.join(second, name), "rb").read()
        assert a == b, name


def test_cli_wavelet_check_runs(tmp_path):
    out = str(tmp_path / "wc")
    rc = main(["wavelet-check", "--out", out,
               "--set", "wavelet.d=1",
               "--set", "check.n1_max=1", "--set", "check.n2_max=2"])
    assert rc == 0
    with open(os.path.join(out, "wavelet_summary.json")) as fh:
        summary = json.load(fh)
    assert summary["max_gram_deviation"] < 1e-8
    for audit in summary["support_rule"].values():
        assert audit["exactly_zero_outside"]


def test_cli_ids_runs(tmp_path):
    out = str(tmp_path / "ids")
    rc = main(["ids", "--out", out,
               "--set", "geometry.kind=dyadic", "--set", "geometry.k_max=2",
               "--set", "grid.L=16", "--set", "grid.N=256",
               "--set", "ids.bins=10"])
    assert rc == 0
    lines = open(os.path.join(out, "ids.csv")).read().splitlines()
    assert lines[0] == "bin_lo,bin_hi,density"
    assert len(lines) == 11
