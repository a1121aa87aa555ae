import json
from pathlib import Path

import pytest
import yaml
from hypothesis import given, settings, strategies as st

from apdim.cache import ResultCache
from apdim.cli import main
from apdim.config import ExperimentConfig, load_config, make_config
from apdim.errors import ValidationError
from apdim.io import csv_text, read_csv, read_scan_summaries, write_csv
from apdim.pipeline import run

LADDER = [0.25, 0.125, 0.0625, 0.03125, 0.015625]


@pytest.fixture
def cache(tmp_path, monkeypatch):
    monkeypatch.setenv("APDIM_CACHE_DIR", str(tmp_path / "cache"))
    return ResultCache(tmp_path / "cache")


ladders = st.lists(st.floats(1e-6, 10, allow_nan=False), min_size=4, max_size=8, unique=True).map(
    lambda v: sorted(v, reverse=True))


@given(ladders, st.integers(1, 10**9), st.sampled_from(["sqrt2", "phi", "[0; 5, 10^9, (2)]"]))
@settings(max_examples=50, deadline=None)
def test_config_round_trip(eps, budget, omega):
    cfg = make_config(kind="full-pipeline", epsilons=eps, budget=budget, omega=omega)
    for fmt in ("yaml", "json"):
        text = cfg.dumps(fmt)
        data = yaml.safe_load(text) if fmt == "yaml" else json.loads(text)
        assert ExperimentConfig(**data) == cfg


def test_one_point_ladder_rejected():
    with pytest.raises(ValidationError):
        make_config(kind="full-pipeline", epsilons=[0.1])


def test_non_monotone_ladder_rejected():
    with pytest.raises(ValidationError):
        make_config(kind="periods", epsilons=[0.1, 0.2, 0.05])


def test_non_positive_budget_rejected():
    with pytest.raises(ValidationError):
        make_config(kind="cf", budget=0)


def test_unknown_field_rejected():
    with pytest.raises(ValidationError):
        make_config(kind="cf", colour="red")


def test_pipeline_report_and_cache(tmp_path, cache):
    cfg = make_config(kind="full-pipeline", epsilons=LADDER, out=str(tmp_path / "a"))
    r1 = run(cfg, cache)
    assert not r1.cache_hit
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert 0.75 <= rep["dimension"]["fit_slope"] <= 1.25
    cfg2 = cfg.model_copy(update={"out": str(tmp_path / "b")})
    r2 = run(cfg2, cache)
    assert r2.cache_hit
    for p in r1.paths:
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_version_bump_invalidates(tmp_path):
    cfg = make_config(kind="cf", omega="sqrt2")
    assert cfg.digest("0.1.0") != cfg.digest("0.1.1")
    assert cfg.digest("0.1.0") == cfg.model_copy(update={"out": "elsewhere"}).digest("0.1.0")


def test_referenced_file_content_changes_digest(tmp_path):
    poly = tmp_path / "p.yaml"
    poly.write_text(yaml.safe_dump({"basis": ["1", "sqrt2"], "exponents": [[1, 0], [0, 1]],
                                    "amplitudes": [[[1, 0]], [[1, 0]]]}))
    cfg = make_config(kind="eval", poly=str(poly), times=["1/2"])
    d1 = cfg.digest("v")
    poly.write_text(poly.read_text().replace("sqrt2", "phi"))
    assert cfg.digest("v") != d1


def test_schema_header_enforced(tmp_path):
    p = write_csv(tmp_path / "x.csv", "kron", [(1.0, 0.1, 0.01)])
    assert read_csv(p, "kron")[0]["center"] == "1.0"
    with pytest.raises(ValidationError):
        read_csv(p, "periods")
    assert csv_text("kron", []).startswith("# schema: kron v1: center,half_width,quality\n")


def test_cli_subcommands(tmp_path, cache, capsys):
    out = tmp_path / "o"
    assert main(["cf", "--number", "sqrt2", "--depth", "6", "--out", str(out / "cf")]) == 0
    rows = read_csv(out / "cf" / "cf.csv", "cf")
    assert [r["q_k"] for r in rows[:5]] == ["1", "2", "5", "12", "29"]

    assert main(["eval", "--t", "1/2", "--out", str(out / "ev")]) == 0
    assert main(["shiftdist", "--tau", "12", "--epsilon", "0.2", "--out", str(out / "sd")]) == 0
    assert read_csv(out / "sd" / "shiftdist.csv", "shiftdist")[0]["verdict"] == "verified-yes"

    assert main(["kron", "--omega", "sqrt2", "--delta", "0.05", "--window", "100", "--out", str(out / "k")]) == 0
    assert float(read_csv(out / "k" / "kron.csv", "kron")[0]["center"]) == 12.0

    assert main(["periods", "--epsilon-ladder", ",".join(map(str, LADDER)), "--out", str(out / "p")]) == 0
    assert len(read_scan_summaries(out / "p" / "periods.json")) == len(LADDER)
    assert main(["dim", "--scans", str(out / "p" / "periods.json"), "--out", str(out / "d")]) == 0
    assert 0.75 <= json.loads((out / "d" / "dim.json").read_text())["fit_slope"] <= 1.25
    assert read_csv(out / "d" / "dim_plot.csv", "dim-plot")

    assert main(["liouville", "--omega", "liouville_fifth", "--region", "sector(0,0.3)",
                 "--horizons", "100,1000", "--out", str(out / "l")]) == 0
    info = json.loads((out / "l" / "liouville.json").read_text())
    assert info["closeness"]["sound"]


def test_cli_exit_codes(tmp_path, cache, capsys):
    assert main(["pipeline", "--epsilon-ladder", "0.1", "--out", str(tmp_path)]) == 2
    assert main(["cf", "--number", "1/2", "--out", str(tmp_path)]) == 4
    assert main(["periods", "--epsilon", "0.001", "--window", "1e7", "--budget", "1000",
                 "--out", str(tmp_path / "b")]) == 3
    partial = json.loads((tmp_path / "b" / "periods.json").read_text())
    assert partial["partial"] is True
    assert main(["dim", "--scans", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2


def test_config_file_and_overrides(tmp_path, cache):
    cfgfile = tmp_path / "exp.yaml"
    cfgfile.write_text(yaml.safe_dump({"kind": "kron", "omega": "sqrt2", "deltas": [0.05], "window": 100}))
    cfg = load_config(cfgfile)
    assert cfg.kind == "kron"
    assert main(["kron", "--config", str(cfgfile), "--window", "50", "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "kron.json").read_text())["window"] == 50
    assert main(["cf", "--config", str(cfgfile), "--out", str(tmp_path / "x")]) == 2


def test_evolve_problem_file(tmp_path, cache):
    (tmp_path / "f.yaml").write_text(yaml.safe_dump({
        "basis": ["1", "sqrt2"], "exponents": [[1, 0], [0, 1]],
        "amplitudes": [[[1, 0]], [[1, 0]]], "real": True}))
    (tmp_path / "prob.yaml").write_text(yaml.safe_dump({
        "operator": {"name": "linear", "params": [2.0]}, "forcing": "f.yaml", "h": 0.01, "T": 400}))
    assert main(["evolve", "--problem", str(tmp_path / "prob.yaml"), "--epsilon-ladder", "0.5,0.25,0.125",
                 "--out", str(tmp_path / "o")]) == 0
    pairs = read_csv(tmp_path / "o" / "transfer.csv", "transfer")
    assert len(pairs) >= 3
    rep = json.loads((tmp_path / "o" / "evolve.json").read_text())
    assert abs(rep["exponent_fit"] - 1.0) < 0.15
