"""Experiment configs, seeding protocol and convergence reports."""

import csv
import io
import json

import pytest

from fmlearn import ConfigError, DatasetError, ExperimentConfig, Rng, derive_seed, run_rq1, run_rq2
from fmlearn import bundled_model, run_episode, sample_target, save_scenario, synthesize
from fmlearn.evolution import scenario_from_models
from fmlearn.harness import CSV_COLUMNS, run_experiment

SYNTH = {"name": "rt", "unit": "ms", "base": 100}


def rq1_cfg(**kw):
    base = dict(model="bundled:webapp", synthesize=SYNTH, runs=13, base_seed=4)
    base.update(kw)
    return ExperimentConfig.from_dict(base)


@pytest.fixture
def evolved_manifest(tmp_path, webapp, webapp_evolved):
    sc = scenario_from_models([webapp, webapp_evolved], ["before", "Optimized logging"], "webapp")
    return save_scenario(sc, tmp_path / "sc")


def test_rq1_rows_and_baseline():
    rep = run_rq1(rq1_cfg())
    assert [r.strategy for r in rep.results] == ["Rand", "Inc", "Deg"]
    assert rep.baseline == "Rand" and rep.reduction("Rand") == 0
    for r in rep.results:
        assert r.runs == 13 and r.space_size == 13
        assert 1 <= min(r.iterations) and max(r.iterations) <= 13
        assert r.relative_mean == pytest.approx(r.mean / 13)
        assert r.unconverged == 0


def test_rq1_reproduces_protocol_by_hand(webapp):
    """Each run j uses seed base_seed + j for the target, the start and the exploration."""
    rep = run_rq1(rq1_cfg(strategies=["Deg"]))
    ds = synthesize(webapp, SYNTH, 4)
    configs = webapp.configurations()
    expect = []
    for j in range(1, 14):
        seed = 4 + j
        req = sample_target(ds, "rt", Rng(derive_seed(seed, "target")))
        good = ds.effective_set(req)
        start = configs[Rng(derive_seed(seed, "start")).below(len(configs))]
        expect.append(run_episode("Deg", webapp, start, seed, good.__contains__).iterations)
    assert rep.result("Deg").iterations == expect


def test_reduction_baseline_without_rand():
    rep = run_rq1(rq1_cfg(strategies=["Deg", "Inc"]))
    assert rep.baseline == "Deg" and rep.reduction("Deg") == 0


def test_csv_schema_and_determinism():
    a = run_rq1(rq1_cfg()).to_csv()
    b = run_rq1(rq1_cfg()).to_csv()
    assert a == b
    rows = list(csv.DictReader(io.StringIO(a)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[0]["step"] == "" and rows[0]["strategy"] == "Rand"
    assert rows[0]["reduction_pct"] == "0.00"
    assert len(rows[0]["mean_iterations"].split(".")[1]) == 4


def test_workers_match_serial():
    serial = run_rq1(rq1_cfg(runs=40)).to_csv()
    assert run_rq1(rq1_cfg(runs=40, workers=3)).to_csv() == serial


def test_unpaired_is_deterministic_but_different():
    a = run_rq1(rq1_cfg(runs=30, paired=False))
    assert a.to_csv() == run_rq1(rq1_cfg(runs=30, paired=False)).to_csv()
    paired = run_rq1(rq1_cfg(runs=30))
    assert a.result("Inc").iterations != paired.result("Inc").iterations


def test_fixed_start_and_requirement():
    cfg = rq1_cfg(start=["WebApplication", "DataLogging", "Max", "ContentDiscovery",
                         "Recommendation"],
                  synthesize={"name": "rt", "base": 300, "default_weight": 0,
                              "weights": {"Recommendation": 300}},
                  requirement={"mode": "atMost", "target": 500})
    rep = run_rq1(cfg)
    # at most the 4 Recommendation configurations are explored before a hit;
    # a Recommendation anchor drains all of them first
    its = rep.result("Inc").iterations
    assert max(its) == 5 and min(its) >= 1
    assert rep.result("Inc").unconverged == 0


def test_unreachable_requirement_counts_unconverged():
    rep = run_rq1(rq1_cfg(requirement={"mode": "atLeast", "target": 100000}))
    for r in rep.results:
        assert r.unconverged == 13 and set(r.iterations) == {13}


def test_trace_jsonl(tmp_path):
    cfg = rq1_cfg(trace=str(tmp_path / "t.jsonl"), strategies=["Rand"], runs=5)
    rep = run_rq1(cfg)
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert len(lines) == sum(rep.result("Rand").iterations)
    rec = json.loads(lines[0])
    assert rec["run"] == 1 and rec["step"] == 1 and rec["strategy"] == "Rand"
    assert any(json.loads(x)["effective"] for x in lines)


def test_rq2_rows_and_totals(evolved_manifest):
    cfg = ExperimentConfig.from_dict({"scenario": str(evolved_manifest), "synthesize": SYNTH,
                                      "runs": 16, "name": "evo"})
    rep = run_rq2(cfg)
    assert rep.steps == [0, 1]
    assert len(rep.strategies) == 6
    assert rep.result("Rand", 0).space_size == 13 and rep.result("Rand", 1).space_size == 16
    for s in rep.strategies:
        assert rep.cumulative(s) == pytest.approx(rep.mean(s, 0) + rep.mean(s, 1))
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    totals = [r for r in rows if r["step"] == "total"]
    assert [r["strategy"] for r in totals] == rep.strategies
    assert totals[0]["space_size"] == "29" and totals[0]["reduction_pct"] == "0.00"
    assert "evo" in rep.to_table()


def test_rq2_step_zero_rows(evolved_manifest):
    cfg = ExperimentConfig.from_dict({"scenario": str(evolved_manifest), "synthesize": SYNTH,
                                      "runs": 16})
    rep = run_rq2(cfg)
    for r in rep.rows(0):
        assert r.runs == 16 and r.space_size == 13


def test_rq2_restoration_reference():
    cfg = ExperimentConfig.from_dict({
        "scenario": {"restoration": "bundled:llvm-replica", "seed": 1},
        "synthesize": SYNTH, "runs": 3, "strategies": ["Rand", "EvoRand"]})
    rep = run_rq2(cfg)
    assert [rep.result("Rand", k).space_size for k in rep.steps] == [2 ** k for k in range(11)]
    assert rep.result("Rand", 0).iterations == [1, 1, 1]


def test_rq2_cloudrm_defaults_runs_to_final_size():
    cfg = ExperimentConfig.from_dict({"scenario": "bundled:cloudrm", "synthesize": SYNTH,
                                      "strategies": ["Rand"]})
    rep = run_rq2(cfg)
    assert rep.result("Rand", 4).runs == 344


def test_config_file_relative_paths(tmp_path, webapp):
    from fmlearn import save_model
    save_model(webapp, tmp_path / "m.fm.json")
    (tmp_path / "exp.json").write_text(json.dumps(
        {"model": "m.fm.json", "synthesize": SYNTH, "runs": 2}))
    rep = run_rq1(ExperimentConfig.from_file(tmp_path / "exp.json"))
    assert rep.result("Rand").space_size == 13


@pytest.mark.parametrize("data, match", [
    ({"synthesize": SYNTH}, "exactly one of 'model'"),
    ({"model": "bundled:webapp"}, "exactly one of 'dataset'"),
    ({"model": "bundled:webapp", "synthesize": SYNTH, "runs": 0}, "positive"),
    ({"model": "bundled:webapp", "synthesize": SYNTH, "workers": 0}, "positive"),
    ({"model": "bundled:webapp", "synthesize": SYNTH, "strategies": ["Greedy"]}, "Greedy"),
    ({"model": "bundled:webapp", "synthesize": SYNTH, "strategies": ["Rand", "Rand"]}, "distinct"),
    ({"model": "bundled:webapp", "synthesize": SYNTH, "colour": 1}, "unknown config keys"),
])
def test_config_errors(data, match):
    with pytest.raises(ConfigError, match=match):
        ExperimentConfig.from_dict(data)


def test_run_errors(tmp_path, evolved_manifest):
    with pytest.raises(ConfigError, match="rq1 needs"):
        run_rq1(ExperimentConfig.from_dict({"scenario": "bundled:cloudrm", "synthesize": SYNTH}))
    with pytest.raises(ConfigError, match="rq2 needs"):
        run_rq2(rq1_cfg())
    with pytest.raises(ConfigError, match="needs a 'target'"):
        run_rq1(rq1_cfg(requirement={"mode": "atMost"}))
    with pytest.raises(ConfigError, match="unknown metric"):
        run_rq1(rq1_cfg(requirement={"metric": "energy"}))
    with pytest.raises(ConfigError, match="not valid"):
        run_rq1(rq1_cfg(start=["WebApplication"]))
    with pytest.raises(ConfigError, match="not found"):
        run_rq1(rq1_cfg(model="missing.fm.json"))
    with pytest.raises(ConfigError, match="not found"):
        run_rq1(ExperimentConfig.from_dict({"model": "bundled:webapp", "dataset": "none.csv"}))
    with pytest.raises(ConfigError, match="unknown protocol"):
        run_experiment(rq1_cfg(), "rq3")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError, match="not valid JSON"):
        ExperimentConfig.from_file(bad)


def test_scenario_dataset_must_cover_every_step(tmp_path, webapp, webapp_evolved):
    # reversed scenario: the final model lacks the Optimized configurations of step 0
    sc = scenario_from_models([webapp_evolved, webapp], ["a", "b"])
    manifest = save_scenario(sc, tmp_path / "rev")
    cfg = ExperimentConfig.from_dict({"scenario": str(manifest), "synthesize": SYNTH, "runs": 1})
    with pytest.raises(DatasetError, match="does not cover"):
        run_rq2(cfg)


def test_single_step_scenario_rejected(tmp_path, webapp):
    manifest = save_scenario(scenario_from_models([webapp], ["only"]), tmp_path / "one")
    cfg = ExperimentConfig.from_dict({"scenario": str(manifest), "synthesize": SYNTH})
    with pytest.raises(ConfigError, match="at least two"):
        run_rq2(cfg)


def test_llvm_flat_models_tie_inc_and_deg():
    llvm = bundled_model("llvm-replica")
    cfg = ExperimentConfig.from_dict({"model": "bundled:llvm-replica", "synthesize": SYNTH,
                                      "runs": 60})
    rep = run_rq1(cfg)
    assert rep.result("Inc").iterations == rep.result("Deg").iterations
    assert rep.result("Rand").space_size == llvm.size
