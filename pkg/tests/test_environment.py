"""Datasets, requirements and the effectiveness oracle."""

from collections import Counter
from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from fmlearn import (
    ConfigError,
    DatasetError,
    OracleIncompleteError,
    QualityDataset,
    Requirement,
    Rng,
    bundled_model,
    configuration,
    effective,
    load_dataset,
    sample_target,
    save_dataset,
    synthesize,
)
from fmlearn.environment import Metric, dataset_from_csv, dataset_to_csv, oracle, requirement_from_dict

RT = {"name": "response_time", "unit": "ms", "base": 300, "default_weight": 0,
      "weights": {"Recommendation": 300}}


@pytest.fixture(scope="module")
def rt_dataset(webapp):
    return synthesize(webapp, RT)


def test_all_zero_weights_map_to_base(webapp):
    ds = synthesize(webapp, {"name": "x", "base": 42, "default_weight": 0})
    assert set(ds.values("x")) == {Decimal(42)}


def test_additive_value_by_hand(webapp):
    spec = {"name": "x", "base": 1, "weights": {f: i for i, f in enumerate(webapp.order)},
            "interactions": [["Search", "Recommendation", "0.5"]]}
    ds = synthesize(webapp, spec)
    for c, (v,) in ds.table.items():
        expect = 1 + sum(webapp.order.index(f) for f in c.active)
        if "Search" in c and "Recommendation" in c:
            expect += Decimal("0.5")
        assert v == expect


def test_recommendation_premise(webapp, rt_dataset):
    req = Requirement("response_time", "atMost", 500)
    for c in webapp.configurations():
        assert effective(rt_dataset, req, c) == ("Recommendation" not in c)


def test_at_most_and_at_least(webapp, rt_dataset):
    c = configuration("WebApplication", "DataLogging", "Min", "ContentDiscovery", "Search")
    assert rt_dataset.value(c, "response_time") == 300
    assert effective(rt_dataset, Requirement("response_time", "atMost", 500), c)
    assert effective(rt_dataset, Requirement("response_time", "atLeast", 300), c)
    assert not effective(rt_dataset, Requirement("response_time", "atLeast", "300.01"), c)


def test_equals_is_exact(webapp, rt_dataset):
    c = configuration("WebApplication", "DataLogging", "Min", "ContentDiscovery", "Search")
    assert effective(rt_dataset, Requirement("response_time", "equals", "300.000"), c)
    assert not effective(rt_dataset, Requirement("response_time", "equals", "300.0000001"), c)


def test_absent_configuration_is_oracle_incomplete(webapp, rt_dataset, start_config):
    bad = configuration("WebApplication", "DataLogging", "Min", "ContentDiscovery", "Recommendation")
    req = Requirement("response_time", "atMost", 500)
    with pytest.raises(OracleIncompleteError):
        effective(rt_dataset, req, bad)
    check = oracle(rt_dataset, req)
    with pytest.raises(OracleIncompleteError):
        check(bad)
    assert check(start_config) is False


def test_unknown_metric_and_mode(rt_dataset):
    with pytest.raises(ConfigError):
        rt_dataset.values("energy")
    with pytest.raises(ConfigError):
        Requirement("response_time", "below", 1)
    with pytest.raises(ConfigError):
        requirement_from_dict({"metric": "energy"}, rt_dataset)
    with pytest.raises(ConfigError):
        requirement_from_dict({"mode": "atMost"})


def test_same_seed_same_table(webapp):
    spec = {"name": "x", "base": 0}
    assert synthesize(webapp, spec, 5).table == synthesize(webapp, spec, 5).table
    assert synthesize(webapp, spec, 5).table != synthesize(webapp, spec, 6).table


def test_weights_shared_across_models(webapp, webapp_evolved):
    a = synthesize(webapp, {"name": "x"}, 3)
    b = synthesize(webapp_evolved, {"name": "x"}, 3)
    for c, v in a.table.items():
        if c in b.table:
            assert b.table[c] == v


@pytest.mark.parametrize("spec", [
    [],
    {"metrics": []},
    {"metrics": [3]},
    {"name": "x", "weights": {"Nope": 1}},
    {"name": "x", "weights": [1, 2]},
    {"name": "x", "base": "abc"},
    {"name": "x", "interactions": [["Search", "Recommendation"]]},
    {"name": "x", "interactions": [["Search", "Nope", 1]]},
])
def test_malformed_spec(webapp, spec):
    with pytest.raises(ConfigError):
        synthesize(webapp, spec)


def test_sample_target_deterministic_and_member(webapp, rt_dataset):
    vals = rt_dataset.values("response_time")
    for seed in range(30):
        a = sample_target(rt_dataset, "response_time", Rng(seed))
        b = sample_target(rt_dataset, "response_time", Rng(seed))
        assert a == b and a.mode == "equals" and a.target in vals


def test_one_effective_per_target_with_distinct_values():
    llvm = bundled_model("llvm-replica")
    ds = synthesize(llvm, {"name": "t", "base": 0}, 1)
    assert len(set(ds.values("t"))) == llvm.size
    rng = Rng(9)
    for _ in range(20):
        req = sample_target(ds, "t", rng)
        assert len(ds.effective_indices(req)) == 1


def test_sample_target_uniform_chi_square():
    llvm = bundled_model("llvm-replica")
    ds = synthesize(llvm, {"name": "t", "base": 0}, 1)
    index = {v: i for i, v in enumerate(ds.values("t"))}
    rng = Rng(2024)
    n = 50 * llvm.size
    counts = Counter(index[sample_target(ds, "t", rng).target] for _ in range(n))
    observed = [counts.get(i, 0) for i in range(llvm.size)]
    assert chisquare(observed).pvalue > 0.001


def test_csv_round_trip(tmp_path, webapp):
    ds = synthesize(webapp, {"metrics": [RT, {"name": "cost", "base": "1.5"}]}, 4)
    path = tmp_path / "ds.csv"
    save_dataset(ds, path)
    back = load_dataset(webapp, path)
    assert back.table == ds.table
    assert back.metrics == (Metric("response_time", "ms"), Metric("cost"))
    assert dataset_to_csv(back) == path.read_text()


def test_csv_header_layout(webapp, rt_dataset):
    header, first = dataset_to_csv(rt_dataset).splitlines()[:2]
    assert header.split(",") == list(webapp.order) + ["response_time[ms]"]
    assert set(first.split(",")[:-1]) <= {"0", "1"}


def test_csv_rows_may_be_shuffled(webapp, rt_dataset):
    lines = dataset_to_csv(rt_dataset).splitlines()
    text = "\n".join([lines[0]] + lines[:0:-1]) + "\n"
    assert dataset_from_csv(webapp, text).table == rt_dataset.table


def _csv(webapp, rt_dataset):
    return dataset_to_csv(rt_dataset).splitlines()


def test_csv_missing_row(webapp, rt_dataset):
    lines = _csv(webapp, rt_dataset)
    with pytest.raises(DatasetError, match="1 missing"):
        dataset_from_csv(webapp, "\n".join(lines[:-1]))


def test_csv_invalid_and_duplicate_rows(webapp, rt_dataset):
    lines = _csv(webapp, rt_dataset)
    with pytest.raises(DatasetError, match="duplicate"):
        dataset_from_csv(webapp, "\n".join(lines + [lines[1]]))
    invalid = ",".join("1" for _ in webapp.order) + ",1"
    with pytest.raises(DatasetError, match="not valid"):
        dataset_from_csv(webapp, "\n".join(lines + [invalid]))


def test_csv_bad_fields(webapp, rt_dataset):
    lines = _csv(webapp, rt_dataset)
    broken = lines[1].rsplit(",", 1)[0] + ",fast"
    with pytest.raises(DatasetError, match="line 2"):
        dataset_from_csv(webapp, "\n".join([lines[0], broken] + lines[2:]))
    with pytest.raises(DatasetError, match="fields"):
        dataset_from_csv(webapp, "\n".join([lines[0], lines[1] + ",3"] + lines[2:]))
    with pytest.raises(DatasetError, match="0 or 1"):
        dataset_from_csv(webapp, "\n".join([lines[0], "2" + lines[1][1:]] + lines[2:]))
    with pytest.raises(DatasetError, match="lacks columns"):
        dataset_from_csv(webapp, "WebApplication,t\n1,1\n")
    with pytest.raises(DatasetError):
        dataset_from_csv(webapp, "")
    with pytest.raises(DatasetError):
        to_table = {c: ("inf",) for c in webapp.configurations()}
        QualityDataset(webapp, [Metric("t")], to_table)


def test_restrict_keeps_values(webapp, webapp_evolved):
    big = synthesize(webapp_evolved, {"name": "x"}, 2)
    small = big.restrict(webapp)
    assert all(small.table[c] == big.table[c] for c in webapp.configurations())
    with pytest.raises(DatasetError):
        synthesize(webapp, {"name": "x"}).restrict(webapp_evolved)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), target=st.integers(200, 900))
def test_oracle_totality_and_modes(webapp, seed, target):
    ds = synthesize(webapp, {"name": "x", "base": 100}, seed)
    for mode in ("equals", "atMost", "atLeast"):
        req = Requirement("x", mode, target)
        check = oracle(ds, req)
        for c in webapp.configurations():
            v = ds.value(c, "x")
            expect = {"equals": v == target, "atMost": v <= target, "atLeast": v >= target}[mode]
            assert effective(ds, req, c) == check(c) == expect
