"""Evolution scenarios: restoration, CloudRM replica, manifests, mutation."""

import json
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from fmlearn import (
    ConfigError,
    ModelVoidError,
    bundled_model,
    cloudrm_scenario,
    delta,
    load_scenario,
    mutate,
    optional_restoration_scenario,
    save_scenario,
)
from fmlearn.evolution import scenario_from_models, transformable_features
from fmlearn.model import FeatureModel, random_model


@pytest.fixture(scope="module")
def llvm():
    return bundled_model("llvm-replica")


def test_llvm_restoration_doubles(llvm):
    sc = optional_restoration_scenario(llvm, seed=3)
    assert len(sc) == 11
    assert sc.sizes == [2 ** k for k in range(11)]
    assert sc.final.masks == llvm.masks
    assert sorted(sc.restored) == sorted(transformable_features(llvm))


def test_restoration_step_zero_single_configuration(llvm):
    sc = optional_restoration_scenario(llvm)
    assert sc.steps[0].size == 1
    assert sc.steps[0].configurations()[0].active == set(llvm.order)


def test_restoration_deterministic(llvm):
    a = optional_restoration_scenario(llvm, seed=11)
    b = optional_restoration_scenario(llvm, seed=11)
    c = optional_restoration_scenario(llvm, seed=12)
    assert a.restored == b.restored and a.sizes == b.sizes
    assert a.restored != c.restored


def test_restoration_only_adds(llvm):
    sc = optional_restoration_scenario(llvm, seed=5)
    for prev, nxt in zip(sc.steps, sc.steps[1:]):
        d = delta(prev, nxt)
        assert not d.removed
        assert len(d.added) == nxt.size - prev.size


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_berkeleyj_steps(seed):
    sc = optional_restoration_scenario(bundled_model("berkeleyj-replica"), seed=seed)
    assert len(sc) == 8
    assert sc.sizes[0] == 1 and sc.sizes[-1] == 360
    assert sc.sizes == sorted(sc.sizes)


def test_berkeleyc_steps():
    model = bundled_model("berkeleyc-replica")
    sc = optional_restoration_scenario(model, seed=0)
    assert len(sc) == 8
    assert sc.sizes[0] == 20 and sc.sizes[-1] == 2560
    assert all(b == 2 * a for a, b in zip(sc.sizes, sc.sizes[1:]))


def test_alternative_members_untouched():
    m = bundled_model("webapp")
    feats = transformable_features(m)
    assert "Max" not in feats and "Min" not in feats
    sc = optional_restoration_scenario(m, seed=1)
    for step in sc.steps:
        for f in ("Max", "Medium", "Min"):
            assert step.features[f].variability == m.features[f].variability


def test_or_members_pinned_then_restored():
    m = FeatureModel.from_dict({"name": "or", "root": {
        "id": "R", "group": {"kind": "or", "members": ["A", "B", "C"]},
        "children": [{"id": "A"}, {"id": "B"}, {"id": "C"}]}})
    sc = optional_restoration_scenario(m, seed=0)
    # all members pinned: one configuration; each restoration widens the space
    assert sc.sizes[0] == 1 and sc.sizes[-1] == 7
    assert sc.sizes == sorted(sc.sizes)


def test_no_optional_features_warns():
    m = FeatureModel.from_dict({"name": "fixed", "root": {
        "id": "R", "children": [{"id": "A", "variability": "mandatory"}]}})
    with pytest.warns(UserWarning, match="no optional features"):
        sc = optional_restoration_scenario(m)
    assert len(sc) == 1 and sc.sizes == [1]


def test_cloudrm_scenario():
    sc = cloudrm_scenario()
    assert sc.sizes == [1, 11, 12, 56, 344]
    assert sc.notes[0] == "Simple placement only"
    assert sc.final.size == bundled_model("cloudrm-replica").size == 344
    added = [len(delta(a, b).added) for a, b in zip(sc.steps, sc.steps[1:])]
    assert added == [10, 1, 44, 288]
    for a, b in zip(sc.steps, sc.steps[1:]):
        assert not delta(a, b).removed


def test_manifest_round_trip(tmp_path, llvm):
    sc = optional_restoration_scenario(llvm, seed=2)
    manifest = save_scenario(sc, tmp_path / "sc")
    back = load_scenario(manifest)
    assert back.sizes == sc.sizes and back.notes == sc.notes
    assert back.restored == sc.restored and back.name == sc.name
    for a, b in zip(sc.steps, back.steps):
        assert a.masks == b.masks and a.order == b.order


def test_manifest_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_scenario(bad)
    bad.write_text(json.dumps({"steps": []}))
    with pytest.raises(ConfigError, match="non-empty"):
        load_scenario(bad)
    bad.write_text(json.dumps({"steps": [{"note": "x"}]}))
    with pytest.raises(ConfigError, match="'model'"):
        load_scenario(bad)
    bad.write_text(json.dumps({"steps": [{"model": "nope.fm.json"}]}))
    with pytest.raises(ConfigError, match="not found"):
        load_scenario(bad)


def test_scenario_shape_errors(llvm):
    with pytest.raises(ConfigError):
        scenario_from_models([])
    with pytest.raises(ConfigError):
        scenario_from_models([llvm], ["a", "b"])
    with pytest.raises(ConfigError):
        bundled_model("no-such-model")


@settings(max_examples=30, deadline=None)
@given(mseed=st.integers(0, 10_000), seed=st.integers(0, 10_000))
def test_mutate_non_void_and_deterministic(mseed, seed):
    m = random_model(mseed, n_features=9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = mutate(m, seed)
        b = mutate(m, seed)
    assert a.size >= 1
    assert a.masks == b.masks


def test_conflicting_optionals_void_step_zero():
    m = FeatureModel.from_dict({"name": "clash", "root": {
        "id": "R", "children": [{"id": "A", "variability": "optional"},
                                           {"id": "B", "variability": "optional"}]},
        "constraints": [{"kind": "excludes", "lhs": ["A"], "rhs": ["B"]}]})
    with pytest.raises(ModelVoidError, match="constraints conflict"):
        optional_restoration_scenario(m)


@settings(max_examples=30, deadline=None)
@given(mseed=st.integers(0, 10_000), seed=st.integers(0, 100))
def test_restoration_sizes_non_decreasing(mseed, seed):
    m = random_model(mseed, n_features=10, n_constraints=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sc = optional_restoration_scenario(m, seed)
    assert sc.sizes == sorted(sc.sizes)
    assert sc.final.size == m.size
    for a, b in zip(sc.steps, sc.steps[1:]):
        assert not delta(a, b).removed
