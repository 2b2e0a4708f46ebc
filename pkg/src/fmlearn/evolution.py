"""Evolution scenarios: ordered sequences of feature models.

Scenarios can be generated (optional-feature restoration, random mutation),
loaded from the bundled CloudRM replica, or read from a manifest file::

    {"name": "cloudrm",
     "steps": [{"model": "step0.fm.json", "note": "Simple placement only"}, ...]}

Model paths in a manifest are relative to the manifest's directory.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .errors import ConfigError, ModelVoidError, StructuralError
from .model import (
    ALTERNATIVE,
    EXCLUDES,
    MANDATORY,
    OPTIONAL,
    OR,
    REQUIRES,
    CrossTreeConstraint,
    Feature,
    FeatureModel,
    load_model,
    remove_subtrees,
    save_model,
)
from .rng import Rng, derive_seed


@dataclass(frozen=True)
class EvolutionScenario:
    """Models ``steps[0] .. steps[-1]`` with one change note per step.

    ``restored`` lists, for restoration scenarios, the features in the order
    they were turned back to optional.
    """

    steps: tuple[FeatureModel, ...]
    notes: tuple[str, ...]
    name: str = ""
    restored: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "notes", tuple(self.notes))
        if not self.steps:
            raise ConfigError("a scenario needs at least one model")
        if len(self.notes) != len(self.steps):
            raise ConfigError(f"{len(self.steps)} models but {len(self.notes)} notes")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def sizes(self) -> list[int]:
        return [m.size for m in self.steps]

    @property
    def final(self) -> FeatureModel:
        return self.steps[-1]


def transformable_features(model: FeatureModel) -> list[str]:
    """Solitary optional features and ``or`` group members, canonical order."""
    out = []
    for fid in model.order:
        f = model.features[fid]
        if f.variability != OPTIONAL:
            continue
        if f.group is None or f.group == OR:
            out.append(fid)
    return out


def optional_restoration_scenario(model: FeatureModel, seed: int = 0) -> EvolutionScenario:
    """Make every optional feature mandatory, then restore them one at a time.

    Alternative group members are left untouched.  ``or`` group members are
    pinned at step 0 and restored like optional features.  The restoration
    order is a seeded permutation; the last step equals ``model``.

    Raises
    ------
    ModelVoidError
        If the all-mandatory step 0 has no valid configuration, which
        happens when constraints forbid two optional features together.
    """
    feats = transformable_features(model)
    if not feats:
        warnings.warn(f"model {model.name!r} has no optional features; "
                      "the scenario has a single step", stacklevel=2)
        return EvolutionScenario((model,), ("no optional features",), f"{model.name}-restoration")
    order = Rng(derive_seed(seed, "restoration", model.name)).permutation(feats)
    pinned = {f: MANDATORY for f in feats}
    try:
        steps = [model.with_variability(pinned, name=f"{model.name}-step0")]
    except ModelVoidError:
        raise ModelVoidError(f"making every optional feature of {model.name!r} mandatory "
                             "voids the model; its cross-tree constraints conflict") from None
    notes = ["all optional features mandatory"]
    for i, fid in enumerate(order, start=1):
        del pinned[fid]
        changes = dict(pinned)
        changes.update({f: OPTIONAL for f in order[:i]})
        steps.append(model.with_variability(changes, name=f"{model.name}-step{i}"))
        notes.append(f"{fid} optional again")
    return EvolutionScenario(tuple(steps), tuple(notes), f"{model.name}-restoration", tuple(order))


# ------------------------------------------------------------- manifests

def load_scenario(path: str | Path) -> EvolutionScenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    steps = doc.get("steps") if isinstance(doc, dict) else None
    if not isinstance(steps, list) or not steps:
        raise ConfigError(f"{path}: manifest needs a non-empty 'steps' list")
    models, notes = [], []
    for entry in steps:
        if not isinstance(entry, dict) or "model" not in entry:
            raise ConfigError(f"{path}: every step needs a 'model' path")
        model_path = path.parent / entry["model"]
        if not model_path.is_file():
            raise ConfigError(f"{path}: model file {entry['model']!r} not found")
        models.append(load_model(model_path))
        notes.append(str(entry.get("note", "")))
    return EvolutionScenario(tuple(models), tuple(notes), str(doc.get("name", path.stem)),
                             tuple(doc.get("restored", ())))


def save_scenario(scenario: EvolutionScenario, directory: str | Path) -> Path:
    """Write ``step<i>.fm.json`` files plus ``scenario.json`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, (model, note) in enumerate(zip(scenario.steps, scenario.notes)):
        fname = f"step{i}.fm.json"
        save_model(model, directory / fname)
        entries.append({"model": fname, "note": note})
    doc: dict = {"name": scenario.name, "steps": entries}
    if scenario.restored:
        doc["restored"] = list(scenario.restored)
    manifest = directory / "scenario.json"
    manifest.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return manifest


def bundled_model(name: str) -> FeatureModel:
    """One of the shipped models, e.g. ``"webapp"`` or ``"llvm-replica"``."""
    ref = resources.files("fmlearn") / "data" / f"{name}.fm.json"
    if not ref.is_file():
        raise ConfigError(f"no bundled model named {name!r}")
    with resources.as_file(ref) as p:
        return load_model(p)


def cloudrm_scenario() -> EvolutionScenario:
    """The bundled four-step CloudRM placement scenario (5 models)."""
    ref = resources.files("fmlearn") / "data" / "cloudrm" / "scenario.json"
    try:
        with resources.as_file(ref) as p:
            return load_scenario(p)
    except (OSError, StructuralError) as exc:
        raise ConfigError(f"bundled CloudRM scenario is missing or corrupt: {exc}") from None


# -------------------------------------------------------------- mutation

def _add_leaf(model: FeatureModel, rng: Rng, serial: int) -> FeatureModel:
    parent = rng.choice(model.order)
    fid = f"{model.root}_n{serial}"
    feats = dict(model.features)
    p = feats[parent]
    variability = OPTIONAL if rng.random() < 0.6 else MANDATORY
    group = None
    members = [c for c in p.children if feats[c].group is not None]
    if members and rng.random() < 0.5:
        group, variability = feats[members[0]].group, OPTIONAL
    feats[parent] = Feature(parent, p.variability, p.parent, p.children + (fid,), p.group)
    feats[fid] = Feature(fid, variability, parent, (), group)
    return model.replace(feats)


def _flip(model: FeatureModel, rng: Rng) -> FeatureModel:
    if len(model.order) < 2:
        return model
    fid = rng.choice(model.order[1:])
    f = model.features[fid]
    return model.with_variability({fid: OPTIONAL if f.variability == MANDATORY else MANDATORY})


def _constraint(model: FeatureModel, rng: Rng) -> FeatureModel:
    if model.constraints and rng.random() < 0.4:
        cons = list(model.constraints)
        del cons[rng.below(len(cons))]
        return model.replace(constraints=cons)
    if len(model.order) < 3:
        return model
    a, b = rng.permutation(model.order[1:])[:2]
    kind = REQUIRES if rng.random() < 0.5 else EXCLUDES
    return model.replace(constraints=list(model.constraints) + [CrossTreeConstraint(kind, (a,), (b,))])


def _regroup(model: FeatureModel, rng: Rng) -> FeatureModel:
    parents = [f for f in model.order if model._group[model.index[f]] is not None]
    if not parents:
        return model
    p = rng.choice(parents)
    feats = dict(model.features)
    kind = model._group[model.index[p]][0]
    new = OR if kind == ALTERNATIVE else ALTERNATIVE
    for c in model.features[p].children:
        f = feats[c]
        if f.group is not None:
            feats[c] = Feature(c, f.variability, f.parent, f.children, new)
    return model.replace(feats)


def mutate(model: FeatureModel, seed: int, steps: int = 2) -> FeatureModel:
    """Seeded random edit of ``model`` that keeps it non-void.

    Each of ``steps`` edits adds a leaf, removes a subtree, flips a
    variability, regroups a group or adds/drops a constraint.  Edits that
    would void the model or break its structure are retried with other draws.
    """
    rng = Rng(derive_seed(seed, "mutate", model.name))
    out = model
    serial = 0
    for _ in range(steps):
        for _attempt in range(20):
            op = rng.below(5)
            try:
                if op == 0:
                    serial += 1
                    cand = _add_leaf(out, rng, serial)
                elif op == 1:
                    if len(out.order) < 3:
                        continue
                    cand = remove_subtrees(out, [rng.choice(out.order[1:])])
                elif op == 2:
                    cand = _flip(out, rng)
                elif op == 3:
                    cand = _regroup(out, rng)
                else:
                    cand = _constraint(out, rng)
            except (ModelVoidError, StructuralError):
                continue
            out = cand
            break
    return out.replace(name=f"{model.name}-mut{seed}")


def scenario_from_models(models: Sequence[FeatureModel], notes: Sequence[str] | None = None,
                         name: str = "") -> EvolutionScenario:
    notes = list(notes) if notes is not None else [m.name for m in models]
    return EvolutionScenario(tuple(models), tuple(notes), name)
