"""Convergence experiments over single models (rq1) and evolution scenarios (rq2).

Protocol
--------
rq1
    For run ``j = 1..n`` the seed is ``base_seed + j``.  The run samples one
    requirement target and one random start configuration, then lets each
    strategy explore until it finds an effective configuration.  With
    ``paired`` (the default) all strategies share the run's seed and target;
    otherwise each strategy draws its own.
rq2
    Run ``j`` is a trajectory through every step of the scenario.  At each
    step a fresh target and start configuration are drawn.  Evolution-aware
    strategies carry their feature knowledge and the previous model forward;
    the others start from scratch at every step.

Report CSV columns (schema version 1)::

    experiment,step,strategy,runs,space_size,mean_iterations,relative_mean,
    reduction_pct,unconverged

``step`` is empty for rq1 and ``total`` for cumulative rq2 rows.  Means are
written with 4 decimals, percentages with 2.
"""

from __future__ import annotations

import csv
import io
import json
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .environment import (
    EQUALS,
    QualityDataset,
    Requirement,
    load_dataset,
    requirement_from_dict,
    sample_target,
    synthesize,
)
from .errors import ConfigError, DatasetError
from .evolution import (
    EvolutionScenario,
    bundled_model,
    cloudrm_scenario,
    load_scenario,
    optional_restoration_scenario,
)
from .model import Configuration, FeatureModel, load_model
from .rng import Rng, derive_seed
from .strategies import EvoContext, Knowledge, StrategyKind, run_episode, write_trace

CSV_COLUMNS = ("experiment", "step", "strategy", "runs", "space_size", "mean_iterations",
               "relative_mean", "reduction_pct", "unconverged")

DEFAULT_RQ1 = ("Rand", "Inc", "Deg")
DEFAULT_RQ2 = ("Rand", "Inc", "Deg", "EvoRand", "EvoInc", "EvoDeg")

_KEYS = {"name", "model", "scenario", "dataset", "synthesize", "synth_seed", "strategies", "runs",
         "base_seed", "requirement", "paired", "start", "trace", "workers"}


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    Exactly one of ``model``/``scenario`` and one of ``dataset``/``synthesize``
    must be given.  Model and scenario references are file paths, or
    ``"bundled:<name>"`` for the shipped models (``bundled:cloudrm`` for the
    scenario).  A scenario may also be ``{"restoration": <model ref>,
    "seed": <int>}``.  Datasets of scenarios describe the final model.
    """

    model: Any = None
    scenario: Any = None
    dataset: str | None = None
    synthesize: Mapping | None = None
    synth_seed: int | None = None
    strategies: Sequence[str] = ()
    runs: int | None = None
    base_seed: int = 0
    requirement: Mapping = field(default_factory=dict)
    paired: bool = True
    start: Sequence[str] | None = None
    trace: str | None = None
    workers: int = 1
    name: str = "experiment"
    base_dir: Path = field(default_factory=Path.cwd)

    def __post_init__(self):
        if (self.model is None) == (self.scenario is None):
            raise ConfigError("give exactly one of 'model' and 'scenario'")
        if (self.dataset is None) == (self.synthesize is None):
            raise ConfigError("give exactly one of 'dataset' and 'synthesize'")
        if self.runs is not None and (not isinstance(self.runs, int) or self.runs < 1):
            raise ConfigError(f"runs must be a positive integer, got {self.runs!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {self.workers!r}")
        for s in self.strategies:
            StrategyKind.parse(s)
        if self.strategies is not None and len(self.strategies) != len(set(self.strategies)):
            raise ConfigError("strategies must be distinct")

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: str | Path | None = None) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("experiment config must be a JSON object")
        unknown = set(data) - _KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        kw["strategies"] = tuple(kw.get("strategies", ()))
        kw["base_dir"] = Path(base_dir) if base_dir is not None else Path.cwd()
        return cls(**kw)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(data, path.parent)

    def path(self, ref: str) -> Path:
        p = Path(ref)
        return p if p.is_absolute() else self.base_dir / p


def _load_model_ref(cfg: ExperimentConfig, ref: Any) -> FeatureModel:
    if isinstance(ref, str) and ref.startswith("bundled:"):
        return bundled_model(ref.split(":", 1)[1])
    if not isinstance(ref, str):
        raise ConfigError(f"model reference must be a string, got {ref!r}")
    path = cfg.path(ref)
    if not path.is_file():
        raise ConfigError(f"model file not found: {path}")
    return load_model(path)


def load_experiment_scenario(cfg: ExperimentConfig) -> EvolutionScenario:
    ref = cfg.scenario
    if isinstance(ref, Mapping):
        if "restoration" not in ref:
            raise ConfigError("generated scenarios need a 'restoration' model reference")
        model = _load_model_ref(cfg, ref["restoration"])
        return optional_restoration_scenario(model, int(ref.get("seed", cfg.base_seed)))
    if ref == "bundled:cloudrm":
        return cloudrm_scenario()
    if not isinstance(ref, str):
        raise ConfigError(f"scenario reference must be a string or object, got {ref!r}")
    path = cfg.path(ref)
    if not path.is_file():
        raise ConfigError(f"scenario manifest not found: {path}")
    return load_scenario(path)


def load_experiment_dataset(cfg: ExperimentConfig, model: FeatureModel) -> QualityDataset:
    if cfg.dataset is not None:
        path = cfg.path(cfg.dataset)
        if not path.is_file():
            raise ConfigError(f"dataset file not found: {path}")
        return load_dataset(model, path)
    seed = cfg.base_seed if cfg.synth_seed is None else cfg.synth_seed
    return synthesize(model, cfg.synthesize, seed)


# ----------------------------------------------------------------- report

@dataclass
class StrategyResult:
    strategy: str
    step: int | None
    space_size: int
    iterations: list[int]
    unconverged: int = 0

    @property
    def runs(self) -> int:
        return len(self.iterations)

    @property
    def mean(self) -> float:
        return sum(self.iterations) / len(self.iterations)

    @property
    def relative_mean(self) -> float:
        return self.mean / self.space_size


@dataclass
class ConvergenceReport:
    experiment: str
    protocol: str
    strategies: list[str]
    results: list[StrategyResult]
    baseline: str

    def rows(self, step: int | None = None) -> list[StrategyResult]:
        return [r for r in self.results if r.step == step]

    @property
    def steps(self) -> list[int | None]:
        seen: list[int | None] = []
        for r in self.results:
            if r.step not in seen:
                seen.append(r.step)
        return seen

    def result(self, strategy: str, step: int | None = None) -> StrategyResult:
        for r in self.results:
            if r.strategy == strategy and r.step == step:
                return r
        raise KeyError((strategy, step))

    def mean(self, strategy: str, step: int | None = None) -> float:
        return self.result(strategy, step).mean

    def reduction(self, strategy: str, step: int | None = None) -> float:
        base = self.result(self.baseline, step).mean
        return 100.0 * (1.0 - self.result(strategy, step).mean / base)

    def cumulative(self, strategy: str) -> float:
        """Mean over runs of the total iterations across all steps."""
        return sum(r.mean for r in self.results if r.strategy == strategy)

    def cumulative_reduction(self, strategy: str) -> float:
        return 100.0 * (1.0 - self.cumulative(strategy) / self.cumulative(self.baseline))

    def records(self) -> list[dict]:
        out = []
        for r in self.results:
            out.append({
                "experiment": self.experiment,
                "step": "" if r.step is None else str(r.step),
                "strategy": r.strategy,
                "runs": str(r.runs),
                "space_size": str(r.space_size),
                "mean_iterations": f"{r.mean:.4f}",
                "relative_mean": f"{r.relative_mean:.4f}",
                "reduction_pct": f"{self.reduction(r.strategy, r.step):.2f}",
                "unconverged": str(r.unconverged),
            })
        if self.protocol == "rq2":
            for s in self.strategies:
                rs = [r for r in self.results if r.strategy == s]
                total_space = sum(r.space_size for r in rs)
                out.append({
                    "experiment": self.experiment,
                    "step": "total",
                    "strategy": s,
                    "runs": str(rs[0].runs),
                    "space_size": str(total_space),
                    "mean_iterations": f"{self.cumulative(s):.4f}",
                    "relative_mean": f"{self.cumulative(s) / total_space:.4f}",
                    "reduction_pct": f"{self.cumulative_reduction(s):.2f}",
                    "unconverged": str(sum(r.unconverged for r in rs)),
                })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.records())
        return buf.getvalue()

    def to_table(self) -> str:
        recs = self.records()
        cols = ["step", "strategy", "runs", "space_size", "mean_iterations", "relative_mean",
                "reduction_pct", "unconverged"]
        if self.protocol == "rq1":
            cols.remove("step")
        widths = {c: max(len(c), *(len(r[c]) for r in recs)) for c in cols}
        lines = [f"# {self.experiment} ({self.protocol}, baseline {self.baseline})",
                 "  ".join(c.rjust(widths[c]) for c in cols)]
        for r in recs:
            lines.append("  ".join(r[c].rjust(widths[c]) for c in cols))
        return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- runs

@dataclass
class _Step:
    model: FeatureModel
    dataset: QualityDataset
    metric: str
    requirement: Requirement | None     # None: sample an equals-mode target per run
    good_cache: dict


@dataclass
class _Plan:
    cfg: ExperimentConfig
    steps: list[_Step]
    strategies: list[StrategyKind]
    protocol: str
    start: Configuration | None


_PLAN: _Plan | None = None


def _effective_set(step: _Step, req: Requirement) -> frozenset[Configuration]:
    got = step.good_cache.get(req)
    if got is None:
        got = step.good_cache[req] = step.dataset.effective_set(req)
    return got


def _requirement(step: _Step, seed: int) -> Requirement:
    if step.requirement is not None:
        return step.requirement
    return sample_target(step.dataset, step.metric, Rng(derive_seed(seed, "target")))


def _start(plan: _Plan, model: FeatureModel, seed: int) -> Configuration:
    if plan.start is not None:
        return plan.start
    configs = model.configurations()
    return configs[Rng(derive_seed(seed, "start")).below(len(configs))]


def _episode(plan, step, kind, seed, evo, trace_meta):
    """Run one episode and return (iterations, converged, knowledge, trace records)."""
    req = _requirement(step, seed if plan.cfg.paired else derive_seed(seed, kind.value))
    good = _effective_set(step, req)
    start = _start(plan, step.model, seed)
    xseed = seed if plan.cfg.paired else derive_seed(seed, kind.value, "explore")
    ep = run_episode(kind, step.model, start, xseed, good.__contains__, evo)
    records = ep.trace_records(**trace_meta) if plan.cfg.trace else []
    return ep.iterations, ep.outcome == "converged", ep.knowledge, records


def _run_rq1(j: int):
    plan = _PLAN
    step = plan.steps[0]
    seed = plan.cfg.base_seed + j
    out = []
    for kind in plan.strategies:
        evo = EvoContext(None, Knowledge()) if kind.evolution_aware else None
        its, ok, _, recs = _episode(plan, step, kind, seed, evo,
                                    {"run": j, "strategy": kind.value})
        out.append((its, ok, recs))
    return out


def _run_rq2(j: int):
    plan = _PLAN
    out = []
    for kind in plan.strategies:
        knowledge = Knowledge()
        previous = None
        per_step = []
        for k, step in enumerate(plan.steps):
            seed = derive_seed(plan.cfg.base_seed + j, "step", k)
            evo = EvoContext(previous, knowledge) if kind.evolution_aware else None
            its, ok, knowledge_after, recs = _episode(
                plan, step, kind, seed, evo,
                {"evolution_step": k, "run": j, "strategy": kind.value})
            if kind.evolution_aware:
                knowledge, previous = knowledge_after, step.model
            per_step.append((its, ok, recs))
        out.append(per_step)
    return out


def _plan(cfg: ExperimentConfig, protocol: str) -> _Plan:
    if protocol == "rq1":
        if cfg.model is None:
            raise ConfigError("rq1 needs a single 'model', not a scenario")
        models = [_load_model_ref(cfg, cfg.model)]
        defaults = DEFAULT_RQ1
    else:
        if cfg.scenario is None:
            raise ConfigError("rq2 needs a 'scenario'")
        scenario = load_experiment_scenario(cfg)
        if len(scenario) < 2:
            raise ConfigError("rq2 needs a scenario with at least two steps")
        models = list(scenario.steps)
        defaults = DEFAULT_RQ2
    full = load_experiment_dataset(cfg, models[-1])
    reqspec = dict(cfg.requirement)
    metric = reqspec.get("metric", full.metrics[0].name)
    full.metric_index(metric)
    mode = reqspec.get("mode", EQUALS)
    fixed = None
    if mode != EQUALS or "target" in reqspec:
        if "target" not in reqspec:
            raise ConfigError(f"requirement mode {mode!r} needs a 'target'")
        fixed = requirement_from_dict({"metric": metric, "mode": mode,
                                       "target": reqspec["target"]}, full)
    steps = []
    for m in models:
        try:
            ds = full if m is models[-1] else full.restrict(m)
        except DatasetError as exc:
            raise DatasetError(f"dataset does not cover step model {m.name!r}: {exc}") from None
        steps.append(_Step(m, ds, metric, fixed, {}))
    start = None
    if cfg.start is not None:
        if protocol == "rq2":
            raise ConfigError("a fixed start configuration only applies to rq1")
        start = Configuration(cfg.start)
        if not models[0].is_valid(start):
            raise ConfigError(f"start configuration {sorted(start)} is not valid")
    kinds = [StrategyKind.parse(s) for s in (cfg.strategies or defaults)]
    return _Plan(cfg, steps, kinds, protocol, start)


def _map(fn, runs: range, workers: int) -> list:
    if workers <= 1 or len(runs) < 2:
        return [fn(j) for j in runs]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        # map yields in submission order, so results stay ordered by run index
        return list(pool.map(fn, runs, chunksize=max(1, len(runs) // (4 * workers))))


def run_experiment(cfg: ExperimentConfig, protocol: str) -> ConvergenceReport:
    """Run ``protocol`` (``"rq1"`` or ``"rq2"``) as described by ``cfg``."""
    global _PLAN
    if protocol not in ("rq1", "rq2"):
        raise ConfigError(f"unknown protocol {protocol!r}")
    plan = _plan(cfg, protocol)
    runs = cfg.runs if cfg.runs is not None else plan.steps[-1].model.size
    _PLAN = plan
    try:
        results = _map(_run_rq1 if protocol == "rq1" else _run_rq2, range(1, runs + 1), cfg.workers)
    finally:
        _PLAN = None
    names = [k.value for k in plan.strategies]
    baseline = "Rand" if "Rand" in names else names[0]
    out: list[StrategyResult] = []
    traces: list[dict] = []
    if protocol == "rq1":
        size = plan.steps[0].model.size
        for s, name in enumerate(names):
            its = [run[s][0] for run in results]
            miss = sum(1 for run in results if not run[s][1])
            out.append(StrategyResult(name, None, size, its, miss))
            for run in results:
                traces.extend(run[s][2])
    else:
        for s, name in enumerate(names):
            for k, step in enumerate(plan.steps):
                its = [run[s][k][0] for run in results]
                miss = sum(1 for run in results if not run[s][k][1])
                out.append(StrategyResult(name, k, step.model.size, its, miss))
        for run in results:
            for s in range(len(names)):
                for k in range(len(plan.steps)):
                    traces.extend(run[s][k][2])
    if protocol == "rq2":
        out.sort(key=lambda r: (r.step, names.index(r.strategy)))
    if cfg.trace:
        with open(cfg.path(cfg.trace), "w", encoding="utf-8") as fh:
            write_trace(traces, fh)
    return ConvergenceReport(cfg.name, protocol, names, out, baseline)


def run_rq1(cfg: ExperimentConfig) -> ConvergenceReport:
    return run_experiment(cfg, "rq1")


def run_rq2(cfg: ExperimentConfig) -> ConvergenceReport:
    return run_experiment(cfg, "rq2")


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))
