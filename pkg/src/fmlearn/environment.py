"""Quality datasets and the effectiveness oracle built on them.

A dataset stores one row of metric values per valid configuration.  Values
are kept as :class:`decimal.Decimal` so that equality matching of a sampled
target is exact and reproducible.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConfigError, DatasetError, OracleIncompleteError
from .model import Configuration, FeatureModel
from .rng import Rng, derive_seed

EQUALS = "equals"
AT_MOST = "atMost"
AT_LEAST = "atLeast"
MODES = (EQUALS, AT_MOST, AT_LEAST)


@dataclass(frozen=True)
class Metric:
    name: str
    unit: str = ""

    def header(self) -> str:
        return f"{self.name}[{self.unit}]" if self.unit else self.name

    @classmethod
    def parse_header(cls, text: str) -> "Metric":
        text = text.strip()
        if text.endswith("]") and "[" in text:
            name, unit = text[:-1].split("[", 1)
            return cls(name.strip(), unit.strip())
        return cls(text)


def to_decimal(value: object) -> Decimal:
    if isinstance(value, float):
        value = repr(value)
    try:
        d = Decimal(str(value).strip())
    except InvalidOperation:
        raise DatasetError(f"not a decimal number: {value!r}") from None
    if not d.is_finite():
        raise DatasetError(f"non-finite metric value: {value!r}")
    return d


@dataclass(frozen=True)
class Requirement:
    metric: str
    mode: str
    target: Decimal

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown requirement mode {self.mode!r}; expected one of {MODES}")
        object.__setattr__(self, "target", to_decimal(self.target))

    def holds(self, value: Decimal) -> bool:
        if self.mode == EQUALS:
            return value == self.target
        if self.mode == AT_MOST:
            return value <= self.target
        return value >= self.target

    def to_dict(self) -> dict:
        return {"metric": self.metric, "mode": self.mode, "target": str(self.target)}


class QualityDataset:
    """Metric values for every valid configuration of ``model``.

    Parameters
    ----------
    model : FeatureModel
    metrics : sequence of :class:`Metric`
    table : mapping of configuration to a tuple of values, one per metric

    Raises
    ------
    DatasetError
        If the table's configurations differ from the model's valid ones or
        a row has the wrong width or a non-finite value.
    """

    def __init__(self, model: FeatureModel, metrics: Sequence[Metric],
                 table: Mapping[Configuration, Sequence[object]]):
        self.model = model
        self.metrics = tuple(metrics)
        names = [m.name for m in self.metrics]
        if not names or len(set(names)) != len(names):
            raise DatasetError(f"metric names must be non-empty and distinct: {names}")
        configs = model.configurations()
        missing = [c for c in configs if c not in table]
        extra = [c for c in table if model.config_index(c) < 0]
        if missing or extra:
            raise DatasetError(
                f"dataset rows do not match the valid configurations of {model.name!r}: "
                f"{len(missing)} missing, {len(extra)} not valid"
                + (f"; e.g. missing {missing[0].sorted()}" if missing else "")
                + (f"; e.g. invalid {extra[0].sorted()}" if extra else ""))
        rows = []
        for c in configs:
            row = tuple(to_decimal(v) for v in table[c])
            if len(row) != len(self.metrics):
                raise DatasetError(f"row for {c.sorted()} has {len(row)} values, "
                                   f"expected {len(self.metrics)}")
            rows.append(row)
        # rows follow the canonical configuration order of the model
        self._rows: tuple[tuple[Decimal, ...], ...] = tuple(rows)

    def __repr__(self) -> str:
        return f"QualityDataset({self.model.name!r}, metrics={[m.name for m in self.metrics]})"

    @property
    def table(self) -> dict[Configuration, tuple[Decimal, ...]]:
        return dict(zip(self.model.configurations(), self._rows))

    def metric_index(self, metric: str) -> int:
        for i, m in enumerate(self.metrics):
            if m.name == metric:
                return i
        raise ConfigError(f"unknown metric {metric!r}; dataset has "
                          + ", ".join(m.name for m in self.metrics))

    def values(self, metric: str) -> list[Decimal]:
        """Values of ``metric`` in canonical configuration order."""
        j = self.metric_index(metric)
        return [row[j] for row in self._rows]

    def value(self, config: Configuration, metric: str) -> Decimal:
        i = self.model.config_index(config)
        if i < 0:
            raise OracleIncompleteError(f"no measurement for configuration {config.sorted()}")
        return self._rows[i][self.metric_index(metric)]

    def effective_indices(self, req: Requirement) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self.values(req.metric)) if req.holds(v))

    def effective_set(self, req: Requirement) -> frozenset[Configuration]:
        configs = self.model.configurations()
        return frozenset(configs[i] for i in self.effective_indices(req))

    def restrict(self, model: FeatureModel) -> "QualityDataset":
        """Dataset over ``model`` reusing the rows of this one.

        Every valid configuration of ``model`` must be present here.
        """
        table = self.table
        rows = {}
        for c in model.configurations():
            if c not in table:
                raise DatasetError(f"no measurement for {c.sorted()} of model {model.name!r}")
            rows[c] = table[c]
        return QualityDataset(model, self.metrics, rows)


def effective(dataset: QualityDataset, req: Requirement, config: Configuration) -> bool:
    """Whether ``config`` meets ``req`` according to ``dataset``."""
    return req.holds(dataset.value(config, req.metric))


def oracle(dataset: QualityDataset, req: Requirement):
    """Callable ``config -> bool`` backed by a precomputed effective set."""
    good = dataset.effective_set(req)
    model = dataset.model

    def check(config: Configuration) -> bool:
        if model.config_index(config) < 0:
            raise OracleIncompleteError(f"no measurement for configuration {config.sorted()}")
        return config in good

    return check


def sample_target(dataset: QualityDataset, metric: str, rng: Rng) -> Requirement:
    """Equals-mode requirement on the value of a uniformly drawn configuration."""
    values = dataset.values(metric)
    return Requirement(metric, EQUALS, values[rng.below(len(values))])


# -------------------------------------------------------------- synthesis

def _metric_specs(spec: Mapping) -> list[Mapping]:
    if not isinstance(spec, Mapping):
        raise ConfigError("generator spec must be a JSON object")
    if "metrics" in spec:
        metrics = spec["metrics"]
        if not isinstance(metrics, list) or not metrics:
            raise ConfigError("'metrics' must be a non-empty list")
        return metrics
    return [spec]


def _weights(model: FeatureModel, ms: Mapping, seed: int, name: str) -> dict[str, Decimal]:
    given = ms.get("weights", {})
    if not isinstance(given, Mapping):
        raise ConfigError("'weights' must map feature ids to numbers")
    for fid in given:
        if fid not in model:
            raise ConfigError(f"weight for unknown feature {fid!r}")
    default = ms.get("default_weight")
    low, high = ms.get("weight_range", (0, 100))
    places = int(ms.get("decimals", 6))
    weights = {}
    for fid in model.order:
        if fid in given:
            weights[fid] = _num(given[fid], f"weight of {fid}")
        elif default is not None:
            weights[fid] = _num(default, "default_weight")
        else:
            x = Rng(derive_seed(seed, name, fid)).uniform(float(low), float(high))
            weights[fid] = Decimal(f"{x:.{places}f}")
    return weights


def _num(value: object, what: str) -> Decimal:
    try:
        return to_decimal(value)
    except DatasetError:
        raise ConfigError(f"{what} is not a number: {value!r}") from None


def synthesize(model: FeatureModel, spec: Mapping, seed: int = 0) -> QualityDataset:
    """Additive dataset: base + feature weights + pairwise interactions.

    ``spec`` describes one metric, or several under ``"metrics"``::

        {"name": "response_time", "unit": "ms", "base": 300,
         "weights": {"Recommendation": 300}, "default_weight": 0,
         "interactions": [["Search", "Recommendation", 25]]}

    Features without a weight get ``default_weight``, or a seeded uniform
    draw from ``weight_range`` (default 0..100) rounded to ``decimals``
    places when no default is given.  Random draws depend only on the seed,
    the metric name and the feature id, so every model sharing a feature
    sees the same weight.
    """
    metrics, columns = [], []
    for ms in _metric_specs(spec):
        if not isinstance(ms, Mapping):
            raise ConfigError("each metric spec must be a JSON object")
        name = ms.get("name", "value")
        metric = Metric(str(name), str(ms.get("unit", "")))
        base = _num(ms.get("base", 0), "base")
        weights = _weights(model, ms, seed, metric.name)
        pairs = []
        for term in ms.get("interactions", []):
            if not isinstance(term, (list, tuple)) or len(term) != 3:
                raise ConfigError(f"interaction must be [feature, feature, value], got {term!r}")
            a, b, v = term
            if a not in model or b not in model:
                raise ConfigError(f"interaction over unknown feature in {term!r}")
            pairs.append((a, b, _num(v, "interaction value")))
        col = []
        for c in model.configurations():
            v = base + sum((weights[f] for f in c.active), Decimal(0))
            for a, b, w in pairs:
                if a in c and b in c:
                    v += w
            col.append(v)
        metrics.append(metric)
        columns.append(col)
    table = {c: tuple(col[i] for col in columns) for i, c in enumerate(model.configurations())}
    return QualityDataset(model, metrics, table)


# -------------------------------------------------------------------- CSV

def dataset_to_csv(dataset: QualityDataset) -> str:
    """CSV text: one 0/1 column per feature (canonical order), then the metrics."""
    model = dataset.model
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(model.order) + [m.header() for m in dataset.metrics])
    for c, row in zip(model.configurations(), dataset._rows):
        w.writerow([1 if f in c else 0 for f in model.order] + [str(v) for v in row])
    return buf.getvalue()


def save_dataset(dataset: QualityDataset, path: str | Path) -> None:
    Path(path).write_text(dataset_to_csv(dataset), encoding="utf-8")


def dataset_from_csv(model: FeatureModel, text: str) -> QualityDataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DatasetError("empty dataset file")
    header = [h.strip() for h in rows[0]]
    feature_cols = [h for h in header if h in model]
    n = len(feature_cols)
    if header[:n] != feature_cols:
        raise DatasetError("feature columns must come before the metric columns")
    unknown = set(model.features) - set(feature_cols)
    if unknown:
        raise DatasetError(f"dataset lacks columns for features {sorted(unknown)}")
    metrics = [Metric.parse_header(h) for h in header[n:]]
    if not metrics:
        raise DatasetError("dataset has no metric columns")
    table: dict[Configuration, tuple] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DatasetError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        flags = [r.strip() for r in row[:n]]
        if any(f not in ("0", "1") for f in flags):
            raise DatasetError(f"line {lineno}: feature indicators must be 0 or 1")
        c = Configuration(f for f, bit in zip(feature_cols, flags) if bit == "1")
        if c in table:
            raise DatasetError(f"line {lineno}: duplicate configuration {c.sorted()}")
        try:
            table[c] = tuple(to_decimal(v) for v in row[n:])
        except DatasetError as exc:
            raise DatasetError(f"line {lineno}: {exc}") from None
    return QualityDataset(model, metrics, table)


def load_dataset(model: FeatureModel, path: str | Path) -> QualityDataset:
    return dataset_from_csv(model, Path(path).read_text(encoding="utf-8"))


def requirement_from_dict(data: Mapping, dataset: QualityDataset | None = None) -> Requirement:
    try:
        req = Requirement(str(data["metric"]), str(data.get("mode", EQUALS)),
                          data.get("target", 0))
    except KeyError as exc:
        raise ConfigError(f"requirement lacks {exc}") from None
    if dataset is not None:
        dataset.metric_index(req.metric)
    return req
