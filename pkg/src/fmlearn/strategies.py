"""Exploration strategies over the adaptation space of a feature model.

Every strategy visits configurations without replacement and is driven
through a small protocol: :func:`start_episode` builds an
:class:`ExplorationState`, :meth:`ExplorationState.next_candidate` proposes
the next unvisited configuration and :meth:`ExplorationState.record_outcome`
reports whether it satisfied the requirement.  :func:`run_episode` wraps the
loop for an oracle callable.

Kinds
-----
Rand
    Repeatedly picks a random feature and a random unvisited configuration
    containing it; features without unvisited configurations are dropped.
Inc
    Starts at a random leaf of the start configuration, drains the
    configurations containing it, then its siblings in random order, then
    climbs to the parent and repeats until the root is drained.
Deg
    Like Inc but always moves to the candidate feature with the largest
    configuration degree (random tie-break).
EvoRand, EvoInc, EvoDeg
    The same traversals run in three increments.  The first one only offers
    configurations that are new after the evolution step and avoid every
    feature known to be ineffective, the second one the retained
    configurations that avoid those features, the third one everything left.
    Features believed effective are preferred, and inside a feature the
    configuration with the most effective and fewest ineffective features
    wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, TextIO

from .errors import ConfigError, InvalidConfigurationError, ModelVoidError, ProtocolError
from .model import Configuration, FeatureModel, remove_subtrees
from .rng import Rng

Oracle = Callable[[Configuration], bool]

CONVERGED = "converged"
EXHAUSTED = "exhausted"


class StrategyKind(str, Enum):
    RAND = "Rand"
    INC = "Inc"
    DEG = "Deg"
    EVO_RAND = "EvoRand"
    EVO_INC = "EvoInc"
    EVO_DEG = "EvoDeg"

    @property
    def evolution_aware(self) -> bool:
        return self.value.startswith("Evo")

    @property
    def traversal(self) -> str:
        """One of ``"random"``, ``"incremental"`` or ``"degree"``."""
        return {"Rand": "random", "Inc": "incremental", "Deg": "degree"}[
            self.value[3:] if self.evolution_aware else self.value]

    @property
    def base(self) -> "StrategyKind":
        return StrategyKind(self.value[3:]) if self.evolution_aware else self

    @classmethod
    def parse(cls, name: "str | StrategyKind") -> "StrategyKind":
        if isinstance(name, cls):
            return name
        for kind in cls:
            if kind.value.lower() == str(name).lower():
                return kind
        raise ConfigError(f"unknown strategy {name!r}; expected one of "
                          + ", ".join(k.value for k in cls))


@dataclass
class Knowledge:
    """Which features were activated and which were ever part of an effective
    configuration.

    Effective features (F+) are all model features except the ineffective ones
    (F-): activated at least once and never seen in an effective
    configuration.  Features never tried count as effective.
    """

    activated: set[str] = field(default_factory=set)
    effective: set[str] = field(default_factory=set)

    @classmethod
    def from_observations(cls, observations: Iterable[tuple[Iterable[str], bool]]) -> "Knowledge":
        k = cls()
        for config, ok in observations:
            k.observe(config, ok)
        return k

    def observe(self, config: Iterable[str], effective: bool) -> None:
        ids = set(config)
        self.activated |= ids
        if effective:
            self.effective |= ids

    def ineffective(self, model: FeatureModel | None = None) -> set[str]:
        bad = self.activated - self.effective
        return bad if model is None else {f for f in bad if f in model}

    def effective_features(self, model: FeatureModel) -> set[str]:
        return set(model.features) - self.ineffective(model)

    def reconciled(self, model: FeatureModel) -> "Knowledge":
        """Copy restricted to the features of ``model``."""
        return Knowledge({f for f in self.activated if f in model},
                         {f for f in self.effective if f in model})

    def copy(self) -> "Knowledge":
        return Knowledge(set(self.activated), set(self.effective))

    def to_dict(self) -> dict:
        return {"activated": sorted(self.activated), "effective": sorted(self.effective)}


@dataclass
class EvoContext:
    """What an evolution-aware strategy knows when the model evolves.

    ``previous_model`` is the model before the step (``None`` when there was
    none, so every configuration counts as new) and ``knowledge`` the feature
    knowledge gathered before.
    """

    previous_model: FeatureModel | None = None
    knowledge: Knowledge = field(default_factory=Knowledge)


class ExplorationState:
    """Mutable state of one exploration episode.  Build it via :func:`start_episode`."""

    def __init__(self, kind: StrategyKind, model: FeatureModel, start: Configuration,
                 seed: int, evo: EvoContext | None):
        self.kind = kind
        self.model = model
        self.start = start
        self.seed = seed
        self.rng = Rng(seed)
        self._configs = model.configurations()
        self._masks = model.masks
        self._visited: set[int] = set()
        self._pending: int | None = None
        self.trace: list[tuple[Configuration, bool]] = []
        self.converged = False
        self.exhausted = False

        self._evo = kind.evolution_aware
        self.previous_model = evo.previous_model if evo else None
        known = evo.knowledge.reconciled(model) if evo else Knowledge()
        self._activated = model.mask(known.activated)
        self._effective = model.mask(known.effective)

        # increment 0 means the plain, single-pass traversal
        self.increment = 1 if self._evo else 0
        self.emitted_increment: int | None = None
        self._buckets: dict[int, list[int]] = {}
        self._evo_pools: dict[tuple[int, int], list[int]] = {}
        self._reduced: frozenset[int] | None = None
        self._reduced_key: frozenset[str] | None = None

        n = len(model.order)
        self._all_features = list(range(n))
        self._parent = model._parent
        self._children: list[list[int]] = [[] for _ in range(n)]
        for i in range(1, n):
            self._children[self._parent[i]].append(i)
        if kind.traversal == "random":
            self._remaining = list(self._all_features)
        else:
            self._begin_traversal()

    # ------------------------------------------------------------ knowledge

    @property
    def _minus(self) -> int:
        return self._activated & ~self._effective

    @property
    def ineffective(self) -> set[str]:
        """Current F- over the model's features."""
        return set(self.model.ids(self._minus))

    @property
    def effective_features(self) -> set[str]:
        """Current F+ over the model's features."""
        return set(self.model.ids(self.model.full_mask & ~self._minus))

    def knowledge(self) -> Knowledge:
        m = self.model
        return Knowledge(set(m.ids(self._activated)), set(m.ids(self._effective)))

    @property
    def visited(self) -> set[Configuration]:
        return {self._configs[i] for i in self._visited}

    @property
    def pending(self) -> Configuration | None:
        return None if self._pending is None else self._configs[self._pending]

    # ---------------------------------------------------------------- pools

    def _pool(self, f: int) -> list[int]:
        if not self.increment:
            pool = self._buckets.get(f)
            if pool is None:
                fid = self.model.order[f]
                pool = self._buckets[f] = list(self.model.combination_indices(fid))
            return pool
        key = (self.increment, f)
        pool = self._evo_pools.get(key)
        if pool is None:
            pool = self._evo_pools[key] = self._increment_pool(f)
        return pool

    def _reduced_members(self) -> frozenset[int]:
        """Indices of the configurations that survive removing every F- subtree."""
        model = self.model
        key = frozenset(model.ids(self._minus))
        if key == self._reduced_key and self._reduced is not None:
            return self._reduced
        members = model.reduced_cache.get(key)
        if members is None:
            try:
                reduced = remove_subtrees(model, key)
            except ModelVoidError:
                members = frozenset()
            else:
                members = frozenset(i for i in (model.config_index(c) for c in reduced.configurations())
                                    if i >= 0)
            model.reduced_cache[key] = members
        self._reduced_key, self._reduced = key, members
        return members

    def _increment_pool(self, f: int) -> list[int]:
        fid = self.model.order[f]
        combos = self.model.combination_indices(fid)
        if self.increment == 3:
            return [i for i in combos if i not in self._visited]
        reduced = self._reduced_members()
        prev = self.previous_model
        before = prev.combination_set(fid) if prev is not None and fid in prev else frozenset()
        want_new = self.increment == 1
        return [i for i in combos
                if i in reduced and i not in self._visited
                and (self._configs[i] not in before) == want_new]

    def _pick(self, pool: list[int]) -> int | None:
        visited = self._visited
        if not self.increment:
            while pool:
                j = self.rng.below(len(pool))
                cid = pool[j]
                pool[j] = pool[-1]
                pool.pop()
                if cid not in visited:
                    return cid
            return None
        pool[:] = [i for i in pool if i not in visited]
        if not pool:
            return None
        minus = self._minus
        plus = self.model.full_mask & ~minus
        masks = self._masks
        scores = [(masks[i] & plus).bit_count() - (masks[i] & minus).bit_count() for i in pool]
        best = max(scores)
        top = [i for i, s in zip(pool, scores) if s == best]
        return top[self.rng.below(len(top))]

    # ------------------------------------------------------------- features

    def _select(self, candidates: Iterable[int]) -> int:
        pool = sorted(candidates)
        if self._evo:
            minus = self._minus
            plus = [c for c in pool if not (minus >> c) & 1]
            if plus:
                pool = plus
        if self.kind.traversal == "degree":
            order = self.model.order
            degs = [self.model.degree(order[c]) for c in pool]
            best = max(degs)
            pool = [c for c, d in zip(pool, degs) if d == best]
        return pool[self.rng.below(len(pool))]

    def _siblings(self, f: int) -> list[int]:
        p = self._parent[f]
        return [] if p < 0 else [c for c in self._children[p] if c != f]

    def _begin_traversal(self) -> None:
        model = self.model
        leaves = [model.index[f] for f in model.leaves(self.start)]
        f = self._select(leaves)
        self.current_feature = f
        self._pending_siblings = self._siblings(f)
        self._current_pool = self._pool(f)

    def _advance_increment(self) -> bool:
        if not self._evo or self.increment >= 3:
            return False
        self.increment += 1
        if self.kind.traversal == "random":
            self._remaining = list(self._all_features)
        else:
            self._begin_traversal()
        return True

    def _next_random(self) -> int | None:
        while True:
            if not self._remaining:
                if self._advance_increment():
                    continue
                return None
            f = self._select(self._remaining)
            cid = self._pick(self._pool(f))
            if cid is None:
                self._remaining.remove(f)
                continue
            self.current_feature = f
            return cid

    def _next_tree(self) -> int | None:
        while True:
            cid = self._pick(self._current_pool)
            if cid is not None:
                return cid
            if self._pending_siblings:
                f = self._select(self._pending_siblings)
                self._pending_siblings.remove(f)
            else:
                f = self._parent[self.current_feature]
                if f < 0:
                    if self._advance_increment():
                        continue
                    return None
                self._pending_siblings = self._siblings(f)
            self.current_feature = f
            self._current_pool = self._pool(f)

    # ------------------------------------------------------------- protocol

    def next_candidate(self) -> Configuration | None:
        """Next unvisited configuration, or ``None`` once the space is exhausted."""
        if self._pending is not None:
            raise ProtocolError("the outcome of the previous candidate has not been recorded")
        if self.converged or self.exhausted:
            return None
        if self.kind.traversal == "random":
            cid = self._next_random()
        else:
            cid = self._next_tree()
        if cid is None:
            self.exhausted = True
            return None
        self._pending = cid
        self.emitted_increment = self.increment or None
        return self._configs[cid]

    def record_outcome(self, config: Configuration, effective: bool) -> None:
        if self._pending is None:
            raise ProtocolError("no candidate is pending")
        if config != self._configs[self._pending]:
            raise ProtocolError(f"outcome recorded for {config!r}, but the pending candidate is "
                                f"{self._configs[self._pending]!r}")
        cid = self._pending
        self._pending = None
        self._visited.add(cid)
        m = self._masks[cid]
        self._activated |= m
        if effective:
            self._effective |= m
            self.converged = True
        self.trace.append((self._configs[cid], bool(effective)))


def start_episode(kind: "StrategyKind | str", model: FeatureModel, start: Configuration,
                  seed: int, evo_context: EvoContext | None = None) -> ExplorationState:
    """Create the state of a new exploration episode.

    Parameters
    ----------
    kind : strategy kind or its name
    model : the (current) feature model
    start : valid configuration the system runs when exploration begins
    seed : seed of the episode's random stream
    evo_context : required for evolution-aware kinds
    """
    kind = StrategyKind.parse(kind)
    if not model.is_valid(start):
        raise InvalidConfigurationError(f"start configuration {start!r} is not valid in {model.name!r}")
    if kind.evolution_aware and evo_context is None:
        raise ConfigError(f"{kind.value} needs an evolution context")
    return ExplorationState(kind, model, start, seed, evo_context)


@dataclass
class Episode:
    kind: StrategyKind
    trace: list[tuple[Configuration, bool]]
    outcome: str
    knowledge: Knowledge

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def found(self) -> Configuration | None:
        return self.trace[-1][0] if self.outcome == CONVERGED else None

    def trace_records(self, **extra) -> list[dict]:
        return [dict(extra, step=i + 1, configuration=c.sorted(), effective=ok)
                for i, (c, ok) in enumerate(self.trace)]


def run_episode(kind: "StrategyKind | str", model: FeatureModel, start: Configuration, seed: int,
                oracle: Oracle, evo_context: EvoContext | None = None) -> Episode:
    """Explore until the oracle accepts a configuration or the space is exhausted."""
    state = start_episode(kind, model, start, seed, evo_context)
    while True:
        c = state.next_candidate()
        if c is None:
            break
        state.record_outcome(c, bool(oracle(c)))
        if state.converged:
            break
    outcome = CONVERGED if state.converged else EXHAUSTED
    return Episode(state.kind, state.trace, outcome, state.knowledge())


def write_trace(records: Iterable[Mapping], fh: TextIO) -> None:
    """Write trace records as JSON lines with sorted keys."""
    for rec in records:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")
