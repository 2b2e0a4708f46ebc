"""Feature models, configurations and the adaptation space they define.

A feature model is a tree. Every non-root feature is either a *solitary*
child of its parent (``mandatory`` or ``optional``) or a member of the single
group attached to its parent, which is either ``alternative`` (exactly one
member active) or ``or`` (at least one member active). A group member whose
variability is ``mandatory`` is pinned: it must be active whenever its parent
is. Cross-tree constraints have a conjunctive left-hand side and a disjunctive
right-hand side::

    requires:  all(lhs) -> any(rhs)      (empty rhs: lhs may never hold)
    excludes:  not (all(lhs) and any(rhs))

Internally every feature gets a bit position following the depth-first
pre-order of the tree, and configurations are handled as integer bitmasks.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ModelVoidError, StructuralError
from .rng import Rng

ROOT, MANDATORY, OPTIONAL = "root", "mandatory", "optional"
ALTERNATIVE, OR = "alternative", "or"
REQUIRES, EXCLUDES = "requires", "excludes"

VARIABILITIES = (ROOT, MANDATORY, OPTIONAL)
GROUP_KINDS = (ALTERNATIVE, OR)
CONSTRAINT_KINDS = (REQUIRES, EXCLUDES)

# above this many constraint-referenced features, counting falls back to enumeration
_MAX_COUNT_SPLIT = 14


@dataclass(frozen=True)
class Feature:
    id: str
    variability: str
    parent: str | None = None
    children: tuple[str, ...] = ()
    group: str | None = None  # kind of the parent's group this feature belongs to


@dataclass(frozen=True)
class CrossTreeConstraint:
    kind: str
    lhs: tuple[str, ...]
    rhs: tuple[str, ...]

    def holds(self, active: Iterable[str]) -> bool:
        active = set(active)
        lhs = all(f in active for f in self.lhs)
        rhs = any(f in active for f in self.rhs)
        if self.kind == REQUIRES:
            return not lhs or rhs
        return not (lhs and rhs)

    def features(self) -> tuple[str, ...]:
        return self.lhs + self.rhs

    def __str__(self) -> str:
        op = "=>" if self.kind == REQUIRES else "excludes"
        rhs = " | ".join(self.rhs) if self.rhs else "false"
        return f"{' & '.join(self.lhs)} {op} {rhs}"


class Configuration:
    """A set of active features. Equality and hashing go by the active set only,
    so configurations of different models compare naturally."""

    __slots__ = ("active",)

    def __init__(self, active: Iterable[str] = ()):
        self.active = frozenset(active)

    def __contains__(self, feature: object) -> bool:
        return feature in self.active

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.active))

    def __len__(self) -> int:
        return len(self.active)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Configuration):
            return self.active == other.active
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.active)

    def __repr__(self) -> str:
        return "Configuration({%s})" % ", ".join(sorted(self.active))

    def sorted(self) -> list[str]:
        return sorted(self.active)


class FeatureModel:
    """Immutable feature model.

    Parameters
    ----------
    features : mapping of id to :class:`Feature`
    constraints : cross-tree constraints
    name : label used in reports
    check_void : raise :class:`ModelVoidError` when no configuration is valid
    """

    def __init__(
        self,
        features: Mapping[str, Feature],
        constraints: Sequence[CrossTreeConstraint] = (),
        name: str = "",
        check_void: bool = True,
    ):
        self.name = name
        self.features = MappingProxyType(dict(features))
        self.constraints = tuple(constraints)
        self._check_structure()
        self._compile()
        self._combo_cache: dict[str, tuple[int, ...]] = {}
        self._combo_sets: dict[str, frozenset[Configuration]] = {}
        self._degrees: dict[str, int] = {}
        self.reduced_cache: dict[frozenset, frozenset[int]] = {}
        if check_void and self._count(0, 0) == 0:
            raise ModelVoidError(f"feature model {name!r} has no valid configuration")

    # ------------------------------------------------------------------ setup

    def _check_structure(self) -> None:
        feats = self.features
        roots = [f.id for f in feats.values() if f.variability == ROOT]
        if len(roots) != 1:
            raise StructuralError(f"expected exactly one root feature, found {len(roots)}")
        root = feats[roots[0]]
        if root.parent is not None:
            raise StructuralError("the root feature cannot have a parent")
        for fid, feat in feats.items():
            if feat.id != fid:
                raise StructuralError(f"feature key {fid!r} does not match id {feat.id!r}")
            if feat.variability not in VARIABILITIES:
                raise StructuralError(f"unknown variability {feat.variability!r} for {fid!r}")
            if feat.group is not None and feat.group not in GROUP_KINDS:
                raise StructuralError(f"unknown group kind {feat.group!r} for {fid!r}")
            if feat.variability != ROOT:
                if feat.parent is None or feat.parent not in feats:
                    raise StructuralError(f"feature {fid!r} has no valid parent")
                if fid not in feats[feat.parent].children:
                    raise StructuralError(f"{feat.parent!r} does not list {fid!r} as child")
            elif feat.group is not None:
                raise StructuralError("the root feature cannot be a group member")
            if len(set(feat.children)) != len(feat.children):
                raise StructuralError(f"duplicate children under {fid!r}")
            for child in feat.children:
                if child not in feats or feats[child].parent != fid:
                    raise StructuralError(f"child {child!r} of {fid!r} does not point back")
            kinds = {feats[c].group for c in feat.children if feats[c].group is not None}
            if len(kinds) > 1:
                raise StructuralError(f"{fid!r} mixes group kinds {sorted(kinds)}")
        seen = set()
        stack = [root.id]
        while stack:
            fid = stack.pop()
            if fid in seen:
                raise StructuralError("feature tree contains a cycle")
            seen.add(fid)
            stack.extend(feats[fid].children)
        if len(seen) != len(feats):
            missing = sorted(set(feats) - seen)
            raise StructuralError(f"features unreachable from the root: {missing}")
        for con in self.constraints:
            if con.kind not in CONSTRAINT_KINDS:
                raise StructuralError(f"unknown constraint kind {con.kind!r}")
            if not con.lhs:
                raise StructuralError("constraint with empty left-hand side")
            if not con.rhs and con.kind != REQUIRES:
                raise StructuralError("only requires constraints may have an empty right-hand side")
            for fid in con.features():
                if fid not in feats:
                    raise StructuralError(f"constraint refers to unknown feature {fid!r}")

    def _compile(self) -> None:
        feats = self.features
        self.root = next(f.id for f in feats.values() if f.variability == ROOT)
        order = []
        stack = [self.root]
        while stack:
            fid = stack.pop()
            order.append(fid)
            stack.extend(reversed(feats[fid].children))
        self.order: tuple[str, ...] = tuple(order)
        self.index: Mapping[str, int] = MappingProxyType({f: i for i, f in enumerate(order)})
        n = len(order)
        idx = self.index
        self._parent = [idx[feats[f].parent] if feats[f].parent else -1 for f in order]
        self._mandatory = [feats[f].variability == MANDATORY for f in order]
        self._solitary: list[list[int]] = [[] for _ in range(n)]
        self._group: list[tuple[str, list[int]] | None] = [None] * n
        self._mand_mask = [0] * n
        self._group_mask = [0] * n
        for i, fid in enumerate(order):
            members = [idx[c] for c in feats[fid].children if feats[c].group is not None]
            self._solitary[i] = [idx[c] for c in feats[fid].children if feats[c].group is None]
            if members:
                kind = feats[order[members[0]]].group
                self._group[i] = (kind, members)
                self._group_mask[i] = sum(1 << m for m in members)
            for c in feats[fid].children:
                if feats[c].variability == MANDATORY:
                    self._mand_mask[i] |= 1 << idx[c]
        subtree = [1 << i for i in range(n)]
        for i in range(n - 1, 0, -1):  # children come after parents in pre-order
            subtree[self._parent[i]] |= subtree[i]
        self._subtree = subtree
        self._cons = [
            (c.kind == REQUIRES, self.mask(c.lhs), self.mask(c.rhs)) for c in self.constraints
        ]
        self._cons_mask = 0
        for _, lhs, rhs in self._cons:
            self._cons_mask |= lhs | rhs
        self.full_mask = (1 << n) - 1

    # ------------------------------------------------------------- utilities

    def __repr__(self) -> str:
        return f"FeatureModel({self.name!r}, {len(self.features)} features)"

    def __contains__(self, fid: object) -> bool:
        return fid in self.features

    def require(self, fid: str) -> Feature:
        try:
            return self.features[fid]
        except KeyError:
            raise StructuralError(f"unknown feature {fid!r} in model {self.name!r}") from None

    def mask(self, ids: Iterable[str]) -> int:
        m = 0
        for fid in ids:
            if fid not in self.index:
                raise StructuralError(f"unknown feature {fid!r} in model {self.name!r}")
            m |= 1 << self.index[fid]
        return m

    def ids(self, mask: int) -> list[str]:
        """Feature ids of ``mask`` in canonical order."""
        out = []
        while mask:
            low = mask & -mask
            out.append(self.order[low.bit_length() - 1])
            mask ^= low
        return out

    def config_key(self, config: Configuration) -> tuple[int, ...]:
        """Sort key implementing the canonical configuration order."""
        return tuple(sorted(self.index[f] for f in config.active))

    @cached_property
    def depth(self) -> int:
        depth = {self.root: 0}
        for fid in self.order[1:]:
            depth[fid] = depth[self.features[fid].parent] + 1
        return max(depth.values())

    @cached_property
    def optional_features(self) -> tuple[str, ...]:
        """Solitary optional features (group members excluded)."""
        return tuple(f for f in self.order
                     if self.features[f].variability == OPTIONAL and self.features[f].group is None)

    def subtree(self, fid: str) -> list[str]:
        return self.ids(self._subtree[self.index[fid]]) if fid in self.index else []

    # ------------------------------------------------------------ validation

    def valid_mask(self, m: int) -> bool:
        root_bit = 1
        if not m & root_bit or m & ~self.full_mask:
            return False
        parent = self._parent
        rest = m
        while rest:
            low = rest & -rest
            i = low.bit_length() - 1
            rest ^= low
            if i and not (m >> parent[i]) & 1:
                return False
            if self._mand_mask[i] & ~m:
                return False
            gmask = self._group_mask[i]
            if gmask:
                hits = (m & gmask).bit_count()
                if self._group[i][0] == ALTERNATIVE:
                    if hits != 1:
                        return False
                elif hits < 1:
                    return False
        return self._constraints_hold(m)

    def _constraints_hold(self, m: int) -> bool:
        for requires, lhs, rhs in self._cons:
            if m & lhs == lhs:
                if requires:
                    if not m & rhs:
                        return False
                elif m & rhs:
                    return False
        return True

    def is_valid(self, config: Configuration) -> bool:
        return self.valid_mask(self.mask(config.active))

    # ----------------------------------------------------------- enumeration

    def _expand_masks(self, include: int, exclude: int) -> list[int]:
        """Masks of all tree-valid assignments that activate every feature of
        ``include`` and none of ``exclude``; constraints are not checked."""
        solitary, groups, mandatory, subtree = (
            self._solitary, self._group, self._mandatory, self._subtree)

        def expand(i: int) -> list[int]:
            if exclude >> i & 1:
                return []
            results = [1 << i]
            for c in solitary[i]:
                opts = expand(c)
                if not mandatory[c] and not subtree[c] & include:
                    opts.append(0)
                if not opts:
                    return []
                results = [a | b for a in results for b in opts]
            group = groups[i]
            if group is not None:
                kind, members = group
                act = [expand(m) for m in members]
                off = [not mandatory[m] and not subtree[m] & include for m in members]
                opts = []
                if kind == ALTERNATIVE:
                    for j, choice in enumerate(act):
                        if choice and all(off[k] for k in range(len(members)) if k != j):
                            opts.extend(choice)
                else:
                    for sel in range(1, 1 << len(members)):
                        combos = [0]
                        for j in range(len(members)):
                            if sel >> j & 1:
                                if not act[j]:
                                    break
                                combos = [a | b for a in combos for b in act[j]]
                            elif not off[j]:
                                break
                        else:
                            opts.extend(combos)
                if not opts:
                    return []
                results = [a | b for a in results for b in opts]
            return results

        return expand(0)

    def _sorted_masks(self, masks: Iterable[int]) -> list[int]:
        return sorted(masks, key=self._mask_key)

    def _mask_key(self, m: int) -> tuple[int, ...]:
        out = []
        while m:
            low = m & -m
            out.append(low.bit_length() - 1)
            m ^= low
        return tuple(out)

    def enumerate_masks(self, include: int = 0, exclude: int = 0) -> list[int]:
        """Valid configurations as masks, propagating a partial assignment."""
        if include & exclude:
            return []
        masks = self._expand_masks(include, exclude)
        if self._cons:
            masks = [m for m in masks if self._constraints_hold(m)]
        return self._sorted_masks(masks)

    @cached_property
    def _space(self) -> tuple[tuple[int, ...], tuple[Configuration, ...], Mapping[int, int]]:
        masks = tuple(self.enumerate_masks())
        configs = tuple(Configuration(self.ids(m)) for m in masks)
        index = {m: i for i, m in enumerate(masks)}
        return masks, configs, index

    @property
    def masks(self) -> tuple[int, ...]:
        return self._space[0]

    def configurations(self) -> tuple[Configuration, ...]:
        """All valid configurations in canonical order."""
        return self._space[1]

    @property
    def size(self) -> int:
        return len(self._space[0])

    def config_index(self, config: Configuration) -> int:
        """Position of ``config`` in :meth:`configurations`, or -1 if invalid."""
        m = 0
        for fid in config.active:
            i = self.index.get(fid)
            if i is None:
                return -1
            m |= 1 << i
        return self._space[2].get(m, -1)

    def combination_indices(self, fid: str) -> tuple[int, ...]:
        """Indices (into :meth:`configurations`) of the configurations containing ``fid``."""
        cached = self._combo_cache.get(fid)
        if cached is None:
            self.require(fid)
            index = self._space[2]
            cached = tuple(index[m] for m in self.enumerate_masks(include=1 << self.index[fid]))
            self._combo_cache[fid] = cached
        return cached

    def combinations(self, fid: str) -> tuple[Configuration, ...]:
        configs = self._space[1]
        return tuple(configs[i] for i in self.combination_indices(fid))

    def combination_set(self, fid: str) -> frozenset[Configuration]:
        cached = self._combo_sets.get(fid)
        if cached is None:
            cached = self._combo_sets[fid] = frozenset(self.combinations(fid))
        return cached

    # -------------------------------------------------------------- counting

    def _count_tree(self, include: int, exclude: int) -> int:
        solitary, groups, mandatory, subtree = (
            self._solitary, self._group, self._mandatory, self._subtree)
        memo: dict[int, int] = {}

        def active(i: int) -> int:
            if i in memo:
                return memo[i]
            total = 1
            for c in solitary[i]:
                a = 0 if exclude >> c & 1 else active(c)
                z = 0 if mandatory[c] or subtree[c] & include else 1
                total *= a + z
                if not total:
                    break
            group = groups[i]
            if total and group is not None:
                kind, members = group
                a_s = [0 if exclude >> m & 1 else active(m) for m in members]
                z_s = [0 if mandatory[m] or subtree[m] & include else 1 for m in members]
                if kind == ALTERNATIVE:
                    ways = 0
                    for j, a in enumerate(a_s):
                        if a:
                            rest = 1
                            for k, z in enumerate(z_s):
                                if k != j:
                                    rest *= z
                            ways += a * rest
                else:
                    all_ways, none_ways = 1, 1
                    for a, z in zip(a_s, z_s):
                        all_ways *= a + z
                        none_ways *= z
                    ways = all_ways - none_ways
                total *= ways
            memo[i] = total
            return total

        if exclude & 1:
            return 0
        return active(0)

    def _count(self, include: int, exclude: int) -> int:
        if include & exclude:
            return 0
        if not self._cons:
            return self._count_tree(include, exclude)
        split = self._cons_mask & ~(include | exclude)
        bits = self._mask_key(split)
        if len(bits) > _MAX_COUNT_SPLIT:
            return len(self.enumerate_masks(include, exclude))
        total = 0
        for on in itertools.product((0, 1), repeat=len(bits)):
            sigma = sum(1 << b for b, v in zip(bits, on) if v)
            inc = include | sigma
            if not self._constraints_hold(inc & self._cons_mask):
                continue
            total += self._count_tree(inc, exclude | (split & ~sigma))
        return total

    def count(self, include: Iterable[str] = (), exclude: Iterable[str] = ()) -> int:
        """Number of valid configurations that activate all of ``include`` and
        none of ``exclude``, computed by counting rather than enumeration."""
        return self._count(self.mask(include), self.mask(exclude))

    def degree(self, fid: str) -> int:
        """Cached ``count(include=[fid])``."""
        cached = self._degrees.get(fid)
        if cached is None:
            cached = self._degrees[fid] = self.count(include=[fid])
        return cached

    # ----------------------------------------------------------- tree access

    def parent(self, fid: str) -> str | None:
        return self.require(fid).parent

    def siblings(self, fid: str) -> set[str]:
        feat = self.require(fid)
        if feat.parent is None:
            return set()
        return {c for c in self.features[feat.parent].children if c != fid}

    def leaves(self, config: Configuration) -> set[str]:
        active = config.active
        for fid in active:
            self.require(fid)
        return {f for f in active if not any(c in active for c in self.features[f].children)}

    # ----------------------------------------------------------------- edits

    def replace(self, features: Mapping[str, Feature] | None = None,
                constraints: Sequence[CrossTreeConstraint] | None = None,
                name: str | None = None) -> "FeatureModel":
        return FeatureModel(
            self.features if features is None else features,
            self.constraints if constraints is None else constraints,
            self.name if name is None else name,
        )

    def with_variability(self, changes: Mapping[str, str], name: str | None = None) -> "FeatureModel":
        feats = dict(self.features)
        for fid, variability in changes.items():
            feat = self.require(fid)
            if feat.variability == ROOT or variability not in (MANDATORY, OPTIONAL):
                raise StructuralError(f"cannot set variability of {fid!r} to {variability!r}")
            feats[fid] = Feature(fid, variability, feat.parent, feat.children, feat.group)
        return self.replace(feats, name=name)

    # --------------------------------------------------------- serialization

    def to_dict(self) -> dict:
        feats = self.features

        def node(fid: str) -> dict:
            feat = feats[fid]
            out: dict = {"id": fid}
            if feat.variability != ROOT:
                out["variability"] = feat.variability
            members = [c for c in feat.children if feats[c].group is not None]
            out["group"] = (
                {"kind": feats[members[0]].group, "members": members} if members else None
            )
            out["children"] = [node(c) for c in feat.children]
            return out

        return {
            "name": self.name,
            "root": node(self.root),
            "constraints": [
                {"kind": c.kind, "lhs": list(c.lhs), "rhs": list(c.rhs)} for c in self.constraints
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FeatureModel":
        try:
            return cls._from_dict(data)
        except (KeyError, TypeError, AttributeError) as exc:
            raise StructuralError(f"malformed feature model document: {exc!r}") from None

    @classmethod
    def _from_dict(cls, data: Mapping) -> "FeatureModel":
        features: dict[str, Feature] = {}

        def visit(node: Mapping, parent: str | None, group_kind: str | None) -> None:
            fid = node["id"]
            if not isinstance(fid, str) or not fid:
                raise StructuralError(f"feature ids must be non-empty strings, got {fid!r}")
            if fid in features:
                raise StructuralError(f"duplicate feature id {fid!r}")
            if parent is None:
                variability = ROOT
                if node.get("variability") not in (None, ROOT):
                    raise StructuralError("the root node takes no variability")
            else:
                variability = node.get("variability", OPTIONAL if group_kind else None)
                if variability not in (MANDATORY, OPTIONAL):
                    raise StructuralError(f"feature {fid!r} needs variability mandatory|optional")
            children = node.get("children") or []
            group = node.get("group")
            members: set[str] = set()
            kind = None
            if group:
                kind = group["kind"]
                if kind not in GROUP_KINDS:
                    raise StructuralError(f"unknown group kind {kind!r} under {fid!r}")
                members = set(group["members"])
                child_ids = {c["id"] for c in children}
                if not members <= child_ids:
                    raise StructuralError(f"group members of {fid!r} must be its children")
            features[fid] = Feature(
                fid, variability, parent, tuple(c["id"] for c in children), group_kind)
            for child in children:
                visit(child, fid, kind if child["id"] in members else None)

        visit(data["root"], None, None)
        constraints = []
        for con in data.get("constraints") or []:
            constraints.append(
                CrossTreeConstraint(con["kind"], tuple(con["lhs"]), tuple(con["rhs"])))
        return cls(features, constraints, data.get("name", ""))


# ---------------------------------------------------------------------------
# module-level operations


def configuration(*ids: str) -> Configuration:
    return Configuration(ids)


def validate(model: FeatureModel, config: Configuration) -> bool:
    """True iff ``config`` is an allowed feature combination of ``model``.

    Raises :class:`StructuralError` for ids unknown to the model.
    """
    return model.is_valid(config)


def enumerate_configurations(model: FeatureModel) -> tuple[Configuration, ...]:
    """The adaptation space: every valid configuration, in canonical order."""
    return model.configurations()


def feature_combinations(model: FeatureModel, fid: str) -> tuple[Configuration, ...]:
    """Valid configurations containing ``fid``, obtained by propagating the
    partial assignment ``fid = active`` through the tree."""
    return model.combinations(fid)


def parent(model: FeatureModel, fid: str) -> str | None:
    return model.parent(fid)


def siblings(model: FeatureModel, fid: str) -> set[str]:
    return model.siblings(fid)


def leaves(model: FeatureModel, config: Configuration) -> set[str]:
    """Active features of ``config`` that have no active child in ``config``."""
    return model.leaves(config)


def remove_subtrees(model: FeatureModel, removed: Iterable[str]) -> FeatureModel:
    """Copy of ``model`` without the features of ``removed`` and their subtrees.

    Constraints whose left-hand side loses a feature are dropped. Lost
    right-hand-side features are struck from the disjunction; a ``requires``
    left with nothing on the right forbids its left-hand side, an ``excludes``
    left with nothing on the right is dropped.
    """
    removed = set(removed)
    for fid in removed:
        model.require(fid)
    if not removed:
        return model
    if model.root in removed:
        raise ModelVoidError("removing the root feature leaves no configuration")
    gone = set()
    for fid in removed:
        gone.update(model.subtree(fid))
    feats = {}
    for fid, feat in model.features.items():
        if fid in gone:
            continue
        children = tuple(c for c in feat.children if c not in gone)
        feats[fid] = Feature(fid, feat.variability, feat.parent, children, feat.group)
    constraints = []
    for con in model.constraints:
        if any(f in gone for f in con.lhs):
            continue
        rhs = tuple(f for f in con.rhs if f not in gone)
        if not rhs and con.kind == EXCLUDES:
            continue
        constraints.append(CrossTreeConstraint(con.kind, con.lhs, rhs))
    return FeatureModel(feats, constraints, model.name)


def load_model(path: str | Path) -> FeatureModel:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StructuralError(f"{path}: not valid JSON ({exc})") from None
    return FeatureModel.from_dict(data)


def save_model(model: FeatureModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2)
        fh.write("\n")


def random_model(seed: int, n_features: int = 8, max_children: int = 3,
                 p_optional: float = 0.5, p_group: float = 0.3, p_or: float = 0.3,
                 n_constraints: int = 1, prefix: str = "F") -> FeatureModel:
    """Seeded random non-void feature model, mainly for property tests.

    Constraints that would void the model are discarded.
    """
    rng = Rng(seed)
    ids = [f"{prefix}{i}" for i in range(n_features)]
    children: dict[str, list[str]] = {fid: [] for fid in ids}
    parents: dict[str, str | None] = {ids[0]: None}
    for fid in ids[1:]:
        open_nodes = [p for p in parents if len(children[p]) < max_children]
        par = rng.choice(open_nodes)
        parents[fid] = par
        children[par].append(fid)
    feats = {ids[0]: Feature(ids[0], ROOT, None, tuple(children[ids[0]]))}
    group_of: dict[str, str] = {}
    for fid in ids:
        kids = children[fid]
        if len(kids) >= 2 and rng.random() < p_group:
            kind = OR if rng.random() < p_or else ALTERNATIVE
            size = 2 + rng.below(len(kids) - 1)
            for member in kids[:size]:
                group_of[member] = kind
    for fid in ids[1:]:
        variability = OPTIONAL if fid in group_of or rng.random() < p_optional else MANDATORY
        feats[fid] = Feature(fid, variability, parents[fid], tuple(children[fid]),
                             group_of.get(fid))
    model = FeatureModel(feats, (), f"random-{seed}")
    constraints: list[CrossTreeConstraint] = []
    for _ in range(n_constraints):
        if n_features < 3:
            break
        a, b = rng.permutation(ids[1:])[:2]
        kind = REQUIRES if rng.random() < 0.5 else EXCLUDES
        trial = constraints + [CrossTreeConstraint(kind, (a,), (b,))]
        try:
            model = FeatureModel(feats, trial, f"random-{seed}")
        except ModelVoidError:
            continue
        constraints = trial
    return model
