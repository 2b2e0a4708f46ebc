"""Feature degrees and adaptation-space deltas between two feature models."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .model import Configuration, FeatureModel


def conf_deg(model: FeatureModel, fid: str) -> int:
    """Feature degree: number of valid configurations that contain ``fid``.

    Counted through the subtree product formulas, without materialising the
    configurations.
    """
    model.require(fid)
    return model.degree(fid)


@dataclass(frozen=True)
class ModelDelta:
    """Change of the adaptation space from ``before`` to ``after``."""

    added: frozenset[Configuration]
    removed: frozenset[Configuration]
    retained: frozenset[Configuration]
    added_features: frozenset[str]
    removed_features: frozenset[str]

    @property
    def is_identity(self) -> bool:
        return not (self.added or self.removed or self.added_features or self.removed_features)

    def to_dict(self, listings: bool = False) -> dict:
        out = {
            "added": len(self.added),
            "removed": len(self.removed),
            "retained": len(self.retained),
            "added_features": sorted(self.added_features),
            "removed_features": sorted(self.removed_features),
        }
        if listings:
            for key in ("added", "removed", "retained"):
                configs = getattr(self, key)
                out[f"{key}_configurations"] = sorted(c.sorted() for c in configs)
        return out

    def to_json(self, listings: bool = False) -> str:
        return json.dumps(self.to_dict(listings), indent=2)


def delta(before: FeatureModel, after: FeatureModel) -> ModelDelta:
    old = frozenset(before.configurations())
    new = frozenset(after.configurations())
    return ModelDelta(
        added=new - old,
        removed=old - new,
        retained=new & old,
        added_features=frozenset(after.features) - frozenset(before.features),
        removed_features=frozenset(before.features) - frozenset(after.features),
    )
