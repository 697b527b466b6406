"""Named surface presets shipped with the package (``zoo/*.json``)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .surface import MetricSurface, SurfaceSpec, build_surface, spec_from_dict


@dataclass(frozen=True)
class ZooEntry:
    name: str
    spec: SurfaceSpec
    scale: float
    description: str
    h_factor: float = 0.02
    version: int = 1

    def surface(self) -> MetricSurface:
        return build_surface(self.spec, self.scale, name=self.name)

    def default_h(self, factor: float | None = None) -> float:
        """``factor * min(a, L)``, or ``factor * a`` when there is no flat end."""
        surf = self.surface()
        a = max(surf.boundary_lengths)
        f = self.h_factor if factor is None else factor
        return f * (min(a, surf.L) if surf.L > 0 else a)

    def strip_depth(self) -> float:
        """Chart depth of the boundary strips used for mixed problems.

        The flat depth ``L`` when it leaves a gap between the two strips,
        a quarter of the height otherwise.
        """
        surf = self.surface()
        t0, t1 = surf.t_range
        half = 0.5 * (t1 - t0)
        if 0 < surf.depth < half:
            return surf.depth
        return 0.5 * half

    @property
    def family(self) -> str:
        return type(self.spec).__name__


@lru_cache(maxsize=None)
def _load_all() -> dict:
    out = {}
    for item in sorted(resources.files(__package__).joinpath("zoo").iterdir(), key=lambda p: p.name):
        if not item.name.endswith(".json"):
            continue
        doc = json.loads(item.read_text())
        spec, scale = spec_from_dict(doc["surface"])
        out[doc["name"]] = ZooEntry(
            name=doc["name"],
            spec=spec,
            scale=scale,
            description=doc.get("description", ""),
            h_factor=float(doc.get("h_factor", 0.02)),
            version=int(doc.get("version", 1)),
        )
    return out


def names() -> list:
    return list(_load_all())


def get(name: str) -> ZooEntry:
    zoo = _load_all()
    if name not in zoo:
        raise KeyError(f"unknown zoo surface {name!r}; known: {', '.join(zoo)}")
    return zoo[name]


def entries() -> list:
    return list(_load_all().values())
