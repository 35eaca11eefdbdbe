"""Geometric world state shared by the binder and the search."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..dynamics.models import ArmModel, ObjectModel


@dataclass
class ObjectState:
    model: ObjectModel
    pose: np.ndarray  # (x, z, theta)
    base_cost: float = 1.0
    attached: bool = False
    grasp_dtheta: float = 0.0  # tool-to-object angle recorded at attachment

    def copy(self) -> "ObjectState":
        return ObjectState(self.model, self.pose.copy(), self.base_cost,
                           self.attached, self.grasp_dtheta)


@dataclass(frozen=True)
class Surface:
    name: str
    x0: float
    x1: float
    z: float  # top surface height

    def __post_init__(self):
        if not self.x0 < self.x1:
            raise ValueError(f"surface {self.name} has empty extent")

    def contains_x(self, x: float) -> bool:
        return self.x0 <= x <= self.x1


@dataclass(frozen=True)
class BinGeom:
    name: str
    x: float
    z: float  # rim height at the centroid


@dataclass
class Scene:
    arm: ArmModel
    objects: dict[str, ObjectState]
    surfaces: dict[str, Surface]
    bins: dict[str, BinGeom]
    q_home: np.ndarray
    standoff: float = 0.10  # approach height above the grasp point
    drop_clearance: float = 0.05  # release height above the bin rim
    throw_release: tuple[float, float] = (0.5, 0.6)
    throw_angle: float = np.pi / 4

    def copy(self) -> "Scene":
        return replace(
            self,
            objects={k: v.copy() for k, v in self.objects.items()},
            surfaces=dict(self.surfaces),
            bins=dict(self.bins),
            q_home=self.q_home.copy(),
        )

    def location(self, name: str):
        """Bin or surface by name."""
        if name in self.bins:
            return self.bins[name]
        if name in self.surfaces:
            return self.surfaces[name]
        raise KeyError(name)
