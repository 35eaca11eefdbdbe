"""Physical models for the planar arm + object system and their packed form.

The kernel backends (compiled and pure-Python) take the model as two flat
arrays -- ``iparams`` (mode, link count) and ``fparams`` (scalars followed by
per-link data) -- so the same memory layout serves both.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

MODE_FREE = 0
MODE_GRASP = 1
MODE_PUSH = 2

MODE_NAMES = {MODE_FREE: "free", MODE_GRASP: "grasp-hold", MODE_PUSH: "push"}

# fparams scalar slots; per-link blocks (length, mass, inertia, com offset) follow.
_NSCALAR = 9
F_G, F_ALPHA, F_MU, F_PUSH_DIR, F_GRASP_DTHETA, F_OBJ_M, F_OBJ_I, F_OBJ_HX, F_OBJ_HZ = range(_NSCALAR)


@dataclass(frozen=True)
class ArmModel:
    lengths: tuple[float, ...]
    masses: tuple[float, ...]
    inertias: tuple[float, ...]  # about each link's COM
    coms: tuple[float, ...]  # COM offset along the link
    q_lo: tuple[float, ...]
    q_hi: tuple[float, ...]
    qd_max: tuple[float, ...]
    tau_max: tuple[float, ...]
    gravity: float = 9.81

    def __post_init__(self):
        n = self.n
        for name in ("masses", "lengths", "inertias"):
            vals = getattr(self, name)
            if len(vals) != n or any(v <= 0 for v in vals):
                raise ValueError(f"{name} must be {n} strictly positive values")
        if len(self.coms) != n:
            raise ValueError("coms length mismatch")
        for lo, hi in zip(self.q_lo, self.q_hi):
            if not lo < hi:
                raise ValueError("joint limit lower bound must be below upper bound")

    @property
    def n(self) -> int:
        return len(self.lengths)

    @property
    def reach(self) -> float:
        return float(sum(self.lengths))


@dataclass(frozen=True)
class ObjectModel:
    mass: float
    inertia: float
    hx: float  # half-extents of the box footprint
    hz: float

    def __post_init__(self):
        if self.mass <= 0 or self.inertia <= 0:
            raise ValueError("object mass and inertia must be positive")


_PLACEHOLDER_OBJECT = ObjectModel(1.0, 1.0, 0.05, 0.05)


@dataclass(frozen=True)
class ContactSpec:
    """Contact configuration for one trajectory segment.

    mode: MODE_FREE / MODE_GRASP / MODE_PUSH.
    grasp_dtheta: tool-to-object relative angle locked at attachment.
    push_dir: +1 pushes toward +x (contact on the left face), -1 the opposite.
    mu: kinetic table-friction coefficient folded into the external force.
    """

    mode: int
    grasp_dtheta: float = 0.0
    push_dir: float = 1.0
    mu: float = 0.3


@dataclass(frozen=True)
class SystemModel:
    arm: ArmModel
    obj: ObjectModel | None
    contact: ContactSpec
    baumgarte_alpha: float = 10.0

    def __post_init__(self):
        if self.contact.mode != MODE_FREE and self.obj is None:
            raise ValueError("contact modes need an object model")

    @property
    def nq(self) -> int:
        return self.arm.n if self.contact.mode == MODE_FREE else 3 + self.arm.n

    @property
    def nx(self) -> int:
        return 2 * self.nq

    @property
    def nu(self) -> int:
        return self.arm.n

    @property
    def nlam(self) -> int:
        return {MODE_FREE: 0, MODE_GRASP: 3, MODE_PUSH: 1}[self.contact.mode]

    def pack(self) -> tuple[np.ndarray, np.ndarray]:
        arm = self.arm
        obj = self.obj or _PLACEHOLDER_OBJECT
        ip = np.array([self.contact.mode, arm.n], dtype=np.int64)
        fp = np.empty(_NSCALAR + 4 * arm.n)
        fp[F_G] = arm.gravity
        fp[F_ALPHA] = self.baumgarte_alpha
        fp[F_MU] = self.contact.mu
        fp[F_PUSH_DIR] = self.contact.push_dir
        fp[F_GRASP_DTHETA] = self.contact.grasp_dtheta
        fp[F_OBJ_M] = obj.mass
        fp[F_OBJ_I] = obj.inertia
        fp[F_OBJ_HX] = obj.hx
        fp[F_OBJ_HZ] = obj.hz
        n = arm.n
        fp[_NSCALAR:_NSCALAR + n] = arm.lengths
        fp[_NSCALAR + n:_NSCALAR + 2 * n] = arm.masses
        fp[_NSCALAR + 2 * n:_NSCALAR + 3 * n] = arm.inertias
        fp[_NSCALAR + 3 * n:_NSCALAR + 4 * n] = arm.coms
        return ip, fp

    def with_mode(self, contact: ContactSpec, obj: ObjectModel | None = None) -> "SystemModel":
        return replace(self, contact=contact, obj=obj if obj is not None else self.obj)
