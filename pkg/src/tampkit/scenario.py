"""Scenario files: a versioned YAML description of arm, world, and solver config.

A scenario bundles everything one run needs: the arm model, the geometric
scene (objects, surfaces, bins), paths to the symbolic domain/problem files,
per-action profile overrides, and solver settings. ``load`` validates the
tree; ``build_*`` helpers turn it into toolkit objects.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

import numpy as np
import yaml

from .binding.bind import DEFAULT_PROFILES, ActionProfile
from .binding.scene import BinGeom, ObjectState, Scene, Surface
from .dynamics.models import MODE_FREE, ArmModel, ContactSpec, ObjectModel, SystemModel
from .errors import ScenarioError
from .search.search import SearchConfig
from .symbolic.parser import parse_domain, parse_problem
from .trajopt.admm import AdmmConfig
from .trajopt.ddp import DdpOptions

SCENARIO_VERSION = 1

_ARM_VECTORS = ("lengths", "masses", "inertias", "coms",
                "q_lo", "q_hi", "qd_max", "tau_max")
_OBJECT_FIELDS = ("mass", "inertia", "hx", "hz", "pose")
_PROFILE_FIELDS = {f.name for f in dataclasses.fields(ActionProfile)}


@dataclass
class Scenario:
    path: str | None
    data: dict

    @property
    def name(self) -> str:
        return self.data.get("name", "unnamed")

    def resolve(self, rel: str) -> str:
        base = os.path.dirname(self.path) if self.path else "."
        return os.path.join(base, rel)


def _require(cond, msg):
    if not cond:
        raise ScenarioError(msg)


def validate(data: dict) -> None:
    _require(isinstance(data, dict), "scenario root must be a mapping")
    _require(data.get("version") == SCENARIO_VERSION,
             f"scenario version must be {SCENARIO_VERSION}")
    arm = data.get("arm")
    _require(isinstance(arm, dict), "scenario needs an 'arm' mapping")
    n = len(arm.get("lengths", ()))
    _require(n >= 1, "arm.lengths must be nonempty")
    for key in _ARM_VECTORS:
        vals = arm.get(key)
        _require(isinstance(vals, list) and len(vals) == n,
                 f"arm.{key} must list {n} values")
    _require(arm.get("gravity", 9.81) > 0, "arm.gravity must be positive")
    generated = "generator" in data
    if not generated:
        for key in ("domain", "problem"):
            _require(isinstance(data.get(key), str), f"scenario needs a '{key}' path")
    objects = data.get("objects", {})
    _require(isinstance(objects, dict), "'objects' must map names to definitions")
    for oname, od in objects.items():
        for f in _OBJECT_FIELDS:
            _require(f in od, f"object {oname} missing '{f}'")
        _require(od["mass"] > 0 and od["inertia"] > 0,
                 f"object {oname} mass/inertia must be positive")
        _require(len(od["pose"]) == 3, f"object {oname} pose must be (x, z, theta)")
        _require(od.get("base_cost", 1.0) >= 0,
                 f"object {oname} base_cost must be nonnegative")
    for sname, sd in data.get("surfaces", {}).items():
        _require(sd["x0"] < sd["x1"], f"surface {sname} has empty extent")
    for bname, bd in data.get("bins", {}).items():
        _require("x" in bd and "z" in bd, f"bin {bname} needs x and z")
    scene = data.get("scene", {})
    q_home = scene.get("q_home")
    _require(isinstance(q_home, list) and len(q_home) == n,
             f"scene.q_home must list {n} joint angles")
    for key, val in data.get("profiles", {}).items():
        _require(isinstance(val, dict), f"profiles.{key} must be a mapping")
        unknown = set(val) - _PROFILE_FIELDS
        _require(not unknown, f"profiles.{key} has unknown fields {sorted(unknown)}")
    solver = data.get("solver", {})
    for key in ("rho_j", "rho_u", "eps", "priority_alpha", "baumgarte_alpha"):
        if key in solver:
            _require(solver[key] > 0, f"solver.{key} must be positive")
    if "depth_bound" in solver:
        _require(int(solver["depth_bound"]) >= 1, "solver.depth_bound must be >= 1")


def load(path: str) -> Scenario:
    if not os.path.exists(path):
        raise ScenarioError(f"scenario file not found: {path}")
    with open(path) as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ScenarioError(f"malformed scenario {path}: {exc}") from exc
    validate(data)
    scn = Scenario(path, data)
    if "generator" not in data:
        for key in ("domain", "problem"):
            p = scn.resolve(data[key])
            if not os.path.exists(p):
                raise ScenarioError(f"scenario references missing file: {p}")
    return scn


def loads(text: str) -> Scenario:
    data = yaml.safe_load(text)
    validate(data)
    return Scenario(None, data)


def serialize(scn: Scenario) -> str:
    return yaml.safe_dump(scn.data, sort_keys=False)


def build_arm(scn: Scenario) -> ArmModel:
    arm = scn.data["arm"]
    return ArmModel(
        **{k: tuple(float(v) for v in arm[k]) for k in _ARM_VECTORS},
        gravity=float(arm.get("gravity", 9.81)),
    )


def build_base_model(scn: Scenario) -> SystemModel:
    solver = scn.data.get("solver", {})
    contact = ContactSpec(MODE_FREE, mu=float(solver.get("mu", 0.3)))
    return SystemModel(build_arm(scn), None, contact,
                       baumgarte_alpha=float(solver.get("baumgarte_alpha", 10.0)))


def build_scene(scn: Scenario, arm: ArmModel | None = None) -> Scene:
    arm = arm or build_arm(scn)
    sc = scn.data.get("scene", {})
    objects = {}
    for name, od in scn.data.get("objects", {}).items():
        model = ObjectModel(float(od["mass"]), float(od["inertia"]),
                            float(od["hx"]), float(od["hz"]))
        objects[name] = ObjectState(model, np.asarray(od["pose"], float),
                                    base_cost=float(od.get("base_cost", 1.0)))
    surfaces = {name: Surface(name, float(sd["x0"]), float(sd["x1"]), float(sd["z"]))
                for name, sd in scn.data.get("surfaces", {}).items()}
    bins = {name: BinGeom(name, float(bd["x"]), float(bd["z"]))
            for name, bd in scn.data.get("bins", {}).items()}
    return Scene(
        arm, objects, surfaces, bins,
        q_home=np.asarray(sc["q_home"], float),
        standoff=float(sc.get("standoff", 0.10)),
        drop_clearance=float(sc.get("drop_clearance", 0.05)),
        throw_release=tuple(sc.get("throw_release", (0.5, 0.6))),
        throw_angle=float(sc.get("throw_angle", np.pi / 4)),
    )


def build_profiles(scn: Scenario) -> dict[str, ActionProfile]:
    profiles = dict(DEFAULT_PROFILES)
    for name, over in scn.data.get("profiles", {}).items():
        base = profiles.get(name, ActionProfile())
        profiles[name] = dataclasses.replace(base, **over)
    return profiles


def build_config(scn: Scenario, seed: int | None = None) -> SearchConfig:
    s = scn.data.get("solver", {})
    ddp = DdpOptions(max_iters=int(s.get("ddp_max_iters", 120)))
    eps = float(s.get("eps", 1e-3))
    admm = AdmmConfig(
        rho_j=float(s.get("rho_j", 1.0)),
        rho_u=float(s.get("rho_u", 0.05)),
        eps_x=float(s.get("eps_x", eps)),
        eps_u=float(s.get("eps_u", eps)),
        max_iters=int(s.get("admm_max_iters", 200)),
        stage=2,
    )
    return SearchConfig(
        depth_bound=int(s.get("depth_bound", 8)),
        priority_alpha=float(s.get("priority_alpha", 2.0)),
        seed=int(s.get("seed", 0)) if seed is None else int(seed),
        refine=bool(s.get("refine", True)),
        allowed_actions=(tuple(s["allowed_actions"])
                         if "allowed_actions" in s else None),
        ddp_opts=ddp,
        admm=admm,
        profiles=build_profiles(scn),
    )


def load_symbolic(scn: Scenario):
    """Parse the referenced domain and problem files."""
    if "generator" in scn.data:
        raise ScenarioError("generated scenarios have no symbolic files; "
                            "use the generator module")
    with open(scn.resolve(scn.data["domain"])) as f:
        domain = parse_domain(f.read())
    with open(scn.resolve(scn.data["problem"])) as f:
        problem = parse_problem(f.read(), domain)
    return domain, problem
