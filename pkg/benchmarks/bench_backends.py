"""Compare the compiled kernel core against the pure-Python fallback.

Times the hot dynamics kernels (mass matrix/bias, RK4 step, open-loop
rollout, trajectory linearization) on a grasp-mode arm-plus-object model and
writes ``backends.csv`` next to this script (override with --out). Both
backends are checked to produce matching numbers before timing.

Usage: python3 benchmarks/bench_backends.py [--out CSV] [--repeat N]
"""

from __future__ import annotations

import argparse
import csv
import os
import time

import numpy as np

from tampkit.binding.bind import bind_action
from tampkit.dynamics.backend import BACKEND_NAME, get_backend
from tampkit.fixtures.loader import fixture_path
from tampkit import scenario as scenario_mod
from tampkit.symbolic.ground import ground


def grasp_model():
    """A bound grasp segment from the clutter fixture: arm + carried object."""
    scn = scenario_mod.load(fixture_path("clutter_small.yaml"))
    domain, problem = scenario_mod.load_symbolic(scn)
    scene = scenario_mod.build_scene(scn)
    base = scenario_mod.build_base_model(scn)
    action = next(a for a in ground(domain, problem)
                  if a.name == "grasp-top" and a.args[1] == "box-a")
    arm_state = np.concatenate([scene.q_home, np.zeros(scene.arm.n)])
    bound = bind_action(action, None, scene, arm_state, base)
    return bound.spec


def run_case(kernels, spec, U, repeat):
    ip, fp = spec.model.pack()
    x0 = np.asarray(spec.x_init, float)
    q = x0[: spec.model.nq]
    qd = x0[spec.model.nq:]
    n = len(q) - 3 if spec.model.obj is not None else len(q)
    qa, qda = q[-n:], qd[-n:]
    X, _ = kernels.rollout(ip, fp, x0, U, spec.h)

    cases = {
        "arm_mass_bias": lambda: kernels.arm_mass_bias(ip, fp, qa, qda),
        "rk4_step": lambda: kernels.rk4_step(ip, fp, x0, U[0], spec.h),
        "rollout": lambda: kernels.rollout(ip, fp, x0, U, spec.h),
        "linearize_traj": lambda: kernels.linearize_traj(ip, fp, X, U, spec.h),
    }
    results = {}
    for name, fn in cases.items():
        fn()  # warm-up
        reps = repeat if name in ("rollout", "linearize_traj") else repeat * 50
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        results[name] = 1000.0 * (time.perf_counter() - t0) / reps
    return results


def check_agreement(spec, U):
    py, cc = get_backend("python"), get_backend("compiled")
    ip, fp = spec.model.pack()
    Xp, Lp = py.rollout(ip, fp, np.asarray(spec.x_init, float), U, spec.h)
    Xc, Lc = cc.rollout(ip, fp, np.asarray(spec.x_init, float), U, spec.h)
    err = max(np.abs(Xp - Xc).max(), np.abs(Lp - Lc).max() if Lp.size else 0.0)
    if err > 1e-9:
        raise AssertionError(f"backend mismatch: rollout deviation {err:.3e}")
    return err


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__),
                                                  "backends.csv"))
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    spec = grasp_model()
    rng = np.random.default_rng(0)
    U = rng.normal(0.0, 1.0, (spec.N - 1, spec.model.nu))
    err = check_agreement(spec, U)
    print(f"backend agreement: max rollout deviation {err:.3e}")
    print(f"default backend here: {BACKEND_NAME}")

    rows = []
    for backend in ("python", "compiled"):
        try:
            kernels = get_backend(backend)
        except ImportError:
            print(f"{backend} backend unavailable, skipping")
            continue
        timings = run_case(kernels, spec, U, args.repeat)
        for kernel, ms in timings.items():
            rows.append({"backend": backend, "kernel": kernel, "ms_per_call": ms})
            print(f"{backend:9s} {kernel:15s} {ms:10.4f} ms/call")

    by_kernel = {}
    for r in rows:
        by_kernel.setdefault(r["kernel"], {})[r["backend"]] = r["ms_per_call"]
    for kernel, t in sorted(by_kernel.items()):
        if "python" in t and "compiled" in t:
            print(f"speedup {kernel:15s} {t['python'] / t['compiled']:6.1f}x")

    with open(args.out, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["backend", "kernel", "ms_per_call"])
        w.writeheader()
        for r in rows:
            w.writerow({**r, "ms_per_call": f"{r['ms_per_call']:.6f}"})
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
