"""Compare the compiled and pure-Python kernel backends.

Times SIPG assembly + factorization, the factored solve, and a full
semi-discrete right-hand side evaluation for a few mesh sizes, and checks
that both backends return the same answer.

    python3 benchmarks/bench_kernels.py [--sizes 256,1024,4096] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from igrlab import backend
from igrlab.dg1d import Mesh1D, project, sipg_solve, sipg_system
from igrlab.models import ModelParams, initial_condition_sod, semidiscrete_rhs


def cases(n):
    mesh = Mesh1D(n)
    rho = project(mesh, lambda x: 1.0 + 0.5 * np.sin(2 * np.pi * x))
    rhs = project(mesh, lambda x: np.cos(2 * np.pi * x))
    alpha = 5 * mesh.h**2
    model = ModelParams.default_for("IGR", mesh)
    state = initial_condition_sod(mesh, model)
    system = sipg_system(rho, alpha)
    return {
        "assemble+factor": lambda: sipg_system(rho, alpha),
        "solve": lambda: sipg_solve(rho, alpha, rhs, system=system),
        "IGR rhs": lambda: semidiscrete_rhs(state, model),
    }, lambda: sipg_solve(rho, alpha, rhs).coeffs


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="256,1024,4096")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    names = backend.available_backends()
    if "compiled" not in names:
        print("compiled extension not built; only the python backend is available")
    print(f"{'n':>6s} {'kernel':16s} " + " ".join(f"{b + ' [ms]':>14s}" for b in names) + "   speedup")
    for n in (int(s) for s in args.sizes.split(",")):
        times, answers = {}, {}
        for b in names:
            previous = backend.use_backend(b)
            try:
                fns, answer = cases(n)
                answers[b] = answer()
                for label, fn in fns.items():
                    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
                    best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
                    times[label, b] = 1e3 * best
            finally:
                backend.use_backend(previous)
        for label in fns:
            row = " ".join(f"{times[label, b]:14.3f}" for b in names)
            speed = f"{times[label, 'python'] / times[label, 'compiled']:8.1f}x" if len(names) > 1 else ""
            print(f"{n:6d} {label:16s} {row}   {speed}")
        if len(names) > 1:
            a, b = answers["python"], answers["compiled"]
            print(f"{'':6s} {'max |diff|':16s} {np.max(np.abs(a - b)):14.2e}")


if __name__ == "__main__":
    main()
