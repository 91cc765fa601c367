#!/usr/bin/env python3
"""
Per-step trace of plain Adam (step 0.6) on the 100-d sphere.

Prints f/f0 at a few checkpoints and the step where the best ratio was
reached. Adam's normalized steps do not shrink with the gradient, so once
the iterate is tiny the second-moment estimate decays faster than the
first and the iterate is thrown back out; the trace makes that visible.
"""

import argparse

import numpy as np

from evokit.core import RngStream
from evokit.optim import Adam
from evokit.problem import eval_sphere, grad_sphere, sphere_problem


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--dim", type=int, default=100)
    args = ap.parse_args()

    checkpoints = [100, 250, 500, 1000, 1500, args.steps]
    print("seed  " + "  ".join(f"t={t:<6}" for t in checkpoints) + "  best(t)")
    for seed in range(args.seeds):
        x = sphere_problem(args.dim).generate_values(1, RngStream(seed).derive("init"))
        f0 = eval_sphere(x)[0]
        opt = Adam(0.6)
        ratios = []
        for _ in range(args.steps):
            x = x - opt.step(grad_sphere(x))
            ratios.append(eval_sphere(x)[0] / f0)
        best = int(np.argmin(ratios))
        cells = "  ".join(f"{ratios[t - 1]:.1e}" for t in checkpoints)
        print(f"{seed:<4}  {cells}  {ratios[best]:.1e}({best + 1})")


if __name__ == "__main__":
    main()
