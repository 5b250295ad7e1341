"""Residual of the conformal transformation law against the FD step.

Prints CSV: case,step,residual,order
"""

import argparse

import numpy as np

from curvlab import conformal as cf
from curvlab import manifolds as mf

CASES = {
    "T3": (mf.FlatTorus.standard(3), lambda X: 1 + 0.05 * np.cos(X[..., 0])),
    "S3": (mf.RoundSphere(3), lambda X: 1 + 0.1 * np.sin(X[..., 0]) * np.cos(X[..., 1])),
    "S4": (mf.RoundSphere(4), lambda X: np.exp(0.1 * X[..., 2])),
}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025, 0.0125])
    args = p.parse_args()
    print("case,step,residual,order")
    for name, (spec, u) in CASES.items():
        X = mf.sample_points(spec, args.points, args.seed)
        res, orders = cf.convergence_order(spec, cf.ZeroFunction(), u, X, args.steps)
        for i, (h, r) in enumerate(zip(args.steps, res)):
            order = orders[i - 1] if i else float("nan")
            print(f"{name},{h},{r:.6e},{order:.3f}")


if __name__ == "__main__":
    main()
