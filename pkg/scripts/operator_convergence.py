"""Relative error of the discrete operator on (1 - x^2)_+^{alpha/2} against adaptive quadrature."""

import argparse

import numpy as np

from nonlocal_parabolic import Grid, apply_L, assemble, make_fractional
from nonlocal_parabolic.experiments import profile_quadrature
from nonlocal_parabolic.solver import ConstantDatum


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alphas", type=float, nargs="+", default=[0.5, 1.0, 1.5, 1.9, 1.99])
    p.add_argument("--hs", type=float, nargs="+", default=[0.04, 0.02, 0.01, 0.005])
    p.add_argument("--radius", type=float, default=0.9)
    args = p.parse_args(argv)
    print("alpha,h,max_rel_error,rate")
    for a in args.alphas:
        k = make_fractional(1, a, "exact")
        prev = None
        for h in args.hs:
            g = Grid(1, h, 2.0, 6.0)
            x = g.x()
            u = np.clip(1 - x**2, 0, None) ** (a / 2)
            Lu = apply_L(assemble(k, g), u, ConstantDatum(0.0, 1))
            xi = x[g.interior]
            sel = np.abs(xi) < args.radius
            ref = np.array([profile_quadrature(a, k, float(v)) for v in xi[sel]])
            err = float(np.max(np.abs(Lu[sel] - ref) / np.abs(ref)))
            rate = "" if prev is None else "%.3f" % (np.log(prev[1] / err) / np.log(prev[0] / h))
            print(f"{a:.12g},{h:.12g},{err:.6g},{rate}", flush=True)
            prev = (h, err)


if __name__ == "__main__":
    main()
