"""Sweep alpha towards 2 and print the weak-Harnack constants per alpha as CSV."""

import argparse
import sys

import numpy as np

from nonlocal_parabolic.benchmarks import KernelSpec, harnack_field
from nonlocal_parabolic.experiments import HARNACK_CONSTANTS, harnack_constants


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alphas", type=float, nargs="+", default=[1.5, 1.7, 1.9, 1.95, 1.99])
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--normalization", choices=["simple", "exact"], default="simple")
    args = p.parse_args(argv)
    spec = KernelSpec(normalization=args.normalization)
    cols = [f"{op}.{name}" for op, name in HARNACK_CONSTANTS]
    print(",".join(["alpha"] + cols))
    table = []
    for a in args.alphas:
        consts = harnack_constants(harnack_field(a, spec, args.h))
        row = [consts[key] for key in HARNACK_CONSTANTS]
        table.append(row)
        print(",".join(["%.12g" % a] + ["%.6g" % v for v in row]), flush=True)
    spread = np.max(table, axis=0) / np.min(table, axis=0)
    print(",".join(["max/min"] + ["%.4g" % v for v in spread]), file=sys.stderr)


if __name__ == "__main__":
    main()
