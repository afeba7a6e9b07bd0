"""Benchmark problems shared by the experiments, the CLI and the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .discretization import Grid
from .kernels import Kernel, make_fractional, named_coefficient
from .solver import SolutionField, solve


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "fractional"
    dim: int = 1
    normalization: str = "simple"
    alpha0: float = 0.4
    lam: float = 10.0
    coeff: str = "unit"

    def build(self, alpha: float) -> Kernel:
        if self.kind != "fractional":
            raise ValueError("benchmarks use fractional kernels")
        return make_fractional(
            self.dim, alpha, self.normalization, alpha0=self.alpha0, lam=self.lam, coeff=named_coefficient(self.coeff)
        )


def default_dt(h: float, alpha: float) -> float:
    return h ** min(alpha, 1.0)


def bump(x, width: float = 1.8, shift: float = 0.0):
    """(1 - |x - shift e1|^2 / width^2)_+^2."""
    x = np.array(x, dtype=float)
    if x.ndim > 1:
        x[..., 0] -= shift
        r2 = np.sum(x**2, axis=-1)
    else:
        r2 = (x - shift) ** 2
    return np.clip(1 - r2 / width**2, 0.0, None) ** 2


def harnack_field(
    alpha: float,
    spec: KernelSpec = KernelSpec(),
    h: float = 0.05,
    dt: Optional[float] = None,
    theta: float = 1.0,
    shift: float = 0.0,
) -> SolutionField:
    """Nonnegative bump at t = -1, zero exterior, f = 0, on (-1, 1) x B_2."""
    grid = Grid(spec.dim, h, 2.0, 6.0, (0.0,) * spec.dim)
    dt = h**alpha if dt is None else dt
    return solve(
        spec.build(alpha), grid, initial=lambda x: bump(x, shift=shift), exterior=0.0,
        t_span=(-1.0, 1.0), dt=dt, theta=theta,
    )


@dataclass(frozen=True)
class StepDatum:
    """Indicator of {x_1 > 0}; points carry a trailing axis of length 2 in d=2."""

    dim: int = 1

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        first = x if self.dim == 1 else x[..., 0]
        return (first > 0).astype(float)


def holder_field(
    alpha: float,
    spec: KernelSpec = KernelSpec(),
    h: float = 0.02,
    dt: Optional[float] = None,
    jump: float = 0.3,
    theta: float = 1.0,
) -> SolutionField:
    """Discontinuous data: indicator of x > jump at t = -2, exterior indicator of x > 0, on (-2, 0) x B_3."""
    grid = Grid(spec.dim, h, 3.0, 9.0, (0.0,) * spec.dim)
    dt = h**alpha if dt is None else dt

    def initial(x):
        x = np.asarray(x, dtype=float)
        first = x if x.ndim == 1 else x[..., 0]
        return (first > jump).astype(float)

    return solve(
        spec.build(alpha), grid, initial=initial, exterior=StepDatum(spec.dim), t_span=(-2.0, 0.0), dt=dt, theta=theta
    )


def growth_field(
    alpha: float,
    spec: KernelSpec = KernelSpec(),
    h: float = 0.05,
    dt: Optional[float] = None,
    eps0: float = 0.05,
    amplitude: float = 2.5,
    theta: float = 1.0,
) -> SolutionField:
    """Bump of height `amplitude` on B_1 at t = -2 with forcing -eps0 on B_1, zero exterior."""
    grid = Grid(spec.dim, h, 2.0, 6.0, (0.0,) * spec.dim)
    dt = h**alpha if dt is None else dt

    def radius(x):
        x = np.asarray(x, dtype=float)
        return np.abs(x) if x.ndim == 1 else np.sqrt(np.sum(x**2, axis=-1))

    def f(t, x):
        return -eps0 * (radius(x) < 1.0)

    return solve(
        spec.build(alpha), grid, initial=lambda x: amplitude * np.clip(1 - radius(x) ** 2, 0.0, None),
        exterior=0.0, f=f, t_span=(-2.0, 0.0), dt=dt, theta=theta,
    )


@dataclass
class ScalingCase:
    original: SolutionField
    pulled_back: SolutionField
    standard: SolutionField
    r: float
    xi: float
    tau: float
    f_value: float


def scaling_case(
    alpha: float,
    r: float = 0.5,
    xi: float = 0.3,
    tau: float = 0.7,
    h: float = 0.05,
    f_value: float = 0.2,
    coeff: str = "oscillating",
) -> ScalingCase:
    """One problem solved on Q_2r(xi, tau) and its unit-scale pull-back solved directly."""
    from .geometry import scale_problem

    spec = KernelSpec(coeff=coeff)
    k = spec.build(alpha)
    grid = Grid(1, h * r, 2 * r, 6 * r, (xi,))
    span = (tau - r**alpha, tau + r**alpha)
    orig = solve(k, grid, initial=lambda x: bump((np.asarray(x) - xi) / r), exterior=0.0, f=f_value, t_span=span, dt=(h * r) ** alpha)
    kt, pulled, s = scale_problem(k, orig, r, xi, tau)
    std = solve(kt, Grid(1, h, 2.0, 6.0), initial=bump, exterior=0.0, f=f_value * s, t_span=(-1.0, 1.0), dt=h**alpha)
    return ScalingCase(orig, pulled, std, r, xi, tau, f_value)
