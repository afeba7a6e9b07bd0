"""Jump kernels k_t(x, y) = a(t, x, y) k0(x, y) and numerical membership checks.

All built-in densities are translation invariant, k0(x, y) = profile(x - y), and
symmetric under z -> -z. Homogeneous densities (fractional, sequence, cone) have
the form c(theta) |z|^(-d-alpha), which gives closed-form radial integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

KINDS = ("fractional", "sequence", "cone", "custom-table")
NORMALIZATIONS = ("exact", "simple")
MEMBERSHIP_TOL = 1e-8


class SingularityError(ValueError):
    """Raised when a kernel is evaluated on the diagonal."""


class QuadratureError(RuntimeError):
    """Raised when a quadrature produces non-finite values."""


def fractional_constant(d: int, alpha: float) -> float:
    """Constant making c |z|^(-d-alpha) the generator of -(-Laplace)^(alpha/2)."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    return (
        alpha
        * 2.0 ** (alpha - 1)
        * special.gamma((d + alpha) / 2)
        / (math.pi ** (d / 2) * special.gamma(1 - alpha / 2))
    )


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^(d-1) (counting measure 2 for d=1)."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


# ---------------------------------------------------------------- coefficients


def _unit(t, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1], np.shape(t))
    return np.ones(shape)


def _oscillating(t, x, y):
    s = np.sum(np.asarray(x, dtype=float) + np.asarray(y, dtype=float), axis=-1)
    return 0.75 + 0.25 * np.cos(t) * np.cos(s)


@dataclass(frozen=True)
class Coefficient:
    """Symmetric measurable coefficient a(t, x, y) with values in [1/2, 1].

    Points carry a trailing axis of length d.
    """

    name: str = "unit"
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    time_dependent: bool = False

    def __call__(self, t, x, y) -> np.ndarray:
        f = self.func
        if f is None:
            f = _NAMED_COEFFICIENTS[self.name][0]
        return f(t, x, y)

    @property
    def is_unit(self) -> bool:
        return self.name == "unit" and self.func is None

    def rescaled(self, r: float, xi, tau: float, alpha: float) -> "Coefficient":
        """Coefficient of the pulled-back problem a(r^alpha t + tau, r x + xi, r y + xi)."""
        if self.is_unit:
            return self
        base = self
        xi = np.asarray(xi, dtype=float)
        s = r**alpha

        def func(t, x, y):
            return base(s * np.asarray(t) + tau, r * np.asarray(x) + xi, r * np.asarray(y) + xi)

        return Coefficient(f"{self.name}@scaled", func, self.time_dependent)


_NAMED_COEFFICIENTS = {
    "unit": (_unit, False),
    "oscillating": (_oscillating, True),
}


def named_coefficient(name: str) -> Coefficient:
    if name not in _NAMED_COEFFICIENTS:
        raise ValueError(f"unknown coefficient {name!r}; known: {sorted(_NAMED_COEFFICIENTS)}")
    return Coefficient(name, None, _NAMED_COEFFICIENTS[name][1])


UNIT = Coefficient()


# ---------------------------------------------------------------- densities


@dataclass(frozen=True)
class KernelTable:
    """Radial density tabulated at increasing radii, log-log interpolated.

    Below the first radius the density continues as a power law with exponent
    -d-alpha. Beyond the last radius it is zero (compact) or continues as the
    same power law.
    """

    radii: tuple
    values: tuple
    compact: bool = False

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
            raise ValueError("table needs matching 1-d radii and values of length >= 2")
        if np.any(np.diff(r) <= 0) or r[0] <= 0:
            raise ValueError("table radii must be positive and increasing")
        if np.any(v <= 0):
            raise ValueError("table values must be positive")
        object.__setattr__(self, "radii", tuple(map(float, r)))
        object.__setattr__(self, "values", tuple(map(float, v)))

    def evaluate(self, rad: np.ndarray, exponent: float) -> np.ndarray:
        r = np.asarray(self.radii)
        v = np.asarray(self.values)
        rad = np.asarray(rad, dtype=float)
        with np.errstate(divide="ignore"):
            lr = np.log(rad)
        out = np.exp(np.interp(lr, np.log(r), np.log(v)))
        low = rad < r[0]
        out = np.where(low, v[0] * (rad / r[0]) ** (-exponent), out)
        high = rad > r[-1]
        tail = 0.0 if self.compact else v[-1] * (rad / r[-1]) ** (-exponent)
        return np.where(high, tail, out)

    def scaled(self, r: float, d: int, alpha: float) -> "KernelTable":
        """Table of r^(d+alpha) p(r s)."""
        radii = tuple(x / r for x in self.radii)
        values = tuple(x * r ** (d + alpha) for x in self.values)
        return KernelTable(radii, values, self.compact)


@dataclass(frozen=True)
class Kernel:
    """Kernel k_t(x, y) = coeff(t, x, y) * k0(x, y) of order alpha."""

    alpha: float
    dim: int = 1
    alpha0: float = 0.4
    lam: float = 10.0
    kind: str = "fractional"
    normalization: str = "exact"
    axis: Optional[tuple] = None
    aperture: Optional[float] = None
    table: Optional[KernelTable] = None
    coeff: Coefficient = UNIT

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if self.dim not in (1, 2):
            raise ValueError("only d in {1, 2} is supported")
        if not 0 < self.alpha0 < self.alpha < 2:
            raise ValueError(f"need 0 < alpha0 < alpha < 2, got alpha0={self.alpha0}, alpha={self.alpha}")
        if self.lam < 1 or self.lam < 1 / self.alpha0:
            raise ValueError("lambda must satisfy lambda >= max(1, 1/alpha0)")
        if self.kind == "cone":
            if self.dim != 2:
                raise ValueError("cone kernels require d=2")
            if self.aperture is None or not 0 < self.aperture < 1:
                raise ValueError("cone aperture must lie in (0, 1)")
            ax = np.asarray(self.axis, dtype=float)
            nrm = np.linalg.norm(ax)
            if ax.shape != (2,) or nrm == 0:
                raise ValueError("cone axis must be a nonzero vector in R^2")
            object.__setattr__(self, "axis", tuple(map(float, ax / nrm)))
        if self.kind == "custom-table" and self.table is None:
            raise ValueError("custom-table kernels need a table")

    # -- basic quantities

    @property
    def prefactor(self) -> float:
        if self.normalization == "simple":
            return 2.0 - self.alpha
        return fractional_constant(self.dim, self.alpha)

    @property
    def homogeneous(self) -> bool:
        return self.kind != "custom-table"

    @property
    def cone_cos(self) -> float:
        """Directions e lie in the double cone iff |e . axis| > cone_cos."""
        return 1.0 - self.aperture**2 / 2.0

    @property
    def cone_half_angle(self) -> float:
        return math.acos(self.cone_cos)

    def angular_weight(self, e: np.ndarray) -> np.ndarray:
        """c(theta) for unit directions e (trailing axis d); homogeneous kinds only."""
        e = np.asarray(e, dtype=float)
        c = np.full(e.shape[:-1], self.prefactor)
        if self.kind == "cone":
            proj = np.abs(e @ np.asarray(self.axis))
            c = np.where(proj > self.cone_cos, c, 0.0)
        return c

    def radial_profile(self, rad: np.ndarray) -> np.ndarray:
        """Radial part: |z|^(-d-alpha) for homogeneous kinds, table otherwise."""
        rad = np.asarray(rad, dtype=float)
        ex = self.dim + self.alpha
        if self.kind == "custom-table":
            return self.table.evaluate(rad, ex)
        with np.errstate(divide="ignore"):
            return rad ** (-ex)

    def profile(self, z: np.ndarray) -> np.ndarray:
        """k0 as a function of the displacement z = x - y (trailing axis d)."""
        z = np.asarray(z, dtype=float)
        rad = np.sqrt(np.sum(z * z, axis=-1))
        if np.any(rad == 0):
            raise SingularityError("kernel evaluated on the diagonal x = y")
        base = self.radial_profile(rad)
        if self.kind == "custom-table":
            return base
        if self.kind == "cone":
            e = z / rad[..., None]
            return self.angular_weight(e) * base
        return self.prefactor * base

    def k0(self, x, y) -> np.ndarray:
        x = _points(x, self.dim)
        y = _points(y, self.dim)
        return self.profile(x - y)

    def rescaled(self, r: float, xi=None, tau: float = 0.0) -> "Kernel":
        """Kernel r^(d+alpha) k0(r x + xi, r y + xi) with rescaled coefficient."""
        d = self.dim
        xi = np.zeros(d) if xi is None else np.atleast_1d(np.asarray(xi, dtype=float))
        table = self.table.scaled(r, d, self.alpha) if self.table is not None else None
        return replace(self, table=table, coeff=self.coeff.rescaled(r, xi, tau, self.alpha))

    # -- closed-form moments used by (K1) and the far field

    def angular_mass(self) -> float:
        """Integral of c(theta) over the sphere (homogeneous kinds)."""
        if self.dim == 1:
            return float(np.sum(self.angular_weight(np.array([[1.0], [-1.0]]))))
        if self.kind == "cone":
            return 4.0 * self.cone_half_angle * self.prefactor
        return 2 * math.pi * self.prefactor

    def moment_split(self, rho: float):
        """(rho^-2 int_{|z|<=rho} |z|^2 k0, int_{|z|>rho} k0)."""
        a = self.alpha
        d = self.dim
        if self.homogeneous:
            m = self.angular_mass()
            return m * rho ** (-a) / (2 - a), m * rho ** (-a) / a
        area = sphere_area(d)
        near = _radial_integral(self, 0.0, rho, d + 1) * area / rho**2
        far = _radial_integral(self, rho, np.inf, d - 1) * area
        return near, far


def _radial_integral(kernel: Kernel, lo: float, hi: float, power: int) -> float:
    """Integral of r^power * p(r) over (lo, hi) for a tabulated density."""
    tab = kernel.table
    ex = kernel.dim + kernel.alpha
    r = np.asarray(tab.radii)
    v = np.asarray(tab.values)
    total = 0.0
    # inner power-law segment (0, r0)
    a, b = lo, min(hi, r[0])
    if b > a:
        e = power + 1 - ex
        total += v[0] * r[0] ** ex * (b**e - a**e) / e
    # tabulated part
    knots = np.concatenate(([max(lo, r[0])], r[(r > lo) & (r < hi)], [min(hi, r[-1])]))
    knots = np.unique(knots)
    for a, b in zip(knots[:-1], knots[1:]):
        if b > a:
            val, _ = integrate.quad(lambda s: s**power * tab.evaluate(s, ex), a, b, limit=200)
            total += val
    # outer segment
    if not tab.compact and hi > r[-1]:
        a = max(lo, r[-1])
        e = power + 1 - ex
        upper = 0.0 if np.isinf(hi) else hi**e
        total += v[-1] * r[-1] ** ex * (upper - a**e) / e
    if not np.isfinite(total):
        raise QuadratureError("non-finite radial integral")
    return float(total)


def _points(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    return x


def eval_k(kernel: Kernel, t, x, y) -> np.ndarray:
    """k_t(x, y) = a(t, x, y) k0(x, y); raises SingularityError on the diagonal."""
    xp = _points(x, kernel.dim)
    yp = _points(y, kernel.dim)
    val = kernel.coeff(t, xp, yp) * kernel.profile(xp - yp)
    return val


# ---------------------------------------------------------------- constructors


def make_fractional(
    d: int,
    alpha: float,
    normalization: str = "exact",
    alpha0: float = 0.4,
    lam: float = 10.0,
    coeff: Coefficient = UNIT,
) -> Kernel:
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    return Kernel(alpha, d, alpha0, lam, "fractional", normalization, coeff=coeff)


def sequence_alpha(n: int) -> float:
    return 2.0 - 1.0 / (n + 1)


def make_sequence_kernel(n: int, d: int = 1, alpha0: float = 0.9, lam: float = 10.0) -> Kernel:
    """Member n of the family (2 - a_n)|x - y|^(-d - a_n), a_n = 2 - 1/(n+1)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return Kernel(sequence_alpha(n), d, alpha0, lam, "sequence", "simple")


def make_cone_kernel(
    alpha: float,
    axis=(1.0, 0.0),
    aperture: float = 0.5,
    d: int = 2,
    normalization: str = "exact",
    alpha0: float = 0.4,
    lam: float = 100.0,
) -> Kernel:
    """Fractional density restricted to the double cone around +-axis.

    In d=1 the cone degenerates and the full fractional kernel is returned.
    """
    if not 0 < aperture < 1:
        raise ValueError("aperture must lie in (0, 1)")
    if d == 1:
        return make_fractional(1, alpha, normalization, alpha0, lam)
    return Kernel(alpha, d, alpha0, lam, "cone", normalization, tuple(axis), aperture)


def make_custom_table(
    alpha: float,
    radii,
    values,
    compact: bool = False,
    d: int = 1,
    alpha0: float = 0.4,
    lam: float = 10.0,
) -> Kernel:
    return Kernel(alpha, d, alpha0, lam, "custom-table", table=KernelTable(tuple(radii), tuple(values), compact))


# ---------------------------------------------------------------- membership


@dataclass(frozen=True)
class MembershipReport:
    condition: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    probe: str

    @classmethod
    def build(cls, condition, lhs, rhs, probe, tol=MEMBERSHIP_TOL):
        lhs = float(lhs)
        rhs = float(rhs)
        margin = rhs - lhs
        ok = bool(np.isfinite(lhs) and margin >= -tol * max(abs(rhs), 1.0))
        return cls(condition, lhs, rhs, margin, ok, probe)


@dataclass(frozen=True)
class QuadSpec:
    n_shells: int = 48
    n_gauss: int = 24
    n_angle: int = 256
    n_x: int = 9


def check_K1(kernel: Kernel, x0=0.0, rho: float = 1.0, quad: QuadSpec = QuadSpec()) -> MembershipReport:
    """Second moment inside B_rho plus mass outside against lambda rho^-alpha."""
    if not 0 < rho < 2:
        raise ValueError("rho must lie in (0, 2)")
    near, far = kernel.moment_split(rho)
    lhs = near + far
    if not np.isfinite(lhs):
        raise QuadratureError("non-finite (K1) functional")
    probe = f"x0={np.round(np.atleast_1d(x0), 6).tolist()}, rho={rho:g}"
    return MembershipReport.build("K1", lhs, kernel.lam * rho ** (-kernel.alpha), probe)


def _shell_integral_1d(kernel: Kernel, x: float, lo: float, hi: float, delta: float, n: int) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    # substitution y = lo * exp(s) resolves the slow algebraic decay
    s_hi = math.log(hi / lo)
    s = 0.5 * s_hi * (nodes + 1)
    w = 0.5 * s_hi * weights
    y = lo * np.exp(s)
    total = 0.0
    for sign in (1.0, -1.0):
        yy = sign * y
        total += np.sum(w * y * np.abs(yy) ** delta * kernel.profile((x - yy)[:, None]))
    return float(total)


def _shell_integral_2d(kernel: Kernel, x: np.ndarray, lo: float, hi: float, delta: float, quad: QuadSpec) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(quad.n_gauss)
    s_hi = math.log(hi / lo)
    s = 0.5 * s_hi * (nodes + 1)
    w = 0.5 * s_hi * weights
    rad = lo * np.exp(s)
    phi = (np.arange(quad.n_angle) + 0.5) * (2 * math.pi / quad.n_angle)
    dphi = 2 * math.pi / quad.n_angle
    e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    y = rad[:, None, None] * e[None, :, :]
    vals = kernel.profile(x - y) * (rad[:, None] ** (2 + delta))
    return float(np.sum(w[:, None] * vals) * dphi)


def check_K3(
    kernel: Kernel, quad: QuadSpec = QuadSpec(), lam: Optional[float] = None, points=None
) -> MembershipReport:
    """sup over x in B_2 of the tail moment of order 1/lambda outside B_3."""
    lam = kernel.lam if lam is None else lam
    delta = 1.0 / lam
    d = kernel.dim
    if points is not None:
        xs = [np.zeros(d) + np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
    elif d == 1:
        xs = [np.array([v]) for v in np.linspace(-2.0, 2.0, quad.n_x)]
    else:
        g = np.linspace(-2.0, 2.0, quad.n_x)
        xs = [np.array([a, b]) for a in g for b in g if a * a + b * b <= 4.0 + 1e-12]
    worst = 0.0
    worst_x = xs[0]
    diverged = False
    for x in xs:
        shells = []
        for k in range(quad.n_shells):
            lo, hi = 3.0 * 2.0**k, 3.0 * 2.0 ** (k + 1)
            if d == 1:
                val = _shell_integral_1d(kernel, float(x[0]), lo, hi, delta, quad.n_gauss)
            else:
                val = _shell_integral_2d(kernel, x, lo, hi, delta, quad)
            if not np.isfinite(val):
                raise QuadratureError("non-finite shell integral")
            shells.append(val)
        shells = np.asarray(shells)
        total = float(np.sum(shells))
        if shells[-1] > 0:
            ratios = shells[-4:] / shells[-5:-1]
            q = float(ratios[-1])
            if np.any(ratios >= 1.0 - 1e-12):
                diverged = True
                total = np.inf
            else:
                total += shells[-1] * q / (1.0 - q)
        if total > worst:
            worst, worst_x = total, x
    probe = f"sup over {len(xs)} points of B_2, worst x={np.round(worst_x, 6).tolist()}, order 1/{lam:g}"
    if diverged:
        probe += " (divergent shell sums)"
    return MembershipReport.build("K3", worst, lam, probe)


def default_probes(n_nodes_pts: np.ndarray, x0, rho: float, count: int, rng: np.random.Generator):
    """Smooth and rough random probe functions on the given points."""
    pts = np.asarray(n_nodes_pts)
    z = (pts - np.asarray(x0)) / rho
    probes = []
    n_smooth = count - count // 5
    d = pts.shape[1]
    for _ in range(n_smooth):
        v = np.zeros(len(pts))
        for _ in range(4):
            k = rng.normal(size=d) * 3.0
            v += rng.normal() * np.cos(z @ k + rng.uniform(0, 2 * math.pi))
        probes.append(v)
    for _ in range(count - n_smooth):
        probes.append(rng.normal(size=len(pts)))
    return probes


def check_K2(
    kernel: Kernel,
    ball=(0.0, 1.0),
    probes=None,
    h: Optional[float] = None,
    n_probes: int = 50,
    seed: int = 0,
    lam: Optional[float] = None,
) -> MembershipReport:
    """Two-sided comparison of the restricted energy with (2-alpha)|x-y|^(-d-alpha)."""
    from .discretization import lattice_points_in_ball, restricted_energy

    x0, rho = ball
    lam = kernel.lam if lam is None else lam
    d = kernel.dim
    x0 = np.zeros(d) + np.atleast_1d(np.asarray(x0, dtype=float))
    if h is None:
        h = rho / (40 if d == 1 else 12)
    pts, offsets = lattice_points_in_ball(x0, rho, h, d)
    reference = Kernel(kernel.alpha, d, kernel.alpha0, kernel.lam, "fractional", "simple")
    if probes is None:
        probes = default_probes(pts, x0, rho, n_probes, np.random.default_rng(seed))
    worst = 1.0
    used = 0
    skipped = 0
    for v in probes:
        v = v(pts) if callable(v) else np.asarray(v, dtype=float)
        e_ref = restricted_energy(reference, h, offsets, v)
        if e_ref <= 1e-300 * max(1.0, float(np.max(np.abs(v))) ** 2):
            skipped += 1
            continue
        e_k = restricted_energy(kernel, h, offsets, v)
        ratio = e_k / e_ref
        worst = max(worst, ratio, (1.0 / ratio) if ratio > 0 else np.inf)
        used += 1
    probe = f"ball x0={np.round(x0, 6).tolist()}, rho={rho:g}, h={h:g}, {used} probes"
    if skipped:
        probe += f", {skipped} zero-energy probes skipped"
    return MembershipReport.build("K2", worst, lam, probe)


def lambda_required(reports, lam: float) -> float:
    """Smallest lambda making every report pass, given the lambda the reports were checked with.

    All three conditions have right-hand sides linear in lambda, so the ratio
    lhs / rhs scales the tested value.
    """
    return float(lam * max(r.lhs / r.rhs for r in reports))
