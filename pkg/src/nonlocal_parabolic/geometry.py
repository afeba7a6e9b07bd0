"""Space-time cylinders, the intrinsic scaling map and the dyadic distance geometry.

Regions are stored by their closed-form bounds. Membership follows the open-set
convention: points on a boundary are treated as exterior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

ORIENTATIONS = ("centered", "plus", "minus")


def ball_volume(d: int, r: float = 1.0) -> float:
    """Lebesgue measure of the Euclidean ball of radius r in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


@dataclass(frozen=True)
class SpaceTimeBox:
    """Open region (t0, t1) x B_radius(center)."""

    t0: float
    t1: float
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError(f"empty time interval ({self.t0}, {self.t1})")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def duration(self) -> float:
        return self.t1 - self.t0

    @property
    def measure(self) -> float:
        return self.duration * ball_volume(self.dim, self.radius)

    def contains(self, t, x) -> np.ndarray:
        """Vectorised open-set membership; x has trailing axis d (or scalar for d=1)."""
        t = np.asarray(t, dtype=float)
        dist = _distance(x, self.center)
        return (t > self.t0) & (t < self.t1) & (dist < self.radius)

    def contains_box(self, other: "SpaceTimeBox", tol: float = 1e-12) -> bool:
        """Closed-form inclusion test other is a subset of self."""
        if other.t0 < self.t0 - tol or other.t1 > self.t1 + tol:
            return False
        offset = float(np.linalg.norm(np.subtract(other.center, self.center)))
        return offset + other.radius <= self.radius + tol

    def shifted(self, tau: float = 0.0, xi=None) -> "SpaceTimeBox":
        c = np.asarray(self.center) if xi is None else np.asarray(self.center) + np.atleast_1d(xi)
        return replace(self, t0=self.t0 + tau, t1=self.t1 + tau, center=tuple(c))


def _distance(x, center) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    c = np.asarray(center, dtype=float)
    if len(c) == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        return np.abs(x - c[0])
    return np.sqrt(np.sum((x - c) ** 2, axis=-1))


@dataclass(frozen=True)
class Cylinder:
    """Intrinsically scaled cylinder: time extent r^alpha (one-sided) or 2 r^alpha."""

    center_t: float
    center_x: tuple
    radius: float
    alpha: float
    orientation: str = "centered"

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center_x", tuple(float(c) for c in np.atleast_1d(self.center_x)))

    @property
    def box(self) -> SpaceTimeBox:
        ext = self.radius**self.alpha
        if self.orientation == "plus":
            t0, t1 = self.center_t, self.center_t + ext
        elif self.orientation == "minus":
            t0, t1 = self.center_t - ext, self.center_t
        else:
            t0, t1 = self.center_t - ext, self.center_t + ext
        return SpaceTimeBox(t0, t1, self.center_x, self.radius)

    @property
    def measure(self) -> float:
        return self.box.measure

    def contains(self, t, x) -> np.ndarray:
        return self.box.contains(t, x)


def q_plus(r: float, alpha: float, d: int = 1) -> Cylinder:
    """Q_plus(r) = (0, r^alpha) x B_r."""
    return Cylinder(0.0, (0.0,) * d, r, alpha, "plus")


def q_minus(r: float, alpha: float, d: int = 1) -> Cylinder:
    """Q_minus(r) = (-r^alpha, 0) x B_r."""
    return Cylinder(0.0, (0.0,) * d, r, alpha, "minus")


@dataclass(frozen=True)
class DyadicCylinder:
    """D_hat_r((t0, x0)) = (t0 - 2 r^alpha, t0) x B_{3r}(x0) with r = 6^-level."""

    level: int
    alpha: float
    t0: float = 0.0
    x0: tuple = (0.0,)

    @property
    def r(self) -> float:
        return 6.0 ** (-self.level)

    @property
    def box(self) -> SpaceTimeBox:
        return dhat_box(self.r, self.alpha, self.t0, self.x0)


def dhat_box(r: float, alpha: float, t0: float = 0.0, x0=(0.0,)) -> SpaceTimeBox:
    return SpaceTimeBox(t0 - 2.0 * r**alpha, t0, x0, 3.0 * r)


def rho_hat(t, x, alpha: float):
    """Asymmetric parabolic distance max(|x|/3, (-t)^(1/alpha)/2) on (-2, 0], else inf."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    dist = np.sqrt(np.sum(x**2, axis=-1)) if x.ndim > t.ndim else np.abs(x)
    inside = (t > -2.0) & (t <= 0.0)
    tt = np.where(inside, -t, 0.0)
    val = np.maximum(dist / 3.0, tt ** (1.0 / alpha) / 2.0)
    out = np.where(inside, val, np.inf)
    return float(out) if out.ndim == 0 else out


def harnack_domains(alpha: float, d: int = 1, variant: str = "scaled"):
    """Return (U_plus, U_minus) boxes of the weak Harnack inequality.

    variant="scaled" uses the alpha-dependent extents 2^-alpha; variant="fixed"
    uses the alternative (3/4, 1) and (-1, -3/4) time windows.
    """
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    c = (0.0,) * d
    if variant == "scaled":
        ext = 0.5**alpha
    elif variant == "fixed":
        ext = 0.25
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return SpaceTimeBox(1.0 - ext, 1.0, c, 0.5), SpaceTimeBox(-1.0, -1.0 + ext, c, 0.5)


def growth_domains(alpha: float, d: int = 1):
    """Return (D_minus, D_plus, D(1)) of the growth lemma."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    c = (0.0,) * d
    ext = 0.5**alpha
    return (
        SpaceTimeBox(-2.0, -2.0 + ext, c, 0.5),
        SpaceTimeBox(-ext, 0.0, c, 0.5),
        SpaceTimeBox(-2.0, 0.0, c, 2.0),
    )


def scale_problem(kernel, field, r: float, xi=None, tau: float = 0.0):
    """Pull a solution back to unit scale around (tau, xi).

    Returns (kernel_tilde, field_tilde, forcing_scale) with
    u_tilde(t, x) = u(r^alpha t + tau, r x + xi) and f_tilde = r^alpha f(...).
    """
    from .discretization import Grid
    from .solver import SolutionField

    alpha = kernel.alpha
    d = kernel.dim
    xi = np.zeros(d) if xi is None else np.atleast_1d(np.asarray(xi, dtype=float))
    if r <= 0:
        raise ValueError("scale r must be positive")
    grid = field.grid
    target = Cylinder(tau, tuple(xi), r, alpha, "centered").box
    tmin, tmax = field.times[0], field.times[-1]
    covered_t = target.t0 >= tmin - 1e-12 and target.t1 <= tmax + 1e-12
    offset = float(np.linalg.norm(xi - np.asarray(grid.center)))
    if not covered_t or offset + r > grid.omega + 1e-12:
        raise ValueError("field domain does not cover Q_r(xi, tau)")

    ktilde = kernel.rescaled(r, xi, tau)
    new_grid = Grid(
        dim=d,
        h=grid.h / r,
        omega=grid.omega / r,
        collar=grid.collar / r,
        center=tuple((np.asarray(grid.center) - xi) / r),
        max_nodes=grid.max_nodes,
    )
    scale_t = r**alpha
    ext = field.exterior
    forcing = field.forcing

    def exterior(t, x, _g=ext):
        return _g(scale_t * np.asarray(t) + tau, r * np.asarray(x) + xi)

    new_forcing = None
    if forcing is not None:

        def new_forcing(t, x, _f=forcing):
            return scale_t * _f(scale_t * np.asarray(t) + tau, r * np.asarray(x) + xi)

    out = SolutionField(
        times=(field.times - tau) / scale_t,
        values=field.values.copy(),
        grid=new_grid,
        kernel=ktilde,
        exterior=exterior,
        forcing=new_forcing,
        theta=field.theta,
        meta=dict(field.meta, rescaled=(r, tuple(xi), tau)),
    )
    return ktilde, out, scale_t
