"""Uniform lattices, singular-kernel quadrature and the discrete operator L_h.

Weights follow the convention w_ij ~ k_t(x_i, x_j) h^d so that
(L_h u)_i = sum_j w_ij (u_j - u_i) + far-field terms. In d=1 the weights come
from piecewise-linear interpolation of [u(x+z) + u(x-z) - 2u(x)] / z^2 against
the measure z^2 k0(z) dz, which is exact for power kernels and keeps the
(2 - alpha) cancellation intact as alpha -> 2. In d=2 the weights are cell
integrals of k0 with a second-moment correction for the diagonal cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .kernels import Kernel

DEFAULT_MAX_NODES = 20000
FAR_NODES_1D = 8
FAR_RADIAL_2D = 4
FAR_ANGULAR_2D = 6


# ---------------------------------------------------------------- grids


@dataclass(frozen=True, eq=False)
class Grid:
    """Square lattice center + h*i with |h*i|_inf <= collar, interior = open ball of radius omega."""

    dim: int
    h: float
    omega: float
    collar: float
    center: tuple = (0.0,)
    max_nodes: int = DEFAULT_MAX_NODES
    index: np.ndarray = field(init=False, repr=False)
    points: np.ndarray = field(init=False, repr=False)
    interior_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("mesh width h must be positive")
        if self.dim not in (1, 2):
            raise ValueError("only d in {1, 2} is supported")
        center = np.zeros(self.dim) + np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", tuple(map(float, center)))
        n_half = int(math.floor(self.collar / self.h + 1e-9))
        n_side = 2 * n_half + 1
        total = n_side**self.dim
        if total > self.max_nodes:
            suggest = 2 * self.collar / (self.max_nodes ** (1 / self.dim) - 1)
            raise ValueError(
                f"node budget exceeded: {total} nodes > {self.max_nodes}; try h >= {suggest:.4g}"
            )
        ax = np.arange(-n_half, n_half + 1)
        if self.dim == 1:
            idx = ax[:, None]
        else:
            a, b = np.meshgrid(ax, ax, indexing="ij")
            idx = np.stack([a.ravel(), b.ravel()], axis=-1)
        rel = np.sqrt(np.sum((idx * self.h) ** 2, axis=-1))
        object.__setattr__(self, "index", idx)
        object.__setattr__(self, "points", center + self.h * idx)
        object.__setattr__(self, "interior_mask", rel < self.omega * (1 - 1e-12))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def n_half(self) -> int:
        return int(np.max(self.index))

    @property
    def box_radius(self) -> float:
        return self.n_half * self.h

    @property
    def far_radius(self) -> float:
        """Distance (sup norm) from the center where the analytic far field starts."""
        return (self.n_half + 0.5) * self.h

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(self.interior_mask)

    @property
    def collar_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.interior_mask)

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def x(self) -> np.ndarray:
        """Node coordinates; shape (n,) in d=1 and (n, 2) in d=2."""
        return self.points[:, 0] if self.dim == 1 else self.points

    def relative(self) -> np.ndarray:
        return self.points - np.asarray(self.center)


def build_grid(
    omega_radius: float,
    collar_radius: float,
    h: float,
    d: int = 1,
    center=None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Grid:
    if h <= 0:
        raise ValueError("mesh width h must be positive")
    if collar_radius < 3 * omega_radius - 1e-12:
        raise ValueError("collar_radius must be at least 3 * omega_radius")
    c = (0.0,) * d if center is None else center
    return Grid(d, h, omega_radius, collar_radius, c, max_nodes)


def lattice_points_in_ball(x0, rho: float, h: float, d: int):
    """Lattice x0 + h*i restricted to the open ball B_rho(x0); returns (points, offsets)."""
    m = int(math.ceil(rho / h))
    ax = np.arange(-m, m + 1)
    if d == 1:
        idx = ax[:, None]
    else:
        a, b = np.meshgrid(ax, ax, indexing="ij")
        idx = np.stack([a.ravel(), b.ravel()], axis=-1)
    keep = np.sqrt(np.sum((idx * h) ** 2, axis=-1)) < rho * (1 - 1e-12)
    idx = idx[keep]
    return np.asarray(x0, dtype=float) + h * idx, idx


# ---------------------------------------------------------------- lattice weights


def _pow_int(a: float, b: float, e: float) -> float:
    """Integral of z^(e-1) over (a, b), stable as e -> 0."""
    if a == 0.0:
        return b**e / e
    return a**e * math.expm1(e * math.log(b / a)) / e


def _weights_1d_power(c: float, alpha: float, h: float, jmax: int) -> np.ndarray:
    w = np.zeros(jmax + 1)
    e1, e2 = 2.0 - alpha, 3.0 - alpha
    for j in range(1, jmax + 1):
        a, m, b = (j - 1) * h, j * h, (j + 1) * h
        left = (_pow_int(a, m, e2) - a * _pow_int(a, m, e1)) / h
        right = (b * _pow_int(m, b, e1) - _pow_int(m, b, e2)) / h
        w[j] = c * (left + right) / (j * h) ** 2
    w[1] += c * (_pow_int(0.0, h, e1) - _pow_int(0.0, h, e2) / h) / h**2
    return w


def _weights_1d_general(kernel: Kernel, h: float, jmax: int) -> np.ndarray:
    def m(z):
        z = np.asarray(z, dtype=float)
        return z * z * kernel.radial_profile(z)

    nodes, wts = np.polynomial.legendre.leggauss(10)
    w = np.zeros(jmax + 1)
    for j in range(1, jmax + 1):
        a, mid, b = (j - 1) * h, j * h, (j + 1) * h
        if j == 1:
            left, _ = integrate.quad(lambda z: m(z) * z / h, 0.0, h, limit=200)
        else:
            z = 0.5 * (a + mid) + 0.5 * h * nodes
            left = 0.5 * h * np.sum(wts * m(z) * (z - a) / h)
        z = 0.5 * (mid + b) + 0.5 * h * nodes
        right = 0.5 * h * np.sum(wts * m(z) * (b - z) / h)
        w[j] = (left + right) / (j * h) ** 2
    extra, _ = integrate.quad(lambda z: m(z) * (1 - z / h), 0.0, h, limit=200)
    w[1] += extra / h**2
    return w


def _cell_integral_2d(kernel: Kernel, h: float, p: np.ndarray, q: np.ndarray, sub: int, ng: int) -> np.ndarray:
    nodes, wts = np.polynomial.legendre.leggauss(ng)
    s = (np.arange(sub) + 0.5) / sub - 0.5
    loc = (s[:, None] + nodes[None, :] / (2 * sub)).ravel()
    wl = np.tile(wts / (2 * sub), sub)
    zx = (p[:, None, None] + loc[None, :, None]) * h
    zy = (q[:, None, None] + loc[None, None, :]) * h
    z = np.stack(np.broadcast_arrays(zx, zy), axis=-1)
    vals = kernel.profile(z)
    return h * h * np.einsum("nij,i,j->n", vals, wl, wl)


def _central_second_moments(kernel: Kernel, h: float):
    """(M_11, M_22) = integrals of z_a^2 k0(z) over the diagonal cell (-h/2, h/2)^2."""
    breaks = [k * math.pi / 4 for k in range(9)]
    if kernel.kind == "cone":
        phi0 = math.atan2(kernel.axis[1], kernel.axis[0])
        ha = kernel.cone_half_angle
        for base in (phi0, phi0 + math.pi):
            for sgn in (-1, 1):
                breaks.append((base + sgn * ha) % (2 * math.pi))
    breaks = np.unique(np.append(breaks, 2 * math.pi))
    nodes, wts = np.polynomial.legendre.leggauss(16)
    m11 = m22 = 0.0
    a = kernel.alpha
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi - lo < 1e-14:
            continue
        th = 0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes
        wt = 0.5 * (hi - lo) * wts
        c, s = np.cos(th), np.sin(th)
        rb = h / (2 * np.maximum(np.abs(c), np.abs(s)))
        e = np.stack([c, s], axis=-1)
        if kernel.homogeneous:
            radial = kernel.angular_weight(e) * rb ** (2 - a) / (2 - a)
        else:
            from .kernels import _radial_integral

            radial = np.array([_radial_integral(kernel, 0.0, r, 3) for r in rb])
        m11 += float(np.sum(wt * c * c * radial))
        m22 += float(np.sum(wt * s * s * radial))
    return m11, m22


@lru_cache(maxsize=64)
def _lattice_weights_cached(kernel: Kernel, h: float, jmax: int) -> np.ndarray:
    if kernel.dim == 1:
        if kernel.homogeneous:
            w = _weights_1d_power(float(kernel.angular_weight(np.array([1.0]))), kernel.alpha, h, jmax)
        else:
            w = _weights_1d_general(kernel, h, jmax)
    else:
        ax = np.arange(-jmax, jmax + 1)
        p, q = np.meshgrid(ax, ax, indexing="ij")
        p = p.ravel()
        q = q.ravel()
        cheb = np.maximum(np.abs(p), np.abs(q))
        vals = np.zeros(len(p))
        near = (cheb >= 1) & (cheb <= 2)
        far = cheb >= 3
        vals[near] = _cell_integral_2d(kernel, h, p[near], q[near], 4, 6)
        chunk = 20000
        far_idx = np.flatnonzero(far)
        for k in range(0, len(far_idx), chunk):
            sl = far_idx[k : k + chunk]
            vals[sl] = _cell_integral_2d(kernel, h, p[sl], q[sl], 1, 4)
        w = vals.reshape(2 * jmax + 1, 2 * jmax + 1)
        m11, m22 = _central_second_moments(kernel, h)
        w[jmax + 1, jmax] += m11 / (2 * h * h)
        w[jmax - 1, jmax] += m11 / (2 * h * h)
        w[jmax, jmax + 1] += m22 / (2 * h * h)
        w[jmax, jmax - 1] += m22 / (2 * h * h)
    if not np.all(np.isfinite(w)):
        raise ValueError("non-integrable near-diagonal behaviour: cell weights are not finite")
    w.setflags(write=False)
    return w


def _unit_kernel(kernel: Kernel) -> Kernel:
    """Strip the coefficient (weights of k0 only) so that caching keys stay hashable."""
    from dataclasses import replace

    from .kernels import UNIT

    return replace(kernel, coeff=UNIT)


def lattice_weights(kernel: Kernel, h: float, jmax: int) -> np.ndarray:
    """Weights of k0 for lattice offsets up to jmax (|j| in d=1, (p, q) + jmax in d=2)."""
    return _lattice_weights_cached(_unit_kernel(kernel), float(h), int(jmax))


def offset_matrix(kernel: Kernel, h: float, idx_a: np.ndarray, idx_b: np.ndarray) -> np.ndarray:
    """Weight matrix w0(i, j) between two sets of integer lattice indices (zero on coincidences)."""
    dp = idx_a[:, 0][:, None] - idx_b[:, 0][None, :]
    if kernel.dim == 1:
        jmax = max(int(np.max(np.abs(dp))) if dp.size else 1, 1)
        return lattice_weights(kernel, h, jmax)[np.abs(dp)]
    dq = idx_a[:, 1][:, None] - idx_b[:, 1][None, :]
    jmax = max(int(max(np.max(np.abs(dp)), np.max(np.abs(dq)))) if dp.size else 1, 1)
    return lattice_weights(kernel, h, jmax)[dp + jmax, dq + jmax]


def restricted_energy(kernel: Kernel, h: float, offsets: np.ndarray, v: np.ndarray) -> float:
    """h^d sum_{i != j} w0_ij (v_i - v_j)^2 over the given lattice points (coefficient a = 1)."""
    w = offset_matrix(kernel, h, offsets, offsets)
    dv = v[:, None] - v[None, :]
    return float(h ** kernel.dim * np.sum(w * dv * dv))


# ---------------------------------------------------------------- far field


def _far_field_1d(kernel: Kernel, grid: Grid):
    rb = grid.far_radius
    xi = grid.relative()[:, 0]
    nodes, wts = np.polynomial.legendre.leggauss(FAR_NODES_1D)
    a = kernel.alpha
    ys, ws = [], []
    for sign in (1.0, -1.0):
        dist = rb - sign * xi
        smax = dist ** (-a)
        s = 0.5 * smax[:, None] * (nodes[None, :] + 1)
        w = 0.5 * smax[:, None] * wts[None, :]
        r = s ** (-1.0 / a)
        z = (sign * r)[..., None]
        jac = s ** (-1.0 - 1.0 / a) / a
        ys.append(grid.points[:, None, :] + z)
        ws.append(w * jac * kernel.profile(-z))
    return np.concatenate(ys, axis=1), np.concatenate(ws, axis=1)


def _far_field_2d(kernel: Kernel, grid: Grid):
    rb = grid.far_radius
    rel = grid.relative()
    a = kernel.alpha
    nr, wr = np.polynomial.legendre.leggauss(FAR_RADIAL_2D)
    na, wa = np.polynomial.legendre.leggauss(FAR_ANGULAR_2D)
    cone_breaks = []
    if kernel.kind == "cone":
        phi0 = math.atan2(kernel.axis[1], kernel.axis[0])
        ha = kernel.cone_half_angle
        cone_breaks = [phi0 - ha, phi0 + ha, phi0 + math.pi - ha, phi0 + math.pi + ha]
    n_arcs = 4 + len(cone_breaks)
    nq = n_arcs * FAR_ANGULAR_2D * FAR_RADIAL_2D
    ys = np.zeros((grid.n, nq, 2))
    ws = np.zeros((grid.n, nq))
    for i, (x1, x2) in enumerate(rel):
        corners = [math.atan2(sy * rb - x2, sx * rb - x1) for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1))]
        br = np.sort(np.mod(np.array(corners + cone_breaks), 2 * math.pi))
        br = np.concatenate([br, [br[0] + 2 * math.pi]])
        th_list, w_list = [], []
        for lo, hi in zip(br[:-1], br[1:]):
            th_list.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * na)
            w_list.append(0.5 * (hi - lo) * wa)
        th = np.concatenate(th_list)
        wth = np.concatenate(w_list)
        c, s_ = np.cos(th), np.sin(th)
        with np.errstate(divide="ignore"):
            t1 = np.where(c > 0, (rb - x1) / c, np.where(c < 0, (-rb - x1) / c, np.inf))
            t2 = np.where(s_ > 0, (rb - x2) / s_, np.where(s_ < 0, (-rb - x2) / s_, np.inf))
        rho_b = np.minimum(t1, t2)
        smax = rho_b ** (-a)
        sv = 0.5 * smax[:, None] * (nr[None, :] + 1)
        sw = 0.5 * smax[:, None] * wr[None, :]
        r = sv ** (-1.0 / a)
        e = np.stack([c, s_], axis=-1)
        z = r[..., None] * e[:, None, :]
        jac = sv ** (-1.0 - 2.0 / a) / a
        w = wth[:, None] * sw * jac * kernel.profile(-z)
        ys[i] = (grid.points[i] + z).reshape(-1, 2)
        ws[i] = w.ravel()
    return ys, ws


# ---------------------------------------------------------------- operator


@dataclass(eq=False)
class DiscreteOperator:
    """Discrete image of L at a fixed time: lattice weights plus far-field quadrature."""

    kernel: Kernel
    grid: Grid
    t: float
    weights: np.ndarray
    far_points: np.ndarray
    far_weights: np.ndarray

    @property
    def tail(self) -> np.ndarray:
        return self.far_weights.sum(axis=1)

    @property
    def row_sums(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def far_values(self, exterior: Optional[Callable], t: Optional[float] = None) -> np.ndarray:
        if exterior is None:
            return np.zeros(self.far_weights.shape)
        y = self.far_points
        pts = y[..., 0] if self.grid.dim == 1 else y
        return np.broadcast_to(exterior(self.t if t is None else t, pts), self.far_weights.shape)

    def to_triplets(self, path=None, with_tail: bool = True) -> str:
        """Sparse (row, col, value) text export; tail values appear as (row, -1, value)."""
        rows, cols = np.nonzero(self.weights)
        lines = ["row,col,value"]
        for i, j in zip(rows, cols):
            lines.append(f"{i},{j},{self.weights[i, j]:.12g}")
        if with_tail:
            for i, v in enumerate(self.tail):
                lines.append(f"{i},-1,{v:.12g}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


class Assembler:
    """Caches coefficient-free weights and far quadrature for one (kernel, grid)."""

    def __init__(self, kernel: Kernel, grid: Grid):
        if kernel.dim != grid.dim:
            raise ValueError("kernel and grid dimensions differ")
        self.kernel = kernel
        self.grid = grid
        self.base = offset_matrix(kernel, grid.h, grid.index, grid.index)
        np.fill_diagonal(self.base, 0.0)
        if grid.dim == 1:
            self.far_points, self.far_base = _far_field_1d(kernel, grid)
        else:
            self.far_points, self.far_base = _far_field_2d(kernel, grid)
        self._cache = None

    @property
    def time_dependent(self) -> bool:
        return self.kernel.coeff.time_dependent

    def at(self, t: float = 0.0) -> DiscreteOperator:
        coeff = self.kernel.coeff
        if coeff.is_unit:
            w, fw = self.base, self.far_base
        elif not coeff.time_dependent and self._cache is not None:
            w, fw = self._cache
        else:
            pts = self.grid.points
            w = self.base * coeff(t, pts[:, None, :], pts[None, :, :])
            np.fill_diagonal(w, 0.0)
            far_x = np.broadcast_to(pts[:, None, :], self.far_points.shape)
            fw = self.far_base * coeff(t, far_x, self.far_points)
            if not coeff.time_dependent:
                self._cache = (w, fw)
        return DiscreteOperator(self.kernel, self.grid, t, w, self.far_points, fw)


def assemble(kernel: Kernel, grid: Grid, t: float = 0.0) -> DiscreteOperator:
    return Assembler(kernel, grid).at(t)


def apply_L(op: DiscreteOperator, u: np.ndarray, exterior: Optional[Callable] = None, rows=None) -> np.ndarray:
    """(L_h u)_i on interior nodes (or the given rows); exterior supplies the far-field datum."""
    u = np.asarray(u, dtype=float)
    if u.shape != (op.grid.n,):
        raise ValueError(f"grid function must have shape ({op.grid.n},)")
    rows = op.grid.interior if rows is None else np.asarray(rows)
    tail = op.tail[rows]
    if exterior is None and np.any(tail > 0):
        raise ValueError("missing exterior datum: far-field tail is nonzero")
    w = op.weights[rows]
    out = w @ u - w.sum(axis=1) * u[rows]
    if exterior is not None:
        g = op.far_values(exterior)[rows]
        out += np.sum(op.far_weights[rows] * (g - u[rows, None]), axis=1)
    return out


def bilinear_form(
    op: DiscreteOperator,
    u: np.ndarray,
    v: np.ndarray,
    nodes=None,
    pair_weight: Optional[np.ndarray] = None,
    far_u: Optional[np.ndarray] = None,
    far_v: Optional[np.ndarray] = None,
) -> float:
    """h^d sum_{i != j} w_ij (u_i - u_j)(v_i - v_j), optionally restricted to a node set.

    With far_u/far_v (values at the far quadrature nodes) the pairs between the
    box and the far field are added twice, matching the symmetric double integral.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (op.grid.n,) or v.shape != (op.grid.n,):
        raise ValueError("grid functions do not match the operator grid")
    hd = op.grid.cell_volume
    if nodes is None:
        w = op.weights
        uu, vv = u, v
    else:
        nodes = np.asarray(nodes)
        w = op.weights[np.ix_(nodes, nodes)]
        uu, vv = u[nodes], v[nodes]
    if pair_weight is not None:
        w = w * pair_weight
    du = uu[:, None] - uu[None, :]
    dv = vv[:, None] - vv[None, :]
    total = hd * float(np.sum(w * du * dv))
    if far_u is not None or far_v is not None:
        if nodes is not None:
            raise ValueError("far-field terms require the full node set")
        fu = np.zeros(op.far_weights.shape) if far_u is None else far_u
        fv = np.zeros(op.far_weights.shape) if far_v is None else far_v
        total += 2.0 * hd * float(np.sum(op.far_weights * (u[:, None] - fu) * (v[:, None] - fv)))
    return total


def discrete_k1(op: DiscreteOperator, rho: float, rows=None) -> np.ndarray:
    """Per-row discrete (K1) functional: rho^-2 sum_{|z|<=rho} |z|^2 w + sum_{|z|>rho} w + far mass."""
    rows = op.grid.interior if rows is None else np.asarray(rows)
    pts = op.grid.points
    z = pts[rows][:, None, :] - pts[None, :, :]
    r2 = np.sum(z * z, axis=-1)
    w = op.weights[rows]
    near = r2 <= rho * rho * (1 + 1e-12)
    return np.sum(np.where(near, w * r2 / rho**2, w), axis=1) + op.tail[rows]
