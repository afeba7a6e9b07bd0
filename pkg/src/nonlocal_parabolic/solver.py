"""Theta-scheme time stepping for du/dt - L u = f, weak residuals and Steklov averages."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .discretization import Assembler, Grid, bilinear_form
from .kernels import Kernel


@dataclass(frozen=True)
class ConstantDatum:
    """Space-time constant map; points carry a trailing axis of length 2 in d=2."""

    value: float = 0.0
    dim: int = 1

    def __call__(self, t, x):
        shape = np.shape(x) if self.dim == 1 else np.shape(x)[:-1]
        return np.full(shape, self.value)


zero_datum = ConstantDatum(0.0, 1)


@dataclass(eq=False)
class SolutionField:
    """Grid function u(t_n, x_i) on interior and collar nodes, plus the far-field datum."""

    times: np.ndarray
    values: np.ndarray
    grid: Grid
    kernel: Kernel
    exterior: Callable = zero_datum
    forcing: Optional[Callable] = None
    theta: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.times), self.grid.n):
            raise ValueError("values must have shape (len(times), grid.n)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def forcing_values(self, t: float) -> np.ndarray:
        if self.forcing is None:
            return np.zeros(self.grid.n)
        return np.broadcast_to(self.forcing(t, self.grid.x()), (self.grid.n,)).astype(float)

    def to_csv(self, path=None) -> str:
        """One row per (t, x, value); the header records kernel, h, dt and theta."""
        k = self.kernel
        head = (
            f"# kernel kind={k.kind} alpha={k.alpha:.12g} dim={k.dim} normalization={k.normalization} "
            f"coeff={k.coeff.name}; h={self.grid.h:.12g}; dt={self.dt:.12g}; theta={self.theta:.12g}"
        )
        cols = "t,x,value" if self.grid.dim == 1 else "t,x1,x2,value"
        lines = [head, cols]
        pts = self.grid.points
        for n, t in enumerate(self.times):
            for i in range(self.grid.n):
                xs = ",".join(f"{c:.12g}" for c in pts[i])
                lines.append(f"{t:.12g},{xs},{self.values[n, i]:.12g}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _as_callable(obj, dim: int):
    if obj is None or callable(obj):
        return obj
    return ConstantDatum(float(obj), dim)


def step_count(t_span, dt: float) -> tuple[int, float]:
    """Number of steps and the adjusted step dividing the interval exactly."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    length = t_span[1] - t_span[0]
    if length <= 0:
        raise ValueError("t_span must be increasing")
    n = max(1, int(math.ceil(length / dt - 1e-9)))
    return n, length / n


def solve(
    kernel: Kernel,
    grid: Grid,
    f=None,
    initial=0.0,
    exterior=None,
    t_span=(0.0, 1.0),
    dt: float = 0.01,
    theta: float = 1.0,
    assembler: Optional[Assembler] = None,
) -> SolutionField:
    """Integrate du/dt - L u = f on the interior with prescribed exterior data.

    (u^{n+1} - u^n)/dt = theta L u^{n+1} + (1 - theta) L u^n + f(t_{n+theta}).
    The time step is shrunk slightly if needed so that it divides t_span.
    """
    if not 0.5 <= theta <= 1.0:
        raise ValueError("theta must lie in [1/2, 1]")
    n_steps, dt = step_count(t_span, dt)
    f = _as_callable(f, grid.dim)
    g = _as_callable(exterior, grid.dim) or ConstantDatum(0.0, grid.dim)
    asm = assembler or Assembler(kernel, grid)
    I = grid.interior
    C = grid.collar_nodes
    x = grid.x()
    times = t_span[0] + dt * np.arange(n_steps + 1)

    u0 = initial(x) if callable(initial) else np.broadcast_to(np.asarray(initial, dtype=float), (grid.n,))
    values = np.empty((n_steps + 1, grid.n))
    values[0] = u0
    values[0, C] = np.broadcast_to(g(times[0], x[C]), (len(C),))

    def pieces(t):
        op = asm.at(t)
        W = op.weights
        A = W[np.ix_(I, I)].copy()
        A[np.diag_indices_from(A)] -= W[I].sum(axis=1) + op.tail[I]
        return op, A

    def forcing_term(op, t):
        gc = np.broadcast_to(g(t, x[C]), (len(C),))
        far = op.far_values(g, t)[I]
        return op.weights[np.ix_(I, C)] @ gc + np.sum(op.far_weights[I] * far, axis=1)

    static = not kernel.coeff.time_dependent
    op_n, A_n = pieces(times[0])
    b_n = forcing_term(op_n, times[0])
    lu = None
    eye = np.eye(len(I))
    for n in range(n_steps):
        t0, t1 = times[n], times[n + 1]
        if static:
            op_1, A_1 = op_n, A_n
        else:
            op_1, A_1 = pieces(t1)
        b_1 = forcing_term(op_1, t1)
        un = values[n, I]
        rhs = un + dt * (1 - theta) * (A_n @ un + b_n) + dt * theta * b_1
        if f is not None:
            tm = t0 + theta * dt
            rhs = rhs + dt * np.broadcast_to(f(tm, x[I]), (len(I),))
        M = eye - theta * dt * A_1
        try:
            if static:
                if lu is None:
                    lu = linalg.lu_factor(M)
                un1 = linalg.lu_solve(lu, rhs)
            else:
                un1 = linalg.solve(M, rhs)
        except (linalg.LinAlgError, ValueError) as exc:
            raise RuntimeError(f"linear solve failed at step {n} (t={t1:.6g}): {exc}") from exc
        if not np.all(np.isfinite(un1)):
            raise RuntimeError(f"non-finite solution at step {n} (t={t1:.6g})")
        values[n + 1, I] = un1
        values[n + 1, C] = np.broadcast_to(g(t1, x[C]), (len(C),))
        op_n, A_n, b_n = op_1, A_1, b_1

    return SolutionField(times, values, grid, kernel, g, f, theta, {"dt": dt, "steps": n_steps})


def step_matrix(kernel: Kernel, grid: Grid, dt: float, theta: float = 1.0, t: float = 0.0) -> np.ndarray:
    """I - theta dt A on interior unknowns (an M-matrix for nonnegative weights)."""
    op = Assembler(kernel, grid).at(t)
    I = grid.interior
    W = op.weights
    A = W[np.ix_(I, I)].copy()
    A[np.diag_indices_from(A)] -= W[I].sum(axis=1) + op.tail[I]
    return np.eye(len(I)) - theta * dt * A


def _phi_values(field_: SolutionField, phi) -> np.ndarray:
    if callable(phi):
        x = field_.grid.x()
        vals = np.stack([np.broadcast_to(phi(t, x), (field_.grid.n,)) for t in field_.times])
    else:
        vals = np.asarray(phi, dtype=float)
    if vals.shape != field_.values.shape:
        raise ValueError("test field must match the solution field shape")
    if np.any(vals[:, field_.grid.collar_nodes] != 0):
        raise ValueError("test field must be supported in the interior")
    return vals


def residual_weak(field_: SolutionField, phi, window=None, f=None, assembler: Optional[Assembler] = None) -> float:
    """Discrete weak residual of du/dt - L u = f against a test field phi.

    Evaluates [sum phi u]_{t1}^{t2} - sum_n <u^n, phi^{n+1} - phi^n>
    + sum_n dt E_half^{n+theta}(u, phi^{n+1}) - sum_n dt <f^{n+theta}, phi^{n+1}>
    with E_half = half the symmetric double-integral form (the form associated to L).
    Exact discrete solutions give zero up to round-off; supersolutions give >= 0.
    """
    phis = _phi_values(field_, phi)
    times = field_.times
    if window is None:
        k1, k2 = 0, len(times) - 1
    else:
        k1 = int(np.argmin(np.abs(times - window[0])))
        k2 = int(np.argmin(np.abs(times - window[1])))
    if k2 <= k1:
        raise ValueError("window must contain at least one time step")
    forcing = field_.forcing if f is None else _as_callable(f, field_.grid.dim)
    asm = assembler or Assembler(field_.kernel, field_.grid)
    hd = field_.grid.cell_volume
    x = field_.grid.x()
    u = field_.values
    theta = field_.theta
    g = field_.exterior

    def half_energy(n, phi_vec):
        op = asm.at(times[n])
        far_u = op.far_values(g, times[n])
        return 0.5 * bilinear_form(op, u[n], phi_vec, far_u=far_u, far_v=np.zeros_like(far_u))

    total = hd * (phis[k2] @ u[k2] - phis[k1] @ u[k1])
    for n in range(k1, k2):
        dt = times[n + 1] - times[n]
        p1 = phis[n + 1]
        total -= hd * (u[n] @ (phis[n + 1] - phis[n]))
        energy = theta * half_energy(n + 1, p1)
        if theta < 1:
            energy += (1 - theta) * half_energy(n, p1)
        total += dt * energy
        if forcing is not None:
            tm = times[n] + theta * dt
            fv = np.broadcast_to(forcing(tm, x), (field_.grid.n,))
            total -= dt * hd * (fv @ p1)
    return float(total)


# ---------------------------------------------------------------- Steklov averages


def steklov_array(values: np.ndarray, dt: float, window: float) -> np.ndarray:
    """Forward running mean over `window` on a uniform time grid (trapezoid rule).

    Rows with t_n >= t_N - window are set to zero.
    """
    values = np.asarray(values, dtype=float)
    n_t = values.shape[0]
    m = window / dt
    m_int = int(round(m))
    if m_int < 1 or abs(m - m_int) > 1e-9 * max(1.0, m):
        raise ValueError("averaging window must be a positive integer multiple of dt")
    if m_int >= n_t - 1:
        raise ValueError("averaging window must be shorter than the time interval")
    w = np.ones(m_int + 1)
    w[0] = w[-1] = 0.5
    w /= m_int
    out = np.zeros_like(values)
    valid = n_t - 1 - m_int
    for k in range(m_int + 1):
        out[:valid] += w[k] * values[k : k + valid]
    return out


def steklov(field_: SolutionField, h: float) -> SolutionField:
    times = field_.times
    if not 0 < h < times[-1] - times[0]:
        raise ValueError("averaging window outside (0, T)")
    vals = steklov_array(field_.values, field_.dt, h)
    return replace(field_, values=vals, meta=dict(field_.meta, steklov=h))


def lp_norm(values: np.ndarray, dt: float, hd: float, p: float) -> float:
    """Mixed L^p(I; L^p(space)) norm with node-based quadrature in time and space."""
    v = np.abs(np.asarray(values, dtype=float))
    if np.isinf(p):
        return float(np.max(v)) if v.size else 0.0
    return float((dt * hd * np.sum(v**p)) ** (1.0 / p))
