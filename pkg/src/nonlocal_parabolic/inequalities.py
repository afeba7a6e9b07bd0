"""Sample-based checks of the algebraic lemmas and discrete functional inequalities.

Every gap is oriented so that gap >= 0 means the inequality holds. The scalar
operations are vectorised: array inputs give array-valued GapResults.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .discretization import Assembler, Grid, bilinear_form, restricted_energy
from .kernels import Kernel

REL_TOL = 1e-12


@dataclass
class GapResult:
    lhs: object
    rhs: object
    gap: object
    inputs: dict = field(default_factory=dict)
    constant: Optional[float] = None

    @property
    def relative(self):
        return np.asarray(self.gap) / (np.abs(self.lhs) + np.abs(self.rhs) + 1.0)

    @property
    def holds(self) -> bool:
        return bool(np.all(self.relative >= -REL_TOL))


def _positive(name, *arrays):
    for a in arrays:
        if np.any(np.asarray(a) <= 0):
            raise ValueError(f"{name}: inputs must be positive")


def _result(lhs, rhs, inputs) -> GapResult:
    return GapResult(lhs, rhs, lhs - rhs, inputs)


# ---------------------------------------------------------------- algebraic lemmas


def mean_value_gap(fp, gp, f_a, f_b, g_a, g_b, a, b) -> GapResult:
    """max_t [f'(t) + g'(t)^2] minus the same expression for the difference quotients.

    fp, gp are derivative samples on a partition of [a, b].
    """
    fp = np.asarray(fp, dtype=float)
    gp = np.asarray(gp, dtype=float)
    if fp.size == 0 or gp.size == 0:
        raise ValueError("mean_value_gap: empty partition")
    if not b > a:
        raise ValueError("mean_value_gap: need b > a")
    lhs = float(np.max(fp + gp**2))
    rhs = (f_b - f_a) / (b - a) + ((g_b - g_a) / (b - a)) ** 2
    return _result(lhs, rhs, {"a": a, "b": b})


def _poly_mul(p, q):
    """Product of coefficient arrays (lowest degree first) along the last axis."""
    out = np.zeros(p.shape[:-1] + (p.shape[-1] + q.shape[-1] - 1,))
    for i in range(p.shape[-1]):
        out[..., i : i + q.shape[-1]] += p[..., i : i + 1] * q
    return out


def _poly_der(p):
    k = np.arange(1, p.shape[-1])
    return p[..., 1:] * k


def _poly_val(p, t):
    out = np.zeros(np.broadcast_shapes(p.shape[:-1], np.shape(t)))
    for i in range(p.shape[-1] - 1, -1, -1):
        out = out * t + p[..., i]
    return out


def _real_roots_cubic(c):
    """Real roots of c0 + c1 t + c2 t^2 + c3 t^3 (batched); NaN where absent."""
    n = c.shape[0]
    roots = np.full((n, 3), np.nan)
    lead = c[:, 3]
    big = np.abs(lead) > 1e-300
    if np.any(big):
        cc = c[big] / lead[big, None]
        comp = np.zeros((cc.shape[0], 3, 3))
        comp[:, 1, 0] = 1.0
        comp[:, 2, 1] = 1.0
        comp[:, :, 2] = -cc[:, :3]
        ev = np.linalg.eigvals(comp)
        real = np.abs(ev.imag) <= 1e-9 * (1 + np.abs(ev.real))
        roots[big] = np.where(real, ev.real, np.nan)
    small = ~big
    if np.any(small):
        a2, a1, a0 = c[small, 2], c[small, 1], c[small, 0]
        disc = a1 * a1 - 4 * a2 * a0
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            r1 = np.where(a2 != 0, (-a1 + sq) / (2 * a2), -a0 / a1)
            r2 = np.where(a2 != 0, (-a1 - sq) / (2 * a2), np.nan)
        roots[small, 0], roots[small, 1] = r1, r2
    return roots


def mean_value_gap_cubic(fc, gc, a, b) -> GapResult:
    """Exact mean_value_gap for cubic f, g given as coefficient rows (c0..c3).

    The maximum of f' + g'^2 is attained at an endpoint or a critical point,
    the real roots of the cubic f'' + 2 g' g''; difference quotients use the
    closed-form divided differences.
    """
    fc = np.atleast_2d(np.asarray(fc, dtype=float))
    gc = np.atleast_2d(np.asarray(gc, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if np.any(b <= a):
        raise ValueError("mean_value_gap_cubic: need b > a")
    fp, gp = _poly_der(fc), _poly_der(gc)
    h = np.zeros((fc.shape[0], 5))
    h[:, :3] += fp
    h += _poly_mul(gp, gp)
    crit = _real_roots_cubic(_poly_der(h))
    cand = np.concatenate([a[:, None], b[:, None], crit], axis=1)
    inside = (cand >= a[:, None]) & (cand <= b[:, None])
    cand = np.where(inside, cand, a[:, None])
    lhs = np.max(_poly_val(h[:, None, :], cand), axis=1)

    def slope(c):
        return c[:, 1] + c[:, 2] * (a + b) + c[:, 3] * (a * a + a * b + b * b)

    rhs = slope(fc) + slope(gc) ** 2
    return _result(lhs, rhs, {"a": a, "b": b})


def convex_gap(a, b, q) -> GapResult:
    a, b, q = (np.asarray(v, dtype=float) for v in (a, b, q))
    _positive("convex_gap", a, b, q)
    if np.any(q == 1):
        raise ValueError("convex_gap: q must differ from 1")
    e = (1 - q) / 2
    lhs = (b - a) * (a**-q - b**-q)
    rhs = 4 * q / (1 - q) ** 2 * (b**e - a**e) ** 2
    return _result(lhs, rhs, {"a": a, "b": b, "q": q})


def vartheta(q):
    return np.maximum(4.0, (6 * np.asarray(q, dtype=float) - 5) / 2)


def zeta(q):
    q = np.asarray(q, dtype=float)
    z = 4 * q / (1 - q)
    return z, z / 6, z + 9 / q


def _ratio_power(tau, x, e):
    """(x / tau)^e for e < 0, with the value 0 at tau = 0."""
    return np.where(tau > 0, (np.where(tau > 0, tau, 1.0) / x) ** (-e), 0.0)


def guelle_one(a, b, q, tau1, tau2) -> GapResult:
    a, b, q, tau1, tau2 = (np.asarray(v, dtype=float) for v in (a, b, q, tau1, tau2))
    _positive("guelle_one", a, b)
    if np.any(q <= 1):
        raise ValueError("guelle_one: q must exceed 1")
    if np.any(tau1 < 0) or np.any(tau2 < 0):
        raise ValueError("guelle_one: tau must be nonnegative")
    e = (1 - q) / 2
    lhs = (b - a) * (tau1 ** (q + 1) * a**-q - tau2 ** (q + 1) * b**-q)
    half = _ratio_power(tau2, b, e) - _ratio_power(tau1, a, e)
    full = _ratio_power(tau2, b, 2 * e) + _ratio_power(tau1, a, 2 * e)
    rhs = tau1 * tau2 * half**2 / (q - 1) - vartheta(q) * (tau2 - tau1) ** 2 * full
    return _result(lhs, rhs, {"a": a, "b": b, "q": q, "tau1": tau1, "tau2": tau2})


def guelle_two(a, b, q, tau1, tau2) -> GapResult:
    a, b, q, tau1, tau2 = (np.asarray(v, dtype=float) for v in (a, b, q, tau1, tau2))
    _positive("guelle_two", a, b)
    if np.any(q <= 0) or np.any(q >= 1):
        raise ValueError("guelle_two: q must lie in (0, 1)")
    if np.any(tau1 < 0) or np.any(tau2 < 0):
        raise ValueError("guelle_two: tau must be nonnegative")
    _, z1, z2 = zeta(q)
    e = (1 - q) / 2
    lhs = (b - a) * (tau1**2 * a**-q - tau2**2 * b**-q)
    rhs = z1 * (tau2 * b**e - tau1 * a**e) ** 2 - z2 * (tau2 - tau1) ** 2 * (b ** (2 * e) + a ** (2 * e))
    return _result(lhs, rhs, {"a": a, "b": b, "q": q, "tau1": tau1, "tau2": tau2})


def log_gap(a, b) -> GapResult:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    _positive("log_gap", a, b)
    lhs = (a - b) * (1 / b - 1 / a)
    rhs = (np.log(a) - np.log(b)) ** 2
    return _result(lhs, rhs, {"a": a, "b": b})


# ---------------------------------------------------------------- random suites


def _log_uniform(rng, lo, hi, n):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


def _zero_some(rng, tau1, tau2, frac=0.1):
    n = len(tau1)
    hit = rng.random(n) < frac
    which = rng.random(n) < 0.5
    tau1 = np.where(hit & which, 0.0, tau1)
    tau2 = np.where(hit & ~which, 0.0, tau2)
    return tau1, tau2


def _sample_convex(rng, n):
    q = rng.uniform(0.0, 5.0, n)
    q = np.where(np.abs(q - 1) < 1e-9, 1.5, np.where(q == 0, 0.5, q))
    return convex_gap(_log_uniform(rng, 1e-3, 1e3, n), _log_uniform(rng, 1e-3, 1e3, n), q)


def _sample_guelle_one(rng, n):
    a = _log_uniform(rng, 1e-3, 1e3, n)
    b = _log_uniform(rng, 1e-3, 1e3, n)
    q = 1 + _log_uniform(rng, 1e-3, 5.0, n)
    tau1, tau2 = _zero_some(rng, _log_uniform(rng, 1e-3, 1e3, n), _log_uniform(rng, 1e-3, 1e3, n))
    return guelle_one(a, b, q, tau1, tau2)


def _sample_guelle_two(rng, n):
    """Stratified over the four case regimes of the ratio s = tau2 / tau1 at t = b / a >= 1."""
    q = rng.uniform(1e-3, 1 - 1e-3, n)
    a = _log_uniform(rng, 1e-3, 1e3, n)
    t = 1 + _log_uniform(rng, 1e-9, 1e6, n)
    b = a * t
    tau1 = _log_uniform(rng, 1e-3, 1e3, n)
    case = rng.integers(0, 4, n)
    edge = 1 + q * (t - 1) / (4 * t)
    u = rng.random(n)
    s = np.select(
        [case == 0, case == 1, case == 2],
        [1 + u * (edge - 1), edge + u * (2 - edge), _log_uniform(rng, 1e-6, 1.0, n)],
        2 * _log_uniform(rng, 1.0, 1e6, n),
    )
    tau2 = s * tau1
    tau1, tau2 = _zero_some(rng, tau1, tau2)
    swap = rng.random(n) < 0.5
    a, b = np.where(swap, b, a), np.where(swap, a, b)
    return guelle_two(a, b, q, tau1, tau2)


def _sample_log(rng, n):
    return log_gap(_log_uniform(rng, 1e-6, 1e6, n), _log_uniform(rng, 1e-6, 1e6, n))


def _sample_mean_value(rng, n):
    fc = rng.normal(size=(n, 4))
    gc = rng.normal(size=(n, 4))
    ends = np.sort(rng.uniform(0.0, 10.0, (n, 2)), axis=1)
    a, b = ends[:, 0], ends[:, 1]
    b = np.where(b - a < 1e-9, a + 1e-3, b)
    return mean_value_gap_cubic(fc, gc, a, b)


SUITES: dict[str, tuple[Callable, int]] = {
    "convex_gap": (_sample_convex, 1_000_000),
    "guelle_one": (_sample_guelle_one, 1_000_000),
    "guelle_two": (_sample_guelle_two, 1_000_000),
    "log_gap": (_sample_log, 1_000_000),
    "mean_value_gap": (_sample_mean_value, 100_000),
}


@dataclass
class SuiteReport:
    name: str
    n: int
    seed: int
    worst_relative: float
    failures: int
    seconds: float
    worst: list

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def worst_csv(self) -> str:
        keys = sorted({k for row in self.worst for k in row})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for row in self.worst:
            w.writerow([f"{row[k]:.12g}" for k in keys])
        return buf.getvalue()


def run_suite(name: str, n: Optional[int] = None, seed: int = 0, chunk: int = 200_000) -> SuiteReport:
    """Evaluate one algebraic lemma on n random instances; keeps the ten worst relative gaps."""
    sampler, default_n = SUITES[name]
    n = default_n if n is None else int(n)
    rng = np.random.default_rng([seed, sorted(SUITES).index(name)])
    start = time.perf_counter()
    failures = 0
    worst_rows = []
    done = 0
    while done < n:
        m = min(chunk, n - done)
        res = sampler(rng, m)
        rel = np.asarray(res.relative)
        failures += int(np.sum(~(rel >= -REL_TOL)))
        idx = np.argsort(rel)[:10]
        for i in idx:
            row = {k: float(np.asarray(v)[i]) for k, v in res.inputs.items()}
            row.update(lhs=float(res.lhs[i]), rhs=float(res.rhs[i]), gap=float(res.gap[i]), relative=float(rel[i]))
            worst_rows.append(row)
        worst_rows = sorted(worst_rows, key=lambda r: r["relative"])[:10]
        done += m
    secs = time.perf_counter() - start
    return SuiteReport(name, n, seed, worst_rows[0]["relative"], failures, secs, worst_rows)


def run_algebraic_suites(seed: int = 0, scale: float = 1.0) -> list[SuiteReport]:
    return [run_suite(name, max(1, int(SUITES[name][1] * scale)), seed) for name in sorted(SUITES)]


# ---------------------------------------------------------------- functional inequalities


def _far_datum(value, dim):
    from .solver import ConstantDatum

    return value if callable(value) else ConstantDatum(float(value), dim)


def log_form_bound(kernel: Kernel, grid: Grid, w, psi, t: float = 0.0, w_far=1.0, assembler=None) -> GapResult:
    """Discrete log computation rule:
    E(w, -psi^2 / w) >= sum_{psi>0 pairs} psi psi (log(w/psi)(y) - log(w/psi)(x))^2 k - 3 E(psi, psi).

    w is positive on the grid; w_far gives its values beyond the grid (scalar or map).
    psi must vanish on collar nodes.
    """
    w = np.asarray(w, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if np.any(w <= 0):
        raise ValueError("log_form_bound: w must be positive")
    if np.any(psi < 0) or np.any(psi[grid.collar_nodes] != 0):
        raise ValueError("log_form_bound: psi must be nonnegative and vanish off the interior")
    op = (assembler or Assembler(kernel, grid)).at(t)
    far_w = op.far_values(_far_datum(w_far, grid.dim), t)
    if np.any(far_w <= 0):
        raise ValueError("log_form_bound: far values of w must be positive")
    zeros = np.zeros_like(far_w)
    lhs = bilinear_form(op, w, -(psi**2) / w, far_u=far_w, far_v=zeros)
    pos = np.flatnonzero(psi > 0)
    if pos.size:
        lg = np.zeros_like(w)
        lg[pos] = np.log(w[pos] / psi[pos])
        pw = psi[pos][:, None] * psi[pos][None, :]
        log_term = bilinear_form(op, lg, lg, nodes=pos, pair_weight=pw)
    else:
        log_term = 0.0
    e_psi = bilinear_form(op, psi, psi, far_u=zeros, far_v=zeros)
    return _result(lhs, log_term - 3 * e_psi, {"t": t, "log_term": log_term, "e_psi": e_psi})


def sobolev_sigma(alpha: float, d: int) -> float:
    return 3.0 / (3.0 - alpha) if d in (1, 2) else d / (d - alpha)


def sobolev_ratio(grid: Grid, v, alpha: float, R: float = 1.0, alpha0: float = 0.4, lam: float = 10.0) -> GapResult:
    """Smallest S with (int |v|^{2 sigma})^{1/sigma} <= S [(2-a) E_{B_R}(v) + R^-a int v^2].

    v is a grid function vanishing outside the open ball B_R around the grid center.
    """
    if R > 2.0:
        raise ValueError("sobolev_ratio: radii above 2 are outside the supported range")
    v = np.asarray(v, dtype=float)
    rel = grid.relative()
    inside = np.sqrt(np.sum(rel**2, axis=-1)) < R * (1 - 1e-12)
    if np.any(v[~inside] != 0):
        raise ValueError("sobolev_ratio: v must be supported in B_R")
    if not np.any(v != 0):
        raise ValueError("sobolev_ratio: zero function")
    d = grid.dim
    hd = grid.cell_volume
    sigma = sobolev_sigma(alpha, d)
    ref = Kernel(alpha, d, alpha0, lam, "fractional", "simple")
    vb = v[inside]
    lhs = (hd * np.sum(np.abs(vb) ** (2 * sigma))) ** (1 / sigma)
    unit = restricted_energy(ref, grid.h, grid.index[inside], vb) + R**-alpha * hd * np.sum(vb**2)
    S = lhs / unit
    return GapResult(lhs, S * unit, 0.0, {"alpha": alpha, "R": R, "sigma": sigma}, S)


def poincare_weight(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    r = np.abs(x) if x.ndim == 1 else np.sqrt(np.sum(x**2, axis=-1))
    return np.clip(np.minimum(1.5 - r, 1.0), 0.0, None)


def poincare_ratio(kernel: Kernel, grid: Grid, v, t: float = 0.0, assembler=None) -> GapResult:
    """c2_required = sum (v - v_Psi)^2 Psi h^d / sum (v_i - v_j)^2 k (Psi_i ^ Psi_j) h^d on B_{3/2}."""
    v = np.asarray(v, dtype=float)
    rel = grid.relative()
    dist = np.sqrt(np.sum(rel**2, axis=-1))
    nodes = np.flatnonzero(dist < 1.5 * (1 - 1e-12))
    if grid.omega < 1.5:
        raise ValueError("poincare_ratio: grid interior must contain B_{3/2}")
    psi = poincare_weight(dist[nodes])
    vb = v[nodes]
    mean = np.sum(vb * psi) / np.sum(psi)
    lhs = grid.cell_volume * float(np.sum((vb - mean) ** 2 * psi))
    op = (assembler or Assembler(kernel, grid)).at(t)
    pw = np.minimum(psi[:, None], psi[None, :])
    rhs = bilinear_form(op, v, v, nodes=nodes, pair_weight=pw)
    if rhs <= 0:
        if lhs > 1e-14 * max(1.0, float(np.max(np.abs(vb))) ** 2):
            raise ValueError("poincare_ratio: degenerate energy for a nonconstant function")
        c2 = 0.0
    else:
        c2 = lhs / rhs
    return GapResult(lhs, rhs, 0.0, {"t": t, "mean": mean}, c2)


def random_probes(grid: Grid, count: int, rng: np.random.Generator, radius: float = 1.5, support: Optional[float] = None):
    """Smooth (80%) and rough (20%) random grid functions; optionally cut off outside B_support."""
    from .kernels import default_probes

    rel = grid.relative()
    dist = np.sqrt(np.sum(rel**2, axis=-1))
    probes = default_probes(rel, np.zeros(grid.dim), radius, count, rng)
    if support is not None:
        mask = dist < support * (1 - 1e-12)
        probes = [np.where(mask, p, 0.0) for p in probes]
    return probes
