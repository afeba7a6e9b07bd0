"""Moment inequalities, Moser iterations, log sublevel bounds, weak Harnack quotients,
the growth lemma and oscillation decay, evaluated on solved fields.

Integrals over a box use the grid nodes strictly inside it, each weighted by
|box| / (number of nodes), so constants integrate exactly. Infima and suprema are
minima and maxima over the same nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .discretization import Assembler, apply_L, bilinear_form
from .geometry import (
    Cylinder,
    SpaceTimeBox,
    ball_volume,
    dhat_box,
    growth_domains,
    harnack_domains,
    q_minus,
    q_plus,
    rho_hat,
)
from .inequalities import GapResult, vartheta
from .solver import SolutionField, residual_weak

DELTA_FLOOR = 1e-8


# ---------------------------------------------------------------- helpers


def kappa(alpha: float, d: int) -> float:
    """Moser exponent gain; 1 + alpha/3 in low dimensions."""
    return 1.0 + alpha / 3.0 if d in (1, 2) else 1.0 + alpha / d


def shape_factor(r: float, R: float, alpha: float) -> float:
    return (R - r) ** -alpha + 1.0 / (R**alpha - r**alpha)


def a_shape(r: float, R: float, alpha: float, p: float) -> float:
    return (p + 1) ** 2 * shape_factor(r, R, alpha)


def g1(r: float, R: float, alpha: float, d: int) -> float:
    if alpha >= 1:
        return (R - r) ** (d + alpha)
    return (R**alpha - r**alpha) ** ((d + alpha) / alpha)


def g1_lower(r: float, R: float, d: int, alpha0: float) -> float:
    """alpha-free lower bound for g1."""
    return min((R - r) ** (d + 2), (alpha0 * (R - r)) ** ((d + 2) / alpha0))


def omegas(d: int, alpha0: float) -> tuple[float, float]:
    return 2 * d + 6 + 4 / d, 2 * d / alpha0 + 3 + 2 / d


def g2(r: float, R: float, d: int, alpha0: float) -> float:
    w1, w2 = omegas(d, alpha0)
    return min((R - r) ** w1, (alpha0 * (R - r)) ** w2)


def as_box(region) -> SpaceTimeBox:
    return region.box if isinstance(region, Cylinder) else region


@dataclass
class BoxNodes:
    """Time rows and space columns of the nodes strictly inside a box."""

    box: SpaceTimeBox
    rows: np.ndarray
    cols: np.ndarray

    @property
    def count(self) -> int:
        return len(self.rows) * len(self.cols)

    @property
    def weight(self) -> float:
        return self.box.measure / self.count


def box_nodes(fld: SolutionField, region, allow_empty: bool = False) -> BoxNodes:
    box = as_box(region)
    t = fld.times
    rows = np.flatnonzero((t > box.t0 + 1e-12) & (t < box.t1 - 1e-12))
    pts = fld.grid.points
    dist = np.sqrt(np.sum((pts - np.asarray(box.center)) ** 2, axis=-1))
    cols = np.flatnonzero((dist < box.radius * (1 - 1e-12)) & fld.grid.interior_mask)
    if not allow_empty:
        if box.t0 < t[0] - 1e-12 or box.t1 > t[-1] + 1e-12:
            raise ValueError("region lies outside the time range of the field")
        offset = float(np.linalg.norm(np.subtract(box.center, fld.grid.center)))
        if offset + box.radius > fld.grid.omega + 1e-12:
            raise ValueError("region lies outside the interior of the field")
        if len(rows) == 0 or len(cols) == 0:
            raise ValueError("region contains no grid nodes")
    return BoxNodes(box, rows, cols)


def forcing_norm(fld: SolutionField) -> float:
    if fld.forcing is None:
        return 0.0
    x = fld.grid.x()[fld.grid.interior]
    vals = [np.max(np.abs(np.broadcast_to(fld.forcing(t, x), (len(x),)))) for t in fld.times]
    return float(max(vals))


def utilde(fld: SolutionField, f_norm: Optional[float] = None) -> np.ndarray:
    """u + ||f||_inf, or u + 1e-8 when the forcing vanishes."""
    f_norm = forcing_norm(fld) if f_norm is None else float(f_norm)
    return fld.values + (f_norm if f_norm > 0 else DELTA_FLOOR)


def _block(values: np.ndarray, nodes: BoxNodes) -> np.ndarray:
    return values[np.ix_(nodes.rows, nodes.cols)]


def _log_power_integral(vals: np.ndarray, p: float, weight: float) -> float:
    """log of weight * sum |vals|^p, evaluated without overflow for large |p|."""
    a = np.abs(vals)
    if p < 0 and np.any(a <= 0):
        raise ValueError("negative exponent requires strictly positive values")
    ref = float(np.max(a)) if p > 0 else float(np.min(a))
    if ref == 0:
        return -math.inf
    return p * math.log(ref) + math.log(weight * float(np.sum((a / ref) ** p)))


def _power_integral(vals: np.ndarray, p: float, weight: float) -> float:
    return math.exp(_log_power_integral(vals, p, weight))


def _moment_value(vals: np.ndarray, p: float, weight: float) -> float:
    if np.isinf(p):
        if p > 0:
            return float(np.max(np.abs(vals)))
        if np.any(vals <= 0):
            raise ValueError("negative exponent requires strictly positive values")
        return float(np.min(vals))
    if p < 0 and np.any(vals <= 0):
        raise ValueError("negative exponent requires strictly positive values")
    a = np.abs(vals)
    ref = float(np.max(a)) if p > 0 else float(np.min(a))
    if ref == 0:
        return 0.0
    s = weight * float(np.sum((a / ref) ** p))
    return ref * s ** (1.0 / p)


# ---------------------------------------------------------------- moments


@dataclass
class MomentValue:
    cylinder: SpaceTimeBox
    p: float
    value: float


def moment(fld: SolutionField, cyl, p: float, values: Optional[np.ndarray] = None) -> MomentValue:
    """(int_cyl |u|^p)^(1/p); p = +inf / -inf give max / min over the nodes."""
    if p == 0:
        raise ValueError("moment exponent must be nonzero")
    nodes = box_nodes(fld, cyl)
    vals = _block(fld.values if values is None else values, nodes)
    return MomentValue(nodes.box, p, _moment_value(vals, p, nodes.weight))


def _signed_cylinder(sign: str, r: float, alpha: float, d: int, t0: float) -> SpaceTimeBox:
    if sign == "minus":
        return q_minus(r, alpha, d).box.shifted(t0)
    if sign == "plus":
        return q_plus(r, alpha, d).box.shifted(t0)
    raise ValueError("sign must be 'minus' or 'plus'")


def moment_step(
    fld: SolutionField,
    r: float,
    R: float,
    p: float,
    sign: str = "minus",
    f_norm: Optional[float] = None,
    C: Optional[float] = None,
    t0: float = 0.0,
) -> GapResult:
    """Elementary Moser step; constant = A_emp / A_shape, gap = log(rhs / lhs).

    minus: (int_{Q-(r)} u~^{-kappa p})^{1/kappa} <= A int_{Q-(R)} u~^{-p}
    plus:  (int_{Q+(r)} u~^{kappa p})^{1/kappa}  <= A int_{Q+(R)} u~^{p}
    """
    alpha, d = fld.kernel.alpha, fld.grid.dim
    k = kappa(alpha, d)
    if not 0.5 <= r < R <= 1:
        raise ValueError("need 1/2 <= r < R <= 1")
    if sign == "minus" and not p > 0:
        raise ValueError("exponent must be positive")
    if sign == "plus" and not 0 < p <= 1 / k + 1e-15:
        raise ValueError("exponent must lie in (0, 1/kappa]")
    u = utilde(fld, f_norm)
    s = -1.0 if sign == "minus" else 1.0
    inner = box_nodes(fld, _signed_cylinder(sign, r, alpha, d, t0))
    outer = box_nodes(fld, _signed_cylinder(sign, R, alpha, d, t0))
    log_lhs = _log_power_integral(_block(u, inner), s * k * p, inner.weight) / k
    log_denom = _log_power_integral(_block(u, outer), s * p, outer.weight)
    log_a = log_lhs - log_denom
    shape = a_shape(r, R, alpha, p) if sign == "minus" else shape_factor(r, R, alpha)
    ratio = math.exp(log_a) / shape
    c = ratio if C is None else C
    lhs = math.exp(log_lhs) if log_lhs < 700 else math.inf
    rhs = c * shape * math.exp(log_denom) if log_denom < 700 else math.inf
    gap = math.log(c * shape) + log_denom - log_lhs
    return GapResult(
        lhs,
        rhs,
        gap,
        {
            "r": r, "R": R, "p": p, "sign": sign, "A_emp": math.exp(log_a), "A_shape": shape,
            "kappa": k, "log_lhs": log_lhs, "log_denom": log_denom,
        },
        ratio,
    )


# ---------------------------------------------------------------- Moser iterations


@dataclass
class IterationReport:
    lhs: float
    rhs: float
    constant: float
    radii: list
    exponents: list
    moments: list
    step_ratios: list
    g: float

    def passes(self, C: float) -> bool:
        return bool(np.isfinite(self.constant) and self.constant <= C)


def radius_schedule(r: float, R: float, alpha: float, m: int) -> float:
    if alpha >= 1:
        return r + (R - r) / 2**m
    return (r**alpha + (R**alpha - r**alpha) / 2**m) ** (1 / alpha)


def iterate_inf(
    fld: SolutionField,
    r: float = 0.5,
    R: float = 1.0,
    p: float = 1.0,
    f_norm: Optional[float] = None,
    t0: float = 0.0,
    p_stop: float = 256.0,
    max_steps: int = 60,
) -> IterationReport:
    """sup_{Q-(r)} u~^{-1} <= (C / G1)^{1/p} (int_{Q-(R)} u~^{-p})^{1/p}; returns the empirical C."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    alpha, d = fld.kernel.alpha, fld.grid.dim
    k = kappa(alpha, d)
    u = utilde(fld, f_norm)
    if np.any(u[:, fld.grid.interior] <= 0):
        raise ValueError("field must be positive")
    radii, exps, moms, ratios = [], [], [], []
    m = 0
    pm = p
    while True:
        rm = radius_schedule(r, R, alpha, m)
        nodes = box_nodes(fld, _signed_cylinder("minus", rm, alpha, d, t0))
        val = _moment_value(1.0 / _block(u, nodes), pm, nodes.weight)
        if not np.isfinite(val):
            raise OverflowError(f"moment overflow at step {m}: field not bounded below")
        radii.append(rm)
        exps.append(pm)
        moms.append(val)
        if pm >= p_stop or m >= max_steps:
            break
        r_next = radius_schedule(r, R, alpha, m + 1)
        step = moment_step(fld, r_next, rm, pm, "minus", f_norm, t0=t0)
        ratios.append(step.inputs["A_emp"])
        m += 1
        pm *= k
    inner = box_nodes(fld, _signed_cylinder("minus", r, alpha, d, t0))
    lhs = 1.0 / float(np.min(_block(u, inner)))
    outer = box_nodes(fld, _signed_cylinder("minus", R, alpha, d, t0))
    integral = _power_integral(_block(u, outer), -p, outer.weight)
    G = g1(r, R, alpha, d)
    C = G * lhs**p / integral
    rhs = (C / G) ** (1 / p) * integral ** (1 / p)
    return IterationReport(lhs, rhs, C, radii, exps, moms, ratios, G)


def iterate_L1(
    fld: SolutionField,
    r: float = 0.5,
    R: float = 1.0,
    p: float = 0.25,
    f_norm: Optional[float] = None,
    t0: float = 0.0,
) -> IterationReport:
    """int_{Q+(r)} u~ <= (C / (|Q+(1)| G2))^{1/p - 1} (int_{Q+(R)} u~^p)^{1/p}; returns the empirical C."""
    alpha, d = fld.kernel.alpha, fld.grid.dim
    k = kappa(alpha, d)
    if not 0 < p < 1 / k:
        raise ValueError("p must lie in (0, 1/kappa)")
    u = utilde(fld, f_norm)
    inner = box_nodes(fld, _signed_cylinder("plus", r, alpha, d, t0))
    outer = box_nodes(fld, _signed_cylinder("plus", R, alpha, d, t0))
    lhs = _power_integral(_block(u, inner), 1.0, inner.weight)
    M = _moment_value(_block(u, outer), p, outer.weight)
    G = g2(r, R, d, fld.kernel.alpha0)
    q1 = q_plus(1.0, alpha, d).measure
    C = q1 * G * (lhs / M) ** (p / (1 - p))
    rhs = (C / (q1 * G)) ** (1 / p - 1) * M
    return IterationReport(lhs, rhs, C, [r, R], [1.0, p], [lhs, M], [], G)


# ---------------------------------------------------------------- Caccioppoli


def caccioppoli_check(
    fld: SolutionField,
    r: float = 0.5,
    R: float = 1.0,
    q: float = 2.0,
    f_norm: Optional[float] = None,
    t0: float = 0.0,
    assembler: Optional[Assembler] = None,
) -> GapResult:
    """Energy estimate for v = u~^{(1-q)/2}; constant = lhs / [(q-1) theta(q) shape int_{Q-(R)} v^2]."""
    if q <= 1:
        raise ValueError("q must exceed 1")
    alpha, d = fld.kernel.alpha, fld.grid.dim
    u = utilde(fld, f_norm)
    if np.any(u[:, fld.grid.interior] <= 0):
        raise ValueError("field must be positive")
    v = u ** ((1 - q) / 2)
    inner = box_nodes(fld, _signed_cylinder("minus", r, alpha, d, t0))
    outer = box_nodes(fld, _signed_cylinder("minus", R, alpha, d, t0))
    vol_r = ball_volume(d, r) / len(inner.cols)
    sup_term = max(vol_r * float(np.sum(v[n, inner.cols] ** 2)) for n in inner.rows)
    asm = assembler or Assembler(fld.kernel, fld.grid)
    dt_w = inner.box.duration / len(inner.rows)
    energy = 0.0
    for n in inner.rows:
        op = asm.at(fld.times[n])
        energy += dt_w * bilinear_form(op, v[n], v[n], nodes=inner.cols)
    lhs = sup_term + energy
    integral = _power_integral(_block(v, outer), 2.0, outer.weight)
    shape = (q - 1) * float(vartheta(q)) * shape_factor(r, R, alpha) * integral
    c = lhs / shape
    return GapResult(lhs, shape * c, 0.0, {"r": r, "R": R, "q": q, "sup": sup_term, "energy": energy}, c)


# ---------------------------------------------------------------- log sublevel sets


@dataclass
class LogSublevelReport:
    a: float
    levels: np.ndarray
    measure_plus: np.ndarray
    measure_minus: np.ndarray
    C_plus: float
    C_minus: float

    @property
    def C_required(self) -> float:
        return max(self.C_plus, self.C_minus)


def log_constant(fld: SolutionField, f_norm: Optional[float] = None, t_ref: float = 0.0) -> float:
    """Psi^2-weighted spatial mean of -log(u~ / psi) at t_ref, psi^2 = (3/2 - |x|) ^ 1."""
    u = utilde(fld, f_norm)
    n = int(np.argmin(np.abs(fld.times - t_ref)))
    if abs(fld.times[n] - t_ref) > 0.5 * fld.dt + 1e-12:
        raise ValueError("reference time not on the time grid")
    rel = fld.grid.points - np.asarray(fld.grid.center)
    dist = np.sqrt(np.sum(rel**2, axis=-1))
    psi2 = np.clip(np.minimum(1.5 - dist, 1.0), 0.0, None)
    pos = np.flatnonzero(psi2 > 0)
    if np.any(u[n, pos] <= 0):
        raise ValueError("field must be positive")
    v = -np.log(u[n, pos] / np.sqrt(psi2[pos]))
    return float(np.sum(v * psi2[pos]) / np.sum(psi2[pos]))


def default_levels() -> np.ndarray:
    return np.geomspace(0.01, 100.0, 41)


def log_sublevel(
    fld: SolutionField,
    levels=None,
    f_norm: Optional[float] = None,
    a: Optional[float] = None,
    t0: float = 0.0,
) -> LogSublevelReport:
    """Measures of Q+(1) n {log u~ < -s - a} and Q-(1) n {log u~ > s - a} with one shared a."""
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    if np.any(levels <= 0):
        raise ValueError("levels must be positive")
    alpha, d = fld.kernel.alpha, fld.grid.dim
    u = utilde(fld, f_norm)
    if np.any(u[:, fld.grid.interior] <= 0):
        raise ValueError("field must be positive")
    a = log_constant(fld, f_norm, t0) if a is None else a
    plus = box_nodes(fld, _signed_cylinder("plus", 1.0, alpha, d, t0))
    minus = box_nodes(fld, _signed_cylinder("minus", 1.0, alpha, d, t0))
    lp = np.log(_block(u, plus)).ravel()
    lm = np.log(_block(u, minus)).ravel()
    mp = np.array([np.sum(lp < -s - a) for s in levels]) * plus.weight
    mm = np.array([np.sum(lm > s - a) for s in levels]) * minus.weight
    b1 = ball_volume(d, 1.0)
    return LogSublevelReport(
        a, levels, mp, mm, float(np.max(levels * mp) / b1), float(np.max(levels * mm) / b1)
    )


# ---------------------------------------------------------------- Bombieri-Giusti


@dataclass
class BGParams:
    theta: float
    eta: float
    m: float
    c0: Optional[float]
    p0: float


@dataclass
class BGReport:
    c0_required: float
    c0_moments: float
    c0_sublevel: float
    hypotheses_hold: bool
    lhs: float
    C_emp: float
    u1_measure: float

    def passes(self, C: float) -> bool:
        return self.hypotheses_hold and bool(np.isfinite(self.C_emp)) and self.C_emp <= C


def bombieri_giusti_check(moments: dict, sublevel: dict, params: BGParams, u1_measure: float) -> BGReport:
    """Check the moment-family and sublevel hypotheses and the resulting L^{p0} bound.

    moments maps (r, p) to (int_{U(r)} w^p)^{1/p} (p = inf for the supremum) and
    must contain (r, p0) for every radius used and (r, p) pairs with p < 1 ^ eta p0.
    sublevel maps s > 0 to |U(1) n {log w > s}|.
    """
    p0 = params.p0
    radii = sorted({r for r, _ in moments})
    ps = sorted({p for _, p in moments if p != p0})
    if params.theta not in radii or 1.0 not in radii:
        raise ValueError("moment family must contain theta and 1")
    for r in radii:
        if (r, p0) not in moments:
            raise ValueError(f"missing moment ({r}, {p0})")
    cap = min(1.0, params.eta * p0)
    ps = [p for p in ps if 0 < p < cap]
    if not ps:
        raise ValueError("no admissible exponents below 1 ^ eta p0")
    inv_p0 = 0.0 if np.isinf(p0) else 1.0 / p0
    c0_mom = 0.0
    for i, r in enumerate(radii):
        for R in radii[i + 1 :]:
            for p in ps:
                if (R, p) not in moments:
                    raise ValueError(f"missing moment ({R}, {p})")
                lhs, M = moments[(r, p0)], moments[(R, p)]
                e = 1.0 / p - inv_p0
                c0_mom = max(c0_mom, (R - r) ** params.m * u1_measure * (lhs / M) ** (1.0 / e))
    c0_sub = max((s * m / u1_measure for s, m in sublevel.items()), default=0.0)
    c0_req = max(c0_mom, c0_sub)
    holds = params.c0 is None or c0_req <= params.c0
    lhs = moments[(params.theta, p0)]
    C = lhs / u1_measure**inv_p0
    return BGReport(c0_req, c0_mom, c0_sub, holds, lhs, C, u1_measure)


def bg_families(alpha: float, d: int):
    """(U(r), U_hat(r), theta) for the two weak-Harnack applications."""
    if alpha >= 1:
        theta = 0.5

        def U(r):
            return SpaceTimeBox(1.0 - r**alpha, 1.0, (0.0,) * d, r)

        def Uh(r):
            return SpaceTimeBox(-1.0, -1.0 + r**alpha, (0.0,) * d, r)

    else:
        theta = 0.5**alpha

        def U(r):
            return SpaceTimeBox(1.0 - r, 1.0, (0.0,) * d, r ** (1 / alpha))

        def Uh(r):
            return SpaceTimeBox(-1.0, -1.0 + r, (0.0,) * d, r ** (1 / alpha))

    return U, Uh, theta


@dataclass
class HarnackBGReport:
    a: float
    w: BGReport
    w_hat: BGReport

    @property
    def product(self) -> float:
        return self.w.C_emp * self.w_hat.C_emp


def bombieri_giusti_field(
    fld: SolutionField,
    f_norm: Optional[float] = None,
    n_radii: int = 5,
    c0: Optional[float] = None,
    levels=None,
) -> HarnackBGReport:
    """Run both Bombieri-Giusti applications of the weak Harnack argument on a field on (-1, 1)."""
    alpha, d = fld.kernel.alpha, fld.grid.dim
    u = utilde(fld, f_norm)
    a = log_constant(fld, f_norm)
    U, Uh, theta = bg_families(alpha, d)
    radii = [float(x) for x in np.linspace(theta, 1.0, n_radii)]
    w_vals = np.exp(-a) / u
    wh_vals = np.exp(a) * u
    eta_hat = d / (d + 2)
    ps_w = [0.25, 0.5, 0.75]
    ps_wh = [eta_hat * f for f in (0.3, 0.6, 0.9)]
    mom_w, mom_wh = {}, {}
    for r in radii:
        nw = box_nodes(fld, U(r))
        bw = _block(w_vals, nw)
        mom_w[(r, math.inf)] = float(np.max(bw))
        for p in ps_w:
            mom_w[(r, p)] = _moment_value(bw, p, nw.weight)
        nh = box_nodes(fld, Uh(r))
        bh = _block(wh_vals, nh)
        mom_wh[(r, 1.0)] = _moment_value(bh, 1.0, nh.weight)
        for p in ps_wh:
            mom_wh[(r, p)] = _moment_value(bh, p, nh.weight)
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    n1 = box_nodes(fld, U(1.0))
    lw = np.log(_block(w_vals, n1)).ravel()
    sub_w = {float(s): float(np.sum(lw > s)) * n1.weight for s in levels}
    nh1 = box_nodes(fld, Uh(1.0))
    lwh = np.log(_block(wh_vals, nh1)).ravel()
    sub_wh = {float(s): float(np.sum(lwh > s)) * nh1.weight for s in levels}
    u1 = U(1.0).measure
    w1, w2 = omegas(d, fld.kernel.alpha0)
    rep_w = bombieri_giusti_check(mom_w, sub_w, BGParams(theta, 0.5, d + 2, c0, math.inf), u1)
    rep_wh = bombieri_giusti_check(mom_wh, sub_wh, BGParams(theta, eta_hat, max(w1, w2), c0, 1.0), u1)
    return HarnackBGReport(a, rep_w, rep_wh)


# ---------------------------------------------------------------- weak Harnack


@dataclass
class HarnackReport:
    alpha: float
    l1_minus: float
    inf_plus: float
    f_inf: float
    quotient: float
    inf_minus: float
    u_minus_measure: float

    @property
    def sanity_bound(self) -> float:
        denom = self.inf_plus + self.f_inf
        return math.inf if denom == 0 else self.u_minus_measure * self.inf_minus / denom


def harnack_quotient(
    fld: SolutionField,
    f_norm: Optional[float] = None,
    variant: str = "scaled",
    frame=None,
) -> HarnackReport:
    """||u||_{L1(U-)} / (inf_{U+} u + ||f||_inf).

    frame = (r, xi, tau) evaluates the quotient of the pulled-back problem
    u(r^alpha t + tau, r x + xi) directly in the original coordinates.
    """
    alpha, d = fld.kernel.alpha, fld.grid.dim
    f_norm = forcing_norm(fld) if f_norm is None else float(f_norm)
    up, um = harnack_domains(alpha, d, variant)
    scale = 1.0
    if frame is not None:
        r, xi, tau = frame
        xi = np.zeros(d) + np.atleast_1d(np.asarray(xi, dtype=float))

        def push(b):
            return SpaceTimeBox(tau + r**alpha * b.t0, tau + r**alpha * b.t1, tuple(xi + r * np.asarray(b.center)), r * b.radius)

        up, um = push(up), push(um)
        scale = r ** -(d + alpha)
        f_norm = r**alpha * f_norm
    npl = box_nodes(fld, up)
    nmi = box_nodes(fld, um)
    bm = _block(fld.values, nmi)
    l1 = scale * nmi.weight * float(np.sum(np.abs(bm)))
    inf_plus = float(np.min(_block(fld.values, npl)))
    denom = inf_plus + f_norm
    q = math.inf if denom <= 0 else l1 / denom
    return HarnackReport(alpha, l1, inf_plus, f_norm, q, float(np.min(bm)), scale * um.measure)


# ---------------------------------------------------------------- growth lemma


@dataclass
class GrowthReport:
    applicable: bool
    density: float
    delta_measured: float
    passed: bool
    residual_min: Optional[float] = None
    exterior_forcing: float = 0.0
    note: str = ""


def growth_check(
    fld: SolutionField,
    sigma: float = 0.5,
    eps0: float = 0.05,
    delta: float = 0.0,
    certify: int = 0,
    seed: int = 0,
    beta0: Optional[float] = None,
) -> GrowthReport:
    """Measured inf over D+ of a field on (-2, 0) satisfying the growth-lemma hypotheses.

    certify > 0 tests the supersolution property against that many random
    nonnegative test fields with forcing -eps0. With beta0 set, negative exterior
    values are admitted above 2[1 - (6 rho_hat)^beta0] and the exterior part is
    routed through the forcing L w^- (measured and added to the eps0 budget).
    """
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    alpha, d = fld.kernel.alpha, fld.grid.dim
    dm, dp, d1 = growth_domains(alpha, d)
    grid = fld.grid
    w = fld.values
    ext_force = 0.0
    note = ""
    if beta0 is None:
        if np.any(w < -1e-12):
            return GrowthReport(False, 0.0, 0.0, False, note="field has negative values")
    else:
        outside = ~grid.interior_mask
        tt = fld.times[:, None] * np.ones((1, int(outside.sum())))
        xx = grid.x()[outside]
        rh = rho_hat(tt, np.broadcast_to(xx, tt.shape + xx.shape[1:]), alpha)
        floor = 2 * (1 - (6 * np.minimum(rh, 1e6)) ** beta0)
        if np.any(w[:, outside] < np.minimum(floor, 0.0) - 1e-12):
            return GrowthReport(False, 0.0, 0.0, False, note="exterior below the admissible floor")
        if np.any(w[:, grid.interior] < -1e-12):
            return GrowthReport(False, 0.0, 0.0, False, note="negative values inside")
        asm = Assembler(fld.kernel, grid)
        rows = np.flatnonzero(grid.interior_mask & (np.sqrt(np.sum(grid.relative() ** 2, axis=-1)) < 2.0))
        for n, t in enumerate(fld.times):
            wn = np.maximum(-w[n], 0.0)
            if not np.any(wn > 0):
                continue
            op = asm.at(t)
            neg_ext = lambda tt_, xx_, _g=fld.exterior: np.maximum(-_g(tt_, xx_), 0.0)
            lw = apply_L(op, wn, exterior=neg_ext, rows=rows)
            ext_force = max(ext_force, float(np.max(np.abs(lw))))
        note = "exterior routed through L w^-"
    nm = box_nodes(fld, dm)
    density = float(np.mean(_block(w, nm) >= 1.0))
    if density < sigma:
        return GrowthReport(False, density, 0.0, False, note="density hypothesis not met")
    res_min = None
    if certify:
        rng = np.random.default_rng(seed)
        I = grid.interior
        res_min = math.inf
        asm = Assembler(fld.kernel, grid)
        for _ in range(certify):
            phi = np.zeros_like(w)
            phi[:, I] = rng.random((len(fld.times), len(I)))
            res = residual_weak(fld, phi, f=-eps0, assembler=asm)
            res_min = min(res_min, res)
        if res_min < -1e-8:
            return GrowthReport(False, density, 0.0, False, res_min, ext_force, "supersolution check failed")
    if ext_force > eps0:
        return GrowthReport(False, density, 0.0, False, res_min, ext_force, "exterior forcing exceeds eps0")
    npl = box_nodes(fld, dp)
    dmeas = float(np.min(_block(w, npl)))
    return GrowthReport(True, density, dmeas, dmeas >= delta and dmeas > 0, res_min, ext_force, note)


# ---------------------------------------------------------------- oscillation decay


def beta_formula(delta: float, beta0: float = 1.0) -> float:
    return min(beta0, math.log(2 / (2 - delta)) / math.log(6))


@dataclass
class OscillationReport:
    levels: np.ndarray
    osc: np.ndarray
    beta_fit: float
    sup_norm: float
    fit_levels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    intercept: float = 0.0

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.osc) <= 0))

    def bound(self, slack: float = 1.0) -> np.ndarray:
        return slack * 2 * self.sup_norm * 6.0 ** (-self.levels * self.beta_fit)

    def fit_residuals(self) -> np.ndarray:
        """Relative deviation of each fitted level from the fitted line."""
        lv = self.fit_levels
        pred = np.exp(self.intercept - self.beta_fit * lv * math.log(6))
        return self.osc[lv] / pred - 1.0


def oscillation_decay(
    fld: SolutionField,
    t0: float = 0.0,
    x0=None,
    nu_max: Optional[int] = None,
    min_nodes: int = 8,
) -> OscillationReport:
    """osc over D_hat(6^-nu) for the resolvable levels and the fitted decay exponent."""
    alpha, d = fld.kernel.alpha, fld.grid.dim
    h = fld.grid.h
    x0 = (0.0,) * d if x0 is None else tuple(np.atleast_1d(x0))
    levels = []
    nu = 0
    while 3 * 6.0**-nu >= 4 * h and (nu_max is None or nu <= nu_max):
        levels.append(nu)
        nu += 1
    if len(levels) < 3:
        raise ValueError("fewer than 3 resolvable dyadic levels")
    osc, counts = [], []
    for nu in levels:
        nodes = box_nodes(fld, dhat_box(6.0**-nu, alpha, t0, x0))
        b = _block(fld.values, nodes)
        osc.append(float(np.max(b) - np.min(b)))
        counts.append(len(nodes.cols))
    levels = np.asarray(levels)
    osc = np.asarray(osc)
    sup_norm = float(np.max(np.abs(fld.values)))
    fit = np.flatnonzero((np.asarray(counts) >= min_nodes) & (osc > 0))
    if len(fit) < 2:
        return OscillationReport(levels, osc, math.inf, sup_norm, fit, 0.0)
    slope, icpt = np.polyfit(levels[fit] * math.log(6), np.log(osc[fit]), 1)
    return OscillationReport(levels, osc, float(-slope), sup_norm, fit, float(icpt))


# ---------------------------------------------------------------- Hoelder seminorm


@dataclass
class HolderReport:
    seminorm: float
    bound: float
    eta: float
    beta: float
    sup_norm: float

    @property
    def passed(self) -> bool:
        return self.seminorm <= self.bound


def holder_eta(fld: SolutionField, subcyl) -> float:
    """Largest r <= 1/2 with D_hat_r(t, x) inside the field domain for all (t, x) in subcyl."""
    box = as_box(subcyl)
    alpha = fld.kernel.alpha
    grid = fld.grid
    off = float(np.linalg.norm(np.subtract(box.center, grid.center)))
    time_room = (box.t0 - fld.times[0]) / 2
    space_room = (grid.omega - off - box.radius) / 3
    if time_room <= 0 or space_room <= 0:
        raise ValueError("subcylinder not compactly contained in the field domain")
    return min(0.5, time_room ** (1 / alpha), space_room)


def holder_seminorm(
    fld: SolutionField,
    subcyl,
    alpha: Optional[float] = None,
    beta: float = 0.15,
    max_points: int = 3000,
) -> HolderReport:
    """max |u(t,x) - u(s,y)| / (|x-y| + |t-s|^{1/alpha})^beta over nodes in subcyl, vs 12 ||u|| / eta^beta."""
    alpha = fld.kernel.alpha if alpha is None else alpha
    nodes = box_nodes(fld, subcyl, allow_empty=True)
    if nodes.count == 0:
        raise ValueError("empty subcylinder")
    rows = nodes.rows
    if len(rows) * len(nodes.cols) > max_points:
        stride = int(math.ceil(len(rows) * len(nodes.cols) / max_points))
        rows = rows[::stride]
    t = np.repeat(fld.times[rows], len(nodes.cols))
    x = np.tile(fld.grid.points[nodes.cols], (len(rows), 1))
    u = fld.values[np.ix_(rows, nodes.cols)].ravel()
    best = 0.0
    for i in range(len(u)):
        dx = np.sqrt(np.sum((x[i + 1 :] - x[i]) ** 2, axis=-1))
        dist = dx + np.abs(t[i + 1 :] - t[i]) ** (1 / alpha)
        ok = dist > 0
        if np.any(ok):
            best = max(best, float(np.max(np.abs(u[i + 1 :][ok] - u[i]) / dist[ok] ** beta)))
    eta = holder_eta(fld, subcyl)
    sup = float(np.max(np.abs(fld.values)))
    return HolderReport(best, 12 * sup / eta**beta, eta, beta, sup)
