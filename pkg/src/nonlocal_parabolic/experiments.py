"""Acceptance experiments: one function per criterion, shared by the CLI and the test suite.

Each function returns a CriterionResult with per-alpha constant rows, scalar
summary metrics and optional text artifacts. Nothing here depends on wall-clock
time, so reports are reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, special

from . import moser
from .benchmarks import KernelSpec, growth_field, harnack_field, holder_field, scaling_case
from .discretization import Grid, apply_L, assemble
from .geometry import SpaceTimeBox
from .inequalities import poincare_ratio, random_probes, run_algebraic_suites, sobolev_ratio
from .kernels import (
    Kernel,
    check_K1,
    check_K2,
    check_K3,
    lambda_required,
    make_cone_kernel,
    make_fractional,
)
from .solver import steklov_array


@dataclass
class Row:
    alpha: Optional[float]
    op: str
    constant: str
    value: float


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    ops: tuple = ()
    detail: str = ""


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def spread(values) -> float:
    """max / min of positive values (inf if any is nonpositive or nonfinite)."""
    v = np.asarray(list(values), dtype=float)
    if v.size == 0 or np.any(~np.isfinite(v)) or np.any(v <= 0):
        return math.inf
    return float(np.max(v) / np.min(v))


# ---------------------------------------------------------------- 1 algebraic suites


def algebraic_suite(seed: int = 0, scale: float = 1.0) -> CriterionResult:
    reports = run_algebraic_suites(seed, scale)
    rows, arts, metrics = [], {}, {}
    for r in reports:
        rows += [Row(None, r.name, "worst_relative_gap", r.worst_relative), Row(None, r.name, "failures", r.failures)]
        rows.append(Row(None, r.name, "instances", r.n))
        metrics[f"{r.name}_worst_relative"] = r.worst_relative
        arts[f"suites/{r.name}_worst10.csv"] = r.worst_csv()
    ok = all(r.passed for r in reports)
    return CriterionResult(
        1, "algebraic suite", ok, metrics, rows, arts,
        ("convex_gap", "guelle_one", "guelle_two", "log_gap", "mean_value_gap"),
    )


# ---------------------------------------------------------------- 2 kernel membership


def kernel_certification(
    alphas=(0.5, 1.0, 1.5, 1.9, 1.99),
    lam: float = 10.0,
    alpha0: float = 0.4,
    cone_alphas=(1.0, 1.5),
    cone_lam: float = 100.0,
    aperture: float = 0.5,
    seed: int = 0,
    threads: int = 1,
) -> CriterionResult:
    def one(a):
        k = make_fractional(1, a, "exact", alpha0=alpha0, lam=lam)
        reps = [check_K1(k, 0.0, rho) for rho in (0.25, 0.5, 1.0, 1.5)]
        reps += [check_K2(k, seed=seed), check_K3(k)]
        return a, reps

    rows, ok, lam_req = [], True, {}
    for a, reps in _map(one, list(alphas), threads):
        for tag in ("K1", "K2", "K3"):
            sub = [r for r in reps if r.condition == tag]
            rows.append(Row(a, f"check_{tag}", "lhs_over_rhs", max(r.lhs / r.rhs for r in sub)))
            rows.append(Row(a, f"check_{tag}", "passed", float(all(r.passed for r in sub))))
        lam_req[a] = lambda_required(reps, lam)
        rows.append(Row(a, "lambda_required", "lambda", lam_req[a]))
        ok &= all(r.passed for r in reps)
    cone_ok = True
    for a in cone_alphas:
        k = make_cone_kernel(a, aperture=aperture, alpha0=alpha0, lam=cone_lam)
        reps = [check_K1(k, (0.0, 0.0), rho) for rho in (0.5, 1.0)] + [check_K2(k, seed=seed)]
        need = lambda_required(reps, cone_lam)
        rows.append(Row(a, "cone_lambda_required", "lambda", need))
        rows.append(Row(a, "cone_membership", "passed", float(all(r.passed for r in reps))))
        cone_ok &= all(r.passed for r in reps) and math.isfinite(need)
    metrics = {"lambda_required_max": max(lam_req.values()), "lambda": lam, "cone_passed": float(cone_ok)}
    return CriterionResult(2, "kernel certification", ok and cone_ok, metrics, rows, ops=("check_K1", "check_K2", "check_K3"))


# ---------------------------------------------------------------- 3 operator consistency


def profile_closed_form(alpha: float, kernel: Kernel) -> float:
    """L applied to (1 - x^2)_+^{alpha/2} inside B_1 (d = 1): a negative constant."""
    c_exact = special.gamma(1 + alpha / 2) * special.gamma((1 + alpha) / 2) / special.gamma(0.5) * 2**alpha
    from .kernels import fractional_constant

    return -c_exact * kernel.prefactor / fractional_constant(1, alpha)


def profile_quadrature(alpha: float, kernel: Kernel, x: float) -> float:
    """Adaptive quadrature of int_0^inf [u(x+z) + u(x-z) - 2u(x)] k(z) dz for u = (1 - x^2)_+^{alpha/2}.

    Near z = 0 the second difference is replaced by its Taylor term u''(x) z^2 to
    avoid cancellation; breakpoints sit at the kinks |x +- z| = 1.
    """
    b = alpha / 2

    def u(y):
        return max(1.0 - y * y, 0.0) ** b

    c = kernel.prefactor
    ux = u(x)
    s = 1.0 - x * x
    u2 = -2 * b * s ** (b - 1) + 4 * b * (b - 1) * x * x * s ** (b - 2)
    z0 = 1e-4 * (1 - abs(x))

    def integrand(z):
        return (u(x + z) + u(x - z) - 2 * ux) * c * z ** (-1 - alpha)

    total = u2 * c * z0 ** (2 - alpha) / (2 - alpha)
    edges = [z0, 1 - abs(x), 1 + abs(x)]
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, lo, hi, limit=400, epsabs=1e-10, epsrel=1e-9)
        total += val
    total += -2 * ux * c * edges[-1] ** (-alpha) / alpha
    return total


def operator_consistency(
    alphas=(1.0, 1.5, 1.9), hs=(0.02, 0.01), radius: float = 0.9, tol: float = 0.03, min_rate: float = 1.0
) -> CriterionResult:
    rows, ok, worst, rates = [], True, 0.0, []
    for a in alphas:
        k = make_fractional(1, a, "exact")
        errs = []
        for h in hs:
            g = Grid(1, h, 2.0, 6.0)
            op = assemble(k, g)
            x = g.x()
            u = np.clip(1 - x**2, 0.0, None) ** (a / 2)
            Lu = apply_L(op, u, exterior=lambda t, y: np.zeros_like(y))
            xi = x[g.interior]
            sel = np.abs(xi) < radius * (1 - 1e-12)
            ref = np.array([profile_quadrature(a, k, float(v)) for v in xi[sel]])
            errs.append(float(np.max(np.abs(Lu[sel] - ref) / np.abs(ref))))
        rate = float(np.log(errs[0] / errs[-1]) / np.log(hs[0] / hs[-1]))
        for h, e in zip(hs, errs):
            rows.append(Row(a, "apply_L", f"rel_error_h{h:g}", e))
        rows.append(Row(a, "apply_L", "rate", rate))
        worst = max(worst, errs[-1])
        rates.append(rate)
        ok &= errs[-1] <= tol and rate >= min_rate
    return CriterionResult(3, "operator consistency", ok, {"worst_error": worst, "min_rate": min(rates)}, rows, ops=("apply_L",))


# ---------------------------------------------------------------- 4 Steklov averages


def steklov_suite(seed: int = 0, n_fields: int = 100, tol: float = 1e-12, min_slope: float = 0.9) -> CriterionResult:
    rng = np.random.default_rng([seed, 4])
    worst = {1.0: 0.0, 2.0: 0.0, math.inf: 0.0}
    for _ in range(n_fields):
        nt, nx = int(rng.integers(40, 120)), int(rng.integers(5, 30))
        v = rng.normal(size=(nt, nx)) * rng.uniform(0.1, 10)
        m = int(rng.integers(1, nt // 4))
        dt = float(rng.uniform(0.001, 0.1))
        vh = steklov_array(v, dt, m * dt)
        n1 = int(rng.integers(0, nt // 4))
        n2 = int(rng.integers(n1 + 1, nt - m))
        for p in worst:
            a = _lp(vh[n1:n2], p)
            b = _lp(v[n1 : n2 + m + 1], p)
            worst[p] = max(worst[p], a / b - 1.0 if b > 0 else 0.0)
    # convergence for a smooth field
    T, dt = 2.0, 1e-3
    t = np.arange(int(round(T / dt)) + 1) * dt
    x = np.linspace(-1, 1, 21)
    v = np.sin(3 * t)[:, None] * np.cos(x)[None, :] + t[:, None] ** 2
    keep = t <= T - 0.1 + 1e-12
    errs = {}
    windows = (0.1, 0.05, 0.025)
    for p in (1.0, 2.0, math.inf):
        e = []
        for hw in windows:
            vh = steklov_array(v, dt, hw)
            e.append(_lp(vh[keep] - v[keep], p))
        errs[p] = e
    slopes = {p: float(np.polyfit(np.log(windows), np.log(e), 1)[0]) for p, e in errs.items()}
    rows = [Row(None, "steklov", f"contractivity_excess_p{_pname(p)}", w) for p, w in worst.items()]
    rows += [Row(None, "steklov", f"convergence_slope_p{_pname(p)}", s) for p, s in slopes.items()]
    ok = all(w <= tol for w in worst.values()) and all(s >= min_slope for s in slopes.values())
    metrics = {"max_contractivity_excess": max(worst.values()), "min_slope": min(slopes.values())}
    return CriterionResult(4, "Steklov averages", ok, metrics, rows, ops=("steklov",))


def _lp(v, p):
    a = np.abs(np.asarray(v))
    if np.isinf(p):
        return float(np.max(a)) if a.size else 0.0
    return float(np.sum(a**p) ** (1 / p))


def _pname(p):
    return "inf" if np.isinf(p) else f"{p:g}"


# ---------------------------------------------------------------- 5 functional inequalities


def functional_inequalities(
    alphas=(0.5, 1.0, 1.5, 1.9, 1.99),
    h: float = 0.05,
    n_probes: int = 100,
    seed: int = 0,
    R: float = 1.0,
    uniformity: float = 10.0,
    threads: int = 1,
) -> CriterionResult:
    grid = Grid(1, h, 2.0, 6.0)

    def one(a):
        k = make_fractional(1, a, "simple")
        from .discretization import Assembler

        asm = Assembler(k, grid)
        rng = np.random.default_rng([seed, 5])
        c2 = max(poincare_ratio(k, grid, v, assembler=asm).constant for v in random_probes(grid, n_probes, rng))
        rng = np.random.default_rng([seed, 55])
        probes = random_probes(grid, n_probes, rng, radius=R, support=R)
        S = max(sobolev_ratio(grid, v, a, R).constant for v in probes)
        return a, c2, S

    res = _map(one, list(alphas), threads)
    rows = []
    for a, c2, S in res:
        rows += [Row(a, "poincare_ratio", "c2_required", c2), Row(a, "sobolev_ratio", "S_required", S)]
    sp_c2 = spread(c2 for _, c2, _ in res)
    sp_S = spread(S for _, _, S in res)
    ok = sp_c2 <= uniformity and sp_S <= uniformity
    return CriterionResult(
        5, "functional inequalities", ok, {"c2_spread": sp_c2, "S_spread": sp_S}, rows,
        ops=("poincare_ratio", "sobolev_ratio"),
    )


# ---------------------------------------------------------------- 6 weak Harnack


HARNACK_CONSTANTS = (
    ("harnack_quotient", "quotient"),
    ("moment_step_minus", "A_emp_over_shape"),
    ("moment_step_plus", "A_emp_over_shape"),
    ("iterate_inf", "C_emp"),
    ("iterate_L1", "C_emp"),
    ("log_sublevel", "C_required"),
    ("bombieri_giusti_w", "C_emp"),
    ("bombieri_giusti_w_hat", "C_emp"),
    ("bombieri_giusti", "c0_required"),
    ("caccioppoli_check", "c_emp"),
)


def harnack_constants(fld) -> dict:
    hq = moser.harnack_quotient(fld, 0.0)
    bg = moser.bombieri_giusti_field(fld)
    return {
        ("harnack_quotient", "quotient"): hq.quotient,
        ("moment_step_minus", "A_emp_over_shape"): moser.moment_step(fld, 0.5, 1.0, 1.0, "minus").constant,
        ("moment_step_plus", "A_emp_over_shape"): moser.moment_step(fld, 0.5, 1.0, 0.5, "plus").constant,
        ("iterate_inf", "C_emp"): moser.iterate_inf(fld, 0.5, 1.0, 1.0).constant,
        ("iterate_L1", "C_emp"): moser.iterate_L1(fld, 0.5, 1.0, 0.25).constant,
        ("log_sublevel", "C_required"): moser.log_sublevel(fld).C_required,
        ("bombieri_giusti_w", "C_emp"): bg.w.C_emp,
        ("bombieri_giusti_w_hat", "C_emp"): bg.w_hat.C_emp,
        ("bombieri_giusti", "c0_required"): max(bg.w.c0_required, bg.w_hat.c0_required),
        ("caccioppoli_check", "c_emp"): moser.caccioppoli_check(fld, 0.5, 1.0, 2.0).constant,
        ("harnack_quotient", "sanity_ratio"): hq.quotient / hq.sanity_bound if hq.sanity_bound > 0 else math.inf,
    }


def weak_harnack(
    alphas=(1.5, 1.9, 1.99),
    spec: KernelSpec = KernelSpec(),
    h: float = 0.05,
    dt: Optional[float] = None,
    uniformity: float = 10.0,
    threads: int = 1,
    shifts=(0.0, 0.1),
    theta: float = 1.0,
) -> CriterionResult:
    def one(a):
        out = {}
        for s in shifts:
            fld = harnack_field(a, spec, h, dt, theta, shift=s)
            out[s] = harnack_constants(fld)
        return a, out

    res = _map(one, list(alphas), threads)
    rows, metrics, ok = [], {}, True
    for a, out in res:
        for s, consts in out.items():
            tag = "" if s == 0 else f"_shift{s:g}"
            for (op, name), v in consts.items():
                rows.append(Row(a, op + tag, name, v))
    for op, name in HARNACK_CONSTANTS:
        vals = [out[0.0][(op, name)] for _, out in res]
        sp = spread(vals)
        metrics[f"{op}.{name}_spread"] = sp
        ok &= sp <= uniformity
    for a, out in res:
        if len(shifts) > 1:
            q0 = out[shifts[0]][("harnack_quotient", "quotient")]
            q1 = out[shifts[1]][("harnack_quotient", "quotient")]
            rows.append(Row(a, "harnack_quotient", "shift_relative_change", abs(q1 - q0) / q0))
    return CriterionResult(
        6, "weak Harnack robustness", ok, metrics, rows,
        ops=tuple(sorted({op for op, _ in HARNACK_CONSTANTS})),
    )


# ---------------------------------------------------------------- 7 Hoelder / oscillation


def holder_robustness(
    alphas=(1.5, 1.9, 1.99),
    spec: KernelSpec = KernelSpec(),
    h: float = 0.02,
    dt: Optional[float] = None,
    beta0: float = 0.15,
    fit_tol: float = 0.2,
    threads: int = 1,
    theta: float = 1.0,
) -> CriterionResult:
    sub = SpaceTimeBox(-0.5, 0.0, (0.0,) * spec.dim, 0.5)

    def one(a):
        fld = holder_field(a, spec, h, dt, theta=theta)
        osc = moser.oscillation_decay(fld)
        beta = min(osc.beta_fit, beta0)
        hs = moser.holder_seminorm(fld, sub, beta=beta)
        return a, osc, hs

    rows, ok = [], True
    betas = []
    for a, osc, hs in _map(one, list(alphas), threads):
        resid = osc.fit_residuals()
        within = bool(np.all(osc.osc <= osc.bound(1.0 + fit_tol)))
        for nu, o in zip(osc.levels, osc.osc):
            rows.append(Row(a, "oscillation_decay", f"osc_level{nu}", o))
        rows += [
            Row(a, "oscillation_decay", "beta_fit", osc.beta_fit),
            Row(a, "oscillation_decay", "max_fit_residual", float(np.max(np.abs(resid))) if resid.size else 0.0),
            Row(a, "oscillation_decay", "sup_norm", osc.sup_norm),
            Row(a, "holder_seminorm", "seminorm", hs.seminorm),
            Row(a, "holder_seminorm", "bound", hs.bound),
            Row(a, "holder_seminorm", "eta", hs.eta),
        ]
        betas.append(osc.beta_fit)
        ok &= (
            osc.beta_fit > 0
            and osc.monotone
            and within
            and (resid.size == 0 or np.max(np.abs(resid)) <= fit_tol)
            and hs.passed
        )
    return CriterionResult(
        7, "Hoelder robustness", ok, {"beta_fit_min": min(betas), "beta_fit_spread": spread(betas)}, rows,
        ops=("oscillation_decay", "holder_seminorm"),
    )


# ---------------------------------------------------------------- 8 growth lemma


def growth_lemma(
    alphas=(1.5, 1.9, 1.99),
    spec: KernelSpec = KernelSpec(),
    h: float = 0.05,
    dt: Optional[float] = None,
    eps0: float = 0.05,
    sigma: float = 0.5,
    uniformity: float = 10.0,
    certify: int = 5,
    seed: int = 0,
    threads: int = 1,
    theta: float = 1.0,
) -> CriterionResult:
    def one(a):
        fld = growth_field(a, spec, h, dt, eps0, theta=theta)
        return a, moser.growth_check(fld, sigma, eps0, certify=certify, seed=seed)

    rows, ok, deltas = [], True, []
    for a, rep in _map(one, list(alphas), threads):
        rows += [
            Row(a, "growth_check", "delta_measured", rep.delta_measured),
            Row(a, "growth_check", "density", rep.density),
            Row(a, "growth_check", "residual_min", rep.residual_min if rep.residual_min is not None else math.nan),
        ]
        deltas.append(rep.delta_measured)
        ok &= rep.applicable and rep.delta_measured > 0
    sp = spread(deltas)
    ok &= sp <= uniformity
    return CriterionResult(8, "growth lemma", ok, {"delta_min": min(deltas), "delta_spread": sp}, rows, ops=("growth_check",))


# ---------------------------------------------------------------- 9 scaling


def scaling_check(alpha: float = 1.5, r: float = 0.5, xi: float = 0.3, tau: float = 0.7, tol: float = 0.05) -> CriterionResult:
    case = scaling_case(alpha, r, xi, tau)
    q_frame = moser.harnack_quotient(case.original, frame=(r, xi, tau)).quotient
    q_pull = moser.harnack_quotient(case.pulled_back).quotient
    q_std = moser.harnack_quotient(case.standard).quotient
    dev = max(abs(q_frame - q_std), abs(q_pull - q_std)) / q_std
    rows = [
        Row(alpha, "harnack_quotient", "rescaled_frame", q_frame),
        Row(alpha, "harnack_quotient", "pulled_back", q_pull),
        Row(alpha, "harnack_quotient", "standard", q_std),
        Row(alpha, "scale_problem", "relative_deviation", dev),
    ]
    return CriterionResult(9, "scaling covariance", dev <= tol, {"relative_deviation": dev}, rows, ops=("scale_problem", "harnack_quotient"))
