"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import filecmp
import time
from pathlib import Path

import pytest

from nonlocal_parabolic import experiments as E
from nonlocal_parabolic.benchmarks import KernelSpec

SWEEP = (0.5, 1.0, 1.5, 1.9, 1.99)
HIGH = (1.5, 1.9, 1.99)
ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def emit(capsys):
    def _emit(line):
        # bypass output capture so the line lands in plain `pytest -v` logs
        with capsys.disabled():
            print("\n" + line)

    return _emit


def report(emit, res, seconds, limit):
    ok = res.passed and seconds < limit
    metrics = " ".join(f"{k}={v:.4g}" for k, v in sorted(res.metrics.items()))
    emit(f"[{'PASS' if ok else 'FAIL'}] criterion {res.cid} {res.name}: {metrics} ({seconds:.1f}s < {limit}s)")
    return ok


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    res = fn(*args, **kw)
    return res, time.perf_counter() - t0


def test_criterion_1_algebraic_suite(emit):
    res, s = timed(E.algebraic_suite, seed=0)
    counts = {r.op: r.value for r in res.rows if r.constant == "instances"}
    assert counts == {"convex_gap": 10**6, "guelle_one": 10**6, "guelle_two": 10**6, "log_gap": 10**6, "mean_value_gap": 10**5}
    assert all(v >= -1e-12 for v in res.metrics.values())
    assert report(emit, res, s, 60)


def test_criterion_2_kernel_certification(emit):
    res, s = timed(E.kernel_certification, SWEEP, lam=10.0, alpha0=0.4, cone_alphas=(1.0, 1.5), cone_lam=100.0, aperture=0.5)
    assert res.metrics["lambda_required_max"] <= 10.0
    assert report(emit, res, s, 300)


def test_criterion_3_operator_consistency(emit):
    res, s = timed(E.operator_consistency, (1.0, 1.5, 1.9), hs=(0.02, 0.01), radius=0.9, tol=0.03, min_rate=1.0)
    assert res.metrics["worst_error"] <= 0.03 and res.metrics["min_rate"] >= 1.0
    assert report(emit, res, s, 600)


def test_criterion_4_steklov(emit):
    res, s = timed(E.steklov_suite, seed=0, n_fields=100, tol=1e-12, min_slope=0.9)
    assert report(emit, res, s, 600)


def test_criterion_5_functional_inequalities(emit):
    res, s = timed(E.functional_inequalities, SWEEP, h=0.05, n_probes=100, uniformity=10.0)
    assert res.metrics["c2_spread"] <= 10 and res.metrics["S_spread"] <= 10
    assert report(emit, res, s, 600)


def test_criterion_6_weak_harnack(emit):
    res, s = timed(E.weak_harnack, HIGH, KernelSpec(), h=0.05, dt=None, uniformity=10.0)
    finite = all(abs(r.value) < float("inf") for r in res.rows)
    assert finite
    assert all(v <= 10 for v in res.metrics.values())
    assert report(emit, res, s, 1200)


def test_criterion_7_holder(emit):
    res, s = timed(E.holder_robustness, HIGH, KernelSpec(), h=0.02, beta0=0.15, fit_tol=0.2)
    assert res.metrics["beta_fit_min"] > 0
    assert report(emit, res, s, 1200)


def test_criterion_8_growth(emit):
    res, s = timed(E.growth_lemma, HIGH, KernelSpec(), h=0.05, eps0=0.05, uniformity=10.0, certify=5)
    assert res.metrics["delta_min"] > 0 and res.metrics["delta_spread"] <= 10
    assert report(emit, res, s, 1200)


def test_criterion_9_scaling(emit):
    res, s = timed(E.scaling_check, 1.5, r=0.5, xi=0.3, tau=0.7, tol=0.05)
    assert res.metrics["relative_deviation"] <= 0.05
    assert report(emit, res, s, 600)


def test_criterion_10_determinism(tmp_path, emit):
    from nonlocal_parabolic.cli import main

    cfg = ROOT / "scripts" / "full.toml"
    t0 = time.perf_counter()
    codes = [main(["run", str(cfg), "--out", str(tmp_path / name)]) for name in ("a", "b")]
    s = time.perf_counter() - t0
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    names = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    manifest_a = (tmp_path / "a" / "manifest.json").read_text().replace(str(tmp_path / "a"), "OUT")
    manifest_b = (tmp_path / "b" / "manifest.json").read_text().replace(str(tmp_path / "b"), "OUT")
    same = all(
        (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
        for n in names
        if n.name != "manifest.json"
    ) and manifest_a == manifest_b and not cmp.left_only and not cmp.right_only
    ok = same and codes == [0, 0]
    emit(f"[{'PASS' if ok else 'FAIL'}] criterion 10 determinism: {len(names)} files byte-identical={same} exit={codes} ({s:.1f}s)")
    assert ok
