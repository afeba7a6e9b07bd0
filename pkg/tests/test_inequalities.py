import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_parabolic import Grid, make_fractional
from nonlocal_parabolic.inequalities import (
    convex_gap,
    guelle_one,
    guelle_two,
    log_form_bound,
    log_gap,
    mean_value_gap,
    mean_value_gap_cubic,
    poincare_ratio,
    random_probes,
    run_suite,
    sobolev_ratio,
    vartheta,
    zeta,
)

pos = st.floats(1e-3, 1e3)
frac = st.floats(0.0, 1.0)


def test_frozen_values():
    r = convex_gap(1.0, 2.0, 2.0)
    assert r.lhs == pytest.approx(0.75)
    assert r.rhs == pytest.approx(0.68629, abs=1e-5)
    assert log_gap(math.e, 1.0).gap == pytest.approx(0.086161, abs=1e-6)
    assert vartheta(2.0) == 4.0 and vartheta(3.0) == 6.5
    z, z1, z2 = zeta(0.5)
    assert (z, z1, z2) == pytest.approx((4.0, 2 / 3, 22.0))


@given(pos, pos, st.floats(0.05, 5).filter(lambda q: abs(q - 1) > 1e-3))
def test_convex_gap(a, b, q):
    assert convex_gap(a, b, q).holds


@given(pos, pos, st.floats(1.01, 8), frac, frac)
def test_guelle_one(a, b, q, t1, t2):
    assert guelle_one(a, b, q, t1, t2).holds


@given(pos, pos, st.floats(0.01, 0.99), frac, frac)
def test_guelle_two(a, b, q, t1, t2):
    assert guelle_two(a, b, q, t1, t2).holds


@given(pos, pos)
def test_log_gap(a, b):
    assert log_gap(a, b).holds


def test_log_gap_equality_on_diagonal():
    assert log_gap(2.0, 2.0).gap == 0.0


def test_guelle_zero_weights():
    assert guelle_one(1.0, 3.0, 2.0, 0.0, 0.0).lhs == 0.0


def test_positive_inputs_required():
    with pytest.raises(ValueError):
        log_gap(-1.0, 1.0)
    with pytest.raises(ValueError):
        guelle_two(1.0, 1.0, 1.5, 0.5, 0.5)


@given(st.lists(st.floats(-2, 2), min_size=8, max_size=8), st.floats(0.1, 2.0))
def test_mean_value_cubic_matches_partition(coef, width):
    fc, gc = np.array(coef[:4]), np.array(coef[4:])
    a, b = 0.0, width
    exact = mean_value_gap_cubic(fc[None], gc[None], np.array([a]), np.array([b]))
    t = np.linspace(a, b, 20001)
    fp = np.polyval(np.polyder(fc[::-1]), t)
    gp = np.polyval(np.polyder(gc[::-1]), t)
    part = mean_value_gap(fp, gp, *(np.polyval(c[::-1], v) for c in (fc,) for v in (a, b)),
                          *(np.polyval(gc[::-1], v) for v in (a, b)), a, b)
    assert float(np.asarray(exact.lhs).ravel()[0]) >= float(part.lhs) - 1e-6
    assert exact.holds


def test_suite_runs_small():
    rep = run_suite("guelle_two", 20_000, seed=3)
    assert rep.passed and rep.n == 20_000
    lines = rep.worst_csv().splitlines()
    assert len(lines) == 11 and "relative" in lines[0]


def test_log_form_bound_random(grid1, rng):
    k = make_fractional(1, 1.5, "simple")
    x = grid1.x()
    psi = np.where(grid1.interior_mask, np.clip(1 - x**2, 0, None), 0.0)
    for _ in range(10):
        w = np.exp(rng.normal(size=grid1.n) * 0.5)
        assert log_form_bound(k, grid1, w, psi).holds


def test_sobolev_requires_support(grid1):
    v = np.ones(grid1.n)
    with pytest.raises(ValueError):
        sobolev_ratio(grid1, v, 1.0)
    with pytest.raises(ValueError):
        sobolev_ratio(grid1, v, 1.0, R=3.0)


@pytest.mark.parametrize("alpha", [0.5, 1.99])
def test_poincare_sobolev_bounded(grid1, alpha):
    k = make_fractional(1, alpha, "simple")
    rng = np.random.default_rng(0)
    c2 = max(poincare_ratio(k, grid1, v).constant for v in random_probes(grid1, 20, rng))
    S = max(sobolev_ratio(grid1, v, alpha).constant for v in random_probes(grid1, 20, rng, radius=1.0, support=1.0))
    assert 0 < c2 < 1 and 0 < S < 2


def test_poincare_constant_is_zero_for_constants(grid1):
    k = make_fractional(1, 1.0, "simple")
    assert poincare_ratio(k, grid1, np.full(grid1.n, 3.0)).constant == 0.0
