import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_parabolic import moser
from nonlocal_parabolic.benchmarks import KernelSpec, harnack_field
from nonlocal_parabolic.geometry import harnack_domains, q_minus
from nonlocal_parabolic.solver import SolutionField


@pytest.fixture(scope="module")
def hfield():
    return harnack_field(1.5, KernelSpec(), h=0.05)


def constant_field(hfield, c):
    return SolutionField(hfield.times, np.full_like(hfield.values, c), hfield.grid, hfield.kernel)


def test_frozen_constants():
    assert moser.a_shape(0.5, 1.0, 1.0, 1.0) == pytest.approx(16.0)
    assert moser.g1(0.5, 1.0, 1.0, 1) == pytest.approx(0.25)
    assert moser.omegas(1, 0.4)[0] == pytest.approx(12.0)
    assert moser.beta_formula(0.5) == pytest.approx(0.1606, abs=1e-4)
    assert moser.kappa(1.5, 1) == pytest.approx(1.5)


@given(st.floats(0.5, 0.95), st.floats(0.45, 1.99))
def test_radius_schedule_monotone(r, alpha):
    vals = [moser.radius_schedule(r, 1.0, alpha, m) for m in range(8)]
    assert vals[0] == pytest.approx(1.0)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > r


def test_moment_of_constant(hfield):
    c = 2.5
    fld = constant_field(hfield, c)
    cyl = q_minus(0.5, 1.5)
    for p in (1.0, 2.0, 0.5):
        m = moser.moment(fld, cyl, p)
        assert m.value == pytest.approx(c * cyl.measure ** (1 / p), rel=1e-12)
    assert moser.moment(fld, cyl, math.inf).value == pytest.approx(c)


def test_harnack_quotient_of_constant(hfield):
    fld = constant_field(hfield, 1.0)
    rep = moser.harnack_quotient(fld, 0.0)
    _, um = harnack_domains(1.5)
    assert rep.quotient == pytest.approx(um.measure, rel=1e-12)


def test_iterate_inf_step_ratio_identity(hfield):
    rep = moser.iterate_inf(hfield, 0.5, 1.0, 1.0, p_stop=8)
    k = moser.kappa(1.5, 1)
    for m, ratio in enumerate(rep.step_ratios):
        pm = rep.exponents[m]
        expected = rep.moments[m + 1] ** pm / rep.moments[m] ** pm
        assert ratio == pytest.approx(expected, rel=1e-9)
        assert rep.exponents[m + 1] == pytest.approx(k * pm)


def test_moment_step_constant_is_finite(hfield):
    g = moser.moment_step(hfield, 0.5, 1.0, 1.0, "minus")
    assert g.inputs["A_shape"] == pytest.approx(moser.a_shape(0.5, 1.0, 1.5, 1.0))
    assert 0 < g.constant < 1
    with pytest.raises(ValueError):
        moser.moment_step(hfield, 0.4, 1.0, 1.0)


def test_moment_step_plus_exponent_range(hfield):
    with pytest.raises(ValueError):
        moser.moment_step(hfield, 0.5, 1.0, 0.9, "plus")


def test_utilde_shift(hfield):
    u = moser.utilde(hfield, 0.0)
    assert np.min(u[:, hfield.grid.interior]) > 0


def test_log_sublevel_measures_decrease(hfield):
    rep = moser.log_sublevel(hfield)
    assert np.all(np.diff(rep.measure_plus) <= 0)
    assert np.isfinite(rep.C_required)


def test_bombieri_giusti_field(hfield):
    rep = moser.bombieri_giusti_field(hfield)
    assert np.isfinite(rep.w.C_emp) and np.isfinite(rep.w_hat.C_emp)
    assert rep.product > 0


def test_caccioppoli(hfield):
    g = moser.caccioppoli_check(hfield, 0.5, 1.0, 2.0)
    assert 0 < g.constant < 1
    with pytest.raises(ValueError):
        moser.caccioppoli_check(hfield, q=1.0)


def test_oscillation_needs_resolution():
    fld = harnack_field(1.5, KernelSpec(), h=0.2)
    with pytest.raises(ValueError):
        moser.oscillation_decay(fld)


def test_holder_eta_rejects_boundary_boxes(hfield):
    from nonlocal_parabolic.geometry import SpaceTimeBox

    with pytest.raises(ValueError):
        moser.holder_eta(hfield, SpaceTimeBox(-1.0, 0.0, (0.0,), 0.5))
