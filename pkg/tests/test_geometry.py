import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_parabolic.geometry import (
    SpaceTimeBox,
    ball_volume,
    dhat_box,
    growth_domains,
    harnack_domains,
    q_minus,
    q_plus,
    rho_hat,
)


def test_ball_volume():
    assert ball_volume(1, 2.0) == pytest.approx(4.0)
    assert ball_volume(2, 1.0) == pytest.approx(math.pi)


def test_box_measure_and_membership():
    b = SpaceTimeBox(0.0, 2.0, (0.0,), 1.0)
    assert b.measure == pytest.approx(4.0)
    assert bool(b.contains(1.0, 0.5))
    assert not bool(b.contains(2.0, 0.5))  # open in time
    assert not bool(b.contains(1.0, 1.0))  # open in space


def test_empty_box_rejected():
    with pytest.raises(ValueError):
        SpaceTimeBox(1.0, 1.0, (0.0,), 1.0)


@given(st.floats(0.1, 1.0), st.floats(0.45, 1.99))
def test_intrinsic_cylinders(r, alpha):
    qm, qp = q_minus(r, alpha).box, q_plus(r, alpha).box
    assert qm.t1 == pytest.approx(0.0) and qm.duration == pytest.approx(r**alpha)
    assert qp.t0 == pytest.approx(0.0) and qp.duration == pytest.approx(r**alpha)


def test_rho_hat_frozen():
    assert rho_hat(-1.0, 0.9, 1.5) == pytest.approx(0.5)


@given(st.floats(0.5, 1.99))
def test_harnack_domains_are_separated(alpha):
    up, um = harnack_domains(alpha)
    assert um.t1 < up.t0
    assert up.measure == pytest.approx(um.measure)


@given(st.floats(0.65, 1.99))
def test_growth_domains_nested(alpha):
    dm, dp, d1 = growth_domains(alpha)
    assert d1.contains_box(dm) and d1.contains_box(dp)
    assert dm.t1 < dp.t0
    # the next dyadic box fits in D+
    assert dp.contains_box(dhat_box(1 / 6, alpha))


def test_shifted_box():
    b = SpaceTimeBox(0.0, 1.0, (0.0,), 1.0).shifted(2.0, 0.5)
    assert (b.t0, b.t1, b.center) == (2.0, 3.0, (0.5,))
