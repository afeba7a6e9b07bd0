import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_parabolic.kernels import (
    Kernel,
    SingularityError,
    check_K1,
    check_K2,
    check_K3,
    eval_k,
    fractional_constant,
    lambda_required,
    make_cone_kernel,
    make_fractional,
    named_coefficient,
)

alphas = st.floats(0.45, 1.99)


def test_simple_normalization_value():
    k = make_fractional(1, 1.0, "simple")
    assert eval_k(k, 0.0, 0.0, 2.0) == pytest.approx(0.25, rel=1e-14)


def test_exact_constant_alpha_one_d1():
    # C(1, 1) = 1 / pi
    assert fractional_constant(1, 1.0) == pytest.approx(1 / math.pi, rel=1e-13)


@given(alphas, st.floats(0.1, 3.0), st.floats(-2, 2))
def test_kernel_symmetric_and_homogeneous(alpha, r, x):
    k = make_fractional(1, alpha, "simple")
    y = x + r
    assert eval_k(k, 0.0, x, y) == pytest.approx(eval_k(k, 0.0, y, x), rel=1e-14)
    # k(lambda z) = lambda^(-d-alpha) k(z)
    assert eval_k(k, 0.0, 0.0, 2 * r) == pytest.approx(2 ** (-1 - alpha) * eval_k(k, 0.0, 0.0, r), rel=1e-12)


def test_diagonal_raises():
    with pytest.raises(SingularityError):
        eval_k(make_fractional(1, 1.0), 0.0, 0.3, 0.3)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        Kernel(0.3, alpha0=0.4)
    with pytest.raises(ValueError):
        Kernel(1.0, lam=0.5)
    with pytest.raises(ValueError):
        make_cone_kernel(1.0, aperture=1.5)


def test_K1_frozen_value():
    k = make_fractional(1, 1.0, "simple", lam=4.0)
    rep = check_K1(k, 0.0, 1.0)
    assert rep.lhs == pytest.approx(4.0, rel=1e-12)
    assert rep.passed


def test_K3_frozen_value():
    k = make_fractional(1, 1.0, "simple", lam=4.0)
    rep = check_K3(k, points=[0.0])
    assert rep.lhs == pytest.approx(1.16984, abs=5e-5)
    assert rep.passed


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 1.9, 1.99])
def test_fractional_membership_exact(alpha):
    k = make_fractional(1, alpha, "exact", alpha0=0.4, lam=10.0)
    reps = [check_K1(k, 0.0, rho) for rho in (0.5, 1.0)] + [check_K2(k), check_K3(k)]
    assert all(r.passed for r in reps)
    assert lambda_required(reps, 10.0) <= 10.0


def test_K1_radius_range():
    with pytest.raises(ValueError):
        check_K1(make_fractional(1, 1.0), 0.0, 4.0)


def test_lambda_required_scales_linearly():
    k = make_fractional(1, 1.0, "exact", lam=10.0)
    reps = [check_K1(k, 0.0, 1.0)]
    assert lambda_required(reps, 20.0) == pytest.approx(2 * lambda_required(reps, 10.0))


def test_cone_kernel_vanishes_off_cone():
    k = make_cone_kernel(1.0, axis=(1.0, 0.0), aperture=0.5)
    assert float(eval_k(k, 0.0, (0.0, 0.0), (0.0, 1.0))) == 0.0
    assert float(eval_k(k, 0.0, (0.0, 0.0), (1.0, 0.0))) > 0.0


def test_oscillating_coefficient_bounds():
    c = named_coefficient("oscillating")
    k = make_fractional(1, 1.0, "simple", coeff=c)
    t = np.linspace(-1, 1, 7)
    base = eval_k(make_fractional(1, 1.0, "simple"), 0.0, 0.0, 0.5)
    for tt in t:
        v = eval_k(k, tt, 0.0, 0.5)
        assert 0 < v / base < 10
