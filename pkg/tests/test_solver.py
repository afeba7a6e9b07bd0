import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_parabolic import Grid, make_fractional, residual_weak, solve, steklov
from nonlocal_parabolic.kernels import named_coefficient
from nonlocal_parabolic.solver import lp_norm, step_count, step_matrix, steklov_array


def small_grid():
    return Grid(1, 0.1, 1.0, 3.0)


def bump(x):
    return np.clip(1 - x**2, 0, None)


def interior_test_field(fld):
    g = fld.grid
    x = g.x()
    phi = np.zeros_like(fld.values)
    inside = g.interior_mask
    for n, t in enumerate(fld.times):
        phi[n, inside] = (1 + t) * np.cos(x[inside]) ** 2 * (1 - x[inside] ** 2)
    return phi


def test_constant_steady_state():
    g = small_grid()
    fld = solve(make_fractional(1, 1.5), g, initial=2.0, exterior=2.0, t_span=(0, 0.5), dt=0.05)
    assert np.max(np.abs(fld.values - 2.0)) < 1e-12


def test_theta_range():
    with pytest.raises(ValueError):
        solve(make_fractional(1, 1.0), small_grid(), theta=0.3)


def test_step_count_adjusts_dt():
    n, dt = step_count((0.0, 1.0), 0.3)
    assert n == 4 and dt == pytest.approx(0.25)


@pytest.mark.parametrize("theta", [0.5, 1.0])
def test_weak_residual_vanishes(theta):
    g = small_grid()
    k = make_fractional(1, 1.4, "simple")
    fld = solve(k, g, f=lambda t, x: np.sin(x) + t, initial=bump, exterior=0.0, t_span=(0, 0.4), dt=0.05, theta=theta)
    r = residual_weak(fld, interior_test_field(fld))
    assert abs(r) < 1e-12


def test_weak_residual_time_dependent_coefficient():
    g = small_grid()
    k = make_fractional(1, 1.2, "simple", coeff=named_coefficient("oscillating"))
    fld = solve(k, g, f=0.3, initial=bump, exterior=0.0, t_span=(0, 0.4), dt=0.05)
    assert abs(residual_weak(fld, interior_test_field(fld))) < 1e-12


def test_residual_sign_for_supersolution():
    # a solution with forcing f >= 0 is a supersolution of the unforced equation
    g = small_grid()
    fld = solve(make_fractional(1, 1.0), g, f=1.0, initial=bump, t_span=(0, 0.3), dt=0.05)
    phi = np.abs(interior_test_field(fld))
    assert residual_weak(fld, phi, f=0.0) > 0


def test_test_field_must_vanish_on_collar():
    g = small_grid()
    fld = solve(make_fractional(1, 1.0), g, initial=bump, t_span=(0, 0.1), dt=0.05)
    with pytest.raises(ValueError):
        residual_weak(fld, np.ones_like(fld.values))


def test_step_matrix_is_m_matrix():
    M = step_matrix(make_fractional(1, 1.7), small_grid(), 0.01)
    off = M - np.diag(np.diag(M))
    assert np.all(off <= 0)
    assert np.all(np.diag(M) + off.sum(axis=1) > 0)


@given(st.floats(-1, 1), st.floats(0.45, 1.99))
def test_comparison_principle(shift, alpha):
    g = small_grid()
    k = make_fractional(1, alpha)
    lo = solve(k, g, initial=bump, exterior=0.0, t_span=(0, 0.2), dt=0.05)
    hi = solve(k, g, initial=lambda x: bump(x) + abs(shift), exterior=abs(shift), t_span=(0, 0.2), dt=0.05)
    assert np.all(hi.values >= lo.values - 1e-12)


def test_mass_decreases_with_zero_exterior():
    g = small_grid()
    fld = solve(make_fractional(1, 1.5), g, initial=bump, exterior=0.0, t_span=(0, 1), dt=0.1)
    mass = fld.values[:, g.interior].sum(axis=1)
    assert np.all(np.diff(mass) < 0)
    assert np.all(fld.values >= -1e-14)


def test_to_csv_header(tmp_path):
    g = small_grid()
    fld = solve(make_fractional(1, 1.5), g, initial=bump, t_span=(0, 0.1), dt=0.05)
    text = fld.to_csv(tmp_path / "u.csv")
    assert text.startswith("# kernel kind=fractional alpha=1.5")
    assert "h=0.1; dt=0.05; theta=1" in text.splitlines()[0]
    assert len(text.splitlines()) == 2 + len(fld.times) * g.n


def test_steklov_linear():
    t = np.linspace(0, 1, 101)
    vals = t[:, None] * np.ones((1, 3))
    out = steklov_array(vals, 0.01, 0.1)
    assert np.allclose(out[:90], (t[:90] + 0.05)[:, None])
    assert np.all(out[91:] == 0)


def test_steklov_window_must_be_dt_multiple():
    with pytest.raises(ValueError):
        steklov_array(np.zeros((20, 2)), 0.1, 0.25)


@given(st.integers(1, 10), st.sampled_from([1.0, 2.0, np.inf]))
def test_steklov_contractive(m, p):
    rng = np.random.default_rng(m)
    v = rng.normal(size=(60, 4))
    vh = steklov_array(v, 0.1, 0.1 * m)
    n2 = 59 - m
    assert lp_norm(vh[:n2], 0.1, 1.0, p) <= lp_norm(v[: n2 + m + 1], 0.1, 1.0, p) * (1 + 1e-12)


def test_steklov_field():
    g = small_grid()
    fld = solve(make_fractional(1, 1.5), g, initial=bump, t_span=(0, 0.5), dt=0.05)
    s = steklov(fld, 0.1)
    assert s.meta["steklov"] == 0.1
    with pytest.raises(ValueError):
        steklov(fld, 1.0)
