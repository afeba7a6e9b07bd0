import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlocal_parabolic import Grid, apply_L, assemble, bilinear_form, build_grid, make_fractional
from nonlocal_parabolic.solver import ConstantDatum


def test_grid_node_count(grid1):
    assert grid1.n == 241
    assert len(grid1.interior) == 79
    assert grid1.x().shape == (241,)


def test_grid_budget_and_collar_checks():
    with pytest.raises(ValueError, match="node budget"):
        Grid(2, 0.001, 1.0, 3.0)
    with pytest.raises(ValueError):
        build_grid(1.0, 2.0, 0.1)


def test_weights_nonnegative_and_symmetric(grid1):
    op = assemble(make_fractional(1, 1.5, "simple"), grid1)
    assert np.all(op.weights >= 0)
    assert np.allclose(op.weights, op.weights.T)
    assert np.all(np.diag(op.weights) == 0)


@given(st.floats(0.45, 1.99), st.floats(-3, 3))
def test_constants_are_annihilated(alpha, c):
    g = Grid(1, 0.1, 1.0, 3.0)
    op = assemble(make_fractional(1, alpha), g)
    Lu = apply_L(op, np.full(g.n, c), exterior=ConstantDatum(c, 1))
    assert np.max(np.abs(Lu)) <= 1e-10 * (1 + abs(c)) * np.max(op.weights.sum(axis=1))


def test_missing_exterior_raises(grid1):
    op = assemble(make_fractional(1, 1.0), grid1)
    with pytest.raises(ValueError, match="exterior"):
        apply_L(op, np.zeros(grid1.n))


def test_bilinear_form_symmetric_positive(grid1, rng):
    op = assemble(make_fractional(1, 1.2, "simple"), grid1)
    u, v = rng.normal(size=(2, grid1.n))
    assert bilinear_form(op, u, v) == pytest.approx(bilinear_form(op, v, u), rel=1e-12)
    assert bilinear_form(op, u, u) > 0


def test_form_matches_operator(grid1, rng):
    # E(u, v) = -2 <L u, v> for v supported in the interior, far field included
    op = assemble(make_fractional(1, 1.3, "simple"), grid1)
    u = rng.normal(size=grid1.n)
    v = np.zeros(grid1.n)
    v[grid1.interior] = rng.normal(size=len(grid1.interior))
    zero = ConstantDatum(0.0, 1)
    far = op.far_values(zero)
    lhs = bilinear_form(op, u, v, far_u=far, far_v=np.zeros_like(far))
    rhs = -2 * grid1.cell_volume * float(apply_L(op, u, zero) @ v[grid1.interior])
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_operator_profile_closed_form():
    from nonlocal_parabolic.experiments import profile_closed_form

    alpha = 1.5
    k = make_fractional(1, alpha, "exact")
    g = Grid(1, 0.01, 2.0, 6.0)
    x = g.x()
    u = np.clip(1 - x**2, 0, None) ** (alpha / 2)
    Lu = apply_L(assemble(k, g), u, ConstantDatum(0.0, 1))
    xi = x[g.interior]
    sel = np.abs(xi) < 0.9
    assert np.max(np.abs(Lu[sel] / profile_closed_form(alpha, k) - 1)) < 0.03
