from __future__ import annotations

import numpy as np
import pytest

from grassflow.fields import (
    Grid,
    MatrixField,
    cumulative_integral,
    cumulative_trapezoid,
    derivative,
    matrix_from_json,
    matrix_to_json,
    periodic_diff,
    quadrature,
    quadrature_values,
)

TWO_PI = 2.0 * np.pi


def _mode_field(grid: Grid, m: int) -> np.ndarray:
    return np.exp(1j * m * (TWO_PI / grid.length) * grid.x)[:, None, None]


def test_grid_nodes_and_spacing():
    g = Grid(8, 4.0)
    assert g.h == 0.5
    assert np.allclose(g.x, 0.5 * np.arange(8))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(3, 1.0)
    with pytest.raises(ValueError):
        Grid(8, 0.0)
    with pytest.raises(ValueError):
        Grid(8, np.inf)


def test_grid_json_roundtrip():
    g = Grid(16, 2.5)
    assert Grid.from_json_dict(g.to_json_dict()) == g


def test_first_derivative_symbol_is_exact_per_mode():
    # the stencil acts diagonally on single modes, with a known symbol
    grid = Grid(32, TWO_PI)
    h = grid.h
    for m in (1, 3, 7):
        f = _mode_field(grid, m)
        got = periodic_diff(f, 1, h)
        symbol = (8.0 * np.sin(m * h) - np.sin(2.0 * m * h)) / (6.0 * h)
        assert np.allclose(got, 1j * symbol * f, atol=1e-12)


def test_second_derivative_symbol_is_exact_per_mode():
    grid = Grid(32, TWO_PI)
    h = grid.h
    for m in (1, 4):
        f = _mode_field(grid, m)
        got = periodic_diff(f, 2, h)
        symbol = (30.0 - 32.0 * np.cos(m * h) + 2.0 * np.cos(2.0 * m * h)) / (12.0 * h**2)
        assert np.allclose(got, -symbol * f, atol=1e-11)


def test_derivatives_converge_at_fourth_order():
    errors = {}
    for npts in (32, 64):
        grid = Grid(npts, TWO_PI)
        f = np.sin(grid.x)[:, None, None]
        exact = {1: np.cos(grid.x), 2: -np.sin(grid.x), 3: -np.cos(grid.x), 4: np.sin(grid.x)}
        for order in (1, 2, 3, 4):
            err = np.max(np.abs(periodic_diff(f, order, grid.h)[:, 0, 0] - exact[order]))
            errors.setdefault(order, []).append(err)
    for order, (coarse, fine) in errors.items():
        rate = np.log2(coarse / fine)
        assert rate > 3.7, f"order {order} converged at rate {rate:.2f}"


def test_derivative_of_constant_is_zero():
    grid = Grid(16, TWO_PI)
    f = np.ones((16, 2, 2))
    for order in (1, 2, 3, 4):
        assert np.max(np.abs(periodic_diff(f, order, grid.h))) < 1e-13


def test_unknown_derivative_order_rejected():
    with pytest.raises(ValueError):
        periodic_diff(np.ones((16, 1, 1)), 5, 0.1)


def test_quadrature_is_exact_on_trigonometric_polynomials():
    grid = Grid(16, TWO_PI)
    f = (np.cos(grid.x) ** 2)[:, None, None]
    total = quadrature(MatrixField(grid, f.astype(complex)))
    assert total[0, 0] == pytest.approx(np.pi, rel=1e-14)
    assert quadrature_values(f, grid.h)[0, 0] == pytest.approx(np.pi, rel=1e-14)


def test_cumulative_trapezoid_starts_at_zero_and_accumulates():
    grid = Grid(64, TWO_PI)
    f = np.cos(grid.x)[:, None, None]
    c = cumulative_trapezoid(f, grid.h)
    assert c[0, 0, 0] == 0.0
    assert np.max(np.abs(c[:, 0, 0] - np.sin(grid.x))) < 2e-3


def test_cumulative_integral_of_derivative_loses_two_orders():
    # the running sum is only second order, so the composition is too
    errs = []
    for npts in (64, 128):
        grid = Grid(npts, TWO_PI)
        f = MatrixField(grid, np.sin(grid.x)[:, None, None].astype(complex))
        back = cumulative_integral(derivative(f, 1))
        target = np.sin(grid.x) - np.sin(grid.x)[0]
        errs.append(np.max(np.abs(back.values[:, 0, 0] - target)))
    rate = np.log2(errs[0] / errs[1])
    assert 1.6 < rate < 2.4


def test_matrix_field_validation():
    grid = Grid(8, 1.0)
    with pytest.raises(ValueError):
        MatrixField(grid, np.zeros((8, 2, 3)))
    with pytest.raises(ValueError):
        MatrixField(grid, np.zeros((7, 2, 2)))


def test_matrix_field_values_are_read_only():
    grid = Grid(8, 1.0)
    f = MatrixField(grid, np.zeros((8, 2, 2)))
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 1.0


def test_matrix_json_roundtrip():
    m = np.array([[1.0 + 2.0j, -0.5], [0.25j, 3.0]])
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)


def test_matrix_field_json_roundtrip():
    grid = Grid(8, 2.0)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal((8, 2, 2)) + 1j * rng.standard_normal((8, 2, 2))
    f = MatrixField(grid, vals)
    back = MatrixField.from_json_dict(f.to_json_dict())
    assert back.grid == grid
    assert np.array_equal(back.values, f.values)
