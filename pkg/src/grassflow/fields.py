"""Periodic grid, matrix-valued fields, finite differences, quadrature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, L) with nodes x_j = j L / N."""

    num_points: int
    length: float

    def __post_init__(self):
        n, L = self.num_points, self.length
        if int(n) != n or n < 4:
            raise ValueError("num_points must be an integer >= 4")
        if not (np.isfinite(L) and L > 0):
            raise ValueError("length must be positive and finite")
        object.__setattr__(self, "num_points", int(n))
        object.__setattr__(self, "length", float(L))

    @property
    def h(self) -> float:
        return self.length / self.num_points

    @property
    def x(self) -> np.ndarray:
        return self.h * np.arange(self.num_points)

    def to_json_dict(self) -> dict:
        return {"N": self.num_points, "L": self.length}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Grid":
        return cls(int(d["N"]), float(d["L"]))


def matrix_to_json(m: np.ndarray) -> list:
    """Nested [re, im] pairs, row major."""
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def matrix_from_json(rows: list) -> np.ndarray:
    return np.array(
        [[complex(p[0], p[1]) for p in row] for row in rows], dtype=np.complex128
    )


@dataclass(frozen=True)
class MatrixField:
    """One square matrix per grid node, stored as a read-only (N, n, n) array."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True)
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise ValueError("values must have shape (N, n, n)")
        if v.shape[0] != self.grid.num_points:
            raise ValueError("leading axis must match the grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def matrix_dim(self) -> int:
        return self.values.shape[-1]

    def to_json_dict(self) -> dict:
        return {
            "grid": self.grid.to_json_dict(),
            "values": [matrix_to_json(m) for m in self.values],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "MatrixField":
        grid = Grid.from_json_dict(d["grid"])
        vals = np.array([matrix_from_json(m) for m in d["values"]], dtype=np.complex128)
        return cls(grid, vals)


# order -> (offsets, weights, denominator, power of h)
_STENCILS = {
    1: ((-2, -1, 1, 2), (1.0, -8.0, 8.0, -1.0), 12.0, 1),
    2: ((-2, -1, 0, 1, 2), (-1.0, 16.0, -30.0, 16.0, -1.0), 12.0, 2),
    3: ((-3, -2, -1, 1, 2, 3), (1.0, -8.0, 13.0, -13.0, 8.0, -1.0), 8.0, 3),
    4: ((-3, -2, -1, 0, 1, 2, 3), (-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0), 6.0, 4),
}


def periodic_diff(values: np.ndarray, order: int, h: float) -> np.ndarray:
    """Central fourth-order-accurate difference along axis 0 with wraparound.

    Works on any array whose leading axis is the grid axis.
    """
    if order not in _STENCILS:
        raise ValueError("derivative order must be 1, 2, 3 or 4")
    v = np.asarray(values)
    npts = v.shape[0]
    if order >= 3 and npts < 16:
        raise ValueError(f"need at least 16 points for an order-{order} derivative")
    if npts < 5:
        raise ValueError("need at least 5 points for differencing")
    offsets, weights, denom, power = _STENCILS[order]
    acc = np.zeros(v.shape, dtype=np.result_type(v.dtype, np.float64))
    for off, w in zip(offsets, weights):
        acc += w * np.roll(v, -off, axis=0)
    return acc / (denom * h ** power)


def cumulative_trapezoid(values: np.ndarray, h: float) -> np.ndarray:
    """Running trapezoid integral along axis 0, anchored to zero at the
    first node.  No wraparound: the last node does not connect back."""
    v = np.asarray(values)
    out = np.zeros(v.shape, dtype=np.result_type(v.dtype, np.float64))
    if v.shape[0] > 1:
        out[1:] = np.cumsum(0.5 * h * (v[:-1] + v[1:]), axis=0)
    return out


def derivative(f: MatrixField, order: int) -> MatrixField:
    """Spatial derivative of the given order (1 through 4)."""
    return MatrixField(f.grid, periodic_diff(f.values, order, f.grid.h))


def quadrature(f: MatrixField) -> np.ndarray:
    """Periodic quadrature h * sum over nodes; returns one matrix."""
    return f.grid.h * np.sum(f.values, axis=0)


def quadrature_values(values: np.ndarray, h: float):
    """h * sum along axis 0 for raw arrays (matrix or scalar samples)."""
    return h * np.sum(np.asarray(values), axis=0)


def cumulative_integral(f: MatrixField) -> MatrixField:
    """Running integral from the first node, trapezoid rule, no wraparound."""
    return MatrixField(f.grid, cumulative_trapezoid(f.values, f.grid.h))
