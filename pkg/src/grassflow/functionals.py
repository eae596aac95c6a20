"""Energy functionals on orbit fields, their gradients, and check tooling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraSpec, Family, bracket, exp_map, inner, trace_product
from .fields import MatrixField, periodic_diff
from .orbit import OrbitState


@dataclass(frozen=True)
class FlowParams:
    """Coefficients weighting the three levels of the hierarchy."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, float(v))

    def to_json_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}

    @classmethod
    def from_json_dict(cls, d: dict) -> "FlowParams":
        return cls(float(d["alpha"]), float(d["beta"]), float(d["gamma"]))


@dataclass(frozen=True)
class EnergyReport:
    """All functional values for one state, plus the weighted total."""

    E: float
    E21: float
    E22: float
    E23: float
    E2: float
    Etilde: float
    H: float

    def to_json_dict(self) -> dict:
        return {
            "E": self.E,
            "E21": self.E21,
            "E22": self.E22,
            "E23": self.E23,
            "E2": self.E2,
            "Etilde": self.Etilde,
            "H": self.H,
        }


FUNCTIONAL_NAMES = ("E", "E21", "E22", "E23", "Etilde")


def _total(h: float, dens: np.ndarray) -> float:
    return float(h * np.sum(dens))


def energy(os: OrbitState) -> float:
    """Half the integrated pairing of the first derivative with itself."""
    h = os.phi.grid.h
    phix = periodic_diff(os.phi.values, 1, h)
    return 0.5 * _total(h, inner(os.spec, phix, phix))


def energy_report(os: OrbitState, p: FlowParams) -> EnergyReport:
    spec = os.spec
    h = os.phi.grid.h
    phi = os.phi.values
    phix = periodic_diff(phi, 1, h)
    phixx = periodic_diff(phi, 2, h)
    phiinv = np.linalg.inv(phi)
    chain = phix @ phiinv @ phix
    e = 0.5 * _total(h, inner(spec, phix, phix))
    e21 = 0.5 * _total(h, inner(spec, phixx, phixx))
    e22 = _total(h, inner(spec, phixx, chain))
    e23 = 0.5 * _total(h, inner(spec, chain, chain))
    e2 = e21 - e22 + e23
    r = phix @ phiinv
    r2 = r @ r
    quart = np.real(trace_product(r2, r2))
    sign = -1.0 if spec.family is Family.NONCOMPACT_UNITARY else 1.0
    etilde = 0.25 * sign * _total(h, quart)
    ham = p.alpha * e + p.beta * e2 + p.gamma * etilde
    return EnergyReport(e, e21, e22, e23, e2, etilde, ham)


def tension(os: OrbitState) -> MatrixField:
    """Gradient of the base energy: -(phi_xx - phi_x phi^-1 phi_x)."""
    h = os.phi.grid.h
    phi = os.phi.values
    phix = periodic_diff(phi, 1, h)
    phixx = periodic_diff(phi, 2, h)
    phiinv = np.linalg.inv(phi)
    return MatrixField(os.phi.grid, -(phixx - phix @ phiinv @ phix))


def functional_gradient(os: OrbitState, name: str) -> MatrixField:
    """Declared gradient field of one functional, up to directions that are
    invisible in the tangent pairing."""
    if name not in FUNCTIONAL_NAMES:
        raise ValueError(f"unknown functional {name!r}")
    spec = os.spec
    h = os.phi.grid.h
    phi = os.phi.values
    if name == "E":
        return tension(os)
    if name == "E21":
        return MatrixField(os.phi.grid, periodic_diff(phi, 4, h))
    phix = periodic_diff(phi, 1, h)
    phiinv = np.linalg.inv(phi)
    s22 = 1.0 if spec.family.is_unitary else -1.0
    chain = phiinv @ phix @ phiinv @ phix @ phiinv @ phix @ phiinv
    if name == "E22":
        return MatrixField(os.phi.grid, s22 * periodic_diff(chain, 1, h))
    if name == "E23":
        return MatrixField(os.phi.grid, 0.5 * s22 * periodic_diff(chain, 1, h))
    # Etilde
    if spec.family is Family.COMPACT_UNITARY:
        r = phix @ phiinv
        r3 = r @ r @ r
        grad = phiinv @ (periodic_diff(r3, 1, h) + r3 @ r)
        return MatrixField(os.phi.grid, grad)
    return MatrixField(os.phi.grid, s22 * periodic_diff(chain, 1, h))


def functional_value(os: OrbitState, name: str) -> float:
    if name not in FUNCTIONAL_NAMES:
        raise ValueError(f"unknown functional {name!r}")
    rep = energy_report(os, FlowParams(0.0, 0.0, 0.0))
    return getattr(rep, name)


def fd_gradient_check(
    os: OrbitState,
    name: str,
    xi: MatrixField,
    eps: float = 1e-5,
) -> tuple[float, float]:
    """Directional derivative two ways: the declared gradient paired with
    the conjugation direction [phi, xi], and a centered finite difference
    of the functional along the conjugated family.

    Returns (analytic, numeric).
    """
    spec = os.spec
    grid = os.phi.grid
    h = grid.h
    phi = os.phi.values
    xiv = xi.values
    grad = functional_gradient(os, name).values
    delta = bracket(phi, xiv)
    analytic = float(h * np.sum(inner(spec, grad, delta)))
    g = exp_map(eps * xiv)
    ginv = exp_map(-eps * xiv)
    phi_plus = ginv @ phi @ g
    phi_minus = g @ phi @ ginv
    f_plus = functional_value(OrbitState(spec, MatrixField(grid, phi_plus)), name)
    f_minus = functional_value(OrbitState(spec, MatrixField(grid, phi_minus)), name)
    numeric = (f_plus - f_minus) / (2.0 * eps)
    return analytic, numeric
