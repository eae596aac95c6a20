"""Vector and scalar reductions of the 2x2 orbit flows.

For n = 2 each family's orbit field is a three-component vector field on a
quadric: the round sphere, the upper hyperboloid sheet, or the unit
one-sheet hyperboloid.  The dictionaries here conjugate the matrix flows
into vector form exactly at the discrete level, which is what the
cross-check drivers exploit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraSpec, Family
from .fields import Grid, MatrixField, cumulative_trapezoid, periodic_diff
from .functionals import FlowParams
from .orbit import OrbitState


class Geometry(str, enum.Enum):
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"
    DE_SITTER = "de_sitter"


_GEOMETRY_FAMILY = {
    Geometry.SPHERE: Family.COMPACT_UNITARY,
    Geometry.HYPERBOLIC: Family.NONCOMPACT_UNITARY,
    Geometry.DE_SITTER: Family.PARA_REAL,
}


def geometry_spec(geometry: Geometry) -> AlgebraSpec:
    return AlgebraSpec(_GEOMETRY_FAMILY[Geometry(geometry)], 2, 1)


def spec_geometry(spec: AlgebraSpec) -> Geometry:
    if (spec.n, spec.k) != (2, 1):
        raise ValueError("vector reductions need n = 2, k = 1")
    for geo, fam in _GEOMETRY_FAMILY.items():
        if fam is spec.family:
            return geo
    raise ValueError(f"no geometry for family {spec.family}")


def quadric_value(geometry: Geometry, s: np.ndarray) -> np.ndarray:
    """The quadratic form whose level set the vector lives on: |s|^2 = 1
    (sphere), s1^2 + s2^2 - s3^2 = -1 with s3 > 0 (hyperbolic), = +1
    (one-sheet)."""
    g = Geometry(geometry)
    if g is Geometry.SPHERE:
        return np.sum(s * s, axis=-1)
    return s[..., 0] ** 2 + s[..., 1] ** 2 - s[..., 2] ** 2


def quadric_target(geometry: Geometry) -> float:
    return {Geometry.SPHERE: 1.0, Geometry.HYPERBOLIC: -1.0, Geometry.DE_SITTER: 1.0}[
        Geometry(geometry)
    ]


def quadric_defect(geometry: Geometry, s: np.ndarray) -> float:
    return float(np.max(np.abs(quadric_value(geometry, s) - quadric_target(geometry))))


@dataclass(frozen=True)
class SpinField:
    """Three-component real vector field on the geometry's quadric."""

    geometry: Geometry
    grid: Grid
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        v = np.array(self.s, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] != self.grid.num_points:
            raise ValueError("s must have shape (N, 3)")
        v.setflags(write=False)
        object.__setattr__(self, "s", v)
        defect = quadric_defect(self.geometry, v)
        if defect > 1e-6:
            raise ValueError(f"vector field is off its quadric by {defect:.3e}")
        if self.geometry is Geometry.HYPERBOLIC and np.any(v[:, 2] <= 0):
            raise ValueError("hyperbolic vectors must stay on the upper sheet")


def s_to_phi_values(geometry: Geometry, s: np.ndarray) -> np.ndarray:
    """Dictionary from vectors to 2x2 orbit matrices."""
    g = Geometry(geometry)
    s1, s2, s3 = s[..., 0], s[..., 1], s[..., 2]
    out = np.empty(s.shape[:-1] + (2, 2), dtype=np.complex128)
    if g is Geometry.SPHERE:
        out[..., 0, 0] = 0.5j * s1
        out[..., 0, 1] = 0.5 * (s2 + 1j * s3)
        out[..., 1, 0] = 0.5 * (-s2 + 1j * s3)
        out[..., 1, 1] = -0.5j * s1
    elif g is Geometry.HYPERBOLIC:
        out[..., 0, 0] = 0.5j * s3
        out[..., 0, 1] = 0.5 * (s1 + 1j * s2)
        out[..., 1, 0] = 0.5 * (s1 - 1j * s2)
        out[..., 1, 1] = -0.5j * s3
    else:
        out[..., 0, 0] = 0.5 * s1
        out[..., 0, 1] = 0.5 * (s2 + s3)
        out[..., 1, 0] = 0.5 * (s2 - s3)
        out[..., 1, 1] = -0.5 * s1
    return out


def phi_to_s_values(geometry: Geometry, phi: np.ndarray) -> np.ndarray:
    g = Geometry(geometry)
    s = np.empty(phi.shape[:-2] + (3,), dtype=np.float64)
    if g is Geometry.SPHERE:
        s[..., 0] = 2.0 * phi[..., 0, 0].imag
        s[..., 1] = 2.0 * phi[..., 0, 1].real
        s[..., 2] = 2.0 * phi[..., 0, 1].imag
    elif g is Geometry.HYPERBOLIC:
        s[..., 0] = 2.0 * phi[..., 0, 1].real
        s[..., 1] = 2.0 * phi[..., 0, 1].imag
        s[..., 2] = 2.0 * phi[..., 0, 0].imag
    else:
        s[..., 0] = 2.0 * phi[..., 0, 0].real
        s[..., 1] = (phi[..., 0, 1] + phi[..., 1, 0]).real
        s[..., 2] = (phi[..., 0, 1] - phi[..., 1, 0]).real
    return s


def s_to_phi(sf: SpinField) -> OrbitState:
    spec = geometry_spec(sf.geometry)
    return OrbitState(spec, MatrixField(sf.grid, s_to_phi_values(sf.geometry, sf.s)))


def phi_to_s(os: OrbitState) -> SpinField:
    geometry = spec_geometry(os.spec)
    return SpinField(geometry, os.phi.grid, phi_to_s_values(geometry, os.phi.values))


def geometry_cross(geometry: Geometry, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product matching the geometry's bracket: Euclidean for the
    sphere, the (+,+,-) variant for the hyperboloid, its negative for the
    one-sheet case."""
    g = Geometry(geometry)
    c = np.cross(a, b)
    if g is Geometry.SPHERE:
        return c
    flip = np.array([1.0, 1.0, -1.0]) if g is Geometry.HYPERBOLIC else np.array([-1.0, -1.0, 1.0])
    return c * flip


def derivative_norm_sq(geometry: Geometry, v: np.ndarray) -> np.ndarray:
    """Squared length of a tangent vector in the geometry's signature."""
    if Geometry(geometry) is Geometry.SPHERE:
        return np.sum(v * v, axis=-1)
    return v[..., 0] ** 2 + v[..., 1] ** 2 - v[..., 2] ** 2


def spin_rhs(sf: SpinField, p: FlowParams) -> np.ndarray:
    """Vector form of the third-level flow for all three geometries."""
    g = sf.geometry
    h = sf.grid.h
    s = sf.s
    core = -p.alpha * periodic_diff(s, 2, h)
    if p.beta != 0.0:
        core = core + p.beta * periodic_diff(s, 4, h)
    coeff = 4.0 * p.gamma - 2.0 * p.beta
    if coeff != 0.0:
        sx = periodic_diff(s, 1, h)
        nsq = derivative_norm_sq(g, sx)
        sgn = 1.0 if g is Geometry.HYPERBOLIC else -1.0
        core = core + (sgn * coeff) * periodic_diff(nsq[:, None] * sx, 1, h)
    return geometry_cross(g, s, core)


def renormalize(geometry: Geometry, s: np.ndarray) -> np.ndarray:
    """Pointwise projection back to the quadric along rays from the
    origin.  The hyperbolic sheet keeps its orientation because the scale
    factor is positive."""
    g = Geometry(geometry)
    val = quadric_value(g, s)
    target = quadric_target(g)
    scale = val / target
    if np.any(scale <= 0):
        raise ValueError("field left the cone of its quadric; cannot renormalize")
    return s / np.sqrt(scale)[:, None]


def spin_step(sf: SpinField, p: FlowParams, dt: float) -> SpinField:
    """One classical step of the vector flow with per-stage projection."""
    g = sf.geometry
    grid = sf.grid

    def rhs(values):
        return spin_rhs(SpinField(g, grid, values), p)

    s = sf.s
    k1 = rhs(s)
    s2 = renormalize(g, s + 0.5 * dt * k1)
    k2 = rhs(s2)
    s3 = renormalize(g, s + 0.5 * dt * k2)
    k3 = rhs(s3)
    s4 = renormalize(g, s + dt * k3)
    k4 = rhs(s4)
    out = renormalize(g, s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    return SpinField(g, grid, out)


def cross_check_matrix_vs_vector(
    initial: SpinField,
    p: FlowParams,
    kind,
    T: float,
    dt: float,
    samples: int = 6,
) -> float:
    """Evolve the same data through the matrix flow and through the vector
    flow, and return the largest componentwise gap at the sample times."""
    from .flows import FlowKind, evolve

    kind = FlowKind(kind)
    if kind is FlowKind.SECOND_ORDER:
        raise ValueError("cross-check covers the commutator flows")
    times = [i * T / (samples - 1) for i in range(samples)] if T > 0 else [0.0]
    os0 = s_to_phi(initial)
    traj = evolve(os0, p, kind, T, dt, output_times=times, record_steps=False)
    matrix_side = [phi_to_s_values(initial.geometry, st.phi.values) for st in traj.states]

    sf = initial
    t = 0.0
    gap = 0.0
    idx = 0
    for target in times:
        while target - t > 1e-9 * max(1.0, abs(target)):
            remaining = target - t
            dt_step = dt if remaining > dt * (1.0 + 1e-9) else remaining
            sf = spin_step(sf, p, dt_step)
            t += dt_step
        gap = max(gap, float(np.max(np.abs(sf.s - matrix_side[idx]))))
        idx += 1
    return gap


def _scalar_block(q, r, h, alpha, beta, cnl, nonlocal_mode):
    """Scalar transcription of the shared potential-equation block, kept
    term by term so it can disambiguate the matrix assembly."""
    qx = periodic_diff(q, 1, h)
    rx = periodic_diff(r, 1, h)
    qxx = periodic_diff(q, 2, h)
    out = alpha * (-qxx + 2.0 * q * r * q)
    if beta != 0.0:
        rxx = periodic_diff(r, 2, h)
        qxxxx = periodic_diff(q, 4, h)
        out = out + beta * (
            qxxxx
            - 4.0 * qxx * r * q
            - 2.0 * q * rxx * q
            - 4.0 * q * r * qxx
            - 2.0 * qx * rx * q
            - 6.0 * qx * r * qx
            - 2.0 * q * rx * qx
            + 6.0 * q * r * q * r * q
        )
    if cnl != 0.0:
        qrq = q * r * q
        if nonlocal_mode == "integral":
            n1 = cumulative_trapezoid(q * periodic_diff(r * q, 1, h) * r, h)
            n2 = cumulative_trapezoid(r * periodic_diff(q * r, 1, h) * q, h)
        else:
            prod = q * r
            n1 = n2 = 0.5 * (prod * prod - prod[0] * prod[0])
        out = out - cnl * (-periodic_diff(qrq, 2, h) + 2.0 * qrq * r * q + q * n2 + n1 * q)
    return out


def _closed_scalar_complex(q, h, alpha, beta, cnl, focusing_sign):
    """Printed closed scalar equations of the complex families.  The sign
    argument is +1 for the compact case and -1 for the noncompact case."""
    qb = np.conj(q)
    a2 = (q * qb).real
    qx = periodic_diff(q, 1, h)
    qxx = periodic_diff(q, 2, h)
    s = -alpha * (qxx + focusing_sign * 2.0 * a2 * q)
    if beta != 0.0:
        qxxxx = periodic_diff(q, 4, h)
        a2xx = periodic_diff(a2, 2, h)
        s = s + beta * (
            qxxxx
            + focusing_sign * 6.0 * (a2 * qxx + qx * qx * qb)
            + (6.0 * a2 * a2 + focusing_sign * 2.0 * a2xx) * q
        )
    if cnl != 0.0:
        s = s - focusing_sign * cnl * (
            periodic_diff(a2 * q, 2, h) + focusing_sign * 3.0 * a2 * a2 * q
        )
    return 1j * s


def scalar_rhs(
    grid: Grid,
    q: np.ndarray,
    p: FlowParams,
    family: Family,
    r: np.ndarray | None = None,
    nonlocal_mode: str = "integral",
):
    """Scalar right-hand sides of the three potential equations (n = 2).

    For the complex families the return value is dq/dt; the split family
    needs an explicit real pair and returns (dq/dt, dr/dt).  With
    nonlocal_mode="integral" the nonlocal terms are running trapezoid
    integrals anchored at the first node, matching potential_rhs pointwise;
    "closed" substitutes the exact primitive of the integrand, which shifts
    the result by a spatially constant multiple of the field.
    """
    family = Family(family)
    if nonlocal_mode not in ("integral", "closed"):
        raise ValueError("nonlocal_mode must be 'integral' or 'closed'")
    h = grid.h
    q = np.asarray(q, dtype=np.complex128)
    if q.shape != (grid.num_points,):
        raise ValueError("q must be a flat array over the grid")
    cnl = 2.0 * (8.0 * p.gamma + p.beta)
    if family is Family.PARA_REAL:
        if r is None:
            raise ValueError("the split family needs an explicit r")
        r = np.asarray(r, dtype=np.complex128)
        if nonlocal_mode == "closed":
            dq = _closed_scalar_split_q(q, r, h, p.alpha, p.beta, cnl)
            dr = -_closed_scalar_split_q(r, q, h, p.alpha, p.beta, cnl)
            return dq, dr
        dq = -_scalar_block(q, r, h, p.alpha, p.beta, cnl, nonlocal_mode)
        dr = _scalar_block(r, q, h, p.alpha, p.beta, cnl, nonlocal_mode)
        return dq, dr
    if r is not None:
        raise ValueError("the complex families slave r to q")
    sign = -1.0 if family is Family.COMPACT_UNITARY else 1.0
    if nonlocal_mode == "closed":
        return _closed_scalar_complex(q, h, p.alpha, p.beta, cnl, -sign)
    return 1j * _scalar_block(q, sign * np.conj(q), h, p.alpha, p.beta, cnl, nonlocal_mode)


def _closed_scalar_split_q(q, r, h, alpha, beta, cnl):
    """Printed closed scalar q-equation of the split family; the r
    equation is the negative of the same expression with the arguments
    swapped."""
    qx = periodic_diff(q, 1, h)
    rx = periodic_diff(r, 1, h)
    qxx = periodic_diff(q, 2, h)
    rxx = periodic_diff(r, 2, h)
    out = alpha * (qxx - 2.0 * q * q * r)
    if beta != 0.0:
        qxxxx = periodic_diff(q, 4, h)
        out = out + beta * (
            -qxxxx
            + 6.0 * qx * qx * r
            + 4.0 * q * qx * rx
            + 8.0 * q * r * qxx
            + 2.0 * q * q * rxx
            - 6.0 * q * q * q * r * r
        )
    if cnl != 0.0:
        q2r = q * q * r
        out = out - cnl * (periodic_diff(q2r, 2, h) - 3.0 * q * q2r * r)
    return out
