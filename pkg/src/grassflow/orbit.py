"""Orbit states, moving frames, gauge fixing, and the structural identities.

An orbit state is a field phi(x) lying on the conjugacy orbit of the base
point.  The complex families conjugate the base point from the left inverse
side (phi = E^-1 s E with frame equation E_x = P E); the split family uses
the mirrored convention (phi = E s E^-1, E_x = E P).  Potentials P are
block-off-diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    AlgebraSpec,
    Family,
    bracket,
    decompose,
    frobenius,
    membership_residual,
    sigma3,
)
from .fields import Grid, MatrixField, periodic_diff


class SpectralError(RuntimeError):
    """Eigenvalue machinery failed or is too ill conditioned to trust."""


@dataclass(frozen=True)
class OrbitState:
    """Field of orbit points, with an optional frame that generated it."""

    spec: AlgebraSpec
    phi: MatrixField
    time: float = 0.0
    frame: MatrixField | None = None

    def __post_init__(self):
        if self.phi.matrix_dim != self.spec.n:
            raise ValueError("phi matrix size must match the algebra")

    def to_json_dict(self) -> dict:
        d = {
            "algebra": self.spec.to_json_dict(),
            "time": float(self.time),
            "phi": self.phi.to_json_dict(),
        }
        if self.frame is not None:
            d["frame"] = self.frame.to_json_dict()
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "OrbitState":
        frame = MatrixField.from_json_dict(d["frame"]) if "frame" in d else None
        return cls(
            AlgebraSpec.from_json_dict(d["algebra"]),
            MatrixField.from_json_dict(d["phi"]),
            float(d.get("time", 0.0)),
            frame,
        )


@dataclass(frozen=True)
class FramedState:
    """Frame field together with its block-off-diagonal potential."""

    spec: AlgebraSpec
    frame: MatrixField
    potential: MatrixField
    time: float = 0.0

    def __post_init__(self):
        if self.frame.matrix_dim != self.spec.n or self.potential.matrix_dim != self.spec.n:
            raise ValueError("frame and potential size must match the algebra")
        if self.frame.grid.num_points != self.potential.grid.num_points:
            raise ValueError("frame and potential must share the grid")

    def to_json_dict(self) -> dict:
        return {
            "algebra": self.spec.to_json_dict(),
            "time": float(self.time),
            "frame": self.frame.to_json_dict(),
            "potential": self.potential.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "FramedState":
        return cls(
            AlgebraSpec.from_json_dict(d["algebra"]),
            MatrixField.from_json_dict(d["frame"]),
            MatrixField.from_json_dict(d["potential"]),
            float(d.get("time", 0.0)),
        )


def conjugate_base(spec: AlgebraSpec, frame_values: np.ndarray) -> np.ndarray:
    """Orbit field of a frame: E^-1 s E (complex) or E s E^-1 (split)."""
    sig = sigma3(spec)
    einv = np.linalg.inv(frame_values)
    if spec.family.is_unitary:
        return einv @ sig @ frame_values
    return frame_values @ sig @ einv


def orbit_from_frame(fs: FramedState) -> OrbitState:
    phi = conjugate_base(fs.spec, fs.frame.values)
    return OrbitState(fs.spec, MatrixField(fs.frame.grid, phi), fs.time, fs.frame)


def _midpoints(values: np.ndarray) -> np.ndarray:
    """Cubic interpolation at half nodes, periodic in the index."""
    return (
        -np.roll(values, 1, axis=0)
        + 9.0 * values
        + 9.0 * np.roll(values, -1, axis=0)
        - np.roll(values, -2, axis=0)
    ) / 16.0


def frame_from_potential(
    spec: AlgebraSpec,
    potential: MatrixField,
    e0: np.ndarray | None = None,
    time: float = 0.0,
) -> FramedState:
    """March the frame equation across the grid.

    Classic fourth-order one-step integration per cell; the potential at
    half nodes comes from cubic interpolation.  The starting frame defaults
    to the identity.
    """
    pv = potential.values
    n = spec.n
    h = potential.grid.h
    npts = potential.grid.num_points
    e = np.empty((npts, n, n), dtype=np.complex128)
    e[0] = np.eye(n) if e0 is None else np.asarray(e0, dtype=np.complex128)
    pmid = _midpoints(pv)
    left = spec.family.is_unitary

    def apply(p, m):
        return p @ m if left else m @ p

    for j in range(npts - 1):
        ej = e[j]
        k1 = apply(pv[j], ej)
        k2 = apply(pmid[j], ej + 0.5 * h * k1)
        k3 = apply(pmid[j], ej + 0.5 * h * k2)
        k4 = apply(pv[j + 1], ej + h * k3)
        e[j + 1] = ej + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return FramedState(spec, MatrixField(potential.grid, e), potential, time)


def frame_closure_defect(spec: AlgebraSpec, fs: FramedState) -> float:
    """Norm of the mismatch between the frame continued one full period
    and its starting value.  Nonzero closure means the potential carries
    holonomy and the frame samples do not represent a periodic field."""
    pv = fs.potential.values
    h = fs.potential.grid.h
    left = spec.family.is_unitary

    def apply(p, m):
        return p @ m if left else m @ p

    # one more cell from the last node back to x = L
    pmid = _midpoints(pv)[-1]
    ej = fs.frame.values[-1]
    k1 = apply(pv[-1], ej)
    k2 = apply(pmid, ej + 0.5 * h * k1)
    k3 = apply(pmid, ej + 0.5 * h * k2)
    k4 = apply(pv[0], ej + h * k3)
    e_end = ej + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return frobenius(e_end - fs.frame.values[0])


def gauge_fix_frame(spec: AlgebraSpec, raw_frame: MatrixField, time: float = 0.0) -> FramedState:
    """Rotate a frame by a block-diagonal factor so that its connection is
    purely block-off-diagonal.  The orbit field is unchanged.

    The frame samples must come from a periodic frame field (no holonomy
    across the wrap), since the connection is recovered by periodic
    differencing.  The stored potential is block-off-diagonal by
    construction.
    """
    ev = raw_frame.values
    h = raw_frame.grid.h
    npts = raw_frame.grid.num_points
    einv = np.linalg.inv(ev)
    de = periodic_diff(ev, 1, h)
    left = spec.family.is_unitary
    conn = de @ einv if left else einv @ de
    k_part, m_part = decompose(spec, conn)
    kmid = _midpoints(k_part)
    d = np.empty_like(ev)
    d[0] = np.eye(spec.n)

    def rhs(kv, m):
        return -(m @ kv) if left else -(kv @ m)

    for j in range(npts - 1):
        dj = d[j]
        k1 = rhs(k_part[j], dj)
        k2 = rhs(kmid[j], dj + 0.5 * h * k1)
        k3 = rhs(kmid[j], dj + 0.5 * h * k2)
        k4 = rhs(k_part[j + 1], dj + h * k3)
        d[j + 1] = dj + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    dinv = np.linalg.inv(d)
    if left:
        new_e = d @ ev
        new_p = d @ m_part @ dinv
    else:
        new_e = ev @ d
        new_p = dinv @ m_part @ d
    grid = raw_frame.grid
    return FramedState(spec, MatrixField(grid, new_e), MatrixField(grid, new_p), time)


def verify_identities(fs: FramedState) -> dict:
    """Residuals of the structural identities tying phi to its frame and
    potential: the orbit involution, the frame-conjugated tangent formula,
    both left-translation forms, the compatibility bracket, and the square
    relation.  Each entry is the largest Frobenius norm over the grid."""
    spec = fs.spec
    h = fs.frame.grid.h
    sig = sigma3(spec)
    ev = fs.frame.values
    pv = fs.potential.values
    einv = np.linalg.inv(ev)
    unit = spec.family.is_unitary
    phi = einv @ sig @ ev if unit else ev @ sig @ einv
    phix = periodic_diff(phi, 1, h)
    phiinv = np.linalg.inv(phi)
    out: dict[str, float] = {}
    if unit:
        out["involution"] = frobenius(phiinv + 4.0 * phi)
        out["tangent"] = frobenius(phix - einv @ bracket(sig, pv) @ ev)
        conj_p = einv @ pv @ ev
        out["translate_left"] = frobenius(phix @ phiinv + 2.0 * conj_p)
        out["translate_right"] = frobenius(phiinv @ phix - 2.0 * conj_p)
        out["compatibility"] = frobenius(bracket(phi, phix) - 0.5 * phix @ phiinv)
        r = phix @ phiinv
        out["square"] = frobenius(phix @ phix - 0.25 * r @ r)
    else:
        out["involution"] = frobenius(phiinv - 4.0 * phi)
        out["tangent"] = frobenius(phix - ev @ bracket(pv, sig) @ einv)
        conj_p = ev @ pv @ einv
        out["translate_left"] = frobenius(phix @ phiinv - 2.0 * conj_p)
        out["translate_right"] = frobenius(phiinv @ phix + 2.0 * conj_p)
        out["compatibility"] = frobenius(bracket(phi, phix) + 0.5 * phix @ phiinv)
        r = phix @ phiinv
        out["square"] = frobenius(phix @ phix + 0.25 * r @ r)
    return out


def _sorted_eigenvalues(spec: AlgebraSpec, values: np.ndarray) -> np.ndarray:
    try:
        w = np.linalg.eigvals(values)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigenvalue solve failed: {exc}") from exc
    key = -w.imag if spec.family.is_unitary else -w.real
    order = np.argsort(key, axis=-1, kind="stable")
    return np.take_along_axis(w, order, axis=-1)


def reference_spectrum(spec: AlgebraSpec) -> np.ndarray:
    """Eigenvalue multiset of the base point, sorted the same way."""
    c = spec.block_scale
    ref = np.full(spec.n, -c, dtype=np.complex128)
    ref[: spec.k] = c
    return ref


def spectrum_deviation(os: OrbitState) -> float:
    """Largest distance between the sorted eigenvalues of any phi_j and the
    base-point multiset."""
    w = _sorted_eigenvalues(os.spec, os.phi.values)
    return float(np.max(np.abs(w - reference_spectrum(os.spec))))


def orbit_retract(spec: AlgebraSpec, values: np.ndarray, cond_limit: float = 1e8) -> np.ndarray:
    """Spectral projection back to the orbit: snap eigenvalues to the
    base-point multiset while keeping the eigenspaces.

    The compact family diagonalizes Hermitian data; the other families use
    a general eigen decomposition, rejected if the eigenvector matrix is
    too ill conditioned.
    """
    n, k = spec.n, spec.k
    if spec.family is Family.COMPACT_UNITARY:
        herm = -1j * values
        herm = 0.5 * (herm + np.conj(np.swapaxes(herm, -1, -2)))
        w, v = np.linalg.eigh(herm)  # ascending
        snapped = np.full(w.shape, -0.5)
        snapped[..., n - k :] = 0.5
        rebuilt = (v * snapped[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
        return 1j * rebuilt
    try:
        w, v = np.linalg.eig(values)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigenvalue solve failed: {exc}") from exc
    cond = np.linalg.cond(v)
    if not np.all(np.isfinite(cond)) or float(np.max(cond)) > cond_limit:
        raise SpectralError(
            "eigenvector conditioning exceeds the retraction limit "
            f"({float(np.max(cond)):.3e} > {cond_limit:.1e})"
        )
    key = -w.imag if spec.family.is_unitary else -w.real
    order = np.argsort(key, axis=-1, kind="stable")
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    c = spec.block_scale
    snapped = np.full(w.shape, -c, dtype=np.complex128)
    snapped[..., :k] = c
    rebuilt = (v * snapped[..., None, :]) @ np.linalg.inv(v)
    if spec.family is Family.PARA_REAL:
        return np.real(rebuilt).astype(np.complex128)
    return rebuilt


def tangency_defect(fs: FramedState, field_values: np.ndarray) -> float:
    """How far a field at phi is from the orbit's tangent distribution:
    conjugate by the frame and measure the block-diagonal part."""
    ev = fs.frame.values
    einv = np.linalg.inv(ev)
    if fs.spec.family.is_unitary:
        conj = ev @ field_values @ einv
    else:
        conj = einv @ field_values @ ev
    k_part, _ = decompose(fs.spec, conj)
    return frobenius(k_part)


def orbit_membership_report(os: OrbitState) -> dict:
    """Algebra membership and spectral deviation of an orbit field."""
    return {
        "membership": membership_residual(os.spec, os.phi.values),
        "spectrum": spectrum_deviation(os),
    }
