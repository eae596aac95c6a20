"""Zero-curvature connections and the gauge-transformed potential equations.

The connection pair (A_x, A_t) depends polynomially on a spectral
parameter; along solutions of the third-level flow its curvature collapses
to a single cubic term, which curvature_residual measures from trajectory
snapshots.  gauge_transform rewrites a gauge-fixed framed state as a pair
of rectangular blocks (q, r), and potential_rhs evolves the pair directly;
the two routes are compared by the verification suites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraSpec, Family, bracket, decompose, frobenius
from .fields import Grid, MatrixField, cumulative_trapezoid, periodic_diff
from .functionals import FlowParams
from .orbit import FramedState, OrbitState


class GaugeError(RuntimeError):
    """Frame is not in the gauge required for block extraction."""


@dataclass(frozen=True)
class ConnectionSample:
    """Connection pair evaluated at one value of the spectral parameter."""

    lam: float
    a_x: MatrixField
    a_t: MatrixField


@dataclass(frozen=True)
class PotentialState:
    """Rectangular block pair (q, r) of a block-off-diagonal potential.

    The complex families slave r to q (r = -q* compact, r = +q*
    noncompact); the split family carries an independent real pair.
    """

    spec: AlgebraSpec
    grid: Grid
    q: np.ndarray
    r: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        spec = self.spec
        npts = self.grid.num_points
        k, m = spec.k, spec.n - spec.k
        q = np.array(self.q, dtype=np.complex128, copy=True)
        r = np.array(self.r, dtype=np.complex128, copy=True)
        if q.shape != (npts, k, m):
            raise ValueError(f"q must have shape ({npts}, {k}, {m})")
        if r.shape != (npts, m, k):
            raise ValueError(f"r must have shape ({npts}, {m}, {k})")
        q.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_q(cls, spec: AlgebraSpec, grid: Grid, q: np.ndarray, time: float = 0.0):
        """Build a state with the slaved block for the complex families."""
        if spec.family is Family.PARA_REAL:
            raise ValueError("the split family needs an explicit r block")
        q = np.asarray(q, dtype=np.complex128)
        r = slaved_r(spec, q)
        return cls(spec, grid, q, r, time)

    def assemble(self) -> MatrixField:
        """Full block-off-diagonal potential field."""
        npts = self.grid.num_points
        n, k = self.spec.n, self.spec.k
        p = np.zeros((npts, n, n), dtype=np.complex128)
        p[:, :k, k:] = self.q
        p[:, k:, :k] = self.r
        return MatrixField(self.grid, p)

    def to_json_dict(self) -> dict:
        from .fields import matrix_to_json

        return {
            "algebra": self.spec.to_json_dict(),
            "grid": self.grid.to_json_dict(),
            "time": float(self.time),
            "q": [matrix_to_json(m) for m in self.q],
            "r": [matrix_to_json(m) for m in self.r],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PotentialState":
        from .fields import matrix_from_json

        spec = AlgebraSpec.from_json_dict(d["algebra"])
        grid = Grid.from_json_dict(d["grid"])
        q = np.array([matrix_from_json(m) for m in d["q"]])
        r = np.array([matrix_from_json(m) for m in d["r"]])
        return cls(spec, grid, q, r, float(d.get("time", 0.0)))


def slaved_r(spec: AlgebraSpec, q: np.ndarray) -> np.ndarray:
    """The r block forced by membership for the complex families."""
    qh = np.conj(np.swapaxes(q, -1, -2))
    if spec.family is Family.COMPACT_UNITARY:
        return -qh
    if spec.family is Family.NONCOMPACT_UNITARY:
        return qh
    raise ValueError("the split family has no slaved block")


def gauge_transform(fs: FramedState, tol: float = 1e-8) -> PotentialState:
    """Extract the block pair from a gauge-fixed framed state.  Raises if
    the stored potential has a block-diagonal part above tol."""
    spec = fs.spec
    pv = fs.potential.values
    k_part, m_part = decompose(spec, pv)
    defect = frobenius(k_part)
    if defect > tol:
        raise GaugeError(
            f"frame is not gauge fixed: block-diagonal residual {defect:.3e} > {tol:.1e}"
        )
    k = spec.k
    return PotentialState(spec, fs.potential.grid, m_part[:, :k, k:], m_part[:, k:, :k], fs.time)


def connection(os: OrbitState, p: FlowParams, lam: float) -> ConnectionSample:
    """Connection pair at one spectral value along the third-level flow."""
    spec = os.spec
    grid = os.phi.grid
    h = grid.h
    phi = os.phi.values
    phix = periodic_diff(phi, 1, h)
    phixx = periodic_diff(phi, 2, h)
    phixxx = periodic_diff(phi, 3, h)
    phix2 = phix @ phix
    cube = phix2 @ phix
    lam = float(lam)
    a_x = lam * phi
    if spec.family.is_unitary:
        inner_w = -p.alpha * phix + p.beta * phixxx + 4.0 * (4.0 * p.gamma - 2.0 * p.beta) * cube
        a_t = (
            -(lam ** 4) * p.beta * phi
            - (lam ** 3) * p.beta * bracket(phi, phix)
            + (lam ** 2) * (-p.alpha * phi + p.beta * (phixx - 6.0 * phix2 @ phi))
            + lam * (bracket(phi, inner_w) - p.beta * bracket(phix, phixx))
        )
    else:
        inner_w = -p.alpha * phix + p.beta * phixxx - 4.0 * (4.0 * p.gamma - 2.0 * p.beta) * cube
        a_t = (
            -(lam ** 4) * p.beta * phi
            + (lam ** 3) * p.beta * bracket(phi, phix)
            + (lam ** 2) * (p.alpha * phi - p.beta * (phixx + 6.0 * phix2 @ phi))
            + lam * (bracket(phi, inner_w) - p.beta * bracket(phix, phixx))
        )
    return ConnectionSample(lam, MatrixField(grid, a_x), MatrixField(grid, a_t))


def curvature_target(os: OrbitState, p: FlowParams, lam: float) -> MatrixField:
    """The residual two-form left by the flow: a single cubic term."""
    h = os.phi.grid.h
    phix = periodic_diff(os.phi.values, 1, h)
    coeff = -2.0 * (lam ** 2) * (8.0 * p.gamma + p.beta)
    return MatrixField(os.phi.grid, coeff * (phix @ phix @ phix))


def curvature_residual(traj, p: FlowParams, lam: float) -> list[tuple[float, float]]:
    """Curvature defect at interior snapshots of a trajectory.

    The time derivative of A_x is formed by centered differencing of the
    neighbouring snapshots (second order, uneven spacing handled); the
    result is a list of (time, residual) pairs.
    """
    states = traj.states
    times = traj.times
    if len(states) < 3:
        raise ValueError("need at least three snapshots for a curvature residual")
    out = []
    for i in range(1, len(states) - 1):
        dm = times[i] - times[i - 1]
        dp = times[i + 1] - times[i]
        phi_prev = states[i - 1].phi.values
        phi_next = states[i + 1].phi.values
        phi_dot = (
            dm ** 2 * phi_next + (dp ** 2 - dm ** 2) * states[i].phi.values - dp ** 2 * phi_prev
        ) / (dp * dm * (dp + dm))
        sample = connection(states[i], p, lam)
        ax = sample.a_x.values
        at = sample.a_t.values
        h = states[i].phi.grid.h
        f = periodic_diff(at, 1, h) - lam * phi_dot + bracket(ax, at)
        k = curvature_target(states[i], p, lam).values
        out.append((times[i], frobenius(f - k)))
    return out


def _collected_block(q, r, h, alpha, beta, cnl):
    """Shared polynomial-plus-nonlocal block of the potential equations.

    The complex families use i times this value as q_t; the split family
    uses its negative for q_t and the argument-swapped value for r_t.
    """
    qx = periodic_diff(q, 1, h)
    rx = periodic_diff(r, 1, h)
    qxx = periodic_diff(q, 2, h)
    rq = r @ q
    qr = q @ r
    out = alpha * (-qxx + 2.0 * (q @ rq))
    if beta != 0.0:
        rxx = periodic_diff(r, 2, h)
        qxxxx = periodic_diff(q, 4, h)
        out = out + beta * (
            qxxxx
            - 4.0 * (qxx @ rq)
            - 2.0 * (q @ rxx @ q)
            - 4.0 * (qr @ qxx)
            - 2.0 * (qx @ rx @ q)
            - 6.0 * (qx @ r @ qx)
            - 2.0 * (q @ rx @ qx)
            + 6.0 * (q @ rq @ rq)
        )
    if cnl != 0.0:
        qrq = q @ rq
        n1 = cumulative_trapezoid(q @ periodic_diff(rq, 1, h) @ r, h)
        n2 = cumulative_trapezoid(r @ periodic_diff(qr, 1, h) @ q, h)
        out = out - cnl * (
            -periodic_diff(qrq, 2, h) + 2.0 * (qrq @ rq) + q @ n2 + n1 @ q
        )
    return out


def potential_rhs(ps: PotentialState, p: FlowParams) -> PotentialState:
    """Time derivative of a potential state under the third-level flow,
    returned in the same container (q and r hold dq/dt and dr/dt).

    The nonlocal terms are running integrals anchored at the first node,
    so solutions match the orbit-side flow up to the usual block-diagonal
    gauge freedom.
    """
    spec = ps.spec
    h = ps.grid.h
    cnl = 2.0 * (8.0 * p.gamma + p.beta)
    if spec.family is Family.PARA_REAL:
        dq = -_collected_block(ps.q, ps.r, h, p.alpha, p.beta, cnl)
        dr = _collected_block(ps.r, ps.q, h, p.alpha, p.beta, cnl)
    else:
        dq = 1j * _collected_block(ps.q, ps.r, h, p.alpha, p.beta, cnl)
        dr = slaved_r(spec, dq)
    return PotentialState(spec, ps.grid, dq, dr, ps.time)


@dataclass
class PotentialTrajectory:
    times: list[float]
    states: list[PotentialState]


def evolve_potential(
    ps: PotentialState,
    p: FlowParams,
    T: float,
    dt: float,
    output_times: list[float] | None = None,
) -> PotentialTrajectory:
    """Integrate the potential equations with a classical one-step method,
    landing exactly on the requested output times."""
    if T < 0 or dt <= 0:
        raise ValueError("need T >= 0 and dt > 0")
    spec = ps.spec
    h = ps.grid.h
    t0 = ps.time
    if output_times is None:
        output_times = [t0, t0 + T] if T > 0 else [t0]
    output_times = [float(t) for t in output_times]
    if any(b <= a for a, b in zip(output_times, output_times[1:])):
        raise ValueError("output times must be strictly increasing")

    split = spec.family is Family.PARA_REAL
    cnl = 2.0 * (8.0 * p.gamma + p.beta)

    def rhs(q, r):
        if split:
            return (
                -_collected_block(q, r, h, p.alpha, p.beta, cnl),
                _collected_block(r, q, h, p.alpha, p.beta, cnl),
            )
        dq = 1j * _collected_block(q, r, h, p.alpha, p.beta, cnl)
        return dq, slaved_r(spec, dq)

    q, r = np.array(ps.q), np.array(ps.r)
    t = t0
    times, states = [], []
    step_index = 0
    for target in output_times:
        while target - t > 1e-9 * max(1.0, abs(target)):
            remaining = target - t
            dt_step = dt if remaining > dt * (1.0 + 1e-9) else remaining
            k1q, k1r = rhs(q, r)
            k2q, k2r = rhs(q + 0.5 * dt_step * k1q, r + 0.5 * dt_step * k1r)
            k3q, k3r = rhs(q + 0.5 * dt_step * k2q, r + 0.5 * dt_step * k2r)
            k4q, k4r = rhs(q + dt_step * k3q, r + dt_step * k3r)
            q = q + (dt_step / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
            r = r + (dt_step / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
            t += dt_step
            step_index += 1
            if not (np.all(np.isfinite(q)) and np.all(np.isfinite(r))):
                raise RuntimeError(f"potential evolution lost finiteness at step {step_index}")
        times.append(target)
        states.append(PotentialState(spec, ps.grid, q, r, target))
    return PotentialTrajectory(times, states)


def akns4_rhs(q: np.ndarray, h: float) -> np.ndarray:
    """Literal fourth-order integrable matrix equation for the reduced
    block, written independently of potential_rhs as an oracle."""
    q = np.asarray(q, dtype=np.complex128)
    qs = np.conj(np.swapaxes(q, -1, -2))
    qx = periodic_diff(q, 1, h)
    qsx = periodic_diff(qs, 1, h)
    qxx = periodic_diff(q, 2, h)
    qsxx = periodic_diff(qs, 2, h)
    qxxxx = periodic_diff(q, 4, h)
    return 1j * (
        qxxxx
        + 4.0 * (qxx @ qs @ q)
        + 2.0 * (q @ qsxx @ q)
        + 4.0 * (q @ qs @ qxx)
        + 2.0 * (qx @ qsx @ q)
        + 6.0 * (qx @ qs @ qx)
        + 2.0 * (q @ qsx @ qx)
        + 6.0 * (q @ qs @ q @ qs @ q)
    )


def matrix_kdv_rhs(q: np.ndarray, h: float) -> np.ndarray:
    """Third-order integrable matrix equation used by the split-family
    cross-checks: Q_t = Q_xxx - 2(Q^3)_x - [Q, [Q, Q_x]]."""
    q = np.asarray(q, dtype=np.complex128)
    qx = periodic_diff(q, 1, h)
    return (
        periodic_diff(q, 3, h)
        - 2.0 * periodic_diff(q @ q @ q, 1, h)
        - bracket(q, bracket(q, qx))
    )
