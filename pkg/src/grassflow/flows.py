"""Time evolution of orbit fields for the three levels of the hierarchy.

The first- and third-level flows are commutator flows phi_t = [phi, W] and
are integrated by a fourth-order Lie-group method: the update is a
conjugation by a group exponential, so the spectrum (and hence the orbit)
is preserved to roundoff.  The intermediate flow is a direct equation for
phi and is integrated by a classical one-step method followed by a spectral
re-projection onto the orbit.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraSpec, Family, bracket, exp_map, membership_residual
from .fields import MatrixField, cumulative_integral, periodic_diff
from .functionals import EnergyReport, FlowParams, energy_report
from .orbit import OrbitState, orbit_retract, spectrum_deviation

# Peak spectral amplification of the difference stencils, used for the
# step-size bounds.
FOURTH_DERIV_GAIN = 80.0 / 3.0
THIRD_DERIV_GAIN = 4.7


class FlowKind(str, enum.Enum):
    LEADING_ORDER = "leading_order"
    SECOND_ORDER = "second_order"
    THIRD_ORDER = "third_order"


class StabilityError(RuntimeError):
    """Requested step size exceeds the advisory stability bound."""


class FlowBlowupError(RuntimeError):
    """Evolution produced non-finite values; carries the last good state."""

    def __init__(self, message: str, last_state: OrbitState, step_index: int):
        super().__init__(message)
        self.last_state = last_state
        self.step_index = step_index


def stability_bound(p: FlowParams, h: float, kind: FlowKind = FlowKind.THIRD_ORDER) -> float:
    """Advisory step-size bound for the explicit integrators."""
    kind = FlowKind(kind)
    if kind is FlowKind.SECOND_ORDER:
        return 0.2 * h ** 3 / THIRD_DERIV_GAIN
    bound = np.inf
    if kind is FlowKind.THIRD_ORDER and p.beta != 0.0:
        bound = min(bound, 0.2 * h ** 4 / (abs(p.beta) * FOURTH_DERIV_GAIN))
    if p.alpha != 0.0:
        bound = min(bound, 0.2 * h ** 2 / abs(p.alpha))
    return float(bound)


def _generator_values(
    spec: AlgebraSpec, h: float, phi: np.ndarray, p: FlowParams, kind: FlowKind
) -> np.ndarray:
    w = np.zeros_like(phi)
    if p.alpha != 0.0:
        w -= p.alpha * periodic_diff(phi, 2, h)
    if kind is FlowKind.LEADING_ORDER:
        return w
    if p.beta != 0.0:
        w += p.beta * periodic_diff(phi, 4, h)
    coeff = 4.0 * (4.0 * p.gamma - 2.0 * p.beta)
    if coeff != 0.0:
        sgn = 1.0 if spec.family.is_unitary else -1.0
        phix = periodic_diff(phi, 1, h)
        cube = phix @ phix @ phix
        w += (sgn * coeff) * periodic_diff(cube, 1, h)
    return w


def third_order_generator(os: OrbitState, p: FlowParams) -> MatrixField:
    """Flow generator W of the third-level commutator flow phi_t = [phi, W],
    with the cubic term reduced to a polynomial in phi_x."""
    w = _generator_values(os.spec, os.phi.grid.h, os.phi.values, p, FlowKind.THIRD_ORDER)
    return MatrixField(os.phi.grid, w)


def third_order_generator_via_inverse(os: OrbitState, p: FlowParams) -> MatrixField:
    """Same generator assembled without the on-orbit power reduction, using
    explicit matrix inverses.  Slower; kept as a cross-check."""
    h = os.phi.grid.h
    phi = os.phi.values
    w = np.zeros_like(phi)
    if p.alpha != 0.0:
        w -= p.alpha * periodic_diff(phi, 2, h)
    if p.beta != 0.0:
        w += p.beta * periodic_diff(phi, 4, h)
    coeff = 4.0 * p.gamma - 2.0 * p.beta
    if coeff != 0.0:
        phix = periodic_diff(phi, 1, h)
        phiinv = np.linalg.inv(phi)
        chain = phix @ phiinv @ phix @ phiinv @ phix
        w += coeff * periodic_diff(chain, 1, h)
    return MatrixField(os.phi.grid, w)


def leading_order_generator(os: OrbitState, p: FlowParams) -> MatrixField:
    """Generator of the leading-order flow: -alpha phi_xx."""
    w = _generator_values(os.spec, os.phi.grid.h, os.phi.values, p, FlowKind.LEADING_ORDER)
    return MatrixField(os.phi.grid, w)


def second_order_rhs(os: OrbitState) -> MatrixField:
    """Direct right-hand side of the intermediate flow.  The cubic
    correction carries a family sign so the field stays tangent to the
    orbit for the split family as well."""
    h = os.phi.grid.h
    phi = os.phi.values
    phix = periodic_diff(phi, 1, h)
    sgn = 1.5 if os.spec.family.is_unitary else -1.5
    corr = bracket(phix, bracket(phi, phix))
    return MatrixField(
        os.phi.grid, periodic_diff(phi, 3, h) + sgn * periodic_diff(corr, 1, h)
    )


def _dexpinv_apply(sigma: np.ndarray, w: np.ndarray) -> np.ndarray:
    return w + 0.5 * bracket(sigma, w) + (1.0 / 12.0) * bracket(sigma, bracket(sigma, w))


def _conjugate(g: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # exp(-sigma) phi exp(sigma) with g = exp(sigma)
    return np.linalg.solve(g, phi @ g)


def _rkmk_step(
    spec: AlgebraSpec,
    h: float,
    phi0: np.ndarray,
    frame0: np.ndarray | None,
    p: FlowParams,
    kind: FlowKind,
    dt: float,
):
    def gen(phi):
        return _generator_values(spec, h, phi, p, kind)

    k1 = gen(phi0)
    s2 = (0.5 * dt) * k1
    k2 = _dexpinv_apply(s2, gen(_conjugate(exp_map(s2), phi0)))
    s3 = (0.5 * dt) * k2
    k3 = _dexpinv_apply(s3, gen(_conjugate(exp_map(s3), phi0)))
    s4 = dt * k3
    k4 = _dexpinv_apply(s4, gen(_conjugate(exp_map(s4), phi0)))
    sigma = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    g = exp_map(sigma)
    phi1 = _conjugate(g, phi0)
    frame1 = None
    if frame0 is not None:
        if spec.family.is_unitary:
            frame1 = frame0 @ g
        else:
            frame1 = np.linalg.solve(g, frame0)
    return phi1, frame1


def _second_order_step(spec: AlgebraSpec, h: float, phi0: np.ndarray, dt: float):
    k1 = _second_order_values(spec, h, phi0)
    k2 = _second_order_values(spec, h, phi0 + 0.5 * dt * k1)
    k3 = _second_order_values(spec, h, phi0 + 0.5 * dt * k2)
    k4 = _second_order_values(spec, h, phi0 + dt * k3)
    phi1 = phi0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return orbit_retract(spec, phi1)


def _second_order_values(spec: AlgebraSpec, h: float, phi: np.ndarray) -> np.ndarray:
    phix = periodic_diff(phi, 1, h)
    sgn = 1.5 if spec.family.is_unitary else -1.5
    corr = bracket(phix, bracket(phi, phix))
    return periodic_diff(phi, 3, h) + sgn * periodic_diff(corr, 1, h)


def _check_stability(p: FlowParams, h: float, kind: FlowKind, dt: float, allow_unstable: bool):
    bound = stability_bound(p, h, kind)
    if dt > bound:
        warnings.warn(
            f"dt={dt:.3e} exceeds the stability bound {bound:.3e}", stacklevel=3
        )
        if not allow_unstable:
            raise StabilityError(
                f"dt={dt:.3e} exceeds the stability bound {bound:.3e}; "
                "pass allow_unstable=True to proceed anyway"
            )


def step(
    os: OrbitState,
    p: FlowParams,
    kind: FlowKind,
    dt: float,
    allow_unstable: bool = False,
) -> OrbitState:
    """Advance one time step.  Frames ride along for the commutator flows
    and are dropped by the re-projected intermediate flow."""
    kind = FlowKind(kind)
    h = os.phi.grid.h
    _check_stability(p, h, kind, dt, allow_unstable)
    if kind is FlowKind.SECOND_ORDER:
        phi1 = _second_order_step(os.spec, h, os.phi.values, dt)
        frame1 = None
    else:
        frame0 = None if os.frame is None else os.frame.values
        phi1, frame1 = _rkmk_step(os.spec, h, os.phi.values, frame0, p, kind, dt)
    frame_field = None if frame1 is None else MatrixField(os.phi.grid, frame1)
    return OrbitState(os.spec, MatrixField(os.phi.grid, phi1), os.time + dt, frame_field)


@dataclass
class Trajectory:
    """Snapshots at the requested output times plus per-step energy data."""

    times: list[float]
    states: list[OrbitState]
    reports: list[EnergyReport]
    spectrum_deviations: list[float]
    membership_residuals: list[float]
    step_times: list[float] = field(default_factory=list)
    step_reports: list[EnergyReport] = field(default_factory=list)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("snapshot times must be strictly increasing")


def evolve(
    os: OrbitState,
    p: FlowParams,
    kind: FlowKind,
    T: float,
    dt: float,
    output_times: list[float] | None = None,
    allow_unstable: bool = False,
    record_steps: bool = True,
) -> Trajectory:
    """Run the flow for a duration T, landing exactly on the requested
    output times.  Raises FlowBlowupError (with the last finite state and
    the offending step index) if the field stops being finite."""
    kind = FlowKind(kind)
    if T < 0 or dt <= 0:
        raise ValueError("need T >= 0 and dt > 0")
    h = os.phi.grid.h
    _check_stability(p, h, kind, dt, allow_unstable)
    t0 = os.time
    if output_times is None:
        output_times = [t0, t0 + T] if T > 0 else [t0]
    output_times = [float(t) for t in output_times]
    if any(b <= a for a, b in zip(output_times, output_times[1:])):
        raise ValueError("output times must be strictly increasing")
    lo, hi = t0 - 1e-9, t0 + T + 1e-9
    if output_times and (output_times[0] < lo or output_times[-1] > hi):
        raise ValueError("output times must lie within [start, start + T]")

    current = os
    step_index = 0
    times, states, reports, specdevs, mems = [], [], [], [], []
    step_times: list[float] = []
    step_reports: list[EnergyReport] = []
    if record_steps:
        step_times.append(current.time)
        step_reports.append(energy_report(current, p))

    def snapshot(state):
        times.append(state.time)
        states.append(state)
        reports.append(energy_report(state, p))
        specdevs.append(spectrum_deviation(state))
        mems.append(membership_residual(state.spec, state.phi.values))

    for target in output_times:
        while target - current.time > 1e-9 * max(1.0, abs(target)):
            remaining = target - current.time
            dt_step = dt if remaining > dt * (1.0 + 1e-9) else remaining
            new = step(current, p, kind, dt_step, allow_unstable=True)
            step_index += 1
            if not np.all(np.isfinite(new.phi.values)):
                raise FlowBlowupError(
                    f"non-finite field after step {step_index} (t={new.time:.6g})",
                    current,
                    step_index,
                )
            current = new
            if record_steps:
                step_times.append(current.time)
                step_reports.append(energy_report(current, p))
        # land exactly on the requested time stamp
        current = OrbitState(current.spec, current.phi, target, current.frame)
        snapshot(current)
    return Trajectory(times, states, reports, specdevs, mems, step_times, step_reports)


def sym_pohlmeyer_curve(os: OrbitState) -> MatrixField:
    """Curve whose derivative is the orbit field: the running integral of
    phi anchored at the first node."""
    return cumulative_integral(os.phi)


def curve_flow_rhs(os: OrbitState, p: FlowParams) -> MatrixField:
    """Velocity of the reconstructed curve, written in terms of phi.  The
    curve built by sym_pohlmeyer_curve moves by this field minus its value
    at the anchor node."""
    h = os.phi.grid.h
    phi = os.phi.values
    phix = periodic_diff(phi, 1, h)
    phixx = periodic_diff(phi, 2, h)
    phixxx = periodic_diff(phi, 3, h)
    out = -p.alpha * bracket(phi, phix)
    if p.beta != 0.0:
        out += p.beta * (bracket(phi, phixxx) - bracket(phix, phixx))
    coeff = 4.0 * p.gamma - 2.0 * p.beta
    if coeff != 0.0:
        phiinv = np.linalg.inv(phi)
        chain = phix @ phiinv @ phix @ phiinv @ phix
        out += coeff * bracket(phi, chain)
    return MatrixField(os.phi.grid, out)
