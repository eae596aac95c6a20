"""Deterministic generators for grids, potentials, frames, and states.

Random draws are seeded and resolution independent: only spectral
coefficients are drawn, never grid samples, so refining the grid samples
the same underlying function.  Amplitude arguments rescale fields against
a fixed fine reference grid for the same reason.
"""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraSpec, Family, exp_map, signature_matrix
from .fields import Grid, MatrixField
from .gauge import PotentialState
from .orbit import (
    FramedState,
    OrbitState,
    frame_closure_defect,
    frame_from_potential,
    gauge_fix_frame,
    orbit_from_frame,
)
from .reductions import Geometry, SpinField, s_to_phi

_REFERENCE_POINTS = 2048


def _reference_x(length: float) -> np.ndarray:
    return np.linspace(0.0, length, _REFERENCE_POINTS, endpoint=False)


def _trig_sum(x, length, cos_c, sin_c):
    wave = 2.0 * np.pi / length
    out = np.zeros((x.shape[0],) + cos_c.shape[1:], dtype=cos_c.dtype)
    for m in range(1, cos_c.shape[0] + 1):
        out += np.cos(m * wave * x)[:, None, None] * cos_c[m - 1]
        out += np.sin(m * wave * x)[:, None, None] * sin_c[m - 1]
    return out


def _spectral_coeffs(rng, modes, rows, cols, complex_valued):
    # weight ~ m^-4 keeps high stencil derivatives of the samples small
    shape = (modes, rows, cols)
    cos_c = rng.standard_normal(shape)
    sin_c = rng.standard_normal(shape)
    if complex_valued:
        cos_c = cos_c + 1j * rng.standard_normal(shape)
        sin_c = sin_c + 1j * rng.standard_normal(shape)
    weights = np.array([1.0 / m**4 for m in range(1, modes + 1)])
    cos_c = cos_c * weights[:, None, None]
    sin_c = sin_c * weights[:, None, None]
    return cos_c, sin_c


def _amplitude_scale(length, cos_c, sin_c, amplitude):
    ref = _trig_sum(_reference_x(length), length, cos_c, sin_c)
    peak = float(np.max(np.abs(ref)))
    if peak == 0.0:
        raise ValueError("degenerate spectral draw")
    return amplitude / peak


def _fixed_direction(rng, rows, cols, complex_valued):
    d = rng.standard_normal((rows, cols))
    if complex_valued:
        d = d + 1j * rng.standard_normal((rows, cols))
    return d / np.max(np.abs(d))


def random_smooth_potential(
    spec: AlgebraSpec,
    grid: Grid,
    seed: int = 0,
    modes: int = 3,
    amplitude: float = 0.3,
) -> PotentialState:
    """Potential of the form q(x) = f(x) Q with a real zero-mean profile f
    and a fixed random direction matrix Q.

    Every value of the assembled coefficient field is then a multiple of a
    single matrix, so the frame integral telescopes and closes up over the
    period.  A generic matrix-valued draw would instead leave holonomy in
    the frame, and every wrap-around difference of it would be garbage.
    """
    rng = np.random.default_rng(seed)
    rows, cols = spec.k, spec.n - spec.k
    cos_c, sin_c = _spectral_coeffs(rng, modes, 1, 1, False)
    scale = _amplitude_scale(grid.length, cos_c, sin_c, 1.0)
    profile = scale * _trig_sum(grid.x, grid.length, cos_c, sin_c)[:, 0, 0]
    qdir = _fixed_direction(rng, rows, cols, spec.family.is_unitary)
    q = amplitude * profile[:, None, None] * qdir
    if spec.family.is_unitary:
        return PotentialState.from_q(spec, grid, q)
    rdir = _fixed_direction(rng, cols, rows, False)
    r = amplitude * profile[:, None, None] * rdir
    return PotentialState(spec, grid, q, r)


def _periodized_bump(x, length, center, width):
    # demeaned analytically, so the profile integrates to zero at any N
    env = np.full_like(x, -np.sqrt(2.0 * np.pi) * width / length)
    for image in (-1.0, 0.0, 1.0):
        env += np.exp(-((x - center - image * length) ** 2) / (2.0 * width**2))
    return env


def _leading_entry_potential(spec: AlgebraSpec, grid: Grid, env: np.ndarray) -> PotentialState:
    rows, cols = spec.k, spec.n - spec.k
    q = np.zeros((grid.num_points, rows, cols), dtype=np.complex128)
    q[:, 0, 0] = env
    if spec.family.is_unitary:
        return PotentialState.from_q(spec, grid, q)
    r = np.zeros((grid.num_points, cols, rows), dtype=np.complex128)
    r[:, 0, 0] = -env
    return PotentialState(spec, grid, q, r)


def _peak_normalized(env_of, length, amplitude):
    peak = float(np.max(np.abs(env_of(_reference_x(length)))))
    if peak == 0.0:
        raise ValueError("degenerate envelope")
    return lambda x: (amplitude / peak) * env_of(x)


def gaussian_bump_potential(
    spec: AlgebraSpec,
    grid: Grid,
    amplitude: float = 0.3,
    width: float | None = None,
    center: float | None = None,
) -> PotentialState:
    """Localized pulse in the leading entry over a uniform negative offset
    that cancels its mean, periodized over three images."""
    length = grid.length
    width = length / 10.0 if width is None else float(width)
    center = length / 2.0 if center is None else float(center)
    env = _peak_normalized(
        lambda x: _periodized_bump(x, length, center, width), length, amplitude
    )
    return _leading_entry_potential(spec, grid, env(grid.x))


def two_bump_potential(
    spec: AlgebraSpec,
    grid: Grid,
    amplitude: float = 0.3,
    width: float | None = None,
    separation: float | None = None,
) -> PotentialState:
    """Pair of pulses at different sites in the leading entry, the second
    slightly weaker, over the offset that cancels their combined mean."""
    length = grid.length
    width = length / 12.0 if width is None else float(width)
    separation = length / 3.0 if separation is None else float(separation)
    c1 = (length - separation) / 2.0
    c2 = (length + separation) / 2.0
    env = _peak_normalized(
        lambda x: _periodized_bump(x, length, c1, width)
        + 0.7 * _periodized_bump(x, length, c2, width),
        length,
        amplitude,
    )
    return _leading_entry_potential(spec, grid, env(grid.x))


def plane_wave_potential(
    spec: AlgebraSpec,
    grid: Grid,
    amplitude: float = 0.3,
    mode: int = 1,
) -> PotentialState:
    """Single-harmonic standing profile in the leading entry."""
    if mode == 0:
        raise ValueError("mode must be nonzero")
    wave = 2.0 * np.pi * mode / grid.length
    return _leading_entry_potential(spec, grid, amplitude * np.cos(wave * grid.x))


def random_tangent_field(
    spec: AlgebraSpec,
    grid: Grid,
    seed: int = 0,
    modes: int = 2,
    amplitude: float = 0.2,
) -> np.ndarray:
    """Smooth periodic field of algebra elements, peak entry at the stated
    amplitude.  Used both as frame generators and as variation directions."""
    rng = np.random.default_rng(seed)
    n = spec.n
    cos_c, sin_c = _spectral_coeffs(rng, modes, n, n, spec.family.is_unitary)

    def project(values):
        if spec.family is Family.COMPACT_UNITARY:
            return 0.5 * (values - values.conj().swapaxes(-1, -2))
        if spec.family is Family.NONCOMPACT_UNITARY:
            j = signature_matrix(spec)
            return 0.5 * (values - j @ values.conj().swapaxes(-1, -2) @ j)
        return values.astype(np.complex128)

    ref = project(_trig_sum(_reference_x(grid.length), grid.length, cos_c, sin_c))
    peak = float(np.max(np.abs(ref)))
    if peak == 0.0:
        raise ValueError("degenerate spectral draw")
    raw = project(_trig_sum(grid.x, grid.length, cos_c, sin_c))
    return (amplitude / peak) * raw


def random_frame_state(
    spec: AlgebraSpec,
    grid: Grid,
    seed: int = 0,
    modes: int = 2,
    amplitude: float = 0.2,
) -> FramedState:
    """Random periodic frame with a block-off-diagonal potential.

    A frame is first built pointwise as the exponential of a random
    tangent field, which makes it exactly periodic, then rotated into the
    gauge whose connection has no block-diagonal part.
    """
    xi = random_tangent_field(spec, grid, seed=seed, modes=modes, amplitude=amplitude)
    return gauge_fix_frame(spec, MatrixField(grid, exp_map(xi)))


def random_orbit_state(
    spec: AlgebraSpec,
    grid: Grid,
    seed: int = 0,
    modes: int = 2,
    amplitude: float = 0.2,
) -> OrbitState:
    return orbit_from_frame(random_frame_state(spec, grid, seed, modes, amplitude))


def latitude_circle_state(grid: Grid, mode: int = 8, height: float = 0.65) -> OrbitState:
    """Helical circle at fixed height on the sphere, mapped to the compact
    rank-one orbit.  The induced flow is a rigid precession, which makes
    the state a sharp probe of time-integration error."""
    if not -1.0 < height < 1.0:
        raise ValueError("height must lie strictly between -1 and 1")
    radius = np.sqrt(1.0 - height * height)
    wave = 2.0 * np.pi * mode / grid.length
    s = np.empty((grid.num_points, 3))
    s[:, 0] = radius * np.cos(wave * grid.x)
    s[:, 1] = radius * np.sin(wave * grid.x)
    s[:, 2] = height
    return s_to_phi(SpinField(Geometry.SPHERE, grid, s))


def state_from_potential(
    ps: PotentialState,
    e0: np.ndarray | None = None,
    closure_tol: float | None = 1e-2,
) -> OrbitState:
    """Integrate the frame across the grid and conjugate the base point.

    The resulting samples only represent a periodic field when the frame
    closes up over one period, so a closure defect above the tolerance is
    rejected.  Pass None to skip the guard.
    """
    fs = frame_from_potential(ps.spec, ps.assemble(), e0=e0, time=ps.time)
    if closure_tol is not None:
        defect = frame_closure_defect(ps.spec, fs)
        if defect > closure_tol:
            raise ValueError(
                f"potential carries holonomy: frame closure defect {defect:.3e} "
                f"exceeds {closure_tol:.1e}"
            )
    return orbit_from_frame(fs)


_POTENTIAL_GENERATORS = {
    "random_smooth": random_smooth_potential,
    "gaussian_bump": gaussian_bump_potential,
    "two_bump": two_bump_potential,
    "plane_wave": plane_wave_potential,
}


def make_initial_potential(spec: AlgebraSpec, grid: Grid, config: dict) -> PotentialState:
    """Build a starting potential; the generator must be one of the
    potential-valued kinds."""
    options = dict(config)
    name = options.pop("generator", None)
    if name not in _POTENTIAL_GENERATORS:
        raise ValueError(
            f"generator {name!r} does not produce a potential; "
            f"choose one of {sorted(_POTENTIAL_GENERATORS)}"
        )
    try:
        return _POTENTIAL_GENERATORS[name](spec, grid, **options)
    except TypeError as exc:
        raise ValueError(f"bad options for generator '{name}': {exc}") from None


def make_initial_state(spec: AlgebraSpec, grid: Grid, config: dict) -> OrbitState:
    """Build a starting state from a generator name plus keyword options."""
    options = dict(config)
    name = options.pop("generator", None)
    if name in _POTENTIAL_GENERATORS:
        builder = _POTENTIAL_GENERATORS[name]
        try:
            return state_from_potential(builder(spec, grid, **options))
        except TypeError as exc:
            raise ValueError(f"bad options for generator '{name}': {exc}") from None
    if name == "random_frame":
        try:
            return random_orbit_state(spec, grid, **options)
        except TypeError as exc:
            raise ValueError(f"bad options for generator '{name}': {exc}") from None
    if name == "latitude_circle":
        if spec.family is not Family.COMPACT_UNITARY or (spec.n, spec.k) != (2, 1):
            raise ValueError("latitude_circle needs the compact rank-one algebra on n = 2")
        try:
            return latitude_circle_state(grid, **options)
        except TypeError as exc:
            raise ValueError(f"bad options for generator '{name}': {exc}") from None
    known = sorted([*_POTENTIAL_GENERATORS, "random_frame", "latitude_circle"])
    raise ValueError(f"unknown generator {name!r}; choose one of {known}")


GENERATOR_NAMES = tuple(sorted([*_POTENTIAL_GENERATORS, "random_frame", "latitude_circle"]))
