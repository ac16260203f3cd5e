"""Single-mode form of the walk step and its closed-form dispersion.

In momentum space the step factorizes per mode: a reduced momentum
kappa = (kx, ky, kz) in (-pi, pi]^3 evolves by the 6x6 unitary

    U(kappa) = exp(-i kx G_x) exp(-i ky G_y) exp(-i kz G_z)

with the block generators of `algebra`.  U is block diagonal: each
3-component half undergoes a real rotation, and each rotation contributes
one forward mode exp(-i phi), one stationary mode, and one backward mode
exp(+i phi).

The two blocks rotate by slightly different angles,

    phase(kappa)        = arccos((cx cy + cx cz + cy cz + sx sy sz - 1)/2)
    mirror_phase(kappa) = phase(-kappa)      (same with  - sx sy sz),

so away from the coordinate planes the forward eigenvalues of the two
helicity branches split by O(|kappa|^3).  They coincide exactly whenever
some momentum component is 0 or pi.  All closed-form velocity and
deviation formulas below describe the phase(kappa) branch; the mirror
branch obeys the same formulas with kappa -> -kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import Axis, build_gamma
from .errors import (
    ArgumentOutOfRangeError,
    DegenerateSpectrumError,
    SeriesOutOfRangeError,
    ZeroMomentumError,
)

PHASE_CLAMP_WINDOW = 1e-12
DEGENERACY_MARGIN = 1e-9

_GAMMA = tuple(build_gamma(a) for a in Axis)
_I6 = np.eye(6, dtype=complex)


@dataclass(frozen=True)
class ReducedMomentum:
    """A momentum point in the reduced zone (-pi, pi]^3."""

    kx: float
    ky: float
    kz: float

    @classmethod
    def wrap(cls, kx: float, ky: float, kz: float) -> "ReducedMomentum":
        """Wrap arbitrary momentum components into (-pi, pi]."""
        return cls(*(_wrap_component(v) for v in (kx, ky, kz)))

    def as_array(self) -> np.ndarray:
        return np.array([self.kx, self.ky, self.kz], dtype=float)

    def norm(self) -> float:
        return math.sqrt(self.kx**2 + self.ky**2 + self.kz**2)


def _wrap_component(v: float) -> float:
    w = math.remainder(v, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


def _components(kappa) -> np.ndarray:
    if isinstance(kappa, ReducedMomentum):
        return kappa.as_array()
    arr = np.asarray(kappa, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected 3 momentum components, got shape {arr.shape}")
    return arr


def _rotation_blocks(cx, cy, cz, sx, sy, sz):
    """Return the two 3x3 rotation blocks, broadcasting over array inputs.

    The first (upper) block is the mirror branch, the second (lower) the
    primary branch carrying phase(kappa).
    """
    upper = np.stack([
        np.stack([cy * cz, -cy * sz, sy + 0 * cx], axis=-1),
        np.stack([cz * sx * sy + cx * sz, cx * cz - sx * sy * sz, -cy * sx], axis=-1),
        np.stack([-cx * cz * sy + sx * sz, cz * sx + cx * sy * sz, cx * cy], axis=-1),
    ], axis=-2)
    lower = np.stack([
        np.stack([cy * cz, cy * sz, -sy + 0 * cx], axis=-1),
        np.stack([cz * sx * sy - cx * sz, cx * cz + sx * sy * sz, cy * sx], axis=-1),
        np.stack([cx * cz * sy + sx * sz, -cz * sx + cx * sy * sz, cx * cy], axis=-1),
    ], axis=-2)
    return upper, lower


def kernel_closed_form(kappa) -> np.ndarray:
    """The 6x6 step unitary assembled from its closed-form entries."""
    kx, ky, kz = _components(kappa)
    cx, cy, cz = math.cos(kx), math.cos(ky), math.cos(kz)
    sx, sy, sz = math.sin(kx), math.sin(ky), math.sin(kz)
    upper, lower = _rotation_blocks(cx, cy, cz, sx, sy, sz)
    u = np.zeros((6, 6), dtype=complex)
    u[:3, :3] = upper
    u[3:, 3:] = lower
    return u


def _axis_factor(axis: int, theta: float) -> np.ndarray:
    # exp(-i theta G) = I - i G sin(theta) + G^2 (cos(theta) - 1), since G^3 = G.
    g = _GAMMA[axis]
    return _I6 - 1j * math.sin(theta) * g + (math.cos(theta) - 1.0) * (g @ g)


def kernel_exponential(kappa) -> np.ndarray:
    """The step unitary as a product of three single-axis exponentials."""
    kx, ky, kz = _components(kappa)
    return _axis_factor(0, kx) @ _axis_factor(1, ky) @ _axis_factor(2, kz)


def _versine_args(kx, ky, kz):
    """1 - cos of the (primary, mirror) branch angles; broadcasts.

    The direct cosine sum loses the low bits of small angles to
    cancellation (absolute error ~eps/|kappa| after the arccos), so the
    argument is assembled from half-angle versines 1 - cos k = 2 sin^2(k/2),
    which keeps full relative accuracy down to the zone centre.
    """
    wa = 2.0 * np.sin(0.5 * np.asarray(kx, float)) ** 2
    wb = 2.0 * np.sin(0.5 * np.asarray(ky, float)) ** 2
    wc = 2.0 * np.sin(0.5 * np.asarray(kz, float)) ** 2
    odd = np.sin(kx) * np.sin(ky) * np.sin(kz)
    even = wa + wb + wc - 0.5 * (wa * wb + wa * wc + wb * wc)
    return even - 0.5 * odd, even + 0.5 * odd


def _arccos_one_minus(y):
    """arccos(1 - y) for y in [0, 2], accurate at both endpoints."""
    y = np.clip(y, 0.0, 2.0)
    return np.where(
        y <= 1.0,
        2.0 * np.arcsin(np.sqrt(0.5 * y)),
        np.pi - 2.0 * np.arcsin(np.sqrt(0.5 * (2.0 - y))))


def _checked_phase(y: float, clamp_tol: float) -> float:
    if y < -clamp_tol or y > 2.0 + clamp_tol:
        raise ArgumentOutOfRangeError(
            f"cosine argument {1.0 - y!r} outside [-1, 1] by more "
            f"than {clamp_tol}")
    y = min(2.0, max(0.0, y))
    if y <= 1.0:
        return 2.0 * math.asin(math.sqrt(0.5 * y))
    return math.pi - 2.0 * math.asin(math.sqrt(0.5 * (2.0 - y)))


def _on_axis_magnitude(kx: float, ky: float, kz: float):
    """|kappa| if at most one component is nonzero, else None.

    Both branch phases reduce to exactly |kappa| there, so the axis case
    skips the trigonometric round trip entirely.
    """
    if sum(1 for c in (kx, ky, kz) if c == 0.0) >= 2:
        return float(abs(kx + ky + kz))
    return None


def phase(kappa, clamp_tol: float = PHASE_CLAMP_WINDOW) -> float:
    """Per-step phase of the primary forward branch, in [0, pi].

    Plays the role of energy x time step.  Exact eigenphase of U(kappa):
    exp(-i phase) is an eigenvalue carried by the lower block.  Exact on
    the coordinate axes.
    """
    kx, ky, kz = _components(kappa)
    axis = _on_axis_magnitude(kx, ky, kz)
    if axis is not None:
        return axis
    primary, _ = _versine_args(kx, ky, kz)
    return _checked_phase(float(primary), clamp_tol)


def mirror_phase(kappa, clamp_tol: float = PHASE_CLAMP_WINDOW) -> float:
    """Per-step phase of the second forward branch; equals phase(-kappa)."""
    kx, ky, kz = _components(kappa)
    axis = _on_axis_magnitude(kx, ky, kz)
    if axis is not None:
        return axis
    _, mirror = _versine_args(kx, ky, kz)
    return _checked_phase(float(mirror), clamp_tol)


def _require_nondegenerate(phi: float, label: str) -> None:
    if min(phi, math.pi - phi) < DEGENERACY_MARGIN:
        raise DegenerateSpectrumError(
            f"{label} = {phi!r} is within {DEGENERACY_MARGIN} of 0 or pi; "
            "forward/backward modes merge there")


@dataclass(frozen=True)
class BranchModes:
    """Rank-1 spectral pieces of one 3-component block of U(kappa).

    forward, axis, backward are 3x3 projectors on the eigenvalues
    exp(-i phase), 1, exp(+i phase) of this block's rotation; offset
    locates the block inside the 6-component internal space.
    """

    name: str
    phase: float
    offset: int  # 0: upper block (mirror), 3: lower block (primary)
    forward: np.ndarray
    axis: np.ndarray
    backward: np.ndarray


def _block_lagrange(block: np.ndarray, phi: float):
    """Three-point Lagrange projectors of a 3x3 rotation with angle phi."""
    em = complex(math.cos(phi), -math.sin(phi))
    ep = em.conjugate()
    eye = np.eye(3)
    b = block.astype(complex)
    forward = (b - eye) @ (b - ep * eye) / ((em - 1.0) * (em - ep))
    axis = (b - em * eye) @ (b - ep * eye) / ((1.0 - em) * (1.0 - ep))
    backward = (b - eye) @ (b - em * eye) / ((ep - 1.0) * (ep - em))
    return forward, axis, backward


def _embed(block_matrix: np.ndarray, offset: int) -> np.ndarray:
    out = np.zeros((6, 6), dtype=complex)
    out[offset:offset + 3, offset:offset + 3] = block_matrix
    return out


def branch_decomposition(kappa) -> tuple[BranchModes, BranchModes]:
    """Exact spectral split of U(kappa) into its two rotation branches.

    Returns (primary, mirror).  Raises DegenerateSpectrumError if either
    branch angle sits within the margin of 0 or pi, where its circular
    modes merge.
    """
    kx, ky, kz = _components(kappa)
    cx, cy, cz = math.cos(kx), math.cos(ky), math.cos(kz)
    sx, sy, sz = math.sin(kx), math.sin(ky), math.sin(kz)
    upper, lower = _rotation_blocks(cx, cy, cz, sx, sy, sz)
    phi_primary = phase(kappa)
    phi_mirror = mirror_phase(kappa)
    _require_nondegenerate(phi_primary, "phase")
    _require_nondegenerate(phi_mirror, "mirror phase")
    primary = BranchModes("primary", phi_primary, 3,
                          *_block_lagrange(lower, phi_primary))
    mirror = BranchModes("mirror", phi_mirror, 0,
                         *_block_lagrange(upper, phi_mirror))
    return primary, mirror


@dataclass(frozen=True)
class ModeDecomposition:
    """Spectral data of U(kappa) grouped by propagation direction.

    projector_plus/zero/minus are exact rank-2 projectors onto the two
    forward modes, the two stationary modes, and the two backward modes.
    The forward eigenvalues are exp(-i phase) and exp(-i mirror_phase);
    `splitting` is their distance and `reconstruction_residual` the error
    of compressing U to the three eigenvalues {exp(-i phase), 1,
    exp(+i phase)} alone.  Both vanish on the coordinate planes.
    """

    phase: float
    mirror_phase: float
    eigenvalues: np.ndarray
    projector_plus: np.ndarray
    projector_zero: np.ndarray
    projector_minus: np.ndarray
    splitting: float
    reconstruction_residual: float


def mode_decomposition(kappa) -> ModeDecomposition:
    """Group the six exact modes of U(kappa) into forward/zero/backward."""
    primary, mirror = branch_decomposition(kappa)
    p_plus = _embed(primary.forward, 3) + _embed(mirror.forward, 0)
    p_zero = _embed(primary.axis, 3) + _embed(mirror.axis, 0)
    p_minus = _embed(primary.backward, 3) + _embed(mirror.backward, 0)
    lam_p = complex(math.cos(primary.phase), -math.sin(primary.phase))
    lam_m = complex(math.cos(mirror.phase), -math.sin(mirror.phase))
    eigenvalues = np.array([
        lam_p, lam_m, 1.0, 1.0, lam_m.conjugate(), lam_p.conjugate(),
    ])
    u = kernel_closed_form(kappa)
    compressed = lam_p * p_plus + p_zero + lam_p.conjugate() * p_minus
    return ModeDecomposition(
        phase=primary.phase,
        mirror_phase=mirror.phase,
        eigenvalues=eigenvalues,
        projector_plus=p_plus,
        projector_zero=p_zero,
        projector_minus=p_minus,
        splitting=abs(lam_p - lam_m),
        reconstruction_residual=float(np.abs(u - compressed).max()),
    )


def positive_energy_vector(kappa, helicity_index: int = 0) -> np.ndarray:
    """Deterministic unit eigenvector of a forward mode of U(kappa).

    helicity_index 0 returns the primary-branch vector (eigenvalue
    exp(-i phase(kappa)), lower block); helicity_index 1 the mirror-branch
    vector (eigenvalue exp(-i mirror_phase(kappa)), upper block).  The two
    are orthonormal.  Construction: apply the branch's forward projector
    to that block's canonical basis vectors in order, keep the first image
    with norm >= 1e-6, normalize, and fix the global phase so the first
    nonzero component is real positive.
    """
    if helicity_index not in (0, 1):
        raise ArgumentOutOfRangeError("helicity_index must be 0 or 1")
    primary, mirror = branch_decomposition(kappa)
    branch = primary if helicity_index == 0 else mirror
    for col in range(3):
        v = branch.forward[:, col].copy()
        nrm = np.linalg.norm(v)
        if nrm >= 1e-6:
            v /= nrm
            for comp in v:
                if abs(comp) > 1e-9:
                    v *= comp.conjugate() / abs(comp)
                    break
            out = np.zeros(6, dtype=complex)
            out[branch.offset:branch.offset + 3] = v
            return out
    raise DegenerateSpectrumError(
        "forward projector annihilated every canonical basis vector")


@dataclass(frozen=True)
class GroupVelocity:
    """Lattice group velocity in units of the causal speed (sites/step)."""

    vx: float
    vy: float
    vz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.vz])

    @property
    def speed(self) -> float:
        return math.sqrt(self.vx**2 + self.vy**2 + self.vz**2)


def group_velocity_analytic(kappa) -> GroupVelocity:
    """Gradient of phase(kappa) in closed form.

    Exactly (sign(k), 0, 0) and unit speed for axis-aligned momenta.
    Raises DegenerateSpectrumError where the dispersion cone is singular.
    """
    kx, ky, kz = _components(kappa)
    cx, cy, cz = math.cos(kx), math.cos(ky), math.cos(kz)
    sx, sy, sz = math.sin(kx), math.sin(ky), math.sin(kz)
    # 2 sin(phase) in versine form; the equivalent 4 - arg^2 cancels badly
    # near the cone tip
    y, _ = _versine_args(kx, ky, kz)
    den_sq = 4.0 * float(y) * (2.0 - float(y))
    if den_sq < DEGENERACY_MARGIN**2:
        raise DegenerateSpectrumError(
            f"group velocity undefined: 4 sin^2(phase) = {den_sq!r} "
            "at the band edge")
    zeros = [c == 0.0 for c in (kx, ky, kz)]
    if sum(zeros) == 2:
        # along an axis the gradient is exactly the signed unit vector
        comps = [0.0, 0.0, 0.0]
        axis = zeros.index(False)
        comps[axis] = math.copysign(1.0, (sx, sy, sz)[axis])
        return GroupVelocity(*comps)
    den = math.sqrt(den_sq)
    return GroupVelocity(
        vx=(sx * (cy + cz) - cx * sy * sz) / den,
        vy=(sy * (cx + cz) - sx * cy * sz) / den,
        vz=(sz * (cx + cy) - sx * sy * cz) / den,
    )


def group_velocity_numeric(kappa, step: float = 1e-6) -> GroupVelocity:
    """Central-difference gradient of phase(kappa), for cross-checking."""
    if not 1e-8 <= step <= 1e-2:
        raise ArgumentOutOfRangeError(f"step {step!r} outside [1e-8, 1e-2]")
    k = _components(kappa)
    comps = []
    for i in range(3):
        delta = np.zeros(3)
        delta[i] = step
        comps.append((phase(k + delta) - phase(k - delta)) / (2.0 * step))
    return GroupVelocity(*comps)


def speed_deviation_series(kappa) -> float:
    """Leading relative deviation of the primary-branch speed from 1.

    |v_g| = 1 - kx ky kz / |kappa|^2 + O(|kappa|^2); returns the correction
    term.  Zero for momenta in a coordinate plane; extremal along the main
    diagonals at -|kappa|/(3 sqrt(3)).
    """
    k = _components(kappa)
    norm_sq = float(k @ k)
    if norm_sq == 0.0:
        raise ZeroMomentumError("speed deviation series undefined at kappa = 0")
    return float(-(k[0] * k[1] * k[2]) / norm_sq)


def phase_expansion_check(kappa) -> float:
    """Residual of the small-momentum expansion of the phase.

    Computes |phase(kappa) - (|kappa| - kx ky kz / (2 |kappa|))|.  The
    expansion is cubically accurate, so halving |kappa| shrinks the
    residual roughly eightfold.  Valid for 0 < |kappa| <= 0.1.
    """
    k = _components(kappa)
    norm = float(np.linalg.norm(k))
    if norm == 0.0:
        raise ZeroMomentumError("expansion undefined at kappa = 0")
    if norm > 0.1:
        raise SeriesOutOfRangeError(
            f"|kappa| = {norm!r} outside the series window (0, 0.1]")
    series = norm - (k[0] * k[1] * k[2]) / (2.0 * norm)
    return abs(phase(k) - series)


# --- vectorized grid forms (surface export, packet prediction) ---

def phase_grid(kx, ky, kz) -> np.ndarray:
    """phase(kappa) over broadcast momentum arrays (clamped)."""
    primary, _ = _versine_args(kx, ky, kz)
    return _arccos_one_minus(primary)


def mirror_phase_grid(kx, ky, kz) -> np.ndarray:
    _, mirror = _versine_args(kx, ky, kz)
    return _arccos_one_minus(mirror)


def velocity_grid(kx, ky, kz):
    """Vectorized analytic group velocity.

    Returns (vx, vy, vz, speed, degenerate); velocity entries are NaN
    where the denominator falls under the degeneracy margin.
    """
    kx, ky, kz = (np.asarray(a, dtype=float) for a in (kx, ky, kz))
    cx, cy, cz = np.cos(kx), np.cos(ky), np.cos(kz)
    sx, sy, sz = np.sin(kx), np.sin(ky), np.sin(kz)
    y, _ = _versine_args(kx, ky, kz)
    den_sq = 4.0 * y * (2.0 - y)
    degenerate = den_sq < DEGENERACY_MARGIN**2
    den = np.sqrt(np.where(degenerate, 1.0, den_sq))
    vx = np.where(degenerate, np.nan, (sx * (cy + cz) - cx * sy * sz) / den)
    vy = np.where(degenerate, np.nan, (sy * (cx + cz) - sx * cy * sz) / den)
    vz = np.where(degenerate, np.nan, (sz * (cx + cy) - sx * sy * cz) / den)
    speed = np.sqrt(vx * vx + vy * vy + vz * vz)
    return vx, vy, vz, speed, degenerate


def kernel_grid(kx, ky, kz) -> np.ndarray:
    """U(kappa) over broadcast momentum arrays, shape (..., 6, 6)."""
    kx, ky, kz = np.broadcast_arrays(*(np.asarray(a, float) for a in (kx, ky, kz)))
    cx, cy, cz = np.cos(kx), np.cos(ky), np.cos(kz)
    sx, sy, sz = np.sin(kx), np.sin(ky), np.sin(kz)
    upper, lower = _rotation_blocks(cx, cy, cz, sx, sy, sz)
    out = np.zeros(kx.shape + (6, 6), dtype=complex)
    out[..., :3, :3] = upper
    out[..., 3:, 3:] = lower
    return out


def branch_projector_grids(kx, ky, kz):
    """Vectorized forward/axis/backward projectors of both blocks.

    Returns a dict per branch ('primary', 'mirror') with keys 'phase'
    (...,), 'forward'/'axis'/'backward' (..., 3, 3) acting inside the
    branch's own block, and 'degenerate' (...,) flagging modes where the
    branch angle is within the margin of 0 or pi (projectors NaN there).
    """
    kx, ky, kz = np.broadcast_arrays(*(np.asarray(a, float) for a in (kx, ky, kz)))
    cx, cy, cz = np.cos(kx), np.cos(ky), np.cos(kz)
    sx, sy, sz = np.sin(kx), np.sin(ky), np.sin(kz)
    upper, lower = _rotation_blocks(cx, cy, cz, sx, sy, sz)
    y_primary, y_mirror = _versine_args(kx, ky, kz)
    out = {}
    for name, block, y in (("primary", lower, y_primary),
                           ("mirror", upper, y_mirror)):
        phi = _arccos_one_minus(y)
        degenerate = np.minimum(phi, np.pi - phi) < DEGENERACY_MARGIN
        safe_phi = np.where(degenerate, np.pi / 2.0, phi)
        em = np.exp(-1j * safe_phi)[..., None, None]
        ep = np.conj(em)
        eye = np.eye(3)
        b = block.astype(complex)
        forward = (b - eye) @ (b - ep * eye) / ((em - 1.0) * (em - ep))
        axis = (b - em * eye) @ (b - ep * eye) / ((1.0 - em) * (1.0 - ep))
        backward = (b - eye) @ (b - em * eye) / ((ep - 1.0) * (ep - em))
        nan_mask = degenerate[..., None, None]
        out[name] = {
            "phase": phi,
            "forward": np.where(nan_mask, np.nan, forward),
            "axis": np.where(nan_mask, np.nan, axis),
            "backward": np.where(nan_mask, np.nan, backward),
            "degenerate": degenerate,
        }
    return out


def surface_table(resolution: int) -> dict[str, np.ndarray]:
    """Dispersion surface over an inclusive uniform grid of the zone.

    Rows run lexicographically in (kx, ky, kz).  Velocity columns are NaN
    on degenerate points, which the `degenerate` column flags.
    """
    if not 2 <= resolution <= 512:
        raise ArgumentOutOfRangeError(
            f"resolution {resolution!r} outside [2, 512]")
    axis_vals = np.linspace(-math.pi, math.pi, resolution)
    kx, ky, kz = np.meshgrid(axis_vals, axis_vals, axis_vals, indexing="ij")
    kx, ky, kz = kx.ravel(), ky.ravel(), kz.ravel()
    phi = phase_grid(kx, ky, kz)
    vx, vy, vz, speed, degenerate = velocity_grid(kx, ky, kz)
    return {
        "kx": kx, "ky": ky, "kz": kz, "phase": phi,
        "vx": vx, "vy": vy, "vz": vz, "speed": speed,
        "degenerate": degenerate,
    }
