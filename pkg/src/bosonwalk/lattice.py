"""Periodic cubic-lattice states, wave packets, and walk evolution.

States live on an n^3 periodic lattice with a 6-component internal space,
stored as arrays of shape (n, n, n, 6) in either the position or the
momentum basis.  The bases are related by the unitary FFT pair
(numpy norm="ortho"); the momentum index m along each axis carries the
reduced momentum kappa = 2 pi m / n wrapped into (-pi, pi].

One walk step shifts the plus/zero/minus projector components of each
axis by +1/0/-1 sites, applying the axis factors in the order z, then y,
then x; in momentum space the same step is the per-mode unitary
`kernel.kernel_grid`.  Both routes are implemented and agree to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import Axis, build_projectors
from .errors import (
    BasisMismatchError,
    PacketSpecError,
    UndefinedCentroidError,
)
from .kernel import (
    GroupVelocity,
    ReducedMomentum,
    branch_projector_grids,
    kernel_grid,
    positive_energy_vector,
    velocity_grid,
)

POSITION = "position"
MOMENTUM = "momentum"

_TRIPLES = tuple(build_projectors(a) for a in Axis)


@dataclass(frozen=True)
class Lattice:
    """A periodic cubic lattice with an even number of sites per axis."""

    n: int

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError(f"lattice size must be even and >= 4, got {self.n}")

    @property
    def sites(self) -> int:
        return self.n**3

    def mode_values(self) -> np.ndarray:
        """Reduced momentum carried by each FFT index, wrapped to (-pi, pi]."""
        m = np.arange(self.n)
        wrapped = np.where(m <= self.n // 2, m, m - self.n)
        return 2.0 * np.pi * wrapped / self.n

    def mode_grids(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        k = self.mode_values()
        return tuple(np.meshgrid(k, k, k, indexing="ij"))


@dataclass
class LatticeState:
    """A normalized 6-component field over the lattice, in a named basis."""

    lattice: Lattice
    basis: str
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.basis not in (POSITION, MOMENTUM):
            raise ValueError(f"unknown basis {self.basis!r}")
        expected = (self.lattice.n,) * 3 + (6,)
        if self.amplitudes.shape != expected:
            raise ValueError(
                f"amplitude shape {self.amplitudes.shape} != {expected}")
        nrm = self.norm()
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"state norm {nrm!r} is not 1")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def copy(self) -> "LatticeState":
        return LatticeState(self.lattice, self.basis, self.amplitudes.copy())


def random_state(lattice: Lattice, rng: np.random.Generator,
                 basis: str = POSITION) -> LatticeState:
    """A normalized state with iid complex Gaussian amplitudes."""
    shape = (lattice.n,) * 3 + (6,)
    amp = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    amp /= np.sqrt(np.sum(np.abs(amp) ** 2))
    return LatticeState(lattice, basis, amp)


def to_momentum(state: LatticeState) -> LatticeState:
    """Unitary transform position -> momentum basis."""
    if state.basis != POSITION:
        raise BasisMismatchError("to_momentum expects a position-basis state")
    amp = np.fft.fftn(state.amplitudes, axes=(0, 1, 2), norm="ortho")
    return LatticeState(state.lattice, MOMENTUM, amp)


def to_position(state: LatticeState) -> LatticeState:
    """Unitary transform momentum -> position basis."""
    if state.basis != MOMENTUM:
        raise BasisMismatchError("to_position expects a momentum-basis state")
    amp = np.fft.ifftn(state.amplitudes, axes=(0, 1, 2), norm="ortho")
    return LatticeState(state.lattice, POSITION, amp)


def snap_to_grid(k0, n: int) -> ReducedMomentum:
    """Round momentum components to the nearest lattice mode of size n."""
    k = np.asarray(k0, dtype=float)
    modes = np.rint(k * n / (2.0 * np.pi))
    return ReducedMomentum.wrap(*(2.0 * np.pi * modes / n))


@dataclass(frozen=True)
class WavePacketSpec:
    """Parameters of a localized positive-energy wave packet.

    kind "sinc": uniform amplitude over a cube of (width+1)^3 momentum
    modes centred on k0 (width even, snapped to the grid); the position
    profile is a product of Dirichlet kernels.  kind "gaussian": amplitude
    exp(-|k - k0|^2 / (4 sigma^2)) with width = sigma, giving a position
    amplitude of width 1/(2 sigma) sites.

    The internal state is frozen to the positive-energy eigenvector at k0
    (helicity 0: primary branch; 1: mirror branch) unless
    per_mode_internal is set, in which case each mode carries its own
    forward eigenvector.
    """

    kind: str
    k0: tuple[float, float, float]
    x0: tuple[int, int, int]
    width: float
    helicity: int = 0
    per_mode_internal: bool = False

    def __post_init__(self):
        if self.kind not in ("sinc", "gaussian"):
            raise PacketSpecError(f"unknown packet kind {self.kind!r}")
        if self.helicity not in (0, 1):
            raise PacketSpecError(f"helicity must be 0 or 1, got {self.helicity}")
        if len(self.k0) != 3 or len(self.x0) != 3:
            raise PacketSpecError("k0 and x0 must have three components")
        if any(int(c) != c for c in self.x0):
            raise PacketSpecError("x0 components must be integers")
        if self.width <= 0:
            raise PacketSpecError(f"width must be positive, got {self.width}")
        if self.kind == "sinc":
            w = self.width
            if int(w) != w or int(w) % 2 != 0:
                raise PacketSpecError(
                    f"sinc width must be an even integer, got {w}")


def _validate_against_lattice(lattice: Lattice, spec: WavePacketSpec) -> None:
    n = lattice.n
    if spec.kind == "sinc":
        if spec.width + 1 > n / 4:
            raise PacketSpecError(
                f"sinc cube edge {spec.width + 1} exceeds n/4 = {n / 4}")
    else:
        # resolvable on the momentum grid, but still narrow in the zone
        lo, hi = 4.0 * np.pi / n, np.pi / 8.0
        if not lo <= spec.width <= hi:
            raise PacketSpecError(
                f"gaussian sigma {spec.width} outside [{lo:.6g}, {hi:.6g}] for n={n}")


def _per_mode_vectors(kx, ky, kz, helicity: int) -> tuple[np.ndarray, np.ndarray]:
    """Forward eigenvectors per mode, phase-fixed; returns (vectors, bad).

    vectors has shape kx.shape + (6,); bad flags degenerate modes whose
    vector is undefined (their rows are zero).
    """
    branch = branch_projector_grids(kx, ky, kz)[
        "primary" if helicity == 0 else "mirror"]
    fwd = branch["forward"]
    bad = branch["degenerate"]
    norms = np.linalg.norm(np.where(bad[..., None, None], 0.0, fwd), axis=-2)
    col = np.argmax(norms >= 1e-6, axis=-1)
    v = np.take_along_axis(fwd, col[..., None, None], axis=-1)[..., 0]
    v = np.where(bad[..., None], 0.0, v)
    nrm = np.linalg.norm(v, axis=-1)
    v = v / np.where(nrm == 0.0, 1.0, nrm)[..., None]
    # global phase: first component over threshold becomes real positive
    pick = np.zeros(v.shape[:-1], dtype=complex)
    chosen = np.zeros(v.shape[:-1], dtype=bool)
    for i in range(3):
        take = (~chosen) & (np.abs(v[..., i]) > 1e-9)
        pick = np.where(take, v[..., i], pick)
        chosen |= take
    rot = np.where(chosen, np.conj(pick) / np.where(chosen, np.abs(pick), 1.0), 1.0)
    v = v * rot[..., None]
    out_shape = v.shape[:-1] + (6,)
    out = np.zeros(out_shape, dtype=complex)
    offset = 3 if helicity == 0 else 0
    out[..., offset:offset + 3] = v
    return out, bad


def make_wavepacket(lattice: Lattice, spec: WavePacketSpec) -> LatticeState:
    """Construct the packet in the momentum basis, exactly normalized."""
    _validate_against_lattice(lattice, spec)
    n = lattice.n
    kvals = lattice.mode_values()

    if spec.kind == "sinc":
        k0 = snap_to_grid(spec.k0, n)
        half = int(spec.width) // 2
        m0 = np.rint(k0.as_array() * n / (2.0 * np.pi)).astype(int)
        idx = [(m0[a] + np.arange(-half, half + 1)) % n for a in range(3)]
        weights = np.zeros((n, n, n))
        weights[np.ix_(*idx)] = 1.0
    else:
        k0 = ReducedMomentum.wrap(*spec.k0)
        grids = lattice.mode_grids()
        d2 = sum(_wrap_delta_values(g - c) ** 2
                 for g, c in zip(grids, k0.as_array()))
        weights = np.exp(-d2 / (4.0 * spec.width**2))

    kxg, kyg, kzg = lattice.mode_grids()
    x0 = np.asarray(spec.x0, dtype=float)
    plane = np.exp(-1j * (kxg * x0[0] + kyg * x0[1] + kzg * x0[2]))

    if spec.per_mode_internal:
        vectors, bad = _per_mode_vectors(kxg, kyg, kzg, spec.helicity)
        amp = (weights * plane)[..., None] * vectors
        if np.any(bad & (weights > 0)):
            # modes with no forward eigenvector carry no amplitude
            amp[bad] = 0.0
    else:
        u = positive_energy_vector(k0, spec.helicity)
        amp = (weights * plane)[..., None] * u

    nrm = np.sqrt(np.sum(np.abs(amp) ** 2))
    if nrm == 0.0:
        raise PacketSpecError("packet has no support on the momentum grid")
    return LatticeState(lattice, MOMENTUM, amp / nrm)


def _wrap_delta_values(d: np.ndarray) -> np.ndarray:
    """Wrap momentum differences into [-pi, pi) (nearest periodic image)."""
    return (d + np.pi) % (2.0 * np.pi) - np.pi


def _matrix_power_grid(u: np.ndarray, steps: int) -> np.ndarray:
    """Binary-exponentiation power of a grid of 6x6 matrices."""
    result = None
    base = u
    s = steps
    while s > 0:
        if s & 1:
            result = base.copy() if result is None else base @ result
        base = base @ base if s > 1 else base
        s >>= 1
    if result is None:
        eye = np.zeros_like(u)
        eye[...] = np.eye(6)
        return eye
    return result


def evolve_spectral(state: LatticeState, steps: int) -> LatticeState:
    """Advance `steps` walk steps by per-mode unitaries in momentum space.

    Accepts either basis and returns the same basis it was given.
    """
    if steps < 0 or int(steps) != steps:
        raise ValueError(f"steps must be a nonnegative integer, got {steps}")
    came_from_position = state.basis == POSITION
    work = to_momentum(state) if came_from_position else state
    if steps == 0:
        out = work.copy()
    else:
        u = kernel_grid(*state.lattice.mode_grids())
        u_pow = _matrix_power_grid(u, steps)
        amp = np.einsum("xyzab,xyzb->xyza", u_pow, work.amplitudes)
        out = LatticeState(state.lattice, MOMENTUM, amp)
    return to_position(out) if came_from_position else out


def _apply_axis_factor(amp: np.ndarray, axis: int) -> np.ndarray:
    """One axis factor: shift the +/0/- projector components by +1/0/-1."""
    t = _TRIPLES[axis]
    plus = amp @ t.plus.T
    zero = amp @ t.zero.T
    minus = amp @ t.minus.T
    return (np.roll(plus, 1, axis=axis) + zero + np.roll(minus, -1, axis=axis))


def evolve_direct(state: LatticeState, steps: int) -> LatticeState:
    """Advance by explicit projected shifts in position space.

    Applies the axis factors in order z, y, x each step.  Slower than
    evolve_spectral but touches no Fourier transform; serves as the
    independent evolution route.
    """
    if steps < 0 or int(steps) != steps:
        raise ValueError(f"steps must be a nonnegative integer, got {steps}")
    came_from_momentum = state.basis == MOMENTUM
    work = to_position(state) if came_from_momentum else state
    amp = work.amplitudes.copy()
    for _ in range(steps):
        for axis in (2, 1, 0):
            amp = _apply_axis_factor(amp, axis)
    out = LatticeState(state.lattice, POSITION, amp)
    return to_momentum(out) if came_from_momentum else out


def _circular_stats(state: LatticeState):
    """Per-axis circular mean, spread, and resultant of the site probability."""
    n = state.lattice.n
    p = np.sum(np.abs(state.amplitudes) ** 2, axis=-1)
    total = p.sum()
    angles = 2.0 * np.pi * np.arange(n) / n
    phasor = np.exp(1j * angles)
    centroids = np.empty(3)
    spreads = np.empty(3)
    resultants = np.empty(3)
    for axis in range(3):
        marginal = p.sum(axis=tuple(a for a in range(3) if a != axis)) / total
        z = np.sum(marginal * phasor)
        r = min(abs(z), 1.0)
        resultants[axis] = r
        centroids[axis] = (np.angle(z) * n / (2.0 * np.pi)) % n
        spreads[axis] = (n / (2.0 * np.pi)) * math.sqrt(max(-2.0 * math.log(max(r, 1e-300)), 0.0))
    return centroids, spreads, resultants


def centroid(state: LatticeState) -> np.ndarray:
    """Circular-mean position of the site probability, in [0, n) per axis."""
    if state.basis != POSITION:
        raise BasisMismatchError("centroid expects a position-basis state")
    centroids, _, resultants = _circular_stats(state)
    if np.any(resultants < 1e-6):
        raise UndefinedCentroidError(
            f"circular resultant {resultants.min():.3g} too small along an axis")
    return centroids


@dataclass(frozen=True)
class CentroidTrajectory:
    """Sampled packet trajectory; positions are unwrapped (continuous)."""

    steps: np.ndarray
    positions: np.ndarray  # (samples, 3)
    spreads: np.ndarray    # (samples, 3)
    norms: np.ndarray      # (samples,)


@dataclass(frozen=True)
class MeasuredVelocity:
    velocity: GroupVelocity
    fit_residual: float
    trajectory: CentroidTrajectory


def measure_group_velocity(lattice: Lattice, spec: WavePacketSpec,
                           steps: int, sample_every: int = 1) -> MeasuredVelocity:
    """Propagate a packet and fit its centroid drift per step.

    The packet evolves spectrally; every `sample_every` steps the centroid
    is recorded, unwrapped against the previous sample (valid because the
    per-sample displacement is below n/2 sites), and a least-squares line
    per axis gives the velocity.  fit_residual is the RMS of the fit
    residuals over all samples and axes, in sites.
    """
    if sample_every < 1 or int(sample_every) != sample_every:
        raise ValueError(f"sample_every must be a positive integer, got {sample_every}")
    if sample_every >= lattice.n / 2:
        raise ValueError(
            f"sample_every {sample_every} >= n/2 breaks trajectory unwrapping")
    if steps < sample_every:
        raise ValueError("need at least one sampling interval")

    state = make_wavepacket(lattice, spec)
    u = kernel_grid(*lattice.mode_grids())
    u_sample = _matrix_power_grid(u, sample_every)

    sample_steps = list(range(0, steps + 1, sample_every))
    positions = np.empty((len(sample_steps), 3))
    spreads = np.empty((len(sample_steps), 3))
    norms = np.empty(len(sample_steps))

    amp = state.amplitudes
    for i, _ in enumerate(sample_steps):
        snapshot = LatticeState(lattice, MOMENTUM, amp)
        pos_state = to_position(snapshot)
        c, s, r = _circular_stats(pos_state)
        if np.any(r < 1e-6):
            raise UndefinedCentroidError(
                "packet spread out too far for a defined centroid")
        positions[i] = c
        spreads[i] = s
        norms[i] = snapshot.norm()
        if i + 1 < len(sample_steps):
            amp = np.einsum("xyzab,xyzb->xyza", u_sample, amp)

    n = lattice.n
    unwrapped = positions.copy()
    for i in range(1, len(sample_steps)):
        delta = (positions[i] - positions[i - 1] + n / 2) % n - n / 2
        unwrapped[i] = unwrapped[i - 1] + delta

    t = np.asarray(sample_steps, dtype=float)
    slopes = np.empty(3)
    residuals = []
    for axis in range(3):
        coeffs = np.polyfit(t, unwrapped[:, axis], 1)
        slopes[axis] = coeffs[0]
        residuals.append(unwrapped[:, axis] - np.polyval(coeffs, t))
    fit_residual = float(np.sqrt(np.mean(np.concatenate(residuals) ** 2)))

    trajectory = CentroidTrajectory(
        steps=np.asarray(sample_steps), positions=unwrapped,
        spreads=spreads, norms=norms)
    return MeasuredVelocity(GroupVelocity(*slopes), fit_residual, trajectory)


def project_to_branch(state: LatticeState, helicity: int = 0) -> LatticeState:
    """Project onto the forward eigenspace of one branch and renormalize.

    The result is an exact mixture of positive-phase eigenmodes, so its
    centroid drifts exactly linearly at the mode-weighted group velocity.
    Modes with a degenerate spectrum are dropped (they carry no defined
    forward eigenvector).
    """
    if helicity not in (0, 1):
        raise PacketSpecError(f"helicity must be 0 or 1, got {helicity}")
    came_from_position = state.basis == POSITION
    work = to_momentum(state) if came_from_position else state
    lattice = state.lattice
    branch = branch_projector_grids(*lattice.mode_grids())[
        "primary" if helicity == 0 else "mirror"]
    offset = 3 if helicity == 0 else 0
    block = np.einsum("xyzab,xyzb->xyza", branch["forward"],
                      work.amplitudes[..., offset:offset + 3])
    block[branch["degenerate"]] = 0.0
    amp = np.zeros_like(work.amplitudes)
    amp[..., offset:offset + 3] = block
    nrm = np.sqrt(np.sum(np.abs(amp) ** 2))
    if nrm == 0.0:
        raise PacketSpecError("state has no overlap with the forward eigenspace")
    out = LatticeState(lattice, MOMENTUM, amp / nrm)
    return to_position(out) if came_from_position else out


def predicted_state_velocity(state: LatticeState) -> np.ndarray:
    """Branch-resolved expectation of the centroid velocity of any state.

    Decomposes the state per mode onto the six exact eigenmodes and sums
    eigenmode weights times eigenmode velocities: forward modes move at
    the branch group velocity, backward modes at its negative, stationary
    modes not at all.  Degenerate modes are excluded from the sum.
    """
    work = to_momentum(state) if state.basis == POSITION else state
    lattice = state.lattice
    kx, ky, kz = lattice.mode_grids()
    branches = branch_projector_grids(kx, ky, kz)

    vxp, vyp, vzp, _, _ = velocity_grid(kx, ky, kz)
    vxm, vym, vzm, _, _ = velocity_grid(-kx, -ky, -kz)
    v_primary = np.stack([vxp, vyp, vzp], axis=-1)
    # the mirror phase at kappa equals the primary phase at -kappa
    v_mirror = -np.stack([vxm, vym, vzm], axis=-1)

    amp = work.amplitudes
    total = np.zeros(3)
    for name, v_branch, offset in (("primary", v_primary, 3), ("mirror", v_mirror, 0)):
        b = branches[name]
        block = amp[..., offset:offset + 3]
        usable = ~(b["degenerate"] | np.isnan(v_branch).any(axis=-1))
        v_safe = np.where(usable[..., None], v_branch, 0.0)
        for mode_key, sign in (("forward", 1.0), ("backward", -1.0)):
            w = np.real(np.einsum("xyza,xyzab,xyzb->xyz",
                                  block.conj(), b[mode_key], block))
            w = np.where(usable, w, 0.0)
            total += sign * np.einsum("xyz,xyzc->c", w, v_safe)
    return total


def predicted_packet_velocity(lattice: Lattice, spec: WavePacketSpec) -> np.ndarray:
    """predicted_state_velocity of the freshly constructed packet.

    This is what the measured centroid drift converges to; it differs
    from the single-mode group velocity at k0 by the momentum spread of
    the packet.
    """
    return predicted_state_velocity(make_wavepacket(lattice, spec))
