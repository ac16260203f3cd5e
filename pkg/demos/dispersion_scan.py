#!/usr/bin/env python3
"""Scan the walk dispersion: exact axis transport, cubic corrections off axis."""
import numpy as np

from bosonwalk import kernel
from bosonwalk.anisotropy import (
    Direction,
    deviation_for_direction,
    s_factor,
    sphere_stats,
)

np.set_printoptions(precision=6, suppress=True)

# --- phase along an axis is exactly linear (speed 1 in lattice units)
print("axis momenta: phase(m, 0, 0) vs m")
for m in (0.01, 0.3, 1.0, 2.5, np.pi - 0.01):
    print(f"  m = {m:8.5f}   phase = {kernel.phase((m, 0.0, 0.0)):.15f}")

# --- off axis the phase picks up a cubic correction ~ kx ky kz / (2 |k|)
print("\ncubic correction on the diagonal, halving |k| each row")
print("  (residual after subtracting |k| and the cubic term; ratio ~ 8)")
prev = None
for scale in (4e-3, 2e-3, 1e-3, 5e-4):
    k = (scale / np.sqrt(3.0),) * 3
    r = kernel.phase_expansion_check(k)
    ratio = "" if prev is None else f"   ratio {prev / r:6.2f}"
    print(f"  |k| = {scale:.1e}   residual = {r:.3e}{ratio}")
    prev = r

# --- group velocity: unit speed along axes, slower on the body diagonal
print("\ngroup velocity at |k| = 0.05")
for label, nhat in [("axis x   ", (1.0, 0.0, 0.0)),
                    ("face diag", (1.0, 1.0, 0.0)),
                    ("body diag", (1.0, 1.0, 1.0))]:
    nhat = np.asarray(nhat) / np.linalg.norm(nhat)
    v = kernel.group_velocity_analytic(tuple(0.05 * nhat))
    print(f"  {label}   speed = {v.speed:.10f}   v = {v.as_array()}")

# --- the leading speed deviation is -|k| s(theta, phi)
print("\nspeed deviation vs the closed-form direction factor, |k| = 0.02")
rng = np.random.default_rng(7)
for _ in range(4):
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    theta = float(np.arccos(np.clip(u[2], -1, 1)))
    phi = float(np.arctan2(u[1], u[0]) % (2 * np.pi))
    k = tuple(0.02 * u)
    measured = kernel.group_velocity_analytic(k).speed - 1.0
    predicted = deviation_for_direction(0.02, Direction(theta, phi))
    print(f"  s = {s_factor(Direction(theta, phi)):+.6f}   "
          f"speed - 1 = {measured:+.3e}   predicted {predicted:+.3e}")

# --- solid-angle statistics of the direction factor
stats = sphere_stats()
print("\ndirection factor s over the sphere")
print(f"  mean     {stats.mean:+.3e}        (zero by parity)")
print(f"  rms      {stats.rms_unit_average:.15f}  (1/sqrt(105))")
print(f"  max      {stats.max:.15f}  (1/(3 sqrt(3)) on the body diagonal)")
print(f"  spread   {stats.spread:.15f}")
print(f"  argmax   theta = {stats.argmax.theta:.6f}, phi = {stats.argmax.phi:.6f}")
