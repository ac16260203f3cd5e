#!/usr/bin/env python3
"""Propagate wave packets and compare centroid drift with the dispersion law."""
import numpy as np

from bosonwalk.kernel import group_velocity_analytic
from bosonwalk.lattice import (
    Lattice,
    WavePacketSpec,
    measure_group_velocity,
    predicted_packet_velocity,
)

np.set_printoptions(precision=5, suppress=True)

lat = Lattice(64)

# --- on-axis sinc packet: the centroid drifts at the mode-weighted speed,
#     a little under the single-mode value because the transverse side
#     modes travel slower than the axis mode
spec = WavePacketSpec("sinc", (0.4, 0.0, 0.0), (32, 32, 32), width=2)
result = measure_group_velocity(lat, spec, steps=12, sample_every=2)
traj = result.trajectory

print("on-axis sinc packet, k0 = (0.4, 0, 0), 12 steps")
print("  step   centroid x       spread x    norm - 1")
for t, pos, spr, nrm in zip(traj.steps, traj.positions, traj.spreads,
                            traj.norms):
    print(f"  {t:4d}   {pos[0]:12.6f}   {spr[0]:9.5f}   {nrm - 1:+.2e}")

v_fit = result.velocity.as_array()
v_pred = predicted_packet_velocity(lat, spec)
v_ana = group_velocity_analytic(spec.k0).as_array()
print(f"  fitted velocity       {v_fit}")
print(f"  mode-weighted speed   {v_pred}")
print(f"  single-mode velocity  {v_ana}")
print(f"  fit residual          {result.fit_residual:.2e} sites")

# --- a broad gaussian packet on the body diagonal averages the dispersion
#     over its momentum support, so its centroid is slower than the
#     single-mode group velocity; the mode-weighted prediction tracks it
k_diag = tuple(0.4 / np.sqrt(3.0) for _ in range(3))
wide = WavePacketSpec("gaussian", k_diag, (32, 32, 32), width=np.pi / 16)
result = measure_group_velocity(lat, wide, steps=8)

v_fit = result.velocity.as_array()
v_pred = predicted_packet_velocity(lat, wide)
v_ana = group_velocity_analytic(k_diag).as_array()
print("\ngaussian packet on the body diagonal, sigma = pi/16, 8 steps")
print(f"  measured centroid velocity   {v_fit}")
print(f"  mode-weighted prediction     {v_pred}")
print(f"  single-mode group velocity   {v_ana}")
print(f"  measured vs predicted  {np.max(np.abs(v_fit - v_pred)):.4f}")
print(f"  measured vs analytic   {np.max(np.abs(v_fit - v_ana)):.4f}"
      "   (momentum support is as wide as |k0| itself)")
