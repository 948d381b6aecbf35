"""Geometric phase of a single mode carried round a loop on the sphere of modes.

A lens precesses the state about the x axis; closing the arc with a geodesic
gives a loop whose solid angle fixes the geometric phase.
"""
import math

from biphoton_holonomy.checks import small_circle_case
from biphoton_holonomy.holonomy import geometric_phase, solid_angle_of_loop, wrap_angle

print(f"{'theta0':>8} {'sweep':>8} {'Phi_geom':>12} {'-Omega/2':>12} {'residual':>10}")
for theta0, sweep in [(1.2, 2.0), (0.8, 2.5), (0.4, 1.5), (1.5, math.pi)]:
    path, loop = small_circle_case(theta0, sweep)
    report = geometric_phase(path, tol=1e-11)
    half = -solid_angle_of_loop(loop) / 2
    print(f"{theta0:8.3f} {sweep:8.3f} {report.geometric:12.8f} {half:12.8f} "
          f"{abs(wrap_angle(report.geometric - half)):10.2e}")
