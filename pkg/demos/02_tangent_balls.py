"""Tangent unit balls and the Busemann density.

On the quadrant the tangent ball at x has area 12 x1 x2; on the square it is
squeezed between 2 (1-x^2)(1-y^2) and 4 (1-x^2)(1-y^2).
"""
import numpy as np

from hilbertgeom import Orthant, QuadratureSpec, cube, density, disk, tangent_ball_volume

for p in ([1, 1], [2, 0.5], [0.3, 5]):
    print("quadrant", p, tangent_ball_volume(Orthant(2), p), "12 x1 x2 =", 12 * p[0] * p[1])

sq = cube(2)
for p in ([0, 0], [0.9, 0], [0.5, -0.5], [0.99, 0.99]):
    base = np.prod(1 - np.square(p))
    print("square", p, f"{2 * base:.5f} <= {tangent_ball_volume(sq, p):.5f} <= {4 * base:.5f}")

# the 3-cube uses Monte-Carlo directions; the upper bound is attained at the centre
print("3-cube centre", tangent_ball_volume(cube(3), [0, 0, 0]))
print("3-cube, fewer directions", tangent_ball_volume(cube(3), [0, 0, 0], QuadratureSpec("mc_directions", 4096)))

d = density(disk(), [0.6, 0.0])
print("disk density at (0.6, 0):", d.density, "=", d.omega_n, "/", d.leb_tangent_ball)
