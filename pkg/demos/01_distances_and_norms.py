"""Distances and Finsler norms on a few convex bodies.

The disk carries the Klein model of the hyperbolic plane, so its Hilbert
distance can be compared with the hyperbolic one.  Products follow the
componentwise chord rule.
"""
import math

import numpy as np

from hilbertgeom import Interval, Orthant, Product, cross_ratio_distance, cube, disk, dual_norm, finsler_norm

seg = Interval(-1, 1)
print("segment d(0, 0.5)        ", cross_ratio_distance(seg, [0], [0.5]), "= ln(3)/2 =", math.log(3) / 2)
print("half-line d(1, e^2)      ", cross_ratio_distance(Orthant(1), [1], [math.e**2]))

# Klein model: d(0, x) = atanh |x|
for r in (0.5, 0.9, 0.999999):
    print(f"disk d(0, {r})", cross_ratio_distance(disk(), [0, 0], [r, 0]), "atanh:", math.atanh(r))

# Finsler norm at the centre of the square is the max-norm
sq = cube(2)
for v in ([1, 0], [1, 1], [0.3, -0.7]):
    print("square F(0, v)", v, finsler_norm(sq, [0, 0], v), "max-norm", np.abs(v).max())

# the dual unit ball of the max-norm is the l1 ball
print("square dual norm of (1, 1) at 0:", dual_norm(sq, [0, 0], [1, 1]))

# product of a disk and a segment: the norm sits between max and sum of factor norms
prod = Product([disk(), seg])
p, v = np.array([0.3, 0.2, -0.5]), np.array([0.4, -1.0, 0.7])
F = finsler_norm(prod, p, v)
Fa, Fc = finsler_norm(disk(), p[:2], v[:2]), finsler_norm(seg, p[2:], v[2:])
print(f"product norm {F:.6f} in [{max(Fa, Fc):.6f}, {Fa + Fc:.6f}]")
