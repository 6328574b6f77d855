"""Metric-ball volumes and volume-growth slopes.

The disk grows like the hyperbolic plane, 2 pi (cosh R - 1).  The square
grows polynomially, so its slope over a finite window is about 2/R rather
than 0.  The slope of a product of two disks is the sum of the factor slopes.
"""
import math

from hilbertgeom import Interval, Product, QuadratureSpec, SamplerSpec, disk, entropy_estimate, metric_ball_volume

for R in (1, 2, 3):
    est = metric_ball_volume(disk(), [0, 0], R, SamplerSpec(100_000))
    print(f"disk R={R}: {est.value:.4f} +- {est.stderr:.4f}  hyperbolic {2 * math.pi * (math.cosh(R) - 1):.4f}")

seg = Interval(-1, 1)
print("segment R=3:", metric_ball_volume(seg, [0], 3.0).value, "(exactly 2R)")

e = entropy_estimate(disk(), [0, 0], 3, 6, 7)
print(f"disk slope on [3, 6]: {e.slope:.3f} +- {e.stderr_slope:.3f}")

square = Product([seg, seg])
s = entropy_estimate(square, [0, 0], 3, 6, 7, quad=QuadratureSpec("angle_grid", 256))
print(f"square slope on [3, 6]: {s.slope:.3f} (2/R ranges over {2 / 6:.2f}..{2 / 3:.2f})")
for r, lv in zip(s.r_grid, s.log_volumes):
    print(f"   R={r:.1f}  vol/R^2 = {math.exp(lv) / r**2:.3f}")

dd = entropy_estimate(Product([disk(), disk()]), [0, 0, 0, 0], 2.5, 4.5, 5,
                      SamplerSpec(20_000, density_mode="product_approx"))
print(f"disk x disk slope on [2.5, 4.5]: {dd.slope:.3f}")
