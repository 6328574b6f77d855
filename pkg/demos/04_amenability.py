"""Rayleigh quotients of distance tents.

On the disk the quotients stay above the spectral gap 1/4 of the hyperbolic
plane.  On the square they decay like 1/R^2, witnessing amenability.
"""
from hilbertgeom import Interval, Product, SamplerSpec, Tent, disk, product_amenability_check, rayleigh_quotient
from hilbertgeom.errors import PrecisionLoss

seg = Interval(-1, 1)
square = Product([seg, seg])
for R in (2, 4, 8, 10):
    qd = rayleigh_quotient(disk(), Tent([0, 0], R), "lambda1")
    qs = rayleigh_quotient(square, Tent([0, 0], R), "lambda1")
    print(f"R={R:2d}  disk {qd.quotient:.4f} +- {qd.stderr:.4f}   square {qs.quotient:.4f} +- {qs.stderr:.4f}"
          f"   square * R^2 = {qs.quotient * R * R:.2f}")

# beyond R ~ 10 the support comes within ~1e-9 of the boundary and double
# precision can no longer resolve finite differences
try:
    rayleigh_quotient(disk(), Tent([0, 0], 16), "lambda1")
except PrecisionLoss as exc:
    print("R=16:", exc)

rep = product_amenability_check(seg, seg, Tent([0.2], 3.0), Tent([-0.4], 5.0), SamplerSpec(10_000))
print("sobolev: Q(fg) =", round(rep.sobolev_product.quotient, 4), "<= bound", round(rep.sobolev_bound, 4))
print("lambda1: Q(fg) =", round(rep.lambda_product.quotient, 4), ">= bound", round(rep.lambda_bound, 4))
