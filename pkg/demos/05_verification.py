"""Run every verification suite once and print the reports."""
from hilbertgeom import Interval, Orthant, Product, cube, disk
from hilbertgeom.verify import (
    suite_ball_inclusions,
    suite_closed_forms,
    suite_density_sandwich,
    suite_distance_sandwich,
    suite_finsler_sandwich,
    suite_metric_axioms,
)

seg = Interval(-1, 1)
reports = [
    suite_finsler_sandwich([disk(), seg], 10_000, seed=1),
    suite_distance_sandwich([seg, seg, seg], 10_000, seed=1),
    suite_density_sandwich([disk(), seg], 100, seed=1),
    suite_closed_forms(trials=50, seed=1),
    suite_metric_axioms(Orthant(2), 10_000, seed=1),
    suite_metric_axioms(Product([disk(), cube(2)]), 10_000, seed=1),
    suite_ball_inclusions([disk(), seg], 3.0, 2000, seed=1),
]
for r in reports:
    status = "pass" if r.passed else "FAIL"
    print(f"{r.suite_name:18s} {status}  trials={r.trials:6d}  worst={r.worst_violation:.2e}")
