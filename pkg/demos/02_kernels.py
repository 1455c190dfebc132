"""Which memory kernels are allowed? A probe of the four admissibility conditions."""

import numpy as np

from gfde import CaputoPower, DistributedOrder, ExponentialNonAdmissible, MultiTerm, TimeGrid, check_admissibility
from gfde import solve_relaxation

# A kernel g enters the derivative through its Laplace transform g~(p).
# The probe samples g~ on a log grid from 1e-6 to 1e6 and checks that it is
# positive and completely monotone (1, 2), that g~ -> 0 while p g~ -> oo at
# large p (3), and that g~ -> oo while p g~ -> 0 at small p (4).
kernels = {
    "Caputo alpha=0.5": CaputoPower(0.5),
    "two orders 0.3 + 0.8": MultiTerm(((1.0, 0.3), (0.5, 0.8))),
    "distributed, density 6a(1-a)": DistributedOrder.from_density(lambda a: 6 * a * (1 - a), 12),
    "exponential (not admissible)": ExponentialNonAdmissible(0.5),
}
for name, kernel in kernels.items():
    rep = check_admissibility(kernel)
    verdicts = " ".join(f"({k}) {v}" for k, v in rep.to_dict()["conditions"].items())
    print(f"{name:30s} {verdicts}")

# The exponential kernel has a transform that stays finite at p = 0 and
# decays like 1/p, so both end conditions fail; solvers refuse it.
try:
    solve_relaxation(ExponentialNonAdmissible(0.5), 1.0, TimeGrid(1.0, 16))
except Exception as exc:
    print("solver:", type(exc).__name__, "-", exc)

# Admissible kernels give relaxation curves with the same qualitative shape.
grid = TimeGrid(2.0, 512)
for name, kernel in list(kernels.items())[:3]:
    w = solve_relaxation(kernel, 1.0, grid).values
    print(f"{name:30s} w(1) = {w[256]:.5f}  w(2) = {w[-1]:.5f}")
