"""Turning the a priori estimates into numbers that can fail."""

import numpy as np

from gfde import CaputoPower, CoefficientPath, DiffusionProblem, SeparableSource, SpectralModel, TimeGrid
from gfde import analyze, solve
from gfde.diffusion import time_profile
from gfde.estimates import check_inhomogeneous, check_maximum_principle

model = SpectralModel.torus(1, 64, 1)
grid = TimeGrid(1.0, 512)
kernel = CaputoPower(0.5)
x = model.points()[0]

# Data part: |u(t)| <= |u0| with constant exactly 1. Source part: |u^f(t)|
# <= sup|f| / b0. Derivative bounds use C_ab = max(sup a, sup b).
coeffs = CoefficientPath.from_presets(grid, {"preset": "linear", "c0": 1.0, "c1": 0.5}, 0.5)
f = SeparableSource(time_profile({"preset": "cosine", "c0": 1.0, "c1": 0.5, "freq": 2.0}, grid),
                    analyze(model, np.cos(2 * np.pi * x)))
u0 = analyze(model, np.random.default_rng(1).standard_normal(64))
problem = DiffusionProblem(model, kernel, 1.0, coeffs, u0, grid, f)
report = check_inhomogeneous(problem, solve(problem), gamma=1.0)
print(report.to_text())

# Maximum principle: at an interior maximum the Caputo derivative is >= 0.
t = grid.nodes
for label, v in (("sin(pi t)", np.sin(np.pi * t)), ("t", t), ("t(1-t)^2", t * (1 - t) ** 2)):
    r = check_maximum_principle(kernel, v, grid)
    print(f"{label:10s} {r.verdict:5s} signed derivative at extrema {r.ratio:+.4f}  ({r.note})")

# Without zeroth-order damping (b = 0) the 1/b0 bound is void. A spectral
# gap rescues it: on a model whose eigenvalues stay above gap > 0, the rate
# a0 gap^s + b0 takes over. The Heisenberg model has such a gap.
heis = SpectralModel.heisenberg(8, 0.5, 4.0, 16)
g2 = TimeGrid(1.0, 256)
p = DiffusionProblem(heis, kernel, 1.0, CoefficientPath.constant(g2, 1.0, 0.0), np.zeros(heis.size), g2,
                     SeparableSource(np.ones(257), np.ones(heis.size)))
rep = check_inhomogeneous(p, solve(p), 0.0, gap_override=True)
for c in rep.checks:
    print(f"{c.name:5s} {c.verdict:5s} ratio {c.ratio:.4f} bound {c.bound:.4f}  {c.note}")
