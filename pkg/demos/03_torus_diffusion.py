"""Fractional diffusion on the periodic torus, one Fourier mode at a time."""

import numpy as np

from gfde import CoefficientPath, DiffusionProblem, SpectralModel, TimeGrid, CaputoPower, analyze, solve
from gfde import mittag_leffler, sobolev_norm

# Torus of side 1 sampled on 64 points; the operator is -Laplacian with
# eigenvalue 4 pi^2 |xi|^2 on the Fourier mode xi.
model = SpectralModel.torus(1, 64, 1)
x = model.points()[0]
grid = TimeGrid(1.0, 1024)
kernel = CaputoPower(0.5)

# A single cosine: the amplitude follows E_alpha(-4 pi^2 t^alpha) exactly.
u0 = analyze(model, np.cos(2 * np.pi * x))
problem = DiffusionProblem(model, kernel, 1.0, CoefficientPath.constant(grid, 1.0, 0.0), u0, grid)
traj = solve(problem)
amp = mittag_leffler(0.5, -4 * np.pi**2 * grid.nodes**0.5)
for n in (0, 16, 256, 1024):
    err = np.max(np.abs(traj.field(n).samples - amp[n] * np.cos(2 * np.pi * x)))
    print(f"t={grid.nodes[n]:.4f}  amplitude {amp[n]:.5f}  field error {err:.1e}")

# Rough data and time-dependent coefficients: a(t) = 1 + t/2, b = 0.3,
# a half-power of the Laplacian. High modes decay first, so Sobolev norms
# of positive order drop faster than the L2 norm.
rng = np.random.default_rng(0)
u0 = analyze(model, rng.standard_normal(64))
coeffs = CoefficientPath.from_presets(grid, {"preset": "linear", "c0": 1.0, "c1": 0.5}, 0.3)
traj = solve(DiffusionProblem(model, kernel, 0.5, coeffs, u0, grid), threads=0)
for gamma in (0.0, 1.0, 2.0):
    norms = sobolev_norm(model, traj.values, gamma)
    print(f"gamma={gamma}:  |u(0)| = {norms[0]:9.3f}  |u(1/2)| = {norms[512]:9.3f}  |u(1)| = {norms[-1]:9.3f}")
