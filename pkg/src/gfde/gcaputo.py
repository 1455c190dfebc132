"""Product-integration discretization of the Caputo-type derivative.

On the uniform grid ``t_j = j T / N`` the derivative of sampled data is

    D_(g) u(t_n) ~= sum_{j<n} W[n, j] (u_{j+1} - u_j) / dt,

where ``W[n, j]`` integrates the kernel exactly over ``[t_j, t_{j+1}]``
(see :func:`gfde.kernel.kernel_weights`). The same weights drive the
implicit time stepper :func:`march`, which every solver in the package
uses.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, UnsupportedKernelError
from .kernel import MemoryKernel, kernel_weights

__all__ = [
    "TimeGrid",
    "apply_derivative",
    "derivative_history",
    "march",
    "march_mesh",
    "step_weights",
    "StepWeights",
    "STARTUP_SUBSTEPS",
    "STARTUP_GRADING",
]

#: graded sub-steps used inside the first interval [0, t_1]
STARTUP_SUBSTEPS = 64
STARTUP_GRADING = 3.0


@dataclass(frozen=True)
class TimeGrid:
    T: float
    N: int

    def __post_init__(self):
        if not (float(self.T) > 0.0 and np.isfinite(self.T)):
            raise DomainError(f"horizon T must be positive, got {self.T!r}")
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"step count N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "N", int(self.N))

    @property
    def dt(self) -> float:
        return self.T / self.N

    @cached_property
    def nodes(self) -> np.ndarray:
        t = np.arange(self.N + 1, dtype=float) * self.dt
        t[-1] = self.T
        t.flags.writeable = False
        return t


def _lag_means(kernel: MemoryKernel, grid: TimeGrid) -> np.ndarray:
    """c[l] = (1/dt) int over one cell at lag l; uniform-grid weights / dt."""
    dt = grid.dt
    lags = np.arange(grid.N + 1, dtype=float) * dt
    c = np.zeros(grid.N + 1)
    c[1:] = kernel.interval_integral(lags[1:], np.full(grid.N, dt)) / dt
    return c


def apply_derivative(kernel: MemoryKernel, samples, grid: TimeGrid, n: int):
    """Product-integration value of ``D_(g) u`` at ``t_n`` from samples ``u_0..u_N``.

    ``samples`` may carry trailing axes (e.g. one column per mode).
    """
    u = np.asarray(samples)
    if u.shape[0] != grid.N + 1:
        raise DomainError(f"expected {grid.N + 1} samples, got {u.shape[0]}")
    if not 1 <= n <= grid.N:
        raise DomainError(f"derivative is defined for 1 <= n <= N, got n={n}")
    w = kernel_weights(kernel, grid, n) / grid.dt
    return np.tensordot(w, np.diff(u[: n + 1], axis=0), axes=(0, 0))


def derivative_history(kernel: MemoryKernel, samples, grid: TimeGrid) -> np.ndarray:
    """``apply_derivative`` at every ``n = 1..N``; entry 0 is left as NaN."""
    u = np.asarray(samples)
    if u.shape[0] != grid.N + 1:
        raise DomainError(f"expected {grid.N + 1} samples, got {u.shape[0]}")
    if not kernel.admissible:
        raise UnsupportedKernelError("product-integration weights need an admissible kernel")
    c = _lag_means(kernel, grid)[1:]
    inc = np.diff(u, axis=0).reshape(grid.N, -1)
    out = np.empty((grid.N + 1, inc.shape[1]), dtype=np.result_type(u, float))
    out[0] = np.nan
    for col in range(inc.shape[1]):
        out[1:, col] = np.convolve(c, inc[:, col])[: grid.N]
    return out.reshape(u.shape)


def solver_mesh(grid: TimeGrid, substeps: int, grading: float = STARTUP_GRADING):
    """Solver nodes and the positions of the uniform grid nodes among them.

    With ``substeps > 0`` the first cell is replaced by the graded nodes
    ``t_1 (i/substeps)^grading``; all later cells are the uniform ones.
    """
    if substeps <= 0:
        return np.asarray(grid.nodes), np.arange(grid.N + 1)
    fine = grid.nodes[1] * (np.arange(substeps + 1) / substeps) ** grading
    fine[-1] = grid.nodes[1]
    tau = np.concatenate([fine, grid.nodes[2:]])
    where = np.concatenate([[0], substeps + np.arange(grid.N)])
    return tau, where


def _to_mesh(values, grid, tau, substeps):
    """Linear interpolation of node data onto the start-up sub-mesh."""
    if substeps <= 0:
        return values
    theta = tau[: substeps + 1] / grid.nodes[1]
    head = values[:, :1] + theta[None, :] * (values[:, 1:2] - values[:, :1])
    return np.concatenate([head, values[:, 2:]], axis=1)


@dataclass(frozen=True)
class StepWeights:
    """Cell-mean kernel weights for :func:`march` on one (kernel, grid, sub-mesh)."""

    tau: np.ndarray
    where: np.ndarray
    substeps: int
    fine: np.ndarray  # fine[n, j]: mean over sub-cell j seen from tau[n] (j < min(n, m))
    uniform: np.ndarray  # uniform[l]: mean over a uniform cell at lag l


@functools.lru_cache(maxsize=32)
def step_weights(kernel: MemoryKernel, grid: TimeGrid, substeps: int = STARTUP_SUBSTEPS) -> StepWeights:
    if not kernel.admissible:
        raise UnsupportedKernelError("solvers need an admissible kernel")
    m = max(int(substeps), 0)
    tau, where = solver_mesh(grid, m)
    fine = np.zeros((len(tau), m))
    if m:
        h = np.diff(tau[: m + 1])
        x = tau[:, None] - tau[None, :m]
        valid = np.arange(m)[None, :] < np.arange(len(tau))[:, None]
        fine[valid] = (kernel.interval_integral(x[valid], np.broadcast_to(h, x.shape)[valid])
                       / np.broadcast_to(h, x.shape)[valid])
    for arr in (tau, where, fine):
        arr.flags.writeable = False
    uniform = _lag_means(kernel, grid)
    uniform.flags.writeable = False
    return StepWeights(tau, where, m, fine, uniform)


def march(
    kernel: MemoryKernel,
    grid: TimeGrid,
    rate,
    source,
    u0,
    *,
    startup_substeps: int = STARTUP_SUBSTEPS,
) -> np.ndarray:
    """Implicit product-integration stepping of independent scalar problems.

    Solves ``D_(g) u + rate(t) u = source(t)``, ``u(0) = u0`` for every row,
    treating the newest value implicitly:

        u_n = (c_last u_{n-1} - sum_{j<n-1} c_j (u_{j+1}-u_j) + f_n) / (c_last + r_n)

    with ``c_j`` the cell-averaged kernel weights. ``rate`` and ``source``
    are real arrays of shape ``(rows, N+1)``; ``u0`` has shape ``(rows,)``.
    Returns the solution sampled on the uniform grid, shape ``(rows, N+1)``.

    The first cell is integrated on a graded sub-mesh (``startup_substeps``
    points), which resolves the weakly singular start of the solution;
    ``startup_substeps=0`` gives the plain uniform scheme.
    """
    u, sw = march_mesh(kernel, grid, rate, source, u0, startup_substeps=startup_substeps)
    return u[:, sw.where]


def march_mesh(kernel, grid, rate, source, u0, *, startup_substeps: int = STARTUP_SUBSTEPS):
    """:func:`march` on the full solver mesh; returns ``(u_mesh, step_weights)``."""
    sw = step_weights(kernel, grid, max(int(startup_substeps), 0))
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    rows = u0.shape[0]
    rate = np.broadcast_to(np.asarray(rate, dtype=float), (rows, grid.N + 1))
    source = np.broadcast_to(np.asarray(source, dtype=float), (rows, grid.N + 1))

    m = sw.substeps
    r = _to_mesh(rate, grid, sw.tau, m)
    f = _to_mesh(source, grid, sw.tau, m)
    total = len(sw.tau) - 1

    u = np.empty((rows, total + 1))
    u[:, 0] = u0
    inc = np.zeros((rows, total))
    mean = np.empty(total)
    for n in range(1, total + 1):
        k = min(n, m)
        mean[:k] = sw.fine[n, :k]
        if n > m:
            mean[m:n] = sw.uniform[n - m : 0 : -1]
        newest = mean[n - 1]
        hist = inc[:, : n - 1] @ mean[: n - 1] if n > 1 else 0.0
        u[:, n] = (newest * u[:, n - 1] - hist + f[:, n]) / (newest + r[:, n])
        inc[:, n - 1] = u[:, n] - u[:, n - 1]
    return u, sw
