"""Mode-by-mode solvers for ``D_(g) u + a(t) R^s u + b(t) u = f``, ``u(0) = u0``.

The operator acts diagonally on the modes of a :class:`SpectralModel`, so
every mode obeys a scalar relaxation equation with the time-dependent rate
``a(t) mu^s + b(t)``. Two independent routes are implemented:

* :func:`solve_mode` / :func:`solve`: implicit product-integration stepping;
* :func:`picard_solve_mode`: fixed-point iteration on the frozen-coefficient
  mild form, using relaxation functions and the Duhamel convolution.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import AdmissibilityError, ArgumentError, ConfigurationError, ConvergenceError, DomainError
from .gcaputo import STARTUP_SUBSTEPS, TimeGrid
from .kernel import MemoryKernel
from .relaxation import duhamel, solve_relaxation, solve_rows
from .spectrum import SpectralModel, synthesize

__all__ = [
    "time_profile",
    "CoefficientPath",
    "SeparableSource",
    "DiffusionProblem",
    "SolutionTrajectory",
    "PicardResult",
    "solve_mode",
    "picard_solve_mode",
    "solve",
    "apply_generator",
    "CHUNK_ROWS",
]

#: modes per work unit; fixed so results do not depend on the thread count
CHUNK_ROWS = 32


def time_profile(spec, grid: TimeGrid, name: str = "profile") -> np.ndarray:
    """Sample a named time profile on ``grid``.

    ``spec`` is a number (constant) or a mapping with ``preset`` one of
    ``constant`` (``value``), ``linear`` (``c0 + c1 t``), ``cosine``
    (``c0 + c1 cos(2 pi freq t)``) or ``sampled`` (``values`` equally spaced
    on ``[0, T]``, linearly interpolated onto the grid).
    """
    t = grid.nodes
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return np.full(grid.N + 1, float(spec))
    if not isinstance(spec, dict) or "preset" not in spec:
        raise ConfigurationError(f"{name}: expected a number or a table with a 'preset' key")
    preset = spec["preset"]
    try:
        if preset == "constant":
            out = np.full(grid.N + 1, float(spec["value"]))
        elif preset == "linear":
            out = float(spec["c0"]) + float(spec["c1"]) * t
        elif preset == "cosine":
            out = float(spec["c0"]) + float(spec["c1"]) * np.cos(2.0 * np.pi * float(spec.get("freq", 1.0)) * t)
        elif preset == "sampled":
            vals = np.asarray(spec["values"], dtype=float)
            if vals.ndim != 1 or len(vals) < 2:
                raise ConfigurationError(f"{name}.values: need at least two samples")
            out = np.interp(t, np.linspace(0.0, grid.T, len(vals)), vals)
        else:
            raise ConfigurationError(f"{name}.preset: unknown preset {preset!r}")
    except KeyError as exc:
        raise ConfigurationError(f"{name}.{exc.args[0]}: missing key for preset {preset!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"{name}: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise ConfigurationError(f"{name}: profile is not finite")
    return out


@dataclass(frozen=True, eq=False)
class CoefficientPath:
    """Samples of ``a(t) >= 0`` and ``b(t) >= 0`` on the time grid."""

    grid: TimeGrid
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("a", "b"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape == ():
                v = np.full(self.grid.N + 1, float(v))
            if v.shape != (self.grid.N + 1,):
                raise ArgumentError(f"coefficient {name} needs N+1 = {self.grid.N + 1} samples, got {v.shape}")
            if not np.all(np.isfinite(v)) or np.any(v < 0.0):
                raise ConfigurationError(f"coefficient {name}(t) must be finite and nonnegative")
            v.flags.writeable = False
            object.__setattr__(self, name, v)

    @classmethod
    def constant(cls, grid: TimeGrid, a: float, b: float) -> "CoefficientPath":
        return cls(grid, a, b)

    @classmethod
    def from_presets(cls, grid: TimeGrid, a, b) -> "CoefficientPath":
        return cls(grid, time_profile(a, grid, "coeffs.a"), time_profile(b, grid, "coeffs.b"))

    @property
    def a0(self) -> float:
        return float(self.a.min())

    @property
    def a1(self) -> float:
        return float(self.a.max())

    @property
    def b0(self) -> float:
        return float(self.b.min())

    @property
    def b1(self) -> float:
        return float(self.b.max())

    @property
    def c_ab(self) -> float:
        """max(||a||_C, ||b||_C)."""
        return max(self.a1, self.b1)

    @property
    def is_constant(self) -> bool:
        return self.a0 == self.a1 and self.b0 == self.b1

    def rate(self, eigenvalue, s: float) -> np.ndarray:
        """``a(t) mu^s + b(t)``; one row per eigenvalue if ``eigenvalue`` is an array."""
        mu_s = np.asarray(eigenvalue, dtype=float) ** s
        return mu_s[..., None] * self.a + self.b

    def require_homogeneous_admissible(self) -> None:
        if not (self.a0 > 0.0 or self.b0 > 0.0):
            raise AdmissibilityError("coefficients violate the standing assumption inf a > 0 or inf b > 0")

    def describe(self) -> dict:
        return {"a0": self.a0, "a1": self.a1, "b0": self.b0, "b1": self.b1}


@dataclass(frozen=True, eq=False)
class SeparableSource:
    """``f(t, x) = profile(t) * F(x)`` given by a time profile and a coefficient map."""

    profile: np.ndarray
    coefficients: np.ndarray

    def block(self, rows: slice) -> np.ndarray:
        return self.coefficients[rows, None] * self.profile[None, :]


Source = Union[None, np.ndarray, SeparableSource]


@dataclass(frozen=True, eq=False)
class DiffusionProblem:
    model: SpectralModel
    kernel: MemoryKernel
    s: float
    coeffs: CoefficientPath
    u0: np.ndarray
    grid: TimeGrid
    f: Source = None

    def __post_init__(self):
        s = float(self.s)
        if not (s > 0.0 and math.isfinite(s)):
            raise DomainError(f"fractional power s must be positive, got {self.s!r}")
        object.__setattr__(self, "s", s)
        u0 = np.asarray(self.u0)
        if u0.shape != (self.model.size,):
            raise ArgumentError(f"u0 must have one entry per mode ({self.model.size}), got {u0.shape}")
        object.__setattr__(self, "u0", u0)
        if self.coeffs.grid != self.grid:
            raise ArgumentError("coefficient path lives on a different grid")
        f = self.f
        if isinstance(f, SeparableSource):
            if f.profile.shape != (self.grid.N + 1,) or f.coefficients.shape != (self.model.size,):
                raise ArgumentError("separable source has inconsistent shapes")
        elif f is not None:
            f = np.asarray(f)
            if f.shape != (self.grid.N + 1, self.model.size):
                raise ArgumentError(f"source must have shape (N+1, modes) = {(self.grid.N + 1, self.model.size)}")
            object.__setattr__(self, "f", f)

    @property
    def is_homogeneous(self) -> bool:
        f = self.f
        if f is None:
            return True
        if isinstance(f, SeparableSource):
            return not (np.any(f.profile != 0) and np.any(f.coefficients != 0))
        return not np.any(f != 0)

    def source_block(self, rows: slice) -> np.ndarray:
        """Source samples for a block of modes, shape ``(rows, N+1)``."""
        n_rows = len(range(*rows.indices(self.model.size)))
        if self.f is None:
            return np.zeros((n_rows, self.grid.N + 1))
        if isinstance(self.f, SeparableSource):
            return self.f.block(rows)
        return self.f[:, rows].T

    def source_at(self, n: int) -> np.ndarray:
        if self.f is None:
            return np.zeros(self.model.size)
        if isinstance(self.f, SeparableSource):
            return self.f.coefficients * self.f.profile[n]
        return self.f[n]

    def source_sup(self) -> np.ndarray:
        """Per-mode ``sup_t |f_m(t)|``."""
        if self.f is None:
            return np.zeros(self.model.size)
        if isinstance(self.f, SeparableSource):
            return np.abs(self.f.coefficients) * np.max(np.abs(self.f.profile))
        return np.max(np.abs(self.f), axis=0)

    def with_data(self, u0=None, f: Source = "keep") -> "DiffusionProblem":
        return DiffusionProblem(
            self.model, self.kernel, self.s, self.coeffs,
            self.u0 if u0 is None else u0, self.grid,
            self.f if isinstance(f, str) and f == "keep" else f,
        )


@dataclass(frozen=True, eq=False)
class SolutionTrajectory:
    """Mode amplitudes ``values[n, m]`` at ``t_n``."""

    values: np.ndarray
    problem: DiffusionProblem

    @property
    def t(self) -> np.ndarray:
        return self.problem.grid.nodes

    def at(self, n: int) -> np.ndarray:
        return self.values[n]

    def field(self, n: int):
        return synthesize(self.problem.model, self.values[n])


def _check_series(x, grid, name):
    if x is None:
        return np.zeros(grid.N + 1)
    x = np.asarray(x)
    if x.ndim == 0:
        return np.full(grid.N + 1, x)
    if x.shape != (grid.N + 1,):
        raise ArgumentError(f"{name} must have length N+1 = {grid.N + 1}, got shape {x.shape}")
    return x


def solve_mode(
    kernel: MemoryKernel,
    eigenvalue: float,
    s: float,
    coeffs: CoefficientPath,
    f_mode,
    u0_mode,
    grid: TimeGrid,
    *,
    startup_substeps: int = STARTUP_SUBSTEPS,
) -> np.ndarray:
    """Implicit stepping of ``D_(g) u + (a mu^s + b) u = f`` for one mode."""
    coeffs.require_homogeneous_admissible()
    if eigenvalue < 0:
        raise DomainError("eigenvalues are nonnegative")
    f = _check_series(f_mode, grid, "f_mode")
    rate = coeffs.rate(eigenvalue, s)
    return solve_rows(kernel, grid, rate[None, :], f[None, :], [u0_mode], startup_substeps=startup_substeps)[0]


@dataclass(frozen=True)
class PicardResult:
    values: np.ndarray
    iterations: int
    residuals: tuple[float, ...]


def picard_solve_mode(
    kernel: MemoryKernel,
    eigenvalue: float,
    s: float,
    coeffs: CoefficientPath,
    f_mode,
    u0_mode,
    grid: TimeGrid,
    max_iter: int = 50,
    tol: float = 1e-10,
    *,
    startup_substeps: int = STARTUP_SUBSTEPS,
) -> PicardResult:
    """Fixed-point iteration on the frozen-coefficient mild form.

    With ``Lam = mu^s a1 + b1`` and ``w = w_Lam`` the iteration is

        u <- u0 w + duhamel(w, f, Lam) + duhamel(w, (Lam - a mu^s - b) u, Lam),

    started from the frozen solution ``u0 w + duhamel(w, f, Lam)``. The
    correction term inherits the initial layer of ``u``, so its first cell
    is integrated with ``layered=True``. The
    stopping test is ``max|u_new - u_old| <= tol * max(1, max|u_new|)``.
    """
    coeffs.require_homogeneous_admissible()
    f = _check_series(f_mode, grid, "f_mode")
    rate = coeffs.rate(eigenvalue, s)
    lam = float(eigenvalue) ** s * coeffs.a1 + coeffs.b1
    if lam == 0.0:
        # a and b vanish identically on this mode: nothing to freeze
        u = solve_mode(kernel, eigenvalue, s, coeffs, f, u0_mode, grid, startup_substeps=startup_substeps)
        return PicardResult(u, 1, (0.0,))
    w = solve_relaxation(kernel, lam, grid, startup_substeps=startup_substeps)
    free = u0_mode * w.values
    forced = duhamel(w, f, lam)
    u = free + forced
    residuals = []
    for it in range(1, max_iter + 1):
        new = free + forced + duhamel(w, (lam - rate) * u, lam, layered=True)
        diff = float(np.max(np.abs(new - u)))
        residuals.append(diff)
        u = new
        if diff <= tol * max(1.0, float(np.max(np.abs(u)))):
            return PicardResult(u, it, tuple(residuals))
    raise ConvergenceError(f"Picard iteration did not converge in {max_iter} iterations", residuals[-1])


def _resolve_threads(threads: int) -> int:
    threads = int(threads)
    if threads < 0:
        raise ConfigurationError("threads must be >= 0 (0 = auto)")
    return threads or (os.cpu_count() or 1)


def solve(
    problem: DiffusionProblem,
    threads: int = 1,
    *,
    startup_substeps: int = STARTUP_SUBSTEPS,
) -> SolutionTrajectory:
    """Solve every mode by implicit stepping.

    Modes are processed in fixed blocks of :data:`CHUNK_ROWS`, optionally on
    a thread pool; block boundaries never depend on ``threads``, so the
    result is bit-identical for any thread count.
    """
    problem.coeffs.require_homogeneous_admissible()
    model, grid = problem.model, problem.grid
    n_modes = model.size
    out = np.zeros((grid.N + 1, n_modes), dtype=complex)

    def work(start):
        rows = slice(start, min(start + CHUNK_ROWS, n_modes))
        rate = problem.coeffs.rate(model.eigenvalues[rows], problem.s)
        src = problem.source_block(rows)
        u = solve_rows(problem.kernel, grid, rate, src, problem.u0[rows], startup_substeps=startup_substeps)
        out[:, rows] = u.T

    starts = range(0, n_modes, CHUNK_ROWS)
    workers = min(_resolve_threads(threads), len(starts))
    if workers <= 1:
        for st in starts:
            work(st)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, starts))
    out[0] = problem.u0
    out.flags.writeable = False
    return SolutionTrajectory(out, problem)


def apply_generator(problem: DiffusionProblem, trajectory: SolutionTrajectory, n: int) -> np.ndarray:
    """``f(t_n) - (a(t_n) mu^s + b(t_n)) u(t_n)``, i.e. ``D_(g) u(t_n)`` read off the equation."""
    if not 1 <= n <= problem.grid.N:
        raise DomainError(f"step index must satisfy 1 <= n <= N, got {n}")
    c = problem.coeffs
    rate = c.a[n] * problem.model.eigenvalues**problem.s + c.b[n]
    return problem.source_at(n) - rate * trajectory.values[n]
