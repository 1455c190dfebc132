"""Scalar relaxation equation ``D_(g) w + lam w = f``, ``w(0) = w0``.

The homogeneous solution with ``w0 = 1`` is the relaxation function
``w_lam``; for the power kernel it equals ``E_alpha(-lam t^alpha)``, which
:func:`mittag_leffler` evaluates independently of the time stepper.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ArgumentError, DomainError
from .gcaputo import STARTUP_SUBSTEPS, TimeGrid, march, march_mesh
from .kernel import MemoryKernel

__all__ = [
    "RelaxationSolution",
    "solve_relaxation",
    "solve_scalar_ivp",
    "duhamel",
    "mittag_leffler",
]


@dataclass(frozen=True)
class RelaxationSolution:
    grid: TimeGrid
    values: np.ndarray
    lam: float
    kernel: MemoryKernel
    w0: float = 1.0
    #: mean of w over each grid cell, shape (N,); the first one is taken from the start-up sub-mesh
    cell_means: np.ndarray | None = None
    #: ``int_0^dt phi'(s) w(t_n - s) ds`` for n = 1..N, with ``phi = (1 - w)/(1 - w_1)`` the
    #: normalized initial layer; None when no start-up sub-mesh was used
    layer_weights: np.ndarray | None = None

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def means(self) -> np.ndarray:
        if self.cell_means is not None:
            return self.cell_means
        return 0.5 * (self.values[1:] + self.values[:-1])


def _check_rate(lam) -> float:
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"relaxation rate lambda must be positive, got {lam!r}")
    return lam


def solve_rows(kernel, grid, rate, source, u0, *, startup_substeps=STARTUP_SUBSTEPS):
    """Run :func:`march` on possibly complex data by splitting Re and Im."""
    source = np.asarray(source)
    u0 = np.atleast_1d(np.asarray(u0))
    if np.iscomplexobj(source) or np.iscomplexobj(u0):
        rows = u0.shape[0]
        src = np.broadcast_to(source, (rows, grid.N + 1))
        rate = np.broadcast_to(np.asarray(rate, dtype=float), (rows, grid.N + 1))
        out = march(
            kernel,
            grid,
            np.concatenate([rate, rate]),
            np.concatenate([src.real, src.imag]),
            np.concatenate([u0.real, u0.imag]),
            startup_substeps=startup_substeps,
        )
        return out[:rows] + 1j * out[rows:]
    return march(kernel, grid, rate, source, u0, startup_substeps=startup_substeps)


def solve_relaxation(
    kernel: MemoryKernel,
    lam: float,
    grid: TimeGrid,
    *,
    startup_substeps: int = STARTUP_SUBSTEPS,
) -> RelaxationSolution:
    """Relaxation function ``w_lam`` sampled on ``grid`` (``w(0) = 1``, no forcing)."""
    lam = _check_rate(lam)
    mesh, sw = march_mesh(kernel, grid, lam, 0.0, [1.0], startup_substeps=startup_substeps)
    w = mesh[0, sw.where]
    means = 0.5 * (w[1:] + w[:-1])
    layer = None
    if sw.substeps:
        m = sw.substeps
        tau, fine = sw.tau[: m + 1], mesh[0, : m + 1]
        means[0] = float(np.sum(np.diff(tau) * 0.5 * (fine[1:] + fine[:-1]))) / grid.dt
        drop = 1.0 - w[1]
        if drop > 1e-12:
            layer = np.empty(grid.N)
            # n = 1: the layer meets the start of w itself, resolved on the sub-mesh
            mid = 0.5 * (tau[1:] + tau[:-1])
            layer[0] = float(np.sum(-np.diff(fine) * np.interp(grid.dt - mid, tau, fine))) / drop
            # n >= 2: w is smooth on the lag cell, evaluate it at the centroid of phi'
            phibar = (1.0 - means[0]) / drop
            layer[1:] = w[1:-1] + phibar * (w[2:] - w[1:-1])
            layer.flags.writeable = False
    for arr in (w, means):
        arr.flags.writeable = False
    return RelaxationSolution(grid, w, lam, kernel, 1.0, means, layer)


def solve_scalar_ivp(
    kernel: MemoryKernel,
    lam: float,
    f_samples,
    w0,
    grid: TimeGrid,
    *,
    startup_substeps: int = STARTUP_SUBSTEPS,
) -> RelaxationSolution:
    lam = _check_rate(lam)
    f = np.asarray(f_samples)
    if f.shape != (grid.N + 1,):
        raise ArgumentError(f"f_samples must have length N+1 = {grid.N + 1}, got shape {f.shape}")
    w = solve_rows(kernel, grid, lam, f[None, :], [w0], startup_substeps=startup_substeps)[0]
    w.flags.writeable = False
    return RelaxationSolution(grid, w, lam, kernel, w0)


def duhamel(homog: RelaxationSolution, f_samples, lam: float, *, layered: bool = False) -> np.ndarray:
    """Zero-data solution ``w(t) = -(1/lam) int_0^t f(s) w_lam'(t - s) ds``.

    After an integration by parts, with ``f`` piecewise linear and ``wbar_k``
    the mean of ``w_lam`` over cell ``k``,

        lam w_n = f_n - f_0 w_lam(t_n) - sum_{j<n} (f_{j+1} - f_j) wbar_{n-1-j},

    which is exact for constant ``f`` and never differentiates ``w_lam``.
    With ``layered=True`` the first increment of ``f`` is assumed to follow
    the initial layer of ``w_lam`` instead of a straight line (right for
    forcing built from a solution of the same equation).
    """
    lam = _check_rate(lam)
    grid = homog.grid
    f = np.asarray(f_samples)
    if f.shape != (grid.N + 1,):
        raise ArgumentError(f"f_samples must have length N+1 = {grid.N + 1}, got shape {f.shape}")
    if not math.isclose(lam, homog.lam, rel_tol=1e-12):
        raise ArgumentError(f"homogeneous solution has lambda={homog.lam}, got {lam}")
    w = homog.values / homog.w0
    means = homog.means() / homog.w0
    hist = np.convolve(np.diff(f), means)[: grid.N]
    if layered and homog.layer_weights is not None:
        hist = hist + (f[1] - f[0]) * (homog.layer_weights / homog.w0 - means)
    out = np.zeros(grid.N + 1, dtype=np.result_type(f, float))
    out[1:] = (f[1:] - f[0] * w[1:] - hist) / lam
    return out


# {{{ Mittag-Leffler function

_SERIES_RADIUS = 5.0
# largest admissible series term; each term carries ~1e-14 relative error
_SERIES_MAX_TERM = 1.0e2
_ASYMPTOTIC_RTOL = 1.0e-10


def _ml_series(alpha, x):
    terms = []
    k = 0
    while True:
        term = math.exp(k * math.log(x) - math.lgamma(alpha * k + 1.0)) if x > 0 else float(k == 0)
        terms.append(term if k % 2 == 0 else -term)
        if k > 5 and term < 1.0e-18:
            break
        k += 1
    return math.fsum(terms)


def _series_safe(alpha, x):
    if x > _SERIES_RADIUS:
        return False
    if x == 0.0:
        return True
    peak = max(k * math.log(x) - math.lgamma(alpha * k + 1.0) for k in range(0, 400))
    return peak <= math.log(_SERIES_MAX_TERM)


def _ml_asymptotic(alpha, x):
    """E_alpha(-x) ~ sum_{k>=1} (-1)^(k+1) x^(-k) / Gamma(1 - alpha k); None if not converged.

    Convergence is judged on the envelope x^(-k) Gamma(alpha k) / pi, which
    bounds each term via the reflection formula and does not vanish near poles.
    """
    total = 0.0
    prev = math.inf
    for k in range(1, 200):
        log_env = -k * math.log(x) + math.lgamma(alpha * k) - math.log(math.pi)
        if log_env > prev:
            return None
        prev = log_env
        total += (-1.0) ** (k + 1) * x ** (-k) * special.rgamma(1.0 - alpha * k)
        if k > 1 and total != 0.0 and log_env < math.log(_ASYMPTOTIC_RTOL * abs(total)):
            return total
    return None


def _ml_integral(alpha, x):
    """E_alpha(-x) from its spectral (completely monotone) representation,

        E_alpha(-x) = sin(alpha pi)/(alpha pi) int_0^inf g(s) / D(s) ds,
        g(s) = exp(-(x s)^(1/alpha)),  D(s) = (s + cos(alpha pi))^2 + sin(alpha pi)^2.

    ``g`` drops below 1e-300 beyond ``s = 700^alpha / x``, so the range is
    finite. For alpha > 1/2, ``1/D`` is a Lorentzian of width sin(alpha pi)
    centred at ``s0 = -cos(alpha pi)``; its mass times ``g(s0)`` is integrated
    in closed form and quadrature only sees ``(g(s) - g(s0)) / D``.
    """
    c = math.cos(alpha * math.pi)
    width = math.sin(alpha * math.pi)
    inv = 1.0 / alpha
    upper = 700.0**alpha / x

    def g(s):
        return math.exp(-((x * s) ** inv))

    if c < 0.0:
        s0 = -c
        g0 = g(s0)
        total = g0 * (math.atan((upper + c) / width) - math.atan(c / width)) / width
    else:
        s0, g0, total = 0.0, 0.0, 0.0

    def body(s):
        return (g(s) - g0) / ((s + c) ** 2 + width * width)

    # geometric breakpoints so each segment sees at most one decade of the peak tail
    offsets = [0.0] + [sgn * width * 10.0**j for j in range(0, 16) for sgn in (-1.0, 1.0)]
    marks = [1.0 / x] + ([s0 + o for o in offsets] if c < 0.0 else [])
    cuts = sorted({b for b in marks if 0.0 < b < upper})
    edges = [0.0, *cuts, upper]
    # remainders that are tiny next to the closed-form part only need absolute accuracy
    epsabs = 1e-15 * abs(total)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(body, lo, hi, epsabs=epsabs, epsrel=1e-12, limit=400)
            total += val
    return width / (alpha * math.pi) * total


def _ml_scalar(alpha, z):
    x = -z
    if alpha == 1.0:
        return math.exp(z)
    if x == 0.0:
        return 1.0
    if _series_safe(alpha, x):
        return _ml_series(alpha, x)
    if x > 1.0:
        val = _ml_asymptotic(alpha, x)
        if val is not None:
            return val
    return _ml_integral(alpha, x)


def mittag_leffler(alpha: float, z):
    """One-parameter Mittag-Leffler function ``E_alpha(z)`` on the decay branch ``z <= 0``.

    Uses the power series where it is free of cancellation, the asymptotic
    expansion when it converges to 1e-10, and otherwise an integral
    representation evaluated by adaptive quadrature.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    z = np.asarray(z, dtype=float)
    if np.any(z > 0.0):
        raise DomainError("only the decay branch z <= 0 is implemented")
    out = np.array([_ml_scalar(alpha, float(v)) for v in z.ravel()]).reshape(z.shape)
    return float(out) if out.ndim == 0 else out


# }}}
