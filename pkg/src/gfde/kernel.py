"""Memory kernels for Caputo-type derivatives.

A kernel ``g`` enters the derivative

    D_(g) u(t) = int_0^t g(t - tau) u'(tau) dtau.

Three admissible families are provided (single power, finite sums of
powers, and quadrature-discretized distributed order) together with an
exponential kernel that is deliberately *not* admissible and only exists to
exercise the admissibility probe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedKernelError

__all__ = [
    "MemoryKernel",
    "CaputoPower",
    "MultiTerm",
    "DistributedOrder",
    "ExponentialNonAdmissible",
    "Verdict",
    "AdmissibilityReport",
    "eval_kernel",
    "laplace_transform",
    "check_admissibility",
    "kernel_weights",
    "default_probe_grid",
]


def _check_exponent(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"exponent must lie strictly inside (0, 1), got {alpha!r}")
    return alpha


def _check_weight(w: float) -> float:
    w = float(w)
    if not (w > 0.0 and math.isfinite(w)):
        raise DomainError(f"weights must be positive and finite, got {w!r}")
    return w


def _power_interval_integral(alpha, x, h):
    """int_{x-h}^{x} y^(-alpha)/Gamma(1-alpha) dy without cancellation.

    Written as -x^(1-alpha) expm1((1-alpha) log1p(-h/x)) / Gamma(2-alpha) so
    that thin intervals far from the origin keep full relative accuracy.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    beta = 1.0 - alpha
    ratio = np.minimum(h / x, 1.0)
    with np.errstate(divide="ignore"):
        out = -np.expm1(beta * np.log1p(-ratio))
    # ratio == 1 reaches the origin: log1p(-1) = -inf and expm1(-inf) = -1.
    return x**beta * out / math.gamma(2.0 - alpha)


class MemoryKernel:
    """Common interface of the kernel variants.

    Power-type subclasses only need to expose :attr:`terms`, a tuple of
    ``(weight, alpha)`` pairs; everything else is derived from it.
    """

    admissible = True

    @property
    def terms(self) -> tuple[tuple[float, float], ...]:
        raise NotImplementedError

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0):
            raise DomainError("kernel is only defined for t > 0")
        out = sum(w * t ** (-a) / math.gamma(1.0 - a) for w, a in self.terms)
        return float(out) if out.ndim == 0 else out

    def laplace(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p <= 0.0):
            raise DomainError("Laplace transform is probed only for p > 0")
        out = sum(w * p ** (a - 1.0) for w, a in self.terms)
        return float(out) if out.ndim == 0 else out

    def mass(self, t):
        """int_0^t g(tau) dtau."""
        t = np.asarray(t, dtype=float)
        out = sum(w * t ** (1.0 - a) / math.gamma(2.0 - a) for w, a in self.terms)
        return float(out) if out.ndim == 0 else out

    def interval_integral(self, x, h):
        """int_{x-h}^{x} g(y) dy for lags ``x`` and interval lengths ``h <= x``."""
        return sum(w * _power_interval_integral(a, x, h) for w, a in self.terms)

    def to_spec(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class CaputoPower(MemoryKernel):
    """g(t) = t^(-alpha) / Gamma(1 - alpha); the classical Caputo kernel."""

    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_exponent(self.alpha))

    @property
    def terms(self):
        return ((1.0, self.alpha),)

    def to_spec(self):
        return {"variant": "caputo", "alpha": self.alpha}


@dataclass(frozen=True)
class MultiTerm(MemoryKernel):
    """Weighted sum of power kernels, ``components = [(weight, alpha), ...]``."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.components) == 0:
            raise DomainError("MultiTerm needs at least one term")
        checked = tuple((_check_weight(w), _check_exponent(a)) for w, a in self.components)
        object.__setattr__(self, "components", checked)

    @property
    def terms(self):
        return self.components

    def to_spec(self):
        return {"variant": "multiterm", "terms": [list(t) for t in self.components]}


@dataclass(frozen=True)
class DistributedOrder(MemoryKernel):
    """Distributed-order kernel discretized at fixed nodes.

    ``g = sum_q weights[q] * t^(-nodes[q]) / Gamma(1 - nodes[q])`` approximates
    ``int_0^1 mu(alpha) t^(-alpha)/Gamma(1-alpha) dalpha`` for a density ``mu``.
    """

    nodes: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        nodes = tuple(_check_exponent(a) for a in self.nodes)
        weights = tuple(_check_weight(w) for w in self.weights)
        if len(nodes) == 0 or len(nodes) != len(weights):
            raise DomainError("nodes and weights must be non-empty and of equal length")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_density(cls, density, n_nodes: int = 8) -> "DistributedOrder":
        """Gauss-Legendre discretization of a positive density on (0, 1)."""
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        nodes = 0.5 * (x + 1.0)
        weights = 0.5 * w * np.array([density(a) for a in nodes], dtype=float)
        return cls(tuple(nodes), tuple(weights))

    @property
    def terms(self):
        return tuple(zip(self.weights, self.nodes))

    def to_spec(self):
        return {"variant": "distributed", "nodes": list(self.nodes), "weights": list(self.weights)}


@dataclass(frozen=True)
class ExponentialNonAdmissible(MemoryKernel):
    """g(t) = exp(-alpha t / (1 - alpha)) / (1 - alpha).

    Its Laplace transform stays bounded as p -> 0, so it fails the
    admissibility conditions. Only useful as a negative test case.
    """

    alpha: float
    admissible = False

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_exponent(self.alpha))

    @property
    def terms(self):
        raise UnsupportedKernelError("exponential kernel is not of power type")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0):
            raise DomainError("kernel is only defined for t > 0")
        a = self.alpha
        out = np.exp(-a * t / (1.0 - a)) / (1.0 - a)
        return float(out) if out.ndim == 0 else out

    def laplace(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p <= 0.0):
            raise DomainError("Laplace transform is probed only for p > 0")
        a = self.alpha
        out = 1.0 / ((1.0 - a) * p + a)
        return float(out) if out.ndim == 0 else out

    def mass(self, t):
        a = self.alpha
        return -np.expm1(-a * np.asarray(t, dtype=float) / (1.0 - a)) / a

    def interval_integral(self, x, h):
        raise UnsupportedKernelError("product-integration weights need an admissible kernel")

    def to_spec(self):
        return {"variant": "exponential", "alpha": self.alpha}


def eval_kernel(kernel: MemoryKernel, t):
    return kernel(t)


def laplace_transform(kernel: MemoryKernel, p):
    return kernel.laplace(p)


def kernel_weights(kernel: MemoryKernel, grid, n: int) -> np.ndarray:
    """Product-integration weights ``W[j] = int_{t_j}^{t_{j+1}} g(t_n - tau) dtau``.

    Returns an array of length ``n`` indexed by ``j = 0 .. n-1``.
    """
    if not kernel.admissible:
        raise UnsupportedKernelError("product-integration weights need an admissible kernel")
    if not 1 <= n <= grid.N:
        raise DomainError(f"step index must satisfy 1 <= n <= {grid.N}, got {n}")
    t = grid.nodes
    lag = t[n] - t[:n]
    return np.asarray(kernel.interval_integral(lag, t[1 : n + 1] - t[:n]), dtype=float)


# {{{ admissibility probe


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    @staticmethod
    def combine(*verdicts: "Verdict") -> "Verdict":
        if any(v is Verdict.FAIL for v in verdicts):
            return Verdict.FAIL
        if any(v is Verdict.INCONCLUSIVE for v in verdicts):
            return Verdict.INCONCLUSIVE
        return Verdict.PASS


@dataclass(frozen=True)
class AdmissibilityReport:
    conditions: dict[int, Verdict]
    complete_monotonicity: Verdict
    samples: dict[str, float]
    kernel: dict

    @property
    def all_pass(self) -> bool:
        return all(v is Verdict.PASS for v in self.conditions.values())

    @property
    def any_fail(self) -> bool:
        return any(v is Verdict.FAIL for v in self.conditions.values())

    @property
    def any_inconclusive(self) -> bool:
        return any(v is Verdict.INCONCLUSIVE for v in self.conditions.values())

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "conditions": {str(k): v.value for k, v in sorted(self.conditions.items())},
            "complete_monotonicity_proxy": self.complete_monotonicity.value,
            "samples": dict(self.samples),
        }


def default_probe_grid(n_points: int = 121) -> np.ndarray:
    return np.geomspace(1.0e-6, 1.0e6, n_points)


# log-log slope thresholds on the last decade of the probe grid
_DIVERGENT_SLOPE = 0.05
_FLAT_SLOPE = 1.0e-3


def _tail_trend(p, v, *, at_zero: bool, expect: str) -> Verdict:
    """Decide whether ``v(p)`` tends to 0 or infinity at one end of the grid.

    The last decade of the grid is examined: the values must move
    monotonically in the expected direction and the log-log slope must be
    clearly away from zero. A nearly flat tail means a finite nonzero limit.
    """
    logp = np.log(p)
    if at_zero:
        tail = logp <= logp[0] + math.log(10.0)
    else:
        tail = logp >= logp[-1] - math.log(10.0)
    pt, vt = logp[tail], v[tail]
    if np.any(~np.isfinite(vt)) or np.any(vt <= 0.0):
        return Verdict.FAIL
    logv = np.log(vt)
    slope = (logv[-1] - logv[0]) / (pt[-1] - pt[0])
    # direction in which v must grow when moving toward the probed end
    toward_end = -1.0 if at_zero else 1.0
    want = 1.0 if expect == "inf" else -1.0
    steps = np.diff(logv) * toward_end * want
    if abs(slope) <= _FLAT_SLOPE:
        return Verdict.FAIL
    if np.all(steps > 0.0) and slope * toward_end * want >= _DIVERGENT_SLOPE:
        return Verdict.PASS
    if np.all(steps < 0.0):
        return Verdict.FAIL
    return Verdict.INCONCLUSIVE


def _complete_monotonicity_proxy(p, v, max_order: int = 3) -> Verdict:
    """Sign pattern of divided differences: (-1)^k f[p_i..p_i+k] >= 0, k <= 3."""
    dd = np.asarray(v, dtype=float)
    err = np.finfo(float).eps * np.abs(dd)
    for k in range(1, max_order + 1):
        span = p[k:] - p[:-k]
        dd = (dd[1:] - dd[:-1]) / span
        err = (err[1:] + err[:-1]) / span
        if np.any((-1.0) ** k * dd < -64.0 * err):
            return Verdict.FAIL
    return Verdict.PASS


def check_admissibility(kernel: MemoryKernel, probe_grid=None) -> AdmissibilityReport:
    """Probe the four kernel conditions numerically on a geometric p-grid.

    1. the Laplace transform exists (finite, positive) for p > 0;
    2. it is a Stieltjes function, tested through complete monotonicity;
    3. g~(p) -> 0 and p g~(p) -> inf as p -> inf;
    4. g~(p) -> inf and p g~(p) -> 0 as p -> 0.
    """
    p = default_probe_grid() if probe_grid is None else np.sort(np.asarray(probe_grid, dtype=float))
    if p.size < 50 or p[0] > 1.0e-6 * (1 + 1e-12) or p[-1] < 1.0e6 * (1 - 1e-12):
        raise DomainError("probe grid must span [1e-6, 1e6] with at least 50 points")
    gt = np.asarray(kernel.laplace(p), dtype=float)
    pgt = p * gt

    c1 = Verdict.PASS if np.all(np.isfinite(gt)) and np.all(gt > 0.0) else Verdict.FAIL
    cm = _complete_monotonicity_proxy(p, gt) if c1 is Verdict.PASS else Verdict.FAIL
    c3 = Verdict.combine(
        _tail_trend(p, gt, at_zero=False, expect="zero"),
        _tail_trend(p, pgt, at_zero=False, expect="inf"),
    )
    c4 = Verdict.combine(
        _tail_trend(p, gt, at_zero=True, expect="inf"),
        _tail_trend(p, pgt, at_zero=True, expect="zero"),
    )
    samples = {
        "p_min": float(p[0]),
        "p_max": float(p[-1]),
        "g_tilde_at_p_min": float(gt[0]),
        "g_tilde_at_p_max": float(gt[-1]),
        "p_g_tilde_at_p_min": float(pgt[0]),
        "p_g_tilde_at_p_max": float(pgt[-1]),
    }
    return AdmissibilityReport(
        conditions={1: c1, 2: cm, 3: c3, 4: c4},
        complete_monotonicity=cm,
        samples=samples,
        kernel=kernel.to_spec(),
    )


# }}}
