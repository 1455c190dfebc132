"""Diagonalized operator models: modes, weights, transforms and Sobolev norms.

A :class:`SpectralModel` is a finite list of modes, each carrying the value
``mu`` of the operator on that mode and a Plancherel weight. Coefficient maps
are dense arrays whose last axis follows the model's mode enumeration:

* torus ``[0,1)^d`` with ``M`` points per axis: frequencies
  ``xi in {-M/2, ..., M/2-1}^d`` in lexicographic order, ``mu = (4 pi^2 |xi|^2)^k``,
  weight 1, degree ``nu = 2k``;
* first Heisenberg group, Fourier side only: pairs ``(m, lam_q)`` with
  ``m`` outer and ``lam_q`` inner, ``mu = (2m+1) lam_q``, weight
  ``lam_q * dlam`` (midpoint rule on ``[lam_min, lam_max]``), degree 2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ArgumentError, CapabilityError, DomainError

__all__ = [
    "Mode",
    "SpectralModel",
    "Field",
    "analyze",
    "synthesize",
    "sobolev_norm",
    "apply_fractional_power",
    "l2_norm",
    "read_field_csv",
    "write_field_csv",
]

TORUS = "torus"
HEISENBERG = "heisenberg"


@dataclass(frozen=True)
class Mode:
    index: tuple
    eigenvalue: float
    weight: float


@dataclass(frozen=True, eq=False)
class SpectralModel:
    backend: str
    nu: float
    params: dict
    eigenvalues: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    indices: tuple = field(repr=False)

    # {{{ factories

    @classmethod
    def torus(cls, d: int, M: int, k: int = 1) -> "SpectralModel":
        """Power ``k`` of the Laplacian on the ``d``-torus sampled with ``M`` points per axis."""
        if int(d) != d or d < 1:
            raise DomainError(f"torus dimension d must be a positive integer, got {d!r}")
        if int(M) != M or M < 2 or M % 2:
            raise DomainError(f"points per axis M must be an even integer >= 2, got {M!r}")
        if int(k) != k or k < 1:
            raise DomainError(f"Laplacian power k must be a positive integer, got {k!r}")
        d, M, k = int(d), int(M), int(k)
        freqs = np.arange(-M // 2, M // 2)
        grids = np.meshgrid(*([freqs] * d), indexing="ij")
        xi = np.stack([g.ravel() for g in grids], axis=1)
        mu = (4.0 * np.pi**2 * np.sum(xi.astype(float) ** 2, axis=1)) ** k
        indices = tuple(tuple(int(c) for c in row) for row in xi)
        return cls._make(TORUS, 2.0 * k, {"d": d, "M": M, "k": k}, mu, np.ones(len(mu)), indices)

    @classmethod
    def heisenberg(
        cls, m_max: int, lambda_min: float, lambda_max: float, n_lambda: int
    ) -> "SpectralModel":
        """Sub-Laplacian of the first Heisenberg group in Schroedinger representations."""
        if int(m_max) != m_max or m_max < 0:
            raise DomainError(f"m_max must be a nonnegative integer, got {m_max!r}")
        if int(n_lambda) != n_lambda or n_lambda < 1:
            raise DomainError(f"n_lambda must be a positive integer, got {n_lambda!r}")
        lo, hi = float(lambda_min), float(lambda_max)
        if not 0.0 < lo < hi:
            raise DomainError(f"need 0 < lambda_min < lambda_max, got [{lo}, {hi}]")
        dlam = (hi - lo) / n_lambda
        lam = lo + (np.arange(n_lambda) + 0.5) * dlam
        m = np.arange(int(m_max) + 1)
        mu = ((2 * m[:, None] + 1) * lam[None, :]).ravel()
        w = np.broadcast_to(lam * dlam, (len(m), n_lambda)).ravel()
        indices = tuple((int(mi), float(lq)) for mi, lq in itertools.product(m, lam))
        params = {"m_max": int(m_max), "lambda_min": lo, "lambda_max": hi, "n_lambda": int(n_lambda)}
        return cls._make(HEISENBERG, 2.0, params, mu, w, indices)

    @classmethod
    def _make(cls, backend, nu, params, mu, w, indices):
        mu = np.ascontiguousarray(mu, dtype=float)
        w = np.ascontiguousarray(w, dtype=float)
        mu.flags.writeable = False
        w.flags.writeable = False
        return cls(backend, float(nu), dict(params), mu, w, indices)

    # }}}

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def __len__(self) -> int:
        return self.size

    @cached_property
    def modes(self) -> tuple[Mode, ...]:
        return tuple(Mode(i, float(e), float(w)) for i, e, w in zip(self.indices, self.eigenvalues, self.weights))

    @property
    def spectral_gap(self) -> float:
        """Infimum of the operator over the modes (0 on the torus)."""
        return float(self.eigenvalues.min())

    @property
    def supports_synthesis(self) -> bool:
        return self.backend == TORUS

    @property
    def field_shape(self) -> tuple[int, ...]:
        self._require_torus()
        return (self.params["M"],) * self.params["d"]

    def points(self) -> list[np.ndarray]:
        """Sample coordinates ``j/M`` of the torus grid, one array per axis."""
        self._require_torus()
        x = np.arange(self.params["M"]) / self.params["M"]
        return np.meshgrid(*([x] * self.params["d"]), indexing="ij")

    def mode_position(self, index) -> int:
        return self.indices.index(tuple(index))

    def describe(self) -> dict:
        return {"backend": self.backend, "nu": self.nu, **self.params}

    def _require_torus(self):
        if self.backend != TORUS:
            raise CapabilityError("synthesis unsupported for this backend")

    def _check_coefficients(self, c) -> np.ndarray:
        c = np.asarray(c)
        if c.shape[-1:] != (self.size,):
            raise ArgumentError(f"coefficient map must have last axis {self.size}, got shape {c.shape}")
        return c


@dataclass(frozen=True)
class Field:
    """Samples on the torus grid ``[0,1)^d``, ``M`` points per axis."""

    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples))

    @property
    def shape(self):
        return self.samples.shape


def _samples(model: SpectralModel, fld) -> np.ndarray:
    x = fld.samples if isinstance(fld, Field) else np.asarray(fld)
    if x.shape != model.field_shape:
        raise ArgumentError(f"field shape {x.shape} does not match model grid {model.field_shape}")
    return x


def analyze(model: SpectralModel, fld) -> np.ndarray:
    """Normalized DFT coefficients ``c_xi = M^-d sum_x f(x) e^{-2 pi i xi.x}``."""
    model._require_torus()
    x = _samples(model, fld)
    c = np.fft.fftshift(np.fft.fftn(x)) / x.size
    return c.ravel()


def synthesize(model: SpectralModel, coefficients) -> Field:
    model._require_torus()
    c = model._check_coefficients(coefficients)
    if c.ndim != 1:
        raise ArgumentError("synthesize takes a single coefficient map")
    grid = c.reshape(model.field_shape)
    x = np.fft.ifftn(np.fft.ifftshift(grid)) * grid.size
    return Field(x)


def sobolev_norm(model: SpectralModel, coefficients, gamma: float):
    """``(sum w (1+mu)^(2 gamma/nu) |c|^2)^(1/2)``, reduced over the last axis."""
    c = model._check_coefficients(coefficients)
    scale = model.weights * (1.0 + model.eigenvalues) ** (2.0 * float(gamma) / model.nu)
    out = np.sqrt(np.sum(scale * np.abs(c) ** 2, axis=-1))
    return float(out) if np.ndim(out) == 0 else out


def l2_norm(model: SpectralModel, coefficients):
    return sobolev_norm(model, coefficients, 0.0)


def apply_fractional_power(model: SpectralModel, coefficients, s: float) -> np.ndarray:
    """Multiply each coefficient by ``mu^s`` (``0^s = 0``)."""
    s = float(s)
    if not s > 0.0:
        raise DomainError(f"fractional power s must be positive, got {s!r}")
    c = model._check_coefficients(coefficients)
    return c * model.eigenvalues**s


# {{{ CSV field I/O

def write_field_csv(path, fld) -> None:
    """Row-major samples, 17 significant digits; d = 1 gives one value per row."""
    x = fld.samples if isinstance(fld, Field) else np.asarray(fld)
    if x.ndim > 2:
        raise CapabilityError("CSV field output supports d <= 2 only")
    if np.iscomplexobj(x):
        x = x.real
    rows = x.reshape(-1, 1) if x.ndim == 1 else x
    with open(path, "w", newline="\n") as fh:
        for row in rows:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def read_field_csv(path, d: int | None = None) -> Field:
    data = np.loadtxt(Path(path), delimiter=",", ndmin=2)
    if d == 1 or (d is None and data.shape[1] == 1):
        data = data[:, 0]
    return Field(data)

# }}}
