"""TOML experiment configuration.

Keys live in a flat dotted namespace (``kernel.alpha``, ``grid.N``, ...);
every validation error names the offending key. A complete example::

    [kernel]
    variant = "caputo"          # caputo | multiterm | distributed | exponential
    alpha = 0.5                 # multiterm: terms = [[w, alpha], ...]
                                # distributed: nodes = [...], weights = [...]
    [grid]
    T = 1.0
    N = 512

    [relax]
    lambda = 1.0

    [model]
    backend = "torus"           # torus: d, M, k; heisenberg: m_max, lambda_min, lambda_max, n_lambda
    d = 1
    M = 64
    k = 1

    [problem]
    s = 1.0

    [coeffs]
    a = { preset = "linear", c0 = 1.0, c1 = 0.5 }
    b = 0.3

    [initial]
    kind = "random"             # zero | constant | cosine | random | mode
    seed = 7

    [source]
    kind = "cosine"
    frequencies = [[1]]
    modulation = { preset = "cosine", c0 = 1.0, c1 = 0.5, freq = 2.0 }

    [verify]
    gammas = [0.0, 1.0, 2.0]
    checks = ["MI", "I", "MAXPRIN", "SIGNPRES", "COMPARE"]
    gap_override = false

    [tolerances]
    exact = 1e-8
    discrete = 5e-3

    [output]
    dir = "out"
    snapshots = [512]
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .diffusion import CoefficientPath, DiffusionProblem, SeparableSource, time_profile
from .errors import CapabilityError, ConfigurationError, DomainError
from .gcaputo import TimeGrid
from .kernel import CaputoPower, DistributedOrder, ExponentialNonAdmissible, MemoryKernel, MultiTerm
from .spectrum import HEISENBERG, TORUS, SpectralModel, analyze

__all__ = ["ExperimentConfig", "load_config", "parse_config", "CHECK_GROUPS"]

SECTIONS = {"kernel", "grid", "relax", "model", "problem", "coeffs", "initial", "source",
            "verify", "tolerances", "output"}
CHECK_GROUPS = ("MI", "I", "MAXPRIN", "SIGNPRES", "COMPARE")


def _get(table: dict, key: str, prefix: str, default=..., kind=None):
    if key not in table:
        if default is ...:
            raise ConfigurationError(f"{prefix}.{key}: required key is missing")
        return default
    val = table[key]
    if kind is not None:
        try:
            if kind is int:
                if isinstance(val, bool) or int(val) != val:
                    raise ValueError
                val = int(val)
            elif kind is float:
                if isinstance(val, bool):
                    raise ValueError
                val = float(val)
                if not math.isfinite(val):
                    raise ValueError
            elif kind is bool:
                if not isinstance(val, bool):
                    raise ValueError
        except (TypeError, ValueError):
            raise ConfigurationError(f"{prefix}.{key}: expected {kind.__name__}, got {val!r}") from None
    return val


def _table(raw: dict, name: str, required: bool = False) -> dict:
    if name not in raw:
        if required:
            raise ConfigurationError(f"{name}: required section is missing")
        return {}
    t = raw[name]
    if not isinstance(t, dict):
        raise ConfigurationError(f"{name}: expected a table")
    return t


# {{{ builders

def build_kernel(raw: dict) -> MemoryKernel:
    t = _table(raw, "kernel", required=True)
    variant = _get(t, "variant", "kernel", "caputo")
    try:
        if variant == "caputo":
            return CaputoPower(_get(t, "alpha", "kernel", kind=float))
        if variant == "exponential":
            return ExponentialNonAdmissible(_get(t, "alpha", "kernel", kind=float))
        if variant == "multiterm":
            terms = _get(t, "terms", "kernel")
            return MultiTerm(tuple((float(w), float(a)) for w, a in terms))
        if variant == "distributed":
            return DistributedOrder(tuple(_get(t, "nodes", "kernel")), tuple(_get(t, "weights", "kernel")))
    except (DomainError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"kernel: invalid parameters for variant {variant!r}: {exc}") from None
    raise ConfigurationError(f"kernel.variant: unknown variant {variant!r}")


def build_grid(raw: dict) -> TimeGrid:
    t = _table(raw, "grid", required=True)
    T = _get(t, "T", "grid", 1.0, float)
    N = _get(t, "N", "grid", kind=int)
    if not T > 0:
        raise ConfigurationError(f"grid.T: must be positive, got {T}")
    if N < 2:
        raise ConfigurationError(f"grid.N: must be at least 2, got {N}")
    return TimeGrid(T, N)


def build_model(raw: dict) -> SpectralModel:
    t = _table(raw, "model", required=True)
    backend = _get(t, "backend", "model", TORUS)
    try:
        if backend == TORUS:
            return SpectralModel.torus(_get(t, "d", "model", 1, int), _get(t, "M", "model", kind=int),
                                       _get(t, "k", "model", 1, int))
        if backend == HEISENBERG:
            return SpectralModel.heisenberg(
                _get(t, "m_max", "model", kind=int), _get(t, "lambda_min", "model", kind=float),
                _get(t, "lambda_max", "model", kind=float), _get(t, "n_lambda", "model", kind=int))
    except DomainError as exc:
        raise ConfigurationError(f"model: {exc}") from None
    raise ConfigurationError(f"model.backend: unknown backend {backend!r}")


def build_data(t: dict, prefix: str, model: SpectralModel) -> np.ndarray:
    """Coefficient map from a data table (``initial`` or ``source``)."""
    kind = _get(t, "kind", prefix, "zero")
    n = model.size
    if kind == "zero":
        return np.zeros(n)
    if kind == "constant":
        value = _get(t, "value", prefix, 1.0, float)
        if model.backend == TORUS:
            return analyze(model, np.full(model.field_shape, value))
        return np.full(n, value)
    if kind == "mode":
        pos = _get(t, "index", prefix, kind=int)
        if not 0 <= pos < n:
            raise ConfigurationError(f"{prefix}.index: mode position must lie in [0, {n}), got {pos}")
        out = np.zeros(n, dtype=complex)
        out[pos] = _get(t, "value", prefix, 1.0, float)
        return out
    if kind == "random":
        seed = _get(t, "seed", prefix, kind=int)
        scale = _get(t, "scale", prefix, 1.0, float)
        rng = np.random.default_rng(seed)
        if model.backend == TORUS:
            return analyze(model, scale * rng.standard_normal(model.field_shape))
        return scale * rng.standard_normal(n)
    if kind == "cosine":
        if model.backend != TORUS:
            raise CapabilityError("synthesis unsupported for this backend")
        d = model.params["d"]
        freqs = _get(t, "frequencies", prefix, [[1] + [0] * (d - 1)])
        amps = _get(t, "amplitudes", prefix, [1.0] * len(freqs))
        if len(amps) != len(freqs):
            raise ConfigurationError(f"{prefix}.amplitudes: need one amplitude per frequency")
        x = model.points()
        samples = np.zeros(model.field_shape)
        for xi, amp in zip(freqs, amps):
            xi = [xi] if np.isscalar(xi) else list(xi)
            if len(xi) != d:
                raise ConfigurationError(f"{prefix}.frequencies: each entry needs {d} components")
            samples += float(amp) * np.cos(2.0 * np.pi * sum(k * xa for k, xa in zip(xi, x)))
        return analyze(model, samples)
    raise ConfigurationError(f"{prefix}.kind: unknown data kind {kind!r}")

# }}}


@dataclass
class ExperimentConfig:
    raw: dict
    kernel: MemoryKernel
    grid: TimeGrid | None
    lam: float | None = None
    model: SpectralModel | None = None
    s: float = 1.0
    coeffs: CoefficientPath | None = None
    u0: np.ndarray | None = None
    source: SeparableSource | None = None
    gammas: list = field(default_factory=lambda: [0.0])
    checks: list = field(default_factory=lambda: list(CHECK_GROUPS))
    gap_override: bool = False
    tol_exact: float = 1e-8
    tol_discrete: float = 5e-3
    out_dir: str | None = None
    snapshots: list | None = None

    def problem(self) -> DiffusionProblem:
        if self.model is None or self.coeffs is None:
            raise ConfigurationError("model: diffusion runs need [model] and [coeffs] sections")
        return DiffusionProblem(self.model, self.kernel, self.s, self.coeffs, self.u0, self.grid, self.source)

    def resolved(self) -> dict:
        """Echo of the input plus derived quantities (for meta.json)."""
        out = {"config": copy.deepcopy(self.raw), "kernel": self.kernel.to_spec()}
        if self.grid is not None:
            out["grid"] = {"T": self.grid.T, "N": self.grid.N}
        if self.model is not None:
            out["model"] = self.model.describe()
            out["mode_order"] = ("lexicographic xi in {-M/2..M/2-1}^d" if self.model.backend == TORUS
                                 else "(m outer, lambda_q inner)")
            out["spectral_gap"] = self.model.spectral_gap
        if self.coeffs is not None:
            out["coeffs"] = self.coeffs.describe()
        return out


def parse_config(raw: dict, *, need: tuple[str, ...] = ()) -> ExperimentConfig:
    """Validate a parsed TOML document. ``need`` lists sections the caller requires."""
    unknown = set(raw) - SECTIONS
    if unknown:
        raise ConfigurationError(f"{sorted(unknown)[0]}: unknown configuration section")
    for name in need:
        _table(raw, name, required=True)
    # the admissibility probe is grid-free; every time-dependent run needs [grid]
    timed = "grid" in raw or bool(set(raw) & {"relax", "model"})
    cfg = ExperimentConfig(raw=raw, kernel=build_kernel(raw), grid=build_grid(raw) if timed else None)

    if "relax" in raw:
        lam = _get(_table(raw, "relax"), "lambda", "relax", kind=float)
        if not lam > 0:
            raise ConfigurationError(f"relax.lambda: relaxation rate must be positive, got {lam}")
        cfg.lam = lam

    if "model" in raw:
        model = cfg.model = build_model(raw)
        cfg.s = _get(_table(raw, "problem"), "s", "problem", 1.0, float)
        if not cfg.s > 0:
            raise ConfigurationError(f"problem.s: fractional power must be positive, got {cfg.s}")
        ct = _table(raw, "coeffs", required=True)
        cfg.coeffs = CoefficientPath.from_presets(cfg.grid, _get(ct, "a", "coeffs", 1.0), _get(ct, "b", "coeffs", 0.0))
        cfg.u0 = build_data(_table(raw, "initial"), "initial", model)
        st = _table(raw, "source")
        if st and _get(st, "kind", "source", "zero") != "zero":
            coeffs = build_data(st, "source", model)
            profile = time_profile(_get(st, "modulation", "source", 1.0), cfg.grid, "source.modulation")
            cfg.source = SeparableSource(profile, coeffs)

    vt = _table(raw, "verify")
    gammas = _get(vt, "gammas", "verify", [0.0])
    if not isinstance(gammas, list) or not all(isinstance(g, (int, float)) and g >= 0 for g in gammas):
        raise ConfigurationError("verify.gammas: expected a list of nonnegative numbers")
    cfg.gammas = [float(g) for g in gammas]
    checks = _get(vt, "checks", "verify", list(CHECK_GROUPS))
    if not isinstance(checks, list) or any(c not in CHECK_GROUPS for c in checks):
        raise ConfigurationError(f"verify.checks: entries must be among {list(CHECK_GROUPS)}")
    cfg.checks = list(checks)
    cfg.gap_override = _get(vt, "gap_override", "verify", False, bool)

    tt = _table(raw, "tolerances")
    cfg.tol_exact = _get(tt, "exact", "tolerances", 1e-8, float)
    cfg.tol_discrete = _get(tt, "discrete", "tolerances", 5e-3, float)

    ot = _table(raw, "output")
    cfg.out_dir = _get(ot, "dir", "output", None)
    snaps = _get(ot, "snapshots", "output", None)
    if snaps is not None:
        if not isinstance(snaps, list) or not all(
                isinstance(i, int) and not isinstance(i, bool) and cfg.grid is not None and 0 <= i <= cfg.grid.N for i in snaps):
            raise ConfigurationError("output.snapshots: expected step indices in [0, grid.N]")
        cfg.snapshots = list(snaps)
    return cfg


def load_config(path, **kw) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config: file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config: cannot parse {path}: {exc}") from None
    return parse_config(raw, **kw)
