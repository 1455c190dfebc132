"""Numerical verification of the a priori estimates, maximum principle and sign preservation.

Every check records the measured quantity, the bound it is compared with,
the tolerance and a verdict. Bounds are the explicit constants obtained by
tracking the proofs mode by mode:

* ``MI01``/``MI02``: ``||u(t)||_gamma <= ||u0||_gamma`` (constant 1);
* ``MI03``/``MI04``: ``||D u(t)||_gamma <= 2 C_ab ||u0||_{gamma + s nu}`` with
  ``C_ab = max(||a||_C, ||b||_C)``;
* ``I01``/``I02``: source part ``||u^f(t)||_gamma <= ||f||_{C;gamma} / lam_min``;
* ``I03``/``I04``: ``||D u^f(t)||_gamma <= (1 + 2 C_ab / lam_min) ||f||_{C;gamma + s nu}``,

where ``lam_min = b0``, or ``a0 gap^s + b0`` under the spectral-gap override,
and ``||f||_{C;gamma}^2 = sum_m w_m (1+mu_m)^(2 gamma/nu) sup_t |f_m(t)|^2``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .diffusion import CoefficientPath, DiffusionProblem, SolutionTrajectory, solve, solve_mode
from .errors import AdmissibilityError, ArgumentError, MisuseError
from .gcaputo import TimeGrid, derivative_history
from .kernel import MemoryKernel
from .spectrum import sobolev_norm

__all__ = [
    "TOL_EXACT",
    "TOL_DISCRETE",
    "CheckResult",
    "EstimateReport",
    "check_homogeneous",
    "check_inhomogeneous",
    "check_maximum_principle",
    "check_sign_preservation",
    "check_comparison",
    "source_bound_rate",
]

TOL_EXACT = 1e-8
TOL_DISCRETE = 5e-3
TOL_SIGN = 1e-10
TOL_SPLIT = 1e-12
TOL_COMPARE = 1e-8

PASS, FAIL, VACUOUS = "pass", "fail", "vacuous"


@dataclass(frozen=True)
class CheckResult:
    """One verified inequality.

    ``relation`` is ``"le"`` (pass iff ``ratio <= bound (1 + tol)``),
    ``"ge"`` (pass iff ``ratio >= bound - tol``) or ``"gt"`` (``ratio > bound``).
    """

    name: str
    ratio: float
    bound: float
    tol: float
    verdict: str
    relation: str = "le"
    gamma: float | None = None
    note: str = ""

    @classmethod
    def judge(cls, name, ratio, bound, tol, relation="le", **kw) -> "CheckResult":
        ratio, bound = float(ratio), float(bound)
        if relation == "le":
            ok = ratio <= bound * (1.0 + tol)
        elif relation == "ge":
            ok = ratio >= bound - tol
        elif relation == "gt":
            ok = ratio > bound
        else:
            raise ValueError(f"unknown relation {relation!r}")
        return cls(name, ratio, bound, float(tol), PASS if ok else FAIL, relation, **kw)

    @classmethod
    def vacuous(cls, name, bound, tol, relation="le", **kw) -> "CheckResult":
        return cls(name, 0.0, float(bound), float(tol), VACUOUS, relation, **kw)

    @property
    def ok(self) -> bool:
        return self.verdict in (PASS, VACUOUS)


@dataclass
class EstimateReport:
    checks: list[CheckResult] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def extend(self, other) -> "EstimateReport":
        if isinstance(other, EstimateReport):
            self.checks.extend(other.checks)
        elif isinstance(other, CheckResult):
            self.checks.append(other)
        else:
            self.checks.extend(other)
        return self

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def by_name(self, name: str) -> list[CheckResult]:
        return [c for c in self.checks if c.name == name]

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "checks": [asdict(c) for c in self.checks], "ok": self.ok}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = []
        for key in sorted(self.metadata):
            lines.append(f"# {key}: {json.dumps(self.metadata[key], sort_keys=True)}")
        rel = {"le": "<=", "ge": ">=", "gt": ">"}
        for c in self.checks:
            g = "" if c.gamma is None else f" gamma={c.gamma:g}"
            lines.append(
                f"{c.verdict.upper():8s} {c.name:9s}{g:12s} ratio={c.ratio:.12e} "
                f"{rel[c.relation]} bound={c.bound:.12e} tol={c.tol:g}"
                + (f"  ({c.note})" if c.note else "")
            )
        lines.append("OVERALL: " + ("PASS" if self.ok else "FAIL"))
        return "\n".join(lines) + "\n"


# {{{ diffusion estimates

def _generator_history(problem: DiffusionProblem, values: np.ndarray) -> np.ndarray:
    """``f - (a mu^s + b) u`` at every step n = 1..N, shape (N, modes)."""
    c = problem.coeffs
    mu_s = problem.model.eigenvalues**problem.s
    out = -(c.a[1:, None] * mu_s[None, :] + c.b[1:, None]) * values[1:]
    f = problem.f
    if f is None:
        return out
    if hasattr(f, "profile"):
        return out + f.profile[1:, None] * f.coefficients[None, :]
    return out + f[1:]


def _ratio(num, den):
    return float(np.max(num) / den)


def check_homogeneous(
    problem: DiffusionProblem,
    trajectory: SolutionTrajectory,
    gamma: float,
    *,
    tol_exact: float = TOL_EXACT,
    tol_discrete: float = TOL_DISCRETE,
) -> EstimateReport:
    """MI01-MI04 for a problem without source."""
    if not problem.is_homogeneous:
        raise MisuseError("check_homogeneous needs f = 0; use check_inhomogeneous")
    model, u0 = problem.model, problem.u0
    gamma = float(gamma)
    snu = problem.s * model.nu
    c2 = 2.0 * problem.coeffs.c_ab
    vals = trajectory.values
    rep = EstimateReport()
    n0 = sobolev_norm(model, u0, 0.0)
    if n0 == 0.0:
        for name, bound, tol, g in (
            ("MI01", 1.0, tol_exact, None),
            ("MI02", 1.0, tol_exact, gamma),
            ("MI03", c2, tol_discrete, None),
            ("MI04", c2, tol_discrete, gamma),
        ):
            rep.extend(CheckResult.vacuous(name, bound, tol, gamma=g, note="zero initial data"))
        return rep
    gen = _generator_history(problem, vals)
    rep.extend(CheckResult.judge("MI01", _ratio(sobolev_norm(model, vals, 0.0), n0), 1.0, tol_exact))
    rep.extend(CheckResult.judge(
        "MI02", _ratio(sobolev_norm(model, vals, gamma), sobolev_norm(model, u0, gamma)), 1.0, tol_exact, gamma=gamma))
    rep.extend(CheckResult.judge(
        "MI03", _ratio(sobolev_norm(model, gen, 0.0), sobolev_norm(model, u0, snu)), c2, tol_discrete))
    rep.extend(CheckResult.judge(
        "MI04", _ratio(sobolev_norm(model, gen, gamma), sobolev_norm(model, u0, gamma + snu)), c2, tol_discrete,
        gamma=gamma))
    return rep


def source_bound_rate(problem: DiffusionProblem, gap_override: bool = False) -> tuple[float, str]:
    """``lam_min`` for the source estimates, with a label saying where it came from."""
    c = problem.coeffs
    gap = problem.model.spectral_gap
    if gap_override:
        if gap > 0.0 and c.a0 > 0.0:
            return c.a0 * gap**problem.s + c.b0, "a0*gap^s+b0"
        if c.b0 > 0.0:
            return c.b0, "b0"
        raise AdmissibilityError(
            "spectral-gap override needs inf over modes of the eigenvalue > 0 and a0 > 0 "
            f"(gap={gap:g}, a0={c.a0:g}); b0 = 0 as well"
        )
    if c.b0 > 0.0:
        return c.b0, "b0"
    raise AdmissibilityError(
        "inhomogeneous estimates need b0 = inf b(t) > 0 (or gap_override with a spectral gap and a0 > 0)"
    )


def check_inhomogeneous(
    problem: DiffusionProblem,
    trajectory: SolutionTrajectory,
    gamma: float,
    gap_override: bool = False,
    *,
    threads: int = 1,
    tol_exact: float = TOL_EXACT,
    tol_discrete: float = TOL_DISCRETE,
) -> EstimateReport:
    """MI01-MI04 on the data part, I01-I04 on the source part, and the splitting residual."""
    if problem.is_homogeneous:
        return check_homogeneous(problem, trajectory, gamma, tol_exact=tol_exact, tol_discrete=tol_discrete)
    lam_min, origin = source_bound_rate(problem, gap_override)
    model = problem.model
    gamma = float(gamma)
    snu = problem.s * model.nu

    hom = problem.with_data(f=None)
    src = problem.with_data(u0=np.zeros_like(problem.u0))
    u_hom = solve(hom, threads)
    u_src = solve(src, threads)

    rep = check_homogeneous(hom, u_hom, gamma, tol_exact=tol_exact, tol_discrete=tol_discrete)
    resid = float(np.max(sobolev_norm(model, trajectory.values - (u_hom.values + u_src.values), 0.0)))
    rep.extend(CheckResult.judge("SPLIT", resid, TOL_SPLIT, 0.0, note="||u - (u^u0 + u^f)||"))
    if gap_override and origin != "b0":
        rep.extend(CheckResult.judge("GAP", model.spectral_gap, 0.0, 0.0, relation="gt", note="inf over modes"))

    fsup = problem.source_sup()
    c3 = 1.0 + 2.0 * problem.coeffs.c_ab / lam_min
    gen = _generator_history(src, u_src.values)
    specs = (
        ("I01", u_src.values, 0.0, 0.0, 1.0 / lam_min, None),
        ("I02", u_src.values, gamma, gamma, 1.0 / lam_min, gamma),
        ("I03", gen, 0.0, snu, c3, None),
        ("I04", gen, gamma, gamma + snu, c3, gamma),
    )
    for name, data, g_num, g_den, bound, g_tag in specs:
        den = sobolev_norm(model, fsup, g_den)
        note = f"lam_min={lam_min:.12g} ({origin})"
        if den == 0.0:
            rep.extend(CheckResult.vacuous(name, bound, tol_discrete, gamma=g_tag, note=note))
        else:
            ratio = _ratio(sobolev_norm(model, data, g_num), den)
            rep.extend(CheckResult.judge(name, ratio, bound, tol_discrete, gamma=g_tag, note=note))
    return rep

# }}}


# {{{ scalar checks

def _last_argext(v, largest=True):
    """Index of the latest extremal sample (ties resolved towards later times)."""
    r = v[::-1]
    return len(v) - 1 - int(np.argmax(r) if largest else np.argmin(r))


def check_maximum_principle(
    kernel: MemoryKernel, v_samples, grid: TimeGrid, tol_scheme: float | None = None
) -> CheckResult:
    """Sign of ``D_(g) v`` at the discrete argmax (>= 0) and argmin (<= 0).

    The measured value is ``min(D v(t_max), -D v(t_min))`` over the extremal
    points that are not at ``t = 0``; it must be ``>= -tol_scheme``.
    """
    v = np.asarray(v_samples, dtype=float)
    if v.shape != (grid.N + 1,):
        raise ArgumentError(f"v_samples must have length N+1 = {grid.N + 1}, got {v.shape}")
    vmax = float(np.max(np.abs(v)))
    if tol_scheme is None:
        tol_scheme = 1e-2 * vmax * float(kernel.mass(grid.T))
    i_max, i_min = _last_argext(v, True), _last_argext(v, False)
    if i_max == 0 and i_min == 0:
        return CheckResult.vacuous("MAXPRIN", 0.0, tol_scheme, relation="ge", note="extrema at t=0")
    dv = derivative_history(kernel, v, grid)
    signed = []
    if i_max > 0:
        signed.append(float(dv[i_max]))
    if i_min > 0:
        signed.append(-float(dv[i_min]))
    note = f"argmax={i_max} argmin={i_min}"
    return CheckResult.judge("MAXPRIN", min(signed), 0.0, tol_scheme, relation="ge", note=note)


def check_sign_preservation(
    kernel: MemoryKernel,
    eigenvalue: float,
    s: float,
    coeffs: CoefficientPath,
    f_mode,
    u0_mode,
    grid: TimeGrid,
    *,
    tol: float = TOL_SIGN,
) -> CheckResult:
    """Weakly signed data give a solution with the same weak sign."""
    f = np.zeros(grid.N + 1) if f_mode is None else np.broadcast_to(np.asarray(f_mode), (grid.N + 1,))
    if np.iscomplexobj(f) or np.iscomplexobj(u0_mode):
        raise MisuseError("sign preservation is stated for real data")
    data = np.concatenate([[float(u0_mode)], f.astype(float)])
    if np.any(data > 0) and np.any(data < 0):
        raise MisuseError("u0_mode and f_mode must share a weak sign")
    sign = 1.0 if np.any(data > 0) else (-1.0 if np.any(data < 0) else 0.0)
    u = solve_mode(kernel, eigenvalue, s, coeffs, f, u0_mode, grid)
    measured = float(np.min(sign * u)) if sign else -float(np.max(np.abs(u)))
    note = {1.0: "nonnegative data", -1.0: "nonpositive data", 0.0: "zero data"}[sign]
    return CheckResult.judge("SIGNPRES", measured, 0.0, tol, relation="ge", note=note)


def check_comparison(
    kernel: MemoryKernel,
    eigenvalue: float,
    s: float,
    coeffs: CoefficientPath,
    u0_mode: float,
    grid: TimeGrid,
    *,
    tol: float = TOL_COMPARE,
) -> CheckResult:
    """Without source and with ``u0 >= 0``, the solution lies below the one frozen at (a0, b0)."""
    if u0_mode < 0:
        raise MisuseError("comparison is stated for u0_mode >= 0")
    frozen = CoefficientPath.constant(grid, coeffs.a0, coeffs.b0)
    u = solve_mode(kernel, eigenvalue, s, coeffs, None, u0_mode, grid)
    w = solve_mode(kernel, eigenvalue, s, frozen, None, u0_mode, grid)
    excess = float(np.max(u - w))
    return CheckResult.judge("COMPARE", 0.0 - excess, 0.0, tol, relation="ge", note="-(max u_var - u_frozen)")

# }}}
