"""Command line entry point: ``gfde {relax,solve,verify,admissible} --config FILE``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numeric domain error, 4 capability error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diffusion import solve
from .errors import AdmissibilityError, CapabilityError, ConfigurationError, GFDEError
from .estimates import (
    EstimateReport,
    check_comparison,
    check_homogeneous,
    check_inhomogeneous,
    check_maximum_principle,
    check_sign_preservation,
)
from .kernel import check_admissibility
from .relaxation import solve_relaxation
from .spectrum import write_field_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN, EXIT_CAPABILITY = 0, 1, 2, 3, 4


def _fmt(x) -> str:
    return "%.17g" % x


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _write_json(path: Path, obj) -> None:
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or cfg.out_dir or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args, need=()):
    from .config import load_config

    return load_config(args.config, need=need)


# {{{ subcommands

def run_relax(args) -> int:
    cfg = _load(args, need=("relax",))
    sol = solve_relaxation(cfg.kernel, cfg.lam, cfg.grid)
    rows = ["t,w"] + [f"{_fmt(t)},{_fmt(w)}" for t, w in zip(sol.t, sol.values)]
    _write_text(_out_dir(args, cfg) / "relax.csv", "\n".join(rows) + "\n")
    return EXIT_OK


def run_solve(args) -> int:
    cfg = _load(args, need=("model",))
    problem = cfg.problem()
    model = problem.model
    snaps = cfg.snapshots
    if snaps is None:
        snaps = [cfg.grid.N] if model.supports_synthesis else []
    if snaps and not model.supports_synthesis:
        raise CapabilityError("synthesis unsupported for this backend")
    try:
        traj = solve(problem, args.threads)
    except AdmissibilityError as exc:
        raise CapabilityError(str(exc)) from None
    out = _out_dir(args, cfg)
    for n in snaps:
        write_field_csv(out / f"field_t{n}.csv", traj.field(n))
    vals = traj.values
    lines = ["mode_id,t,re,im"]
    t = cfg.grid.nodes
    for m in range(model.size):
        col = vals[:, m]
        lines.extend(f"{m},{_fmt(t[n])},{_fmt(col[n].real)},{_fmt(col[n].imag)}" for n in range(len(t)))
    _write_text(out / "modes.csv", "\n".join(lines) + "\n")
    meta = cfg.resolved()
    meta["snapshots"] = snaps
    if snaps:
        meta["max_imag_in_snapshots"] = max(float(np.max(np.abs(traj.field(n).samples.imag))) for n in snaps)
    _write_json(out / "meta.json", meta)
    return EXIT_OK


def _dominant_mode(problem) -> int:
    weight = np.abs(problem.u0) + problem.source_sup()
    return int(np.argmax(weight))


def build_report(cfg, threads: int = 1) -> EstimateReport:
    if not cfg.checks:
        raise ConfigurationError("verify.checks: nothing to verify (empty check list)")
    problem = cfg.problem()
    if "I" in cfg.checks and not problem.is_homogeneous:
        from .estimates import source_bound_rate

        source_bound_rate(problem, cfg.gap_override)  # fail fast on the preconditions
    traj = solve(problem, threads)
    tol = dict(tol_exact=cfg.tol_exact, tol_discrete=cfg.tol_discrete)
    report = EstimateReport(metadata=cfg.resolved())
    report.metadata.pop("config", None)
    report.metadata["s"] = problem.s
    report.metadata["gap_override"] = cfg.gap_override
    report.metadata["homogeneous"] = problem.is_homogeneous
    for gamma in cfg.gammas:
        if "I" in cfg.checks:
            report.extend(check_inhomogeneous(problem, traj, gamma, cfg.gap_override, threads=threads, **tol))
        elif "MI" in cfg.checks:
            hom = problem.with_data(f=None)
            report.extend(check_homogeneous(hom, traj if problem.is_homogeneous else solve(hom, threads), gamma,
                                            **tol))
    m = _dominant_mode(problem)
    mu = float(problem.model.eigenvalues[m])
    if "MAXPRIN" in cfg.checks:
        for part in (traj.values[:, m].real, traj.values[:, m].imag):
            if np.any(part != 0):
                report.extend(check_maximum_principle(problem.kernel, part, problem.grid))
    f_abs = np.abs(problem.source_block(slice(m, m + 1))[0])
    if "SIGNPRES" in cfg.checks:
        report.extend(check_sign_preservation(problem.kernel, mu, problem.s, problem.coeffs, f_abs,
                                              abs(problem.u0[m]), problem.grid))
    if "COMPARE" in cfg.checks:
        report.extend(check_comparison(problem.kernel, mu, problem.s, problem.coeffs, abs(problem.u0[m]),
                                       problem.grid))
    return report


def run_verify(args) -> int:
    cfg = _load(args, need=("model",))
    report = build_report(cfg, args.threads)
    out = _out_dir(args, cfg)
    _write_text(out / "report.json", report.to_json())
    _write_text(out / "report.txt", report.to_text())
    return EXIT_OK if report.ok else EXIT_FAIL


def run_admissible(args) -> int:
    cfg = _load(args)
    rep = check_admissibility(cfg.kernel)
    _write_json(_out_dir(args, cfg) / "admissibility.json", rep.to_dict())
    if rep.any_fail:
        return EXIT_FAIL
    if rep.any_inconclusive:
        print("warning: some admissibility conditions are inconclusive", file=sys.stderr)
    return EXIT_OK

# }}}


COMMANDS = {"relax": run_relax, "solve": run_solve, "verify": run_verify, "admissible": run_admissible}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gfde", description="Caputo-type fractional diffusion toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "relax": "solve the scalar relaxation equation and write relax.csv",
        "solve": "solve a diffusion problem and write modes.csv / field snapshots",
        "verify": "run the estimate checks and write report.json / report.txt",
        "admissible": "probe the kernel admissibility conditions",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for mode solves (0 = auto)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except GFDEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
