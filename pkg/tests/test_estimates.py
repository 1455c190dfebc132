from __future__ import annotations

import json
import math

import numpy as np
import pytest

from gfde.diffusion import CoefficientPath, DiffusionProblem, SeparableSource, solve, time_profile
from gfde.errors import AdmissibilityError, ArgumentError, ConfigurationError, MisuseError
from gfde.estimates import (
    CheckResult,
    check_comparison,
    check_homogeneous,
    check_inhomogeneous,
    check_maximum_principle,
    check_sign_preservation,
    source_bound_rate,
)
from gfde.gcaputo import TimeGrid
from gfde.kernel import CaputoPower
from gfde.spectrum import SpectralModel, analyze, sobolev_norm

K = CaputoPower(0.5)
M64 = SpectralModel.torus(1, 64, 1)


def _problem(g, u0, a=1.0, b=0.0, f=None, model=M64, s=1.0):
    return DiffusionProblem(model, K, s, CoefficientPath.from_presets(g, a, b), u0, g, f)


def _random_u0(model, seed):
    return analyze(model, np.random.default_rng(seed).standard_normal(model.field_shape))


def test_check_result_relations():
    assert CheckResult.judge("X", 1.0 + 1e-9, 1.0, 1e-8).ok
    assert not CheckResult.judge("X", 1.0 + 1e-7, 1.0, 1e-8).ok
    assert CheckResult.judge("X", -1e-4, 0.0, 1e-3, relation="ge").ok
    assert not CheckResult.judge("X", 0.0, 0.0, 0.0, relation="gt").ok
    assert CheckResult.vacuous("X", 1.0, 0.0).verdict == "vacuous"
    with pytest.raises(ValueError):
        CheckResult.judge("X", 0, 0, 0, relation="eq")


def test_homogeneous_example_constant_one():
    g = TimeGrid(1.0, 256)
    p = _problem(g, _random_u0(M64, 1))
    rep = check_homogeneous(p, solve(p), 1.0)
    assert [c.name for c in rep.checks] == ["MI01", "MI02", "MI03", "MI04"]
    assert rep.ok
    assert rep.by_name("MI01")[0].ratio <= 1 + 1e-8
    assert rep.by_name("MI03")[0].bound == 2.0


def test_homogeneous_gamma_zero_and_vacuous():
    g = TimeGrid(1.0, 64)
    p = _problem(g, _random_u0(M64, 2), a={"preset": "linear", "c0": 1, "c1": 0.5}, b=0.3)
    rep = check_homogeneous(p, solve(p), 0.0)
    assert rep.by_name("MI02")[0].ratio == pytest.approx(rep.by_name("MI01")[0].ratio, rel=1e-15)
    assert rep.by_name("MI03")[0].bound == pytest.approx(3.0)
    z = _problem(g, np.zeros(64))
    rep = check_homogeneous(z, solve(z), 1.0)
    assert rep.ok and {c.verdict for c in rep.checks} == {"vacuous"}


def test_homogeneous_rejects_source():
    g = TimeGrid(1.0, 8)
    p = _problem(g, np.zeros(64), b=1.0, f=SeparableSource(np.ones(9), np.ones(64)))
    with pytest.raises(MisuseError):
        check_homogeneous(p, solve(p), 0.0)


@pytest.mark.parametrize("a", [1.0, {"preset": "linear", "c0": 1, "c1": 0.5}])
def test_mi01_nonincreasing_for_single_mode(a):
    # holds for nondecreasing rates; a falling rate lets the memory term pull |u| back up
    g = TimeGrid(1.0, 256)
    u0 = np.zeros(64, dtype=complex)
    u0[M64.mode_position((2,))] = 1.0 + 0.5j
    p = _problem(g, u0, a=a, b=0.2)
    norms = sobolev_norm(M64, solve(p).values, 0.0)
    assert np.all(np.diff(norms) <= 1e-15)


def test_source_bound_constant_field():
    # b = 1, a = 0, constant source field, zero initial data: ||u^f|| <= ||f||
    g = TimeGrid(1.0, 256)
    coef = analyze(M64, np.full(64, 2.5))
    p = _problem(g, np.zeros(64), a=0.0, b=1.0, f=SeparableSource(np.ones(257), coef))
    rep = check_inhomogeneous(p, solve(p), 0.0)
    i01 = rep.by_name("I01")[0]
    assert i01.bound == 1.0 and i01.ok
    # exact answer 2.5 (1 - E(-t^alpha)) has norm below 2.5
    assert i01.ratio < 1.0
    assert rep.by_name("SPLIT")[0].ratio <= 1e-12


def test_source_reduces_to_homogeneous():
    g = TimeGrid(1.0, 32)
    p = _problem(g, _random_u0(M64, 3), b=0.5)
    rep = check_inhomogeneous(p, solve(p), 1.0)
    assert [c.name for c in rep.checks] == ["MI01", "MI02", "MI03", "MI04"]


def test_source_preconditions():
    g = TimeGrid(1.0, 16)
    f = SeparableSource(np.ones(17), analyze(M64, np.ones(64)))
    p = _problem(g, np.zeros(64), a=1.0, b=0.0, f=f)
    with pytest.raises(ConfigurationError, match="b0"):
        check_inhomogeneous(p, solve(p), 0.0)
    with pytest.raises(AdmissibilityError):
        source_bound_rate(p, gap_override=True)  # torus contains the zero mode
    h = SpectralModel.heisenberg(4, 0.5, 4.0, 8)
    ph = DiffusionProblem(h, K, 0.5, CoefficientPath.constant(g, 2.0, 0.1), np.zeros(h.size), g)
    lam, origin = source_bound_rate(ph, gap_override=True)
    assert lam == pytest.approx(2.0 * h.spectral_gap**0.5 + 0.1) and origin == "a0*gap^s+b0"
    assert source_bound_rate(ph) == (pytest.approx(0.1), "b0")


def test_maximum_principle_examples():
    g = TimeGrid(1.0, 4096)
    const = check_maximum_principle(K, np.full(4097, 3.0), g)
    assert const.ok
    t = g.nodes
    sin = check_maximum_principle(K, np.sin(np.pi * t), g)
    assert sin.ok and sin.ratio >= -1e-3
    lin = check_maximum_principle(K, t, g)
    assert lin.ok
    # argmin at t = 0 is excluded, so the measured value is D v(1)
    assert lin.ratio == pytest.approx(1.0 / math.gamma(1.5), rel=1e-10)
    with pytest.raises(ArgumentError):
        check_maximum_principle(K, np.zeros(3), g)


def test_maximum_principle_flags_a_wrong_sign():
    g = TimeGrid(1.0, 64)
    bad = check_maximum_principle(K, g.nodes, g, tol_scheme=0.0)
    assert bad.ok
    # a kernel-agnostic impossible case: declare tolerance negative
    assert not CheckResult.judge("MAXPRIN", -1.0, 0.0, 0.5, relation="ge").ok


def test_sign_preservation_examples():
    g = TimeGrid(1.0, 128)
    c = CoefficientPath.from_presets(g, {"preset": "linear", "c0": 1, "c1": 1}, 0.2)
    assert check_sign_preservation(K, 5.0, 1.0, c, None, 1.0, g).ok
    neg = check_sign_preservation(K, 5.0, 1.0, c, -np.ones(129), -1.0, g)
    assert neg.ok and neg.note == "nonpositive data"
    z = check_sign_preservation(K, 5.0, 1.0, c, np.zeros(129), 0.0, g)
    assert z.ok and z.ratio == 0.0
    with pytest.raises(MisuseError):
        check_sign_preservation(K, 5.0, 1.0, c, -np.ones(129), 1.0, g)
    with pytest.raises(MisuseError):
        check_sign_preservation(K, 5.0, 1.0, c, None, 1.0 + 1j, g)


def test_comparison():
    g = TimeGrid(1.0, 128)
    c = CoefficientPath.from_presets(g, {"preset": "linear", "c0": 0.5, "c1": 2}, {"preset": "cosine", "c0": 1,
                                                                                    "c1": 0.5})
    r = check_comparison(K, 3.0, 1.0, c, 1.0, g)
    assert r.ok and r.ratio >= 0
    with pytest.raises(MisuseError):
        check_comparison(K, 3.0, 1.0, c, -1.0, g)


def test_report_json_and_reproducibility():
    g = TimeGrid(1.0, 64)
    f = SeparableSource(time_profile({"preset": "cosine", "c0": 1, "c1": 0.5}, g),
                        analyze(M64, np.cos(2 * np.pi * M64.points()[0])))

    def run():
        p = _problem(g, _random_u0(M64, 9), a={"preset": "linear", "c0": 1, "c1": 0.5}, b=0.5, f=f)
        return check_inhomogeneous(p, solve(p), 2.0)

    a, b = run(), run()
    assert a.to_json() == b.to_json()
    doc = json.loads(a.to_json())
    for entry in doc["checks"]:
        assert {"name", "ratio", "bound", "tol", "verdict"} <= set(entry)
    names = [c["name"] for c in doc["checks"]]
    assert names == ["MI01", "MI02", "MI03", "MI04", "SPLIT", "I01", "I02", "I03", "I04"]
    assert a.ok and a.to_text().endswith("OVERALL: PASS\n")
