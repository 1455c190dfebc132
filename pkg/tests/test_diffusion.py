from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gfde.diffusion import (
    CoefficientPath,
    DiffusionProblem,
    SeparableSource,
    apply_generator,
    picard_solve_mode,
    solve,
    solve_mode,
    time_profile,
)
from gfde.errors import AdmissibilityError, ArgumentError, ConfigurationError, ConvergenceError, DomainError
from gfde.gcaputo import TimeGrid, apply_derivative
from gfde.kernel import CaputoPower, MultiTerm
from gfde.relaxation import mittag_leffler, solve_relaxation
from gfde.spectrum import SpectralModel, analyze

K = CaputoPower(0.5)
LIN = {"preset": "linear", "c0": 1.0, "c1": 0.5}


def test_time_profiles():
    g = TimeGrid(2.0, 4)
    assert np.allclose(time_profile(3.0, g), 3.0)
    assert np.allclose(time_profile({"preset": "linear", "c0": 1, "c1": 2}, g), 1 + 2 * g.nodes)
    assert np.allclose(time_profile({"preset": "cosine", "c0": 1, "c1": 1, "freq": 0.25}, g),
                       1 + np.cos(np.pi * g.nodes / 2))
    assert np.allclose(time_profile({"preset": "sampled", "values": [0, 4]}, g), 2 * g.nodes)
    for bad in [{"preset": "nope"}, {"preset": "linear", "c0": 1}, "x", {"preset": "sampled", "values": [1]}]:
        with pytest.raises(ConfigurationError):
            time_profile(bad, g)


def test_coefficient_path():
    g = TimeGrid(1.0, 10)
    c = CoefficientPath.from_presets(g, LIN, 0.3)
    assert (c.a0, c.a1, c.b0, c.b1) == (1.0, 1.5, 0.3, 0.3)
    assert c.c_ab == 1.5 and not c.is_constant
    assert np.allclose(c.rate(4.0, 0.5), 2 * c.a + 0.3)
    assert c.rate(np.array([0.0, 1.0]), 1.0).shape == (2, 11)
    with pytest.raises(ConfigurationError):
        CoefficientPath.constant(g, -1.0, 0.0)
    with pytest.raises(AdmissibilityError):
        CoefficientPath.constant(g, 0.0, 0.0).require_homogeneous_admissible()


def test_solve_mode_against_mittag_leffler():
    g = TimeGrid(1.0, 4096)
    u = solve_mode(K, 1.0, 1.0, CoefficientPath.constant(g, 1.0, 0.0), None, 1.0, g)
    assert np.max(np.abs(u - mittag_leffler(0.5, -g.nodes**0.5))) <= 5e-3
    u = solve_mode(K, 4.0, 0.5, CoefficientPath.constant(g, 1.0, 0.0), None, -2.0, g)
    assert np.max(np.abs(u + 2 * mittag_leffler(0.5, -2.0 * g.nodes**0.5))) <= 1e-2


def test_zero_eigenvalue_is_relaxation():
    g = TimeGrid(1.0, 256)
    u = solve_mode(K, 0.0, 0.7, CoefficientPath.constant(g, 3.0, 0.8), None, 1.0, g)
    assert np.array_equal(u, solve_relaxation(K, 0.8, g).values)
    assert np.all(solve_mode(K, 2.0, 1.0, CoefficientPath.constant(g, 1, 0), None, 0.0, g) == 0)


def test_solve_mode_errors():
    g = TimeGrid(1.0, 16)
    with pytest.raises(AdmissibilityError):
        solve_mode(K, 1.0, 1.0, CoefficientPath.constant(g, 0.0, 0.0), None, 1.0, g)
    with pytest.raises(ArgumentError):
        solve_mode(K, 1.0, 1.0, CoefficientPath.constant(g, 1.0, 0.0), np.zeros(5), 1.0, g)


def test_picard_constant_coefficients_one_iteration():
    g = TimeGrid(1.0, 512)
    res = picard_solve_mode(K, 2.0, 1.0, CoefficientPath.constant(g, 1.0, 0.5), np.ones(513), 1.0, g)
    assert res.iterations == 1 and res.residuals[0] == 0.0


def test_picard_matches_stepping_and_contracts():
    g = TimeGrid(1.0, 2048)
    c = CoefficientPath.from_presets(g, LIN, 0.5)
    u = solve_mode(K, 1.0, 1.0, c, None, 1.0, g)
    res = picard_solve_mode(K, 1.0, 1.0, c, None, 1.0, g)
    assert np.max(np.abs(u - res.values)) <= 5e-3
    r = np.array(res.residuals)
    assert np.all(np.diff(r) < 0)
    assert res.residuals[-1] <= 1e-10


def test_picard_reports_nonconvergence():
    g = TimeGrid(1.0, 64)
    c = CoefficientPath.from_presets(g, {"preset": "linear", "c0": 0.1, "c1": 5.0}, 0.0)
    with pytest.raises(ConvergenceError) as info:
        picard_solve_mode(K, 10.0, 1.0, c, None, 1.0, g, max_iter=2)
    assert info.value.residual > 0


def _problem(g, u0, a=1.0, b=0.0, f=None, model=None, s=1.0, kernel=K):
    model = model or SpectralModel.torus(1, 16, 1)
    return DiffusionProblem(model, kernel, s, CoefficientPath.from_presets(g, a, b), u0, g, f)


def test_problem_validation():
    g = TimeGrid(1.0, 8)
    m = SpectralModel.torus(1, 16, 1)
    with pytest.raises(ArgumentError):
        _problem(g, np.zeros(3))
    with pytest.raises(DomainError):
        _problem(g, np.zeros(16), s=0.0)
    with pytest.raises(ArgumentError):
        _problem(g, np.zeros(16), f=np.zeros((9, 3)))
    with pytest.raises(ArgumentError):
        DiffusionProblem(m, K, 1.0, CoefficientPath.constant(TimeGrid(1.0, 9), 1, 0), np.zeros(16), g)


def test_single_mode_and_zero_data():
    g = TimeGrid(1.0, 64)
    u0 = np.zeros(16, dtype=complex)
    u0[5] = 1 - 2j
    tr = solve(_problem(g, u0))
    assert np.array_equal(tr.values[0], u0)
    assert np.all(np.delete(tr.values, 5, axis=1) == 0)
    assert np.all(solve(_problem(g, np.zeros(16))).values == 0)


def test_cosine_field_analytic():
    g = TimeGrid(1.0, 4096)
    m = SpectralModel.torus(1, 64, 1)
    x = m.points()[0]
    tr = solve(_problem(g, analyze(m, np.cos(2 * np.pi * x)), model=m))
    E = mittag_leffler(0.5, -4 * np.pi**2 * g.nodes**0.5)
    err = max(np.max(np.abs(tr.field(n).samples - np.cos(2 * np.pi * x) * E[n])) for n in range(0, 4097, 64))
    assert err <= 5e-3


def test_apply_generator_examples():
    g = TimeGrid(1.0, 32)
    zero = _problem(g, np.zeros(16))
    assert np.all(apply_generator(zero, solve(zero), 5) == 0)
    rng = np.random.default_rng(0)
    p = _problem(g, rng.standard_normal(16), a=LIN, b=0.3)
    tr = solve(p)
    n = 7
    rate = p.coeffs.a[n] * p.model.eigenvalues + p.coeffs.b[n]
    assert np.allclose(apply_generator(p, tr, n), -rate * tr.values[n], rtol=0, atol=0)
    with pytest.raises(DomainError):
        apply_generator(p, tr, 0)


def test_generator_consistent_with_derivative():
    g = TimeGrid(1.0, 4096)
    m = SpectralModel.torus(1, 16, 1)
    rng = np.random.default_rng(2)
    p = _problem(g, analyze(m, rng.standard_normal(16)), a=LIN, b=0.3, model=m)
    # the uniform scheme satisfies the discrete equation, so both routes agree
    tr = solve(p, startup_substeps=0)
    worst = max(np.max(np.abs(apply_generator(p, tr, n) - apply_derivative(K, tr.values, g, n)))
                for n in range(1, 4097, 13))
    assert worst <= 5e-2
    # with the refined start the two routes differ only inside the first steps
    tr = solve(p)
    worst = max(np.max(np.abs(apply_generator(p, tr, n) - apply_derivative(K, tr.values, g, n)))
                for n in range(64, 4097, 13))
    assert worst <= 5e-2


def test_thread_count_does_not_change_result():
    g = TimeGrid(1.0, 128)
    m = SpectralModel.torus(2, 16, 1)
    rng = np.random.default_rng(4)
    f = SeparableSource(time_profile({"preset": "cosine", "c0": 1, "c1": 0.5}, g),
                        analyze(m, rng.standard_normal((16, 16))))
    p = _problem(g, analyze(m, rng.standard_normal((16, 16))), a=LIN, b=0.2, f=f, model=m)
    ref = solve(p, threads=1).values
    for th in (2, 3, 0):
        assert np.array_equal(solve(p, threads=th).values, ref)


def test_linearity():
    g = TimeGrid(1.0, 128)
    m = SpectralModel.torus(1, 32, 1)
    rng = np.random.default_rng(6)
    u0 = analyze(m, rng.standard_normal(32))
    f = SeparableSource(time_profile({"preset": "linear", "c0": 1, "c1": -1}, g), analyze(m, rng.standard_normal(32)))
    p = _problem(g, u0, a=LIN, b=0.3, f=f, model=m)
    full = solve(p).values
    parts = solve(p.with_data(f=None)).values + solve(p.with_data(u0=np.zeros(32))).values
    assert np.max(np.abs(full - parts)) <= 1e-12


def test_dense_source_matches_separable():
    g = TimeGrid(1.0, 32)
    m = SpectralModel.torus(1, 8, 1)
    prof = time_profile({"preset": "cosine", "c0": 0, "c1": 1}, g)
    coef = analyze(m, np.cos(2 * np.pi * m.points()[0]))
    sep = solve(_problem(g, np.zeros(8), b=0.5, f=SeparableSource(prof, coef), model=m)).values
    dense = solve(_problem(g, np.zeros(8), b=0.5, f=prof[:, None] * coef[None, :], model=m)).values
    assert np.allclose(sep, dense, rtol=0, atol=1e-15)


kernels = st.sampled_from([CaputoPower(0.3), CaputoPower(0.8), MultiTerm(((1.0, 0.4), (1.0, 0.9)))])


@given(kernels, st.floats(0.0, 1e3), st.floats(0.25, 1.5), st.floats(0.0, 2.0), st.floats(0.0, 2.0),
       st.floats(0.05, 2.0), st.floats(-3, 3))
def test_contraction_and_sign(kernel, mu, s, a_slope, b_level, a0, u0):
    g = TimeGrid(1.0, 64)
    c = CoefficientPath.from_presets(g, {"preset": "linear", "c0": a0, "c1": a_slope}, b_level)
    u = solve_mode(kernel, mu, s, c, None, u0, g)
    assert np.all(np.abs(u) <= abs(u0) + 1e-10)
    assert np.all(np.sign(u0) * u >= -1e-10)


@given(kernels, st.floats(0.0, 1e3), st.floats(0.0, 2.0), st.floats(0.05, 2.0), st.floats(0.0, 5.0))
def test_comparison_with_frozen_coefficients(kernel, mu, a_slope, b0, u0):
    g = TimeGrid(1.0, 64)
    c = CoefficientPath.from_presets(g, {"preset": "linear", "c0": 0.5, "c1": a_slope},
                                     {"preset": "cosine", "c0": b0 + 0.5, "c1": 0.5})
    frozen = CoefficientPath.constant(g, c.a0, c.b0)
    u = solve_mode(kernel, mu, 1.0, c, None, u0, g)
    w = solve_mode(kernel, mu, 1.0, frozen, None, u0, g)
    assert np.all(u >= -1e-10)
    assert np.all(u <= w + 1e-8)
