from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hypermoment import (
    AdmissibilityError,
    ConditioningError,
    ConfigError,
    FunctionTable,
    MomentSequence,
    ThreeTermRecurrence,
    WindowError,
    build_hypergroup,
    check_axioms,
    demo_pointwise_density,
    derivative_jet,
    derivative_moment_sequence,
    exponential_at,
    preset,
    random_recurrence,
    reconstruct,
    sine_at,
)

LAM = sp.Symbol("lam")

# a rational recurrence used for exact oracles
RATIONAL = (Fraction(3, 5), Fraction(1, 10), Fraction(3, 10))


def rational_recurrence(n_terms=40):
    a, b, c = (np.full(n_terms, float(v)) for v in RATIONAL)
    a[0], b[0], c[0] = 1.0, 0.0, 0.0
    return ThreeTermRecurrence(a, b, c, name="rational")


def sympy_family(n_max):
    a, b, c = (sp.Rational(v.numerator, v.denominator) for v in RATIONAL)
    polys = [sp.Integer(1), LAM]
    for n in range(1, n_max):
        polys.append(sp.expand(((LAM - b) * polys[n] - c * polys[n - 1]) / a))
    return polys


def sympy_linearization(polys, x, y):
    """Coefficients of P_x P_y in the basis P_k by leading term elimination."""
    rest = sp.Poly(sp.expand(polys[x] * polys[y]), LAM)
    out = {}
    for k in range(x + y, -1, -1):
        lead_k = sp.Poly(polys[k], LAM).coeff_monomial(LAM**k)
        coef = rest.coeff_monomial(LAM**k) / lead_k
        if coef != 0:
            out[k] = coef
            rest = rest - sp.Poly(coef * polys[k], LAM)
    assert rest.is_zero
    return out


def test_recurrence_validation():
    with pytest.raises(AdmissibilityError):
        ThreeTermRecurrence([0.5, 0.5], [0.0, 0.0], [0.0, 0.5])
    with pytest.raises(AdmissibilityError):
        ThreeTermRecurrence([1.0, 0.5], [0.0, 0.2], [0.0, 0.5])
    with pytest.raises(AdmissibilityError):
        ThreeTermRecurrence([1.0, 0.5], [0.0, -0.1], [0.0, 0.6])
    with pytest.raises(ConfigError):
        ThreeTermRecurrence([1.0], [0.0], [0.0])
    with pytest.raises(ConfigError):
        preset("legendre")


def test_window_beyond_recurrence_length():
    rec = rational_recurrence(10)
    with pytest.raises(WindowError):
        build_hypergroup(rec, 5)


def test_linearization_matches_exact_sympy_oracle():
    polys = sympy_family(12)
    table = build_hypergroup(rational_recurrence(), 6)
    for x in range(7):
        for y in range(7):
            exact = sympy_linearization(polys, x, y)
            ks, ws = table.support(x, y)
            got = dict(zip(ks.tolist(), ws.tolist()))
            assert got.keys() == exact.keys()
            for k, v in exact.items():
                assert got[k] == pytest.approx(float(v), rel=1e-13, abs=1e-15)


def test_negative_linearization_is_rejected():
    a = np.full(20, 0.5)
    c = np.full(20, 0.5)
    a[0], c[0] = 1.0, 0.0
    a[1], c[1] = 0.3, 0.7
    a[2], c[2] = 0.95, 0.05
    with pytest.raises(AdmissibilityError) as info:
        build_hypergroup(ThreeTermRecurrence(a, np.zeros(20), c), 8)
    assert info.value.where == (2, 2, 2)


def test_jet_matches_sympy_derivatives():
    polys = sympy_family(10)
    rec = rational_recurrence()
    for lam in (sp.Rational(1, 3), sp.Rational(-7, 10)):
        jet = derivative_jet(rec, float(lam), 3, 10)
        for k in range(4):
            exact = [float(sp.diff(p, LAM, k).subs(LAM, lam)) for p in polys]
            assert np.allclose(jet[k].real, exact, rtol=1e-12, atol=1e-12)


def test_chebyshev_exponential_and_sine_closed_forms(cheb):
    # T_n(cos t) = cos(n t) and T_n'(1) = n^2
    t = 0.7
    m = exponential_at(cheb, np.cos(t), 20)
    assert np.allclose(m.values, np.cos(np.arange(21) * t), atol=1e-13)
    s = sine_at(cheb, 1.0, 1.0, 30)
    assert np.array_equal(s.values.real, np.arange(31.0) ** 2)
    jet = derivative_jet(cheb, 1.0, 5, 5)
    assert np.array_equal(jet[2].real, [0, 0, 4, 24, 80, 200])


@pytest.mark.parametrize("lam", [1.0, 0.5, 0.3 + 0.2j])
def test_jet_agrees_with_central_differences(cheb, random_recs, lam):
    h = 1e-5
    for rec in [cheb] + random_recs:
        plus = derivative_jet(rec, lam + h, 1, 12)
        minus = derivative_jet(rec, lam - h, 1, 12)
        jet = derivative_jet(rec, lam, 2, 12)
        for k in (1, 2):
            fd = (plus[k - 1] - minus[k - 1]) / (2 * h)
            scale = np.max(np.abs(jet[k]))
            assert np.max(np.abs(fd - jet[k])) <= 1e-5 * scale


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_recurrences_give_hypergroups(seed):
    rec = random_recurrence(np.random.default_rng(seed), 49)
    assert check_axioms(build_hypergroup(rec, 24), tol=1e-10).passed


def test_moment_sequence_validation():
    with pytest.raises(ValueError):
        MomentSequence(1, (FunctionTable([1.0]),))
    with pytest.raises(ValueError):
        MomentSequence(0, (FunctionTable([2.0, 1.0]),))
    seq = derivative_moment_sequence(preset("chebyshev"), 0.5, 3, 8)
    assert seq.matrix().shape == (4, 9)


def test_density_small_example(cheb):
    data = FunctionTable(np.arange(4.0) ** 2)
    gamma = demo_pointwise_density(cheb, 1.0, data)
    assert np.allclose(gamma, [0, 1, 0, 0], atol=1e-13)
    rebuilt = reconstruct(cheb, 1.0, gamma, 3)
    assert np.max(np.abs(rebuilt.values - data.values)) <= 1e-12 * 9


def test_density_of_the_exponential_itself(cheb):
    m = exponential_at(cheb, 0.3, 5)
    assert np.allclose(demo_pointwise_density(cheb, 0.3, m), [1, 0, 0, 0, 0, 0], atol=1e-12)


def test_density_random_data(cheb, rng):
    data = FunctionTable(rng.normal(size=6) + 1j * rng.normal(size=6))
    rebuilt = reconstruct(cheb, 0.3, demo_pointwise_density(cheb, 0.3, data), 5)
    assert np.max(np.abs(rebuilt.values - data.values)) <= 1e-8 * np.max(np.abs(data.values))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1, 1))
def test_random_exponentials_satisfy_the_product_law(seed, lam):
    from hypermoment import verify_exponential

    rec = random_recurrence(np.random.default_rng(seed), 61)
    table = build_hypergroup(rec, 30)
    assert verify_exponential(table, exponential_at(rec, lam, 60)).max_rel <= 1e-9


def test_density_solution_matches_dense_solver(cheb, rng):
    data = FunctionTable(rng.normal(size=8) + 1j * rng.normal(size=8))
    gamma = demo_pointwise_density(cheb, 0.4, data)
    matrix = derivative_jet(cheb, 0.4, 7, 7).T
    assert np.allclose(gamma, np.linalg.solve(matrix, data.values), rtol=1e-10)


def test_density_conditioning_error(cheb):
    data = FunctionTable(np.ones(12))
    with pytest.raises(ConditioningError) as info:
        demo_pointwise_density(cheb, 1.0, data, max_condition=10.0)
    assert info.value.condition_number > 10.0
