import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypermoment import (
    ConvolutionTable,
    FunctionTable,
    WindowError,
    build_hypergroup,
    check_axioms,
    convolve,
    preset,
    product_table,
    translate,
)


def chebyshev_oracle(x, y):
    # cos(x t) cos(y t) = (cos((x+y) t) + cos(|x-y| t)) / 2
    out = {}
    for k in (x + y, abs(x - y)):
        out[k] = out.get(k, 0.0) + 0.5
    return out


def test_convolve_chebyshev_examples(cheb16):
    assert convolve(cheb16, 2, 3) == {1: 0.5, 5: 0.5}
    assert convolve(cheb16, 1, 1) == {0: 0.5, 2: 0.5}
    assert convolve(cheb16, 0, 5) == {5: 1.0}


def test_convolve_matches_product_to_sum_formula(cheb16):
    for x in range(17):
        for y in range(17):
            got = convolve(cheb16, x, y)
            assert got.keys() == chebyshev_oracle(x, y).keys()
            for k, g in chebyshev_oracle(x, y).items():
                assert got[k] == pytest.approx(g, abs=1e-15)


def test_convolve_outside_window(cheb16):
    with pytest.raises(WindowError) as info:
        convolve(cheb16, 17, 0)
    assert info.value.first_invalid == 17


def test_translate_linear_function(cheb16):
    # for f(n) = n^2: average of (x+y)^2 and (x-y)^2 is x^2 + y^2
    f = FunctionTable(np.arange(33.0) ** 2)
    t = translate(cheb16, f, 3)
    x = np.arange(len(t))
    assert np.allclose(t.values, x**2 + 9)


def test_translate_by_identity_is_identity(cheb16):
    f = FunctionTable(np.random.default_rng(0).normal(size=17))
    assert np.array_equal(translate(cheb16, f, 0).values, f.values)


def test_translate_short_window_names_first_invalid_point(cheb16):
    f = FunctionTable(np.ones(10))
    # x*4 reaches x+4, which must stay below 10
    t = translate(cheb16, f, 4)
    assert len(t) == 6
    with pytest.raises(WindowError) as info:
        translate(cheb16, f, 4, n_points=8)
    assert info.value.first_invalid == 6


def test_chebyshev_axioms_exact():
    table = build_hypergroup(preset("chebyshev"), 32)
    rep = check_axioms(table)
    assert rep.passed
    assert rep.max_negativity == 0.0
    assert rep.max_associativity_defect <= 1e-15


def test_axioms_detect_negative_weight():
    weights = {(0, 0): {0: 1.0}, (0, 1): {1: 1.0}, (1, 0): {1: 1.0}, (1, 1): {0: 1.2, 1: -0.2}}
    rep = check_axioms(ConvolutionTable(1, weights))
    assert rep.max_negativity == pytest.approx(0.2)
    assert not rep.passed


def test_axioms_detect_mass_and_commutativity_defects():
    weights = {
        (0, 0): {0: 1.0},
        (0, 1): {1: 1.0},
        (1, 0): {1: 1.0},
        (1, 1): {0: 0.5, 1: 0.6},
    }
    rep = check_axioms(ConvolutionTable(1, weights))
    assert rep.max_mass_defect == pytest.approx(0.1)

    weights = {
        (0, 0): {0: 1.0},
        (0, 1): {1: 1.0},
        (1, 0): {1: 1.0},
        (1, 1): {0: 1.0},
        (0, 2): {2: 1.0},
        (2, 0): {2: 1.0},
        (1, 2): {1: 1.0},
        (2, 1): {2: 1.0},
        (2, 2): {0: 1.0},
    }
    rep = check_axioms(ConvolutionTable(2, weights))
    assert rep.max_commutativity_defect == pytest.approx(1.0)


def test_axioms_detect_broken_identity():
    weights = {(0, 0): {0: 1.0}, (0, 1): {0: 1.0}, (1, 0): {1: 1.0}, (1, 1): {0: 1.0}}
    assert not check_axioms(ConvolutionTable(1, weights)).identity_ok


def test_partial_table_reports_missing_pairs():
    table = ConvolutionTable(2, {(0, 0): {0: 1.0}})
    assert not table.has_pair(1, 1)
    with pytest.raises(WindowError):
        table.support(1, 1)


def test_product_table_is_a_hypergroup(cheb):
    h = build_hypergroup(cheb, 4)
    p = product_table(h, h, 4)
    assert p.n_max == 24
    assert check_axioms(p).passed
    # (1, 0) * (0, 1) = (1, 1) encoded as 1 + 5
    assert convolve(p, 1, 5) == {6: 1.0}


def test_function_table_validation_and_arithmetic():
    with pytest.raises(ValueError):
        FunctionTable([np.nan])
    with pytest.raises(ValueError):
        FunctionTable([])
    f = FunctionTable([1, 2, 3])
    g = FunctionTable([1, 1])
    assert np.array_equal((f + g).values, [2, 3])
    assert np.array_equal((2 * f - f).values, f.values)
    assert f.truncated(1).n_max == 1
    with pytest.raises(WindowError):
        f.truncated(5)
    with pytest.raises(ValueError):
        f.values[0] = 3


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 8), st.integers(0, 8))
def test_translation_operators_commute(y, z):
    table = build_hypergroup(preset("chebyshev"), 12)
    f = FunctionTable(np.cos(0.3 * np.arange(40)) + np.arange(40) ** 1.5)
    a = translate(table, translate(table, f, y), z)
    b = translate(table, translate(table, f, z), y)
    n = min(len(a), len(b))
    assert np.allclose(a.values[:n], b.values[:n], rtol=1e-12, atol=1e-9)
