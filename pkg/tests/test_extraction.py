import numpy as np
import pytest
from helpers import scrambled_variety, span_mismatch
from hypothesis import given, settings
from hypothesis import strategies as st

from hypermoment import (
    BasisNotDegreeOrderedError,
    FunctionTable,
    HypothesisViolatedError,
    IndependenceError,
    NonExponentialError,
    NotInSpanError,
    OrderLimitError,
    SineSpaceDimensionError,
    Variety,
    build_hypergroup,
    check_sine_space_dimension,
    derivative_moment_sequence,
    designated_sine,
    extract_moment_sequence,
    order_basis_by_degree,
    preset,
    product_table,
    verify_moment_sequence,
)
from hypermoment.extraction import MAX_ORDER


def two_sine_variety(side=5):
    """Functions 1, a^2, b^2 on a product of two Chebyshev hypergroups."""
    h = build_hypergroup(preset("chebyshev"), side)
    table = product_table(h, h, side)
    n = np.arange(table.n_max + 1)
    a, b = n % (side + 1), n // (side + 1)
    basis = [FunctionTable(np.ones(n.size)), FunctionTable(a**2.0), FunctionTable(b**2.0)]
    return table, basis


def test_moment_basis_round_trip_is_exact(cheb):
    table = build_hypergroup(cheb, 20)
    seq = derivative_moment_sequence(cheb, 0.5, 3, 20)
    result = extract_moment_sequence(table, Variety(seq.functions, (0, 1, 2, 3)))
    # the designated sine is f_1 scaled to first nonzero value 1
    s = seq[1] * (1.0 / seq[1][1])
    assert np.allclose(result.moments[1].values, s.values, rtol=1e-10)
    assert result.moment_residual.max_rel <= 1e-10
    # no lower-degree correction is needed for a basis that is itself a moment sequence
    assert max(result.corrections) <= 1e-8


@pytest.mark.parametrize("order", [1, 2, 3, 4])
@pytest.mark.parametrize("lam", [1.0, 0.5, 0.3 + 0.1j])
def test_round_trip_scrambled(cheb, random_recs, order, lam, rng):
    for rec in [cheb, random_recs[0]]:
        table, variety, seq = scrambled_variety(rec, lam, order, 20, rng)
        result = extract_moment_sequence(table, variety)
        assert len(result.alphas) == order
        assert all(abs(a) > 1e-7 for a in result.alphas)
        assert result.triangularity_defect <= 1e-9
        assert result.moment_residual.max_rel <= 1e-8
        assert span_mismatch(result.moments.matrix(), seq.matrix()) <= 1e-8
        assert np.allclose(result.moments[1].values, result.sine.values, rtol=0, atol=1e-9 * result.sine.scale())
        assert result.normalization_defect == pytest.approx(abs(result.alphas[-1] - 1))


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_extraction_does_not_depend_on_basis(seed):
    rng = np.random.default_rng(seed)
    rec = preset("chebyshev")
    table = build_hypergroup(rec, 20)
    _, v1, _ = scrambled_variety(rec, 0.5, 3, 20, rng, table)
    _, v2, _ = scrambled_variety(rec, 0.5, 3, 20, rng, table)
    r1 = extract_moment_sequence(table, v1)
    r2 = extract_moment_sequence(table, v2)
    # both are moment sequences generated by m with f_1 = s; they span the same space
    assert np.allclose(r1.moments[1].values, r2.moments[1].values, rtol=1e-9)
    assert span_mismatch(r1.moments.matrix(), r2.moments.matrix()) <= 1e-8


def test_order_zero_variety(cheb16, cheb):
    m = derivative_moment_sequence(cheb, 0.2, 0, 32)[0]
    result = extract_moment_sequence(cheb16, Variety((m,), (0,)))
    assert result.alphas == ()
    assert result.moments.order == 0


def test_two_dimensional_sine_space_is_rejected():
    table, basis = two_sine_variety()
    variety = order_basis_by_degree(table, basis, basis[0], ys=(1, 6))
    assert variety.degrees == (0, 1, 1)
    assert check_sine_space_dimension(table, variety) == 2
    with pytest.raises(SineSpaceDimensionError) as info:
        extract_moment_sequence(table, variety)
    assert info.value.dimension == 2
    assert info.value.spectrum[0] == pytest.approx(1.0)


def test_dependent_basis_is_rejected(cheb):
    table = build_hypergroup(cheb, 16)
    seq = derivative_moment_sequence(cheb, 1.0, 2, 16)
    basis = (seq[0], seq[1], seq[1] * 2.0)
    with pytest.raises(IndependenceError):
        extract_moment_sequence(table, Variety(basis, (0, 1, 2)))


def test_wrong_degree_labels_are_rejected(cheb):
    table = build_hypergroup(cheb, 20)
    seq = derivative_moment_sequence(cheb, 0.5, 3, 20)
    # f_1 and f_2 swapped: the translation matrix is no longer triangular
    basis = (seq[0], seq[2], seq[1], seq[3])
    with pytest.raises(BasisNotDegreeOrderedError):
        extract_moment_sequence(table, Variety(basis, (0, 1, 2, 3)))


def test_non_exponential_first_element(cheb):
    table = build_hypergroup(cheb, 16)
    seq = derivative_moment_sequence(cheb, 1.0, 1, 16)
    basis = (seq[0] + seq[1], seq[1])
    with pytest.raises(NonExponentialError):
        extract_moment_sequence(table, Variety(basis, (0, 1)))


def test_exponential_outside_span(cheb):
    table = build_hypergroup(cheb, 16)
    seq = derivative_moment_sequence(cheb, 1.0, 2, 16)
    with pytest.raises(NotInSpanError):
        order_basis_by_degree(table, [seq[1], seq[2]], seq[0])


def test_exponential_recovered_from_mixed_basis(cheb):
    table = build_hypergroup(cheb, 16)
    seq = derivative_moment_sequence(cheb, 1.0, 2, 16)
    variety = order_basis_by_degree(table, [seq[2] + seq[0], seq[1] + seq[0], seq[0] * 3.0], seq[0])
    assert variety.degrees == (0, 1, 2)


def test_order_limit():
    n = np.arange(60.0)
    basis = tuple(FunctionTable(n**k) for k in range(MAX_ORDER + 2))
    with pytest.raises(OrderLimitError):
        extract_moment_sequence(build_hypergroup(preset("chebyshev"), 20), Variety(basis, range(MAX_ORDER + 2)))


def test_small_alpha_threshold_is_enforced(cheb):
    table = build_hypergroup(cheb, 16)
    seq = derivative_moment_sequence(cheb, 1.0, 2, 16)
    with pytest.raises(HypothesisViolatedError):
        extract_moment_sequence(table, Variety(seq.functions, (0, 1, 2)), alpha_threshold=1e30)


def test_designated_sine_normalization(cheb):
    table = build_hypergroup(cheb, 16)
    seq = derivative_moment_sequence(cheb, 1.0, 2, 16)
    s = designated_sine(table, Variety(seq.functions, (0, 1, 2)))
    assert np.allclose(s.values, np.arange(17.0) ** 2)


def test_without_alignment_order_two_still_works(cheb, rng):
    table, variety, _ = scrambled_variety(cheb, 0.5, 2, 20, rng)
    result = extract_moment_sequence(table, variety, align=False)
    assert verify_moment_sequence(table, result.moments).max_rel <= 1e-8


def test_unaligned_rescaling_fails_for_generic_order_three_bases(cheb, rng):
    # the plain rescaled first row is a moment sequence only for special bases
    table, variety, _ = scrambled_variety(cheb, 0.5, 3, 20, rng)
    raw = extract_moment_sequence(table, variety, align=False)
    fixed = extract_moment_sequence(table, variety)
    assert raw.moment_residual.max_rel > 1e-4
    assert fixed.moment_residual.max_rel <= 1e-8
    assert max(fixed.corrections) > 1e-6
