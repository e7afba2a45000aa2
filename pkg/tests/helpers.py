"""Builders shared by the test modules."""

import numpy as np

from hypermoment import (
    FunctionTable,
    build_hypergroup,
    derivative_moment_sequence,
    order_basis_by_degree,
    preset,
    random_recurrence,
)


def chebyshev():
    return preset("chebyshev")


def random_recurrences(count, seed=1234, n_terms=64):
    rng = np.random.default_rng(seed)
    return [random_recurrence(rng, n_terms) for _ in range(count)]


def scrambled_variety(rec, lam, order, window, rng, table=None):
    """Derivative moment variety in a random upper triangular (degree-ordered) basis.

    Returns ``(table, variety, sequence)``.
    """
    table = table if table is not None else build_hypergroup(rec, window)
    seq = derivative_moment_sequence(rec, lam, order, window)
    u = np.triu(rng.normal(size=(order + 1, order + 1)) + 1j * rng.normal(size=(order + 1, order + 1)))
    np.fill_diagonal(u, rng.uniform(0.5, 2.0, order + 1))
    basis = [FunctionTable(v) for v in u.T @ seq.matrix()]
    # shuffle so that the degree ordering has to be recovered
    perm = rng.permutation(order + 1)
    variety = order_basis_by_degree(table, [basis[i] for i in perm], seq[0])
    return table, variety, seq


def span_mismatch(a, b):
    """Largest relative defect of fitting the rows of each array by the other."""
    from hypermoment.spaces import fit_in_span

    _, r1 = fit_in_span(a, b)
    _, r2 = fit_in_span(b, a)
    return float(max(r1.max(), r2.max()))
