"""Hypothesis-driven structural properties over arbitrary small digraphs."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from hopscope import (
    add_self_loops,
    degrees,
    from_edge_list,
    mat_power_count,
    mat_power_support,
    support_equal,
    support_of,
    support_subset,
    symmetrize,
    transpose,
)


@st.composite
def digraphs(draw, max_nodes=8, max_edges=20):
    n = draw(st.integers(min_value=1, max_value=max_nodes))
    edges = draw(
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
            max_size=max_edges,
        )
    )
    return from_edge_list(edges, n)


@given(digraphs())
@settings(max_examples=60, deadline=None)
def test_transpose_is_an_involution(a):
    assert transpose(transpose(a)) == a


@given(digraphs())
@settings(max_examples=60, deadline=None)
def test_degree_mass_conserved(a):
    assert degrees(a, "in").total == degrees(a, "out").total == int(a.values.sum())


@given(digraphs(), st.integers(min_value=1, max_value=4))
@settings(max_examples=40, deadline=None)
def test_self_loops_make_patterns_grow(a, k):
    looped = add_self_loops(a)
    assert support_subset(mat_power_support(looped, k), mat_power_support(looped, k + 1))


@given(digraphs(), st.integers(min_value=1, max_value=4))
@settings(max_examples=40, deadline=None)
def test_symmetric_patterns_grow_by_two(a, k):
    s = symmetrize(a)
    assert support_subset(mat_power_support(s, k), mat_power_support(s, k + 2))


@given(digraphs(max_nodes=6), st.integers(min_value=0, max_value=4))
@settings(max_examples=40, deadline=None)
def test_support_power_agrees_with_count_power(a, k):
    assert support_equal(mat_power_support(a, k), support_of(mat_power_count(a, k)))


@given(digraphs(max_nodes=6), st.integers(0, 3), st.integers(0, 3))
@settings(max_examples=40, deadline=None)
def test_count_powers_multiply(a, k1, k2):
    lhs = mat_power_count(a, k1 + k2).to_dense()
    rhs = mat_power_count(a, k1).to_dense() @ mat_power_count(a, k2).to_dense()
    assert np.array_equal(lhs, rhs)
