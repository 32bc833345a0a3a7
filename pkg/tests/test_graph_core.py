import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pgstlab.graph_core import (
    AsymmetricSetError,
    CirculantGraph,
    CompositeGraph,
    ConnectionSet,
    DivisorSet,
    GraphLiteralError,
    IncompatibleOrderError,
    InvalidDivisorError,
    InvalidOrderError,
    NoAntipodeError,
    NonDisjointError,
    antipodal_pair,
    cartesian_product,
    complement_graph,
    divisor_decomposition,
    gcd_class,
    gcd_graph,
    is_gcd_set,
    make_cycle,
    parse_graph,
    union_graphs,
)


def test_cycle_adjacency():
    g = make_cycle(5)
    a = g.adjacency_matrix()
    assert a.sum(axis=1).tolist() == [2] * 5
    assert a[0, 1] == a[0, 4] == 1 and a[0, 2] == 0
    assert g.literal() == "circulant(5; 1,4)"


@pytest.mark.parametrize("n", [0, 1, 2])
def test_cycle_needs_three_vertices(n):
    with pytest.raises(InvalidOrderError):
        make_cycle(n)


def test_connection_set_rejects_asymmetric_and_zero():
    with pytest.raises(AsymmetricSetError):
        ConnectionSet(6, (1,))
    with pytest.raises(ValueError):
        ConnectionSet(6, (0,))
    assert ConnectionSet(6, (5, 1)).elements == (1, 5)


def test_gcd_classes():
    assert gcd_class(8, 1) == [1, 3, 5, 7]
    assert gcd_class(8, 2) == [2, 6]
    assert gcd_class(12, 4) == [4, 8]
    assert gcd_graph(8, [1]).connection.elements == (1, 3, 5, 7)
    with pytest.raises(InvalidDivisorError):
        DivisorSet(8, (3,))
    with pytest.raises(InvalidDivisorError):
        DivisorSet(8, (8,))


def test_union_and_complement():
    u = union_graphs(make_cycle(8), gcd_graph(8, [2]))
    assert u.connection.elements == (1, 2, 6, 7)
    with pytest.raises(NonDisjointError):
        union_graphs(make_cycle(8), gcd_graph(8, [1]))
    with pytest.raises(IncompatibleOrderError):
        union_graphs(make_cycle(8), make_cycle(6))
    c = complement_graph(make_cycle(6))
    assert c.connection.elements == (2, 3, 4)
    a = c.adjacency_matrix() + make_cycle(6).adjacency_matrix() + np.eye(6, dtype=int)
    assert (a == 1).all()


def test_divisor_decomposition():
    assert divisor_decomposition(gcd_graph(12, [1, 4]).connection).divisors == (1, 4)
    assert divisor_decomposition(make_cycle(8).connection) is None
    assert is_gcd_set(make_cycle(6).connection)  # {1,5} is the full class of gcd 1
    assert not is_gcd_set(make_cycle(8).connection)


def test_antipodal_pair():
    assert antipodal_pair(8, 3) == (3, 7)
    with pytest.raises(NoAntipodeError):
        antipodal_pair(7, 0)


def test_product_vertices_roundtrip():
    p = cartesian_product(make_cycle(4), make_cycle(6))
    assert p.order == 24 and p.degree == 4
    for idx in range(24):
        assert p.join_vertex(p.split_vertex(idx)) == idx
    assert p.split_vertex(7) == (1, 1)


def test_product_adjacency_is_kronecker_sum():
    a, b = make_cycle(3), make_cycle(4)
    p = cartesian_product(a, b)
    expected = np.kron(a.adjacency_matrix(), np.eye(4)) + np.kron(np.eye(3), b.adjacency_matrix())
    assert np.array_equal(p.adjacency_matrix(), expected)


def test_product_flattens():
    p = cartesian_product(cartesian_product(make_cycle(3), make_cycle(4)), make_cycle(5))
    assert p.orders == (3, 4, 5)


@pytest.mark.parametrize("text, elements", [
    ("cycle(8)", (1, 7)),
    (" circulant( 8 ; 1 , 7 , 2, 6 ) ", (1, 2, 6, 7)),
    ("gcd(8; 1)", (1, 3, 5, 7)),
    ("gcd(8;)", ()),
    ("union(cycle(8), gcd(8; 2))", (1, 2, 6, 7)),
    ("complement(cycle(6))", (2, 3, 4)),
    ("complement(union(cycle(8),gcd(8;4)))", (2, 3, 5, 6)),
])
def test_parse_circulants(text, elements):
    g = parse_graph(text)
    assert isinstance(g, CirculantGraph)
    assert g.connection.elements == elements


def test_parse_product():
    g = parse_graph("product(cycle(8), complement(cycle(8)), cycle(4))")
    assert isinstance(g, CompositeGraph)
    assert g.orders == (8, 8, 4)


@pytest.mark.parametrize("text, pos", [
    ("cycle(4", 7),
    ("cyc(4)", 0),
    ("circulant(6; 1)", None),
    ("cycle(4) extra", 9),
])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises((GraphLiteralError, AsymmetricSetError)) as info:
        parse_graph(text)
    if pos is not None:
        assert info.value.position == pos
        assert "^" in str(info.value)


def test_parse_rejects_complement_of_product():
    with pytest.raises(GraphLiteralError):
        parse_graph("complement(product(cycle(4), cycle(4)))")


@given(st.integers(3, 40), st.data())
@settings(max_examples=60, deadline=None)
def test_literal_roundtrip(n, data):
    half = list(range(1, n // 2 + 1))
    chosen = data.draw(st.lists(st.sampled_from(half), unique=True))
    elems = {s for c in chosen for s in (c, n - c)}
    g = CirculantGraph.from_elements(n, elems)
    again = parse_graph(g.literal())
    assert again == g
    a = g.adjacency_matrix()
    assert np.array_equal(a, a.T)
    assert (np.diag(a) == 0).all()
    assert (a.sum(axis=1) == len(elems)).all()


def test_all_gcd_sets_are_unions_of_classes():
    n = 12
    for r in range(0, 5):
        for ds in itertools.combinations([1, 2, 3, 4, 6], r):
            g = gcd_graph(n, ds)
            assert is_gcd_set(g.connection)
            assert divisor_decomposition(g.connection).divisors == tuple(sorted(ds))
