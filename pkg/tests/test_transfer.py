import io
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense_evolution
from pgstlab.graph_core import (
    CirculantGraph,
    cartesian_product,
    complement_graph,
    gcd_graph,
    make_cycle,
    union_graphs,
)
from pgstlab.spectra import eigenvalues
from pgstlab.transfer import (
    AmplitudeQuery,
    InconsistentQueryError,
    InvalidGridError,
    amplitude,
    amplitude_from_spectrum,
    complement_amplitude,
    fidelity_at_turns,
    fidelity_scan,
    mp_time_from_turns,
    periodicity_check,
    product_amplitude,
    reduce_phase,
    transition_row,
)


def random_circulant(n, rng):
    half = [c for c in range(1, n // 2 + 1) if rng.random() < 0.5]
    return CirculantGraph.from_elements(n, {s for c in half for s in (c, n - c)})


def test_c4_perfect_transfer():
    r = amplitude(make_cycle(4), 0, 2, math.pi / 2)
    assert abs(r.amplitude - (-1)) < 1e-12
    assert abs(r.fidelity - 1) < 1e-12


def test_c6_value():
    r = amplitude(make_cycle(6), 0, 3, 2 * math.pi / 3)
    assert abs(r.fidelity - math.sqrt(3) / 2) < 1e-12


def test_matches_dense_oracle(rng):
    for _ in range(60):
        n = int(rng.integers(3, 13))
        g = random_circulant(n, rng)
        t = float(rng.uniform(0, 50))
        h = dense_evolution(g.adjacency_matrix(), t)
        u, v = rng.integers(0, n, size=2)
        assert abs(amplitude(g, int(u), int(v), t).amplitude - h[u, v]) < 1e-9
        assert np.allclose(transition_row(g, int(u), t), h[u], atol=1e-9)


def test_product_matches_dense_oracle(rng):
    p = cartesian_product(make_cycle(4), complement_graph(make_cycle(5)))
    h = dense_evolution(p.adjacency_matrix(), 1.7)
    for _ in range(20):
        u, v = (int(x) for x in rng.integers(0, p.order, size=2))
        assert abs(amplitude(p, u, v, 1.7).amplitude - h[u, v]) < 1e-9
        assert abs(amplitude(p, p.split_vertex(u), p.split_vertex(v), 1.7).amplitude - h[u, v]) < 1e-9


@given(st.integers(3, 16), st.floats(0, 1e4), st.integers(0, 15), st.integers(0, 15), st.integers(0, 15))
@settings(max_examples=100, deadline=None)
def test_shift_invariance_and_symmetry(n, t, u, v, k):
    g = make_cycle(n)
    u, v, k = u % n, v % n, k % n
    a = amplitude(g, u, v, t).amplitude
    assert abs(a - amplitude(g, (u + k) % n, (v + k) % n, t).amplitude) < 1e-9
    assert abs(a - amplitude(g, v, u, t).amplitude) < 1e-9
    # time reversal conjugates the amplitude
    assert abs(amplitude(g, u, v, -t).amplitude - a.conjugate()) < 1e-9


@given(st.integers(3, 20), st.floats(0, 1e3))
@settings(max_examples=60, deadline=None)
def test_rows_are_unit_vectors(n, t):
    row = transition_row(make_cycle(n), 0, t)
    assert abs(np.sum(np.abs(row) ** 2) - 1) < 1e-10


def test_union_with_gcd_factorizes():
    c8, g2 = make_cycle(8), gcd_graph(8, [2])
    u = union_graphs(c8, g2)
    for t in (0.3, 2 * math.pi, 37.7, 1000.0):
        hu = dense_evolution(u.adjacency_matrix(), t)
        ref = dense_evolution(c8.adjacency_matrix(), t) @ dense_evolution(g2.adjacency_matrix(), t)
        assert np.allclose(hu, ref, atol=1e-9)
        assert abs(amplitude(u, 0, 3, t).amplitude - hu[0, 3]) < 1e-9


def test_complement_amplitude():
    g = make_cycle(7)
    c = complement_graph(g)
    for t in (0.5, 3.0, 11.0):
        a = complement_amplitude(AmplitudeQuery(g, 0, 3, t)).amplitude
        assert abs(a - amplitude(c, 0, 3, t).amplitude) < 1e-12


def test_product_amplitude_and_consistency():
    qs = [AmplitudeQuery(make_cycle(8), 0, 4, 2.0), AmplitudeQuery(make_cycle(4), 0, 2, 2.0)]
    expected = amplitude(make_cycle(8), 0, 4, 2.0).amplitude * amplitude(make_cycle(4), 0, 2, 2.0).amplitude
    assert abs(product_amplitude(qs).amplitude - expected) < 1e-14
    with pytest.raises(InconsistentQueryError):
        product_amplitude([AmplitudeQuery(make_cycle(8), 0, 4, 2.0), AmplitudeQuery(make_cycle(4), 0, 2, 3.0)])
    with pytest.raises(InconsistentQueryError):
        product_amplitude([])


def test_vertex_range_checked():
    with pytest.raises(IndexError):
        amplitude(make_cycle(8), 0, 9, 1.0)
    with pytest.raises(IndexError):
        AmplitudeQuery(make_cycle(8), -1, 0, 1.0)


def test_amplitude_from_spectrum_agrees():
    g = make_cycle(10)
    assert abs(amplitude_from_spectrum(eigenvalues(g), 2, 7, 4.2).amplitude
               - amplitude(g, 2, 7, 4.2).amplitude) < 1e-12


def test_large_time_float_and_mp_agree():
    g = make_cycle(8)
    q = 6
    f_float = amplitude(g, 0, 4, 12 * math.pi).fidelity
    f_mp = amplitude(g, 0, 4, mp_time_from_turns(q)).fidelity
    assert abs(f_float - 0.99786339) < 1e-7 and abs(f_mp - f_float) < 1e-10
    big = 10 ** 7 - 3
    turns = fidelity_at_turns(g, [big], 0, 4)[0]
    exact = amplitude(g, 0, 4, mp_time_from_turns(big)).fidelity
    assert abs(turns - exact) < 1e-6


def test_reduce_phase_range():
    for x in (0.0, math.pi, -math.pi, 7.0, -100.0, mpmath.mpf(10) ** 30):
        r = reduce_phase(x)
        assert -math.pi < r <= math.pi


def test_periodicity():
    assert periodicity_check(gcd_graph(8, [1]), 2 * math.pi)
    assert periodicity_check(make_cycle(4), 2 * math.pi)
    assert not periodicity_check(make_cycle(8), 2 * math.pi)


def test_scan_c6_ceiling():
    curve = fidelity_scan(make_cycle(6), 0, 3, 0, 100, 1e-3)
    assert abs(curve.max_fidelity - math.sqrt(3) / 2) < 1e-3
    assert curve.fidelities.max() <= 0.87
    assert curve.times.size == 100001


def test_scan_threads_identical():
    a = fidelity_scan(make_cycle(8), 0, 4, 0, 50, 1e-3)
    b = fidelity_scan(make_cycle(8), 0, 4, 0, 50, 1e-3, workers=4)
    assert np.array_equal(a.fidelities, b.fidelities)
    assert a.argmax_time == b.argmax_time


def test_scan_csv():
    curve = fidelity_scan(make_cycle(4), 0, 2, 0, 2, 0.5)
    buf = io.StringIO()
    curve.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,fidelity" and len(lines) == 6
    t, f = (float(x) for x in lines[2].split(","))
    assert t == 0.5 and f == curve.fidelities[1]


@pytest.mark.parametrize("start, stop, step", [(0, 10, 0), (0, 10, -1), (5, 5, 0.1), (5, 1, 0.1)])
def test_scan_bad_grid(start, stop, step):
    with pytest.raises(InvalidGridError):
        fidelity_scan(make_cycle(4), 0, 2, start, stop, step)
