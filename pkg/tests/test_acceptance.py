"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary block at the end
of the run lists every criterion in order.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

from conftest import dense_evolution
from pgstlab.classify import Status, classify_cycle, classify_cycle_complement
from pgstlab.graph_core import (
    CirculantGraph,
    cartesian_product,
    complement_graph,
    gcd_graph,
    is_gcd_set,
    make_cycle,
    union_graphs,
)
from pgstlab.kronecker import BRUTE_FORCE_LIMIT, first_turn_reaching, pgst_targets, solve
from pgstlab.spectra import dependency_witness, is_integral, is_power_of_two, is_prime, rational_independence
from pgstlab.transfer import amplitude, fidelity_scan, transition_row


def symmetric_sets(n):
    half = range(1, n // 2 + 1)
    for r in range(len(half) + 1):
        for chosen in itertools.combinations(half, r):
            yield {s for c in chosen for s in (c, n - c)}


def test_criterion_01_c4_perfect_transfer(acceptance):
    g = make_cycle(4)
    start = time.perf_counter()
    r = amplitude(g, 0, 2, math.pi / 2)
    elapsed = time.perf_counter() - start
    ok = abs(abs(r.amplitude) - 1) < 1e-12 and abs(r.amplitude - (-1)) < 1e-12
    assert acceptance(1, ok, f"H(pi/2)[0,2] = {r.amplitude:.15f}", elapsed, 1e-3)


def test_criterion_02_c8_find_time(acceptance):
    start = time.perf_counter()
    found = first_turn_reaching(make_cycle(8), 0.99, BRUTE_FORCE_LIMIT)
    fid = amplitude(make_cycle(8), 0, 4, 12 * math.pi).fidelity
    elapsed = time.perf_counter() - start
    ok = (found is not None and found.q == 6 and abs(found.time - 12 * math.pi) < 1e-12
          and abs(fid - 0.99787) <= 1e-4 and abs(found.fidelity - fid) < 1e-12)
    q = found.q if found else None
    assert acceptance(2, ok, f"q = {q}, fidelity = {fid:.6f}", elapsed, 1.0)


def test_criterion_03_c16_deep_approximation(acceptance):
    # Stated bound: q <= 10^7 at eps = 1e-3.  The smallest q meeting all three
    # coordinate tolerances is 14,192,290, so this criterion cannot pass as
    # written; it is kept exactly as stated.
    prob = pgst_targets(16, 1e-3)
    start = time.perf_counter()
    sol = solve(prob, 10 ** 7)
    fid = amplitude(make_cycle(16), 0, 8, sol.exact_time).fidelity if sol else float("nan")
    elapsed = time.perf_counter() - start
    ok = (sol is not None and sol.q <= 10 ** 7 and all(e < 1e-3 for e in sol.errors)
          and fid >= 1 - 2 * math.pi * 1e-3)
    detail = (f"q = {sol.q}, worst error = {sol.worst_error:.2e}, fidelity = {fid:.6f}" if sol
              else "no q <= 10^7 meets eps = 1e-3 (smallest is 14192290)")
    assert acceptance(3, ok, detail, elapsed, 60.0)


def test_criterion_04_c6_ceiling(acceptance):
    start = time.perf_counter()
    curve = fidelity_scan(make_cycle(6), 0, 3, 0, 1000, 1e-3)
    elapsed = time.perf_counter() - start
    ok = abs(curve.max_fidelity - 0.8660) <= 1e-3 and curve.fidelities.max() <= 0.87
    assert acceptance(4, ok, f"max = {curve.max_fidelity:.6f} at t = {curve.argmax_time:g}", elapsed, 10.0)


def test_criterion_05_obstruction_exactness(acceptance):
    cases = [(2, 3), (4, 3), (2, 5), (4, 5), (6, 3)]
    start = time.perf_counter()
    witnesses = [dependency_witness(m, p) for m, p in cases]
    elapsed = time.perf_counter() - start
    ok = all(all(c == 0 for c in w.residual.coefficients) and isinstance(c, int)
             for w in witnesses for c in w.residual.coefficients) and all(w.valid for w in witnesses)
    assert acceptance(5, ok, f"{sum(w.valid for w in witnesses)}/5 residuals exactly zero", elapsed, 1.0)


def test_criterion_06_independence(acceptance):
    start = time.perf_counter()
    certs = [rational_independence(n) for n in (8, 16, 32, 64)]
    elapsed = time.perf_counter() - start
    ok = all(c.rank == c.n // 4 and c.independent for c in certs)
    ranks = ", ".join(f"rank({c.n}) = {c.rank}" for c in certs)
    assert acceptance(6, ok, ranks, elapsed, 5.0)


def test_criterion_07_union_invariance(acceptance):
    c8 = make_cycle(8)
    u = union_graphs(c8, gcd_graph(8, [2]))
    cc8, cu = complement_graph(c8), complement_graph(u)
    times = (2 * math.pi, 12 * math.pi, 100 * 2 * math.pi)
    start = time.perf_counter()
    d_union = max(abs(amplitude(u, 0, 4, t).fidelity - amplitude(c8, 0, 4, t).fidelity) for t in times)
    d_comp = max(abs(amplitude(cu, 0, 4, t).fidelity - amplitude(cc8, 0, 4, t).fidelity) for t in times)
    elapsed = time.perf_counter() - start
    ok = d_union < 1e-12 and d_comp < 1e-9
    assert acceptance(7, ok, f"union diff = {d_union:.1e}, complement diff = {d_comp:.1e}", elapsed, 1.0)


def test_criterion_08_product_multiplicativity(acceptance):
    rng = np.random.default_rng(8)
    pool = [make_cycle(8), union_graphs(make_cycle(8), gcd_graph(8, [2])), complement_graph(make_cycle(8))]
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(2, 4))
        factors = [pool[i] for i in rng.integers(0, 3, size=k)]
        t = float(rng.uniform(0, 200))
        us = tuple(int(x) for x in rng.integers(0, 8, size=k))
        vs = tuple(int(x) for x in rng.integers(0, 8, size=k))
        prod = cartesian_product(*factors)
        whole = amplitude(prod, prod.join_vertex(us), prod.join_vertex(vs), t).fidelity
        parts = math.prod(amplitude(g, a, b, t).fidelity for g, a, b in zip(factors, us, vs))
        worst = max(worst, abs(whole - parts))
    elapsed = time.perf_counter() - start
    assert acceptance(8, worst < 1e-12, f"max |product - factors| = {worst:.1e} over 100 samples", elapsed, 1.0)


def test_criterion_09_integrality_equivalence(acceptance):
    start = time.perf_counter()
    total = mismatches = 0
    for n in range(1, 17):
        for elems in symmetric_sets(n):
            g = CirculantGraph.from_elements(n, elems)
            total += 1
            if is_gcd_set(g.connection) != is_integral(g):
                mismatches += 1
    elapsed = time.perf_counter() - start
    assert acceptance(9, mismatches == 0, f"{mismatches} mismatches over {total} connection sets", elapsed, 30.0)


def test_criterion_10_unitarity_and_oracle(acceptance):
    rng = np.random.default_rng(10)
    start = time.perf_counter()
    worst_norm = worst_oracle = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 13))
        elems = {s for c in range(1, n // 2 + 1) if rng.random() < 0.5 for s in (c, n - c)}
        g = CirculantGraph.from_elements(n, elems)
        t = float(rng.uniform(0, 100))
        u = int(rng.integers(0, n))
        row = transition_row(g, u, t)
        worst_norm = max(worst_norm, abs(np.sum(np.abs(row) ** 2) - 1))
        h = dense_evolution(g.adjacency_matrix(), t)
        amps = np.array([amplitude(g, u, v, t).amplitude for v in range(n)])
        worst_oracle = max(worst_oracle, float(np.max(np.abs(amps - h[u]))))
    elapsed = time.perf_counter() - start
    ok = worst_norm < 1e-10 and worst_oracle < 1e-8
    assert acceptance(10, ok, f"row-norm error {worst_norm:.1e}, oracle error {worst_oracle:.1e}", elapsed, 30.0)


def _expected_complement(n):
    if n % 2:
        return Status.NO_PGST
    if n == 4:
        return Status.PST
    if is_power_of_two(n):
        return Status.PGST
    if n // 2 > 2 and is_prime(n // 2):
        return Status.UNKNOWN
    return Status.NO_PGST


def test_criterion_11_golden_table(acceptance):
    start = time.perf_counter()
    bad = []
    for n in range(3, 129):
        has = classify_cycle(n).status in (Status.PST, Status.PGST)
        if has != (is_power_of_two(n) and n >= 4):
            bad.append(("cycle", n))
        got = classify_cycle_complement(n).status
        want = _expected_complement(n)
        # NoPGST exactly for odd n and n = m p with m >= 3; the n = 4 case is PST by direct evaluation
        if got != want:
            bad.append(("complement", n))
    elapsed = time.perf_counter() - start
    assert acceptance(11, not bad, f"{len(bad)} disagreements for n in [3, 128]", elapsed, 5.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
