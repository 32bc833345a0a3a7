"""Simultaneous inhomogeneous Diophantine approximation and PGST times.

Given reals theta_j, offsets alpha_j and a tolerance eps we look for a
positive integer q with ``|q theta_j - p_j - alpha_j| < eps`` for all j, the
p_j being nearest integers.  For the antipodal pair of C_{2^k} the choice
theta_l = lambda_l, alpha_l = l/2 mod 1 (l = 1 .. n/4 - 1) makes t = 2 pi q
a near-perfect transfer time.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from .graph_core import CirculantGraph, CompositeGraph, Graph, NoAntipodeError, make_cycle
from .spectra import UnsupportedOrderError, is_power_of_two
from .transfer import (
    Time,
    _mp_eigenvalues,
    _spectrum,
    amplitude,
    fidelity_at_turns,
    mp_time_from_turns,
    reduce_phase,
)

log = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 10 ** 7
_CHUNK = 1 << 20
_FLOAT_SAFE = 2.0 ** 40


@dataclass(frozen=True)
class ApproxProblem:
    thetas: tuple[float, ...]
    alphas: tuple[float, ...]
    epsilon: float
    # high-precision thetas on demand: dps -> list of mpf
    precise: Callable[[int], Sequence] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(x) for x in self.thetas))
        object.__setattr__(self, "alphas", tuple(float(x) for x in self.alphas))
        if len(self.thetas) != len(self.alphas):
            raise ValueError("thetas and alphas must have the same length")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def __len__(self) -> int:
        return len(self.thetas)

    def theta_values(self, dps: int) -> list:
        if self.precise is not None:
            return list(self.precise(dps))
        return [mpmath.mpf(x) for x in self.thetas]

    def with_epsilon(self, epsilon: float) -> "ApproxProblem":
        return ApproxProblem(self.thetas, self.alphas, epsilon, self.precise)

    def to_json(self) -> dict:
        return {"thetas": list(self.thetas), "alphas": list(self.alphas), "epsilon": self.epsilon}


@dataclass(frozen=True)
class ApproxSolution:
    q: int
    offsets: tuple[int, ...]
    errors: tuple[float, ...]
    strategy: str = "bruteforce"

    @property
    def time(self) -> float:
        return 2.0 * math.pi * self.q

    @property
    def exact_time(self) -> mpmath.mpf:
        return mp_time_from_turns(self.q)

    @property
    def worst_error(self) -> float:
        return max(self.errors, default=0.0)

    def to_json(self) -> dict:
        return {"q": str(self.q), "t": self.time, "offsets": [str(p) for p in self.offsets],
                "per_coordinate_errors": list(self.errors), "worst_error": self.worst_error,
                "strategy": self.strategy}


def coordinate_errors(prob: ApproxProblem, q: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Nearest-integer offsets and errors |q theta - p - alpha| for one q."""
    if not prob.thetas:
        return (), ()
    big = abs(q) * max(abs(x) for x in prob.thetas) >= _FLOAT_SAFE
    if not big:
        xs = [q * th - al for th, al in zip(prob.thetas, prob.alphas)]
        ps = [round(x) for x in xs]
        return tuple(int(p) for p in ps), tuple(abs(x - p) for x, p in zip(xs, ps))
    dps = len(str(abs(q))) + 25
    with mpmath.workdps(dps):
        xs = [q * th - mpmath.mpf(al) for th, al in zip(prob.theta_values(dps), prob.alphas)]
        ps = [int(mpmath.nint(x)) for x in xs]
        return tuple(ps), tuple(float(abs(x - p)) for x, p in zip(xs, ps))


def verify(prob: ApproxProblem, q: int, strategy: str = "verified") -> ApproxSolution | None:
    if q < 1:
        return None
    offsets, errors = coordinate_errors(prob, q)
    if all(e < prob.epsilon for e in errors):
        return ApproxSolution(int(q), offsets, errors, strategy)
    return None


def _feasible_in(prob: ApproxProblem, th: np.ndarray, al: np.ndarray, lo: int, hi: int) -> ApproxSolution | None:
    q = np.arange(lo, hi, dtype=np.float64)
    ok = np.ones(q.size, dtype=bool)
    for j in range(th.size):
        x = q * th[j] - al[j]
        ok &= np.abs(x - np.rint(x)) < prob.epsilon
    for i in np.flatnonzero(ok):
        sol = verify(prob, lo + int(i), "bruteforce")
        if sol is not None:
            return sol
    return None


def solve_bruteforce(prob: ApproxProblem, q_max: int, workers: int = 1) -> ApproxSolution | None:
    """Smallest q in [1, q_max] meeting every coordinate tolerance, else None."""
    if int(q_max) != q_max or q_max < 1:
        raise ValueError(f"q_max must be a positive integer, got {q_max}")
    q_max = int(q_max)
    if not prob.thetas:
        return ApproxSolution(1, (), (), "bruteforce")
    th = np.array(prob.thetas)
    al = np.array(prob.alphas)
    bounds = [(lo, min(lo + _CHUNK, q_max + 1)) for lo in range(1, q_max + 1, _CHUNK)]
    if workers <= 1:
        for lo, hi in bounds:
            sol = _feasible_in(prob, th, al, lo, hi)
            if sol is not None:
                return sol
        return None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i in range(0, len(bounds), workers):
            batch = bounds[i:i + workers]
            found = [s for s in pool.map(lambda b: _feasible_in(prob, th, al, *b), batch) if s]
            if found:
                return min(found, key=lambda s: s.q)
    return None


# -- lattice proposals ----------------------------------------------------


def _lll(rows: list[list[int]]) -> list[list[int]]:
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix

    dm = DomainMatrix([[ZZ(x) for x in r] for r in rows], (len(rows), len(rows[0])), ZZ)
    return [[int(x) for x in r] for r in dm.lll().to_list()]


def _nearest_plane(basis: list[list[int]], target: list[int], prec: int) -> list[int]:
    """Babai nearest-plane coefficients of ``target`` in ``basis``."""
    d = len(basis)
    with mpmath.workprec(prec):
        b = [[mpmath.mpf(x) for x in row] for row in basis]
        star: list[list] = []
        norms = []
        for i in range(d):
            v = list(b[i])
            for j in range(i):
                mu = mpmath.fsum(x * y for x, y in zip(b[i], star[j])) / norms[j]
                v = [x - mu * y for x, y in zip(v, star[j])]
            star.append(v)
            norms.append(mpmath.fsum(x * x for x in v))
        rem = [mpmath.mpf(x) for x in target]
        coeffs = [0] * d
        for i in reversed(range(d)):
            c = int(mpmath.nint(mpmath.fsum(x * y for x, y in zip(rem, star[i])) / norms[i]))
            coeffs[i] = c
            if c:
                rem = [x - c * y for x, y in zip(rem, b[i])]
    return coeffs


def _perturbations(d: int):
    if d <= 8:
        yield from itertools.product((-1, 0, 1), repeat=d)
        return
    yield (0,) * d
    for i in range(d):
        for s in (-1, 1):
            e = [0] * d
            e[i] = s
            yield tuple(e)
    for i, j in itertools.combinations(range(d), 2):
        for s, r in itertools.product((-1, 1), repeat=2):
            e = [0] * d
            e[i], e[j] = s, r
            yield tuple(e)


def solve_lattice(prob: ApproxProblem, q_bound: int) -> ApproxSolution | None:
    """Propose q through lattice reduction; every proposal is verified.

    Rows (K, S theta_1, ..., S theta_L) and S e_j span the lattice whose points
    are (q K, S (q theta_j - p_j)); the target (K q_bound / 2, S alpha_j)
    centres q inside [0, q_bound].  LLL plus nearest-plane rounding gives a
    close vector, and a small neighbourhood of it is searched.
    """
    if int(q_bound) != q_bound or q_bound < 1:
        raise ValueError(f"q_bound must be a positive integer, got {q_bound}")
    q_bound = int(q_bound)
    L = len(prob.thetas)
    if L == 0:
        return ApproxSolution(1, (), (), "lattice")
    bits = max(64, math.ceil(math.log2(q_bound / prob.epsilon)) + 40)
    dps = int(bits * 0.302) + 20
    scale = 1 << bits
    with mpmath.workdps(dps):
        thetas = prob.theta_values(dps)
        th_int = [int(mpmath.nint(scale * t)) for t in thetas]
        al_int = [int(mpmath.nint(scale * mpmath.mpf(a))) for a in prob.alphas]
    k_weight = max(1, round(scale * prob.epsilon / q_bound))
    rows = [[k_weight] + th_int]
    for j in range(L):
        rows.append([0] * (j + 1) + [scale] + [0] * (L - j - 1))
    try:
        reduced = _lll(rows)
    except Exception as exc:  # sympy raises on degenerate input
        log.warning("lattice reduction failed: %s", exc)
        return None
    target = [k_weight * q_bound // 2] + al_int
    coeffs = _nearest_plane(reduced, target, 2 * bits + 64)
    centre = [sum(c * row[i] for c, row in zip(coeffs, reduced)) for i in range(L + 1)]
    candidates = set()
    for delta in _perturbations(len(reduced)):
        first = centre[0] + sum(e * row[0] for e, row in zip(delta, reduced))
        q, rem = divmod(first, k_weight)
        if rem == 0 and 1 <= abs(q) <= q_bound:
            candidates.add(abs(q))
    best = None
    for q in sorted(candidates):
        sol = verify(prob, q, "lattice")
        if sol is not None:
            best = sol
            break
    return best


def solve(prob: ApproxProblem, q_max: int = BRUTE_FORCE_LIMIT, strategy: str = "auto",
          workers: int = 1) -> ApproxSolution | None:
    """Dispatch between the exhaustive scan and lattice proposals."""
    if strategy == "bruteforce":
        return solve_bruteforce(prob, q_max, workers)
    if strategy == "lattice":
        return solve_lattice(prob, q_max)
    if strategy != "auto":
        raise ValueError(f"unknown strategy {strategy!r}")
    sol = solve_bruteforce(prob, min(q_max, BRUTE_FORCE_LIMIT), workers)
    if sol is None and q_max > BRUTE_FORCE_LIMIT:
        sol = solve_lattice(prob, q_max)
    return sol


# -- PGST construction for C_{2^k} ----------------------------------------


def _require_pgst_order(n: int) -> None:
    if n == 4:
        raise UnsupportedOrderError("C_4 already has perfect transfer at t = pi/2; no approximation needed")
    if not (is_power_of_two(n) and n >= 8):
        raise UnsupportedOrderError(f"time construction needs n = 2^k with k >= 3, got {n}")


def pgst_targets(n: int, epsilon: float = 1e-3) -> ApproxProblem:
    """Targets for the antipodal pair of C_n: theta_l = lambda_l, alpha_l = l/2 mod 1."""
    _require_pgst_order(n)
    ls = range(1, n // 4)
    thetas = [2.0 * math.cos(2.0 * math.pi * l / n) for l in ls]
    alphas = [0.5 if l % 2 else 0.0 for l in ls]

    def precise(dps: int):
        with mpmath.workdps(dps):
            return [2 * mpmath.cospi(mpmath.mpf(2 * l) / n) for l in ls]

    return ApproxProblem(tuple(thetas), tuple(alphas), epsilon, precise)


@dataclass(frozen=True, eq=False)
class PhaseReport:
    """Per-character phase residuals at time t for the antipodal entry.

    Residual l is ``lambda_l t + l pi`` minus the phase of the trivial
    character, reduced to (-pi, pi].  At t in 2 pi Z that reference is a
    multiple of 2 pi, so the residuals are distances to 2 pi Z.
    """

    n: int
    t: float
    residuals: np.ndarray
    worst: float
    fidelity_bound: float

    def to_json(self) -> dict:
        return {"n": self.n, "t": self.t, "residuals": [float(r) for r in self.residuals],
                "worst_residual": self.worst, "fidelity_lower_bound": self.fidelity_bound}


def phase_report(n: int, t: Time, graph: CirculantGraph | None = None) -> PhaseReport:
    if n % 2:
        raise NoAntipodeError(f"odd order {n} has no antipodal pair")
    g = graph if graph is not None else make_cycle(n)
    if g.n != n:
        raise ValueError("graph order does not match n")
    big = isinstance(t, mpmath.mpf) or abs(float(t)) * max(g.degree, 1) > _FLOAT_SAFE
    if big:
        dps = len(str(int(abs(t)))) + 30
        lam = _mp_eigenvalues(g.connection, dps)
        with mpmath.workdps(dps):
            tt = mpmath.mpf(t)
            ref = lam[0] * tt
            res = np.array([reduce_phase(lam[l] * tt + l * mpmath.pi - ref) for l in range(n)])
    else:
        lam = _spectrum(g).values
        tf = float(t)
        ref = reduce_phase(lam[0] * tf)
        res = np.array([reduce_phase(reduce_phase(lam[l] * tf) + (l % 2) * math.pi - ref)
                        for l in range(n)])
    worst = float(np.max(np.abs(res)))
    return PhaseReport(n, float(t), res, worst, 1.0 - worst)


@dataclass(frozen=True)
class TimeSearchResult:
    q: int
    time: float
    fidelity: float
    report: PhaseReport | None

    def to_json(self) -> dict:
        out = {"q": str(self.q), "t": self.time, "fidelity": self.fidelity}
        if self.report is not None:
            out.update(self.report.to_json())
        return out


def first_turn_reaching(graph: Graph, target: float, q_max: int, u=None, v=None) -> TimeSearchResult | None:
    """Smallest q <= q_max whose fidelity at t = 2 pi q is at least ``target``.

    Defaults to the antipodal pair (0, n/2) of a circulant.  Candidates from the
    vectorised float pass are confirmed at extended precision.
    """
    if isinstance(graph, CompositeGraph):
        if u is None or v is None:
            raise ValueError("product graphs need an explicit vertex pair")
        width = max(g.n for g in graph.factors)
    else:
        n = graph.n
        if u is None:
            if n % 2:
                raise NoAntipodeError(f"odd order {n} has no antipodal pair")
            u, v = 0, n // 2
        width = n
    cap = max(1024, _CHUNK // max(1, width // 8))
    # small first chunks so early hits are cheap, growing to the full size
    chunk, lo = 256, 1
    while lo <= q_max:
        qs = np.arange(lo, min(lo + chunk, q_max + 1))
        lo += chunk
        chunk = min(cap, chunk * 4)
        fids = fidelity_at_turns(graph, qs, u, v)
        for i in np.flatnonzero(fids >= target - 1e-9):
            q = int(qs[i])
            t = mp_time_from_turns(q)
            fid = amplitude(graph, u, v, t).fidelity
            if fid >= target:
                report = None
                if isinstance(graph, CirculantGraph) and (v - u) % graph.n == graph.n // 2:
                    report = phase_report(graph.n, t, graph)
                return TimeSearchResult(q, 2 * math.pi * q, fid, report)
    return None
