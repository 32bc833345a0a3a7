"""PGST verdicts, with certificates, for the circulant families that are settled.

Only proven statements are reported.  Anything outside the covered families
comes back as ``Unknown`` carrying the open question it falls under.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .graph_core import (
    CirculantGraph,
    CompositeGraph,
    ConnectionSet,
    DivisorSet,
    Graph,
    GraphError,
    InvalidOrderError,
    complement_graph,
    divisor_decomposition,
    gcd_graph,
    make_cycle,
    union_graphs,
)
from .kronecker import BRUTE_FORCE_LIMIT, ApproxProblem, ApproxSolution, pgst_targets, solve
from .spectra import (
    DependencyWitness,
    dependency_witness,
    is_integral,
    is_power_of_two,
    odd_prime_factors,
)
from .transfer import amplitude

CITE_C4 = "C_4 has perfect state transfer between antipodal vertices at t = pi/2"
CITE_CYCLE = "a cycle C_n has PGST iff n = 2^k with k >= 2"
CITE_POWER2 = "C_{2^k} (k >= 3) has PGST between antipodal vertices along a sequence in 2*pi*Z, via Kronecker approximation"
CITE_ANTIPODAL = "PGST in C_n or its complement forces n even and the pair (u, u + n/2) (automorphism argument)"
CITE_OBSTRUCTION = "C_{mp} with p an odd prime has no PGST: an exact eigenvalue relation with zero coefficient sum and odd index weight"
CITE_COMPLEMENT_OBSTRUCTION = "the complement of C_{mp}, p an odd prime and m != 2, has no PGST: the same relation annihilates the shifted spectrum"
CITE_UNION = "C_{2^k} u G(2^k, D) with 1 not in D (k >= 3), and its complement, have PGST along the same 2*pi*Z sequence as C_{2^k}"
CITE_OPEN_2P = "open: whether the complement of C_{2p} has PGST at all (it has none along sequences in pi*Z)"
CITE_OPEN_GENERAL = "open: which other circulant graphs admit PGST"
CITE_PRODUCT_SHARED = "a Cartesian product of graphs with PGST along one shared sequence has PGST"
CITE_PRODUCT_PERIODIC = "the product of a graph periodic at 2*pi (e.g. any integral graph) with a member of the C_{2^k} union family has PGST"


class Status(str, enum.Enum):
    PST = "PST"
    PGST = "PGST"
    NO_PGST = "NoPGST"
    UNKNOWN = "Unknown"

    @property
    def exit_code(self) -> int:
        return {Status.PST: 0, Status.PGST: 0, Status.NO_PGST: 1, Status.UNKNOWN: 2}[self]


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class TimeConstruction:
    """Times t = 2 pi q from the antipodal targets of C_order, or an exact PST time."""

    order: int
    problem: ApproxProblem | None = None
    solution: ApproxSolution | None = None
    exact_time: float | None = None
    kind: str = field(default="TimeConstruction", init=False)

    def solved(self, q_max: int = BRUTE_FORCE_LIMIT, strategy: str = "auto", workers: int = 1) -> "TimeConstruction":
        if self.problem is None or self.solution is not None:
            return self
        return replace(self, solution=solve(self.problem, q_max, strategy, workers))

    def payload(self) -> dict:
        out: dict = {"cycle_order": self.order, "sequence": "t = 2*pi*q"}
        if self.exact_time is not None:
            out = {"cycle_order": self.order, "exact_time": self.exact_time}
        if self.problem is not None:
            out["problem"] = self.problem.to_json()
        if self.solution is not None:
            out["sample_solution"] = self.solution.to_json()
        return out


@dataclass(frozen=True)
class ObstructionWitness:
    witness: DependencyWitness
    complement: bool = False
    kind: str = field(default="ObstructionWitness", init=False)

    def payload(self) -> dict:
        out = self.witness.to_json()
        out["applies_to"] = "complement" if self.complement else "cycle"
        return out


@dataclass(frozen=True)
class ParityObstruction:
    n: int
    reason: str
    kind: str = field(default="ParityObstruction", init=False)

    def payload(self) -> dict:
        return {"n": self.n, "reason": self.reason}


@dataclass(frozen=True)
class OpenProblem:
    citation: str
    kind: str = field(default="OpenProblem", init=False)

    def payload(self) -> dict:
        return {"question": self.citation}


Certificate = TimeConstruction | ObstructionWitness | ParityObstruction | OpenProblem


@dataclass(frozen=True)
class Verdict:
    status: Status
    pair: tuple | None
    certificate: Certificate
    citations: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        allowed = {
            Status.PST: (TimeConstruction,),
            Status.PGST: (TimeConstruction,),
            Status.NO_PGST: (ObstructionWitness, ParityObstruction),
            Status.UNKNOWN: (OpenProblem,),
        }[self.status]
        if not isinstance(self.certificate, allowed):
            raise TypeError(f"{self.status.value} verdict cannot carry {type(self.certificate).__name__}")

    @property
    def exit_code(self) -> int:
        return self.status.exit_code

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "pair": _jsonable_pair(self.pair),
            "certificate": {"kind": self.certificate.kind, "payload": self.certificate.payload()},
            "citations": list(self.citations),
            "notes": list(self.notes),
        }


def _jsonable_pair(pair):
    if pair is None:
        return None
    return [list(x) if isinstance(x, tuple) else x for x in pair]


def _check_order(n: int) -> None:
    if n < 3:
        raise InvalidOrderError(f"need n >= 3, got {n}")


def _pair(n: int, u: int | None, v: int | None) -> tuple[tuple[int, int], bool]:
    """Resolve the requested pair; second item says whether it is antipodal."""
    if u is None and v is None:
        return (0, n // 2), True
    if u is None or v is None:
        raise ValueError("give both vertices or neither")
    u, v = int(u), int(v)
    for x in (u, v):
        if not 0 <= x < n:
            raise IndexError(f"vertex {x} out of range 0..{n - 1}")
    if u == v:
        raise ValueError("state transfer needs two distinct vertices")
    return (u, v), (v - u) % n == n // 2 and n % 2 == 0


def _power2_construction(n: int, epsilon: float, q_max: int, solve_now: bool, strategy: str) -> TimeConstruction:
    tc = TimeConstruction(order=n, problem=pgst_targets(n, epsilon))
    return tc.solved(q_max, strategy) if solve_now else tc


def _parity(n: int, pair, antipodal: bool, requested: bool) -> Verdict | None:
    if n % 2:
        return Verdict(Status.NO_PGST, pair if requested else None,
                       ParityObstruction(n, "odd order: no vertex pair is fixed by the same automorphisms"),
                       (CITE_ANTIPODAL,))
    if not antipodal:
        return Verdict(Status.NO_PGST, pair,
                       ParityObstruction(n, "pair is not antipodal: a reflection fixing u moves v"),
                       (CITE_ANTIPODAL,))
    return None


def classify_cycle(n: int, u: int | None = None, v: int | None = None, *, epsilon: float = 1e-3,
                   q_max: int = BRUTE_FORCE_LIMIT, solve: bool = False, strategy: str = "auto") -> Verdict:
    _check_order(n)
    pair, antipodal = _pair(n, u, v)
    early = _parity(n, pair, antipodal, u is not None)
    if early is not None:
        return early
    if n == 4:
        return Verdict(Status.PST, pair, TimeConstruction(order=4, exact_time=math.pi / 2), (CITE_C4, CITE_CYCLE))
    if is_power_of_two(n):
        return Verdict(Status.PGST, pair, _power2_construction(n, epsilon, q_max, solve, strategy),
                       (CITE_POWER2, CITE_CYCLE))
    p = min(odd_prime_factors(n))
    return Verdict(Status.NO_PGST, pair, ObstructionWitness(dependency_witness(n // p, p)),
                   (CITE_OBSTRUCTION, CITE_CYCLE))


def classify_cycle_complement(n: int, u: int | None = None, v: int | None = None, *, epsilon: float = 1e-3,
                              q_max: int = BRUTE_FORCE_LIMIT, solve: bool = False,
                              strategy: str = "auto") -> Verdict:
    _check_order(n)
    pair, antipodal = _pair(n, u, v)
    early = _parity(n, pair, antipodal, u is not None)
    if early is not None:
        return early
    if n == 4:
        g = complement_graph(make_cycle(4))
        fid = amplitude(g, pair[0], pair[1], math.pi / 2).fidelity
        note = ("complement of C_4 is 2K_2 (disconnected); outside the k >= 3 result, "
                f"classified by direct evaluation: |H(pi/2)[u, v]| = {fid:.17g}")
        if abs(fid - 1.0) < 1e-12:
            return Verdict(Status.PST, pair, TimeConstruction(order=4, exact_time=math.pi / 2),
                           (CITE_C4,), (note,))
        return Verdict(Status.UNKNOWN, pair, OpenProblem(CITE_OPEN_GENERAL), (), (note,))
    if is_power_of_two(n):
        return Verdict(Status.PGST, pair, _power2_construction(n, epsilon, q_max, solve, strategy),
                       (CITE_UNION, CITE_POWER2), ("complement of the cycle: union family with D empty",))
    odd = odd_prime_factors(n)
    for p in odd:
        if n // p != 2:
            w = dependency_witness(n // p, p)
            return Verdict(Status.NO_PGST, pair, ObstructionWitness(w, complement=True),
                           (CITE_COMPLEMENT_OBSTRUCTION,))
    return Verdict(Status.UNKNOWN, pair, OpenProblem(CITE_OPEN_2P), (CITE_OPEN_2P,),
                   (f"n = 2*{odd[0]}: the relation for m = 2 uses the trivial character and does "
                    "not transfer to the complement spectrum",))


def _divisor_set(n: int, divisors: DivisorSet | Iterable[int]) -> DivisorSet:
    ds = divisors if isinstance(divisors, DivisorSet) else DivisorSet(n, divisors)
    if ds.n != n:
        raise PreconditionError(f"divisor set is for n = {ds.n}, not {n}")
    return ds


def union_graph(n: int, divisors: DivisorSet | Iterable[int], complement: bool = False) -> CirculantGraph:
    ds = _divisor_set(n, divisors)
    if 1 in ds.divisors:
        raise PreconditionError("divisor set must not contain 1 (the cycle edges would overlap)")
    g = union_graphs(make_cycle(n), gcd_graph(n, ds.divisors))
    return complement_graph(g) if complement else g


def classify_union(n: int, divisors: DivisorSet | Iterable[int], complement: bool = False,
                   u: int | None = None, v: int | None = None, *, epsilon: float = 1e-3,
                   q_max: int = BRUTE_FORCE_LIMIT, solve: bool = False, strategy: str = "auto") -> Verdict:
    """Verdict for C_n u G(n, D), or its complement when ``complement`` is set."""
    _check_order(n)
    ds = _divisor_set(n, divisors)
    if 1 in ds.divisors:
        raise PreconditionError("divisor set must not contain 1")
    pair, antipodal = _pair(n, u, v)
    notes = []
    if not ds.divisors:
        notes.append("D is empty: the union is the cycle itself")
    if not (is_power_of_two(n) and n >= 8):
        return Verdict(Status.UNKNOWN, pair, OpenProblem(CITE_OPEN_GENERAL), (CITE_OPEN_GENERAL,),
                       tuple(notes + [f"n = {n} is not 2^k with k >= 3"]))
    if not antipodal:
        return Verdict(Status.UNKNOWN, pair, OpenProblem(CITE_OPEN_GENERAL), (CITE_OPEN_GENERAL,),
                       tuple(notes + ["only the antipodal pair is covered"]))
    return Verdict(Status.PGST, pair, _power2_construction(n, epsilon, q_max, solve, strategy),
                   (CITE_UNION, CITE_POWER2), tuple(notes))


# -- family recognition ---------------------------------------------------


@dataclass(frozen=True)
class UnionMembership:
    k: int
    divisors: DivisorSet
    complement: bool


def union_membership(g: CirculantGraph) -> UnionMembership | None:
    """Is g in the family C_{2^k} u G(2^k, D) (1 not in D, k >= 3) or its complements?"""
    n = g.n
    if not (is_power_of_two(n) and n >= 8):
        return None
    for comp, h in ((False, g), (True, complement_graph(g))):
        elems = set(h.connection.elements)
        if {1, n - 1} <= elems:
            rest = ConnectionSet(n, elems - {1, n - 1})
            ds = divisor_decomposition(rest) if rest.elements else DivisorSet(n, ())
            if ds is not None and 1 not in ds.divisors:
                return UnionMembership(n.bit_length() - 1, ds, comp)
    return None


def classify_product(graph: CompositeGraph, pairs: tuple[Sequence[int], Sequence[int]] | None = None, *,
                     epsilon: float = 1e-3, q_max: int = BRUTE_FORCE_LIMIT, solve: bool = False,
                     strategy: str = "auto") -> Verdict:
    if not isinstance(graph, CompositeGraph) or not graph.factors:
        raise GraphError("classify_product needs a non-empty Cartesian product")
    members = [union_membership(g) for g in graph.factors]
    integral = [m is None and is_integral(g) for g, m in zip(graph.factors, members)]
    family = [i for i, m in enumerate(members) if m is not None]
    ks = {members[i].k for i in family}

    rule = None
    if len(family) == len(graph.factors) and len(ks) == 1:
        rule = CITE_PRODUCT_SHARED
    elif len(family) == 1 and all(integral[i] for i in range(len(graph.factors)) if i != family[0]):
        rule = CITE_PRODUCT_PERIODIC

    u_std = tuple(0 for _ in graph.factors)
    v_std = tuple(g.n // 2 if members[i] is not None else 0 for i, g in enumerate(graph.factors))
    pair = (u_std, v_std)
    if rule is None:
        return Verdict(Status.UNKNOWN, pair, OpenProblem(CITE_OPEN_GENERAL), (CITE_OPEN_GENERAL,),
                       ("factors fit neither the shared-sequence nor the periodic-factor rule",))
    if pairs is not None:
        u, v = (tuple(int(x) for x in pairs[0]), tuple(int(x) for x in pairs[1]))
        graph.join_vertex(u)
        graph.join_vertex(v)
        ok = all((b - a) % g.n == (g.n // 2 if members[i] is not None else 0)
                 for i, (g, a, b) in enumerate(zip(graph.factors, u, v)))
        if not ok:
            return Verdict(Status.UNKNOWN, (u, v), OpenProblem(CITE_OPEN_GENERAL), (CITE_OPEN_GENERAL,),
                           ("requested pair does not match the certified tuple pattern",))
        pair = (u, v)
    order = 2 ** next(iter(ks))
    return Verdict(Status.PGST, pair, _power2_construction(order, epsilon, q_max, solve, strategy),
                   (rule, CITE_UNION, CITE_POWER2))


def classify(graph: Graph, u=None, v=None, **kwargs) -> Verdict:
    """Recognise the family of ``graph`` and dispatch to the matching classifier."""
    if isinstance(graph, CompositeGraph):
        pairs = None if u is None and v is None else (u, v)
        return classify_product(graph, pairs, **kwargs)
    n = graph.n
    elems = set(graph.connection.elements)
    if n >= 3 and elems == {1, n - 1}:
        return classify_cycle(n, u, v, **kwargs)
    if n >= 3 and elems == set(range(2, n - 1)):
        return classify_cycle_complement(n, u, v, **kwargs)
    m = union_membership(graph)
    if m is not None:
        return classify_union(n, m.divisors, m.complement, u, v, **kwargs)
    pair = None
    if u is not None and v is not None:
        pair = (int(u), int(v))
    elif n % 2 == 0:
        pair = (0, n // 2)
    return Verdict(Status.UNKNOWN, pair, OpenProblem(CITE_OPEN_GENERAL), (CITE_OPEN_GENERAL,),
                   ("graph is not a cycle, a cycle complement, or a C_{2^k} union family member",))


@dataclass(frozen=True)
class Measurement:
    fidelity: float
    bound: float
    ok: bool

    def to_json(self) -> dict:
        return {"measured_fidelity": self.fidelity, "implied_bound": self.bound, "ok": self.ok}


def measure_certificate(verdict: Verdict, graph: Graph) -> Measurement | None:
    """Re-evaluate the transfer fidelity at the certificate's time."""
    cert = verdict.certificate
    if not isinstance(cert, TimeConstruction) or verdict.pair is None:
        return None
    u, v = verdict.pair
    if cert.exact_time is not None:
        fid = amplitude(graph, u, v, cert.exact_time).fidelity
        return Measurement(fid, 1.0, fid >= 1.0 - 1e-12)
    if cert.solution is None:
        return None
    fid = amplitude(graph, u, v, cert.solution.exact_time).fidelity
    per_factor = max(0.0, 1.0 - 2 * math.pi * cert.solution.worst_error)
    copies = 1
    if isinstance(graph, CompositeGraph):
        copies = sum(1 for g in graph.factors if union_membership(g) is not None)
    bound = per_factor ** copies
    return Measurement(fid, bound, fid >= bound - 1e-9)
