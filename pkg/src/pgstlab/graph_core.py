"""Circulant graphs over Z_n and their combinations.

A circulant graph is fully described by its modulus ``n`` and a symmetric
connection set ``S``: vertices ``a`` and ``b`` are adjacent iff
``(a - b) mod n`` lies in ``S``.  Everything here is immutable and all
vertex arithmetic is done mod ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np


class GraphError(ValueError):
    """Base class for structural precondition failures."""


class InvalidOrderError(GraphError):
    pass


class InvalidDivisorError(GraphError):
    pass


class IncompatibleOrderError(GraphError):
    pass


class NonDisjointError(GraphError):
    pass


class NoAntipodeError(GraphError):
    pass


class AsymmetricSetError(GraphError):
    pass


@dataclass(frozen=True)
class ConnectionSet:
    n: int
    elements: tuple[int, ...]

    def __init__(self, n: int, elements: Iterable[int]):
        n = int(n)
        if n < 1:
            raise InvalidOrderError(f"modulus must be positive, got {n}")
        elems = sorted({int(s) for s in elements})
        for s in elems:
            if not 1 <= s < n:
                raise GraphError(f"connection element {s} not in 1..{n - 1}")
        members = set(elems)
        for s in elems:
            if n - s not in members:
                raise AsymmetricSetError(
                    f"connection set not symmetric: {s} present but {n - s} missing"
                )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "elements", tuple(elems))

    def __contains__(self, s: int) -> bool:
        return s % self.n in self.elements

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True)
class CirculantGraph:
    connection: ConnectionSet

    @classmethod
    def from_elements(cls, n: int, elements: Iterable[int]) -> "CirculantGraph":
        return cls(ConnectionSet(n, elements))

    @property
    def n(self) -> int:
        return self.connection.n

    @property
    def order(self) -> int:
        return self.connection.n

    @property
    def degree(self) -> int:
        return len(self.connection)

    def is_adjacent(self, a: int, b: int) -> bool:
        return (a - b) % self.n in self.connection.elements

    def adjacency_matrix(self) -> np.ndarray:
        n = self.n
        diff = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        mask = np.zeros(n, dtype=bool)
        mask[list(self.connection.elements)] = True
        return mask[diff].astype(float)

    def literal(self) -> str:
        return f"circulant({self.n}; {','.join(map(str, self.connection.elements))})"

    def __str__(self) -> str:
        return self.literal()


@dataclass(frozen=True)
class DivisorSet:
    n: int
    divisors: tuple[int, ...]

    def __init__(self, n: int, divisors: Iterable[int]):
        n = int(n)
        if n < 2:
            raise InvalidOrderError(f"modulus must be at least 2, got {n}")
        ds = sorted({int(d) for d in divisors})
        for d in ds:
            if d < 1 or d >= n or n % d:
                raise InvalidDivisorError(f"{d} is not a proper divisor of {n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "divisors", tuple(ds))


@dataclass(frozen=True)
class CompositeGraph:
    """Cartesian product of circulant factors, in Kronecker order.

    ``complemented`` records which factors were written as complements when
    the product was built; the stored factor is already the complement.
    """

    factors: tuple[CirculantGraph, ...]
    complemented: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        if not self.factors:
            raise GraphError("a product needs at least one factor")
        flags = self.complemented or (False,) * len(self.factors)
        if len(flags) != len(self.factors):
            raise GraphError("one complement flag per factor required")
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "complemented", tuple(bool(f) for f in flags))

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(g.n for g in self.factors)

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    @property
    def degree(self) -> int:
        return sum(g.degree for g in self.factors)

    def split_vertex(self, index: int) -> tuple[int, ...]:
        """Mixed-radix decoding of a flat vertex index, first factor most significant."""
        if not 0 <= index < self.order:
            raise IndexError(f"vertex {index} out of range 0..{self.order - 1}")
        parts = []
        for m in reversed(self.orders):
            index, r = divmod(index, m)
            parts.append(r)
        return tuple(reversed(parts))

    def join_vertex(self, parts: Iterable[int]) -> int:
        parts = tuple(parts)
        if len(parts) != len(self.factors):
            raise IndexError("vertex tuple length does not match factor count")
        index = 0
        for p, m in zip(parts, self.orders):
            if not 0 <= p < m:
                raise IndexError(f"vertex component {p} out of range 0..{m - 1}")
            index = index * m + p
        return index

    def adjacency_matrix(self) -> np.ndarray:
        mats = [g.adjacency_matrix() for g in self.factors]
        total = np.zeros((self.order, self.order))
        for i, a in enumerate(mats):
            term = np.ones((1, 1))
            for j, b in enumerate(mats):
                term = np.kron(term, a if i == j else np.eye(b.shape[0]))
            total += term
        return total

    def literal(self) -> str:
        parts = []
        for g, c in zip(self.factors, self.complemented):
            parts.append(f"complement({complement_graph(g).literal()})" if c else g.literal())
        return f"product({', '.join(parts)})"

    def __str__(self) -> str:
        return self.literal()


Graph = Union[CirculantGraph, CompositeGraph]


def make_cycle(n: int) -> CirculantGraph:
    if n < 3:
        raise InvalidOrderError(f"a cycle needs at least 3 vertices, got {n}")
    return CirculantGraph(ConnectionSet(n, {1, n - 1}))


def gcd_class(n: int, d: int) -> list[int]:
    """Residues x in 1..n-1 with gcd(x, n) == d."""
    return [x for x in range(d, n, d) if math.gcd(x, n) == d]


def gcd_set(divisors: DivisorSet) -> ConnectionSet:
    n = divisors.n
    elements: set[int] = set()
    for d in divisors.divisors:
        elements.update(gcd_class(n, d))
    return ConnectionSet(n, elements)


def gcd_graph(n: int, divisors: Iterable[int]) -> CirculantGraph:
    return CirculantGraph(gcd_set(DivisorSet(n, divisors)))


def union_graphs(g1: CirculantGraph, g2: CirculantGraph) -> CirculantGraph:
    if g1.n != g2.n:
        raise IncompatibleOrderError(f"cannot unite graphs on {g1.n} and {g2.n} vertices")
    overlap = set(g1.connection.elements) & set(g2.connection.elements)
    if overlap:
        raise NonDisjointError(f"edge sets overlap on differences {sorted(overlap)}")
    return CirculantGraph(
        ConnectionSet(g1.n, g1.connection.elements + g2.connection.elements)
    )


def complement_graph(g: CirculantGraph) -> CirculantGraph:
    rest = set(range(1, g.n)) - set(g.connection.elements)
    return CirculantGraph(ConnectionSet(g.n, rest))


def divisor_decomposition(s: ConnectionSet) -> DivisorSet | None:
    """Return D with s == gcd_set(D), or None when s is not a gcd-set."""
    n = s.n
    members = set(s.elements)
    found = set()
    for x in members:
        d = math.gcd(x, n)
        if d in found:
            continue
        if not set(gcd_class(n, d)) <= members:
            return None
        found.add(d)
    return DivisorSet(n, found) if n >= 2 else None


def is_gcd_set(s: ConnectionSet) -> bool:
    if s.n == 1:
        return True
    return divisor_decomposition(s) is not None


def antipodal_pair(n: int, u: int) -> tuple[int, int]:
    if n % 2:
        raise NoAntipodeError(f"odd order {n} has no antipodal vertices")
    u %= n
    return u, (u + n // 2) % n


def cartesian_product(*graphs: Graph) -> CompositeGraph:
    factors: list[CirculantGraph] = []
    flags: list[bool] = []
    for g in graphs:
        if isinstance(g, CompositeGraph):
            factors.extend(g.factors)
            flags.extend(g.complemented)
        else:
            factors.append(g)
            flags.append(False)
    return CompositeGraph(tuple(factors), tuple(flags))


# -- graph literal parser -------------------------------------------------


class GraphLiteralError(GraphError):
    def __init__(self, message: str, position: int, text: str):
        self.position = position
        self.text = text
        pointer = " " * position + "^"
        super().__init__(f"{message} at position {position}\n  {text}\n  {pointer}")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message: str, pos: int | None = None):
        raise GraphLiteralError(message, self.pos if pos is None else pos, self.text)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            self.fail(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def name(self) -> str:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalpha() or self.text[self.pos] == "_"):
            self.pos += 1
        if start == self.pos:
            self.fail("expected a graph constructor name")
        return self.text[start:self.pos].lower()

    def integer(self) -> int:
        self.skip()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        digits = self.text[start:self.pos]
        if not digits or digits in "+-":
            self.pos = start
            self.fail("expected an integer")
        return int(digits)

    def int_list(self) -> list[int]:
        values: list[int] = []
        if self.peek() == ")":
            return values
        values.append(self.integer())
        while self.peek() == ",":
            self.pos += 1
            values.append(self.integer())
        return values

    def graph(self) -> Graph:
        start = self.pos
        kind = self.name()
        self.expect("(")
        try:
            result = self._build(kind, start)
        except GraphLiteralError:
            raise
        except GraphError as exc:
            raise GraphLiteralError(str(exc), start, self.text) from exc
        self.expect(")")
        return result

    def _build(self, kind: str, start: int) -> Graph:
        if kind == "cycle":
            return make_cycle(self.integer())
        if kind in ("circulant", "gcd"):
            n = self.integer()
            values: list[int] = []
            if self.peek() == ";":
                self.pos += 1
                values = self.int_list()
            if kind == "circulant":
                return CirculantGraph(ConnectionSet(n, values))
            return gcd_graph(n, values)
        if kind == "union":
            a = self.circulant_arg("union")
            self.expect(",")
            b = self.circulant_arg("union")
            return union_graphs(a, b)
        if kind == "complement":
            return complement_graph(self.circulant_arg("complement"))
        if kind == "product":
            parts = [self.product_arg()]
            while self.peek() == ",":
                self.pos += 1
                parts.append(self.product_arg())
            factors: list[CirculantGraph] = []
            flags: list[bool] = []
            for g, flag in parts:
                if isinstance(g, CompositeGraph):
                    factors.extend(g.factors)
                    flags.extend(g.complemented)
                else:
                    factors.append(g)
                    flags.append(flag)
            return CompositeGraph(tuple(factors), tuple(flags))
        self.fail(f"unknown constructor {kind!r}", start)
        raise AssertionError  # unreachable

    def circulant_arg(self, ctx: str) -> CirculantGraph:
        pos = self.pos
        g = self.graph()
        if isinstance(g, CompositeGraph):
            self.fail(f"{ctx} of a product graph is not circulant", pos)
        return g

    def product_arg(self) -> tuple[Graph, bool]:
        self.skip()
        is_complement = self.text.startswith("complement", self.pos)
        return self.graph(), is_complement


def parse_graph(text: str) -> Graph:
    """Parse a graph literal such as ``union(cycle(8), gcd(8; 2))``."""
    p = _Parser(text)
    g = p.graph()
    if p.peek():
        p.fail("unexpected trailing input")
    return g
