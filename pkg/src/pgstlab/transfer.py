"""Transition-matrix entries of the continuous-time walk exp(-i t A).

For a circulant graph every entry is a character sum,

    H(t)[u, v] = (1/n) * sum_l exp(-i lambda_l t) * w_n^(l (v - u)),

so nothing here ever builds H(t).  Products of circulants evaluate factor by
factor.  Times may be plain floats or ``mpmath.mpf`` values; the latter (and
any float time large enough that ``|t * lambda|`` exceeds 2**40) go through an
extended-precision phase reduction.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import IO, Iterable, Sequence, Union

import mpmath
import numpy as np

from .graph_core import CirculantGraph, CompositeGraph, ConnectionSet, Graph, complement_graph
from .spectra import Spectrum, _cos_turn, complement_spectrum, eigenvalues

Time = Union[float, int, mpmath.mpf]

EXTENDED_THRESHOLD = 2.0 ** 40
PERIODICITY_TOL = 1e-9
SCAN_CHUNK = 1 << 15


class InvalidGridError(ValueError):
    pass


class InconsistentQueryError(ValueError):
    pass


@dataclass(frozen=True)
class TransferResult:
    amplitude: complex
    fidelity: float
    phase: float

    @classmethod
    def from_amplitude(cls, amp: complex) -> "TransferResult":
        amp = complex(amp)
        return cls(amp, abs(amp), cmath.phase(amp))

    def to_json(self) -> dict:
        return {"re": self.amplitude.real, "im": self.amplitude.imag,
                "fidelity": self.fidelity, "phase": self.phase}


@dataclass(frozen=True)
class AmplitudeQuery:
    graph: Graph
    u: int | tuple[int, ...]
    v: int | tuple[int, ...]
    t: Time

    def __post_init__(self):
        _check_vertex(self.graph, self.u)
        _check_vertex(self.graph, self.v)

    def evaluate(self) -> TransferResult:
        return amplitude(self.graph, self.u, self.v, self.t)


def _check_vertex(g: Graph, x) -> None:
    if isinstance(g, CompositeGraph):
        if isinstance(x, (tuple, list)):
            g.join_vertex(x)
        elif not 0 <= int(x) < g.order:
            raise IndexError(f"vertex {x} out of range 0..{g.order - 1}")
    else:
        if isinstance(x, (tuple, list)) or not 0 <= int(x) < g.n:
            raise IndexError(f"vertex {x} out of range 0..{g.n - 1}")


def _vertex_parts(g: CompositeGraph, x) -> tuple[int, ...]:
    if isinstance(x, (tuple, list)):
        g.join_vertex(x)
        return tuple(int(p) for p in x)
    return g.split_vertex(int(x))


@lru_cache(maxsize=64)
def _roots_cached(n: int) -> np.ndarray:
    re = np.array([_cos_turn(k, n) for k in range(n)])
    im = np.array([_cos_turn(4 * k - n, 4 * n) for k in range(n)])
    out = re + 1j * im
    out.setflags(write=False)
    return out


def roots_of_unity(n: int) -> np.ndarray:
    """w_n^k for k = 0..n-1."""
    return _roots_cached(n)


@lru_cache(maxsize=256)
def _spectrum_cached(conn: ConnectionSet) -> Spectrum:
    return eigenvalues(CirculantGraph(conn))


def _spectrum(g: CirculantGraph) -> Spectrum:
    return _spectrum_cached(g.connection)


@lru_cache(maxsize=64)
def _mp_eigenvalues(conn: ConnectionSet, dps: int) -> tuple:
    n = conn.n
    with mpmath.workdps(dps):
        cos_k = [mpmath.cospi(mpmath.mpf(2 * k) / n) for k in range(n)]
        return tuple(mpmath.fsum(cos_k[(l * s) % n] for s in conn.elements) for l in range(n))


def _needs_extended(t: Time, g: CirculantGraph) -> bool:
    if isinstance(t, mpmath.mpf):
        return True
    return abs(float(t)) * max(g.degree, 1) > EXTENDED_THRESHOLD


def _dps_for(t: Time) -> int:
    mag = abs(float(t)) if not isinstance(t, mpmath.mpf) else abs(t)
    digits = int(mpmath.log10(mag)) + 1 if mag > 1 else 1
    return digits + 25


def mp_time_from_turns(q: int) -> mpmath.mpf:
    """t = 2*pi*q carried at enough precision for phase reduction."""
    with mpmath.workdps(len(str(abs(q))) + 30):
        return 2 * mpmath.pi * q


def reduce_phase(x: Time) -> float:
    """Centered reduction of an angle into (-pi, pi]."""
    if isinstance(x, mpmath.mpf):
        with mpmath.workdps(_dps_for(x)):
            two_pi = 2 * mpmath.pi
            r = x - two_pi * mpmath.floor(x / two_pi)
            if r > mpmath.pi:
                r -= two_pi
            return float(r)
    r = math.remainder(float(x), 2 * math.pi)
    return math.pi if r == -math.pi else r


def _eigen_phases(g: CirculantGraph, t: Time, complement: bool = False) -> np.ndarray:
    """exp(-i lambda_l t) for every character l."""
    if _needs_extended(t, g):
        conn = complement_graph(g).connection if complement else g.connection
        dps = _dps_for(t)
        lam = _mp_eigenvalues(conn, dps)
        with mpmath.workdps(dps):
            tt = mpmath.mpf(t)
            reduced = np.array([reduce_phase(lv * tt) for lv in lam])
        return np.exp(-1j * reduced)
    spec = _spectrum(g)
    if complement:
        spec = complement_spectrum(spec)
    return np.exp(-1j * spec.values * float(t))


def _circulant_entry(g: CirculantGraph, u: int, v: int, t: Time, complement: bool = False) -> complex:
    n = g.n
    d = (v - u) % n
    phases = _eigen_phases(g, t, complement)
    chars = roots_of_unity(n)[(np.arange(n) * d) % n]
    return complex(np.sum(phases * chars) / n)


def amplitude_from_spectrum(spec: Spectrum, u: int, v: int, t: float) -> TransferResult:
    n = spec.n
    d = (v - u) % n
    chars = roots_of_unity(n)[(np.arange(n) * d) % n]
    return TransferResult.from_amplitude(np.sum(np.exp(-1j * spec.values * float(t)) * chars) / n)


def amplitude(graph: Graph, u, v, t: Time) -> TransferResult:
    """Entry H(t)[u, v] of the transition matrix."""
    _check_vertex(graph, u)
    _check_vertex(graph, v)
    if isinstance(graph, CompositeGraph):
        amp = complex(1.0)
        for g, a, b in zip(graph.factors, _vertex_parts(graph, u), _vertex_parts(graph, v)):
            amp *= _circulant_entry(g, a, b, t)
        return TransferResult.from_amplitude(amp)
    return TransferResult.from_amplitude(_circulant_entry(graph, int(u), int(v), t))


def product_amplitude(queries: Sequence[AmplitudeQuery]) -> TransferResult:
    if not queries:
        raise InconsistentQueryError("need at least one query")
    t0 = queries[0].t
    amp = complex(1.0)
    for q in queries:
        if q.t != t0:
            raise InconsistentQueryError(f"queries disagree on time: {t0!r} vs {q.t!r}")
        amp *= q.evaluate().amplitude
    return TransferResult.from_amplitude(amp)


def complement_amplitude(q: AmplitudeQuery) -> TransferResult:
    """H'(t)[u, v] for the complement of a circulant, via the shifted spectrum."""
    if not isinstance(q.graph, CirculantGraph):
        raise TypeError("complement_amplitude needs a circulant graph")
    return TransferResult.from_amplitude(_circulant_entry(q.graph, int(q.u), int(q.v), q.t, complement=True))


def transition_row(g: CirculantGraph, u: int, t: float) -> np.ndarray:
    """Row u of H(t), all n entries at once."""
    phases = _eigen_phases(g, t)
    row = np.fft.ifft(phases)
    return np.roll(row, u)


def periodicity_check(graph: Graph, t: Time, tol: float = PERIODICITY_TOL) -> bool:
    """True when H(t) is the identity up to a phase at every vertex."""
    factors = graph.factors if isinstance(graph, CompositeGraph) else (graph,)
    return all(abs(abs(_circulant_entry(g, 0, 0, t)) - 1.0) <= tol for g in factors)


# -- grid scans -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FidelityCurve:
    start: float
    stop: float
    step: float
    times: np.ndarray
    fidelities: np.ndarray
    argmax_time: float
    max_fidelity: float

    def write_csv(self, fh: IO[str]) -> None:
        fh.write("t,fidelity\n")
        for t, f in zip(self.times, self.fidelities):
            fh.write(f"{t:.17g},{f:.17g}\n")

    def summary(self) -> dict:
        return {"start": self.start, "stop": self.stop, "step": self.step,
                "samples": int(self.times.size), "max_fidelity": self.max_fidelity,
                "argmax_time": self.argmax_time}


def scan_grid(t_start: float, t_stop: float, step: float) -> np.ndarray:
    if not step > 0:
        raise InvalidGridError(f"step must be positive, got {step}")
    if not t_start < t_stop:
        raise InvalidGridError(f"empty time range [{t_start}, {t_stop}]")
    count = int(math.floor((t_stop - t_start) / step + 1e-9)) + 1
    return t_start + step * np.arange(count)


def _chunk_fidelities(graph: Graph, u, v, times: np.ndarray) -> np.ndarray:
    if isinstance(graph, CompositeGraph):
        pairs = list(zip(graph.factors, _vertex_parts(graph, u), _vertex_parts(graph, v)))
    else:
        pairs = [(graph, int(u), int(v))]
    fid = np.ones(times.size)
    for g, a, b in pairs:
        n = g.n
        chars = roots_of_unity(n)[(np.arange(n) * ((b - a) % n)) % n]
        lam = _spectrum(g).values
        amps = np.sum(np.exp(-1j * np.outer(times, lam)) * chars, axis=1) / n
        fid *= np.abs(amps)
    return fid


def fidelity_scan(graph: Graph, u, v, t_start: float, t_stop: float, step: float,
                  workers: int = 1) -> FidelityCurve:
    """Sample |H(t)[u, v]| on a uniform grid; ties go to the earliest time."""
    _check_vertex(graph, u)
    _check_vertex(graph, v)
    times = scan_grid(t_start, t_stop, step)
    n_factor = max(g.n for g in graph.factors) if isinstance(graph, CompositeGraph) else graph.n
    size = max(256, SCAN_CHUNK // max(1, n_factor // 16))
    chunks = [times[i:i + size] for i in range(0, times.size, size)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _chunk_fidelities(graph, u, v, c), chunks))
    else:
        parts = [_chunk_fidelities(graph, u, v, c) for c in chunks]
    fids = np.concatenate(parts)
    i = int(np.argmax(fids))
    return FidelityCurve(float(t_start), float(t_stop), float(step), times, fids,
                         float(times[i]), float(fids[i]))


def _turn_amplitudes(g: CirculantGraph, q: np.ndarray, u: int, v: int) -> np.ndarray:
    n = g.n
    lam = _spectrum(g).values
    chars = roots_of_unity(n)[(np.arange(n) * ((v - u) % n)) % n]
    x = np.outer(q, lam)
    frac = x - np.rint(x)
    return np.sum(np.exp(-2j * np.pi * frac) * chars, axis=1) / n


def fidelity_at_turns(graph: Graph, qs: Iterable[int] | np.ndarray, u, v) -> np.ndarray:
    """|H(2 pi q)[u, v]| for an array of integer q.

    Phases are reduced through the fractional part of ``q * lambda`` so that
    large q lose no more precision than the product itself.
    """
    _check_vertex(graph, u)
    _check_vertex(graph, v)
    q = np.asarray(qs, dtype=np.float64)
    if isinstance(graph, CompositeGraph):
        fid = np.ones(q.size)
        for g, a, b in zip(graph.factors, _vertex_parts(graph, u), _vertex_parts(graph, v)):
            fid *= np.abs(_turn_amplitudes(g, q, a, b))
        return fid
    return np.abs(_turn_amplitudes(graph, q, int(u), int(v)))


def antipodal_fidelity_at_turns(graph: CirculantGraph, qs: Iterable[int] | np.ndarray,
                                u: int = 0) -> np.ndarray:
    return fidelity_at_turns(graph, qs, u, (u + graph.n // 2) % graph.n)
