"""Circulant graphs, quantum-walk transfer amplitudes and PGST classification."""

from .graph_core import (
    CirculantGraph,
    CompositeGraph,
    ConnectionSet,
    DivisorSet,
    GraphError,
    cartesian_product,
    complement_graph,
    gcd_graph,
    make_cycle,
    parse_graph,
    union_graphs,
)
from .spectra import dependency_witness, eigenvalues, is_integral, rational_independence
from .transfer import amplitude, fidelity_scan
from .kronecker import ApproxProblem, pgst_targets, phase_report, solve
from .classify import Status, Verdict, classify

__version__ = "0.1.0"
