"""Ground states and entanglement of transverse-field dimerized spin-1/2 systems.

Methods: single-spin mean field, pair mean field with parity restoration,
first-order corrections to the pair mean field, and two exact references
(free fermions for the XY chain, exact diagonalization up to 16 spins).
"""
__version__ = "0.1.0"

from .model import (Boundary, GaugeError, GaugeRecord, SystemSpec, Topology,  # noqa: E402
                    canonicalize, coupling_graph, effective_alpha)

__all__ = [
    "__version__",
    "Boundary",
    "GaugeError",
    "GaugeRecord",
    "SystemSpec",
    "Topology",
    "canonicalize",
    "coupling_graph",
    "effective_alpha",
]
