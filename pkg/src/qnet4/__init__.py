"""Entropic and rank certification of four-node quantum network states."""

from .layout import INCIDENCE, NODES, TOPOLOGIES, SystemLayout, incidence
from .netbuild import NetworkState, SourceSpec, build_network, random_network, sample_source

__all__ = [
    "INCIDENCE",
    "NODES",
    "TOPOLOGIES",
    "SystemLayout",
    "incidence",
    "NetworkState",
    "SourceSpec",
    "build_network",
    "random_network",
    "sample_source",
]
__version__ = "0.1.0"
