"""Stochastic-geometry model of two-hop downlink relaying in a lattice cellular network."""

from twohop.channel import PathLossModel, SystemParams
from twohop.geometry import IntensityProfile, LatticeSpec
from twohop.montecarlo import RelayScheme, simulate
from twohop.quadrature import QuadratureSpec

__all__ = [
    "IntensityProfile",
    "LatticeSpec",
    "PathLossModel",
    "QuadratureSpec",
    "RelayScheme",
    "SystemParams",
    "simulate",
]
__version__ = "0.1.0"
