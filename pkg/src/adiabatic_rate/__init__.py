"""Adiabatic-fidelity rate functions for free-fermion, bosonic and spin-chain ramps."""

from .core import (
    DomainError,
    FidelityCurve,
    MomentumGrid,
    RampProtocol,
    fidelity_from_rate,
    momentum_grid,
    ramp_value,
    rate_from_fidelity,
)

__all__ = [
    "DomainError",
    "FidelityCurve",
    "MomentumGrid",
    "RampProtocol",
    "fidelity_from_rate",
    "momentum_grid",
    "ramp_value",
    "rate_from_fidelity",
]
__version__ = "0.1.0"
