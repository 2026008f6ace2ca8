"""Enumeration of annotated grammar outputs."""

from ._agenum import (
    AgenumError,
    Grammar,
    compute_profile,
    disambiguate_rigid,
    enumerate_mappings,
    pdann_to_grammar,
    translate,
)

__all__ = [
    "AgenumError",
    "Grammar",
    "compute_profile",
    "disambiguate_rigid",
    "enumerate_mappings",
    "pdann_to_grammar",
    "translate",
]
