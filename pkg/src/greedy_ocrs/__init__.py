"""Greedy online contention resolution schemes for rank-one, partition and
transversal matroid constraints, with exact and Monte Carlo selectability
checks."""

__version__ = "0.1.0"

from .constraints import (  # noqa: E402
    Instance,
    PartitionConstraint,
    RankOneConstraint,
    TransversalConstraint,
    is_independent,
    max_matching,
    validate_point,
)
from .schemes import FamilyRealization, SchemeKind, can_always_add, family_contains, run_online  # noqa: E402

__all__ = [
    "Instance",
    "PartitionConstraint",
    "RankOneConstraint",
    "TransversalConstraint",
    "is_independent",
    "max_matching",
    "validate_point",
    "FamilyRealization",
    "SchemeKind",
    "can_always_add",
    "family_contains",
    "run_online",
]
