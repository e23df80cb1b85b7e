"""Balanced charged configurations and the parking-garage limits of screw-motion-invariant minimal surfaces."""
from .config import (
    BalanceReport,
    CoincidentPointsError,
    Configuration,
    ConfigurationError,
    GenusTable,
    Nondegeneracy,
    SurfaceClass,
    balance_report,
    forces,
    genus_table,
    jacobian,
    load_configuration,
    nondegeneracy,
    normalize_rotation,
    residual_norm,
    rotation_vector,
    save_configuration,
    total_charge_and_class,
)
from .solver import CollisionError, SolveOptions, SolveOutcome, random_search, solve

__all__ = [
    "BalanceReport",
    "CoincidentPointsError",
    "CollisionError",
    "Configuration",
    "ConfigurationError",
    "GenusTable",
    "Nondegeneracy",
    "SolveOptions",
    "SolveOutcome",
    "SurfaceClass",
    "balance_report",
    "forces",
    "genus_table",
    "jacobian",
    "load_configuration",
    "nondegeneracy",
    "normalize_rotation",
    "random_search",
    "residual_norm",
    "rotation_vector",
    "save_configuration",
    "solve",
    "total_charge_and_class",
]
__version__ = "0.1.0"
