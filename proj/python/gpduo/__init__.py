"""Two-component attractive GP ground states: Townes constants, minimizer, CLI commands."""

from ._gpduo import (
    beta_star,
    classify_region,
    gn_quotient,
    minimize,
    run_command,
    theory_constants,
    townes_constants,
    townes_profile,
)

__all__ = [
    "beta_star",
    "classify_region",
    "gn_quotient",
    "minimize",
    "run_command",
    "theory_constants",
    "townes_constants",
    "townes_profile",
]
