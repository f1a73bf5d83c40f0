"""Python interface to the fairalloc C++ core."""

from ._core import (
    ConfigError,
    ConflictError,
    DomainError,
    FairallocError,
    IoError,
    NotFoundError,
    SeparationError,
    ValidationError,
    analyze,
    arms,
    display_round,
    export_dataset,
    fit_logistic,
    frontier,
    interpolate,
    modal_preference,
    poststratify,
    simulate,
    synthesize_cohort,
    win_rates,
)

__all__ = [
    "ConfigError",
    "ConflictError",
    "DomainError",
    "FairallocError",
    "IoError",
    "NotFoundError",
    "SeparationError",
    "ValidationError",
    "analyze",
    "arms",
    "display_round",
    "export_dataset",
    "fit_logistic",
    "frontier",
    "interpolate",
    "modal_preference",
    "poststratify",
    "simulate",
    "synthesize_cohort",
    "win_rates",
]
