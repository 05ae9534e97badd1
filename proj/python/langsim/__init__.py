"""Simulation of binary cognate presence/absence data along language trees."""

from ._langsim import (
    ConfigError,
    MetricError,
    ModelError,
    Tree,
    TreeError,
    borrowing_generator,
    borrowing_rate_for_percentage,
    derive_sd_rates,
    generate,
    generate_yule,
    goodness_of_fit,
    height_difference,
    parse_newick,
    quartet_distance,
    read_alignment,
    run_suite,
    stationary_distribution,
    suite_names,
)

__all__ = [
    "ConfigError",
    "MetricError",
    "ModelError",
    "Tree",
    "TreeError",
    "borrowing_generator",
    "borrowing_rate_for_percentage",
    "derive_sd_rates",
    "generate",
    "generate_yule",
    "goodness_of_fit",
    "height_difference",
    "parse_newick",
    "quartet_distance",
    "read_alignment",
    "run_suite",
    "stationary_distribution",
    "suite_names",
]
