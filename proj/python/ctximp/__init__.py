"""Contextual variable importances from totally randomized trees."""

from ._ctximp import (
    ConfigError,
    DataError,
    Dataset,
    GuardError,
    JointDistribution,
    Table,
    __version__,
    asymptotic_contextual,
    asymptotic_mdi,
    cond_mi,
    distribution_from_dataset,
    forest_scores,
    generate,
    importance_report,
    is_context_dependent,
    joint_mutual_information,
    load_csv,
    pairwise,
    permutation_pvalues,
    read_distribution,
    read_table,
    run_cli,
    verify_theorems,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "GuardError",
    "JointDistribution",
    "Table",
    "__version__",
    "asymptotic_contextual",
    "asymptotic_mdi",
    "cond_mi",
    "distribution_from_dataset",
    "forest_scores",
    "generate",
    "importance_report",
    "is_context_dependent",
    "joint_mutual_information",
    "load_csv",
    "pairwise",
    "permutation_pvalues",
    "read_distribution",
    "read_table",
    "run_cli",
    "verify_theorems",
]
