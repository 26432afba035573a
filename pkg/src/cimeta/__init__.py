"""Meta-dependence between conditional-independence tests for Gaussian data.

Core pipeline: labeled covariances -> closed-form information projection
onto a CI constraint -> CIMD (change in one test's conditional mutual
information after projecting onto another), validated against FS-CID, a
bootstrap co-occurrence statistic over finite-sample replicates.
"""

__version__ = "0.1.0"

from .cimd import CimdValue, cimd, cimd_lim, enumerate_tests
from .citest import (
    Dataset,
    TestOutcome,
    empirical_covariance,
    fisher_z_from_covariance,
    fisher_z_test,
    read_covariance_csv,
    read_dataset_csv,
    write_covariance_csv,
    write_dataset_csv,
)
from .covariance import (
    CITestSpec,
    ConditionalCovariance,
    LabeledCovariance,
    conditional_mutual_information,
    gaussian_kl,
    partial_correlation,
    schur_conditional,
)
from .errors import CimetaError
from .fscid import FsCidReport, ReplicateSource, run_fs_cid, subsample
from .mle import FactorizedModel, ci_projection_via_mle, composed_covariance, fit_factorized
from .projection import ProjectionResult, project_ci, projection_preserves_conditionals
from .sem import LinearSEM, sample, sem_covariance, three_node_preset

__all__ = [
    "CITestSpec",
    "CimdValue",
    "CimetaError",
    "ConditionalCovariance",
    "Dataset",
    "FactorizedModel",
    "FsCidReport",
    "LabeledCovariance",
    "LinearSEM",
    "ProjectionResult",
    "ReplicateSource",
    "TestOutcome",
    "ci_projection_via_mle",
    "cimd",
    "cimd_lim",
    "composed_covariance",
    "conditional_mutual_information",
    "empirical_covariance",
    "enumerate_tests",
    "fisher_z_from_covariance",
    "fisher_z_test",
    "fit_factorized",
    "gaussian_kl",
    "partial_correlation",
    "project_ci",
    "projection_preserves_conditionals",
    "read_covariance_csv",
    "read_dataset_csv",
    "run_fs_cid",
    "sample",
    "schur_conditional",
    "sem_covariance",
    "subsample",
    "three_node_preset",
    "write_covariance_csv",
    "write_dataset_csv",
]
