"""Exact and naive mean-field quantities for third-order classical and
quantum Boltzmann machines."""

__version__ = "0.1.0"

from ._validation import DomainError, NumericalError, SiteCapError
from .cbm import (
    CbmMoments,
    CbmParams,
    ProductCoords,
    exact_moments_classical,
    kl_divergence,
    kl_product_to_cbm,
    log_partition_classical,
    mean_to_product,
    neg_entropy,
    prob,
    product_entropy,
    product_to_mean,
)
from .cbm_meanfield import (
    e_project_classical,
    m_project_classical,
    mf_residual_classical,
    solve_naive_mf_classical,
)
from .estimators import ClassicalMeanField, QuantumMeanField
from .modelfile import ModelFile, emit_model, gen_random_model, parse_model
from .qbm import (
    DensityMatrix,
    QbmMoments,
    QbmParams,
    QProductCoords,
    density_matrix,
    exact_moments_quantum,
    log_partition_quantum,
    product_state,
    qbm_hamiltonian,
    qmean_to_product,
    qproduct_to_mean,
    quantum_relative_entropy,
)
from .qbm_meanfield import (
    e_project_quantum,
    kl_product_to_qbm,
    m_project_quantum,
    q_effective_field,
    solve_naive_mf_quantum,
)
from .solver import SolveReport, SolverConfig
from .tensor_ops import herm_expm, herm_logm, pauli, site_operator, trace_product
from .harness import ComparisonReport, run_compare, run_sweep

__all__ = [
    "__version__",
    "DomainError",
    "NumericalError",
    "SiteCapError",
    "CbmMoments",
    "CbmParams",
    "ProductCoords",
    "exact_moments_classical",
    "kl_divergence",
    "kl_product_to_cbm",
    "log_partition_classical",
    "mean_to_product",
    "neg_entropy",
    "prob",
    "product_entropy",
    "product_to_mean",
    "e_project_classical",
    "m_project_classical",
    "mf_residual_classical",
    "solve_naive_mf_classical",
    "ClassicalMeanField",
    "QuantumMeanField",
    "ModelFile",
    "emit_model",
    "gen_random_model",
    "parse_model",
    "DensityMatrix",
    "QbmMoments",
    "QbmParams",
    "QProductCoords",
    "density_matrix",
    "exact_moments_quantum",
    "log_partition_quantum",
    "product_state",
    "qbm_hamiltonian",
    "qmean_to_product",
    "qproduct_to_mean",
    "quantum_relative_entropy",
    "e_project_quantum",
    "kl_product_to_qbm",
    "m_project_quantum",
    "q_effective_field",
    "solve_naive_mf_quantum",
    "SolveReport",
    "SolverConfig",
    "herm_expm",
    "herm_logm",
    "pauli",
    "site_operator",
    "trace_product",
    "ComparisonReport",
    "run_compare",
    "run_sweep",
]
