"""Numerical workbench for integral and composition operators on Bergman
spaces over the unit disk with rapidly decreasing radial weights.

Subpackages are organized bottom-up: weights and symbols feed quadrature
grids and kernel tables, which feed the integral transforms, the lattice and
Carleson diagnostics, truncated operator matrices, and finally the
boundedness / compactness / Schatten-class criteria checks.
"""

from .errors import (
    AccuracyError,
    ArgumentError,
    ContractError,
    DomainError,
    EvaluationError,
    NumericalError,
    PreconditionError,
    RangeError,
    ResourceError,
    TruncationError,
    WorkbenchError,
)
from .criteria import (CheckConfig, CriterionReport, check_boundedness,
                       check_compactness, check_schatten, id_case_panel,
                       necessary_condition)
from .kernel import (KernelTable, get_table, kernel_eval, kernel_norm_band,
                     kernel_norm_log, required_degree)
from .lattice import (Lattice, build_lattice, coverage_fraction,
                      multiplicity_report, separation_report)
from .operators import (OperatorMatrix, SpectralSummary, build_operator,
                        build_toeplitz, spectral_summary,
                        toeplitz_identity_check)
from .quadrature import (DiscreteMeasure, DiskQuadrature, build_grid,
                         build_probe_grid, lambda_norm_log, pullback_measure,
                         tau_ladder)
from .symbols import Symbol, parse_symbol
from .transforms import (TransformRequest, ap_norm, averaging, berezin,
                         gv_transform, lp_norm, m_transform, n_transform,
                         sp_norm)
from .weights import WeightSpec, WeightValues, weight_eval

__all__ = [
    "WorkbenchError", "DomainError", "RangeError", "ArgumentError",
    "PreconditionError", "AccuracyError", "ResourceError", "ContractError",
    "EvaluationError", "TruncationError", "NumericalError",
    "WeightSpec", "WeightValues", "weight_eval",
    "Symbol", "parse_symbol",
    "DiskQuadrature", "DiscreteMeasure", "build_grid", "build_probe_grid",
    "lambda_norm_log", "pullback_measure", "tau_ladder",
    "KernelTable", "get_table", "kernel_eval", "kernel_norm_log",
    "kernel_norm_band", "required_degree",
    "TransformRequest", "m_transform", "n_transform", "gv_transform",
    "ap_norm", "sp_norm", "lp_norm", "berezin", "averaging",
    "Lattice", "build_lattice", "coverage_fraction", "separation_report",
    "multiplicity_report",
    "OperatorMatrix", "SpectralSummary", "build_operator", "build_toeplitz",
    "spectral_summary", "toeplitz_identity_check",
    "CheckConfig", "CriterionReport", "check_boundedness",
    "check_compactness", "check_schatten", "necessary_condition",
    "id_case_panel",
]
