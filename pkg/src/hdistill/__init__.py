"""H-code and multilevel magic-state distillation toolkit."""

from .error_models import ErrorPoly2, ProtocolSpec, acceptance_probability, e1_poly, e2_poly, et_poly
from .hcodes import (GridCode, StabilizerCode, build_grid_code, build_hcode, code_distance_exhaustive,
                     hierarchical_syndrome, verify_transversal_hadamard, y_distance)
from .oracle import (OracleResult, classify_config, compare_with_closed_form, conditional_error,
                     enumerate_exact, enumerate_truncated)
from .pauli import BitMatrix, PauliString, UsageError
from .search import (FitResult, ParetoSet, ProtocolEval, ProtocolExpr, asymptotic_ratio_check, evaluate,
                     fit_cost_curve, parse, pareto_search, query, total_input_count)

__version__ = "0.1.0"
