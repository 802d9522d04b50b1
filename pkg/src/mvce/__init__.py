"""Minimum-volume covering ellipsoids on tall matrices.

Compute a leverage-score profile of the rows, keep the smallest prefix
of the descending score order that provably preserves the spectrum,
solve the sampled dual with Wolfe-Atwood ascent, and certify how far the
result can be from the optimum of the full problem.  Every theoretical
bound used along the way is exposed as a runtime-checkable quantity.
"""

from .errors import (BoundViolation, ContainmentWarning, DegenerateScale,
                     DimensionError, FormatError, MaxIterations, MvceError,
                     NotFeasible, RankDeficient, SketchTooSmall,
                     ThresholdUnreachable)
from .linalg import (extreme_gen_eigs, gram, inv_spd, load_matrix, log_det,
                     save_matrix)
from .leverage import (LeverageProfile, approx_leverage, exact_leverage,
                       profile_to_csv, scaled_row_leverage,
                       weighted_tail_leverage)
from .sampling import (SampleSelection, predict_sample_size,
                       sample_deterministic, sample_deterministic_approx,
                       sample_proportional, sample_uniform, selection_to_csv)
from .solver import (Certificate, DesignVector, DualState, Ellipsoid,
                     bound_final_gap, bound_initial_gap, certify,
                     dual_objective, init_khachiyan, init_kumar_yildirim,
                     lift_and_center, minimum_volume_ellipsoid,
                     recover_ellipsoid, solve_fixed_point,
                     solve_wolfe_atwood)
from .datagen import DatasetSpec, describe, generate, parse_spec
from .bench import (BenchRecord, PipelineConfig, load_records, run_pipeline,
                    run_sweep, save_records, verify_bounds)

__version__ = "0.1.0"

__all__ = [
    "BenchRecord", "BoundViolation", "Certificate", "ContainmentWarning",
    "DatasetSpec", "DegenerateScale", "DesignVector", "DimensionError",
    "DualState", "Ellipsoid", "FormatError", "LeverageProfile",
    "MaxIterations", "MvceError", "NotFeasible", "PipelineConfig",
    "RankDeficient", "SampleSelection", "SketchTooSmall",
    "ThresholdUnreachable", "approx_leverage", "bound_final_gap",
    "bound_initial_gap", "certify", "describe", "dual_objective",
    "exact_leverage", "extreme_gen_eigs", "generate", "gram",
    "init_khachiyan", "init_kumar_yildirim", "inv_spd", "lift_and_center",
    "load_matrix", "load_records", "log_det", "minimum_volume_ellipsoid",
    "parse_spec", "predict_sample_size", "profile_to_csv",
    "recover_ellipsoid", "run_pipeline", "run_sweep", "sample_deterministic",
    "sample_deterministic_approx", "sample_proportional", "sample_uniform",
    "save_matrix", "save_records", "scaled_row_leverage", "selection_to_csv",
    "solve_fixed_point", "solve_wolfe_atwood", "verify_bounds",
    "weighted_tail_leverage",
]
