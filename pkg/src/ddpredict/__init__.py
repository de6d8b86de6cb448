from .basis import BasisExpr, BasisSet, BasisSyntaxError, LagVar, eval_basis, format_basis, parse_basis
from .errors import MaxIterationsWarning, NonFiniteError, NumericalError, RankDeficientError
from .hankel import (PredictionBlocks, build_prediction_blocks, check_identifiability,
                     extended_hankel, hankel)
from .linalg import (LqFactors, SolveOptions, lq_factor, numerical_rank, project_onto_rows,
                     solve_lasso, solve_min_norm, solve_ridge, truncate_lq)
from .predictor import (InitialCondition, NoiseSpec, PredictionConfig, SystemParams, add_noise,
                        check_equivalence, identify_parameters, predict_data_driven,
                        predict_model_based, simulate_trajectory, simulate_true)
from .trajectory import Trajectory, read_trajectory, write_trajectory

__version__ = "0.1.0"
