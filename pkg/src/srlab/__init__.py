"""Periodic data, length spectra and smooth conjugacies of expanding circle maps."""
from .counterexample import build_pair, find_multiplier_mismatch, verify_isospectral
from .errors import (AmbiguousMatch, BudgetExceeded, InductiveViolation, NotMonotone,
                     NumericalFailure, PreconditionError)
from .estimators import ConjugacyReconstructor, LivsicSolver, MeasureNormalizer, WhitneyExtension
from .livsic import (barrier_function, coboundary_residual, derivative_transfer_check,
                     livsic_from_periodic_data, periodic_obstruction)
from .maps import (CircleMapSpec, ConjugatedMap, DisplacementDiffeo, check_diffeo, compose_diffeos,
                   diffeo_inverse, evaluate, inverse_branch, linear_map, load_map, save_map,
                   sine_squared_map, trig_diffeo, validate_expanding)
from .messengers import hybrid_messenger, messenger, messenger_survey, pseudo_orbit
from .normalization import (birkhoff_histogram, invariant_density, lebesgue_identity_residual,
                            normalize_map, normalizing_conjugacy)
from .orbits import (SymbolicCode, cylinder, distortion_check, enumerate_periodic, gap_statistics,
                     locate, periodic_point_from_code)
from .reconstruction import (ReconstructionConfig, conjugacy_oracle, initial_adjustment, run_scheme,
                             scheme_step)
from .sampled import SampledFunction
from .spectrum import (SparsityParams, code_marking, default_sparsity_parameters, length_spectrum,
                       recover_marking, sparsity_classify)
from .whitney import divided_differences, extend_correspondence

__version__ = "0.1.0"
