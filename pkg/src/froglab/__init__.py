"""froglab: frog-model simulation lab on abelian Cayley graphs.

Exact discrete-time frog dynamics on Z^rank plus cyclic torsion factors,
with random-walk diagnostics, limit-shape estimation, and a batch
experiment front end (CLI and HTTP service).
"""

from .config import ExperimentConfig, load_config, parse_config
from .errors import (BudgetExceededError, ConfigError, DegenerateQuotientError,
                     EmptyCloudError, FroglabError, GroupMismatchError,
                     InapplicableSymmetryError, OutOfHorizonError)
from .experiments import (Check, Report, RunManifest, emit_report,
                          evaluate_checks, run_dir_for, run_experiment)
from .frog import (ActivationRecord, FrogSimulation, init_state,
                   linear_growth_experiment, run_frog, step_system,
                   subadditivity_witness, t_tail_experiment)
from .groups import (BallTable, GeneratorSet, GroupElement, GroupSpec,
                     MemoryBudget, WordMetric, build_ball_table, compose,
                     generator_set, induced_quotient_generators, inverse,
                     standard_generators, torsion_quotient)
from .rng import derive_seed, encode_sites, step_indices, stream_bases
from .shapes import (EnvelopePhi, PhiEstimate, PhiModel, fan_directions,
                     hausdorff_distance, phi_from_records, phi_hat, rescale,
                     sandwich_check, shape_convergence_series,
                     signed_permutations, symmetry_check,
                     torsion_invariance_check)
from .walks import (HeatKernel, exit_tail_mc, hit_probability_mc,
                    range_ratio_mc, return_probability_mc, simulate_walk)

__version__ = "0.1.0"

__all__ = [
    "ActivationRecord", "BallTable", "BudgetExceededError", "Check",
    "ConfigError", "DegenerateQuotientError", "EmptyCloudError",
    "EnvelopePhi", "ExperimentConfig", "FrogSimulation", "FroglabError",
    "GeneratorSet", "GroupElement", "GroupMismatchError", "GroupSpec",
    "HeatKernel", "InapplicableSymmetryError", "MemoryBudget",
    "OutOfHorizonError", "PhiEstimate", "PhiModel", "Report", "RunManifest",
    "WordMetric", "build_ball_table", "compose", "derive_seed",
    "emit_report", "encode_sites", "evaluate_checks", "exit_tail_mc",
    "fan_directions", "generator_set", "hausdorff_distance",
    "hit_probability_mc", "induced_quotient_generators", "init_state",
    "inverse", "linear_growth_experiment", "load_config", "parse_config",
    "phi_from_records", "phi_hat", "range_ratio_mc", "rescale",
    "return_probability_mc", "run_dir_for", "run_experiment", "run_frog",
    "sandwich_check", "shape_convergence_series", "signed_permutations",
    "simulate_walk", "standard_generators", "step_indices", "step_system",
    "stream_bases", "subadditivity_witness", "symmetry_check",
    "t_tail_experiment", "torsion_invariance_check", "torsion_quotient",
    "__version__",
]
