"""Monte Carlo simulation of limiting likelihood-ratio processes.

The package simulates the two-sided compound Poisson process that arises
as the local limit of likelihood ratios in change-point models, computes
the limiting estimator variables (Bayesian zeta, maximum-likelihood
xi^alpha), estimates their second moments over parameter sweeps, and
cross-checks the sampler against closed-form identities and the two
boundary processes (Brownian small-jump limit, two-exponentials
large-jump limit).
"""

from .densities import (GAUSSIAN, LOGISTIC, LOGISTIC_SCALE, JumpDensitySpec,
                        NumericalError, custom_density, fisher_information,
                        get_density, kl_divergence, list_densities,
                        log_likelihood_ratio, sample_innovation)
from .functionals import EstimatorTriple, estimate, xi_alpha, xi_bounds, zeta
from .montecarlo import (SWEEP_CSV_FIELDS, CellError, SweepConfig, SweepRow,
                         estimate_second_moment, format_sweep_csv,
                         format_sweep_json, make_stream, parse_sweep_csv,
                         run_replication, run_sweep, write_sweep_csv,
                         write_sweep_json)
from .path import (OutOfHorizonError, SidePath, SideScan, TruncationError,
                   TruncationPolicy, TwoSidedPath, dump_path_csv,
                   evaluate_log, path_csv_text, rescale_time, sample_log_at,
                   sample_log_at_pair, sample_path, sample_side_path,
                   scan_side_path)
from .reference import (ReferenceConstants, Z0Config, Z0Result, constants,
                        sample_z0, sample_z0_many, sample_zinf,
                        sample_zinf_many, zeta3, zinf_values)
from .verify import (LemmaReport, check_expected_sqrt, check_lemma1_cf,
                     check_lemma2_holder, check_lemma3_decay,
                     check_lemma5_tail, expected_sqrt_target,
                     format_report_line, gaussian_expected_sqrt,
                     gaussian_log_cf, limit_log_cf, reports_to_json,
                     run_verify_suite, sqrt_ratio_mean)

__version__ = "0.1.0"

__all__ = [
    "GAUSSIAN", "LOGISTIC", "LOGISTIC_SCALE", "JumpDensitySpec",
    "NumericalError", "custom_density", "fisher_information", "get_density",
    "kl_divergence", "list_densities", "log_likelihood_ratio",
    "sample_innovation",
    "EstimatorTriple", "estimate", "xi_alpha", "xi_bounds", "zeta",
    "SWEEP_CSV_FIELDS", "CellError", "SweepConfig", "SweepRow",
    "estimate_second_moment", "format_sweep_csv", "format_sweep_json",
    "make_stream", "parse_sweep_csv", "run_replication", "run_sweep",
    "write_sweep_csv", "write_sweep_json",
    "OutOfHorizonError", "SidePath", "SideScan", "TruncationError",
    "TruncationPolicy", "TwoSidedPath", "dump_path_csv", "evaluate_log",
    "path_csv_text", "rescale_time", "sample_log_at", "sample_log_at_pair",
    "sample_path", "sample_side_path", "scan_side_path",
    "ReferenceConstants", "Z0Config", "Z0Result", "constants", "sample_z0",
    "sample_z0_many", "sample_zinf", "sample_zinf_many", "zeta3",
    "zinf_values",
    "LemmaReport", "check_expected_sqrt", "check_lemma1_cf",
    "check_lemma2_holder", "check_lemma3_decay", "check_lemma5_tail",
    "expected_sqrt_target", "format_report_line", "gaussian_expected_sqrt",
    "gaussian_log_cf", "limit_log_cf", "reports_to_json",
    "run_verify_suite", "sqrt_ratio_mean",
    "__version__",
]
