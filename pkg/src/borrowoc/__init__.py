"""Operating characteristics of hypothesis tests that borrow external data.

The package computes — exactly where possible, by seeded Monte Carlo where
not — the type I error rate and power of one-sided normal-endpoint tests
whose prior borrows from external data through a power prior (fixed weight
or Empirical Bayes), and compares each borrowing test against the ordinary
z-test *calibrated* to the borrowing test's realized level.  One-arm and
two-arm (hybrid control) designs are covered, with external data treated
as fixed or as random.
"""

__version__ = "0.1.0"

from .statmath import (DomainError, Interval, InvalidBracketError,
                       NonConvergenceError, NumericsError, RngStream,
                       find_root, integrate, maximize_1d, norm_cdf,
                       norm_quantile)
from .scenarios import ScenarioOneArm, ScenarioTwoArm
from .borrow import (EMPIRICAL_BAYES, FIXED_POWER_PRIOR, NO_BORROWING,
                     ArmSummary, BorrowingMethod, NormalPosterior,
                     decide_borrow, decide_no_borrow, eb_delta,
                     eb_delta_numeric, fixed_pp_posterior, posterior_for,
                     posterior_tail)
from .region import (RejectionRegion, interval_count, rejection_prob,
                     rejection_region)
from .oc_onearm import (OCPoint, oc_fixed_external, oc_random_external_fixed_pp,
                        oc_random_external_mc, power_calibrated,
                        t1e_closed_form_fixed_pp)
from .oc_twoarm import (OCProfile, oc_fixed_external_two_arm,
                        oc_random_external_two_arm,
                        oc_random_external_two_arm_mc, power_calibrated_two_arm,
                        power_profile, reject_prob_two_arm, t1e_profile)
from .runner import (ReplicateRecord, RunReport, run_algorithm1,
                     run_algorithm2, run_grid, summarize)
from .cli import ConfigError, ScenarioConfig, dispatch, main, parse_config

__all__ = [
    "__version__",
    # numeric kernels
    "Interval", "RngStream", "norm_cdf", "norm_quantile", "integrate",
    "find_root", "maximize_1d",
    "NumericsError", "NonConvergenceError", "InvalidBracketError",
    "DomainError",
    # scenarios
    "ScenarioOneArm", "ScenarioTwoArm",
    # borrowing and decisions
    "ArmSummary", "BorrowingMethod", "NormalPosterior",
    "NO_BORROWING", "FIXED_POWER_PRIOR", "EMPIRICAL_BAYES",
    "fixed_pp_posterior", "eb_delta", "eb_delta_numeric", "posterior_for",
    "posterior_tail", "decide_borrow", "decide_no_borrow",
    # rejection regions
    "RejectionRegion", "rejection_region", "rejection_prob", "interval_count",
    # one-arm operating characteristics
    "OCPoint", "oc_fixed_external", "t1e_closed_form_fixed_pp",
    "power_calibrated", "oc_random_external_fixed_pp", "oc_random_external_mc",
    # two-arm operating characteristics
    "OCProfile", "reject_prob_two_arm", "t1e_profile", "power_profile",
    "oc_fixed_external_two_arm", "oc_random_external_two_arm",
    "oc_random_external_two_arm_mc", "power_calibrated_two_arm",
    # runs
    "ReplicateRecord", "RunReport", "run_algorithm1", "run_algorithm2",
    "run_grid", "summarize",
    # configuration / CLI
    "ScenarioConfig", "ConfigError", "parse_config", "dispatch", "main",
]
