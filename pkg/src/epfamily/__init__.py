"""Extended Poisson family of lifetime distributions.

One real shape parameter unifies the minimum (competing risks) and maximum
(complementary risks) compounding of a baseline lifetime with a
zero-truncated Poisson number of latent components.
"""

__version__ = "0.1.0"

from .family import (
    LAMBDA_THRESHOLD,
    Distribution,
    DomainError,
    EPFamily,
    density_at_zero,
    log_norm_const,
    norm_const,
    q_transform,
    sample_latent,
    sample_ztp,
)
from .baselines import (
    FAMILIES,
    GEV,
    Exponential,
    Exponentiated,
    ModelFamily,
    Weibull,
    eep,
    egevp,
    ewp,
    ge2p,
    get_family,
)
from .inference import (
    CensoredSample,
    FitConfig,
    FitResult,
    fit_mle,
    information_criteria,
    log_likelihood,
    observed_information,
    standard_errors_ci,
)
from .nonparam import KMCurve, kaplan_meier
from .montecarlo import SimScenario, SimSummary, calibrate_censoring, run_scenario
from .dataio import load_aircraft, parse_csv, parse_raw, read_data
