"""Convergence rates in l2(pi) for Markov chains with band transition matrices."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .band_chain import (  # noqa: F401
    BandChain,
    LimitProfile,
    StationaryDist,
    ValidationReport,
    adjoint_entry,
    check_invariance,
    is_reversible,
    row,
    stationary_truncated,
    validate,
)
from .models import (  # noqa: F401
    BdmcSpec,
    ProposalKernel,
    RateBound,
    TargetRatios,
    bdmc_chain,
    bdmc_profile,
    bdmc_rate_bound,
    bdmc_stationary,
    linear_geometric_target,
    mh_chain,
    mh_limit_profile,
    poisson_target,
    proposal_rw,
    rw_chain,
    rw_g2d1,
    rw_profile,
)
from .spectral import (  # noqa: F401
    Alpha0Result,
    DriftCertificate,
    alpha0_empirical,
    alpha0_from_profile,
    alpha0_reversible,
    drift_constants,
    neri,
    psi,
    solve_tau,
)
from .eigen import Spectrum, eigenvalues, spectrum_checks  # noqa: F401
from .truncation import RateEstimate, estimate_rho2, parameter_sweep, rho_k, truncate  # noqa: F401
