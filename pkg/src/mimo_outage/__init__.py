"""Outage probability of Kronecker-correlated Rayleigh MIMO channels.

Three mutually checking routes: an exact Mellin-Barnes engine
(:mod:`.exact`), the high-SNR asymptote (:mod:`.asymptotic`) and Monte Carlo
simulation (:mod:`.montecarlo`).
"""
from .asymptotic import (
    AsymptoticDecomposition,
    asymptotic_outage,
    check_rate_convexity,
    coding_gain,
    correlation_penalty,
    decompose,
    diversity_order,
    estimate_diversity_slope,
    optimize_rate,
)
from .channel import (
    CorrelationMatrix,
    MimoConfig,
    capacity,
    distinct_spectrum,
    exponential_profile,
    from_eigenvalues,
    majorizes,
    sample_channel,
)
from .exact import (
    ExactEngineConfig,
    PermutationTerm,
    cdf_from_mellin,
    exact_cdf,
    exact_outage,
    mellin_phi,
    normalize_config,
    permutation_terms,
)
from .montecarlo import OutageEstimate, TrialPlan, estimate_mellin, estimate_outage, sweep
from .specfun import (
    ContourSpec,
    QuadratureResult,
    log_gamma,
    meijer_g_rate,
    mellin_barnes_integrate,
    pochhammer,
    tricomi_u1,
)
