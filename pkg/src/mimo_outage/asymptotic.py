"""High-SNR outage: p_out ~ S (C(R) rho)^(-Nt Nr).

S = 1 / (det(Rr)^Nt det(Rt)^Nr) is the correlation penalty, C(R) =
g(2^R)^(-1/(Nt Nr)) the modulation and coding gain, with g the Meijer G of
:func:`mimo_outage.specfun.meijer_g_rate`, and d = Nt Nr the diversity order.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ConvergenceError, DomainError, SpectrumError
from .exact import normalize_config
from .specfun import meijer_g_rate

RATE_CAP = 64.0


@dataclass(frozen=True)
class AsymptoticDecomposition:
    correlation_penalty_S: float
    coding_gain_C: float
    diversity_d: int

    def outage(self, rho):
        return self.correlation_penalty_S * (self.coding_gain_C * rho) ** (-self.diversity_d)


def _g(Nt, Nr, R):
    Nt, Nr = max(Nt, Nr), min(Nt, Nr)
    return meijer_g_rate(Nt, Nr, 2.0 ** R)


def log_correlation_penalty(config):
    for m in (config.Rt, config.Rr):
        if np.min(m.eigenvalues) <= 0:
            raise SpectrumError("correlation matrix is singular")
    return -(config.Nt * config.Rr.log_det + config.Nr * config.Rt.log_det)


def correlation_penalty(config):
    """S = 1/(det(Rr)^Nt det(Rt)^Nr), computed from log-spectra."""
    return math.exp(log_correlation_penalty(config))


def diversity_order(config):
    return config.Nt * config.Nr


def coding_gain(R, Nt, Nr):
    """C(R) = g(2^R)^(-1/(Nt Nr)) in linear SNR units."""
    if not R > 0:
        raise DomainError("coding gain needs R > 0")
    return _g(Nt, Nr, R) ** (-1.0 / (Nt * Nr))


def decompose(R, config):
    return AsymptoticDecomposition(
        correlation_penalty(config), coding_gain(R, config.Nt, config.Nr), diversity_order(config)
    )


def asymptotic_outage(R, config, rho):
    """Leading high-SNR outage S rho^(-Nt Nr) g(2^R); not clamped to [0, 1]."""
    if not rho > 0:
        raise DomainError("rho must be positive")
    cfg, _ = normalize_config(config)
    if R <= 0:
        return 0.0
    g = meijer_g_rate(cfg.Nt, cfg.Nr, 2.0 ** R)
    if g == 0:
        return 0.0
    d = cfg.Nt * cfg.Nr
    return math.exp(log_correlation_penalty(cfg) - d * math.log(rho) + math.log(g))


def estimate_diversity_slope(curve):
    """Least-squares estimate of -d log p / d log rho from (rho, p) pairs."""
    pts = np.asarray(curve, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise DomainError("need at least two (rho, p_out) points")
    if np.any(pts[:, 1] <= 0) or np.any(pts[:, 0] <= 0):
        raise DomainError("rho and p_out must be positive")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise DomainError("all rho values coincide")
    slope = np.polyfit(lx, ly, 1)[0]
    return float(-slope)


def check_rate_convexity(Nt, Nr, rate_grid, tol=1e-9):
    """First and second differences of g(2^R) on the grid.

    ``worst_violation`` is the most negative difference found (0 when none
    is negative).
    """
    R = np.asarray(rate_grid, dtype=float)
    if R.size < 4 or np.any(np.diff(R) <= 0) or R[0] <= 0:
        raise DomainError("rate grid must be >= 4 increasing positive values")
    g = np.array([_g(Nt, Nr, r) for r in R])
    d1 = np.diff(g)
    d2 = np.diff(d1)
    return {
        "monotone": bool(np.all(d1 >= -tol)),
        "convex": bool(np.all(d2 >= -tol)),
        "worst_violation": float(max(0.0, -min(d1.min(), d2.min()))),
    }


def optimize_rate(config, rho, objective):
    """Rate selection on the asymptotic outage curve.

    ``objective`` is ``{"target_outage": p}`` or ``{"max_throughput": True}``.
    With a target, returns the R in (0, 64] where the asymptote hits
    the target (bisection; the asymptote increases with R).  With
    ``max_throughput`` maximizes R (1 - min(1, p_out(R))) by a grid scan
    followed by bounded golden-section refinement.
    """
    target_outage = objective.get("target_outage")
    if (target_outage is None) == (not objective.get("max_throughput")):
        raise DomainError("objective needs exactly one of target_outage or max_throughput")
    if target_outage is not None:
        if not 0 < target_outage < 1:
            raise DomainError("target outage must lie in (0, 1)")
        lt = math.log(target_outage)

        def f(R):
            p = asymptotic_outage(R, config, rho)
            return (math.log(p) if p > 0 else -1e300) - lt

        if f(RATE_CAP) < 0:
            raise ConvergenceError(f"target {target_outage} not reached for R <= {RATE_CAP}")
        lo = 1e-9
        if f(lo) > 0:
            raise ConvergenceError(f"target {target_outage} already exceeded at R -> 0")
        return float(brentq(f, lo, RATE_CAP, xtol=1e-14, rtol=1e-14, maxiter=500))

    def throughput(R):
        return R * (1.0 - min(1.0, asymptotic_outage(R, config, rho)))

    grid = np.linspace(0.05, RATE_CAP, 1280)
    vals = np.array([throughput(r) for r in grid])
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(lambda r: -throughput(r), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.x)
