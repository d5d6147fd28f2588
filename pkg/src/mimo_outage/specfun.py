"""Special-function kernel: log-gamma, Pochhammer, Tricomi U(1, b; x),
vertical-line Mellin-Barnes quadrature and the integer-parameter Meijer G
that sets the high-SNR outage constant.

Double-precision routines return Python complex/float.  The ball-arithmetic
helpers (``*_acb``) work on python-flint ``acb`` values at whatever precision
is active inside :func:`working_precision`.
"""
import cmath
import contextlib
import math
import threading
from dataclasses import dataclass

import numpy as np
from flint import acb, arb, ctx
from scipy.optimize import brentq
from scipy.special import roots_laguerre

from .errors import ConvergenceError, DomainError, PoleError, TailDivergenceError

# flint keeps one global working precision; every ball computation in the
# package runs under this lock so concurrent callers cannot clobber it.
_PREC_LOCK = threading.RLock()


@contextlib.contextmanager
def working_precision(bits):
    """Run a block of flint arithmetic at ``bits`` of working precision."""
    with _PREC_LOCK:
        old = ctx.prec
        ctx.prec = int(bits)
        try:
            yield
        finally:
            ctx.prec = old


@dataclass(frozen=True)
class ContourSpec:
    """Vertical integration line Re(s) = abscissa_c, truncated at |Im s| <= T.

    ``nodes`` is the Gauss-Legendre count per panel; ``half_height_T`` is the
    starting truncation, doubled until the tail is below ``tail_tolerance``.
    """

    abscissa_c: float
    half_height_T: float = 32.0
    nodes: int = 16
    tail_tolerance: float = 1e-12

    def __post_init__(self):
        if not self.half_height_T > 0:
            raise ValueError("half_height_T must be positive")
        if self.nodes < 16:
            raise ValueError("nodes must be at least 16")
        if not 0 < self.tail_tolerance < 1:
            raise ValueError("tail_tolerance must lie in (0, 1)")


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    tail_estimate: float
    nodes_used: int


# ---------------------------------------------------------------- log-gamma

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _lanczos_log_gamma(z):
    # valid for Re(z) large enough that the Lanczos sum stays off the cut
    x = z - 1
    acc = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (x + k)
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * cmath.log(t) - t + cmath.log(acc)


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex z.

    Lanczos approximation (g=7, 9 terms) after shifting z to Re(z) >= 10
    with the recurrence log G(z) = log G(z+m) - sum log(z+k); the shift keeps
    the branch principal, matching scipy.special.loggamma.
    """
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise PoleError(f"log_gamma pole at z={z.real:g}")
    if z.imag == 0 and z.real > 0:
        return complex(math.lgamma(z.real))
    shift = 0j
    while z.real < 10:
        shift += cmath.log(z)
        z += 1
    return _lanczos_log_gamma(z) - shift


def pochhammer(z, n):
    """Rising factorial (z)_n = z (z+1) ... (z+n-1); works elementwise on arrays."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")
    out = np.ones_like(z) if isinstance(z, np.ndarray) else 1
    for k in range(int(n)):
        out = out * (z + k)
    return out


# ---------------------------------------------------------------- Tricomi U(1, beta; x)

_LAGUERRE_CACHE = {}


def _laguerre(n):
    if n not in _LAGUERRE_CACHE:
        _LAGUERRE_CACHE[n] = roots_laguerre(n)
    return _LAGUERRE_CACHE[n]


def _tricomi_laguerre(beta, x, tol):
    # U(1,b;x) = (1/x) int_0^inf (1 + u/x)^(b-2) e^-u du
    prev = None
    err = math.inf
    for n in (32, 64, 128, 256):
        u, w = _laguerre(n)
        val = complex(np.dot(w, np.exp((beta - 2) * np.log1p(u / x)))) / x
        if prev is not None:
            err = abs(val - prev) / max(abs(val), 1e-300)
            if err <= tol:
                return val
        prev = val
    raise ConvergenceError(
        f"Gauss-Laguerre refinement stalled for U(1,{beta};{x})", achieved=err
    )


def _tricomi_ball(beta, x, tol):
    bits = 64
    target = max(-math.log2(tol), 30) + 4
    while bits <= 4096:
        with working_precision(bits):
            v = acb(x).hypgeom_u(1, acb(beta.real, beta.imag))
            if v.rel_accuracy_bits() >= target:
                m = v.mid()
                return complex(float(m.real), float(m.imag))
        bits *= 2
    raise ConvergenceError(f"ball evaluation of U(1,{beta};{x}) did not converge")


def tricomi_u1(beta, x, tol=1e-12, method="auto"):
    """Confluent hypergeometric U(1, beta; x) for x > 0 and complex beta.

    ``method='laguerre'`` integrates (1+u/x)^(beta-2) against e^-u with
    Gauss-Laguerre rules of doubling size until two agree to ``tol``.  That
    integrand is only benign when x dominates |beta-2|; otherwise ('auto'
    picks it) the value comes from arb's rigorous hypergeometric U with
    precision raised until the ball is tight.
    """
    x = float(x)
    if not x > 0:
        raise DomainError("tricomi_u1 requires x > 0")
    beta = complex(beta)
    if method == "auto":
        method = "laguerre" if x >= 2 * abs(beta - 2) + 8 else "ball"
    if method == "laguerre":
        return _tricomi_laguerre(beta, x, tol)
    if method == "ball":
        return _tricomi_ball(beta, x, tol)
    raise ValueError(f"unknown method {method!r}")


def tricomi_u1_parts_acb(beta, x, log_x, gamma_bm1):
    """Split U(1,beta;x) = singular + regular in ball arithmetic.

    singular = Gamma(beta-1) x^(1-beta) e^x, regular = 1F1(1;beta;x)/(1-beta).
    The regular part is analytic in beta away from non-positive integers,
    decays like 1/beta to the right, and is what makes a contour closable.
    ``log_x`` and ``gamma_bm1`` are passed in so callers can reuse them.
    """
    sing = gamma_bm1 * ((1 - beta) * log_x + x).exp()
    reg = x.hypgeom_1f1(1, beta) / (1 - beta)
    return sing, reg


# ---------------------------------------------------------------- Mellin-Barnes quadrature


def _eval(integrand, s):
    try:
        v = np.asarray(integrand(s), dtype=complex)
        if v.shape == s.shape:
            return v
    except (TypeError, ValueError):
        pass
    return np.array([complex(integrand(complex(si))) for si in s])


def _gl_piece(integrand, c, lo, hi, width, x, w):
    # composite Gauss-Legendre on [lo, hi] with panels no wider than width
    m = max(1, int(math.ceil((hi - lo) / width - 1e-9)))
    h = (hi - lo) / m
    starts = lo + h * np.arange(m)
    t = (starts[:, None] + 0.5 * h * (x[None, :] + 1)).ravel()
    f = _eval(integrand, c + 1j * t)
    ww = np.tile(0.5 * h * w, m)
    return complex(np.dot(ww, f)), float(np.dot(ww, np.abs(f))), m * len(x)


def mellin_barnes_integrate(integrand, contour, max_height=2.0**30, panel_width=1.0):
    """(1/2 pi) int integrand(c + i t) dt over the whole vertical line.

    The window [-T, T] is integrated with composite Gauss-Legendre panels,
    then extended by annuli [T, 2T] on both sides until an annulus adds less
    than ``tail_tolerance`` relative to the running value.  Each piece is
    accepted once halving its panel width changes it by less than a tenth of
    the tolerance; panels widen with T since the integrand gets smoother
    far from the real axis.  The integrand may take an array of s values
    (faster) or a single complex.
    """
    c = contour.abscissa_c
    tol = contour.tail_tolerance
    x, w = np.polynomial.legendre.leggauss(contour.nodes)
    eps = np.finfo(float).eps
    state = {"mass": 0.0, "nodes": 0}

    def resolved(lo, hi, h, ref):
        coarse, mass, n = _gl_piece(integrand, c, lo, hi, h, x, w)
        state["nodes"] += n
        for _ in range(30):
            fine, mass, n = _gl_piece(integrand, c, lo, hi, h / 2, x, w)
            state["nodes"] += n
            scale = max(abs(fine) if ref is None else ref, 64 * eps * (state["mass"] + mass))
            if abs(fine - coarse) <= 0.1 * tol * scale:
                state["mass"] += mass
                return fine, mass, h
            coarse, h = fine, h / 2
        raise ConvergenceError("panel refinement did not settle", abs(fine - coarse) / scale)

    T = float(contour.half_height_T)
    value, _, h = resolved(-T, T, float(panel_width), None)
    tails, masses = [], []
    while True:
        h = min(2 * h, T / 4)
        up, m_up, h_up = resolved(T, 2 * T, h, abs(value))
        down, m_down, h_down = resolved(-2 * T, -T, h, abs(value))
        h = min(h_up, h_down)
        value += up + down
        T *= 2
        floor = 64 * eps * state["mass"]
        # an oscillating annulus can cancel by accident, so demand two quiet
        # annuli in a row; divergence is judged on the non-cancelling mass
        tails.append(abs(up + down) / max(abs(value), floor, 1e-300))
        masses.append(m_up + m_down)
        if len(tails) >= 2 and max(tails[-2:]) <= tol:
            return QuadratureResult(value / (2 * np.pi), max(tails[-2:]), state["nodes"])
        if len(masses) >= 3 and masses[-1] >= masses[-3]:
            raise TailDivergenceError(
                f"contour tail stopped shrinking at T={T:g}", achieved=tails[-1]
            )
        if T > max_height:
            raise ConvergenceError(f"contour tail above tolerance at T={T:g}", tails[-1])


# ---------------------------------------------------------------- Meijer G of the rate


def _meijer_poles(Nt, Nr):
    """Integer poles of 1/[s prod_i (s-Nt-i+1)_Nt] with multiplicities."""
    mult = {0: 1}
    for i in range(1, Nr + 1):
        for q in range(i, Nt + i):
            mult[q] = mult.get(q, 0) + 1
    return mult


def _meijer_residues(Nt, Nr, x, bits):
    mult = _meijer_poles(Nt, Nr)
    roots = [p for p, m in mult.items() for _ in range(m)]
    with working_precision(bits):
        L = arb(x).log()
        total = arb(0)
        for p, m in mult.items():
            # Laurent coefficient of eps^(m-1) in x^(p+eps) / prod_{q != p}(p-q+eps)
            series = [arb(1)] + [arb(0)] * (m - 1)
            for q in roots:
                if q == p:
                    continue
                d = arb(p - q)
                inv = [(-1) ** k / d ** (k + 1) for k in range(m)]
                series = [sum((series[j] * inv[k - j] for j in range(k + 1)), arb(0))
                          for k in range(m)]
            expo = arb(1)
            coeff = arb(0)
            for k in range(m):
                coeff += expo * series[m - 1 - k]
                expo = expo * L / (k + 1)
            total += coeff * arb(x) ** p
        return total


def meijer_abscissa(Nt, Nr, x):
    """Integration abscissa for g: right of every pole, at least Nt+Nr-1/2.

    When log x is small the integrand on Re s = Nt+Nr-1/2 is many orders
    larger than g itself and double precision cancels away; moving to the
    real saddle point of |integrand| (log x = sum over poles of 1/(c-p))
    removes that cancellation without crossing a pole.
    """
    base = Nt + Nr - 0.5
    lx = math.log(x)
    mult = _meijer_poles(Nt, Nr)

    def slope(c):
        return lx - sum(m / (c - p) for p, m in mult.items())

    if slope(base) >= 0:
        return base
    hi = min(base + 4 * sum(mult.values()) / lx, 600.0 / lx)
    if slope(hi) <= 0:
        return hi
    return brentq(slope, base, hi, xtol=1e-6)


def _meijer_integrand(Nt, Nr, x):
    lx = math.log(x)

    def f(s):
        den = s
        for i in range(1, Nr + 1):
            den = den * pochhammer(s - Nt - i + 1, Nt)
        return np.exp(s * lx) / den

    return f


def meijer_g_rate(Nt, Nr, x, method="residue", tol=1e-12):
    """g(x) = (1/2 pi i) int x^s / [s prod_{i=1..Nr} (s-Nt-i+1)_Nt] ds, Re s = Nt+Nr-1/2.

    This is the Meijer G that multiplies rho^(-Nt Nr) in the high-SNR outage
    of an Nt x Nr link, evaluated at x = 2^R.  ``method='residue'`` sums the
    finite set of (possibly higher-order) pole residues in ball arithmetic;
    ``method='quadrature'`` integrates the vertical line numerically.  Both
    must agree; the residue path is exact up to rounding and is the default.
    """
    if not (Nt >= 1 and Nr >= 1):
        raise DomainError("antenna counts must be positive")
    if Nt < Nr:
        raise DomainError("meijer_g_rate expects Nt >= Nr")
    x = float(x)
    if not x >= 1:
        raise DomainError("meijer_g_rate requires x >= 1")
    if x == 1:
        return 0.0
    if method == "residue":
        d = Nt * Nr
        # near x=1 the residues cancel down to ~(x-1)^d
        bits = 96 + int(d * max(0.0, -math.log2(x - 1)))
        for _ in range(6):
            v = _meijer_residues(Nt, Nr, x, bits)
            if v.rel_accuracy_bits() >= 60:
                return float(v.mid())
            bits *= 2
        raise ConvergenceError("residue sum lost all precision")
    if method == "quadrature":
        contour = ContourSpec(meijer_abscissa(Nt, Nr, x), half_height_T=16.0,
                              nodes=16, tail_tolerance=tol)
        return mellin_barnes_integrate(_meijer_integrand(Nt, Nr, x), contour).value.real
    raise ValueError(f"unknown method {method!r}")
