"""Correlation matrices, Kronecker channel sampling, capacity and majorization."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SpectrumError

TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-12
TIE_GAP = 1e-6          # relative gap below which two eigenvalues count as tied
DEFAULT_EPSILON = 1e-4  # perturbation used by distinct_spectrum


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Hermitian positive-definite correlation matrix with trace N.

    ``eigenvalues`` are sorted descending.  Analytic engines read only the
    spectrum; the simulator uses ``entries`` and ``sqrt``.
    """

    entries: np.ndarray
    eigenvalues: np.ndarray = field(init=False)
    _sqrt: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SpectrumError("correlation matrix must be square")
        if not np.all(np.isfinite(m)):
            raise SpectrumError("correlation matrix has non-finite entries")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
            raise SpectrumError("correlation matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        n = m.shape[0]
        if abs(np.trace(m).real - n) > TRACE_TOL * n:
            raise SpectrumError(f"trace {np.trace(m).real:.12g} differs from dimension {n}")
        lam, vec = np.linalg.eigh(m)
        if lam[0] <= 0:
            raise SpectrumError("correlation matrix must be positive definite")
        order = np.argsort(lam)[::-1]
        lam, vec = lam[order], vec[:, order]
        m.setflags(write=False)
        lam.setflags(write=False)
        root = (vec * np.sqrt(lam)) @ vec.conj().T
        root.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "_sqrt", root)

    @property
    def dimension(self):
        return self.entries.shape[0]

    @property
    def sqrt(self):
        """Hermitian principal square root."""
        return self._sqrt

    @property
    def det(self):
        return float(np.prod(self.eigenvalues))

    @property
    def log_det(self):
        return float(np.sum(np.log(self.eigenvalues)))

    def __repr__(self):
        return f"CorrelationMatrix(eigenvalues={np.round(self.eigenvalues, 12).tolist()})"


@dataclass(frozen=True)
class MimoConfig:
    """Antenna counts with transmit (Rt) and receive (Rr) correlation."""

    Nt: int
    Nr: int
    Rt: CorrelationMatrix
    Rr: CorrelationMatrix

    def __post_init__(self):
        if self.Nt < 1 or self.Nr < 1:
            raise DomainError("antenna counts must be positive")
        if self.Rt.dimension != self.Nt or self.Rr.dimension != self.Nr:
            raise DomainError("correlation dimensions do not match antenna counts")

    @classmethod
    def from_spectra(cls, t, r):
        """Config with diagonal correlations of spectra t (transmit) and r (receive)."""
        Rt, Rr = from_eigenvalues(t), from_eigenvalues(r)
        return cls(Rt.dimension, Rr.dimension, Rt, Rr)

    @classmethod
    def iid(cls, Nt, Nr):
        return cls.from_spectra(np.ones(Nt), np.ones(Nr))

    @property
    def a(self):
        """Eigenvalues of Rr^-1."""
        return 1.0 / self.Rr.eigenvalues

    @property
    def b(self):
        """Eigenvalues of Rt^-1."""
        return 1.0 / self.Rt.eigenvalues


def from_eigenvalues(eigs):
    """Diagonal correlation matrix with the given positive spectrum (sum = N)."""
    v = np.asarray(eigs, dtype=float).ravel()
    if v.size == 0:
        raise SpectrumError("empty spectrum")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise SpectrumError("eigenvalues must be finite and positive")
    if abs(v.sum() - v.size) > TRACE_TOL * v.size:
        raise SpectrumError(f"eigenvalues sum to {v.sum():.12g}, expected {v.size}")
    return CorrelationMatrix(np.diag(np.sort(v)[::-1]))


def exponential_profile(N, coeff):
    """Toeplitz correlation with entries coeff^|i-j| (unit diagonal)."""
    if not 0 <= coeff < 1:
        raise DomainError("coeff must lie in [0, 1)")
    idx = np.arange(N)
    return CorrelationMatrix(float(coeff) ** np.abs(idx[:, None] - idx[None, :]))


def sample_channel(config, noise_draw):
    """H = Rr^(1/2) Hw Rt^(1/2); ``noise_draw`` may carry leading batch axes."""
    hw = np.asarray(noise_draw)
    if hw.shape[-2:] != (config.Nr, config.Nt):
        raise DomainError(f"noise draw has shape {hw.shape[-2:]}, expected {(config.Nr, config.Nt)}")
    return config.Rr.sqrt @ hw @ config.Rt.sqrt


def capacity(H, rho):
    """log2 det(I + rho H H^H) in bits/s/Hz via Cholesky; batched over leading axes."""
    H = np.asarray(H, dtype=complex)
    if not np.all(np.isfinite(H)):
        raise DomainError("channel matrix has non-finite entries")
    if not rho > 0:
        raise DomainError("rho must be positive")
    nr = H.shape[-2]
    gram = rho * (H @ np.conj(np.swapaxes(H, -1, -2)))
    L = np.linalg.cholesky(np.eye(nr) + gram)
    diag = np.real(np.diagonal(L, axis1=-2, axis2=-1))
    return 2.0 * np.sum(np.log2(diag), axis=-1)


def majorizes(v_big, v_small, tol=1e-9):
    """True when v_small is majorized by v_big (v_small ⪯ v_big).

    Both vectors are sorted descending first; prefix sums of v_big must
    dominate and the totals must agree.
    """
    a = np.sort(np.asarray(v_big, dtype=float))[::-1]
    b = np.sort(np.asarray(v_small, dtype=float))[::-1]
    if a.shape != b.shape:
        raise DomainError("majorization needs vectors of equal length")
    ca, cb = np.cumsum(a), np.cumsum(b)
    return bool(abs(ca[-1] - cb[-1]) <= tol and np.all(ca >= cb - tol))


def has_ties(eigs, gap=TIE_GAP):
    v = np.sort(np.asarray(eigs, dtype=float))
    return bool(v.size > 1 and np.min(np.diff(v)) <= gap * np.mean(v))


def distinct_spectrum(eigs, epsilon=DEFAULT_EPSILON):
    """Separate repeated eigenvalues so Vandermonde denominators stay nonzero.

    Returned unchanged (as a descending array) when every pairwise gap already
    exceeds epsilon times the mean; otherwise e_i -> e_i (1 + i epsilon) for
    the descending-sorted spectrum, rescaled to keep the trace.
    """
    if not 0 < epsilon <= 1e-2:
        raise DomainError("epsilon must lie in (0, 1e-2]")
    v = np.sort(np.asarray(eigs, dtype=float))[::-1]
    if not has_ties(v, gap=epsilon):
        return v
    total = v.sum()
    # ascending weights on a descending spectrum keep the order of distinct values
    out = v * (1 + epsilon * np.arange(v.size)[::-1])
    out *= total / out.sum()
    return out
