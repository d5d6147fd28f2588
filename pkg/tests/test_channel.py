import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mimo_outage.channel import (
    CorrelationMatrix,
    MimoConfig,
    capacity,
    distinct_spectrum,
    exponential_profile,
    from_eigenvalues,
    has_ties,
    majorizes,
    sample_channel,
)
from mimo_outage.errors import DomainError, SpectrumError


def spectra(n):
    """Random positive spectra of length n with trace n."""
    return st.lists(st.floats(0.05, 5.0), min_size=n, max_size=n).map(
        lambda v: np.asarray(v) * n / np.sum(v)
    )


def robin_hood(v, rng, steps=3):
    """Transfers from richer to poorer entries: the result is majorized by v."""
    w = np.sort(np.array(v, dtype=float))[::-1]
    for _ in range(steps):
        i, j = sorted(rng.choice(w.size, 2, replace=False))
        if w[i] > w[j]:
            d = rng.uniform(0, (w[i] - w[j]) / 2)
            w[i] -= d
            w[j] += d
    return np.sort(w)[::-1]


# ---------------------------------------------------------------- construction


def test_from_eigenvalues_identity():
    R = from_eigenvalues((1, 1, 1))
    assert np.allclose(R.entries, np.eye(3))
    assert R.det == pytest.approx(1.0)


def test_from_eigenvalues_fig1_det():
    R = from_eigenvalues((2.7, 0.2, 0.1))
    assert R.det == pytest.approx(0.054, rel=1e-12)
    assert np.all(np.diff(R.eigenvalues) <= 0)


@pytest.mark.parametrize("eigs", [(2.0, 0.5), (1.5, 0.0), (2.5, -0.5)])
def test_from_eigenvalues_rejects(eigs):
    with pytest.raises(SpectrumError):
        from_eigenvalues(eigs)


def test_correlation_matrix_rejects_non_hermitian():
    with pytest.raises(SpectrumError):
        CorrelationMatrix(np.array([[1.0, 0.5], [0.2, 1.0]]))


def test_exponential_profile_examples():
    assert np.allclose(exponential_profile(3, 0.0).entries, np.eye(3))
    assert np.allclose(exponential_profile(2, 0.5).eigenvalues, [1.5, 0.5])
    R = exponential_profile(3, 0.9)
    assert np.all(R.eigenvalues > 0)
    assert np.allclose(np.sort(R.eigenvalues), np.linalg.eigvalsh(R.entries))
    with pytest.raises(DomainError):
        exponential_profile(3, 1.0)


def test_config_dimension_mismatch():
    with pytest.raises(DomainError):
        MimoConfig(3, 2, from_eigenvalues((1, 1)), from_eigenvalues((1, 1)))


@given(spectra(4))
def test_det_at_most_one(v):
    R = from_eigenvalues(v)
    assert R.det <= 1 + 1e-12
    assert R.det == pytest.approx(np.linalg.det(R.entries).real, rel=1e-9)


@given(st.integers(2, 5), st.floats(0.0, 0.95))
def test_exponential_profile_trace(n, c):
    R = exponential_profile(n, c)
    assert np.trace(R.entries).real == pytest.approx(n)
    assert np.allclose(R.sqrt @ R.sqrt, R.entries, atol=1e-12)


# ---------------------------------------------------------------- sampling and capacity


def test_sample_channel_identity_and_zero(fig1):
    rng = np.random.default_rng(0)
    hw = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    iid = MimoConfig.iid(3, 2)
    assert np.allclose(sample_channel(iid, hw), hw)
    assert np.allclose(sample_channel(fig1, np.zeros((2, 3))), 0)
    with pytest.raises(DomainError):
        sample_channel(fig1, np.zeros((3, 2)))


def _draw(cfg, n, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, cfg.Nr, cfg.Nt, 2))
    return sample_channel(cfg, (g[..., 0] + 1j * g[..., 1]) * np.sqrt(0.5))


def test_sample_channel_kronecker_covariance():
    # non-diagonal correlations exercise the matrix square roots
    cfg = MimoConfig(3, 2, exponential_profile(3, 0.7), exponential_profile(2, 0.4))
    H = _draw(cfg, 100_000, 1)
    vecs = np.swapaxes(H, 1, 2).reshape(H.shape[0], -1)  # column-stacked vec(H)
    cov = vecs.T @ vecs.conj() / H.shape[0]
    target = np.kron(cfg.Rt.entries.T, cfg.Rr.entries)
    assert np.linalg.norm(cov - target) / np.linalg.norm(target) < 0.02


def test_sample_channel_iid_power():
    H = _draw(MimoConfig.iid(2, 2), 100_000, 2)
    p = np.abs(H) ** 2
    se = p.std(axis=0) / np.sqrt(p.shape[0])
    assert np.all(np.abs(p.mean(axis=0) - 1) <= 3 * se)


def test_capacity_examples():
    assert capacity(np.zeros((2, 3)), 10.0) == 0.0
    assert capacity(np.array([[1.0]]), 3.0) == pytest.approx(2.0, rel=1e-15)
    rng = np.random.default_rng(3)
    H = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    lam = np.linalg.eigvalsh(H @ H.conj().T)
    assert capacity(H, 7.0) == pytest.approx(np.sum(np.log2(1 + 7.0 * lam)), rel=1e-10)
    with pytest.raises(DomainError):
        capacity(np.array([[np.nan]]), 1.0)


def test_capacity_nondecreasing_in_rho():
    H = _draw(MimoConfig.iid(3, 2), 50, 4)
    rhos = np.logspace(-2, 5, 30)
    caps = np.array([capacity(H, r) for r in rhos])
    assert np.all(np.diff(caps, axis=0) >= 0)


# ---------------------------------------------------------------- majorization


def test_majorizes_examples():
    assert majorizes((2.3, 0.5, 0.2), (1, 1, 1))
    assert majorizes((3, 0, 0), (2.7, 0.2, 0.1))
    assert not majorizes((2.0, 0.9, 0.1), (1.9, 1.05, 0.05))
    assert not majorizes((1.9, 1.05, 0.05), (2.0, 0.9, 0.1))
    with pytest.raises(DomainError):
        majorizes((1, 1), (1, 1, 1))


@given(spectra(3), spectra(3), spectra(3))
def test_majorization_preorder(a, b, c):
    assert majorizes(a, a)
    assert majorizes(a, a[::-1])
    if majorizes(a, b) and majorizes(b, c):
        assert majorizes(a, c)
    if majorizes(a, b) and majorizes(b, a):
        assert np.allclose(np.sort(a), np.sort(b), atol=1e-6)


def test_schur_concave_determinant():
    rng = np.random.default_rng(9)
    for _ in range(500):
        n = int(rng.integers(2, 6))
        v2 = rng.dirichlet(np.ones(n)) * n
        v2 = np.maximum(v2, 1e-3)
        v2 *= n / v2.sum()
        v1 = robin_hood(v2, rng)
        assert majorizes(v2, v1)
        assert np.prod(v1) >= np.prod(v2) - 1e-12


# ---------------------------------------------------------------- distinct spectrum


def test_distinct_spectrum_examples():
    v = distinct_spectrum((2.7, 0.2, 0.1), 1e-4)
    assert np.array_equal(v, [2.7, 0.2, 0.1])
    w = distinct_spectrum((1, 1, 1), 1e-4)
    assert np.sum(w) == pytest.approx(3.0, rel=1e-14)
    assert np.all(np.diff(w) < 0)
    assert not has_ties(w)


@given(st.lists(st.sampled_from([0.5, 1.0, 1.5]), min_size=2, max_size=5),
       st.floats(1e-6, 1e-2))
def test_distinct_spectrum_separates_ties(v, eps):
    v = np.asarray(v) * len(v) / np.sum(v)
    w = distinct_spectrum(v, eps)
    assert w.sum() == pytest.approx(v.sum(), rel=1e-12)
    assert np.all(np.diff(w) < 0)
    assert np.all(w > 0)
