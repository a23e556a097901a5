import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from upasense.analytic import (
    AnalyticDetector,
    BracketError,
    h1_covariance,
    invert_sf,
    invert_threshold,
    rho_from_snr,
    rho_matrix,
    wed_corr,
    wed_h1_scales,
    wed_pd,
    wed_pf,
    wevd_h1_scales,
    wevd_pd,
    wevd_pf,
)
from upasense.gammasum import SeriesControl, SeriesConvergenceError


def test_wed_pf_examples():
    assert wed_pf(0.0, [0.3, 0.7], 1.0, 4) == 1.0
    assert wed_pf(math.log(2), [1.0], 1.0, 1) == pytest.approx(0.5, abs=1e-14)
    assert wed_pf(0.5, [0.5, 0.5], 1.0, 1) == pytest.approx(2 * math.exp(-1), abs=1e-14)


def test_wed_pd_examples():
    # M = 1, K = 1, gamma = 1: exponential with doubled scale.
    assert wed_pd(2 * math.log(2), [1.0], [1.0], 1.0, 1.0, 1) == pytest.approx(0.5, abs=1e-14)
    # No signal: H1 collapses onto H0.
    w = [0.2, 0.5, 0.3]
    for tau in (0.5, 1.0, 1.5):
        assert wed_pd(tau, w, [0, 0, 0], 1.0, 1.0, 8) == pytest.approx(wed_pf(tau, w, 1.0, 8), abs=1e-14)


def test_rho_examples():
    r = rho_matrix([1.0, 0.0, 2.0], 1.0, 1.0)
    assert r[0, 1] == 0.0 and r[1, 2] == 0.0
    assert rho_matrix([1.0, 1.0], 1.0, 1.0)[0, 1] == pytest.approx(0.25, abs=1e-15)
    assert rho_matrix([1e6, 1e6], 1.0, 1.0)[0, 1] == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diag(wed_corr([0.3, 0.1], 1.0, 1.0)) == 1.0)


def test_rho_identity_random():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        M = rng.integers(2, 8)
        a = rng.lognormal(0, 2, M) * np.exp(1j * rng.uniform(0, 6, M))
        s2, n2 = rng.lognormal(0, 1), rng.lognormal(0, 1)
        g = np.abs(a) ** 2 * s2 / n2
        np.testing.assert_allclose(rho_matrix(a, s2, n2), rho_from_snr(g), atol=1e-12, rtol=0)


def test_wed_h1_scales_reproduce_true_covariance_spectrum():
    # |D^(1/2) C D^(1/2)|_ij equals |Sigma_1|_ij, so the spectra of the two
    # (via the energy model) agree when the covariance is rank-one plus diagonal.
    rng = np.random.default_rng(1)
    a = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    w = rng.dirichlet(np.ones(5))
    cov = h1_covariance(w, a, 0.8, 1.3)
    gam = np.abs(a) ** 2 * 0.8 / 1.3
    d = 1.3 * w * (gam + 1)
    model = np.sqrt(d)[:, None] * wed_corr(a, 0.8, 1.3) * np.sqrt(d)[None, :]
    np.testing.assert_allclose(np.abs(cov), model, rtol=1e-12)
    np.testing.assert_allclose(wed_h1_scales(w, a, 0.8, 1.3),
                               np.sort(np.linalg.eigvalsh(model))[::-1], rtol=1e-10)


@pytest.mark.parametrize("M", [1, 2, 3])
@pytest.mark.parametrize("K", [1, 2, 4])
def test_wed_pf_against_brute_force(M, K):
    rng = np.random.default_rng(100 + 10 * M + K)
    w = rng.dirichlet(np.ones(M)) if M > 1 else np.array([1.0])
    n = 1_000_000
    # Lambda = (1/K) sum_m w_m ||y_m||^2 with ||y_m||^2 ~ Gamma(K, 1) for unit noise.
    lam = (w[:, None] * rng.gamma(K, 1.0, size=(M, n))).sum(axis=0) / K
    for tau in np.quantile(lam, np.linspace(0.05, 0.95, 10)):
        emp = (lam > tau).mean()
        se = math.sqrt(emp * (1 - emp) / n)
        assert abs(wed_pf(float(tau), w, 1.0, K) - emp) <= 4 * se


def test_wevd_pf_scalar_matches_wed():
    for tau in np.linspace(0.0, 5.0, 21):
        assert abs(wevd_pf(tau, [1.0], 1.3, 7) - wed_pf(tau, [1.0], 1.3, 7)) < 1e-10


def test_wevd_pf_limits():
    assert wevd_pf(0.0, [0.6, 0.4], 1.0, 2) == 1.0
    assert wevd_pf(1e3, [0.6, 0.4], 1.0, 2) == pytest.approx(0.0, abs=1e-15)


def test_wevd_pf_against_sampled_wishart():
    rng = np.random.default_rng(7)
    n, K, w = 1_000_000, 2, np.array([0.6, 0.4])
    y = (rng.standard_normal((n, 2, K)) + 1j * rng.standard_normal((n, 2, K))) / math.sqrt(2)
    z = np.sqrt(w)[None, :, None] * y
    g = z @ np.conj(np.swapaxes(z, 1, 2)) / K
    lam = np.linalg.eigvalsh(g)[:, -1]
    emp = (lam > 1.0).mean()
    assert abs(wevd_pf(1.0, w, 1.0, K) - emp) <= 3 * math.sqrt(emp * (1 - emp) / n)


def test_wevd_pd_modes():
    a = [0.8]
    for tau in (0.5, 2.0, 4.0):
        p = wevd_pd(tau, [1.0], a, 1.0, 1.0, 3, mode="paper")
        e = wevd_pd(tau, [1.0], a, 1.0, 1.0, 3, mode="eigen")
        assert p == pytest.approx(e, abs=1e-12)
        assert e == pytest.approx(wed_pd(tau, [1.0], a, 1.0, 1.0, 3), abs=1e-10)
    w = [0.5, 0.3, 0.2]
    for mode in ("paper", "eigen"):
        assert wevd_pd(0.9, w, [0, 0, 0], 1.0, 1.0, 6, mode=mode) == pytest.approx(
            wevd_pf(0.9, w, 1.0, 6), abs=1e-12)
    with pytest.raises(ValueError):
        wevd_h1_scales(w, [1, 1, 1], 1.0, 1.0, mode="diag")


def test_wevd_pd_eigen_against_monte_carlo():
    rng = np.random.default_rng(12)
    a = np.array([1.0, 0.4 + 0.3j])
    w = np.abs(a) ** 2 / np.sum(np.abs(a) ** 2)
    K, n = 50, 100_000
    y = (rng.standard_normal((n, 2, K)) + 1j * rng.standard_normal((n, 2, K))) / math.sqrt(2)
    s = (rng.standard_normal((n, 1, K)) + 1j * rng.standard_normal((n, 1, K))) / math.sqrt(2)
    y = y + a[None, :, None] * s
    z = np.sqrt(w)[None, :, None] * y
    lam = np.linalg.eigvalsh(z @ np.conj(np.swapaxes(z, 1, 2)) / K)[:, -1]
    for tau in np.quantile(lam, [0.1, 0.3, 0.5, 0.7, 0.9]):
        emp = (lam > tau).mean()
        se = math.sqrt(emp * (1 - emp) / n)
        assert abs(wevd_pd(float(tau), w, a, 1.0, 1.0, K, "eigen") - emp) <= 3 * se


def test_inversion():
    assert invert_threshold(0.5, "wed", [1.0], 1.0, 1) == pytest.approx(math.log(2), abs=1e-8)
    w = [0.1, 0.2, 0.3, 0.4]
    tau = invert_threshold(0.1, "wed", w, 1.0, 10)
    assert abs(wed_pf(tau, w, 1.0, 10) - 0.1) < 1e-8
    tau = invert_threshold(0.1, "wevd", w, 1.0, 10)
    assert abs(wevd_pf(tau, w, 1.0, 10) - 0.1) < 1e-8
    near_one = invert_threshold(1 - 1e-7, "wed", w, 1.0, 10)
    assert near_one < invert_threshold(0.9, "wed", w, 1.0, 10)
    with pytest.raises(ValueError):
        invert_threshold(1.0, "wed", w, 1.0, 10)


def test_bracket_error():
    with pytest.raises(BracketError):
        invert_sf(lambda t: 0.5, 0.1)


def test_detector_residuals_certified():
    det = AnalyticDetector("wed", [0.1, 0.3, 0.6], [0.01, 0.02, 0.03], 1.0, 1e-3, 100)
    det.pf(0.5e-3)
    det.pd(0.5e-3)
    assert len(det.residuals) == 2
    assert all(0.0 <= r <= 1e-10 for r in det.residuals)


def test_convergence_error_not_silent():
    with pytest.raises(SeriesConvergenceError):
        wed_pf(1.0, [0.999, 0.001], 1.0, 100, SeriesControl(max_terms=100))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.sampled_from([1, 4, 20]), st.integers(0, 2**32 - 1))
def test_probabilities_bounded_monotone_and_permutation_invariant(M, K, seed):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(M) * 3)
    a = rng.lognormal(0, 0.5, M) * np.exp(1j * rng.uniform(0, 6, M))
    s2, n2 = 0.5, 1.0
    perm = rng.permutation(M)
    taus = np.linspace(0.0, 3.0, 9)
    fns = [
        lambda t, w, a: wed_pf(t, w, n2, K),
        lambda t, w, a: wed_pd(t, w, a, s2, n2, K),
    ]
    if K >= M:
        fns += [
            lambda t, w, a: wevd_pf(t, w, n2, K),
            lambda t, w, a: wevd_pd(t, w, a, s2, n2, K, "eigen"),
            lambda t, w, a: wevd_pd(t, w, a, s2, n2, K, "paper"),
        ]
    for f in fns:
        vals = [f(float(t), w, a) for t in taus]
        assert vals[0] == 1.0
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert np.all(np.diff(vals) <= 1e-12)
        vp = [f(float(t), w[perm], a[perm]) for t in taus]
        np.testing.assert_allclose(vp, vals, atol=1e-10)
