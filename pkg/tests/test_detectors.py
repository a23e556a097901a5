import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from upasense.detectors import (
    DetectorKind,
    Hypothesis,
    SampleBlock,
    decide,
    jacobi_eigvalsh,
    synth_batch,
    synth_block,
    wed_batch,
    wed_statistic,
    wevd_batch,
    wevd_statistic,
)


def test_h0_variance():
    rng = np.random.default_rng(0)
    y = synth_batch("H0", [0.3, 2.0], 1.0, 0.7, 100, rng, 5000)
    assert np.mean(np.abs(y) ** 2) == pytest.approx(0.7, rel=0.01)


def test_h1_with_null_signal_matches_h0_in_law():
    rng = np.random.default_rng(1)
    y = synth_batch("H1", [0.0, 0.0], 5.0, 2.0, 50, rng, 10000)
    assert np.mean(np.abs(y) ** 2) == pytest.approx(2.0, rel=0.01)


def test_h1_energy_correlation():
    rng = np.random.default_rng(2)
    y = synth_batch("H1", [1.0, 1.0], 1.0, 1.0, 1, rng, 100_000)
    e = np.abs(y[:, :, 0]) ** 2
    assert np.corrcoef(e[:, 0], e[:, 1])[0, 1] == pytest.approx(0.25, abs=0.01)


def test_synth_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        synth_block("H0", [1.0], 1.0, 1.0, 0, rng)
    with pytest.raises(ValueError):
        synth_block("H0", [1.0], 1.0, -1.0, 4, rng)
    blk = synth_block("H1", [1.0, 2.0, 3.0], 1.0, 1.0, 7, rng)
    assert (blk.M, blk.K, blk.hypothesis) == (3, 7, Hypothesis.H1)


def test_wed_examples():
    assert wed_statistic(np.zeros((3, 4), complex), [0.2, 0.3, 0.5]) == 0.0
    row = np.array([[1 + 1j, 2, -1j]])
    assert wed_statistic(row, [1.0]) == pytest.approx(np.mean(np.abs(row) ** 2))
    y = np.array([[1, 1], [2, 0]], dtype=complex)
    assert wed_statistic(y, [0.5, 0.5]) == 1.5


def test_wevd_scalar_reduction_is_exact():
    rng = np.random.default_rng(3)
    for _ in range(50):
        y = synth_block("H1", [0.7], 1.0, 1.0, 13, rng)
        assert wevd_statistic(y, [1.0]) == wed_statistic(y, [1.0])
        assert wevd_statistic(y, [0.37]) == wed_statistic(y, [0.37])


def test_wevd_orthogonal_rows():
    y = np.array([[1, 1, 0, 0], [0, 0, 1, -1]], dtype=complex)
    assert wevd_statistic(y, [0.5, 0.5]) == pytest.approx(0.5 * 2 / 4, abs=1e-15)


def _charpoly_lmax(g):
    """Largest root of det(g - t I) from the characteristic polynomial's coefficients."""
    c = np.poly(g)
    roots = np.roots(c)
    return float(np.max(roots.real))


def test_wevd_against_characteristic_polynomial():
    rng = np.random.default_rng(4)
    for _ in range(20):
        y = rng.standard_normal((3, 8)) + 1j * rng.standard_normal((3, 8))
        w = rng.dirichlet(np.ones(3))
        z = np.sqrt(w)[:, None] * y
        g = z @ z.conj().T / 8
        assert wevd_statistic(y, w) == pytest.approx(_charpoly_lmax(g), abs=1e-10)


def test_jacobi_against_lapack_batched():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((200, 6, 6)) + 1j * rng.standard_normal((200, 6, 6))
    h = a + np.conj(np.swapaxes(a, 1, 2))
    np.testing.assert_allclose(jacobi_eigvalsh(h), np.linalg.eigvalsh(h), atol=1e-12)


def test_jacobi_results_do_not_depend_on_batching():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((40, 5, 5)) + 1j * rng.standard_normal((40, 5, 5))
    h = a @ np.conj(np.swapaxes(a, 1, 2))
    full = jacobi_eigvalsh(h)
    for k in (0, 7, 39):
        assert np.array_equal(jacobi_eigvalsh(h[k : k + 1])[0], full[k])


def test_jacobi_diagonal_and_degenerate():
    d = np.diag([3.0, 1.0, 2.0]).astype(complex)
    assert jacobi_eigvalsh(d).tolist() == [1.0, 2.0, 3.0]
    assert np.allclose(jacobi_eigvalsh(np.eye(4)), 1.0)
    assert np.all(jacobi_eigvalsh(np.zeros((3, 3))) == 0.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_statistic_properties(M, K, seed):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))
    w = rng.dirichlet(np.ones(M))
    lam = wevd_statistic(y, w)
    z = np.sqrt(w)[:, None] * y
    diag = np.sum(np.abs(z) ** 2, axis=1) / K
    assert lam <= diag.sum() * (1 + 1e-12) + 1e-12
    assert lam >= diag.max() * (1 - 1e-12) - 1e-12
    # Per-sample phase rotation of one row leaves both statistics unchanged.
    y2 = y.copy()
    y2[0] *= np.exp(1j * rng.uniform(0, 2 * np.pi, K))
    assert wed_statistic(y2, w) == pytest.approx(wed_statistic(y, w), rel=1e-12)
    if M > 1:
        # Row-wise phase changes alter the Gram matrix, but a common one does not.
        y3 = y * np.exp(1j * rng.uniform(0, 2 * np.pi, K))[None, :]
        assert wevd_statistic(y3, w) == pytest.approx(lam, rel=1e-10)
    perm = rng.permutation(M)
    assert wed_statistic(y[perm], w[perm]) == pytest.approx(wed_statistic(y, w), rel=1e-12)
    assert wevd_statistic(y[perm], w[perm]) == pytest.approx(lam, rel=1e-10, abs=1e-14)


def test_wevd_row_phase_invariance():
    rng = np.random.default_rng(8)
    y = rng.standard_normal((4, 9)) + 1j * rng.standard_normal((4, 9))
    w = rng.dirichlet(np.ones(4))
    # A constant phase per row is a unitary similarity of the Gram matrix.
    y2 = y * np.exp(1j * rng.uniform(0, 6, 4))[:, None]
    assert wevd_statistic(y2, w) == pytest.approx(wevd_statistic(y, w), rel=1e-12)


def test_batch_matches_single():
    rng = np.random.default_rng(9)
    y = synth_batch("H1", [0.5, 1.0, 0.2], 1.0, 1.0, 20, rng, 30)
    w = np.array([0.2, 0.5, 0.3])
    b = wevd_batch(y, w)
    e = wed_batch(y, w)
    for k in range(30):
        assert b[k] == wevd_statistic(SampleBlock(y[k], Hypothesis.H1), w)
        assert e[k] == wed_statistic(y[k], w)


def test_decide():
    assert decide(1.0, 0.5) is True
    assert decide(0.5, 0.5) is False
    assert decide(0.0, 1.0) is False


def test_kind_enum():
    assert DetectorKind("wed") is DetectorKind.WED
    assert DetectorKind("wevd").value == "wevd"


def test_weight_length_mismatch():
    with pytest.raises(ValueError):
        wed_statistic(np.ones((2, 3)), [1.0])
    with pytest.raises(ValueError):
        wevd_statistic(np.ones((2, 3)), [1.0, 0.0, 0.0])
