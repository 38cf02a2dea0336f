from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from conftest import cn, orthogonal_sources
from jamsense import detectors as det
from jamsense import rng as rng_mod
from jamsense.detectors import DetectorSpec, Kind
from jamsense.errors import DegenerateInput, IncompatibleDetector, InsufficientDimension, InvalidArgument
from jamsense.signal_model import Hypothesis, NoiseCovariance, Scenario, generate, whiten

matrices = st.tuples(st.integers(4, 6), st.integers(0, 2**32 - 1)).map(
    lambda a: cn(np.random.default_rng(a[1]), (a[0], a[0] + 4)))
scales = st.floats(1e-3, 1e3)


# --- singular values ---------------------------------------------------------


def test_zero_matrix():
    assert np.all(det.singular_values(np.zeros((3, 5))) == 0)


def test_rank_one(rng):
    h, s = cn(rng, 4), cn(rng, 9)
    sv = det.singular_values(np.outer(h, s))
    assert sv[0] == pytest.approx(np.linalg.norm(h) * np.linalg.norm(s), rel=1e-12)
    assert np.all(sv[1:] < 1e-10)


def test_singular_values_vs_hermitian_eigensolver(rng):
    Y = cn(rng, (8, 20))
    lam2 = det.singular_values(Y) ** 2
    eig = np.sort(np.linalg.eigvalsh(Y @ Y.conj().T))[::-1]
    assert np.allclose(lam2, eig, rtol=1e-8)


def test_singular_values_input_checks():
    with pytest.raises(InvalidArgument):
        det.singular_values(np.zeros((5, 3)))
    with pytest.raises(InvalidArgument):
        det.singular_values(np.zeros((0, 3)))


@given(matrices)
def test_frobenius_identity(Y):
    assert det.energy(Y).value == pytest.approx(np.sum(det.singular_values(Y) ** 2), rel=1e-9)


# --- SSV / KSV ---------------------------------------------------------------


def test_ssv_noiseless_rank_one(rng):
    assert det.ssv(np.outer(cn(rng, 4), cn(rng, 9)), 1.0).value < 1e-20


def test_ssv_orthogonal_value():
    assert det.ssv(orthogonal_sources(4, 10, (5, 3)), 1.0).value == pytest.approx(9.0, rel=1e-12)


def test_ksv_orthogonal_value():
    assert det.ksv(orthogonal_sources(4, 10, (5, 3, 2)), 1.0, M=2).value == pytest.approx(4.0, rel=1e-12)


def test_ksv_noiseless_rank_m(rng):
    Y = cn(rng, (5, 2)) @ cn(rng, (2, 12))
    assert det.ksv(Y, 1.0, M=2).value < 1e-20


def test_ksv_m1_is_ssv():
    g = np.random.default_rng(11)
    for _ in range(100):
        Y = cn(g, (5, 9))
        assert det.ksv(Y, 2.0, M=1).value == det.ssv(Y, 2.0).value


@given(matrices, scales)
def test_ssv_ksv_scale_equivariance(Y, c):
    assert det.ssv(c * Y, 1.5).value == pytest.approx(c**2 * det.ssv(Y, 1.5).value, rel=1e-10)
    assert det.ksv(c * Y, 1.5, 2).value == pytest.approx(c**2 * det.ksv(Y, 1.5, 2).value, rel=1e-10)


def test_ssv_whitening_compatibility(rng):
    Y = cn(rng, (6, 15))
    a = det.ssv(whiten(Y, NoiseCovariance.white(2.5)), 1.0).value
    assert a == pytest.approx(det.ssv(Y, 2.5).value, rel=1e-12)


def test_dimension_checks(rng):
    with pytest.raises(InsufficientDimension):
        det.ssv(cn(rng, (1, 5)), 1.0)
    with pytest.raises(InsufficientDimension):
        det.ksv(cn(rng, (2, 5)), 1.0, M=2)
    with pytest.raises(InsufficientDimension):
        det.rsv(cn(rng, (2, 5)))
    with pytest.raises(InsufficientDimension):
        det.grsv(cn(rng, (3, 5)), M=2)
    with pytest.raises(InvalidArgument):
        DetectorSpec(Kind.SSV, sigma2_w=0.0)


# --- RSV / GRSV ----------------------------------------------------------------


@given(matrices, scales)
def test_rsv_grsv_scale_invariance(Y, c):
    assert det.rsv(c * Y).value == pytest.approx(det.rsv(Y).value, rel=1e-12)
    assert det.grsv(c * Y, 2).value == pytest.approx(det.grsv(Y, 2).value, rel=1e-12)


def test_rsv_orthogonal_value():
    assert det.rsv(orthogonal_sources(3, 8, (5, 3, 2))).value == pytest.approx(9 / 4, rel=1e-12)


def test_grsv_orthogonal_value():
    assert det.grsv(orthogonal_sources(4, 8, (5, 3, 2, 1)), 2).value == pytest.approx(4.0, rel=1e-12)


def test_rsv_degenerate(rng):
    Y = cn(rng, (4, 2)) @ cn(rng, (2, 10))
    with pytest.raises(DegenerateInput):
        det.rsv(Y * 1e-160)


def test_grsv_m1_is_rsv():
    g = np.random.default_rng(12)
    for _ in range(100):
        Y = cn(g, (5, 9))
        assert det.grsv(Y, 1).value == det.rsv(Y).value


@given(matrices, st.integers(1, 2))
def test_grsv_ratio_form(Y, M):
    lam2 = det.singular_values(Y) ** 2
    ratio = lam2[M:].sum() / lam2[M + 1:].sum() - 1.0
    assert det.grsv(Y, M).value == pytest.approx(ratio, rel=1e-12)


def test_rsv_noise_mean_matches_reference():
    # reference: eigenvalues of an independently drawn complex Wishart via eigvalsh
    sc = Scenario(K=8, N=20, M=0)
    Y = generate(sc, Hypothesis.H0, 20_000, rng_mod.stream(1, "rsv"))
    ours = det.evaluate_batch(DetectorSpec(Kind.RSV), Y).mean()
    g = np.random.default_rng(2)
    W = cn(g, (20_000, 8, 20))
    ev = np.sort(np.linalg.eigvalsh(W @ np.swapaxes(W.conj(), 1, 2)), axis=1)[:, ::-1]
    ref = (ev[:, 1] / ev[:, 2:].sum(axis=1)).mean()
    assert ours == pytest.approx(ref, rel=0.01)


# --- energy / LMP ----------------------------------------------------------


def test_energy_unit_modulus():
    Y = np.exp(1j * np.arange(6).reshape(2, 3))
    assert det.energy(Y).value == pytest.approx(6.0, rel=1e-15)


def test_energy_expectation_fixed_channel():
    K, N = 8, 20
    sc = Scenario(K=K, N=N, M=1, gamma_s=0.0)
    h = np.exp(1j * np.linspace(0, 3, K))  # |h|^2 = K
    Y = generate(sc, Hypothesis.H0, 20_000, rng_mod.stream(7, "ed"), tn_channels=h[:, None])
    e = det.evaluate_batch(DetectorSpec(Kind.ED), Y).mean()
    assert e == pytest.approx(N * (K * sc.P_s + K * sc.sigma2_w), rel=0.01)


def test_lmp_values():
    K, N = 3, 5
    assert det.lmp(np.zeros((K, N)), 2.0).value == pytest.approx(-math.sqrt(N * K))
    Y = np.full((K, N), math.sqrt(2.0))  # energy = N K sigma2_H0
    assert det.lmp(Y, 2.0).value == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidArgument):
        det.lmp(Y, 0.0)


def test_lmp_ed_decision_agreement():
    sc = Scenario(K=6, N=15, M=1, gamma_s=3.0)
    Y = generate(sc, Hypothesis.H0, 10_000, rng_mod.stream(8, "lmp"))
    e = det.evaluate_batch(DetectorSpec(Kind.ED), Y)
    l = det.evaluate_batch(DetectorSpec(Kind.LMP, sigma2_H0=sc.sigma2_H0), Y)
    eta_e = np.quantile(e, 0.9)
    eta_l = det.lmp_from_energy(eta_e, sc.sigma2_H0, 6, 15)
    assert np.array_equal(e > eta_e, l > eta_l)
    # identical ordering: rank correlation exactly one
    assert np.array_equal(np.argsort(e, kind="stable"), np.argsort(l, kind="stable"))


# --- AIC / MDL ---------------------------------------------------------------


def _orders(Y):
    lam2 = det.singular_values_batch(Y) ** 2
    return det.order_from_sv2(lam2, Y.shape[-1])


def _textbook_orders(Y):
    """Independent source enumeration from the eigenvalues of the sample covariance."""
    K, N = Y.shape
    l = np.sort(np.linalg.eigvalsh(Y @ Y.conj().T / N))[::-1]
    aic, mdl = [], []
    for k in range(K):
        tail = l[k:]
        g = math.exp(np.mean(np.log(tail)))
        ll = N * (K - k) * math.log(g / np.mean(tail))  # log-likelihood, <= 0
        aic.append(-2 * ll + 2 * k * (2 * K - k))
        mdl.append(-ll + 0.5 * k * (2 * K - k) * math.log(N))
    return int(np.argmin(aic)), int(np.argmin(mdl))


def test_aic_mdl_pure_noise():
    W = cn(np.random.default_rng(9), (1000, 8, 200))
    a, m = _orders(W)
    ref = np.array([_textbook_orders(w) for w in W])
    assert np.array_equal(a, ref[:, 0]) and np.array_equal(m, ref[:, 1])
    assert np.mean(m == 0) >= 0.95
    # AIC keeps its known small over-estimation rate on pure noise (about 6% here)
    assert np.mean(a == 0) >= 0.90


def test_aic_mdl_one_strong_source():
    sc = Scenario(K=8, N=200, M=1, gamma_s=20.0)
    Y = generate(sc, Hypothesis.H0, 1000, rng_mod.stream(10, "aic"))
    a, m = _orders(Y)
    assert np.mean(m == 1) >= 0.95
    assert np.mean(a == 1) >= 0.90 and np.all(a >= 1)


def test_aic_mdl_rank_two(rng):
    Y = cn(rng, (6, 2)) @ cn(rng, (2, 50)) + 1e-6 * cn(rng, (6, 50))
    assert det.aic_mdl_order(Y) == (2, 2)


def test_aic_mdl_range_and_fixed_rule(rng):
    a, m = det.aic_mdl_order(cn(rng, (5, 12)))
    assert 0 <= a <= 4 and 0 <= m <= 4
    spec = DetectorSpec(Kind.AIC, M=2)
    assert not spec.has_threshold and spec.fixed_threshold == 2.0
    with pytest.raises(InsufficientDimension):
        det.aic_mdl_order(cn(rng, (4, 4)))


# --- MLE noise variance --------------------------------------------------------


def _rank_fit_residual(Y, r, iters=500, seed=0):
    """min ||Y - A B||_F^2 over rank-r factors by alternating least squares (no SVD)."""
    if r == 0:
        return float(np.sum(np.abs(Y) ** 2))
    g = np.random.default_rng(seed)
    A = cn(g, (Y.shape[0], r))
    for _ in range(iters):
        B = np.linalg.lstsq(A, Y, rcond=None)[0]
        A = np.linalg.lstsq(B.T, Y.T, rcond=None)[0].T
    return float(np.sum(np.abs(Y - A @ B) ** 2))


def _neg_llf(log_s2, Y, r):
    K, N = Y.shape
    s2 = math.exp(log_s2)
    return K * N * math.log(math.pi * s2) + _rank_fit_residual(Y, r) / s2


@pytest.mark.parametrize("M,i", [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)])
def test_noise_mle_vs_brute_force_llf(M, i):
    g = np.random.default_rng(100 + 3 * M + i)
    Y = cn(g, (3, 1)) @ cn(g, (1, 3)) * 2 + cn(g, (3, 3))
    resid = _rank_fit_residual(Y, M + i)
    res = optimize.minimize_scalar(lambda t: 9 * math.log(math.pi * math.exp(t)) + resid / math.exp(t),
                                   bounds=(-20, 10), method="bounded", options={"xatol": 1e-10})
    assert det.noise_variance_mle(Y, M, i) == pytest.approx(math.exp(res.x), rel=1e-6)
    # the grid search over sigma2 agrees with the closed form at the grid resolution
    grid = np.linspace(-24, 4, 5601)
    best = grid[np.argmin([9 * math.log(math.pi * math.exp(t)) + resid / math.exp(t) for t in grid])]
    assert math.log(det.noise_variance_mle(Y, M, i)) == pytest.approx(best, abs=2.5e-3)


def test_noise_mle_mean_on_pure_noise():
    K, N, M = 6, 30, 1
    W = cn(np.random.default_rng(13), (20_000, K, N))
    lam2 = det.singular_values_batch(W) ** 2
    mle = lam2[:, M:].sum(axis=1) / (N * K)
    # brute-force reference: residual of the best rank-M fit from eigvalsh, divided by NK
    ev = np.sort(np.linalg.eigvalsh(W @ np.swapaxes(W.conj(), 1, 2)), axis=1)[:, ::-1]
    ref = ev[:, M:].sum(axis=1) / (N * K)
    assert mle.mean() == pytest.approx(ref.mean(), rel=0.01)
    assert det.noise_variance_mle(W[0], M) == pytest.approx(mle[0], rel=1e-12)


# --- decisions ---------------------------------------------------------------


def test_decide_strict():
    assert det.decide(1.0, 1.0) is Hypothesis.H0
    assert det.decide(1.0 + 1e-12, 1.0) is Hypothesis.H1
    assert det.decide(-1e300, -math.inf) is Hypothesis.H1
    with pytest.raises(InvalidArgument):
        det.decide(1.0, math.nan)


def test_evaluate_batch_matches_single(rng):
    Y = cn(rng, (10, 5, 12))
    for spec, f in [(DetectorSpec(Kind.SSV, sigma2_w=2.0), lambda y: det.ssv(y, 2.0)),
                    (DetectorSpec(Kind.GRSV, M=2), lambda y: det.grsv(y, 2)),
                    (DetectorSpec(Kind.ED), det.energy)]:
        batch = det.evaluate_batch(spec, Y)
        assert np.allclose(batch, [f(y).value for y in Y], rtol=1e-12)


def test_side_information_required(rng):
    with pytest.raises(IncompatibleDetector):
        det.evaluate_batch(DetectorSpec(Kind.SSV), cn(rng, (2, 4, 8)))
    with pytest.raises(IncompatibleDetector):
        det.evaluate_batch(DetectorSpec(Kind.LMP), cn(rng, (2, 4, 8)))
    with pytest.raises(IncompatibleDetector):
        det.evaluate_batch(DetectorSpec(Kind.NULL), cn(rng, (2, 4, 8)))


def test_null_detector_ignores_data(rng):
    Y = cn(rng, (100, 4, 8))
    a = det.evaluate_batch(DetectorSpec(Kind.NULL), Y, rng=np.random.default_rng(1))
    b = det.evaluate_batch(DetectorSpec(Kind.NULL), 10 * Y, rng=np.random.default_rng(1))
    assert np.array_equal(a, b) and np.all((a >= 0) & (a < 1))
