"""Synthetic received-signal generation for the fusion-center model.

``Y = sum_m h_{s,m} s_m^T + sum_l h_{j,l} j_l^T + W`` with ``K`` sensing nodes
(rows) and ``N`` samples per window (columns). Transmitter and jammer symbols
are QPSK; channels and noise are circularly symmetric complex Gaussian.

All SNR values are in dB relative to the nominal noise variance, i.e.
``P = 10**(gamma/10) * sigma2_w``.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng as rng_mod
from .errors import (
    DegenerateCovariance,
    DegenerateInput,
    InvalidArgument,
    NotPositiveDefinite,
)

HERMITIAN_TOL = 1e-12


class Hypothesis(str, enum.Enum):
    H0 = "H0"
    H1 = "H1"
    H2 = "H2"

    @property
    def n_jammers(self) -> int:
        return int(self.value[1])


def db_to_power(gamma_db: float, sigma2_w: float = 1.0) -> float:
    return 10.0 ** (gamma_db / 10.0) * sigma2_w


@dataclass(frozen=True)
class JammerSpec:
    gamma_j: float
    channel_corr: float = 0.0
    symbol_corr: float = 0.0

    def __post_init__(self):
        for name in ("channel_corr", "symbol_corr"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidArgument(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class NoiseCovariance:
    """Either white noise with ``variance`` or a full ``matrix`` (K x K)."""

    variance: float | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if (self.variance is None) == (self.matrix is None):
            raise InvalidArgument("give exactly one of variance or matrix")
        if self.variance is not None and not self.variance > 0:
            raise InvalidArgument("noise variance must be positive")
        if self.matrix is not None:
            R = np.asarray(self.matrix, dtype=complex)
            if R.ndim != 2 or R.shape[0] != R.shape[1]:
                raise InvalidArgument("noise covariance must be square")
            if np.max(np.abs(R - R.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(R))):
                raise InvalidArgument("noise covariance is not Hermitian")
            try:
                np.linalg.cholesky(R)
            except np.linalg.LinAlgError as exc:
                raise NotPositiveDefinite("noise covariance is not positive definite") from exc
            object.__setattr__(self, "matrix", R)

    @classmethod
    def white(cls, variance: float) -> "NoiseCovariance":
        return cls(variance=float(variance))

    @classmethod
    def general(cls, matrix) -> "NoiseCovariance":
        return cls(matrix=np.asarray(matrix))

    @property
    def is_white(self) -> bool:
        return self.variance is not None

    def as_matrix(self, K: int) -> np.ndarray:
        if self.is_white:
            return self.variance * np.eye(K, dtype=complex)
        return self.matrix

    def sqrt_factor(self, K: int) -> np.ndarray:
        """Lower Cholesky factor ``C`` with ``C C^H = R_w``."""
        if self.is_white:
            return np.sqrt(self.variance) * np.eye(K, dtype=complex)
        return np.linalg.cholesky(self.matrix)


@dataclass(frozen=True)
class Scenario:
    K: int
    N: int
    M: int = 1
    jammers: tuple[JammerSpec, ...] = ()
    gamma_s: float = 5.0
    sigma2_w: float = 1.0
    sigma2_hs: float = 1.0
    sigma2_hj: float = 1.0
    noise_cov: NoiseCovariance | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "jammers", tuple(self.jammers))
        if not (self.N > self.K > self.M >= 0):
            raise InvalidArgument(f"need N > K > M >= 0, got N={self.N}, K={self.K}, M={self.M}")
        for name in ("sigma2_w", "sigma2_hs", "sigma2_hj"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.jammers and (self.jammers[0].channel_corr or self.jammers[0].symbol_corr):
            raise InvalidArgument("the first jammer is the correlation reference; its correlations must be 0")
        if self.noise_cov is None:
            object.__setattr__(self, "noise_cov", NoiseCovariance.white(self.sigma2_w))
        elif not self.noise_cov.is_white and self.noise_cov.matrix.shape != (self.K, self.K):
            raise InvalidArgument("noise covariance dimension does not match K")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")

    @property
    def P_s(self) -> float:
        return db_to_power(self.gamma_s, self.sigma2_w)

    def P_j(self, index: int = 0) -> float:
        return db_to_power(self.jammers[index].gamma_j, self.sigma2_w)

    @property
    def sigma2_H0(self) -> float:
        """Per-entry variance of ``y[n]`` under H0 for one TN (LMP parameter)."""
        return self.M * self.P_s * self.sigma2_hs + self.sigma2_w

    def replace(self, **changes) -> "Scenario":
        # a default white covariance follows sigma2_w unless one is given explicitly
        if "sigma2_w" in changes and "noise_cov" not in changes and self.noise_cov.is_white \
                and self.noise_cov.variance == self.sigma2_w:
            changes["noise_cov"] = None
        return dataclasses.replace(self, **changes)

    def with_jammer(self, index: int, **changes) -> "Scenario":
        jammers = list(self.jammers)
        jammers[index] = dataclasses.replace(jammers[index], **changes)
        return self.replace(jammers=tuple(jammers))


@dataclass(frozen=True)
class ReceivedMatrix:
    data: np.ndarray
    hypothesis: Hypothesis = Hypothesis.H0

    @property
    def K(self) -> int:
        return self.data.shape[0]

    @property
    def N(self) -> int:
        return self.data.shape[1]


def _as_rng(rng) -> np.random.Generator:
    if rng is None:
        return np.random.default_rng()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _qpsk(rng: np.random.Generator, shape, power: float) -> np.ndarray:
    bits = rng.integers(0, 2, size=(2,) + tuple(shape), dtype=np.int8)
    a = np.sqrt(power / 2.0)
    return (a * (2.0 * bits[0] - 1.0)) + 1j * (a * (2.0 * bits[1] - 1.0))


def _cscg(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    z = rng.standard_normal((2,) + tuple(shape))
    return np.sqrt(variance / 2.0) * (z[0] + 1j * z[1])


def gen_qpsk(n: int, power: float, rng=None) -> np.ndarray:
    """Uniform QPSK symbols ``sqrt(P/2) * (+-1 +- 1j)`` of length ``n``."""
    if n < 1 or not power > 0:
        raise InvalidArgument("gen_qpsk needs n >= 1 and power > 0")
    return _qpsk(_as_rng(rng), (int(n),), power)


def gen_cscg_vector(k: int, variance: float, rng=None) -> np.ndarray:
    """i.i.d. CN(0, variance) entries; real and imaginary parts N(0, variance/2)."""
    if k < 1 or not variance > 0:
        raise InvalidArgument("gen_cscg_vector needs k >= 1 and variance > 0")
    return _cscg(_as_rng(rng), (int(k),), variance)


def gen_correlated_vector(base, alpha: float, rng=None, *, variance: float | None = None,
                          innovation=None) -> np.ndarray:
    """Return ``alpha*base + sqrt(1-alpha^2)*z``.

    ``z`` is a fresh CN(0, variance) draw unless ``innovation`` is supplied
    (used for QPSK symbol streams). When ``variance`` is omitted it is taken
    as the mean power of ``base``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidArgument(f"alpha must lie in [0, 1], got {alpha}")
    base = np.asarray(base, dtype=complex)
    if alpha == 1.0:
        return base.copy()
    if innovation is None:
        v = float(np.mean(np.abs(base) ** 2)) if variance is None else variance
        innovation = _cscg(_as_rng(rng), base.shape, v)
    return alpha * base + np.sqrt(1.0 - alpha**2) * np.asarray(innovation)


def orthogonalize(vectors: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Gram-Schmidt that keeps each output at the 2-norm of its input."""
    out: list[np.ndarray] = []
    basis: list[np.ndarray] = []
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        r = v.copy()
        # two passes of classical Gram-Schmidt keep the result orthogonal to ~1e-15
        for _ in range(2):
            for q in basis:
                r = r - np.vdot(q, r) * q
        nr = np.linalg.norm(r)
        if nr < 1e-12:
            raise DegenerateInput("vectors are linearly dependent")
        q = r / nr
        basis.append(q)
        out.append(q * np.linalg.norm(v))
    return out


def _orthogonalize_columns(A: np.ndarray) -> np.ndarray:
    """Batched norm-preserving Gram-Schmidt on the columns of ``A`` (..., d, p)."""
    Q, R = np.linalg.qr(A)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    if np.any(np.abs(diag) < 1e-12):
        raise DegenerateInput("vectors are linearly dependent")
    phase = diag / np.abs(diag)
    return Q * phase[..., None, :] * np.linalg.norm(A, axis=-2, keepdims=True)


def generate(scenario: Scenario, hypothesis: Hypothesis | str, size: int, rng,
             *, orthogonal_construction: bool = False, fast_fading: bool = False,
             tn_channels: np.ndarray | None = None) -> np.ndarray:
    """Draw ``size`` independent received matrices, shape ``(size, K, N)``.

    Channels are redrawn for each matrix and held fixed within the window
    unless ``fast_fading`` is set. ``tn_channels`` (K x M) pins the TN
    channels to one deterministic realisation, as the analytic Pfa assumes.
    """
    hypothesis = Hypothesis(hypothesis)
    L = hypothesis.n_jammers
    if L > len(scenario.jammers):
        raise InvalidArgument(f"{hypothesis.value} needs {L} jammer(s), scenario has {len(scenario.jammers)}")
    if orthogonal_construction and fast_fading:
        raise InvalidArgument("orthogonal_construction and fast_fading are exclusive")
    K, N, M = scenario.K, scenario.N, scenario.M
    rng = _as_rng(rng)
    T = int(size)
    cols = N if fast_fading else 1

    if tn_channels is not None:
        tn_channels = np.asarray(tn_channels, dtype=complex).reshape(K, -1)
        if tn_channels.shape[1] != M or fast_fading:
            raise InvalidArgument("tn_channels must be K x M and cannot be combined with fast_fading")
    chans, syms = [], []
    for m in range(M):
        h = _cscg(rng, (T, K, cols), scenario.sigma2_hs)
        if tn_channels is not None:
            h = np.broadcast_to(tn_channels[:, m:m + 1], (T, K, 1))
        chans.append(h)
        syms.append(_qpsk(rng, (T, 1, N), scenario.P_s))
    for l in range(L):
        jam = scenario.jammers[l]
        P = scenario.P_j(l)
        h = _cscg(rng, (T, K, cols), scenario.sigma2_hj)
        s = _qpsk(rng, (T, 1, N), P)
        if l > 0:
            h0, s0 = chans[M], syms[M]
            P0 = scenario.P_j(0)
            h = gen_correlated_vector(h0, jam.channel_corr, innovation=h)
            # correlate with the reference stream at its own power, then rescale
            s = np.sqrt(P / P0) * gen_correlated_vector(s0, jam.symbol_corr,
                                                         innovation=s * np.sqrt(P0 / P))
        chans.append(h)
        syms.append(s)

    if orthogonal_construction and chans:
        if len(chans) > K or len(chans) > N:
            raise InvalidArgument("too many sources for the orthogonal construction")
        Hc = _orthogonalize_columns(np.concatenate(chans, axis=2))
        Sc = _orthogonalize_columns(np.swapaxes(np.concatenate(syms, axis=1), 1, 2))
        chans = [Hc[:, :, i:i + 1] for i in range(len(chans))]
        syms = [np.swapaxes(Sc[:, :, i:i + 1], 1, 2) for i in range(len(syms))]

    W = _cscg(rng, (T, K, N), 1.0)
    nc = scenario.noise_cov
    Y = np.sqrt(nc.variance) * W if nc.is_white else nc.sqrt_factor(K) @ W
    for h, s in zip(chans, syms):
        Y += h * s
    return Y


def assemble_received(scenario: Scenario, hypothesis: Hypothesis | str = Hypothesis.H0, rng=None, *,
                      orthogonal_construction: bool = False, fast_fading: bool = False) -> ReceivedMatrix:
    """One received matrix; ``rng=None`` uses the scenario seed."""
    if rng is None:
        rng = rng_mod.stream(scenario.seed, "assemble")
    Y = generate(scenario, hypothesis, 1, rng, orthogonal_construction=orthogonal_construction,
                 fast_fading=fast_fading)[0]
    return ReceivedMatrix(Y, Hypothesis(hypothesis))


def whitening_matrix(R_w: NoiseCovariance | np.ndarray, K: int | None = None) -> np.ndarray:
    """``L`` with ``L^H L = R_w^{-1}`` (Cholesky factor of the inverse)."""
    if isinstance(R_w, NoiseCovariance):
        if R_w.is_white:
            if K is None:
                raise InvalidArgument("K required for white noise covariance")
            return np.eye(K) / np.sqrt(R_w.variance)
        R = R_w.matrix
    else:
        R = np.asarray(R_w, dtype=complex)
    try:
        C = np.linalg.cholesky(np.linalg.inv(R))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("noise covariance is not positive definite") from exc
    return C.conj().T


def whiten(Y, R_w) -> ReceivedMatrix:
    """Return ``L Y`` so that noise columns become CN(0, I)."""
    rm = Y if isinstance(Y, ReceivedMatrix) else ReceivedMatrix(np.asarray(Y, dtype=complex))
    if not isinstance(R_w, NoiseCovariance):
        R_w = NoiseCovariance.general(R_w)
    if R_w.is_white:
        return ReceivedMatrix(rm.data / np.sqrt(R_w.variance), rm.hypothesis)
    return ReceivedMatrix(whitening_matrix(R_w) @ rm.data, rm.hypothesis)


def _break_ties(values: np.ndarray, epsilon: float) -> np.ndarray:
    z = np.sort(np.asarray(values, dtype=float))[::-1]
    scale = max(1.0, float(np.max(np.abs(z))))
    out = z.copy()
    i = 0
    while i < len(z):
        j = i
        while j + 1 < len(z) and abs(z[j + 1] - z[i]) <= 1e-9 * scale:
            j += 1
        if j > i:
            common = z[i:j + 1].mean()
            # last member of the tie gets +0, the one above it +eps, ...
            out[i:j + 1] = common + epsilon * np.arange(j - i, -1, -1)
        i = j + 1
    return out


def build_ry(channels: Sequence[np.ndarray], Ps: float, sigma2_w: float, epsilon: float | None = None,
             K: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Column covariance ``R_Y = Ps * sum h h^H + sigma2_w I`` and its ordered eigenvalues.

    Tied eigenvalues are separated by an index ladder of ``epsilon`` (default
    ``1e-3 * sigma2_w``) so the result is strictly decreasing.
    """
    if epsilon is None:
        epsilon = 1e-3 * sigma2_w
    if epsilon < 0:
        raise InvalidArgument("epsilon must be non-negative")
    chans = [np.asarray(h, dtype=complex).reshape(-1) for h in channels]
    if not chans and K is None:
        raise InvalidArgument("K required when there are no channels")
    K = len(chans[0]) if chans else K
    R = sigma2_w * np.eye(K, dtype=complex)
    for h in chans:
        R += Ps * np.outer(h, h.conj())
    if chans and np.linalg.matrix_rank(np.stack(chans, axis=1)) < len(chans):
        raise DegenerateCovariance("channel vectors are linearly dependent")
    zeta = _break_ties(np.linalg.eigvalsh(R), epsilon)
    if np.any(np.diff(zeta) >= 0):
        raise DegenerateCovariance(f"eigenvalues not strictly decreasing after perturbation: {zeta}")
    return R, zeta
