"""Singular-value jamming detectors and information-criterion baselines.

Every statistic is a function of the squared singular values
``lam2 = lambda_k(Y)**2`` (descending). The ``*_from_sv2`` functions operate on
arrays of shape ``(..., K)`` so Monte-Carlo code can evaluate whole blocks of
trials at once; the single-matrix functions wrap them and return a
:class:`Statistic`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInput,
    IncompatibleDetector,
    InsufficientDimension,
    InvalidArgument,
    NumericalFailure,
)
from .signal_model import Hypothesis, ReceivedMatrix

RSV_DENOM_FLOOR = 1e-300


class Kind(str, enum.Enum):
    SSV = "SSV"
    KSV = "KSV"
    RSV = "RSV"
    GRSV = "GRSV"
    ED = "ED"
    LMP = "LMP"
    AIC = "AIC"
    MDL = "MDL"
    #: no-information reference: uniform draws independent of Y (needs an rng)
    NULL = "NULL"


#: detectors whose decision rule has no tunable threshold
ORDER_ESTIMATORS = (Kind.AIC, Kind.MDL)


@dataclass(frozen=True)
class DetectorSpec:
    kind: Kind
    M: int = 1
    sigma2_w: float | None = None
    sigma2_H0: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.M < 0:
            raise InvalidArgument("M must be non-negative")
        if self.kind in (Kind.SSV, Kind.KSV) and self.sigma2_w is not None and not self.sigma2_w > 0:
            raise InvalidArgument("sigma2_w must be positive")
        if self.kind is Kind.LMP and self.sigma2_H0 is not None and not self.sigma2_H0 > 0:
            raise InvalidArgument("sigma2_H0 must be positive")

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def has_threshold(self) -> bool:
        return self.kind not in ORDER_ESTIMATORS

    @property
    def fixed_threshold(self) -> float:
        """Decision threshold of the AIC/MDL order estimators: jamming iff estimate > M."""
        return float(self.M)

    def check_dimensions(self, K: int, N: int | None = None) -> None:
        k = self.kind
        if k is Kind.SSV and K < 2:
            raise InsufficientDimension("SSV needs K >= 2")
        if k is Kind.KSV and K <= self.M:
            raise InsufficientDimension("KSV needs K > M")
        if k is Kind.RSV and K < 3:
            raise InsufficientDimension("RSV needs K >= 3")
        if k is Kind.GRSV and K <= self.M + 1:
            raise InsufficientDimension("GRSV needs K > M + 1")
        if k in ORDER_ESTIMATORS and (K < 2 or (N is not None and N <= K)):
            raise InsufficientDimension("AIC/MDL need K >= 2 and N > K")


@dataclass(frozen=True)
class Statistic:
    value: float
    detector: DetectorSpec
    singular_values: np.ndarray = field(repr=False, compare=False)


def _data(Y) -> np.ndarray:
    return Y.data if isinstance(Y, ReceivedMatrix) else np.asarray(Y)


def singular_values_batch(Y: np.ndarray) -> np.ndarray:
    """Descending singular values of each ``K x N`` matrix in ``Y`` (..., K, N)."""
    try:
        return np.linalg.svd(Y, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("SVD did not converge") from exc


def singular_values(Y) -> np.ndarray:
    """Ordered singular values ``lambda_1 >= ... >= lambda_K >= 0``."""
    A = _data(Y)
    if A.ndim != 2 or A.size == 0:
        raise InvalidArgument("Y must be a non-empty 2-D matrix")
    if A.shape[0] > A.shape[1]:
        raise InvalidArgument("expected K <= N")
    return singular_values_batch(A)


# --- vectorised statistics on squared singular values -------------------

def ksv_from_sv2(lam2: np.ndarray, sigma2_w: float, M: int) -> np.ndarray:
    return lam2[..., M] / sigma2_w


def grsv_from_sv2(lam2: np.ndarray, M: int) -> np.ndarray:
    den = lam2[..., M + 1:].sum(axis=-1)
    if np.any(den < RSV_DENOM_FLOOR):
        raise DegenerateInput("residual energy vanishes; input rank <= M + 1")
    return lam2[..., M] / den


def energy_from_sv2(lam2: np.ndarray) -> np.ndarray:
    return lam2.sum(axis=-1)


def lmp_from_energy(energy: np.ndarray, sigma2_H0: float, K: int, N: int) -> np.ndarray:
    r = math.sqrt(N * K)
    return -r + energy / (sigma2_H0 * r)


def information_criteria(lam2: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """AIC and MDL criteria for every candidate order ``k = 0..K-1``.

    Uses the eigenvalues ``l = lam2 / N`` of the sample covariance and the
    complex-data free-parameter count ``k (2K - k)``::

        LL(k)  = N (K-k) log( arithmetic mean / geometric mean of l_{k+1..K} )
        AIC(k) = 2 LL(k) + 2 k (2K - k)
        MDL(k) = LL(k) + 0.5 k (2K - k) log N

    Returns arrays of shape ``(..., K)``.
    """
    lam2 = np.asarray(lam2, dtype=float)
    K = lam2.shape[-1]
    l = np.maximum(lam2 / N, np.finfo(float).tiny)
    logl = np.log(l)
    ll = np.empty(lam2.shape)
    for k in range(K):
        d = K - k
        arith = l[..., k:].mean(axis=-1)
        log_geo = logl[..., k:].mean(axis=-1)
        ll[..., k] = N * d * (np.log(arith) - log_geo)
    k = np.arange(K)
    free = k * (2 * K - k)
    aic = 2.0 * ll + 2.0 * free
    mdl = ll + 0.5 * free * math.log(N)
    return aic, mdl


def order_from_sv2(lam2: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    aic, mdl = information_criteria(lam2, N)
    return np.argmin(aic, axis=-1), np.argmin(mdl, axis=-1)


def evaluate_sv2(spec: DetectorSpec, lam2: np.ndarray, N: int,
                 rng: np.random.Generator | None = None) -> np.ndarray:
    """Statistic of ``spec`` for each row of ``lam2`` (..., K)."""
    K = lam2.shape[-1]
    spec.check_dimensions(K, N)
    k = spec.kind
    if k is Kind.NULL:
        if rng is None:
            raise IncompatibleDetector("the NULL detector needs a random generator")
        return rng.random(lam2.shape[:-1])
    if k in (Kind.SSV, Kind.KSV):
        if spec.sigma2_w is None:
            raise IncompatibleDetector(f"{k.value} needs the noise variance")
        return ksv_from_sv2(lam2, spec.sigma2_w, 1 if k is Kind.SSV else spec.M)
    if k is Kind.RSV:
        return grsv_from_sv2(lam2, 1)
    if k is Kind.GRSV:
        return grsv_from_sv2(lam2, spec.M)
    if k is Kind.ED:
        return energy_from_sv2(lam2)
    if k is Kind.LMP:
        if spec.sigma2_H0 is None:
            raise IncompatibleDetector("LMP needs sigma2_H0")
        return lmp_from_energy(energy_from_sv2(lam2), spec.sigma2_H0, K, N)
    aic, mdl = order_from_sv2(lam2, N)
    return (aic if k is Kind.AIC else mdl).astype(float)


def evaluate_batch(spec: DetectorSpec, Y: np.ndarray, rng=None) -> np.ndarray:
    """Statistic for every matrix in a ``(T, K, N)`` stack."""
    return evaluate_sv2(spec, singular_values_batch(Y) ** 2, Y.shape[-1], rng=rng)


# --- single-matrix API --------------------------------------------------

def _stat(spec: DetectorSpec, Y) -> Statistic:
    A = _data(Y)
    sv = singular_values(A)
    value = evaluate_sv2(spec, sv**2, A.shape[1])
    return Statistic(float(value), spec, sv)


def ssv(Y, sigma2_w: float) -> Statistic:
    """Squared second-largest singular value over the noise variance."""
    return _stat(DetectorSpec(Kind.SSV, M=1, sigma2_w=sigma2_w), Y)


def ksv(Y, sigma2_w: float, M: int) -> Statistic:
    """Squared ``(M+1)``-th singular value over the noise variance."""
    return _stat(DetectorSpec(Kind.KSV, M=M, sigma2_w=sigma2_w), Y)


def rsv(Y) -> Statistic:
    return _stat(DetectorSpec(Kind.RSV, M=1), Y)


def grsv(Y, M: int) -> Statistic:
    """``lambda_{M+1}^2 / sum_{k > M+1} lambda_k^2``; free of the noise variance."""
    return _stat(DetectorSpec(Kind.GRSV, M=M), Y)


def energy(Y) -> Statistic:
    A = _data(Y)
    value = float(np.sum(np.abs(A) ** 2))
    return Statistic(value, DetectorSpec(Kind.ED), singular_values(A))


def lmp(Y, sigma2_H0: float) -> Statistic:
    """Locally most powerful test for a variance increase; affine in the energy."""
    if not sigma2_H0 > 0:
        raise InvalidArgument("sigma2_H0 must be positive")
    A = _data(Y)
    K, N = A.shape
    e = float(np.sum(np.abs(A) ** 2))
    value = float(lmp_from_energy(e, sigma2_H0, K, N))
    return Statistic(value, DetectorSpec(Kind.LMP, sigma2_H0=sigma2_H0), singular_values(A))


def aic_mdl_order(Y) -> tuple[int, int]:
    """Source-count estimates ``(aic, mdl)`` from the eigenvalues of ``Y Y^H / N``."""
    A = _data(Y)
    K, N = A.shape
    if K < 2 or N <= K:
        raise InsufficientDimension("AIC/MDL need K >= 2 and N > K")
    a, m = order_from_sv2(singular_values(A) ** 2, N)
    return int(a), int(m)


def noise_variance_mle(Y, M: int, i: int = 0) -> float:
    """Rank-constrained MLE of the noise variance under hypothesis ``H_i``."""
    A = _data(Y)
    K, N = A.shape
    lam2 = singular_values(A) ** 2
    return float(lam2[M + i:].sum() / (N * K))


def compute(spec: DetectorSpec, Y) -> Statistic:
    return _stat(spec, Y)


def decide(stat: Statistic | float, eta: float) -> Hypothesis:
    """H1 iff the statistic strictly exceeds ``eta``; ties resolve to H0."""
    value = stat.value if isinstance(stat, Statistic) else float(stat)
    if math.isnan(eta) or eta == math.inf:
        raise InvalidArgument("eta must be finite or -inf")
    return Hypothesis.H1 if value > eta else Hypothesis.H0
