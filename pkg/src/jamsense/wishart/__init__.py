"""Analytic false-alarm probability from the ordered-eigenvalue density of a
correlated central complex Wishart matrix ``Y Y^H``.

The joint density of ``lambda_1 > ... > lambda_K`` (eigenvalues of ``Y Y^H``)
when the columns of ``Y`` are ``CN(0, R_Y)`` with eigenvalues ``zeta``::

    f(lambda) = c0 |E(lambda, zeta)| |V(lambda)| prod_k lambda_k^(N-K)
    E[i, j] = exp(-lambda_j / zeta_i),   V[i, j] = lambda_j^(i-1)

``c0`` is found numerically. Everything in this module works in the
eigenvalue domain of ``Y Y^H``; an SSV/KSV statistic ``lambda^2(Y)/sigma2_w``
maps to the eigenvalue threshold ``eta * sigma2_w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from ..errors import InvalidArgument, NumericalFailure, UnsupportedDimension
from ..signal_model import build_ry
from ._backend import BACKEND, COMPILED, kernels

__all__ = [
    "BACKEND", "COMPILED", "WishartSpec", "PdfContext", "build_context", "joint_eig_pdf",
    "normalization_constant", "order_statistic_cdf", "pfa_ssv_analytic", "pfa_ksv_analytic",
    "prob_max_exceeds", "analytic_threshold", "spec_from_channels", "eigen_threshold",
    "statistic_threshold",
]

MAX_INTEGRATION_K = 3
TAIL_MASS_TOL = 1e-8
MAX_DOUBLINGS = 12


@dataclass(frozen=True)
class WishartSpec:
    K: int
    N: int
    zeta: tuple[float, ...]

    def __post_init__(self):
        z = tuple(float(x) for x in np.asarray(self.zeta, dtype=float).reshape(-1))
        object.__setattr__(self, "zeta", z)
        if len(z) != self.K:
            raise InvalidArgument("zeta must have K entries")
        if not self.N > self.K:
            raise InvalidArgument("need N > K")
        if any(x <= 0 for x in z):
            raise InvalidArgument("zeta entries must be positive")
        if any(z[i] <= z[i + 1] for i in range(self.K - 1)):
            raise InvalidArgument("zeta must be strictly decreasing")

    @property
    def inv_zeta(self) -> np.ndarray:
        return 1.0 / np.asarray(self.zeta)


def spec_from_channels(channels: Sequence[np.ndarray], Ps: float, sigma2_w: float, N: int,
                       epsilon: float | None = None, K: int | None = None) -> WishartSpec:
    """WishartSpec for fixed TN channels, via :func:`build_ry`."""
    _, zeta = build_ry(channels, Ps, sigma2_w, epsilon, K=K)
    return WishartSpec(len(zeta), N, tuple(zeta))


def _region(K: int, index: int):
    """Nesting for ``{lambda_index <= eta}`` on the ordered cone (0-based index).

    The threshold variable is outermost; larger eigenvalues are integrated from
    their lower neighbour to ``lam_max``, smaller ones from 0 to their upper
    neighbour.
    """
    var, lo, hi = [index], [-1], [-1]
    for i in range(index - 1, -1, -1):
        var.append(i)
        lo.append(i + 1)
        hi.append(-1)
    for i in range(index + 1, K):
        var.append(i)
        lo.append(-1)
        hi.append(i - 1)
    as_int = lambda xs: np.asarray(xs, dtype=np.intc)
    return as_int(var), as_int(lo), as_int(hi)


def _typical_point(spec: WishartSpec) -> np.ndarray:
    N = spec.N
    z = np.asarray(spec.zeta)
    return N * z + (spec.K - 1 - np.arange(spec.K)) * math.sqrt(N) * z


@dataclass(frozen=True)
class PdfContext:
    """Normalised density for one :class:`WishartSpec`; immutable and shareable."""

    spec: WishartSpec
    c0: float
    log_c0: float
    lam_max: float
    abs_tol: float
    rel_tol: float
    shift: float = field(repr=False)
    total: float = field(repr=False)

    def _integrate(self, index: int, a: float, b: float) -> float:
        var, lo, hi = _region(self.spec.K, index)
        value, _, failed = kernels.nested_integral(
            self.spec.inv_zeta, self.spec.N, self.shift, var, lo, hi, float(a), float(b),
            self.lam_max, self.abs_tol * self.total, self.rel_tol)
        if failed:
            raise NumericalFailure(f"quadrature did not converge on {failed} sub-integral(s)")
        return value


def _raw_total(spec, shift, lam_max, abs_tol, rel_tol, abs_scale):
    var, lo, hi = _region(spec.K, spec.K - 1)
    value, _, failed = kernels.nested_integral(spec.inv_zeta, spec.N, shift, var, lo, hi, 0.0,
                                               lam_max, lam_max, abs_tol * abs_scale, rel_tol)
    if failed:
        raise NumericalFailure("normalisation quadrature did not converge")
    return value


def build_context(spec: WishartSpec, abs_tol: float = 1e-8, rel_tol: float = 1e-6) -> PdfContext:
    """Find Lambda_max by tail doubling, then the normalising constant."""
    if spec.K > MAX_INTEGRATION_K:
        raise UnsupportedDimension(f"integration implemented for K <= {MAX_INTEGRATION_K}")
    shift = float(kernels.log_density(_typical_point(spec), spec.inv_zeta, spec.N))
    lam_max = spec.N * spec.zeta[0] * (1.0 + 10.0 / math.sqrt(spec.N))
    total = _raw_total(spec, shift, lam_max, abs_tol, rel_tol, 0.0)
    for _ in range(MAX_DOUBLINGS):
        bigger = _raw_total(spec, shift, 2 * lam_max, abs_tol, rel_tol, total)
        converged = abs(bigger - total) <= TAIL_MASS_TOL * abs(bigger)
        lam_max, total = 2 * lam_max, bigger
        if converged:
            break
    else:
        raise NumericalFailure("tail mass did not settle while doubling Lambda_max")
    if not total > 0 or not math.isfinite(total):
        raise NumericalFailure("normalisation integral is not positive and finite")
    log_c0 = -shift - math.log(total)
    return PdfContext(spec, math.exp(log_c0), log_c0, lam_max, abs_tol, rel_tol, shift, total)


def _ctx(obj, **kw) -> PdfContext:
    return obj if isinstance(obj, PdfContext) else build_context(obj, **kw)


def normalization_constant(spec: WishartSpec, tol: float = 1e-6) -> float:
    return build_context(spec, rel_tol=tol).c0


def joint_eig_pdf(lambdas, ctx: PdfContext | WishartSpec) -> float:
    """Normalised joint density at an ordered eigenvalue vector."""
    lam = np.asarray(lambdas, dtype=float).reshape(-1)
    spec = ctx.spec if isinstance(ctx, PdfContext) else ctx
    if lam.size != spec.K:
        raise InvalidArgument("wrong number of eigenvalues")
    if np.any(lam < 0) or np.any(np.diff(lam) >= 0):
        raise InvalidArgument("eigenvalues must be non-negative and strictly decreasing")
    ctx = _ctx(ctx)
    ld = kernels.log_density(lam, spec.inv_zeta, spec.N)
    if ld == -math.inf:
        return 0.0
    return math.exp(ld + ctx.log_c0)


def order_statistic_cdf(eta, ctx: PdfContext | WishartSpec, index: int) -> np.ndarray | float:
    """``Pr{lambda_index <= eta}`` (0-based index) for scalar or array ``eta``.

    A grid of thresholds is handled by integrating the outer variable segment
    by segment and accumulating, so the cost is that of one full integral.
    """
    ctx = _ctx(ctx)
    if not 0 <= index < ctx.spec.K:
        raise InvalidArgument("eigenvalue index out of range")
    etas = np.asarray(eta, dtype=float)
    flat = etas.reshape(-1)
    if np.any(flat < 0) or np.any(np.isnan(flat)):
        raise InvalidArgument("eta must be non-negative")
    order = np.argsort(flat)
    out = np.empty_like(flat)
    acc, prev = 0.0, 0.0
    for k in order:
        b = min(flat[k], ctx.lam_max)
        if b > prev:
            acc += ctx._integrate(index, prev, b)
            prev = b
        out[k] = acc / ctx.total
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if etas.ndim == 0 else out.reshape(etas.shape)


def _check_k3(ctx):
    if ctx.spec.K != 3:
        raise UnsupportedDimension("analytic SSV/KSV false-alarm probability is derived for K = 3")


def pfa_ssv_analytic(eta, spec: PdfContext | WishartSpec):
    """``Pr{lambda_2(Y Y^H) > eta}`` for K = 3 under H0 (one TN)."""
    ctx = _ctx(spec)
    _check_k3(ctx)
    return 1.0 - order_statistic_cdf(eta, ctx, 1)


def pfa_ksv_analytic(eta, spec: PdfContext | WishartSpec):
    """``Pr{lambda_3(Y Y^H) > eta}`` for K = 3 under H0 (two TNs)."""
    ctx = _ctx(spec)
    _check_k3(ctx)
    return 1.0 - order_statistic_cdf(eta, ctx, 2)


def prob_max_exceeds(t, spec: PdfContext | WishartSpec):
    ctx = _ctx(spec)
    return 1.0 - order_statistic_cdf(t, ctx, 0)


def analytic_threshold(pfa_target: float, spec: PdfContext | WishartSpec, which: str = "SSV",
                       grid_points: int = 48) -> float:
    """Eigenvalue-domain threshold with ``pfa(eta) = pfa_target`` (to 1e-4).

    The Pfa curve is integrated on a coarse grid to bracket the root; Brent's
    method then refines inside the bracket, integrating only the segment from
    the bracket's left end.
    """
    if not 0.0 < pfa_target < 1.0:
        raise InvalidArgument("pfa_target must lie in (0, 1)")
    ctx = _ctx(spec)
    _check_k3(ctx)
    which = str(which).upper()
    index = {"SSV": 1, "KSV": 2}.get(which)
    if index is None:
        raise InvalidArgument(f"unknown analytic detector {which!r}")
    grid = np.linspace(0.0, ctx.lam_max, grid_points + 1)
    cdf = order_statistic_cdf(grid, ctx, index)
    target_cdf = 1.0 - pfa_target
    hit = np.nonzero(cdf >= target_cdf)[0]
    if hit.size == 0:
        raise NumericalFailure("threshold lies beyond Lambda_max")
    j = int(hit[0])
    if j == 0:
        return 0.0
    a, b = grid[j - 1], grid[j]
    base = cdf[j - 1]

    def g(x):
        return base + ctx._integrate(index, a, x) / ctx.total - target_cdf

    try:
        return float(optimize.brentq(g, a, b, xtol=1e-10 * max(1.0, ctx.lam_max), rtol=1e-12))
    except ValueError as exc:
        raise NumericalFailure("threshold bracket failed") from exc


def eigen_threshold(eta_statistic: float, sigma2_w: float) -> float:
    """SSV/KSV statistic threshold -> eigenvalue-domain threshold."""
    return eta_statistic * sigma2_w


def statistic_threshold(eta_eigen: float, sigma2_w: float) -> float:
    return eta_eigen / sigma2_w
