"""Monte-Carlo threshold calibration and Pfa / Pd estimation.

Thresholds are the conservative order statistic ``ceil((1 - p)(T + 1))`` of
``T`` H0 statistics. Decisions use a strict ``statistic > eta``.

Trials are drawn in fixed-size blocks with counter-based streams
(:mod:`jamsense.rng`); the same ``seed`` gives the same statistics for any
``threads`` value.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import rng as rng_mod
from .detectors import DetectorSpec, Kind, evaluate_sv2, singular_values_batch
from .errors import IncompatibleDetector, InsufficientTrials, InvalidArgument
from .signal_model import Hypothesis, ReceivedMatrix, Scenario, generate

Z95 = 1.959963984540054
MIN_TRIALS = 100
MIN_EXCEEDANCES = 10


def wilson_halfwidth(p: float, n: int, z: float = Z95) -> float:
    """Half-width of the Wilson score interval for a proportion."""
    if n <= 0:
        return math.nan
    z2 = z * z
    return z / (1 + z2 / n) * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))


@dataclass(frozen=True)
class Estimate:
    value: float
    halfwidth: float
    trials: int

    def __iter__(self):
        yield self.value
        yield self.halfwidth


@dataclass(frozen=True)
class CalibrationResult:
    detector: DetectorSpec
    eta: float
    pfa_target: float
    trials: int
    seed: int
    achieved_pfa_estimate: float

    def to_dict(self) -> dict:
        d = self.detector
        return {
            "detector": {"kind": d.kind.value, "M": d.M, "sigma2_w": d.sigma2_w, "sigma2_H0": d.sigma2_H0},
            "eta": self.eta,
            "pfa_target": self.pfa_target,
            "trials": self.trials,
            "seed": self.seed,
            "achieved_pfa_estimate": self.achieved_pfa_estimate,
        }


@dataclass
class SampleSet:
    """H0 matrices for empirical calibration, shape ``(T, K, N)``."""

    matrices: np.ndarray
    provenance: str = "synthetic"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.matrices, (list, tuple)):
            self.matrices = np.stack([m.data if isinstance(m, ReceivedMatrix) else np.asarray(m)
                                      for m in self.matrices])
        self.matrices = np.asarray(self.matrices, dtype=complex)
        if self.matrices.ndim != 3 or self.matrices.shape[0] == 0:
            raise InvalidArgument("sample set must be a non-empty (T, K, N) stack")

    def __len__(self) -> int:
        return self.matrices.shape[0]

    @classmethod
    def from_file(cls, path) -> "SampleSet":
        from .matfile import read_matrices

        return cls(read_matrices(path), provenance=f"external({Path(path)})")

    @classmethod
    def synthetic(cls, scenario: Scenario, count: int, seed: int | None = None,
                  hypothesis=Hypothesis.H0, **gen_options) -> "SampleSet":
        """``count`` independent draws; the same seed gives the same matrices."""
        if count < 1:
            raise InvalidArgument("count must be positive")
        hypothesis = Hypothesis(hypothesis)
        seed = scenario.seed if seed is None else seed
        parts = [generate(scenario, hypothesis, n, rng_mod.stream(seed, "samples", hypothesis.value, b),
                          **gen_options)
                 for b, n in rng_mod.blocks(count)]
        return cls(np.concatenate(parts), provenance="synthetic",
                   meta={"hypothesis": hypothesis.value, "seed": seed})


def complete_detector(spec: DetectorSpec, scenario: Scenario) -> DetectorSpec:
    """Fill side information a detector needs from the scenario's nominal values."""
    if spec.kind in (Kind.SSV, Kind.KSV) and spec.sigma2_w is None:
        spec = replace(spec, sigma2_w=scenario.sigma2_w)
    if spec.kind is Kind.LMP and spec.sigma2_H0 is None:
        spec = replace(spec, sigma2_H0=scenario.sigma2_H0)
    return spec


def statistics_from_matrices(detectors: Sequence[DetectorSpec], Y: np.ndarray,
                             rng: np.random.Generator | None = None) -> list[np.ndarray]:
    lam2 = singular_values_batch(Y) ** 2
    return [evaluate_sv2(d, lam2, Y.shape[-1], rng=rng) for d in detectors]


def simulate_statistics(detectors: Sequence[DetectorSpec], scenario: Scenario, hypothesis,
                        trials: int, seed: int, label: Iterable = ("mc",), threads: int = 1,
                        **gen_options) -> list[np.ndarray]:
    """Statistics of every detector on the same ``trials`` generated matrices.

    Streams are keyed by ``(seed, *label, hypothesis, block)`` only, so
    scenarios that differ in parameters see common random numbers.
    """
    hypothesis = Hypothesis(hypothesis)
    detectors = [complete_detector(d, scenario) for d in detectors]
    for d in detectors:
        d.check_dimensions(scenario.K, scenario.N)
    label = tuple(label)

    def run_block(item):
        b, n = item
        g = rng_mod.stream(seed, *label, hypothesis.value, b)
        Y = generate(scenario, hypothesis, n, g, **gen_options)
        return statistics_from_matrices(detectors, Y, rng=g)

    items = list(rng_mod.blocks(trials))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_block, items))
    else:
        parts = [run_block(it) for it in items]
    return [np.concatenate([p[i] for p in parts]) for i in range(len(detectors))]


def _check_trials(trials: int, pfa_target: float) -> None:
    if not 0.0 < pfa_target < 1.0:
        raise InvalidArgument("pfa_target must lie in (0, 1)")
    if trials < MIN_TRIALS or trials * pfa_target < MIN_EXCEEDANCES:
        raise InsufficientTrials(
            f"{trials} trials at pfa {pfa_target} (need >= {MIN_TRIALS} and trials*pfa >= {MIN_EXCEEDANCES})")


def threshold_from_statistics(stats, pfa_target: float) -> float:
    """The ``ceil((1 - p)(T + 1))``-th smallest statistic."""
    s = np.sort(np.asarray(stats, dtype=float).reshape(-1))
    T = s.size
    k = math.ceil((1.0 - pfa_target) * (T + 1))
    if not 1 <= k <= T:
        raise InsufficientTrials(f"order statistic {k} outside 1..{T}")
    return float(s[k - 1])


def exceedance(stats, eta: float) -> Estimate:
    s = np.asarray(stats)
    p = float(np.mean(s > eta))
    return Estimate(p, wilson_halfwidth(p, s.size), int(s.size))


def calibrate_statistics(detector: DetectorSpec, stats, pfa_target: float, seed: int = 0) -> CalibrationResult:
    stats = np.asarray(stats, dtype=float)
    _check_trials(stats.size, pfa_target)
    eta = threshold_from_statistics(stats, pfa_target)
    return CalibrationResult(detector, eta, pfa_target, int(stats.size), seed, exceedance(stats, eta).value)


def mc_threshold(detector: DetectorSpec, scenario: Scenario, pfa_target: float, trials: int,
                 seed: int | None = None, *, threads: int = 1, label: Iterable = ("cal",),
                 **gen_options) -> CalibrationResult:
    """Threshold from ``trials`` synthetic H0 statistics."""
    if not detector.has_threshold:
        raise IncompatibleDetector(f"{detector.name} has a fixed decision rule and cannot be calibrated")
    _check_trials(trials, pfa_target)
    seed = scenario.seed if seed is None else seed
    detector = complete_detector(detector, scenario)
    (stats,) = simulate_statistics([detector], scenario, Hypothesis.H0, trials, seed, label, threads,
                                   **gen_options)
    return calibrate_statistics(detector, stats, pfa_target, seed)


def mc_threshold_from_samples(detector: DetectorSpec, samples: SampleSet, pfa_target: float,
                              seed: int = 0) -> CalibrationResult:
    """Threshold from recorded (or previously generated) H0 matrices."""
    if not detector.has_threshold:
        raise IncompatibleDetector(f"{detector.name} has a fixed decision rule and cannot be calibrated")
    detector.check_dimensions(samples.matrices.shape[1], samples.matrices.shape[2])
    (stats,) = statistics_from_matrices([detector], samples.matrices, rng=rng_mod.stream(seed, "null"))
    return calibrate_statistics(detector, stats, pfa_target, seed)


def empirical_pfa(detector: DetectorSpec, samples: SampleSet, eta: float) -> Estimate:
    """Fraction of H0 statistics strictly above ``eta`` with its Wilson half-width."""
    detector.check_dimensions(samples.matrices.shape[1], samples.matrices.shape[2])
    (stats,) = statistics_from_matrices([detector], samples.matrices, rng=rng_mod.stream(0, "null"))
    return exceedance(stats, eta)


def estimate_pd(detector: DetectorSpec, scenario: Scenario, hypothesis, eta: float | None, trials: int,
                seed: int | None = None, *, threads: int = 1, label: Iterable = ("pd",),
                **gen_options) -> Estimate:
    """Detection probability under H1/H2; ``eta=None`` uses a fixed-rule detector's own threshold."""
    hypothesis = Hypothesis(hypothesis)
    if hypothesis is Hypothesis.H0:
        raise InvalidArgument("estimate_pd needs H1 or H2")
    if trials < MIN_TRIALS:
        raise InsufficientTrials(f"need at least {MIN_TRIALS} trials")
    if eta is None:
        if detector.has_threshold:
            raise InvalidArgument("eta required for thresholded detectors")
        eta = detector.fixed_threshold
    seed = scenario.seed if seed is None else seed
    (stats,) = simulate_statistics([detector], scenario, hypothesis, trials, seed, label, threads, **gen_options)
    return exceedance(stats, eta)
