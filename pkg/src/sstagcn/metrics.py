"""Experiment metrics and statistics: accuracy, macro-F1, percentile-bootstrap
confidence intervals, and the paired two-sided t-test."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .validation import check_index_array


def accuracy(pred, truth, idx) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    idx = check_index_array(idx, truth.shape[0], "idx")
    return float((pred[idx] == truth[idx]).mean())


def macro_f1(pred, truth, idx, n_classes) -> float:
    """Unweighted mean of per-class F1 over all declared classes.

    A class absent from both predictions and truth on the evaluated indices
    contributes F1 = 0, lowering the mean.
    """
    pred = np.asarray(pred)[np.asarray(idx, dtype=int)]
    truth = np.asarray(truth)[np.asarray(idx, dtype=int)]
    f1s = np.zeros(n_classes)
    for c in range(n_classes):
        tp = float(((pred == c) & (truth == c)).sum())
        fp = float(((pred == c) & (truth != c)).sum())
        fn = float(((pred != c) & (truth == c)).sum())
        denom = 2 * tp + fp + fn
        f1s[c] = 2 * tp / denom if denom > 0 else 0.0
    return float(f1s.mean())


def bootstrap_ci(values, n_resamples=10_000, level=0.95, seed=0):
    """Percentile bootstrap of the mean: (sample_mean, CI half-width).

    Resamples with replacement, takes the (1 +- level)/2 percentiles of the
    resample means, and reports half the interval length. Deterministic per
    seed. A single value or constant sequence gives half-width 0.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("values must not be empty")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    mean = float(values.mean())
    if values.size == 1 or np.all(values == values[0]):
        return mean, 0.0
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, values.size, size=(n_resamples, values.size))
    means = values[draws].mean(axis=1)
    lo, hi = np.percentile(means, [50.0 * (1 - level), 50.0 * (1 + level)])
    return mean, float((hi - lo) / 2.0)


def _beta_cont_fraction(a, b, x, tol=1e-10, max_iter=500):
    """Continued fraction for the regularized incomplete beta (Lentz scheme)."""
    tiny = 1e-30
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a, b, x) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_fraction(a, b, x) / a
    return 1.0 - front * _beta_cont_fraction(b, a, 1.0 - x) / b


def student_t_two_sided_p(t_stat, dof) -> float:
    """P(|T_dof| >= |t|) via the incomplete beta."""
    if math.isinf(t_stat):
        return 0.0
    return regularized_incomplete_beta(
        dof / 2.0, 0.5, dof / (dof + t_stat * t_stat)
    )


def paired_t_test(a, b):
    """Two-sided paired t-test on per-run differences: (t_stat, p_value).

    Degenerate variance: all-zero differences give (0, 1); equal nonzero
    differences give an infinite statistic and p = 0 with a warning.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("a and b must be 1-D sequences of equal length")
    n = a.size
    if n < 2:
        raise ValueError(f"paired t-test needs at least 2 pairs, got {n}")
    diffs = a - b
    if np.all(diffs == 0.0):
        return 0.0, 1.0
    sd = float(diffs.std(ddof=1))
    mean = float(diffs.mean())
    if sd == 0.0:
        warnings.warn(
            "all paired differences identical and nonzero; p-value 0 by convention",
            stacklevel=2,
        )
        return math.copysign(math.inf, mean), 0.0
    t_stat = mean / (sd / math.sqrt(n))
    return t_stat, student_t_two_sided_p(t_stat, n - 1)


@dataclass(frozen=True)
class RunResult:
    """Metrics of one pipeline run."""

    method: str
    seed: int
    accuracy: float
    macro_f1: float
    train_seconds: float

    def __post_init__(self):
        for name in ("accuracy", "macro_f1"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} out of [0, 1]: {v}")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "train_seconds": self.train_seconds,
        }


@dataclass(frozen=True)
class MethodSummary:
    """Bootstrap summary of repeated runs of one method."""

    method: str
    n_runs: int
    accuracy_mean: float
    accuracy_ci95: float
    macro_f1_mean: float
    macro_f1_ci95: float
    mean_train_seconds: float

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n_runs": self.n_runs,
            "accuracy_mean": self.accuracy_mean,
            "accuracy_ci95": self.accuracy_ci95,
            "macro_f1_mean": self.macro_f1_mean,
            "macro_f1_ci95": self.macro_f1_ci95,
            "mean_train_seconds": self.mean_train_seconds,
        }


def summarize_runs(results, level=0.95, n_resamples=10_000, seed=0) -> MethodSummary:
    """Aggregate RunResults of a single method into means and CI half-widths."""
    if not results:
        raise ValueError("no run results to summarize")
    methods = {r.method for r in results}
    if len(methods) != 1:
        raise ValueError(f"mixed methods in summary: {sorted(methods)}")
    acc_mean, acc_hw = bootstrap_ci(
        [r.accuracy for r in results], n_resamples=n_resamples, level=level, seed=seed
    )
    f1_mean, f1_hw = bootstrap_ci(
        [r.macro_f1 for r in results], n_resamples=n_resamples, level=level, seed=seed
    )
    return MethodSummary(
        method=results[0].method,
        n_runs=len(results),
        accuracy_mean=acc_mean,
        accuracy_ci95=acc_hw,
        macro_f1_mean=f1_mean,
        macro_f1_ci95=f1_hw,
        mean_train_seconds=float(np.mean([r.train_seconds for r in results])),
    )
