"""Probability estimates, confidence intervals and comparison reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from scipy.stats import beta

from .errors import ParameterError

DEFAULT_CONFIDENCE = 0.99


@dataclass(frozen=True)
class Estimator:
    """How tail probabilities are computed: exactly or by Monte Carlo."""

    kind: str  # "exact" or "mc"
    budget: int = 10**6
    confidence: float = DEFAULT_CONFIDENCE

    def __post_init__(self):
        if self.kind not in ("exact", "mc"):
            raise ParameterError(f"unknown estimator kind {self.kind!r}")
        if self.kind == "mc" and self.budget < 1:
            raise ParameterError("mc budget must be >= 1")
        if not (0.0 < self.confidence < 1.0):
            raise ParameterError("confidence must lie in (0, 1)")


EXACT = Estimator(kind="exact")


def clopper_pearson(k: int, n: int, confidence: float = DEFAULT_CONFIDENCE):
    """Two-sided exact binomial confidence interval for k successes in n trials."""
    if not (0 <= k <= n) or n < 1:
        raise ParameterError("need 0 <= k <= n, n >= 1")
    if not (0.0 < confidence < 1.0):
        raise ParameterError("confidence must lie in (0, 1)")
    a = (1.0 - confidence) / 2.0
    lo = 0.0 if k == 0 else float(beta.ppf(a, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1.0 - a, k + 1, n - k))
    return lo, hi


@dataclass(frozen=True)
class TailEstimate:
    """P(event) either exactly or with a two-sided confidence interval."""

    value: float
    lo: float
    hi: float
    exact: bool
    samples: int = 0
    confidence: float = DEFAULT_CONFIDENCE

    @staticmethod
    def from_exact(value: float) -> "TailEstimate":
        return TailEstimate(value=value, lo=value, hi=value, exact=True)

    @staticmethod
    def from_counts(k: int, n: int,
                    confidence: float = DEFAULT_CONFIDENCE) -> "TailEstimate":
        lo, hi = clopper_pearson(k, n, confidence)
        return TailEstimate(value=k / n, lo=lo, hi=hi, exact=False,
                            samples=n, confidence=confidence)

    def to_json(self) -> dict:
        out = {"value": self.value, "exact": self.exact}
        if not self.exact:
            out.update({"lo": self.lo, "hi": self.hi, "samples": self.samples,
                        "confidence": self.confidence})
        return out


# Slack below this (relative) is treated as float noise, not a violation.
EXACT_SLACK_TOL = 1e-12


@dataclass(frozen=True)
class SlackReport:
    """One verified inequality lhs <= rhs."""

    name: str
    lhs: float
    rhs: float
    holds: bool
    slack: float
    method: str = "exact"  # "exact" or "mc"
    samples: int = 0
    note: str = ""

    @staticmethod
    def from_exact(name: str, lhs: float, rhs: float, note: str = "") -> "SlackReport":
        scale = max(1.0, abs(lhs), abs(rhs))
        holds = lhs <= rhs + EXACT_SLACK_TOL * scale
        return SlackReport(name=name, lhs=lhs, rhs=rhs, holds=holds,
                           slack=rhs - lhs, note=note)

    def to_json(self) -> dict:
        out = {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
               "holds": self.holds, "slack": self.slack, "method": self.method}
        if self.samples:
            out["samples"] = self.samples
        if self.note:
            out["note"] = self.note
        return out


def compare_tails(px: TailEstimate, py: TailEstimate, factor: float) -> str:
    """Three-valued verdict for the claim P_x <= factor * P_y.

    Exact estimates compare directly; interval estimates report
    "violated" only when even the most favorable reading fails, "holds"
    only when the least favorable reading passes, else "inconclusive".
    """
    if px.exact and py.exact:
        scale = max(1.0, px.value, factor * py.value)
        if px.value <= factor * py.value + EXACT_SLACK_TOL * scale:
            return "holds"
        return "violated"
    if px.lo > factor * py.hi:
        return "violated"
    if px.hi <= factor * py.lo:
        return "holds"
    return "inconclusive"


def worst_verdict(verdicts) -> str:
    order = {"holds": 0, "inconclusive": 1, "violated": 2}
    worst = "holds"
    for v in verdicts:
        if order[v] > order[worst]:
            worst = v
    return worst
