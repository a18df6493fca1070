"""Weak-concentration (polynomial tail decay) checks and their tensorisation.

A symmetric vector X satisfies the weak concentration property with
constants (C, delta, theta) if P(||X|| > lam) <= C lam^-delta P(||X|| > 1)
for all lam >= 1 and every norm with P(||X|| > 1) < theta.  Sums of n
independent such vectors inherit the property with C' = 12 * 9^delta * C
and theta' = min{theta/2, (96 C 9^delta)^-1}; this module checks both the
inherited inequality and the scalar recursion behind it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distributions import Law, ProductLaw
from .dominance import _law_samples, exact_capable, tail_probability
from .errors import ParameterError, PreconditionError
from .geometry import norm_to_spec
from .stats import Estimator, TailEstimate, worst_verdict

_EXACT_TOL = 1e-12


@dataclass(frozen=True)
class WBParams:
    C: float
    delta: float
    theta: float

    def __post_init__(self):
        if self.C < 1.0:
            raise ParameterError("C must be >= 1")
        if self.delta <= 0.0:
            raise ParameterError("delta must be positive")
        if not (0.0 < self.theta < 1.0):
            raise ParameterError("theta must lie in (0, 1)")

    def to_json(self) -> dict:
        return {"C": self.C, "delta": self.delta, "theta": self.theta}


def wb_tensorize_constants(params: WBParams) -> WBParams:
    """Constants inherited by a sum of independent components.

    C' = 12 * 9^delta * C;  theta' = min{theta / 2, (96 C 9^delta)^-1}.
    """
    nine = 9.0 ** params.delta
    c_out = 12.0 * nine * params.C
    theta_out = min(params.theta / 2.0, 1.0 / (96.0 * params.C * nine))
    return WBParams(C=c_out, delta=params.delta, theta=theta_out)


@dataclass(frozen=True)
class WBCell:
    norm_index: int
    lam: float
    p_lam: TailEstimate
    bound: float  # C * lam^-delta * p1 (point value)
    verdict: str

    def to_json(self) -> dict:
        return {"norm_index": self.norm_index, "lambda": self.lam,
                "p_lambda": self.p_lam.to_json(), "bound": self.bound,
                "verdict": self.verdict}


@dataclass(frozen=True)
class WBReport:
    params: WBParams
    norm_specs: tuple
    p1: tuple  # per-norm TailEstimate of P(||X|| > 1)
    cells: tuple
    skipped: tuple  # norm indices with p1 >= theta (premise fails)
    meta: dict = field(default_factory=dict)

    @property
    def overall(self) -> str:
        if not self.cells:
            return "holds"
        return worst_verdict(c.verdict for c in self.cells)

    def verdicts(self):
        return [c.verdict for c in self.cells]

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "overall": self.overall,
                "norms": list(self.norm_specs),
                "p1": [p.to_json() for p in self.p1],
                "cells": [c.to_json() for c in self.cells],
                "skipped": list(self.skipped), "meta": self.meta}

    def loglog_rows(self):
        """(lambda, p_lambda / p1, C * lambda^-delta) rows for CSV export."""
        rows = []
        for c in self.cells:
            p1 = self.p1[c.norm_index].value
            ratio = c.p_lam.value / p1 if p1 > 0 else float("nan")
            rows.append((c.lam, ratio,
                         self.params.C * c.lam ** (-self.params.delta)))
        return rows


def _wb_verdict(p_lam: TailEstimate, p1: TailEstimate, factor: float) -> str:
    if p_lam.exact and p1.exact:
        scale = max(1.0, p_lam.value, factor * p1.value)
        return ("holds" if p_lam.value <= factor * p1.value + _EXACT_TOL * scale
                else "violated")
    if p_lam.lo > factor * p1.hi:
        return "violated"
    if p_lam.hi <= factor * p1.lo:
        return "holds"
    return "inconclusive"


def check_wb(law: Law, params: WBParams, norms, lambda_grid: Sequence[float],
             estimator: Estimator, seed: int = 0, threads: int = 1) -> WBReport:
    """Check P(||X|| > lam) <= C lam^-delta P(||X|| > 1) over norms and lam.

    Norms whose unit-tail probability is at least theta are excluded from
    verdicts (the premise of the property fails there) and listed in the
    report's skipped field.
    """
    lambda_grid = [float(l) for l in lambda_grid]
    if not lambda_grid:
        raise ParameterError("lambda grid must be nonempty")
    if any(l < 1.0 for l in lambda_grid):
        raise ParameterError("all lambda grid points must be >= 1")
    samples = _law_samples(law, estimator, seed, (5,), threads)
    norm_specs = []
    p1s = []
    cells = []
    skipped = []
    for i, norm in enumerate(norms):
        norm_specs.append(norm_to_spec(norm))
        p1 = tail_probability(law, norm, 1.0, estimator, seed, (5,), samples)
        p1s.append(p1)
        if p1.value >= params.theta:
            skipped.append(i)
            continue
        for lam in lambda_grid:
            factor = params.C * lam ** (-params.delta)
            p_lam = tail_probability(law, norm, lam, estimator, seed, (5,), samples)
            cells.append(WBCell(norm_index=i, lam=lam, p_lam=p_lam,
                                bound=factor * p1.value,
                                verdict=_wb_verdict(p_lam, p1, factor)))
    return WBReport(params=params, norm_specs=tuple(norm_specs), p1=tuple(p1s),
                    cells=tuple(cells), skipped=tuple(skipped),
                    meta={"lambda_grid": lambda_grid})


def recursion_bound(p0: float, params: WBParams, K: int):
    """Iterate the tail recursion q_k = 6 C 3^{-delta(k-1)} p0 + 4 q_{k-1}^2.

    Returns one record per k in 0..K with the recursive bound, the closed
    form 12 * 3^delta * C * 3^{-k delta} * p0, the induction multiplier
    1/2 + 48 C 3^{-delta k + 3 delta} p0, and whether the recursive bound
    stays below the closed form.  The premise flag records whether
    p0 < min{1/3, theta'}, which the induction needs.
    """
    if not (0.0 < p0 < 1.0):
        raise ParameterError("p0 must lie in (0, 1)")
    if K < 0:
        raise ParameterError("K must be >= 0")
    tens = wb_tensorize_constants(params)
    premise_ok = p0 < min(1.0 / 3.0, tens.theta)
    c, delta = params.C, params.delta
    rows = []
    q = p0
    for k in range(K + 1):
        closed = 12.0 * 3.0 ** delta * c * 3.0 ** (-k * delta) * p0
        if k == 0:
            q = p0
            closed = p0  # induction base: the bound is p0 itself
            multiplier = float("nan")
        else:
            q = 6.0 * c * 3.0 ** (-delta * (k - 1)) * p0 + 4.0 * q * q
            multiplier = 0.5 + 48.0 * c * 3.0 ** (-delta * k + 3.0 * delta) * p0
        ok = q <= closed * (1.0 + 1e-12)
        rows.append({"k": k, "recursive": q, "closed_form": closed,
                     "multiplier": multiplier, "within_closed_form": ok,
                     "premise_ok": premise_ok})
    return rows


def component_gate_consistency(law: ProductLaw, norm, theta_out: float,
                               theta: float, estimator: Estimator,
                               seed: int = 0):
    """Check the gate chain P(||X_j|| > 1) <= 2 P(||S_n|| > 1) < 2 theta' <= theta.

    Exact on finite-support laws.  Returns per-component SlackReport-like
    dicts; raises if theta' > theta / 2 (the chain needs theta' <= theta/2).
    """
    from .stats import SlackReport

    if theta_out > theta / 2.0 + _EXACT_TOL:
        raise ParameterError("gate chain requires theta' <= theta / 2")
    p_sum = tail_probability(law, norm, 1.0, estimator, seed, (6,))
    reports = []
    for j, comp in enumerate(law.components):
        pj = tail_probability(comp, norm, 1.0, estimator, seed, (6, j))
        reports.append(SlackReport.from_exact(
            f"component_gate_{j}", pj.value, 2.0 * p_sum.value,
            note="component unit tail vs twice the sum tail"))
    return reports


def wb_sum_experiment(components: Sequence[Law], params: WBParams, norms,
                      lambda_grid: Sequence[float], estimator: Estimator,
                      seed: int = 0, recheck: bool = True,
                      component_estimator: Optional[Estimator] = None,
                      threads: int = 1) -> WBReport:
    """Check the sum of WB-certified components against the inherited constants.

    Each component is first re-checked with the input params over the norm
    family (a violated cell raises, naming the component); the sum is then
    checked against wb_tensorize_constants(params).
    """
    components = tuple(components)
    if recheck:
        comp_est = component_estimator or estimator
        for j, comp in enumerate(components):
            rep = check_wb(comp, params, norms, lambda_grid, comp_est,
                           seed=seed + 2000 + j, threads=threads)
            if "violated" in rep.verdicts():
                raise PreconditionError(
                    f"component {j} fails its WB({params.C},{params.delta},{params.theta}) premise")
    tens = wb_tensorize_constants(params)
    law = ProductLaw(components)
    rep = check_wb(law, tens, norms, lambda_grid, estimator, seed=seed,
                   threads=threads)
    meta = dict(rep.meta, experiment="wb_sum", input_params=params.to_json())
    return WBReport(params=rep.params, norm_specs=rep.norm_specs, p1=rep.p1,
                    cells=rep.cells, skipped=rep.skipped, meta=meta)
