"""Majorisation, constructive permutation mixtures, and weighted-sum experiments.

a is majorised by b when the partial sums of their nonincreasing
rearrangements compare and the totals agree; equivalently a is a convex
combination of permutations of b.  The decomposition here is fully
constructive: a chain of at most n-1 two-coordinate averaging steps builds
a doubly stochastic matrix T with a = T b, and greedy extraction of
permutation matrices (lexicographically smallest perfect matching first)
turns T into an explicit mixture with at most (n-1)^2 + 1 terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distributions import (FiniteSupportDist, ProductLaw, enumerate_product,
                            scaled_source, sum_of)
from .dominance import DominationQuery, DominationReport, check_domination
from .errors import ParameterError, PreconditionError
from .inequalities import signed_mean_over_outcomes
from .stats import Estimator, SlackReport
from .weakborell import WBParams, wb_tensorize_constants

DEFAULT_TOL = 1e-9
_RESIDUAL_TOL = 1e-10


def is_majorised(a, b, tol: float = DEFAULT_TOL) -> bool:
    """True iff a is majorised by b (partial sums of sorted rearrangements)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ParameterError("a and b must be equal-length sequences")
    a_sorted = np.sort(a)[::-1]
    b_sorted = np.sort(b)[::-1]
    ca, cb = np.cumsum(a_sorted), np.cumsum(b_sorted)
    if abs(ca[-1] - cb[-1]) > tol:
        return False
    return bool(np.all(ca[:-1] <= cb[:-1] + tol))


def _majorisation_violation(a, b, tol: float):
    """Index of the first violated partial sum, or None."""
    a_sorted = np.sort(np.asarray(a, dtype=float))[::-1]
    b_sorted = np.sort(np.asarray(b, dtype=float))[::-1]
    ca, cb = np.cumsum(a_sorted), np.cumsum(b_sorted)
    if abs(ca[-1] - cb[-1]) > tol:
        return len(a_sorted) - 1
    bad = np.nonzero(ca[:-1] > cb[:-1] + tol)[0]
    return int(bad[0]) if len(bad) else None


@dataclass(frozen=True)
class PermutationMixture:
    """Convex combination of permutations of b reconstructing a."""

    a: tuple
    b: tuple
    terms: tuple  # ((permutation index tuple, weight), ...)

    def __post_init__(self):
        w = sum(t[1] for t in self.terms)
        if abs(w - 1.0) > 1e-12:
            raise ParameterError(f"weights sum to {w}, not 1")
        if np.max(np.abs(self.reconstruct() - np.asarray(self.a))) > DEFAULT_TOL:
            raise ParameterError("mixture does not reconstruct a within 1e-9")

    def reconstruct(self) -> np.ndarray:
        b = np.asarray(self.b, dtype=float)
        out = np.zeros_like(b)
        for perm, w in self.terms:
            out += w * b[list(perm)]
        return out

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b),
                "terms": [{"permutation": list(p), "weight": w}
                          for p, w in self.terms]}


def _t_transform_chain(a_sorted: np.ndarray, b_sorted: np.ndarray):
    """Averaging chain from b_sorted to a_sorted (both nonincreasing).

    Yields (j, k, lam) steps; applying c <- lam c + (1 - lam) swap_jk(c)
    in order maps b_sorted to a_sorted in at most n-1 steps.
    """
    c = b_sorted.astype(float).copy()
    n = len(c)
    steps = []
    for _ in range(n):
        diff = c - a_sorted
        if np.max(np.abs(diff)) <= 1e-13 * max(1.0, np.max(np.abs(b_sorted))):
            break
        j = int(np.nonzero(diff > 1e-13)[0][0])
        ks = np.nonzero(diff[j + 1:] < -1e-13)[0]
        if len(ks) == 0:
            raise ParameterError("majorisation chain failed; inputs not majorised")
        k = j + 1 + int(ks[0])
        delta = min(c[j] - a_sorted[j], a_sorted[k] - c[k])
        lam = 1.0 - delta / (c[j] - c[k])
        steps.append((j, k, lam))
        cj, ck = c[j], c[k]
        c[j] = lam * cj + (1.0 - lam) * ck
        c[k] = lam * ck + (1.0 - lam) * cj
    return steps, c


def _doubly_stochastic_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Doubly stochastic T with a = T b, via the averaging chain."""
    n = len(a)
    order_a = np.argsort(-a, kind="stable")
    order_b = np.argsort(-b, kind="stable")
    a_sorted, b_sorted = a[order_a], b[order_b]
    steps, _ = _t_transform_chain(a_sorted, b_sorted)
    t_sorted = np.eye(n)
    for j, k, lam in steps:
        step = np.eye(n)
        step[j, j] = step[k, k] = lam
        step[j, k] = step[k, j] = 1.0 - lam
        t_sorted = step @ t_sorted
    # undo the sorting permutations: a = Ra a_sorted, b_sorted = Sb b
    ra = np.zeros((n, n))
    ra[order_a, np.arange(n)] = 1.0
    sb = np.zeros((n, n))
    sb[np.arange(n), order_b] = 1.0
    return ra @ t_sorted @ sb


def _lex_perfect_matching(support: np.ndarray):
    """Lexicographically smallest perfect matching on a boolean support matrix.

    Row i is assigned the smallest feasible column, feasibility meaning a
    perfect matching still exists on the remaining rows and columns.
    Returns the column assignment, or None if no perfect matching exists.
    """
    n = support.shape[0]

    def max_matching(rows, cols, adj):
        match_col = {c: None for c in cols}

        def try_row(r, seen):
            for c in adj[r]:
                if c in seen:
                    continue
                seen.add(c)
                if match_col[c] is None or try_row(match_col[c], seen):
                    match_col[c] = r
                    return True
            return False

        size = 0
        for r in rows:
            if try_row(r, set()):
                size += 1
        return size

    rows = list(range(n))
    cols = set(range(n))
    assignment = [None] * n
    for r in range(n):
        remaining_rows = [x for x in rows if x > r]
        feasible = None
        for c in sorted(cols):
            if not support[r, c]:
                continue
            rem_cols = cols - {c}
            adj = {x: [y for y in sorted(rem_cols) if support[x, y]]
                   for x in remaining_rows}
            if max_matching(remaining_rows, rem_cols, adj) == len(remaining_rows):
                feasible = c
                break
        if feasible is None:
            return None
        assignment[r] = feasible
        cols.remove(feasible)
    return assignment


def decompose(a, b) -> PermutationMixture:
    """Write a as a convex combination of permutations of b.

    Requires is_majorised(a, b); raises a not-majorised error naming the
    violating partial-sum index otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ParameterError("a and b must be equal-length sequences")
    bad = _majorisation_violation(a, b, DEFAULT_TOL)
    if bad is not None:
        raise PreconditionError(f"a is not majorised by b: partial sum {bad + 1} violates")
    n = len(a)
    t = _doubly_stochastic_matrix(a, b)
    terms = []
    residual = t.copy()
    max_terms = (n - 1) ** 2 + 1
    for _ in range(max_terms):
        if residual.max() <= _RESIDUAL_TOL:
            break
        support = residual > _RESIDUAL_TOL
        assignment = _lex_perfect_matching(support)
        if assignment is None:
            raise ParameterError("extraction failed: no perfect matching on support")
        w = float(min(residual[i, assignment[i]] for i in range(n)))
        terms.append((tuple(assignment), w))
        for i in range(n):
            residual[i, assignment[i]] -= w
    if residual.max() > _RESIDUAL_TOL:
        raise ParameterError("extraction did not exhaust the matrix in the term budget")
    total = sum(w for _, w in terms)
    terms = [(p, w / total) for p, w in terms]  # absorb float residual
    return PermutationMixture(a=tuple(a), b=tuple(b), terms=tuple(terms))


# ---------------------------------------------------------------------------
# convexity and domination experiments for weighted sums


def schur_convexity_check(a, b, component: FiniteSupportDist, norm,
                          shift: float = 1.0) -> SlackReport:
    """E (||sum a_i X_i|| - 1)_+ <= E (||sum b_i X_i|| - 1)_+ for a < b, exact.

    X_i are iid copies of the finite-support component; expectations are
    enumerated over the product support.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    bad = _majorisation_violation(a, b, DEFAULT_TOL)
    if bad is not None:
        raise PreconditionError(f"a is not majorised by b: partial sum {bad + 1} violates")
    n = len(a)
    law = ProductLaw(tuple([component] * n))
    outcomes, probs = enumerate_product(law)

    def weighted_mean(weights):
        sums = np.einsum("i,mid->md", weights, outcomes)
        vals = np.atleast_1d(norm.evaluate(sums))
        return float(probs @ np.maximum(vals - shift, 0.0))

    return SlackReport.from_exact("schur_convexity", weighted_mean(a), weighted_mean(b))


def weighted_domination_constants(params: WBParams) -> dict:
    """The domination constant for majorised weights, in both equivalent forms.

    Direct form: max{2/theta, 96 C 9^delta, 12 C 9^delta / (delta - 1)};
    via inherited constants: max{1/theta', C'/(delta - 1)}.  The two agree
    identically; both are reported.
    """
    if params.delta <= 1.0:
        raise ParameterError("weighted domination requires delta > 1; "
                             "for delta < 1 run counterexample_experiment")
    nine = 9.0 ** params.delta
    direct = max(2.0 / params.theta, 96.0 * params.C * nine,
                 12.0 * params.C * nine / (params.delta - 1.0))
    tens = wb_tensorize_constants(params)
    derived = max(1.0 / tens.theta, tens.C / (params.delta - 1.0))
    return {"kappa": direct, "kappa_direct": direct, "kappa_derived": derived,
            "lambda": 2.0}


def _weighted_sum_law(weights, source):
    parts = [scaled_source(source, abs(w)) for w in weights if w != 0.0]
    if not parts:
        raise ParameterError("all weights are zero")
    return sum_of(parts)


def weighted_domination_experiment(a, b, source, params: WBParams, norms,
                                   estimator: Estimator, seed: int = 0,
                                   threads: int = 1) -> DominationReport:
    """Check sum a_i X_i  <_(kappa, 2)  sum b_i X_i for a < b and iid X_i.

    kappa comes from weighted_domination_constants(params); the source must be
    WB(C, delta, theta)-certified by the caller with delta > 1.
    """
    consts = weighted_domination_constants(params)
    if abs(consts["kappa_direct"] - consts["kappa_derived"]) > 1e-9 * consts["kappa"]:
        raise ParameterError("kappa forms disagree")  # unreachable by construction
    bad = _majorisation_violation(np.asarray(a, float), np.asarray(b, float), DEFAULT_TOL)
    if bad is not None:
        raise PreconditionError(f"a is not majorised by b: partial sum {bad + 1} violates")
    x = _weighted_sum_law(a, source)
    y = _weighted_sum_law(b, source)
    rep = check_domination(DominationQuery(x=x, y=y, kappa=consts["kappa"], lam=2.0,
                                           norms=tuple(norms), estimator=estimator),
                           seed=seed, threads=threads)
    meta = dict(rep.meta, experiment="weighted_domination",
                kappa_direct=consts["kappa_direct"],
                kappa_derived=consts["kappa_derived"],
                params=params.to_json())
    return DominationReport(kappa=rep.kappa, lam=rep.lam, records=rep.records,
                            meta=meta)


# ---------------------------------------------------------------------------
# the delta < 1 counterexample


@dataclass(frozen=True)
class CounterexampleRow:
    n: int
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else float("inf")

    def to_json(self) -> dict:
        return {"n": self.n, "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio}


@dataclass(frozen=True)
class CounterexampleTable:
    delta: float
    kappa: float
    lam: float
    rows: tuple
    witness: Optional[int]  # smallest n with lhs > rhs
    method: str

    def to_json(self) -> dict:
        return {"delta": self.delta, "kappa": self.kappa, "lambda": self.lam,
                "rows": [r.to_json() for r in self.rows],
                "witness": self.witness, "method": self.method,
                "expected_violation": self.witness is not None}

    def csv_rows(self):
        return [(r.n, r.lhs, r.rhs, r.ratio) for r in self.rows]


def counterexample_experiment(delta: float, n_grid: Sequence[int], kappa: float,
                              lam: float, budget: int = 10**6,
                              seed: int = 0) -> CounterexampleTable:
    """Probe the failure of weighted domination for stability index < 1.

    For iid index-delta stable-type summands with uniform weights 1/n
    against the single weight 1, domination at (kappa, lam) would force
    P(|X_1| > 1) <= kappa P(lam |X_1| > n^{1/delta - 1}), which fails for
    large n.  For delta = 1/2 the closed-form survival erfc(sqrt(t/2)) is
    used; otherwise both tails are estimated by Monte Carlo.
    """
    from .distributions import sample, stable_half_survival, symmetric_stable

    if not (0.0 < delta < 1.0):
        raise ParameterError("delta must lie in (0, 1)")
    if kappa < 1.0 or lam < 1.0:
        raise ParameterError("kappa and lambda must be >= 1")
    rows = []
    if delta == 0.5:
        method = "analytic"
        lhs = float(stable_half_survival(1.0))

        def tail(t):
            return float(stable_half_survival(t))
    else:
        method = "mc"
        xs = np.abs(sample(symmetric_stable(delta), budget, seed)[:, 0])
        lhs = float(np.count_nonzero(xs > 1.0)) / budget

        def tail(t):
            return float(np.count_nonzero(xs > t)) / budget

    witness = None
    for n in sorted(int(n) for n in n_grid):
        threshold = n ** (1.0 / delta - 1.0) / lam
        rhs = kappa * tail(threshold)
        rows.append(CounterexampleRow(n=n, lhs=lhs, rhs=rhs))
        if witness is None and n > 1 and lhs > rhs:
            witness = n
    return CounterexampleTable(delta=delta, kappa=kappa, lam=lam,
                               rows=tuple(rows), witness=witness, method=method)
