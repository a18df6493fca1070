"""Tail comparisons, the proxy functional, and domination experiments."""

import numpy as np
import pytest

from domlab import (DominationQuery, Estimator, FiniteSupportDist,
                    ParameterError, PreconditionError, ProductLaw, absolute_value,
                    check_domination, conditional_convexity_check, euclidean,
                    exact_capable, gaussian, pareto_tail, proxy_bound_check,
                    proxy_exact, proxy_mc, random_norm_family, reduction_experiment,
                    removedelta_check, scale_norm, scaled_source,
                    tail_probability, tensorisation_experiment, thin)
from domlab.dominance import REMOVEDELTA_CAP

EXACT = Estimator("exact")

RAD = FiniteSupportDist.rademacher()
HALF = FiniteSupportDist.rademacher(0.5)
FAMILY1 = random_norm_family(seed=31, d=1, size=6)


# ---------------------------------------------------------------------------
# tail probabilities


def test_tail_exact_finite():
    law = ProductLaw((RAD,) * 3)
    p = tail_probability(law, absolute_value(), 1.0, EXACT)
    assert p.exact and p.value == pytest.approx(0.25, abs=1e-15)


def test_tail_analytic_scalar_with_scaled_norm():
    # P(c|X| > 1) = P(|X| > 1/c) via the closed-form survival function.
    src = pareto_tail(2.0)
    norm = scale_norm(absolute_value(), 0.25)
    p = tail_probability(src, norm, 1.0, EXACT)
    assert p.exact and p.value == pytest.approx(4.0 ** -2, abs=1e-15)


def test_tail_mc_matches_analytic():
    src = pareto_tail(2.0)
    est = Estimator("mc", budget=400_000)
    p = tail_probability(gaussian(np.eye(2)), euclidean(2), 1.0, est, seed=2)
    assert not p.exact
    # [DERIVED] chi-square(2): P(||Z|| > 1) = exp(-1/2).
    assert p.lo <= np.exp(-0.5) <= p.hi
    assert p.value == pytest.approx(np.exp(-0.5), abs=0.005)
    assert tail_probability(src, absolute_value(), 2.0, est, seed=2).exact


def test_tail_requires_mc_when_no_exact_path():
    with pytest.raises(ParameterError, match="mc"):
        tail_probability(gaussian(np.eye(2)), euclidean(2), 1.0, EXACT)


def test_exact_capable():
    assert exact_capable(RAD)
    assert exact_capable(ProductLaw((RAD, HALF)))
    assert exact_capable(pareto_tail(2.0))
    assert not exact_capable(gaussian(np.eye(2)))
    assert not exact_capable(ProductLaw((gaussian(np.eye(2)),) * 2))


# ---------------------------------------------------------------------------
# domination checks


def test_halved_law_is_dominated():
    query = DominationQuery(x=HALF, y=RAD, kappa=1.0, lam=1.0,
                            norms=tuple(FAMILY1), estimator=EXACT)
    rep = check_domination(query)
    assert rep.overall == "holds"


def test_domination_violated_in_reverse():
    # X = Rademacher(1) is NOT (1,1)-dominated by Y = Rademacher(1/2):
    # under ||x|| = |x|, P(|X| > 1) would need to be <= P(|Y| > 1) = 0... both
    # are 0 at threshold 1; use a scaled norm 1.5|x| to separate the atoms.
    norm = scale_norm(absolute_value(), 1.5)
    query = DominationQuery(x=RAD, y=HALF, kappa=1.0, lam=1.0,
                            norms=(norm,), estimator=EXACT)
    rep = check_domination(query)
    assert rep.overall == "violated"


def test_domination_lambda_rescues():
    norm = scale_norm(absolute_value(), 1.5)
    query = DominationQuery(x=RAD, y=HALF, kappa=1.0, lam=2.0,
                            norms=(norm,), estimator=EXACT)
    assert check_domination(query).overall == "holds"


def test_domination_mc_three_valued():
    x = gaussian([[1.0, 0.0], [0.0, 1.0]])
    query = DominationQuery(x=x, y=x, kappa=1.0, lam=1.0,
                            norms=(euclidean(2),),
                            estimator=Estimator("mc", budget=50_000))
    rep = check_domination(query, seed=4)
    assert rep.records[0].verdict in ("holds", "inconclusive")
    assert rep.overall != "violated"


def test_domination_query_validation():
    with pytest.raises(ParameterError):
        DominationQuery(x=RAD, y=RAD, kappa=0.5, lam=1.0, norms=(),
                        estimator=EXACT)
    with pytest.raises(ParameterError, match="dimension"):
        DominationQuery(x=RAD, y=gaussian(np.eye(2)), kappa=1.0, lam=1.0,
                        norms=(), estimator=EXACT)


# ---------------------------------------------------------------------------
# the proxy


def test_proxy_exact_three_rademacher():
    # E_eps(|S|-1)_+ = (1/4)(3-1) = 1/2 for every outcome of signs of ones.
    law = ProductLaw((RAD,) * 3)
    assert proxy_exact(law, absolute_value()).value == pytest.approx(0.5, abs=1e-15)


def test_proxy_mc_matches_exact():
    law = ProductLaw((RAD,) * 3)
    mc = proxy_mc(law, absolute_value(), outer_budget=20_000, seed=6)
    assert mc.value == pytest.approx(0.5, abs=0.005)
    assert mc.inner == "exact"


def test_proxy_bounds_random_laws():
    rng = np.random.default_rng(9)
    for _ in range(25):
        n = int(rng.integers(1, 4))
        comps = tuple(
            FiniteSupportDist.symmetric_pairs(rng.standard_normal((2, 2)),
                                              [0.5, 0.3], zero_prob=0.2)
            for _ in range(n))
        law = ProductLaw(comps)
        for alpha in (0.25, 0.5, 1.0):
            lower, upper = proxy_bound_check(law, euclidean(2), alpha)
            assert lower.holds and upper.holds


def test_proxy_bound_alpha_validation():
    law = ProductLaw((RAD,))
    with pytest.raises(ParameterError):
        proxy_bound_check(law, absolute_value(), 0.0)


# ---------------------------------------------------------------------------
# conditional convexity of the proxy integrand


def test_integrand_domination_under_thinning():
    # Thinning makes a source more peaked, so the integrand's law drops.
    ys = tuple(FiniteSupportDist.rademacher(v) for v in (1.0, 0.8, 1.2))
    xs = tuple(thin(y, 0.5) for y in ys)
    reports = conditional_convexity_check(
        ProductLaw(xs), ProductLaw(ys), absolute_value(),
        t_grid=[0.0, 0.25, 0.5, 1.0], precheck_norms=FAMILY1)
    for rep in reports:
        assert rep.holds, rep.name


def test_integrand_precheck_failure():
    with pytest.raises(PreconditionError, match="dominated"):
        conditional_convexity_check(
            ProductLaw((RAD,)), ProductLaw((HALF,)), absolute_value(),
            t_grid=[0.0], precheck_norms=(scale_norm(absolute_value(), 1.5),))


# ---------------------------------------------------------------------------
# full-size experiments


def test_tensorisation_holds_on_finite_pairs():
    pairs = [(HALF, RAD), (HALF, RAD), (FiniteSupportDist.rademacher(0.25), RAD)]
    rep = tensorisation_experiment(pairs, kappa=1.0, lam=1.0, alpha=1.0,
                                   norms=FAMILY1, estimator=EXACT, seed=1)
    assert rep.overall == "holds"
    assert rep.kappa == 16.0 and rep.lam == 2.0
    assert rep.meta["experiment"] == "tensorisation"


def test_tensorisation_constants_alpha_half():
    pairs = [(HALF, RAD)]
    rep = tensorisation_experiment(pairs, kappa=1.5, lam=1.0, alpha=0.5,
                                   norms=FAMILY1[:2], estimator=EXACT, seed=1)
    # kappa' = 16/alpha * ceil(kappa) = 64, lambda' = (1+alpha) ceil(kappa) = 3.
    assert rep.kappa == 64.0 and rep.lam == 3.0


def test_tensorisation_recheck_catches_bad_pair():
    pairs = [(RAD, HALF)]
    with pytest.raises(PreconditionError, match="premise"):
        tensorisation_experiment(pairs, kappa=1.0, lam=1.0, alpha=1.0,
                                 norms=(scale_norm(absolute_value(), 1.5),),
                                 estimator=EXACT, seed=1)


def test_reduction_routes():
    pairs = [(HALF, RAD), (HALF, RAD)]
    split = reduction_experiment(pairs, kappa=1.0, lam=1.0, alpha=1.0,
                                 route="split", norms=FAMILY1[:3],
                                 estimator=EXACT, seed=1)
    thin_rep = reduction_experiment(pairs, kappa=1.0, lam=1.0, alpha=1.0,
                                    route="thin", norms=FAMILY1[:3],
                                    estimator=EXACT, seed=1)
    assert split.kappa == 16.0 and split.lam == 2.0
    assert thin_rep.kappa == 64.0 and thin_rep.lam == 4.0
    assert split.overall == "holds" and thin_rep.overall == "holds"
    with pytest.raises(ParameterError, match="route"):
        reduction_experiment(pairs, kappa=1.0, lam=1.0, alpha=1.0,
                             route="other", norms=FAMILY1[:1],
                             estimator=EXACT)


def test_removedelta_holds():
    rng = np.random.default_rng(11)
    for _ in range(5):
        vectors = rng.standard_normal((6, 2))
        for p in (0.25, 0.5, 1.0):
            assert removedelta_check(vectors, euclidean(2), p).holds


def test_removedelta_cap():
    vectors = np.ones((REMOVEDELTA_CAP + 1, 1))
    with pytest.raises(Exception, match="cap"):
        removedelta_check(vectors, absolute_value(), 0.5)


def test_report_serialization():
    query = DominationQuery(x=HALF, y=RAD, kappa=1.0, lam=1.0,
                            norms=tuple(FAMILY1[:2]), estimator=EXACT)
    rep = check_domination(query)
    blob = rep.to_json()
    assert blob["overall"] == "holds"
    assert len(blob["records"]) == 2
    assert len(rep.scatter_rows()) == 2
