"""Continuous norms on R^d and their unit balls.

Closed symmetric convex bodies are represented through their Minkowski
gauges, i.e. only as norms: membership of x in the body is evaluate(x) <= 1.
All evaluators are pure, accept single vectors or (m, d) batches, and are
safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .rng import substream

ELLIPSOID_CONDITION_CAP = 1e3


def _as_batch(x, d):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[-1] != d:
        raise ParameterError(f"vector dimension {x.shape[-1]} != norm dimension {d}")
    return x, single


def _ret(vals, single):
    return float(vals[0]) if single else vals


@dataclass(frozen=True)
class LpNorm:
    dimension: int
    p: float  # in [1, inf]

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ParameterError("lp norm needs p >= 1")

    def evaluate(self, x):
        x, single = _as_batch(x, self.dimension)
        return _ret(np.linalg.norm(x, ord=self.p, axis=-1), single)


@dataclass(frozen=True)
class WeightedLpNorm:
    dimension: int
    p: float
    weights: tuple

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ParameterError("weighted lp norm needs p >= 1")
        if len(self.weights) != self.dimension or any(w <= 0 for w in self.weights):
            raise ParameterError("weights must be positive, one per coordinate")

    def evaluate(self, x):
        x, single = _as_batch(x, self.dimension)
        w = np.asarray(self.weights)
        return _ret(np.linalg.norm(x * w, ord=self.p, axis=-1), single)


@dataclass(frozen=True)
class EllipsoidNorm:
    """||x|| = sqrt(x^T A x) for symmetric positive-definite A."""

    matrix: tuple  # row tuples, for hashability

    def __post_init__(self):
        a = self._a()
        if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.allclose(a, a.T, atol=1e-10):
            raise ParameterError("ellipsoid matrix must be symmetric square")
        if np.linalg.eigvalsh(a).min() <= 0:
            raise ParameterError("ellipsoid matrix must be positive definite")

    def _a(self):
        return np.array(self.matrix, dtype=float)

    @property
    def dimension(self):
        return len(self.matrix)

    def evaluate(self, x):
        x, single = _as_batch(x, self.dimension)
        q = np.einsum("md,de,me->m", x, self._a(), x)
        return _ret(np.sqrt(np.maximum(q, 0.0)), single)


@dataclass(frozen=True)
class PolytopeGauge:
    """||x|| = max_j |<u_j, x>| for directions u_j spanning R^d."""

    directions: tuple  # row tuples

    def __post_init__(self):
        u = self._u()
        if np.linalg.matrix_rank(u) < u.shape[1]:
            raise ParameterError("polytope gauge directions must span R^d")

    def _u(self):
        return np.array(self.directions, dtype=float)

    @property
    def dimension(self):
        return len(self.directions[0])

    def evaluate(self, x):
        x, single = _as_batch(x, self.dimension)
        return _ret(np.abs(x @ self._u().T).max(axis=-1), single)


@dataclass(frozen=True)
class ScaledNorm:
    inner: object
    factor: float

    def __post_init__(self):
        if self.factor <= 0:
            raise ParameterError("scale factor must be positive")

    @property
    def dimension(self):
        return self.inner.dimension

    def evaluate(self, x):
        return self.factor * self.inner.evaluate(x)


def scale_norm(norm, factor: float):
    """scaled(N, c): evaluates to c * N(x); the unit ball shrinks by 1/c."""
    return ScaledNorm(inner=norm, factor=float(factor))


def euclidean(d: int) -> LpNorm:
    return LpNorm(dimension=d, p=2.0)


def absolute_value() -> LpNorm:
    return LpNorm(dimension=1, p=2.0)


# ---------------------------------------------------------------------------
# serialization


def norm_to_spec(norm) -> dict:
    if isinstance(norm, LpNorm):
        return {"variant": "lp", "dimension": norm.dimension,
                "p": "inf" if np.isinf(norm.p) else norm.p}
    if isinstance(norm, WeightedLpNorm):
        return {"variant": "weighted_lp", "dimension": norm.dimension,
                "p": "inf" if np.isinf(norm.p) else norm.p,
                "weights": list(norm.weights)}
    if isinstance(norm, EllipsoidNorm):
        return {"variant": "ellipsoid", "matrix": [list(r) for r in norm.matrix]}
    if isinstance(norm, PolytopeGauge):
        return {"variant": "polytope_gauge",
                "directions": [list(r) for r in norm.directions]}
    if isinstance(norm, ScaledNorm):
        return {"variant": "scaled", "factor": norm.factor,
                "inner": norm_to_spec(norm.inner)}
    raise ParameterError(f"unknown norm type {type(norm).__name__}")


def norm_from_spec(spec: dict):
    spec = dict(spec)
    variant = spec.pop("variant", None)
    if variant == "lp":
        p = spec["p"]
        return LpNorm(dimension=int(spec["dimension"]),
                      p=np.inf if p in ("inf", None) else float(p))
    if variant == "weighted_lp":
        p = spec["p"]
        return WeightedLpNorm(dimension=int(spec["dimension"]),
                              p=np.inf if p == "inf" else float(p),
                              weights=tuple(float(w) for w in spec["weights"]))
    if variant == "ellipsoid":
        return EllipsoidNorm(matrix=tuple(tuple(float(v) for v in r)
                                          for r in spec["matrix"]))
    if variant == "polytope_gauge":
        return PolytopeGauge(directions=tuple(tuple(float(v) for v in r)
                                              for r in spec["directions"]))
    if variant == "scaled":
        return ScaledNorm(inner=norm_from_spec(spec["inner"]),
                          factor=float(spec["factor"]))
    raise ParameterError(f"unknown norm variant {variant!r}")


def family_to_json(norms) -> list:
    return [norm_to_spec(n) for n in norms]


# ---------------------------------------------------------------------------
# random families


def _random_ellipsoid(rng, d):
    z = rng.standard_normal((d, d))
    q, _ = np.linalg.qr(z)
    cond = 10.0 ** rng.uniform(0.0, np.log10(ELLIPSOID_CONDITION_CAP))
    eig = np.exp(rng.uniform(0.0, 1.0, size=d))
    eig = 1.0 + (eig - eig.min()) / max(eig.max() - eig.min(), 1e-12) * (cond - 1.0)
    scale = 10.0 ** rng.uniform(-0.5, 0.5)
    a = (q * (scale * eig)) @ q.T
    a = (a + a.T) / 2.0
    return EllipsoidNorm(matrix=tuple(tuple(row) for row in a))


def _random_polytope(rng, d):
    m = int(rng.integers(d, 4 * d + 1))
    u = rng.standard_normal((m, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    if np.linalg.matrix_rank(u) < d:
        u = np.vstack([u, np.eye(d)])  # guarantee spanning
    return PolytopeGauge(directions=tuple(tuple(row) for row in u))


def _random_weighted(rng, d):
    w = 10.0 ** rng.uniform(-1.0, 1.0, size=d)
    p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
    return WeightedLpNorm(dimension=d, p=p, weights=tuple(w))


def random_norm_family(seed: int, d: int, size: int, mix: str = "default"):
    """Deterministic adversarial family of ``size`` norms on R^d.

    The default mix always opens with the l1, l2 and l-infinity norms and
    then cycles through random ellipsoids (condition number capped),
    polytope gauges with at most 4d unit directions, weighted lp norms and
    rescalings.  mix="lp-only" yields lp norms only (euclidean first).
    """
    if size < 1:
        raise ParameterError("family size must be >= 1")
    rng = substream(seed, 0)
    norms = []
    if mix == "lp-only":
        ps = [2.0, 1.0, np.inf, 1.5, 3.0, 4.0]
        for i in range(size):
            p = ps[i % len(ps)]
            norm = LpNorm(dimension=d, p=p)
            if i >= len(ps):
                norm = scale_norm(norm, 10.0 ** rng.uniform(-0.5, 0.5))
            norms.append(norm)
        return norms
    if mix != "default":
        raise ParameterError(f"unknown norm mix {mix!r}")
    base = [LpNorm(dimension=d, p=2.0), LpNorm(dimension=d, p=1.0),
            LpNorm(dimension=d, p=np.inf)]
    norms.extend(base[:size])
    makers = [_random_ellipsoid, _random_polytope, _random_weighted]
    i = 0
    while len(norms) < size:
        norm = makers[i % len(makers)](rng, d)
        if rng.random() < 0.3:
            norm = scale_norm(norm, 10.0 ** rng.uniform(-0.5, 0.5))
        norms.append(norm)
        i += 1
    return norms
