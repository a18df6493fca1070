"""Experiment configuration: a strict JSON schema.

Configs are JSON objects.  Unknown keys are rejected everywhere (a typo
must never silently change a constant), every experiment names an explicit
seed (no entropy defaults), and all constants are validated through the
same constructors the library uses.
"""

from __future__ import annotations

import json

from .distributions import (FiniteSupportDist, SamplerSource, bernoulli_thinned,
                            gaussian, pareto_tail, scaled_source, sum_of,
                            symmetric_stable)
from .errors import ParameterError
from .geometry import norm_from_spec, random_norm_family
from .stats import DEFAULT_CONFIDENCE, Estimator

EXPERIMENT_KINDS = ("tail", "domination", "tensorize", "wb", "wb-sum",
                    "majorize", "schur", "counterexample", "inequality-suite")


def _check_keys(obj: dict, allowed, context: str):
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ParameterError(f"{context}: unknown key(s) {sorted(unknown)}")


def _require(obj: dict, keys, context: str):
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ParameterError(f"{context}: missing required key(s) {missing}")


# ---------------------------------------------------------------------------
# source specs


def source_from_spec(spec: dict, context: str = "source"):
    if not isinstance(spec, dict):
        raise ParameterError(f"{context}: expected an object")
    _require(spec, ["family"], context)
    fam = spec["family"]
    if fam == "finite":
        _check_keys(spec, {"family", "atoms"}, context)
        _require(spec, ["atoms"], context)
        atoms = tuple((tuple(float(x) for x in vec), float(p))
                      for vec, p in spec["atoms"])
        return FiniteSupportDist(dimension=len(atoms[0][0]), atoms=atoms)
    if fam == "gaussian":
        _check_keys(spec, {"family", "covariance"}, context)
        _require(spec, ["covariance"], context)
        return gaussian(spec["covariance"])
    if fam == "symmetric_stable":
        _check_keys(spec, {"family", "index", "scale"}, context)
        _require(spec, ["index"], context)
        return symmetric_stable(float(spec["index"]), float(spec.get("scale", 1.0)))
    if fam == "pareto_tail":
        _check_keys(spec, {"family", "exponent"}, context)
        _require(spec, ["exponent"], context)
        return pareto_tail(float(spec["exponent"]))
    if fam == "bernoulli_thinned":
        _check_keys(spec, {"family", "keep", "inner"}, context)
        _require(spec, ["keep", "inner"], context)
        return bernoulli_thinned(source_from_spec(spec["inner"], context + ".inner"),
                                 float(spec["keep"]))
    if fam == "scaled":
        _check_keys(spec, {"family", "factor", "inner"}, context)
        _require(spec, ["factor", "inner"], context)
        return scaled_source(source_from_spec(spec["inner"], context + ".inner"),
                             float(spec["factor"]))
    if fam == "sum_of":
        _check_keys(spec, {"family", "parts"}, context)
        _require(spec, ["parts"], context)
        return sum_of([source_from_spec(p, f"{context}.parts[{i}]")
                       for i, p in enumerate(spec["parts"])])
    raise ParameterError(f"{context}: unknown source family {fam!r}")


def source_to_spec(source) -> dict:
    if isinstance(source, FiniteSupportDist):
        return {"family": "finite",
                "atoms": [[list(v), p] for v, p in source.atoms]}
    if isinstance(source, SamplerSource):
        fam, par = source.family, source.params
        if fam == "gaussian":
            return {"family": "gaussian",
                    "covariance": [list(r) for r in par["covariance"]]}
        if fam == "symmetric_stable":
            return {"family": "symmetric_stable", "index": par["index"],
                    "scale": par["scale"]}
        if fam == "pareto_tail":
            return {"family": "pareto_tail", "exponent": par["exponent"]}
        if fam == "bernoulli_thinned":
            return {"family": "bernoulli_thinned", "keep": par["keep"],
                    "inner": source_to_spec(par["inner"])}
        if fam == "scaled":
            return {"family": "scaled", "factor": par["factor"],
                    "inner": source_to_spec(par["inner"])}
        if fam == "sum_of":
            return {"family": "sum_of",
                    "parts": [source_to_spec(p) for p in par["parts"]]}
    raise ParameterError(f"cannot serialize source {source!r}")


# ---------------------------------------------------------------------------
# norm family specs


def norms_from_spec(spec, context: str = "norms"):
    if isinstance(spec, dict) and "random" in spec:
        _check_keys(spec, {"random"}, context)
        rnd = spec["random"]
        _check_keys(rnd, {"seed", "dimension", "size", "mix"}, context + ".random")
        _require(rnd, ["seed", "dimension", "size"], context + ".random")
        return random_norm_family(int(rnd["seed"]), int(rnd["dimension"]),
                                  int(rnd["size"]), rnd.get("mix", "default"))
    if isinstance(spec, dict) and "list" in spec:
        _check_keys(spec, {"list"}, context)
        return [norm_from_spec(s) for s in spec["list"]]
    raise ParameterError(f"{context}: expected an object with 'random' or 'list'")


def estimator_from_spec(spec, context: str = "estimator") -> Estimator:
    if not isinstance(spec, dict):
        raise ParameterError(f"{context}: expected an object")
    _check_keys(spec, {"kind", "budget", "confidence"}, context)
    _require(spec, ["kind"], context)
    return Estimator(kind=spec["kind"], budget=int(spec.get("budget", 10**6)),
                     confidence=float(spec.get("confidence", DEFAULT_CONFIDENCE)))


# ---------------------------------------------------------------------------
# experiment configs

_COMMON_KEYS = {"kind", "seed", "comment"}

_KIND_KEYS = {
    "tail": {"source", "norms", "thresholds", "estimator", "dump_samples"},
    "domination": {"x", "y", "kappa", "lambda", "norms", "estimator"},
    "tensorize": {"pairs", "kappa", "lambda", "alpha", "norms", "estimator",
                  "recheck"},
    "wb": {"source", "C", "delta", "theta", "norms", "lambda_grid", "estimator"},
    "wb-sum": {"components", "iid", "n", "C", "delta", "theta", "norms",
               "lambda_grid", "estimator", "component_estimator", "recheck"},
    "majorize": {"a", "b"},
    "schur": {"a", "b", "component", "norm"},
    "counterexample": {"delta", "n_grid", "kappa", "lambda", "budget"},
    "inequality-suite": {"instances", "max_n", "dimension", "product_laws",
                         "max_components"},
}

_KIND_REQUIRED = {
    "tail": ["source", "norms", "thresholds", "estimator"],
    "domination": ["x", "y", "kappa", "lambda", "norms", "estimator"],
    "tensorize": ["pairs", "kappa", "lambda", "alpha", "norms", "estimator"],
    "wb": ["source", "C", "delta", "theta", "norms", "lambda_grid", "estimator"],
    "wb-sum": ["C", "delta", "theta", "norms", "lambda_grid", "estimator"],
    "majorize": ["a", "b"],
    "schur": ["a", "b", "component", "norm"],
    "counterexample": ["delta", "n_grid", "kappa", "lambda"],
    "inequality-suite": ["instances", "max_n", "dimension", "product_laws"],
}


def validate_config(raw: dict) -> dict:
    """Validate a parsed config object; returns a resolved config dict.

    The resolved dict keeps the raw values plus parsed objects under
    private keys; it is what the runner consumes.
    """
    if not isinstance(raw, dict):
        raise ParameterError("config: top level must be a JSON object")
    _require(raw, ["kind", "seed"], "config")
    kind = raw["kind"]
    if kind not in EXPERIMENT_KINDS:
        raise ParameterError(f"config: unknown experiment kind {kind!r}")
    if not isinstance(raw["seed"], int):
        raise ParameterError("config: seed must be an integer (no entropy defaults)")
    _check_keys(raw, _COMMON_KEYS | _KIND_KEYS[kind], "config")
    _require(raw, _KIND_REQUIRED[kind], f"config[{kind}]")

    resolved = dict(raw)
    if kind == "tail":
        resolved["_source"] = source_from_spec(raw["source"])
        resolved["_norms"] = norms_from_spec(raw["norms"])
        resolved["_estimator"] = estimator_from_spec(raw["estimator"])
        if not raw["thresholds"]:
            raise ParameterError("config[tail]: thresholds must be nonempty")
    elif kind == "domination":
        resolved["_x"] = source_from_spec(raw["x"], "x")
        resolved["_y"] = source_from_spec(raw["y"], "y")
        resolved["_norms"] = norms_from_spec(raw["norms"])
        resolved["_estimator"] = estimator_from_spec(raw["estimator"])
    elif kind == "tensorize":
        pairs = []
        for i, pair in enumerate(raw["pairs"]):
            _check_keys(pair, {"x", "y"}, f"pairs[{i}]")
            _require(pair, ["x", "y"], f"pairs[{i}]")
            pairs.append((source_from_spec(pair["x"], f"pairs[{i}].x"),
                          source_from_spec(pair["y"], f"pairs[{i}].y")))
        resolved["_pairs"] = pairs
        resolved["_norms"] = norms_from_spec(raw["norms"])
        resolved["_estimator"] = estimator_from_spec(raw["estimator"])
        if not (0.0 < float(raw["alpha"]) <= 1.0):
            raise ParameterError("config[tensorize]: alpha must lie in (0, 1]")
    elif kind == "wb":
        from .weakborell import WBParams

        resolved["_source"] = source_from_spec(raw["source"])
        resolved["_params"] = WBParams(C=float(raw["C"]), delta=float(raw["delta"]),
                                       theta=float(raw["theta"]))
        resolved["_norms"] = norms_from_spec(raw["norms"])
        resolved["_estimator"] = estimator_from_spec(raw["estimator"])
    elif kind == "wb-sum":
        from .weakborell import WBParams

        if "components" in raw:
            comps = [source_from_spec(c, f"components[{i}]")
                     for i, c in enumerate(raw["components"])]
        elif "iid" in raw and "n" in raw:
            comps = [source_from_spec(raw["iid"], "iid")] * int(raw["n"])
        else:
            raise ParameterError("config[wb-sum]: need components or iid + n")
        resolved["_components"] = comps
        resolved["_params"] = WBParams(C=float(raw["C"]), delta=float(raw["delta"]),
                                       theta=float(raw["theta"]))
        resolved["_norms"] = norms_from_spec(raw["norms"])
        resolved["_estimator"] = estimator_from_spec(raw["estimator"])
        if "component_estimator" in raw:
            resolved["_component_estimator"] = estimator_from_spec(
                raw["component_estimator"], "component_estimator")
    elif kind == "majorize":
        if len(raw["a"]) != len(raw["b"]):
            raise ParameterError("config[majorize]: a and b must have equal length")
    elif kind == "schur":
        comp = source_from_spec(raw["component"], "component")
        if not isinstance(comp, FiniteSupportDist):
            raise ParameterError("config[schur]: component must be a finite source")
        resolved["_component"] = comp
        resolved["_norm"] = norm_from_spec(raw["norm"])
    elif kind == "counterexample":
        if not (0.0 < float(raw["delta"]) < 1.0):
            raise ParameterError("config[counterexample]: delta must lie in (0, 1)")
        if not raw["n_grid"]:
            raise ParameterError("config[counterexample]: n_grid must be nonempty")
    elif kind == "inequality-suite":
        if int(raw["instances"]) < 1 or int(raw["product_laws"]) < 0:
            raise ParameterError("config[inequality-suite]: bad counts")
    return resolved


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}")
    return validate_config(raw)
