"""Scenario and system documents (YAML) plus the built-in scenario registry.

Polynomials are written as term lists, each term ``[coeff, [e_1, ..., e_n]]``
or ``{coeff: c, exponents: [...]}``.  Every parse failure raises
:class:`ConfigError` naming the offending field.
"""
from __future__ import annotations

import copy
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import AffgenError, DomainError
from .exterior import Metric
from .riemann import MetricField, ScalarField, VectorFieldHandle, euclidean_gradient


class ConfigError(AffgenError, ValueError):
    """Malformed configuration document."""

    def __init__(self, field: str, message: str, source: str | None = None):
        where = f"{source}: " if source else ""
        super().__init__(f"{where}field '{field}': {message}")
        self.field = field
        self.source = source


# ---------------------------------------------------------------------------
# named base fields

EULER_TOP_AXES = (1.0, 2.0, 3.0)


def euler_top_integrals(axes=EULER_TOP_AXES) -> tuple[ScalarField, ScalarField]:
    """``I1 = |x|^2 / 2`` and ``I2 = sum x_i^2 / (2 a_i)`` in R^3."""
    I1 = ScalarField(3, [(0.5, (2, 0, 0)), (0.5, (0, 2, 0)), (0.5, (0, 0, 2))])
    I2 = ScalarField(3, [(0.5 / axes[0], (2, 0, 0)), (0.5 / axes[1], (0, 2, 0)), (0.5 / axes[2], (0, 0, 2))])
    return I1, I2


def _euler_top_field(n: int) -> VectorFieldHandle:
    if n != 3:
        raise ConfigError("base_field", f"'euler-top' needs dim 3, scenario has dim {n}")
    I1, I2 = euler_top_integrals()
    return VectorFieldHandle(3, lambda x: np.cross(euclidean_gradient(I1, x), euclidean_gradient(I2, x)), "euler-top")


BASE_FIELDS = {
    "euler-top": _euler_top_field,
    "zero": VectorFieldHandle.zero,
}


# ---------------------------------------------------------------------------
# built-in scenarios (as documents, so they go through the same parser)


def _quadratic(weights) -> list:
    n = len(weights)
    return [[0.5 * w, [2 if j == i else 0 for j in range(n)]] for i, w in enumerate(weights)]


def _builtin_documents() -> dict[str, dict]:
    a = EULER_TOP_AXES
    chain_axes = (1.0, 2.0, 3.0, 4.0)
    return {
        "euler-top": {
            "name": "euler-top",
            "dim": 3,
            "metric": "identity",
            "conserved": [_quadratic([1, 1, 1]), _quadratic([1 / c for c in a])],
            "direction_coeffs": [[[1.0, [0, 0, 0]]]],
            "x0": [1.0, 1.0, 1.0],
            "dt": 1e-3,
            "steps": 10000,
            "tol": 1e-6,
        },
        "damped-radial": {
            "name": "damped-radial",
            "dim": 2,
            "metric": "identity",
            "dissipated": [_quadratic([1, 1])],
            "rates": [[[-1.0, [2, 0]], [-1.0, [0, 2]]]],
            "x0": [1.0, 0.0],
            "dt": 1e-3,
            "steps": 1000,
            "tol": 1e-6,
        },
        "integrable-chain": {
            "name": "integrable-chain",
            "dim": 4,
            "metric": "identity",
            "conserved": [_quadratic([c**l for c in chain_axes]) for l in range(3)],
            "direction_coeffs": [[[1.0, [0, 0, 0, 0]]]],
            "x0": [1.0, 0.8, 0.6, 0.4],
            "dt": 1e-3,
            "steps": 2000,
            "tol": 1e-6,
        },
    }


BUILTIN_NAMES = tuple(_builtin_documents())


def builtin_document(name: str) -> dict:
    docs = _builtin_documents()
    if name not in docs:
        raise ConfigError("scenario", f"unknown built-in '{name}' (known: {', '.join(docs)})")
    return copy.deepcopy(docs[name])


# ---------------------------------------------------------------------------
# parsing helpers


def load_document(path: str | Path, mapping: bool = True):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read: {exc.strerror}", str(path)) from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"line {mark.line + 1}, column {mark.column + 1}" if mark is not None else "unknown location"
        raise ConfigError("<document>", f"YAML syntax error at {loc}", str(path)) from None
    if not isinstance(doc, dict):
        if mapping:
            raise ConfigError("<document>", "top level must be a mapping", str(path))
        return doc
    doc.setdefault("_source", str(path))
    return doc


def _req(doc: dict, key: str):
    if key not in doc:
        raise ConfigError(key, "missing required field", doc.get("_source"))
    return doc[key]


def _int(doc: dict, key: str, value, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(key, f"expected an integer, got {value!r}", doc.get("_source"))
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {value}", doc.get("_source"))
    return value


def _float(doc: dict, key: str, value) -> float:
    if isinstance(value, bool):
        raise ConfigError(key, f"expected a number, got {value!r}", doc.get("_source"))
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {value!r}", doc.get("_source")) from None
    if not np.isfinite(out):
        raise ConfigError(key, f"must be finite, got {value!r}", doc.get("_source"))
    return out


def _vector(doc: dict, key: str, value, n: int) -> np.ndarray:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(key, f"expected a list of {n} numbers", doc.get("_source"))
    if len(value) != n:
        raise ConfigError(key, f"expected {n} entries, got {len(value)}", doc.get("_source"))
    return np.array([_float(doc, f"{key}[{i}]", v) for i, v in enumerate(value)])


def _vectors(doc: dict, key: str, n: int) -> list[np.ndarray]:
    value = doc.get(key) or []
    if not isinstance(value, list):
        raise ConfigError(key, "expected a list of vectors", doc.get("_source"))
    return [_vector(doc, f"{key}[{i}]", v, n) for i, v in enumerate(value)]


def parse_metric(doc: dict, n: int) -> Metric:
    entry = doc.get("metric", "identity")
    src = doc.get("_source")
    try:
        if entry == "identity" or entry is None:
            return Metric.identity(n)
        if isinstance(entry, dict) and "diagonal" in entry:
            return Metric.diagonal(_vector(doc, "metric.diagonal", entry["diagonal"], n))
        if isinstance(entry, dict) and "matrix" in entry:
            rows = entry["matrix"]
            if not isinstance(rows, list) or len(rows) != n:
                raise ConfigError("metric.matrix", f"expected {n} rows", src)
            return Metric(np.vstack([_vector(doc, f"metric.matrix[{i}]", r, n) for i, r in enumerate(rows)]))
    except DomainError as exc:
        raise ConfigError("metric", str(exc), src) from None
    raise ConfigError("metric", "expected 'identity', {diagonal: [...]} or {matrix: [[...]]}", src)


def parse_polynomial(doc: dict, key: str, value, n: int) -> ScalarField:
    src = doc.get("_source")
    if isinstance(value, dict):
        if "terms" not in value:
            raise ConfigError(key, "polynomial mapping needs a 'terms' list", src)
        value = value["terms"]
        key = f"{key}.terms"
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return ScalarField.constant(n, float(value))
    if not isinstance(value, list):
        raise ConfigError(key, "expected a list of terms [coeff, [exponents]]", src)
    terms = []
    for t, term in enumerate(value):
        tkey = f"{key}[{t}]"
        if isinstance(term, dict):
            if "coeff" not in term or "exponents" not in term:
                raise ConfigError(tkey, "term mapping needs 'coeff' and 'exponents'", src)
            c, e = term["coeff"], term["exponents"]
        elif isinstance(term, list) and len(term) == 2:
            c, e = term
        else:
            raise ConfigError(tkey, "expected [coeff, [exponents]]", src)
        c = _float(doc, f"{tkey}.coeff", c)
        if not isinstance(e, list) or len(e) != n:
            raise ConfigError(f"{tkey}.exponents", f"expected {n} non-negative integers", src)
        e = [_int(doc, f"{tkey}.exponents[{i}]", v, 0) for i, v in enumerate(e)]
        terms.append((c, tuple(e)))
    return ScalarField(n, terms)


def _polys(doc: dict, key: str, n: int) -> tuple[ScalarField, ...]:
    value = doc.get(key)
    if value is None:
        return ()
    if not isinstance(value, list):
        raise ConfigError(key, "expected a list of polynomials", doc.get("_source"))
    return tuple(parse_polynomial(doc, f"{key}[{i}]", v, n) for i, v in enumerate(value))


# ---------------------------------------------------------------------------
# documents -> objects


def parse_scenario(doc: dict):
    """Build a :class:`~affgen.dynamics.Scenario` from a parsed document."""
    from .dynamics import Scenario

    src = doc.get("_source")
    n = _int(doc, "dim", _req(doc, "dim"), 1)
    metric = parse_metric(doc, n)
    conserved = _polys(doc, "conserved", n)
    dissipated = _polys(doc, "dissipated", n)
    rates = _polys(doc, "rates", n)
    if len(rates) != len(dissipated):
        raise ConfigError("rates", f"{len(dissipated)} dissipated quantities but {len(rates)} rates", src)
    coeffs = doc.get("direction_coeffs")
    direction = None if coeffs is None else _polys(doc, "direction_coeffs", n)
    base = doc.get("base_field")
    base_field = None
    if base is not None:
        if base not in BASE_FIELDS:
            raise ConfigError("base_field", f"unknown base field {base!r} (known: {', '.join(BASE_FIELDS)})", src)
        base_field = BASE_FIELDS[base](n)
    x0 = _vector(doc, "x0", _req(doc, "x0"), n)
    dt = _float(doc, "dt", _req(doc, "dt"))
    if dt <= 0:
        raise ConfigError("dt", f"must be positive, got {dt}", src)
    steps = _int(doc, "steps", _req(doc, "steps"), 1)
    tol = _float(doc, "tol", doc.get("tol", 1e-6))
    try:
        return Scenario(
            dim=n,
            metric=MetricField.constant(metric),
            conserved=conserved,
            dissipated=dissipated,
            rates=rates,
            x0=tuple(x0),
            dt=dt,
            steps=steps,
            base_field=base_field,
            direction_coeffs=direction,
            tol=tol,
            name=str(doc.get("name", "")),
        )
    except DomainError as exc:
        raise ConfigError("<scenario>", str(exc), src) from None


def load_scenario(ref: str):
    """Resolve ``ref`` as a built-in name or a YAML path and parse it."""
    if ref in BUILTIN_NAMES:
        return parse_scenario(builtin_document(ref))
    if not Path(ref).exists():
        raise ConfigError("scenario", f"{ref!r} is neither a built-in ({', '.join(BUILTIN_NAMES)}) nor a file")
    return parse_scenario(load_document(ref))


def parse_system(doc: dict):
    """Build a :class:`~affgen.intersect.HyperplaneSystem` (lets rank errors through)."""
    from .intersect import HyperplaneSystem

    src = doc.get("_source")
    n = _int(doc, "dim", _req(doc, "dim"), 1)
    metric = parse_metric(doc, n)
    v = _vectors(doc, "v", n)
    w = _vectors(doc, "w", n)
    lam = doc.get("lambda", [])
    if not isinstance(lam, list):
        raise ConfigError("lambda", "expected a list of numbers", src)
    if len(lam) != len(w):
        raise ConfigError("lambda", f"{len(w)} affine normals but {len(lam)} offsets", src)
    lam = [_float(doc, f"lambda[{i}]", c) for i, c in enumerate(lam)]
    if len(v) + len(w) > n:
        raise ConfigError("v/w", f"k + p = {len(v) + len(w)} exceeds dim {n}", src)
    return HyperplaneSystem(n, v, w, lam, metric)


def parse_points(doc: Any, n: int, source: str | None = None) -> list[np.ndarray]:
    if isinstance(doc, dict):
        if "points" not in doc:
            raise ConfigError("points", "missing required field", source)
        doc = doc["points"]
    if not isinstance(doc, list) or not doc:
        raise ConfigError("points", "expected a non-empty list of points", source)
    holder = {"_source": source}
    return [_vector(holder, f"points[{i}]", p, n) for i, p in enumerate(doc)]
