"""Pointwise lift of the hyperplane solver to vector fields on a chart.

A "manifold" here is an open region of R^n carrying a metric field.  Scalar
fields are polynomials so their gradients are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels as K
from .errors import DomainError, RegionTooLargeError
from .exterior import Metric, Multivector, wedge, wedge_vectors
from .intersect import (
    COMPLETION_TOL,
    HyperplaneSystem,
    check_independent,
    relative_smallest_singular_value,
    solve_intersection,
)


def _point(x, n: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size != n:
        raise DomainError(f"point has {arr.size} coordinates, expected {n}")
    return arr


class ScalarField:
    """Polynomial ``sum_t c_t * prod_i x_i**e_{t,i}`` in ``dim`` variables."""

    __slots__ = ("dim", "coeffs", "exponents")

    def __init__(self, dim: int, terms: Sequence = ()):
        dim = int(dim)
        if dim < 1:
            raise DomainError(f"dimension must be positive, got {dim}")
        # like monomials are merged, first occurrence fixes the order
        merged: dict[tuple[int, ...], float] = {}
        for t, term in enumerate(terms):
            c, e = term
            e = tuple(int(v) for v in e)
            if len(e) != dim:
                raise DomainError(f"term {t}: exponent vector has length {len(e)}, expected {dim}")
            if any(v < 0 for v in e):
                raise DomainError(f"term {t}: negative exponent in {e}")
            merged[e] = merged.get(e, 0.0) + float(c)
        coeffs = list(merged.values())
        exps = list(merged)
        self.dim = dim
        self.coeffs = np.array(coeffs, dtype=float)
        self.exponents = np.array(exps, dtype=np.int64).reshape(len(exps), dim)
        self.coeffs.setflags(write=False)
        self.exponents.setflags(write=False)

    @classmethod
    def constant(cls, dim: int, value: float) -> "ScalarField":
        return cls(dim, [(value, (0,) * dim)])

    @classmethod
    def zero(cls, dim: int) -> "ScalarField":
        return cls(dim, [])

    @property
    def terms(self) -> list[tuple[float, tuple[int, ...]]]:
        return [(float(c), tuple(int(v) for v in e)) for c, e in zip(self.coeffs, self.exponents)]

    def __call__(self, x) -> float:
        return eval_field(self, x)

    def gradient(self, x) -> np.ndarray:
        return euclidean_gradient(self, x)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        if not isinstance(other, ScalarField):
            return NotImplemented
        if other.dim != self.dim:
            raise DomainError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return ScalarField(self.dim, self.terms + other.terms)

    def __mul__(self, c) -> "ScalarField":
        if isinstance(c, ScalarField):
            return NotImplemented
        return ScalarField(self.dim, [(float(c) * a, e) for a, e in self.terms])

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return self * -1.0

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def __repr__(self) -> str:
        return f"ScalarField(dim={self.dim}, terms={self.terms!r})"


def eval_field(f: ScalarField, x) -> float:
    return float(K.poly_eval(f.coeffs, f.exponents, _point(x, f.dim)))


def euclidean_gradient(f: ScalarField, x) -> np.ndarray:
    return K.poly_grad(f.coeffs, f.exponents, _point(x, f.dim))


def finite_difference_gradient(f: Callable, x, step: float = 1e-6) -> np.ndarray:
    """Central differences with step ``step * max(1, |x_i|)``; a cross-check only."""
    x = np.asarray(x, dtype=float).ravel()
    out = np.empty_like(x)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (f(xp) - f(xm)) / (2 * h)
    return out


class MetricField:
    """Metric depending (possibly) on the base point."""

    __slots__ = ("dim", "_constant", "_fn")

    def __init__(self, dim: int, metric: Metric | None = None, fn: Callable | None = None):
        if (metric is None) == (fn is None):
            raise DomainError("MetricField needs exactly one of a constant metric or a callable")
        if metric is not None and metric.dim != dim:
            raise DomainError(f"metric dimension {metric.dim} does not match {dim}")
        self.dim = int(dim)
        self._constant = metric
        self._fn = fn

    @classmethod
    def constant(cls, metric) -> "MetricField":
        if not isinstance(metric, Metric):
            metric = Metric(metric)
        return cls(metric.dim, metric=metric)

    @classmethod
    def identity(cls, n: int) -> "MetricField":
        return cls.constant(Metric.identity(n))

    @classmethod
    def from_callable(cls, dim: int, fn: Callable) -> "MetricField":
        return cls(dim, fn=fn)

    @property
    def is_constant(self) -> bool:
        return self._constant is not None

    def at(self, x) -> Metric:
        if self._constant is not None:
            return self._constant
        x = _point(x, self.dim)
        m = self._fn(x)
        try:
            m = m if isinstance(m, Metric) else Metric(m)
        except DomainError as exc:
            raise DomainError(f"metric invalid at x={tuple(x)}: {exc}") from None
        if m.dim != self.dim:
            raise DomainError(f"metric at x={tuple(x)} has dimension {m.dim}, expected {self.dim}")
        return m


def _as_metric_field(g, n: int | None = None) -> MetricField:
    if isinstance(g, MetricField):
        return g
    if isinstance(g, Metric):
        return MetricField.constant(g)
    if g is None and n is not None:
        return MetricField.identity(n)
    raise DomainError(f"expected a MetricField or Metric, got {type(g).__name__}")


def riemannian_gradient(f: ScalarField, x, g) -> np.ndarray:
    """Solve ``G(x) grad = df(x)``; the vector dual to ``df`` under ``g``."""
    g = _as_metric_field(g, f.dim)
    if g.dim != f.dim:
        raise DomainError(f"metric dimension {g.dim} does not match field dimension {f.dim}")
    x = _point(x, f.dim)
    return g.at(x).raise_index(euclidean_gradient(f, x))


@dataclass(frozen=True)
class VectorFieldHandle:
    """Callable vector field ``x -> R^dim``."""

    dim: int
    evaluate: Callable
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        out = np.asarray(self.evaluate(_point(x, self.dim)), dtype=float).ravel()
        if out.size != self.dim:
            raise DomainError(f"vector field {self.label or '<anon>'} returned {out.size} components, expected {self.dim}")
        return out

    @classmethod
    def constant(cls, vec, label: str = "") -> "VectorFieldHandle":
        v = np.asarray(vec, dtype=float).ravel().copy()
        v.setflags(write=False)
        return cls(v.size, lambda x: v, label)

    @classmethod
    def zero(cls, n: int) -> "VectorFieldHandle":
        return cls.constant(np.zeros(n), "zero")

    def __add__(self, other: "VectorFieldHandle") -> "VectorFieldHandle":
        if other.dim != self.dim:
            raise DomainError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return VectorFieldHandle(self.dim, lambda x: self(x) + other(x), f"{self.label}+{other.label}")


def gradient_field(f: ScalarField, g) -> VectorFieldHandle:
    g = _as_metric_field(g, f.dim)
    return VectorFieldHandle(f.dim, lambda x: riemannian_gradient(f, x, g), "grad")


@dataclass(frozen=True)
class GeneratorSet:
    """Local generators ``{X0} + {generators}`` of an affine distribution."""

    particular: VectorFieldHandle | None
    generators: tuple
    completion: tuple = ()


def _stack(fields: Sequence[VectorFieldHandle], x: np.ndarray, n: int) -> list[np.ndarray]:
    return [f(x) for f in fields]


def _check_fields(X_fields, Y_fields, h_fields, n: int) -> None:
    for f in list(X_fields) + list(Y_fields):
        if f.dim != n:
            raise DomainError(f"vector field of dimension {f.dim} in dimension {n}")
    if len(h_fields) != len(Y_fields):
        raise DomainError(f"{len(Y_fields)} affine fields but {len(h_fields)} rate functions")
    for h in h_fields:
        if h.dim != n:
            raise DomainError(f"scalar field of dimension {h.dim} in dimension {n}")
    if len(X_fields) + len(Y_fields) > n:
        raise DomainError(f"k + p = {len(X_fields) + len(Y_fields)} exceeds dimension {n}")


def pointwise_generators(x, X_fields, Y_fields, h_fields, g):
    """Solve the constraint system at one point.

    Returns ``(X0(x) or None, directions)`` where the directions span the
    ``g(x)``-orthogonal complement of the constraint fields at ``x``.
    """
    g = _as_metric_field(g)
    n = g.dim
    _check_fields(X_fields, Y_fields, h_fields, n)
    x = _point(x, n)
    xs = _stack(X_fields, x, n)
    ys = _stack(Y_fields, x, n)
    _check_rank(ys + xs, x, n)
    sys = HyperplaneSystem(n, xs, ys, [h(x) for h in h_fields], g.at(x))
    sol = solve_intersection(sys)
    x0 = None if sol.particular is None else sol.particular.to_vector()
    return x0, [b.to_vector() for b in sol.basis]


def _check_rank(rows, x, n) -> None:
    if rows:
        check_independent(np.vstack(rows), "constraint fields", point=x)


def frame_completion_field(X_fields, Y_fields, region_sample, dim: int | None = None) -> list[VectorFieldHandle]:
    """Constant standard-basis fields completing the constraint fields on a sample.

    One completion is chosen for the whole sample (greedy by index, every
    sample point must accept each kept ``e_i``).  If no full completion
    survives, the region is too large and the first point that rejected a
    needed candidate is reported.
    """
    pts = [np.asarray(p, dtype=float).ravel() for p in region_sample]
    if not pts:
        raise DomainError("region sample is empty")
    n = dim if dim is not None else pts[0].size
    fields = list(Y_fields) + list(X_fields)
    for f in fields:
        if f.dim != n:
            raise DomainError(f"vector field of dimension {f.dim} in dimension {n}")
    idx = _uniform_completion(fields, pts, n)
    return [VectorFieldHandle.constant(np.eye(n)[i], f"e{i}") for i in idx]


def _uniform_completion(fields, pts, n) -> list[int]:
    frames = []
    for x in pts:
        x = _point(x, n)
        rows = [f(x) for f in fields]
        _check_rank(rows, x, n)
        frames.append(np.vstack(rows) if rows else np.zeros((0, n)))
    need = n - len(fields)
    accs = [wedge_vectors(list(F), n) for F in frames]
    scales = [float(np.prod(np.linalg.norm(F, axis=1))) if F.shape[0] else 1.0 for F in frames]
    chosen: list[int] = []
    first_failure = None
    for i in range(n):
        if len(chosen) == need:
            break
        e = Multivector.basis(n, i)
        trial = [wedge(a, e) for a in accs]
        bad = [j for j, (t, s) in enumerate(zip(trial, scales)) if np.linalg.norm(t.data) <= COMPLETION_TOL * s]
        if bad:
            # only interesting if some other point would have accepted e_i
            if first_failure is None and len(bad) < len(pts):
                first_failure = pts[bad[0]]
            continue
        chosen.append(i)
        accs = trial
    if len(chosen) < need:
        at = first_failure if first_failure is not None else pts[0]
        raise RegionTooLargeError(
            f"no uniform frame completion on the sample region (found {len(chosen)} of {need}); "
            f"first failing point x={tuple(float(c) for c in at)}; shrink the region",
            point=at,
        )
    return chosen


def _generator_values(x, X_fields, Y_fields, completion, g: MetricField, n: int) -> list[np.ndarray]:
    xs = _stack(X_fields, x, n)
    ys = _stack(Y_fields, x, n)
    rows = ys + xs
    m = len(rows)
    if m == n:
        return []
    if not np.all(np.isfinite(rows)):
        return [np.full(n, np.nan) for _ in range(n - m)]
    _check_rank(rows, x, n)
    G = g.at(x)
    R = np.vstack(rows)
    _, tables, _ = K.blade_layout(n)
    to_vector = G.star_matrix(n - 1)
    if m == n - 1:
        return [to_vector @ K.vector_minors(np.ascontiguousarray(R), tables[n - 1])]
    Z = np.eye(n)[list(completion)]
    # the frozen completion must still complete the frame here
    full = abs(np.linalg.det(np.vstack([Z, R])))
    if full <= COMPLETION_TOL * float(np.prod(np.linalg.norm(R, axis=1))):
        raise RegionTooLargeError(
            f"frozen frame completion {tuple(completion)} degenerates at x={tuple(float(c) for c in x)}",
            point=x,
        )
    out = []
    for a in range(len(Z)):
        # coordinates of Z_1 ^ .. (Z_a omitted) .. ^ R_1 ^ .. ^ R_m are the maximal minors
        stacked = np.ascontiguousarray(np.vstack([np.delete(Z, a, axis=0), R]))
        out.append(to_vector @ K.vector_minors(stacked, tables[n - 1]))
    return out


def generator_set(X_fields, Y_fields, h_fields, g, region_sample) -> GeneratorSet:
    """Local generators of the affine distribution of fields ``X`` with
    ``g(X, X_i) = 0`` and ``g(X, Y_j) = h_j``.

    The particular field is ``X0`` (absent when there are no affine
    constraints); the generators are
    ``*(Z_1 ^ .. (Z_a omitted) .. ^ Y_1 ^ .. ^ Y_p ^ X_1 ^ .. ^ X_k)`` with a
    completion ``Z`` frozen on ``region_sample``.
    """
    g = _as_metric_field(g)
    n = g.dim
    X_fields, Y_fields, h_fields = tuple(X_fields), tuple(Y_fields), tuple(h_fields)
    _check_fields(X_fields, Y_fields, h_fields, n)
    pts = [_point(p, n) for p in region_sample]
    m = len(X_fields) + len(Y_fields)
    if m < n - 1:
        completion = tuple(_uniform_completion(list(Y_fields) + list(X_fields), pts, n))
    else:
        for x in pts:
            _check_rank(_stack(Y_fields, x, n) + _stack(X_fields, x, n), x, n)
        completion = ()

    particular = None
    if Y_fields:
        def x0(x):
            return pointwise_particular(x, X_fields, Y_fields, h_fields, g)

        particular = VectorFieldHandle(n, x0, "X0")

    # all generators come out of one computation; remember the last point
    last = [None]

    def values(x):
        hit = last[0]
        if hit is not None and np.array_equal(hit[0], x):
            return hit[1]
        vals = _generator_values(x, X_fields, Y_fields, completion, g, n)
        last[0] = (x.copy(), vals)
        return vals

    gens = []
    for a in range(n - m):
        def gen(x, a=a):
            return values(x)[a]

        gens.append(VectorFieldHandle(n, gen, f"gen{a}"))
    return GeneratorSet(particular, tuple(gens), completion)


def pointwise_particular(x, X_fields, Y_fields, h_fields, g) -> np.ndarray:
    """``X0(x)`` alone, skipping the homogeneous basis."""
    from .intersect import particular_solution

    g = _as_metric_field(g)
    n = g.dim
    x = _point(x, n)
    xs = _stack(X_fields, x, n)
    ys = _stack(Y_fields, x, n)
    lam = [h(x) for h in h_fields]
    if not (np.all(np.isfinite(xs + ys)) and np.all(np.isfinite(lam))):
        # overflowed inputs: hand NaN back so an integrator sees divergence
        return np.full(n, np.nan)
    _check_rank(ys + xs, x, n)
    sys = HyperplaneSystem(n, xs, ys, lam, g.at(x))
    return particular_solution(sys).to_vector()


def generator_values(gs: GeneratorSet, x) -> tuple[np.ndarray | None, list[np.ndarray]]:
    """Evaluate every member of a generator set at ``x``."""
    x0 = None if gs.particular is None else gs.particular(x)
    return x0, [f(x) for f in gs.generators]


__all__ = [
    "ScalarField",
    "MetricField",
    "VectorFieldHandle",
    "GeneratorSet",
    "eval_field",
    "euclidean_gradient",
    "finite_difference_gradient",
    "riemannian_gradient",
    "gradient_field",
    "pointwise_generators",
    "pointwise_particular",
    "frame_completion_field",
    "generator_set",
    "generator_values",
    "relative_smallest_singular_value",
]
