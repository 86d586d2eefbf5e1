"""Dense exterior algebra over a real inner-product space.

Coefficients of a :class:`Multivector` live in a dense array of length
``2**n`` indexed by blade bitmask (bit ``i`` set means ``e_i`` is a factor).
Indices are 0-based throughout.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels as K
from .errors import DomainError

BladeIndex = tuple  # strictly increasing tuple of ints in [0, n)

_SPD_RTOL = 1e-12


def canonical_blade(indices: Sequence[int], n: int) -> tuple[tuple[int, ...], int]:
    """Sort a wedge monomial ``e_{i1} ^ ... ^ e_{ip}`` into canonical order.

    Returns the sorted index tuple and the sign of the sorting permutation,
    or ``((), 0)`` when an index repeats.

    >>> canonical_blade((2, 1), 3)
    ((1, 2), -1)
    >>> canonical_blade((0, 0), 3)
    ((), 0)
    """
    idx = [int(i) for i in indices]
    for i in idx:
        if not 0 <= i < n:
            raise DomainError(f"blade index {i} out of range for dimension {n}")
    if len(set(idx)) != len(idx):
        return (), 0
    inversions = sum(1 for a in range(len(idx)) for b in range(a + 1, len(idx)) if idx[a] > idx[b])
    return tuple(sorted(idx)), (-1 if inversions % 2 else 1)


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@lru_cache(maxsize=None)
def _grade_of(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)


def _indices(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class Multivector:
    """Element of the full exterior algebra of an ``dim``-dimensional space.

    Instances are immutable; arithmetic returns new objects.  ``a ^ b`` is the
    wedge product.
    """

    __slots__ = ("dim", "_data", "_grades")

    def __init__(self, dim: int, data=None):
        dim = int(dim)
        if not 0 < dim <= K.MAX_DIM:
            raise DomainError(f"dimension must be in [1, {K.MAX_DIM}], got {dim}")
        if data is None:
            arr = np.zeros(1 << dim)
        else:
            arr = np.array(data, dtype=float)
            if arr.shape != (1 << dim,):
                raise DomainError(f"dense data must have length {1 << dim}, got shape {arr.shape}")
        arr.setflags(write=False)
        self.dim = dim
        self._data = arr
        self._grades = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def scalar(cls, dim: int, value: float = 1.0) -> "Multivector":
        data = np.zeros(1 << dim)
        data[0] = value
        return cls(dim, data)

    @classmethod
    def vector(cls, coords: Sequence[float]) -> "Multivector":
        coords = np.asarray(coords, dtype=float).ravel()
        n = coords.size
        data = np.zeros(1 << n)
        data[1 << np.arange(n)] = coords
        return cls(n, data)

    @classmethod
    def basis(cls, dim: int, i: int) -> "Multivector":
        return cls.blade(dim, (i,))

    @classmethod
    def blade(cls, dim: int, indices: Sequence[int], coeff: float = 1.0) -> "Multivector":
        key, sign = canonical_blade(indices, dim)
        data = np.zeros(1 << dim)
        if sign:
            data[_mask(key)] = sign * coeff
        return cls(dim, data)

    @classmethod
    def from_dict(cls, dim: int, coeffs: Mapping[Sequence[int], float]) -> "Multivector":
        data = np.zeros(1 << dim)
        for indices, c in coeffs.items():
            key, sign = canonical_blade(indices, dim)
            if sign:
                data[_mask(key)] += sign * c
        return cls(dim, data)

    @classmethod
    def from_grade(cls, dim: int, p: int, coords: Sequence[float]) -> "Multivector":
        """Build a homogeneous element from its coordinates in the grade-p blade basis."""
        masks, _, _ = K.blade_layout(dim)
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (masks[p].size,):
            raise DomainError(f"grade {p} in dimension {dim} needs {masks[p].size} coordinates")
        data = np.zeros(1 << dim)
        data[masks[p]] = coords
        return cls(dim, data)

    # -- views ------------------------------------------------------------

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def coeffs(self) -> dict[tuple[int, ...], float]:
        """Non-zero coefficients keyed by canonical blade index tuple."""
        return {_indices(int(m)): float(self._data[m]) for m in np.flatnonzero(self._data)}

    def grades(self) -> set[int]:
        if self._grades is None:
            present = np.bincount(_grade_of(self.dim)[self._data != 0], minlength=self.dim + 1)
            self._grades = frozenset(np.flatnonzero(present).tolist())
        return set(self._grades)

    def grade(self) -> int | None:
        """Grade of a homogeneous element; ``None`` for zero; raises if mixed."""
        g = self.grades()
        if not g:
            return None
        if len(g) > 1:
            raise DomainError(f"multivector is not homogeneous (grades {sorted(g)})")
        return g.pop()

    def is_homogeneous(self, p: int) -> bool:
        return self.grades() <= {p}

    def grade_part(self, p: int) -> np.ndarray:
        """Coordinates on the grade-p blade basis (lexicographic order)."""
        masks, _, _ = K.blade_layout(self.dim)
        return self._data[masks[p]]

    def to_vector(self) -> np.ndarray:
        if not self.is_homogeneous(1):
            raise DomainError(f"expected a grade-1 multivector, got grades {sorted(self.grades())}")
        return self.grade_part(1).copy()

    def __float__(self) -> float:
        if not self.is_homogeneous(0):
            raise DomainError("only grade-0 multivectors convert to float")
        return float(self._data[0])

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Multivector") -> None:
        if not isinstance(other, Multivector):
            raise DomainError(f"expected Multivector, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DomainError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        self._check(other)
        return Multivector(self.dim, self._data + other._data)

    def __sub__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        self._check(other)
        return Multivector(self.dim, self._data - other._data)

    def __neg__(self):
        return Multivector(self.dim, -self._data)

    def __mul__(self, c):
        if isinstance(c, Multivector):
            return NotImplemented
        return Multivector(self.dim, self._data * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return Multivector(self.dim, self._data / float(c))

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self._data, other._data)

    __hash__ = None

    def allclose(self, other: "Multivector", rtol: float = 1e-10, atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self._data, other._data, rtol=rtol, atol=atol))

    def __repr__(self) -> str:
        terms = self.coeffs
        if not terms:
            return f"Multivector(dim={self.dim}, 0)"
        body = " + ".join(
            f"{c:.6g}" + ("" if not k else "*e" + "".join(str(i) for i in k)) for k, c in terms.items()
        )
        return f"Multivector(dim={self.dim}, {body})"


class Metric:
    """Symmetric positive-definite bilinear form on R^n.

    Also caches the induced Gram matrices on every exterior power and the
    matrices of the Hodge star, so reuse one instance where possible.
    """

    __slots__ = ("matrix", "_cache")

    def __init__(self, matrix):
        G = np.array(matrix, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] == 0:
            raise DomainError(f"metric must be a non-empty square matrix, got shape {G.shape}")
        if G.shape[0] > K.MAX_DIM:
            raise DomainError(f"dimension {G.shape[0]} exceeds the supported maximum {K.MAX_DIM}")
        if not np.all(np.isfinite(G)):
            raise DomainError("metric has non-finite entries")
        if not np.array_equal(G, G.T):
            asym = float(np.max(np.abs(G - G.T)))
            raise DomainError(f"metric is not symmetric (max asymmetry {asym:.3g})")
        eig = np.linalg.eigvalsh(G)
        if eig[0] <= _SPD_RTOL * max(eig[-1], 0.0) or eig[-1] <= 0.0:
            raise DomainError(f"metric is not positive definite (eigenvalues {eig[0]:.3g} .. {eig[-1]:.3g})")
        G.setflags(write=False)
        self.matrix = G
        self._cache: dict = {}

    @classmethod
    def identity(cls, n: int) -> "Metric":
        return cls(np.eye(n))

    @classmethod
    def diagonal(cls, entries: Sequence[float]) -> "Metric":
        return cls(np.diag(np.asarray(entries, dtype=float)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def inner(self, u, v) -> float:
        return float(np.asarray(u, dtype=float) @ self.matrix @ np.asarray(v, dtype=float))

    def induced(self, p: int) -> np.ndarray:
        """Gram matrix of the grade-p blade basis under the induced inner product."""
        key = ("induced", p)
        out = self._cache.get(key)
        if out is None:
            _, tables, _ = K.blade_layout(self.dim)
            out = K.compound_matrix(np.ascontiguousarray(self.matrix), tables[p])
            out.setflags(write=False)
            self._cache[key] = out
        return out

    def raise_index(self, covector) -> np.ndarray:
        """Solve ``G u = covector`` (turn a differential into a gradient)."""
        inv = self._cache.get("inverse")
        if inv is None:
            inv = np.linalg.inv(self.matrix)
            inv.setflags(write=False)
            self._cache["inverse"] = inv
        return inv @ np.asarray(covector, dtype=float)

    def volume_scale(self) -> float:
        """Coefficient c of the unit volume form ``c * e_0 ^ ... ^ e_{n-1}``."""
        c = self._cache.get("volume")
        if c is None:
            c = 1.0 / np.sqrt(np.linalg.det(self.matrix))
            self._cache["volume"] = c
        return c

    def star_matrix(self, p: int) -> np.ndarray:
        """Matrix sending grade-p coordinates to grade-(n-p) coordinates of the Hodge star."""
        key = ("star", p)
        out = self._cache.get(key)
        if out is None:
            out = _assemble_star(self, p)
            out.setflags(write=False)
            self._cache[key] = out
        return out

    def __repr__(self) -> str:
        return f"Metric({self.matrix.tolist()!r})"


def _require_metric(a: Multivector, g: Metric) -> None:
    if g.dim != a.dim:
        raise DomainError(f"metric dimension {g.dim} does not match multivector dimension {a.dim}")


def _homogeneous_grade(a: Multivector, what: str = "argument") -> int | None:
    try:
        return a.grade()
    except DomainError as exc:
        raise DomainError(f"{what}: {exc}") from None


def wedge(a: Multivector, b: Multivector) -> Multivector:
    """Exterior product of two multivectors of the same dimension."""
    if not isinstance(a, Multivector) or not isinstance(b, Multivector):
        raise DomainError("wedge expects two Multivector arguments")
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return Multivector(a.dim, K.wedge_dense(a.data, b.data, a.dim))


def wedge_vectors(vectors, n: int | None = None) -> Multivector:
    """Wedge of an ordered list of vectors (arrays or grade-1 multivectors).

    The empty product is the scalar 1, which needs ``n``.
    """
    rows = [_as_coords(v) for v in vectors]
    if not rows:
        if n is None:
            raise DomainError("dimension required for an empty wedge")
        return Multivector.scalar(n, 1.0)
    dim = rows[0].size
    if n is not None and n != dim:
        raise DomainError(f"dimension mismatch: {n} vs {dim}")
    if any(r.size != dim for r in rows):
        raise DomainError("vectors of differing dimension")
    p = len(rows)
    if p > dim:
        return Multivector(dim)
    masks, tables, _ = K.blade_layout(dim)
    V = np.ascontiguousarray(np.vstack(rows))
    data = np.zeros(1 << dim)
    data[masks[p]] = K.vector_minors(V, tables[p])
    return Multivector(dim, data)


def _as_coords(v) -> np.ndarray:
    if isinstance(v, Multivector):
        return v.to_vector()
    return np.asarray(v, dtype=float).ravel()


def inner_product_p(a: Multivector, b: Multivector, g: Metric) -> float:
    """Induced inner product of two homogeneous elements of equal grade."""
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")
    _require_metric(a, g)
    pa = _homogeneous_grade(a, "first argument")
    pb = _homogeneous_grade(b, "second argument")
    if pa is None or pb is None:
        return 0.0
    if pa != pb:
        raise DomainError(f"grades differ: {pa} vs {pb}")
    if pa == 0:
        return float(a.data[0] * b.data[0])
    x = a.grade_part(pa)
    y = b.grade_part(pa)
    return float(x @ g.induced(pa) @ y)


def gram_matrix(vectors: Sequence[Multivector], g: Metric) -> np.ndarray:
    """Matrix of pairwise inner products of an ordered list of vectors."""
    rows = []
    for i, v in enumerate(vectors):
        if not isinstance(v, Multivector):
            raise DomainError(f"item {i} is not a Multivector")
        _require_metric(v, g)
        if not v.is_homogeneous(1):
            raise DomainError(f"item {i} is not a vector (grades {sorted(v.grades())})")
        rows.append(v.grade_part(1))
    if not rows:
        return np.zeros((0, 0))
    V = np.vstack(rows)
    return V @ g.matrix @ V.T


def norm_p(a: Multivector, g: Metric) -> float:
    ip = inner_product_p(a, a, g)
    # round-off can push an exact zero slightly negative
    return float(np.sqrt(max(ip, 0.0)))


def volume_form(g: Metric) -> Multivector:
    """Positively oriented top-grade element of unit norm."""
    n = g.dim
    return Multivector.blade(n, tuple(range(n)), g.volume_scale())


def _assemble_star(g: Metric, p: int) -> np.ndarray:
    # <*nu, w> mu = nu ^ w for every basis blade w of grade n-p:
    # nu ^ e_J = nu_{J^c} * sign(J^c, J) * e_full, and mu = c * e_full.
    n = g.dim
    q = n - p
    masks, _, position = K.blade_layout(n)
    full = (1 << n) - 1
    c = g.volume_scale()
    rhs = np.zeros((masks[q].size, masks[p].size))
    for row, J in enumerate(masks[q]):
        Jc = full ^ int(J)
        rhs[row, position[Jc]] = K.reorder_sign(Jc, int(J)) / c
    gram = g.induced(q)
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD metric guarantees this
        raise AssertionError(f"induced Gram matrix of grade {q} is singular") from exc
    y = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, y)


def hodge_star(a: Multivector, g: Metric) -> Multivector:
    """Hodge star of a homogeneous element: ``<*a, w> mu = a ^ w`` for all ``w``."""
    _require_metric(a, g)
    p = _homogeneous_grade(a)
    if p is None:
        return Multivector(a.dim)
    n = a.dim
    masks, _, _ = K.blade_layout(n)
    data = np.zeros(1 << n)
    data[masks[n - p]] = g.star_matrix(p) @ a.grade_part(p)
    return Multivector(n, data)


def star_vectors(vectors, g: Metric) -> Multivector:
    """Shorthand for ``hodge_star(wedge_vectors(vectors), g)``."""
    return hodge_star(wedge_vectors(vectors, g.dim), g)


def blade_count(n: int, p: int) -> int:
    return comb(n, p)
