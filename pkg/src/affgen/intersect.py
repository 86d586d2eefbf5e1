"""Intersections of linear and affine hyperplanes in an inner-product space.

Solves

    <u, v_i> = 0        i = 1..k
    <u, w_j> = lambda_j  j = 1..p

by the Hodge-star construction: a particular solution ``u0`` lying in the
span of the normals plus a basis of the common orthogonal complement.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, PreconditionError, RankDeficiencyError
from .exterior import Metric, Multivector, hodge_star, inner_product_p, wedge, wedge_vectors

RANK_TOL = 1e-10
COMPLETION_TOL = 1e-10


def _coords(v, n: int | None = None) -> np.ndarray:
    if isinstance(v, Multivector):
        out = v.to_vector()
    else:
        out = np.asarray(v, dtype=float).ravel()
    if n is not None and out.size != n:
        raise DomainError(f"vector of length {out.size} in dimension {n}")
    return out


def relative_smallest_singular_value(rows: np.ndarray) -> float:
    """sigma_min / sigma_max of the stacked rows (1.0 for an empty set, 0.0 if all zero)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[0] == 0:
        return 1.0
    s = np.linalg.svd(rows, compute_uv=False)
    if s[0] == 0.0 or rows.shape[0] > rows.shape[1]:
        return 0.0
    return float(s[-1] / s[0])


def check_independent(rows, what: str = "vectors", point=None) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[0] == 0:
        return
    rel = relative_smallest_singular_value(rows)
    if rel <= RANK_TOL:
        where = "" if point is None else f" at x={tuple(float(c) for c in point)}"
        raise RankDeficiencyError(
            f"{what} are linearly dependent{where}: smallest singular value "
            f"{rel:.3e} (relative) <= {RANK_TOL:g}",
            smallest=rel,
            point=point,
        )


@dataclass(frozen=True)
class HyperplaneSystem:
    """``k`` homogeneous and ``p`` affine hyperplane equations in ``R^dim``."""

    dim: int
    homogeneous_normals: tuple = ()
    affine_normals: tuple = ()
    offsets: tuple = ()
    metric: Metric | None = None

    def __post_init__(self):
        n = int(self.dim)
        object.__setattr__(self, "dim", n)
        v = tuple(Multivector.vector(_coords(x, n)) for x in self.homogeneous_normals)
        w = tuple(Multivector.vector(_coords(x, n)) for x in self.affine_normals)
        lam = tuple(float(c) for c in self.offsets)
        if len(lam) != len(w):
            raise DomainError(f"{len(w)} affine normals but {len(lam)} offsets")
        if len(v) + len(w) > n:
            raise DomainError(f"k + p = {len(v) + len(w)} exceeds dimension {n}")
        g = self.metric if self.metric is not None else Metric.identity(n)
        if g.dim != n:
            raise DomainError(f"metric dimension {g.dim} does not match system dimension {n}")
        object.__setattr__(self, "homogeneous_normals", v)
        object.__setattr__(self, "affine_normals", w)
        object.__setattr__(self, "offsets", lam)
        object.__setattr__(self, "metric", g)
        check_independent(self.normal_matrix(), "hyperplane normals")

    @property
    def k(self) -> int:
        return len(self.homogeneous_normals)

    @property
    def p(self) -> int:
        return len(self.affine_normals)

    def normal_matrix(self) -> np.ndarray:
        """Rows ``w_1..w_p, v_1..v_k`` (the wedge order used throughout)."""
        rows = [x.to_vector() for x in self.affine_normals + self.homogeneous_normals]
        return np.vstack(rows) if rows else np.zeros((0, self.dim))

    def with_offsets(self, offsets) -> "HyperplaneSystem":
        return HyperplaneSystem(self.dim, self.homogeneous_normals, self.affine_normals, tuple(offsets), self.metric)


@dataclass(frozen=True)
class AffineSolution:
    """Solution set ``particular + span(basis)``; ``particular`` is None for p = 0."""

    particular: Multivector | None
    basis: tuple = field(default_factory=tuple)

    def particular_coords(self, n: int) -> np.ndarray:
        return np.zeros(n) if self.particular is None else self.particular.to_vector()

    def basis_matrix(self, n: int) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, n))
        return np.vstack([b.to_vector() for b in self.basis])


def complete_to_basis(vectors: Sequence, n: int | None = None) -> list[Multivector]:
    """Extend independent vectors to a basis of R^n with standard basis vectors.

    Greedy in index order: ``e_i`` is kept when the wedge of everything kept
    so far (inputs included) still has Euclidean norm above
    ``COMPLETION_TOL`` times the product of the members' norms.
    """
    rows = [_coords(v) for v in vectors]
    if n is None:
        if not rows:
            raise DomainError("dimension required to complete an empty set")
        n = rows[0].size
    rows = [_coords(r, n) for r in rows]
    check_independent(np.vstack(rows) if rows else np.zeros((0, n)), "input vectors")
    return [Multivector.basis(n, i) for i in _greedy_completion([np.vstack(rows) if rows else np.zeros((0, n))])]


def _greedy_completion(frames: Sequence[np.ndarray], n: int | None = None) -> list[int]:
    """Standard-basis indices completing every row-stack in ``frames`` at once."""
    if n is None:
        n = frames[0].shape[1]
    need = n - frames[0].shape[0]
    chosen: list[int] = []
    accs = [wedge_vectors(list(F), n) for F in frames]
    scales = [float(np.prod(np.linalg.norm(F, axis=1))) if F.shape[0] else 1.0 for F in frames]
    for i in range(n):
        if len(chosen) == need:
            break
        e = Multivector.basis(n, i)
        trial = [wedge(a, e) for a in accs]
        if all(np.linalg.norm(t.data) > COMPLETION_TOL * s for t, s in zip(trial, scales)):
            chosen.append(i)
            accs = trial
    return chosen


def homogeneous_basis(v: Sequence, g: Metric, completion: Sequence | None = None) -> list[Multivector]:
    """Basis of ``{u : <u, v_i> = 0 for all i}`` built from Hodge stars.

    For ``k = n`` the space is trivial; for ``k = n - 1`` it is spanned by
    ``*(v_1 ^ ... ^ v_{n-1})``; otherwise each basis vector is
    ``*(omega_1 ^ .. (omega_a omitted) .. ^ omega_{n-k} ^ v_1 ^ ... ^ v_k)``.
    ``completion`` supplies ``omega`` explicitly; by default the greedy
    standard-basis completion is used.  The span does not depend on it.
    """
    n = g.dim
    rows = [_coords(x, n) for x in v]
    omega = None if completion is None else [_coords(x, n) for x in completion]
    return _homogeneous_basis(rows, g, omega)


def _homogeneous_basis(rows: list[np.ndarray], g: Metric, omega: list[np.ndarray] | None = None):
    n = g.dim
    k = len(rows)
    check_independent(np.vstack(rows) if rows else np.zeros((0, n)), "normals")
    if k == n:
        return []
    if k == n - 1 and omega is None:
        return [hodge_star(wedge_vectors(rows, n), g)]
    if omega is None:
        omega = [np.eye(n)[i] for i in _greedy_completion([np.vstack(rows) if rows else np.zeros((0, n))], n)]
    if len(omega) != n - k:
        raise DomainError(f"completion has {len(omega)} vectors, expected {n - k}")
    check_independent(np.vstack(list(omega) + rows), "completion together with the normals")
    tail = wedge_vectors(rows, n)
    out = []
    for a in range(len(omega)):
        head = wedge_vectors([o for b, o in enumerate(omega) if b != a], n)
        out.append(hodge_star(wedge(head, tail), g))
    return out


def particular_solution(sys: HyperplaneSystem) -> Multivector:
    """Particular solution lying in the span of the normals.

    ``u0 = |W|^-2 * sum_i (-1)^(n-i) lambda_i Theta_i`` with
    ``W = w_1 ^ .. ^ w_p ^ v_1 ^ .. ^ v_k`` and
    ``Theta_i = *(w_1 ^ .. (w_i omitted) .. ^ w_p ^ v_1 ^ .. ^ v_k ^ *W)``.
    """
    if sys.p == 0:
        raise PreconditionError("no affine equations (p = 0): use homogeneous_basis")
    u0 = _particular(sys)
    scale = max([1.0] + [abs(c) for c in sys.offsets])
    report = verify_solution(sys, AffineSolution(u0, ()), tol=1e-6 * scale)
    if not report.equations_pass:
        raise AssertionError(f"particular solution failed self-check: {report}")
    return u0


def _particular(sys: HyperplaneSystem) -> Multivector:
    n, g = sys.dim, sys.metric
    w = [x.to_vector() for x in sys.affine_normals]
    v = [x.to_vector() for x in sys.homogeneous_normals]
    W = wedge_vectors(w + v, n)
    star_W = hodge_star(W, g)
    norm2 = inner_product_p(W, W, g)
    vtail = wedge_vectors(v, n)
    total = np.zeros(1 << n)
    for i in range(1, sys.p + 1):
        lam = sys.offsets[i - 1]
        if lam == 0.0:
            continue
        head = wedge_vectors([w[j] for j in range(sys.p) if j != i - 1], n)
        theta = hodge_star(wedge(wedge(head, vtail), star_W), g)
        total += (-1) ** (n - i) * lam * theta.data
    return Multivector(n, total / norm2)


def solve_intersection(sys: HyperplaneSystem) -> AffineSolution:
    """Full solution set ``u0 + E[w..., v...]`` of a hyperplane system."""
    normals = list(sys.normal_matrix())
    basis = _homogeneous_basis(normals, sys.metric)
    particular = particular_solution(sys) if sys.p else None
    return AffineSolution(particular, tuple(basis))


@dataclass(frozen=True)
class SolutionReport:
    """Residuals of a candidate solution against its system."""

    homogeneous_residual: float
    affine_residual: float
    basis_annihilation: float
    basis_independence: float
    orthogonality: float
    basis_size: int
    expected_basis_size: int
    tol: float

    @property
    def equations_pass(self) -> bool:
        return self.homogeneous_residual <= self.tol and self.affine_residual <= self.tol

    @property
    def basis_pass(self) -> bool:
        return (
            self.basis_size == self.expected_basis_size
            and self.basis_annihilation <= self.tol
            and (self.basis_size == 0 or self.basis_independence > RANK_TOL)
        )

    @property
    def passed(self) -> bool:
        return self.equations_pass and self.basis_pass and self.orthogonality <= self.tol

    def as_dict(self) -> dict:
        return {
            "max_homogeneous_residual": self.homogeneous_residual,
            "max_affine_residual": self.affine_residual,
            "max_basis_annihilation": self.basis_annihilation,
            "basis_smallest_singular_value": self.basis_independence,
            "max_particular_basis_inner": self.orthogonality,
            "basis_size": self.basis_size,
            "expected_basis_size": self.expected_basis_size,
            "tol": self.tol,
            "passed": self.passed,
        }


def verify_solution(sys: HyperplaneSystem, sol: AffineSolution, tol: float = 1e-9) -> SolutionReport:
    """Measure how well ``sol`` solves ``sys``.

    Basis annihilation and particular/basis orthogonality are measured on
    unit-normalised basis vectors so the numbers are scale free.
    """
    n, G = sys.dim, sys.metric.matrix
    u0 = sol.particular_coords(n)
    V = np.vstack([x.to_vector() for x in sys.homogeneous_normals]) if sys.k else np.zeros((0, n))
    Wn = np.vstack([x.to_vector() for x in sys.affine_normals]) if sys.p else np.zeros((0, n))
    lam = np.asarray(sys.offsets, dtype=float)
    hom = float(np.max(np.abs(V @ G @ u0))) if sys.k else 0.0
    aff = float(np.max(np.abs(Wn @ G @ u0 - lam))) if sys.p else 0.0
    B = sol.basis_matrix(n)
    if B.shape[0]:
        Bn = B / np.linalg.norm(B, axis=1, keepdims=True)
        N = np.vstack([Wn, V])
        Nn = N / np.linalg.norm(N, axis=1, keepdims=True) if N.shape[0] else N
        ann = float(np.max(np.abs(Bn @ G @ Nn.T))) if N.shape[0] else 0.0
        indep = relative_smallest_singular_value(Bn)
        orth = float(np.max(np.abs(Bn @ G @ u0)))
    else:
        ann, indep, orth = 0.0, 1.0, 0.0
    return SolutionReport(
        homogeneous_residual=hom,
        affine_residual=aff,
        basis_annihilation=ann,
        basis_independence=indep,
        orthogonality=orth,
        basis_size=B.shape[0],
        expected_basis_size=n - sys.k - sys.p,
        tol=tol,
    )
