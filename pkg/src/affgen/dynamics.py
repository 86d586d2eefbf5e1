"""Conservative and dissipative vector fields from prescribed scalar functions.

Given conserved quantities ``I_i`` and dissipated quantities ``D_j`` with
rates ``h_j``, :func:`synthesize` builds a field ``X`` with
``g(X, grad I_i) = 0`` and ``g(X, grad D_j) = h_j``; :func:`integrate` runs
classical RK4 and :func:`audit` measures how well an orbit honours those
relations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, IntegrationDivergedError
from .intersect import check_independent
from .riemann import (
    MetricField,
    ScalarField,
    VectorFieldHandle,
    _as_metric_field,
    generator_set,
    gradient_field,
    pointwise_particular,
    riemannian_gradient,
)


@dataclass(frozen=True)
class Scenario:
    """A dynamics problem: what to conserve, what to dissipate and how fast."""

    dim: int
    metric: MetricField
    conserved: tuple = ()
    dissipated: tuple = ()
    rates: tuple = ()
    x0: tuple = ()
    dt: float = 1e-3
    steps: int = 1000
    base_field: VectorFieldHandle | None = None
    direction_coeffs: tuple | None = None
    tol: float = 1e-6
    name: str = ""

    def __post_init__(self):
        n = int(self.dim)
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "metric", _as_metric_field(self.metric, n))
        for attr in ("conserved", "dissipated", "rates"):
            fields = tuple(getattr(self, attr))
            for i, f in enumerate(fields):
                if not isinstance(f, ScalarField):
                    raise DomainError(f"{attr}[{i}] is not a ScalarField")
                if f.dim != n:
                    raise DomainError(f"{attr}[{i}] has dimension {f.dim}, expected {n}")
            object.__setattr__(self, attr, fields)
        if self.metric.dim != n:
            raise DomainError(f"metric dimension {self.metric.dim} does not match {n}")
        if len(self.rates) != len(self.dissipated):
            raise DomainError(f"{len(self.dissipated)} dissipated quantities but {len(self.rates)} rates")
        m = self.k + self.p
        if not 1 <= m <= n:
            raise DomainError(f"need 1 <= k + p <= {n}, got {m}")
        x0 = np.asarray(self.x0, dtype=float).ravel()
        if x0.size != n:
            raise DomainError(f"x0 has {x0.size} coordinates, expected {n}")
        object.__setattr__(self, "x0", tuple(float(c) for c in x0))
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if int(self.steps) < 1:
            raise DomainError(f"steps must be >= 1, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))
        if self.direction_coeffs is not None:
            coeffs = tuple(self.direction_coeffs)
            if len(coeffs) != n - m:
                raise DomainError(f"{len(coeffs)} direction coefficients, expected n - (k + p) = {n - m}")
            for i, c in enumerate(coeffs):
                if not isinstance(c, ScalarField) or c.dim != n:
                    raise DomainError(f"direction_coeffs[{i}] is not a ScalarField of dimension {n}")
            object.__setattr__(self, "direction_coeffs", coeffs)
        if self.base_field is not None and self.base_field.dim != n:
            raise DomainError(f"base field has dimension {self.base_field.dim}, expected {n}")
        check_independent(self.gradients_at(x0), "gradients of the conserved and dissipated quantities", point=x0)

    @property
    def k(self) -> int:
        return len(self.conserved)

    @property
    def p(self) -> int:
        return len(self.dissipated)

    def gradients_at(self, x) -> np.ndarray:
        """Rows ``grad_g D_1..D_p, grad_g I_1..I_k`` at ``x``."""
        rows = [riemannian_gradient(f, x, self.metric) for f in self.dissipated + self.conserved]
        return np.vstack(rows)

    def conserved_fields(self) -> list[VectorFieldHandle]:
        return [gradient_field(f, self.metric) for f in self.conserved]

    def dissipated_fields(self) -> list[VectorFieldHandle]:
        return [gradient_field(f, self.metric) for f in self.dissipated]

    def sample(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values of ``I``, ``D`` and ``h`` at each row of ``states``."""
        states = np.atleast_2d(states)

        def table(fields):
            return np.array([[f(x) for f in fields] for x in states]).reshape(len(states), len(fields))

        return table(self.conserved), table(self.dissipated), table(self.rates)


def _has_directions(scenario: Scenario) -> bool:
    return scenario.direction_coeffs is not None and not all(c.is_zero() for c in scenario.direction_coeffs)


def _particular_field(scenario: Scenario) -> VectorFieldHandle | None:
    if not scenario.p:
        return None
    X = scenario.conserved_fields()
    Y = scenario.dissipated_fields()
    h = scenario.rates
    g = scenario.metric
    return VectorFieldHandle(scenario.dim, lambda x: pointwise_particular(x, X, Y, h, g), "X0")


def synthesize(scenario: Scenario, region_sample=None) -> VectorFieldHandle:
    """Field ``X0 + sum_a c_a * generator_a + base`` for the scenario.

    Without a base field or direction coefficients this is exactly ``X0``.
    The frame completion for the generators is frozen on ``region_sample``
    (default: the scenario's initial point).
    """
    n = scenario.dim
    parts: list[VectorFieldHandle] = []
    x0_field = _particular_field(scenario)
    if x0_field is not None:
        parts.append(x0_field)
    if _has_directions(scenario):
        sample = [scenario.x0] if region_sample is None else region_sample
        gs = generator_set(
            scenario.conserved_fields(), scenario.dissipated_fields(), scenario.rates, scenario.metric, sample
        )
        coeffs = scenario.direction_coeffs

        def homogeneous(x):
            out = np.zeros(n)
            for c, gen in zip(coeffs, gs.generators):
                ca = c(x)
                if ca != 0.0:
                    out += ca * gen(x)
            return out

        parts.append(VectorFieldHandle(n, homogeneous, "directions"))
    if scenario.base_field is not None:
        parts.append(scenario.base_field)
    if not parts:
        check = scenario.gradients_at

        def zero(x):
            check_independent(check(x), "gradients", point=x)
            return np.zeros(n)

        return VectorFieldHandle(n, zero, "zero")
    if len(parts) == 1:
        return parts[0]

    def total(x):
        out = parts[0](x)
        for f in parts[1:]:
            out = out + f(x)
        return out

    return VectorFieldHandle(n, total, "+".join(f.label for f in parts))


def perturb(base: VectorFieldHandle, scenario: Scenario) -> VectorFieldHandle:
    """``x -> base(x) + X0(x)``.

    If ``base`` conserves every ``I_i`` and ``D_j`` the sum conserves the
    ``I_i`` and dissipates each ``D_j`` at rate ``h_j``.  That precondition is
    not checked here; run :func:`audit` on a trajectory.
    """
    if base.dim != scenario.dim:
        raise DomainError(f"base field has dimension {base.dim}, expected {scenario.dim}")
    x0_field = _particular_field(scenario)
    if x0_field is None:
        return base
    return VectorFieldHandle(scenario.dim, lambda x: base(x) + x0_field(x), f"{base.label}+X0")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    conserved: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    dissipated: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    rates: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def __len__(self) -> int:
        return len(self.times)


def rk4_step(f, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(field: VectorFieldHandle, x0, dt: float, steps: int, scenario: Scenario | None = None) -> Trajectory:
    """Fixed-step classical RK4 from ``x0``; records scenario scalars if given."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    steps = int(steps)
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    x = np.asarray(x0, dtype=float).ravel().copy()
    if x.size != field.dim:
        raise DomainError(f"x0 has {x.size} coordinates, field has dimension {field.dim}")
    states = np.empty((steps + 1, x.size))
    states[0] = x
    for i in range(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            x = rk4_step(field, x, dt)
        if not np.all(np.isfinite(x)):
            partial = _make_trajectory(states[: i + 1], dt, scenario)
            raise IntegrationDivergedError(f"integration diverged at step {i + 1}", step=i + 1, partial=partial)
        states[i + 1] = x
    return _make_trajectory(states, dt, scenario)


def _make_trajectory(states: np.ndarray, dt: float, scenario: Scenario | None) -> Trajectory:
    times = dt * np.arange(len(states))
    if scenario is None:
        empty = np.zeros((len(states), 0))
        return Trajectory(times, states, empty, empty, empty)
    I, D, h = scenario.sample(states)
    return Trajectory(times, states, I, D, h)


def cumulative_simpson(values: np.ndarray, dt: float) -> np.ndarray:
    """Running integral of uniformly sampled values, one entry per node.

    Composite Simpson up to the last even node; an odd trailing interval is
    closed with one trapezoid panel.  Works column-wise on 2-D input.
    """
    y = np.asarray(values, dtype=float)
    squeeze = y.ndim == 1
    if squeeze:
        y = y[:, None]
    out = np.zeros_like(y)
    if len(y) > 2:
        pairs = dt / 3.0 * (y[0:-2:2] + 4.0 * y[1:-1:2] + y[2::2])
        out[2::2] = np.cumsum(pairs, axis=0)
    out[1::2] = out[0:-1:2] + 0.5 * dt * (y[0:-1:2] + y[1::2])
    return out[:, 0] if squeeze else out


@dataclass(frozen=True)
class DriftReport:
    """Worst conservation drift per ``I_i`` and worst budget residual per ``D_j``."""

    conservation: tuple
    dissipation: tuple

    def passed(self, tol: float) -> bool:
        return all(v <= tol for v in self.conservation + self.dissipation)

    def worst(self) -> float:
        vals = self.conservation + self.dissipation
        return max(vals) if vals else 0.0

    def format(self, tol: float | None = None) -> str:
        lines = []
        for i, v in enumerate(self.conservation, 1):
            lines.append(f"conserved I_{i}: max drift {v:.6e}")
        for j, v in enumerate(self.dissipation, 1):
            lines.append(f"dissipated D_{j}: max budget residual {v:.6e}")
        if tol is not None:
            lines.append(f"tolerance {tol:g}: {'PASS' if self.passed(tol) else 'FAIL'}")
        return "\n".join(lines)


def audit(traj: Trajectory, scenario: Scenario) -> DriftReport:
    """Conservation drift and dissipation budget along a trajectory.

    Budget residual for ``D_j`` is ``max_t |D_j(t) - D_j(0) - int_0^t h_j|``.
    """
    I, D, h = traj.conserved, traj.dissipated, traj.rates
    if I.shape[1:] != (scenario.k,) or D.shape[1:] != (scenario.p,) or h.shape[1:] != (scenario.p,):
        I, D, h = scenario.sample(traj.states)
    cons = tuple(float(np.max(np.abs(I[:, i] - I[0, i]))) for i in range(scenario.k))
    diss = ()
    if scenario.p:
        budget = cumulative_simpson(h, traj.dt)
        resid = np.abs(D - D[0] - budget)
        diss = tuple(float(np.max(resid[:, j])) for j in range(scenario.p))
    return DriftReport(cons, diss)
