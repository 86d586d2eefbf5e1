import numpy as np
import pytest
from scipy.linalg import subspace_angles

from affgen import Metric
from affgen.errors import DomainError, RankDeficiencyError, RegionTooLargeError
from affgen.intersect import homogeneous_basis
from affgen.riemann import (
    MetricField,
    ScalarField,
    VectorFieldHandle,
    euclidean_gradient,
    eval_field,
    finite_difference_gradient,
    frame_completion_field,
    generator_set,
    generator_values,
    gradient_field,
    pointwise_generators,
    riemannian_gradient,
)

from conftest import random_polynomial, random_spd


def const(v):
    return VectorFieldHandle.constant(np.asarray(v, dtype=float))


def sconst(n, c):
    return ScalarField.constant(n, c)


# scalar fields

def test_eval_examples():
    assert eval_field(ScalarField(2, [(1, (2, 0)), (1, (0, 2))]), [3, 4]) == 25
    assert eval_field(ScalarField.zero(3), [1, 2, 3]) == 0
    assert eval_field(ScalarField(2, [(2, (1, 3))]), [1, 2]) == 16


def test_gradient_examples():
    np.testing.assert_array_equal(euclidean_gradient(ScalarField(1, [(1, (2,))]), [3]), [6])
    np.testing.assert_array_equal(euclidean_gradient(ScalarField(2, [(1, (1, 1))]), [2.5, -7]), [-7, 2.5])


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        eval_field(ScalarField(2, [(1, (1, 0))]), [1, 2, 3])
    with pytest.raises(DomainError):
        ScalarField(2, [(1, (1, 0, 0))])


def test_field_arithmetic(rng):
    f = random_polynomial(rng, 3, 3)
    h = random_polynomial(rng, 3, 2)
    x = rng.normal(size=3)
    assert (f + h)(x) == pytest.approx(f(x) + h(x))
    assert (f * 2.5)(x) == pytest.approx(2.5 * f(x))
    assert (-f)(x) == pytest.approx(-f(x))
    assert (f + (-f)).is_zero()


def test_exact_gradient_matches_finite_differences(rng):
    for _ in range(50):
        n = int(rng.integers(1, 6))
        f = random_polynomial(rng, n, 4)
        x = rng.uniform(-1.5, 1.5, size=n)
        exact = f.gradient(x)
        fd = finite_difference_gradient(f, x)
        assert np.max(np.abs(exact - fd)) <= 1e-6 * max(1.0, np.max(np.abs(exact)))


def test_riemannian_gradient_examples(rng):
    f = random_polynomial(rng, 3, 3)
    x = rng.normal(size=3)
    np.testing.assert_allclose(riemannian_gradient(f, x, Metric.identity(3)), f.gradient(x))
    lin = ScalarField(2, [(1, (1, 0)), (1, (0, 1))])
    np.testing.assert_allclose(riemannian_gradient(lin, [0.3, 9], Metric.diagonal([1, 2])), [1, 0.5])


def test_riemannian_gradient_defining_property(rng):
    for _ in range(30):
        n = int(rng.integers(1, 7))
        g = random_spd(rng, n)
        f = random_polynomial(rng, n, 3)
        x = rng.normal(size=n)
        grad = riemannian_gradient(f, x, g)
        # g(grad f, e_i) = d_i f
        np.testing.assert_allclose(g.matrix @ grad, f.gradient(x), atol=1e-10 * max(1, np.abs(grad).max()))


def test_position_dependent_metric_rejects_non_spd():
    g = MetricField.from_callable(2, lambda x: np.diag([1.0, x[0]]))
    f = ScalarField(2, [(1, (0, 1))])
    np.testing.assert_allclose(riemannian_gradient(f, [2.0, 0.0], g), [0, 0.5])
    with pytest.raises(DomainError, match="x="):
        riemannian_gradient(f, [-1.0, 0.0], g)


# pointwise generators

def test_pointwise_generators_example():
    g = Metric.identity(3)
    x0, dirs = pointwise_generators([0.4, -2, 1], [const([0, 0, 1])], [const([1, 0, 0])], [sconst(3, 5)], g)
    np.testing.assert_allclose(x0, [5, 0, 0], atol=1e-14)
    assert len(dirs) == 1
    assert abs(abs(dirs[0] @ [0, 1, 0]) - np.linalg.norm(dirs[0])) < 1e-12


def test_pointwise_generators_dispatch():
    g = Metric.identity(3)
    x0, dirs = pointwise_generators([1, 1, 1], [const([0, 0, 1])], [], [], g)
    assert x0 is None and len(dirs) == 2
    x0, _ = pointwise_generators([1, 1, 1], [], [const([1, 1, 0])], [sconst(3, 0)], g)
    np.testing.assert_array_equal(x0, 0)


def test_pointwise_generators_rank_error_names_point():
    f = ScalarField(2, [(0.5, (2, 0)), (0.5, (0, 2))])
    grad = gradient_field(f, Metric.identity(2))
    with pytest.raises(RankDeficiencyError) as info:
        pointwise_generators([0, 0], [grad], [], [], Metric.identity(2))
    assert info.value.point == (0.0, 0.0)


# frame completion

def test_completion_of_constant_fields_matches_intersect():
    fields = [const([1, 1, 0]), const([0, 1, 0])]
    Z = frame_completion_field(fields, [], [[0, 0, 0], [1, 2, 3]])
    assert [z.label for z in Z] == ["e2"]


def test_completion_example_near_origin():
    X1 = VectorFieldHandle(3, lambda x: np.array([1.0, 0.0, x[0]]))
    sample = [[0, 0, 0], [0.1, 0, 0], [-0.1, 0.05, 0], [0.05, 0, -0.1]]
    Z = frame_completion_field([X1], [], sample)
    np.testing.assert_array_equal(np.vstack([z([0, 0, 0]) for z in Z]), np.eye(3)[[1, 2]])


def test_completion_region_too_large_reports_point():
    X1 = VectorFieldHandle(2, lambda x: np.array([x[0], 1.0 - x[0]]))
    with pytest.raises(RegionTooLargeError) as info:
        frame_completion_field([X1], [], [[0, 0], [1, 0]])
    assert info.value.point == (1.0, 0.0)
    assert "x=(1.0, 0.0)" in str(info.value)


def test_completion_rank_drop_in_sample():
    X1 = VectorFieldHandle(2, lambda x: np.array([x[0], 0.0]))
    with pytest.raises(RankDeficiencyError):
        frame_completion_field([X1], [], [[1, 0], [0, 0]])


# generator sets

def test_generator_set_codimension_one_example():
    gs = generator_set([const([1, 0, 0])], [const([0, 1, 0])], [sconst(3, 1)], Metric.identity(3), [[0, 0, 0]])
    x0, (gen,) = generator_values(gs, [0.3, 0.1, -4])
    np.testing.assert_allclose(x0, [0, 1, 0], atol=1e-14)
    np.testing.assert_allclose(gen, [0, 0, -1], atol=1e-14)


def test_generator_set_full_rank_is_particular_only():
    gs = generator_set([], [const([1, 0]), const([0, 1])], [sconst(2, 2), sconst(2, -3)], Metric.identity(2), [[0, 0]])
    assert gs.generators == ()
    np.testing.assert_allclose(gs.particular([5, 5]), [2, -3])


def test_generator_set_properties_with_varying_metric(rng):
    n = 5
    A = rng.normal(size=(n, n))

    def metric(x):
        B = A + np.diag(0.1 * x)
        return B @ B.T / n + np.eye(n)

    g = MetricField.from_callable(n, metric)
    I = random_polynomial(rng, n, 2)
    D = random_polynomial(rng, n, 2)
    h = random_polynomial(rng, n, 2)
    X = [gradient_field(I, g)]
    Y = [gradient_field(D, g)]
    sample = rng.normal(size=(6, n)) * 0.3
    gs = generator_set(X, Y, [h], g, sample)
    assert len(gs.generators) == n - 2
    for x in sample:
        G = metric(x)
        x0, gens = generator_values(gs, x)
        cons = [f(x) for f in X + Y]
        assert abs(x0 @ G @ cons[0]) < 1e-9
        assert abs(x0 @ G @ cons[1] - h(x)) < 1e-9 * max(1, abs(h(x)))
        U = np.vstack(gens)
        Un = U / np.linalg.norm(U, axis=1, keepdims=True)
        s = np.linalg.svd(Un, compute_uv=False)
        assert s[-1] > 1e-8 * s[0]
        for c in cons:
            assert np.max(np.abs(Un @ G @ c)) < 1e-9 * np.linalg.norm(c)
        # a different completion spans the same space
        other = homogeneous_basis(cons, Metric(G), completion=list(rng.normal(size=(n - 2, n))))
        angles = subspace_angles(U.T, np.vstack([o.to_vector() for o in other]).T)
        assert np.max(angles) < 1e-8
