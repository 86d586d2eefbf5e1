import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affgen import Metric, Multivector
from affgen.errors import DomainError
from affgen.exterior import (
    canonical_blade,
    gram_matrix,
    hodge_star,
    inner_product_p,
    norm_p,
    volume_form,
    wedge,
    wedge_vectors,
)

from conftest import leibniz_det, random_homogeneous, random_spd


def e(n, *idx):
    return Multivector.blade(n, idx)


# canonical_blade

@pytest.mark.parametrize(
    "raw,expected",
    [((2, 1), ((1, 2), -1)), ((0, 0), ((), 0)), ((2, 0, 1), ((0, 1, 2), 1)), ((), ((), 1))],
)
def test_canonical_blade(raw, expected):
    assert canonical_blade(raw, 3) == expected


def test_canonical_blade_out_of_range():
    with pytest.raises(DomainError):
        canonical_blade((0, 3), 3)


# wedge

def test_wedge_basic_identities():
    n = 3
    assert wedge(e(n, 0), e(n, 0)) == Multivector(n)
    assert wedge(e(n, 0), e(n, 1)) == e(n, 0, 1)
    assert wedge(e(n, 1), e(n, 0)) == -e(n, 0, 1)
    assert (e(n, 0) + e(n, 1)) ^ e(n, 2) == e(n, 0, 2) + e(n, 1, 2)


def test_wedge_dimension_mismatch():
    with pytest.raises(DomainError):
        wedge(e(2, 0), e(3, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_wedge_graded_antisymmetry_and_associativity(n, seed):
    rng = np.random.default_rng(seed)
    p, q, r = rng.integers(0, n + 1, size=3)
    a, b, c = (random_homogeneous(rng, n, int(d)) for d in (p, q, r))
    assert (a ^ b).allclose((b ^ a) * (-1) ** (p * q), atol=1e-12)
    assert ((a ^ b) ^ c).allclose(a ^ (b ^ c), atol=1e-10)


def test_wedge_vectors_matches_iterated_wedge(rng):
    n = 5
    vs = rng.normal(size=(3, n))
    iterated = Multivector.vector(vs[0]) ^ Multivector.vector(vs[1]) ^ Multivector.vector(vs[2])
    assert wedge_vectors(vs).allclose(iterated)
    assert wedge_vectors([], n) == Multivector.scalar(n)


def test_top_coefficient_is_determinant(rng):
    for n in range(1, 6):
        V = rng.normal(size=(n, n))
        top = wedge_vectors(V).coeffs[tuple(range(n))]
        assert top == pytest.approx(leibniz_det(V), rel=1e-12, abs=1e-12)


# inner products

def test_inner_product_examples():
    g = Metric.identity(3)
    assert inner_product_p(e(3, 0, 1), e(3, 0, 1), g) == pytest.approx(1.0)
    v = Multivector.vector([1, 1, 0])
    w = Multivector.vector([1, 0, 0])
    assert inner_product_p(v ^ w, v ^ w, g) == pytest.approx(leibniz_det([[2, 1], [1, 1]]))
    assert inner_product_p(v ^ w, w ^ v, g) == pytest.approx(-1.0)
    assert inner_product_p(Multivector.scalar(3, 2.0), Multivector.scalar(3, 3.0), g) == 6.0


def test_inner_product_rejects_mixed_grades():
    g = Metric.identity(2)
    with pytest.raises(DomainError):
        inner_product_p(e(2, 0) + Multivector.scalar(2), e(2, 0), g)
    with pytest.raises(DomainError):
        inner_product_p(e(2, 0), e(2, 0, 1), g)


def test_decomposable_inner_product_is_gram_determinant(rng):
    # <v1^..^vp, w1^..^wp> = det[g(v_i, w_j)], checked with a permutation expansion
    for n in range(2, 7):
        g = random_spd(rng, n)
        for p in range(1, n + 1):
            V = rng.normal(size=(p, n))
            W = rng.normal(size=(p, n))
            lhs = inner_product_p(wedge_vectors(V), wedge_vectors(W), g)
            assert lhs == pytest.approx(leibniz_det(V @ g.matrix @ W.T), rel=1e-9, abs=1e-10)


def test_gram_matrix_and_norms():
    g = Metric.identity(2)
    np.testing.assert_allclose(gram_matrix([e(2, 0), e(2, 1)], g), np.eye(2))
    np.testing.assert_allclose(
        gram_matrix([Multivector.vector([1, 1]), Multivector.vector([1, 0])], g), [[2, 1], [1, 1]]
    )
    with pytest.raises(DomainError):
        gram_matrix([e(2, 0, 1)], g)
    g3 = Metric.identity(3)
    assert norm_p(e(3, 0, 1, 2), g3) == pytest.approx(1.0)
    assert norm_p(e(3, 0) * 2, g3) == pytest.approx(2.0)
    assert norm_p(Multivector.vector([1, 1, 0]) ^ Multivector.vector([1, 0, 0]), g3) == pytest.approx(1.0)


# volume form and star

def test_volume_form():
    assert volume_form(Metric.identity(3)) == e(3, 0, 1, 2)
    assert volume_form(Metric.diagonal([4, 1])).allclose(e(2, 0, 1) * 0.5)


def test_volume_form_has_unit_norm(rng):
    for n in range(1, 7):
        g = random_spd(rng, n, spread=0.3)
        assert norm_p(volume_form(g), g) == pytest.approx(1.0, rel=1e-12)


def test_star_examples():
    g = Metric.identity(3)
    assert hodge_star(e(3, 0), g).allclose(e(3, 1, 2))
    assert hodge_star(e(3, 0, 1), g).allclose(e(3, 2))
    assert hodge_star(Multivector.scalar(3), g).allclose(e(3, 0, 1, 2))


def test_star_of_mixed_grade_rejected():
    with pytest.raises(DomainError):
        hodge_star(e(3, 0) + e(3, 0, 1), Metric.identity(3))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_star_defining_relation_on_basis(n, rng):
    g = random_spd(rng, n)
    mu = volume_form(g)
    top = tuple(range(n))
    for p in range(n + 1):
        nu = random_homogeneous(rng, n, p)
        s = hodge_star(nu, g)
        for J in itertools.combinations(range(n), n - p):
            w = e(n, *J)
            lhs = (nu ^ w).coeffs.get(top, 0.0)
            rhs = inner_product_p(s, w, g) * mu.coeffs[top]
            assert lhs == pytest.approx(rhs, abs=1e-11)


def test_double_star_and_isometry(rng):
    for n in range(1, 7):
        g = random_spd(rng, n)
        for p in range(n + 1):
            a = random_homogeneous(rng, n, p)
            b = random_homogeneous(rng, n, p)
            assert hodge_star(hodge_star(a, g), g).allclose(a * (-1) ** (p * (n - p)), atol=1e-11)
            lhs = inner_product_p(hodge_star(a, g), hodge_star(b, g), g)
            assert lhs == pytest.approx(inner_product_p(a, b, g), rel=1e-10, abs=1e-11)


def test_cross_product_in_three_dimensions(rng):
    g = Metric.identity(3)
    u, v = rng.normal(size=(2, 3))
    s = hodge_star(wedge_vectors([u, v]), g)
    np.testing.assert_allclose(s.to_vector(), np.cross(u, v), atol=1e-14)


# metric validation

@pytest.mark.parametrize(
    "matrix",
    [
        [[1.0, 0.1], [0.0, 1.0]],
        [[1.0, 0.0], [0.0, -1.0]],
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        [[np.nan, 0.0], [0.0, 1.0]],
    ],
)
def test_metric_rejects_bad_matrices(matrix):
    with pytest.raises(DomainError):
        Metric(matrix)


def test_multivector_accessors():
    m = Multivector.from_dict(3, {(0, 2): 2.0, (1,): -1.0})
    assert m.grades() == {1, 2}
    assert not m.is_homogeneous(2)
    with pytest.raises(DomainError):
        m.grade()
    assert Multivector(3).grade() is None
    assert Multivector.from_dict(3, {(2, 0): 1.0}) == -e(3, 0, 2)
    np.testing.assert_array_equal(Multivector.from_grade(3, 2, [1, 2, 3]).grade_part(2), [1, 2, 3])
