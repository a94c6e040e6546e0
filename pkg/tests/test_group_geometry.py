import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coorbit.group_geometry import (Dyadic, GaborLattice, Neighborhood, PointFamily, affine,
                                    check_well_spread, default_neighborhood, group_inv,
                                    group_mul, haar_density, heisenberg, make_point_family,
                                    modular_fn)

AFF = affine(1)
HEIS = heisenberg(1)

coord = st.floats(-10, 10, allow_nan=False)
scale = st.floats(1e-3, 1e3, allow_nan=False)
affine_pt = st.tuples(coord, scale)
heis_pt = st.tuples(coord, coord)


def test_affine_product():
    np.testing.assert_allclose(group_mul(AFF, (1, 2), (3, 4)), (7, 8))


def test_heisenberg_product_is_additive():
    np.testing.assert_allclose(group_mul(HEIS, (1, 2), (3, 4)), (4, 6))


def test_inverses():
    np.testing.assert_allclose(group_inv(AFF, (2, 4)), (-0.5, 0.25))
    np.testing.assert_allclose(group_inv(AFF, (0, 1)), (0, 1))
    np.testing.assert_allclose(group_inv(HEIS, (1.5, -2)), (-1.5, 2))


def test_nonpositive_scale_rejected():
    with pytest.raises(ValueError):
        group_mul(AFF, (0, -1), (0, 1))
    with pytest.raises(ValueError):
        haar_density(AFF, (0, 0))


def test_haar_density_values():
    assert haar_density(AFF, (0, 2)) == pytest.approx(0.25)
    assert haar_density(AFF, (5, 1)) == pytest.approx(1.0)
    assert haar_density(HEIS, (3, -7)) == pytest.approx(1.0)
    assert modular_fn(HEIS, (3, -7)) == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(affine_pt, affine_pt, affine_pt)
def test_affine_associativity(p, q, r):
    lhs = group_mul(AFF, group_mul(AFF, p, q), r)
    rhs = group_mul(AFF, p, group_mul(AFF, q, r))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(heis_pt, heis_pt, heis_pt)
def test_heisenberg_associativity(p, q, r):
    lhs = group_mul(HEIS, group_mul(HEIS, p, q), r)
    rhs = group_mul(HEIS, p, group_mul(HEIS, q, r))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(affine_pt)
def test_affine_inverse(p):
    np.testing.assert_allclose(group_mul(AFF, p, group_inv(AFF, p)), (0, 1), atol=1e-12)
    np.testing.assert_allclose(group_mul(AFF, group_inv(AFF, p), p), (0, 1), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(affine_pt, affine_pt)
def test_modular_function_is_a_homomorphism(p, q):
    pq = group_mul(AFF, p, q)
    assert modular_fn(AFF, pq) == pytest.approx(modular_fn(AFF, p) * modular_fn(AFF, q),
                                                 rel=1e-12)
    assert modular_fn(AFF, p) * modular_fn(AFF, group_inv(AFF, p)) == pytest.approx(1.0)


def _affine_quadrature(fn, n=801):
    """Integral against dx ds / s^2 on a generous box, in log-scale."""
    x = np.linspace(-30, 30, n)
    u = np.linspace(np.log(1e-3), np.log(1e3), n)
    X, Ulog = np.meshgrid(x, u, indexing="ij")
    S = np.exp(Ulog)
    P = np.stack([X, S], axis=-1)
    vals = fn(P) * haar_density(AFF, P) * S     # ds = s du
    return np.trapezoid(np.trapezoid(vals, u, axis=1), x)


def _bump(P):
    x, s = P[..., 0], P[..., 1]
    return np.exp(-(x - 0.3) ** 2 - 2 * np.log(s / 1.5) ** 2)


def test_left_invariance_of_haar_quadrature():
    rng = np.random.default_rng(0)
    ref = _affine_quadrature(_bump)
    for _ in range(10):
        p = np.array([rng.uniform(-2, 2), np.exp(rng.uniform(-1, 1))])
        val = _affine_quadrature(lambda P: _bump(group_mul(AFF, p, P)))
        assert val == pytest.approx(ref, rel=1e-6)


def test_modular_function_matches_right_translation_oracle():
    # int F(y p) dHaar(y) = Delta(p)^{-1} int F dHaar
    ref = _affine_quadrature(_bump)
    for p in [(0.0, 2.0), (1.0, 0.5), (-0.7, 1.3)]:
        val = _affine_quadrature(lambda P: _bump(group_mul(AFF, P, p)))
        assert val == pytest.approx(ref / modular_fn(AFF, p), rel=1e-6)


def test_point_families():
    g = make_point_family(GaborLattice(1, 1, (0, 1), (0, 1)))
    np.testing.assert_allclose(g.points, [(0, 0), (0, 1), (1, 0), (1, 1)])
    assert g.labels == [(0, 0), (0, 1), (1, 0), (1, 1)]
    d = make_point_family(Dyadic((0, 0), (-1, 1)))
    np.testing.assert_allclose(d.points, [(-1, 1), (0, 1), (1, 1)])
    d1 = make_point_family(Dyadic((1, 1), (2, 2)))
    np.testing.assert_allclose(d1.points, [(1, 0.5)])


def test_empty_family_rejected():
    with pytest.raises(ValueError):
        make_point_family(GaborLattice(1, 1, (1, 0), (0, 1)))
    with pytest.raises(ValueError):
        make_point_family(Dyadic((0, 0), (2, 1)))


def test_family_json_roundtrip():
    for gen in [GaborLattice(0.5, 1.0, (-2, 2), (-1, 1)), Dyadic((-1, 1), (-3, 3), step=0.25),
                Dyadic((-1, 1), lambda j: (-2 ** (j + 1), 2 ** (j + 1)), step=0.25)]:
        fam = make_point_family(gen)
        text = fam.to_json()
        back = PointFamily.from_json(text)
        np.testing.assert_array_equal(back.points, fam.points)
        assert back.to_json() == text


def test_well_spread_examples():
    fam = make_point_family(GaborLattice(1, 1, (-1, 5), (-1, 5)))
    U = Neighborhood(HEIS, 0.6)
    res = check_well_spread(fam, U, [(0, 4), (0, 4)])
    assert res["u_dense_on_box"]
    # interior points meet their 3 x 3 block of neighbours (brute force oracle)
    assert res["max_overlap"] == 9
    single = make_point_family(GaborLattice(1, 1, (0, 0), (0, 0)))
    assert not check_well_spread(single, U, [(-5, 5), (-5, 5)])["u_dense_on_box"]


def test_default_neighborhoods_contain_identity():
    for spec in (HEIS, AFF):
        U = default_neighborhood(spec)
        assert U.contains(spec.identity)


def test_dyadic_family_is_dense_with_default_neighborhood():
    fam = make_point_family(Dyadic((-2, 2), (-40, 40)))
    res = check_well_spread(fam, default_neighborhood(AFF), [(-2, 2), (0.5, 2)])
    assert res["u_dense_on_box"]
    assert res["max_overlap"] < 10
