import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from coorbit.group_geometry import (Dyadic, GaborLattice, Neighborhood, affine, default_neighborhood,
                                    group_inv, group_mul, heisenberg, make_point_family,
                                    modular_fn)
from coorbit.spaces import (Constant, GroupGridFn, MixedNormParams, PolynomialPhase, PowerScale,
                            SequenceData, amalgam_integrand, amalgam_norm, boundary_fraction,
                            convolution_bound_check, default_raster_grid, eval_weight,
                            geometric_axis, local_max, mixed_norm, norm_report,
                            reflected_local_max, sample_function, sequence_norm,
                            symmetrize_weight, uniform_axis)

AFF = affine(1)
HEIS = heisenberg(1)


def power_fn(alpha, beta, gamma):
    return lambda X, S: S ** alpha * (1 + S) ** (-beta) * (1 + np.abs(X)) ** (-gamma)


def affine_grid_fn(fn, h=1 / 64, voices=16, extent=8.0, s_range=(2.0 ** -5, 2.0 ** 5)):
    x = uniform_axis(-extent, extent, h)
    s = geometric_axis(*s_range, voices)
    return sample_function(AFF, fn, x, s)


# -- weights ----------------------------------------------------------------

def test_weight_values():
    assert eval_weight(PolynomialPhase(2), (3, 4)) == pytest.approx(36.0)
    assert eval_weight(PowerScale(1), (7.0, 2.0)) == pytest.approx(0.5)
    assert eval_weight(Constant(1), (1.0, 2.0)) == pytest.approx(1.0)


def test_weight_group_mismatch():
    with pytest.raises(ValueError):
        eval_weight(PowerScale(1), (0.0, 1.0), HEIS)
    with pytest.raises(ValueError):
        Constant(0.0)


def test_symmetrized_weights():
    rng = np.random.default_rng(1)
    P = np.stack([rng.uniform(-5, 5, 200), np.exp(rng.uniform(-3, 3, 200))], axis=-1)
    w0 = symmetrize_weight(PowerScale(0.0), AFF)
    np.testing.assert_allclose(eval_weight(w0, P, AFF), np.maximum(1.0, P[:, 1]))
    Z = rng.uniform(-5, 5, (200, 2))
    wp = symmetrize_weight(PolynomialPhase(1.5), HEIS)
    np.testing.assert_allclose(eval_weight(wp, Z, HEIS), eval_weight(PolynomialPhase(1.5), Z))
    for base in (PowerScale(0.7), PowerScale(-0.4)):
        ws = eval_weight(symmetrize_weight(base, AFF), P, AFF)
        inv = group_inv(AFF, P)
        assert np.all(ws >= eval_weight(base, P, AFF))
        assert np.all(ws >= eval_weight(base, inv, AFF) * modular_fn(AFF, inv) * (1 - 1e-14))


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 4), st.lists(st.floats(-20, 20), min_size=4, max_size=4))
def test_polynomial_weight_submultiplicative(s, c):
    p, q = np.array(c[:2]), np.array(c[2:])
    w = PolynomialPhase(s)
    assert eval_weight(w, p + q) <= 2 ** s * eval_weight(w, p) * eval_weight(w, q) + 1e-9
    assert eval_weight(w, p + q) <= eval_weight(w, p) * eval_weight(w, q) * (1 + 1e-12)


# -- mixed norms ------------------------------------------------------------

def test_single_cell_norm():
    x = uniform_axis(0, 1, 0.1)
    y = uniform_axis(0, 1, 0.2)
    vals = np.zeros((len(x), len(y)))
    vals[3, 2] = 1.0
    F = GroupGridFn(HEIS, x, y, vals)
    V = 0.1 * 0.2
    for p in (1.0, 2.0, 3.5):
        assert mixed_norm(F, MixedNormParams(p, p)) == pytest.approx(V ** (1 / p))
    assert mixed_norm(F, MixedNormParams(np.inf, np.inf)) == 1.0


def test_mixed_l2_is_fubini():
    rng = np.random.default_rng(2)
    x, y = uniform_axis(-2, 2, 0.05), uniform_axis(-1, 1, 0.1)
    F = GroupGridFn(HEIS, x, y, rng.standard_normal((len(x), len(y))))
    direct = np.sqrt(np.sum(np.abs(F.values) ** 2) * 0.05 * 0.1)
    assert mixed_norm(F, MixedNormParams(2, 2)) == pytest.approx(direct, rel=1e-12)


def test_nan_rejected():
    F = GroupGridFn(HEIS, [0, 1], [0, 1], np.array([[1, np.nan], [0, 0]]))
    with pytest.raises(ValueError):
        mixed_norm(F, MixedNormParams())


def test_power_envelope_norm_matches_quadrature():
    # p = q = 1 of s^2 (1+s)^-4 (1+|x|)^-2 against ds/s^2 on the sampled domain
    h, voices = 1 / 64, 16
    F = affine_grid_fn(power_fn(2, 4, 2), h, voices)
    rho = 2 ** (1 / voices)
    xa, xb = F.x[0] - h / 2, F.x[-1] + h / 2
    sa, sb = F.y[0] / np.sqrt(rho), F.y[-1] * np.sqrt(rho)
    ix = integrate.quad(lambda t: (1 + abs(t)) ** -2, xa, xb, points=[0])[0]
    is_ = integrate.quad(lambda t: (1 + t) ** -4, sa, sb)[0]
    assert mixed_norm(F, MixedNormParams(1, 1)) == pytest.approx(ix * is_, rel=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([1.0, 2.0, 3.0, np.inf]), st.sampled_from([1.0, 2.0, np.inf]),
       st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), st.integers(0, 2 ** 16))
def test_homogeneity_and_solidity(p, q, lam, seed):
    rng = np.random.default_rng(seed)
    F = affine_grid_fn(power_fn(1, 3, 2), h=1 / 4, voices=4)
    F = F.with_values(F.values * (1 + rng.random(F.values.shape)))
    prm = MixedNormParams(p, q, PowerScale(0.3))
    n = mixed_norm(F, prm)
    assert mixed_norm(F.with_values(lam * F.values), prm) == pytest.approx(abs(lam) * n, rel=1e-12)
    G = F.with_values(F.values * rng.random(F.values.shape))
    assert mixed_norm(G, prm) <= n * (1 + 1e-12)


def test_boundary_fraction_detects_heavy_tail():
    prm = MixedNormParams(1, 1)
    fr = [boundary_fraction(affine_grid_fn(power_fn(2, 4, g), h=1 / 8, voices=8), prm)
          for g in (3.0, 1.0, 0.5, 0.0)]
    assert fr[0] < 0.05
    assert np.all(np.diff(fr) > 0)
    assert fr[-1] > 3 * fr[0]


def test_norm_report_is_json():
    rep = json.loads(norm_report(1.5, MixedNormParams(2, np.inf), 1e-4))
    assert rep == {"norm": 1.5, "p": 2.0, "q": "inf", "weight": {"kind": "constant", "param": 1.0},
                   "truncation_estimate": 1e-4}


# -- sequence norms ---------------------------------------------------------

def test_sequence_norm_single_coefficient():
    fam = make_point_family(Dyadic((0, 0), (0, 0)))
    U = default_neighborhood(AFF)
    c = SequenceData(fam, [1.0])
    assert sequence_norm(c, MixedNormParams(1, 1), U) == pytest.approx(U.haar_volume(), rel=1e-12)


def test_sequence_norm_gabor_l2():
    fam = make_point_family(GaborLattice(1, 1, (-2, 2), (-2, 2)))
    rng = np.random.default_rng(3)
    c = SequenceData(fam, rng.standard_normal(len(fam)))
    U = Neighborhood(HEIS, 0.5)
    ref = np.linalg.norm(c.coeffs) * 1.0 ** 0.5
    assert sequence_norm(c, MixedNormParams(2, 2), U) == pytest.approx(ref, rel=1e-12)


def test_dyadic_sequence_weights_and_raster_agree():
    fam = make_point_family(Dyadic((0, 1), (-3, 3)))
    U = default_neighborhood(AFF)
    prm = MixedNormParams(1, 1, PowerScale(1.0))
    ones = [SequenceData(fam, (np.array(fam.labels) == lab).all(axis=1).astype(float))
            for lab in [(0, 0), (1, 0)]]
    w0, w1 = (sequence_norm(c, prm, U) for c in ones)
    assert w1 / w0 == pytest.approx(2.0, rel=1e-10)
    rng = np.random.default_rng(4)
    c = SequenceData(fam, rng.standard_normal(len(fam)))
    closed = sequence_norm(c, prm, U)
    raster = sequence_norm(c, prm, U, default_raster_grid(fam, U, per_cell=128))
    assert raster == pytest.approx(closed, rel=1e-3)


def test_overlapping_cells_use_rasterization():
    fam = make_point_family(GaborLattice(0.5, 0.5, (-2, 2), (-2, 2)))
    U = Neighborhood(HEIS, 0.5)
    c = SequenceData(fam, np.ones(len(fam)))
    val = sequence_norm(c, MixedNormParams(1, 1), U)
    # overlapping unit boxes: sum of box areas exceeds the union but the
    # rasterized indicator sum integrates to exactly that sum
    assert val == pytest.approx(len(fam) * 1.0, rel=1e-6)


# -- local maximum functions ------------------------------------------------

def test_local_max_of_constant():
    F = affine_grid_fn(lambda X, S: np.ones_like(X), h=1 / 8, voices=8, extent=4,
                       s_range=(0.25, 4))
    U = default_neighborhood(AFF)
    G = local_max(F, U, "left")
    np.testing.assert_allclose(G.values, 1.0)
    R = local_max(F, U, "right", out_grid=affine_grid_fn(lambda X, S: X, h=1 / 8, voices=8,
                                                         extent=0.5, s_range=(0.5, 2)))
    np.testing.assert_allclose(R.values, 1.0)


def test_left_local_max_of_spike_is_inverse_neighborhood():
    x = uniform_axis(-2, 2, 1 / 16)
    s = geometric_axis(0.25, 4, 16)
    vals = np.zeros((len(x), len(s)))
    i0, j0 = np.argmin(np.abs(x)), np.argmin(np.abs(np.log(s)))
    vals[i0, j0] = 1.0
    F = GroupGridFn(AFF, x, s, vals)
    U = default_neighborhood(AFF)
    G = local_max(F, U, "left").values
    # brute force: identity in pU  <=>  p^{-1} in U
    P = F.points()
    inside = U.contains(group_inv(AFF, P))
    assert np.mean(G.astype(bool) == inside) > 0.98


def test_local_max_dominates():
    rng = np.random.default_rng(5)
    F = affine_grid_fn(power_fn(1, 3, 2), h=1 / 8, voices=8, extent=4, s_range=(0.25, 4))
    F = F.with_values(F.values * rng.random(F.values.shape))
    U = default_neighborhood(AFF)
    assert np.all(local_max(F, U, "left").values >= np.abs(F.values))
    assert np.all(reflected_local_max(F, U).values >= np.abs(F.values))


def test_right_local_max_bound_on_power_envelope():
    # F#R(x, s) <= C s^{-alpha+beta} (1+s)^{-beta} (1+|x/s|)^{-gamma}
    a, b, c = 2, 4, 2
    F = affine_grid_fn(power_fn(a, b, c), h=1 / 16, voices=16)
    U = default_neighborhood(AFF)
    out = affine_grid_fn(lambda X, S: X, h=1 / 4, voices=4, extent=2, s_range=(0.25, 4))
    R = local_max(F, U, "right", out_grid=out)
    X, S = out.points()[..., 0], out.points()[..., 1]
    bound = S ** (-a + b) * (1 + S) ** (-b) * (1 + np.abs(X / S)) ** (-c)
    ratio = R.values / bound
    C = ratio.max()
    assert np.isfinite(C) and C < 50
    assert np.all(R.values <= C * bound * (1 + 1e-12))


def _discrete_sup_oracle(F, U):
    """sup of |F| over the grid samples of U^{-1} y, by brute force."""
    P = F.points().reshape(-1, 2)
    A = np.abs(F.values).reshape(-1)
    out = np.zeros(len(P))
    for k, y in enumerate(P):
        z = group_mul(AFF, group_inv(AFF, P), y[None, :])   # z^{-1}... test membership
        # z in U^{-1} y  <=>  y z^{-1} in U
        members = U.contains(group_mul(AFF, y[None, :], group_inv(AFF, P)))
        out[k] = A[members].max() if members.any() else 0.0
        del z
    return out.reshape(F.values.shape)


def test_reflected_local_max_matches_brute_force():
    F = affine_grid_fn(power_fn(1, 3, 2), h=1 / 4, voices=4, extent=3, s_range=(0.25, 4))
    U = Neighborhood(AFF, 0.5, 2 ** 0.5)
    got = reflected_local_max(F, U).values
    ref = _discrete_sup_oracle(F, U)
    interior = (slice(4, -4), slice(2, -2))
    assert np.mean(np.isclose(got[interior], ref[interior], rtol=1e-12)) > 0.9
    assert np.all(got[interior] <= ref[interior] * (1 + 1e-12) + 1e-300)


def _continuous_right_amalgam(F, U, w):
    # M(y) = sup over t in [1/b, b], |v| <= a t of F(v + t y_x, t y_s)
    Y = F.points()
    yx, ys = Y[..., 0], Y[..., 1]
    M = np.zeros(yx.shape)
    for t in np.geomspace(1 / U.b, U.b, 1201):
        xs = np.maximum(np.abs(t * yx) - U.a * t, 0)
        M = np.maximum(M, (t * ys) ** 2 * (1 + t * ys) ** -4 * (1 + xs) ** -2)
    inv = group_inv(AFF, Y)
    return float(np.sum(M * eval_weight(w, inv, AFF) * modular_fn(AFF, inv) * F.haar_weights))


@pytest.mark.slow
def test_amalgam_norm_converges_to_continuous_sup():
    U, w = default_neighborhood(AFF), PowerScale(0.0)
    errs = []
    for h, voices in [(1 / 32, 8), (1 / 128, 32)]:
        F = affine_grid_fn(power_fn(2, 4, 2), h, voices)
        errs.append(abs(amalgam_norm(F, U, w) / _continuous_right_amalgam(F, U, w) - 1))
    assert errs[1] < errs[0]
    assert errs[1] < 2e-3


def test_amalgam_basics():
    U = default_neighborhood(AFF)
    F = affine_grid_fn(power_fn(2, 4, 2), h=1 / 8, voices=8)
    assert amalgam_norm(F.with_values(0 * F.values), U, PowerScale(0)) == 0.0
    small, big = Neighborhood(AFF, 0.25, 1.2), Neighborhood(AFF, 0.75, 2.0)
    for side in ("left", "right"):
        assert amalgam_norm(F, small, PowerScale(0), side) <= amalgam_norm(F, big, PowerScale(0),
                                                                           side)
    D = amalgam_integrand(F, U, PowerScale(0))
    assert amalgam_norm(F, U, PowerScale(0)) == pytest.approx(np.sum(D.values * F.haar_weights))
    assert amalgam_norm(F, U, PowerScale(0)) >= mixed_norm(F, MixedNormParams(1, 1)) * 0.999


def test_heisenberg_cell_amalgam():
    # indicator of one cell, U = [-a, a]^2: the local max is the indicator of the
    # cell dilated by U, sampled on the grid
    h = 0.05
    x = uniform_axis(-2, 2, h)
    vals = np.zeros((len(x), len(x)))
    i0 = len(x) // 2
    vals[i0, i0] = 1.0
    F = GroupGridFn(HEIS, x, x, vals)
    U = Neighborhood(HEIS, 0.25)
    k = int(np.floor(0.25 / h + 1e-9))
    expected = ((2 * k + 1) * h) ** 2
    assert amalgam_norm(F, U, Constant()) == pytest.approx(expected, rel=1e-12)
    assert amalgam_norm(F, U, Constant(), "left") == pytest.approx(expected, rel=1e-12)


def test_serialization_roundtrip(tmp_path):
    F = affine_grid_fn(power_fn(1, 3, 2), h=1 / 2, voices=2, extent=2, s_range=(0.5, 2))
    text = F.to_csv()
    assert text.splitlines()[0] == "axis0,axis1,re,im,haar_w"
    rows = np.loadtxt(text.splitlines()[1:], delimiter=",")
    np.testing.assert_allclose(rows[:, 4].sum(), F.haar_weights.sum())
    F.save_npz(tmp_path / "f.npz")
    G = GroupGridFn.load_npz(tmp_path / "f.npz")
    np.testing.assert_array_equal(G.values, F.values)
    assert G.spec == F.spec


# -- convolution relation ---------------------------------------------------

def test_convolution_bound():
    fam = make_point_family(GaborLattice(1, 1, (-2, 2), (-2, 2)))
    x = uniform_axis(-6, 6, 1 / 8)
    H = sample_function(HEIS, lambda X, W: np.exp(-np.pi * (X ** 2 + W ** 2) / 2), x, x)
    U = Neighborhood(HEIS, 0.5)
    prm = MixedNormParams(2, 2)
    rng = np.random.default_rng(6)
    ratios = []
    for _ in range(50):
        c = SequenceData(fam, rng.standard_normal(len(fam)) + 1j * rng.standard_normal(len(fam)))
        r = convolution_bound_check(c, H, prm, U)
        r2 = convolution_bound_check(c.scaled(2.0), H, prm, U)
        assert r2["lhs"] == pytest.approx(2 * r["lhs"], rel=1e-12)
        ratios.append(r["ratio"])
    assert np.isfinite(max(ratios)) and max(ratios) <= 1.0
    zero = convolution_bound_check(SequenceData(fam, np.zeros(len(fam))), H, prm, U)
    assert zero["lhs"] == 0.0
    one = np.zeros(len(fam))
    one[len(fam) // 2] = 1.0
    single = convolution_bound_check(SequenceData(fam, one), H, prm, U)
    assert single["lhs"] == pytest.approx(mixed_norm(H, prm), rel=1e-9)
    assert single["ratio"] <= 1.0
