import json

import numpy as np
import pytest
from scipy import integrate

from coorbit.frames import gabor_system
from coorbit.group_geometry import GaborLattice, PointFamily, heisenberg, make_point_family
from coorbit.molecules import (ClassicalMoleculeParams, MoleculeFamily, amalgam_criterion,
                               atom_family, bump_derivative, bump_fourier,
                               classical_molecule_bandlimited, classical_molecule_check, classical_molecule_make,
                               classical_molecule_spectrum, envelope_extract, make_envelope,
                               molecule_analysis_bound, molecule_synthesis_bound,
                               power_amalgam_scan, power_envelope, verify_molecule,
                               wavelet_decay_check)
from coorbit.spaces import GroupGridFn, MixedNormParams, SequenceData, geometric_axis
from coorbit.transforms import (GaussianWindow, MeyerWindow, SignalGrid, heisenberg_grid,
                                random_bandlimited, stft)

HEIS = heisenberg(1)


@pytest.fixture(scope="module")
def gabor_atoms():
    grid = heisenberg_grid()
    g = GaussianWindow()
    sys = gabor_system(grid, g, 0.5, 1.0)
    fam = atom_family(sys)
    return grid, g, fam, envelope_extract(fam, g)


@pytest.fixture(scope="module")
def fine_grid():
    return SignalGrid(1 / 512, -8.0, np.zeros(8192))


# -- envelopes --------------------------------------------------------------

def test_atom_envelope_is_transform_of_window(gabor_atoms):
    grid, g, fam, env = gabor_atoms
    ref = np.abs(stft(g.signal(grid), g).values)
    np.testing.assert_allclose(env.H.values, ref, atol=1e-12)
    assert env.finite and env.truncation < 1e-6


def test_verify_minimal_envelope(gabor_atoms):
    grid, g, fam, env = gabor_atoms
    assert verify_molecule(fam, g, env, 1 + 1e-9)["ok"]
    half = env.scaled(0.5)
    res = verify_molecule(fam, g, half)
    assert not res["ok"] and res["worst_ratio"] == pytest.approx(2.0, rel=1e-9)
    assert half.amalgam == pytest.approx(0.5 * env.amalgam, rel=1e-12)
    with pytest.raises(ValueError):
        verify_molecule(fam, g, env, 0.5)


def test_envelope_is_translation_invariant(gabor_atoms):
    # every atom pulled back to its own location looks like the window, so
    # one atom alone already gives the full envelope
    grid, g, fam, env = gabor_atoms
    loc = PointFamily(HEIS, fam.locations.points[:1], fam.locations.labels[:1], "gabor", {})
    single = MoleculeFamily(grid, fam.values[:1], loc)
    np.testing.assert_allclose(envelope_extract(single, g).H.values, env.H.values, atol=1e-12)


def test_envelope_rejects_bad_input(gabor_atoms):
    _, _, _, env = gabor_atoms
    with pytest.raises(ValueError):
        make_envelope(env.H.with_values(-env.H.values))
    with pytest.raises(ValueError):
        MoleculeFamily(heisenberg_grid(), np.zeros((0, 256)),
                       make_point_family(GaborLattice(1, 1, (0, 0), (0, 0))))


def test_heavy_envelope_is_not_finite():
    x = np.arange(-8, 8, 0.25)
    X, W = np.meshgrid(x, x, indexing="ij")
    H = GroupGridFn(HEIS, x, x, (1 + np.abs(X) + np.abs(W)) ** -1.0)
    assert not make_envelope(H).finite
    L = GroupGridFn(HEIS, x, x, np.exp(-(X ** 2 + W ** 2)))
    assert make_envelope(L).finite


def test_envelope_save(tmp_path, gabor_atoms):
    _, _, _, env = gabor_atoms
    env.save(str(tmp_path / "env"))
    side = json.loads((tmp_path / "env.json").read_text())
    assert side["finite"] and side["amalgam"] == pytest.approx(env.amalgam)
    assert (tmp_path / "env.npz").exists()


# -- synthesis and analysis bounds -------------------------------------------

def test_synthesis_bound(gabor_atoms):
    grid, g, fam, env = gabor_atoms
    rng = np.random.default_rng(0)
    prm = MixedNormParams(2, 2)
    for _ in range(3):
        c = SequenceData(fam.locations, rng.standard_normal(len(fam)))
        r = molecule_synthesis_bound(fam, g, env, c, prm)
        r2 = molecule_synthesis_bound(fam, g, env, c.scaled(2.0), prm)
        assert 0 < r["ratio"] <= 1
        assert r2["ratio"] == pytest.approx(r["ratio"], rel=1e-12)
    with pytest.raises(ValueError):
        three = make_point_family(GaborLattice(1, 1, (0, 2), (0, 0)))
        molecule_synthesis_bound(fam, g, env, SequenceData(three, np.ones(3)), prm)


def test_analysis_bound(gabor_atoms):
    grid, g, fam, env = gabor_atoms
    f = random_bandlimited(grid, np.random.default_rng(1))
    r = molecule_analysis_bound(fam, g, env, f, MixedNormParams(2, 2))
    assert np.isfinite(r["ratio"]) and r["left_amalgam"] == pytest.approx(env.amalgam, rel=1e-9)
    x = np.arange(-8, 8, 0.25)
    X, W = np.meshgrid(x, x, indexing="ij")
    heavy = make_envelope(GroupGridFn(HEIS, x, x, (1 + np.abs(X) + np.abs(W)) ** -1.0))
    with pytest.raises(ValueError):
        molecule_analysis_bound(fam, g, heavy, f, MixedNormParams(2, 2))


# -- power envelopes --------------------------------------------------------

@pytest.mark.parametrize("abc,sigma,expected", [
    ((1, 3, 2), 0.0, True), ((1, 3, 1), 0.0, False), ((1, 1, 2), 0.0, False),
    ((0, 3, 2), 0.0, False), ((1, 3, 2), 1.5, True), ((1, 3, 2), 2.0, False),
    ((0, 3, 2), 0.5, True)])
def test_amalgam_criterion(abc, sigma, expected):
    assert amalgam_criterion(*abc, sigma) is expected


@pytest.mark.parametrize("abc", [(1, 3, 2), (1, 3, 1), (2, 2, 2)])
def test_power_amalgam_scan_agrees_with_criterion(abc):
    r = power_amalgam_scan(*abc)
    assert r["finite"] is amalgam_criterion(*abc, 0.0)
    assert np.all(np.diff(r["norms"]) >= 0)


def test_power_envelope_values():
    assert power_envelope(0.0, 1.0, 1, 3, 2) == pytest.approx(1 / 8)
    assert power_envelope(1.0, 1.0, 1, 3, 2, C=4) == pytest.approx(4 / 8 / 4)


# -- classical molecules ----------------------------------------------------

def test_bump_derivatives_match_closed_forms():
    t = np.linspace(-0.95, 0.95, 41)
    psi = np.exp(-1 / (1 - t ** 2))
    np.testing.assert_allclose(bump_derivative(t, 0), psi)
    np.testing.assert_allclose(bump_derivative(t, 1), -2 * t / (1 - t ** 2) ** 2 * psi, atol=1e-14)
    # higher orders against a 4th-order central difference of the previous one
    h = 1e-4
    for n in (2, 3, 4):
        fd = (-bump_derivative(t + 2 * h, n - 1) + 8 * bump_derivative(t + h, n - 1)
              - 8 * bump_derivative(t - h, n - 1) + bump_derivative(t - 2 * h, n - 1)) / (12 * h)
        np.testing.assert_allclose(bump_derivative(t, n), fd, rtol=1e-5, atol=1e-8)
    assert np.all(bump_derivative(np.array([-1.0, 1.0, 1.5]), 3) == 0)


def test_bump_fourier_matches_quadrature():
    for xi in (0.0, 0.3, 1.7, 4.0):
        ref = integrate.quad(lambda t: np.exp(-1 / (1 - t * t)) * np.cos(2 * np.pi * xi * t),
                             -1, 1, limit=200, epsabs=1e-14)[0]
        assert bump_fourier(np.array(xi)) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("M,N,j,k", [(4, 2, 0, 0), (4, 2, 1, 3), (4, 2, -1, -1), (2, 0, 0, 2)])
def test_classical_molecule_conditions(fine_grid, M, N, j, k):
    p = ClassicalMoleculeParams(M, N, j, k)
    m = classical_molecule_make(p, fine_grid)
    r = classical_molecule_check(m, p)
    assert r["decay_ok"] and r["moments_ok"]
    # the normalization makes the bound tight
    assert max(r["details"]["decay_ratios"]) > 0.9


def test_missing_moment_is_detected(fine_grid):
    p = ClassicalMoleculeParams(4, 2, 0, 0)
    # one vanishing moment fewer than required
    m = classical_molecule_make(ClassicalMoleculeParams(4, 1, 0, 0), fine_grid)
    assert not classical_molecule_check(m, p)["moments_ok"]
    shifted = fine_grid.with_values(classical_molecule_make(p, fine_grid).values + 0.01)
    assert not classical_molecule_check(shifted, p)["moments_ok"]


def test_classical_params_validation(fine_grid):
    for bad in ((-2, 0), (0, 9), (1.5, 0)):
        with pytest.raises(ValueError):
            ClassicalMoleculeParams(*bad)
    coarse = SignalGrid(0.25, -8.0, np.zeros(64))
    p = ClassicalMoleculeParams(4, 2, 0, 0)
    with pytest.raises(ValueError):
        classical_molecule_check(classical_molecule_make(p, coarse), p)


def test_classical_spectrum_matches_fft(fine_grid):
    p = ClassicalMoleculeParams(4, 2, 1, 1)
    m = classical_molecule_make(p, fine_grid)
    spec = classical_molecule_spectrum(p, fine_grid)
    # point samples alias: the bump spectrum only decays like exp(-sqrt|w|)
    assert np.abs(m.spectrum() - spec).max() <= 1e-6 * np.abs(spec).max()


def test_wavelet_decay_check_detects_wrong_exponents(fine_grid):
    g = MeyerWindow()
    grid = SignalGrid(1 / 64, -64.0, np.zeros(8192))
    p = ClassicalMoleculeParams(4, 2, 0, 0)
    m = grid.with_values(np.fft.ifft(classical_molecule_spectrum(p, grid)
                                     * np.exp(2j * np.pi * grid.freqs * grid.offset)) / grid.spacing)
    scales = geometric_axis(2.0 ** -4, 2.0 ** 3, 8)
    ok = wavelet_decay_check(m, g, (1, 3, 2), scales)
    assert ok["ok"] and np.isfinite(ok["C_fit"])
    # small-scale decay faster than the molecule provides
    assert not wavelet_decay_check(m, g, (6, 7, 2), scales)["ok"]


def test_wavelet_decay_check_in_member_coordinates():
    # a wider member looks slower than the envelope in absolute scales until
    # s is well past its own width; in its own coordinates it fits like m_{0,0}
    g = MeyerWindow()
    grid = SignalGrid(1 / 64, -512.0, np.zeros(65536))
    p = ClassicalMoleculeParams(4, 2, -1, -1)
    m = classical_molecule_bandlimited(p, grid)
    own = wavelet_decay_check(m, g, (1, 3, 2), center=p.corner, dilation=2.0)
    assert own["ok"]
    absolute = wavelet_decay_check(m, g, (1, 3, 2), center=p.corner)
    assert absolute["failures"]["large_scale"]
