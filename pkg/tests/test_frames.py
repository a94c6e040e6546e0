import numpy as np
import pytest

from coorbit.frames import (FrameSystem, analysis, dual_coefficients, dual_window, dyadic_system,
                            frame_bounds, frame_operator_apply, gabor_system, gram_frame_bounds,
                            random_test_signals, reconstruct, solve_frame, synthesis, with_dual)
from coorbit.spaces import SequenceData
from coorbit.transforms import (GaussianWindow, MeyerWindow, box_window, heisenberg_grid,
                                random_bandlimited, signal_grid)


@pytest.fixture(scope="module")
def grid():
    return heisenberg_grid()


@pytest.fixture(scope="module")
def gauss_half(grid):
    return with_dual(gabor_system(grid, GaussianWindow(), 0.5, 1.0))


def test_orthonormal_gabor_basis(grid):
    sys = gabor_system(grid, box_window(grid), 1.0, 1.0)
    assert len(sys.family) == grid.n
    fb = frame_bounds(sys)
    assert fb["A_est"] == pytest.approx(1.0, abs=1e-6)
    assert fb["B_est"] == pytest.approx(1.0, abs=1e-6)
    G = sys.atoms @ np.conj(sys.atoms.T) * grid.spacing
    np.testing.assert_allclose(G, np.eye(len(G)), atol=1e-12)


def test_lattice_must_fit_grid(grid):
    with pytest.raises(ValueError):
        gabor_system(grid, GaussianWindow(), 0.3, 1.0)


def test_frame_bounds_match_dense_oracle():
    small = signal_grid(64, 8.0)
    sys = gabor_system(small, GaussianWindow(), 0.5, 1.0)
    fb = frame_bounds(sys)
    A, B = gram_frame_bounds(sys)
    assert fb["A_est"] == pytest.approx(A, rel=1e-8)
    assert fb["B_est"] == pytest.approx(B, rel=1e-8)
    assert fb["verdict"] == "frame"


def test_critical_gaussian_is_near_singular(grid):
    fb = frame_bounds(gabor_system(grid, GaussianWindow(), 1.0, 1.0))
    assert fb["verdict"] == "near-singular"
    assert fb["A_est"] < 0.05 * fb["B_est"]


def test_analysis_matches_inner_products(gauss_half, grid):
    f = random_bandlimited(grid, np.random.default_rng(0))
    c = analysis(gauss_half, f).coeffs
    direct = np.conj(gauss_half.atoms) @ f.values * grid.spacing
    np.testing.assert_allclose(c, direct, atol=1e-12)
    with pytest.raises(ValueError):
        analysis(gauss_half, signal_grid(64, 8.0))


def test_synthesis_is_adjoint_of_analysis(gauss_half, grid):
    rng = np.random.default_rng(1)
    f = random_bandlimited(grid, rng)
    c = rng.standard_normal(len(gauss_half.family)) + 1j * rng.standard_normal(len(gauss_half.family))
    lhs = synthesis(gauss_half, SequenceData(gauss_half.family, c)).inner(f)
    rhs = np.sum(c * np.conj(analysis(gauss_half, f).coeffs))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_gaussian_dual_reconstructs(gauss_half, grid):
    rng = np.random.default_rng(2)
    for _ in range(3):
        f = random_bandlimited(grid, rng)
        err = reconstruct(gauss_half, f).values - f.values
        assert np.linalg.norm(err) <= 1e-8 * np.linalg.norm(f.values)
    # the dual of the dual frame operator: S gamma = g
    g = gauss_half.window.signal(grid)
    Sg = frame_operator_apply(gauss_half, gauss_half.dual_window)
    np.testing.assert_allclose(Sg.values, g.values, atol=1e-10)


def test_solve_frame_reports_convergence(gauss_half, grid):
    f = random_bandlimited(grid, np.random.default_rng(3))
    _, info = solve_frame(gauss_half, f)
    assert info["converged"] and info["residual"] < 1e-10


def test_dyadic_frame_operator_is_fourier_multiplier():
    grid = signal_grid(1024, 64.0)
    m = MeyerWindow()
    sys = dyadic_system(grid, m, j_range=(-1, 1))
    a = np.abs(grid.freqs)
    keep = (a >= sys.band[0]) & (a <= sys.band[1])
    mult = 4 * sum(np.abs(m.fourier(2.0 ** -j * grid.freqs)) ** 2 for j in (-1, 0, 1))
    f = random_bandlimited(grid, np.random.default_rng(4), band=(0.6, 3.0))
    Sf = frame_operator_apply(sys, f)
    np.testing.assert_allclose(Sf.spectrum(), f.spectrum() * mult * keep, atol=1e-10)
    fb = frame_bounds(sys)
    assert fb["A_est"] == pytest.approx(mult[keep].min(), rel=1e-8)
    assert fb["B_est"] == pytest.approx(mult[keep].max(), rel=1e-8)


def test_dyadic_dual_coefficients_reconstruct():
    grid = signal_grid(1024, 64.0)
    sys = dyadic_system(grid, MeyerWindow(), j_range=(-1, 1))
    f = random_bandlimited(grid, np.random.default_rng(5), band=(0.6, 3.0))
    np.testing.assert_allclose(reconstruct(sys, f).values, f.values, atol=1e-9)
    with pytest.raises(ValueError):
        dual_window(sys)


def test_json_roundtrip(gauss_half, grid):
    back = FrameSystem.from_json(gauss_half.to_json())
    np.testing.assert_array_equal(back.dual_window.values, gauss_half.dual_window.values)
    np.testing.assert_array_equal(back.family.points, gauss_half.family.points)
    assert back.to_json() == gauss_half.to_json()
    box = gabor_system(grid, box_window(grid), 1.0, 1.0)
    back_box = FrameSystem.from_json(box.to_json())
    np.testing.assert_array_equal(back_box.window.samples(grid), box.window.samples(grid))
    dy = dyadic_system(signal_grid(256, 32.0), MeyerWindow(), j_range=(-1, 1))
    assert FrameSystem.from_json(dy.to_json()).to_json() == dy.to_json()


def test_random_test_signals_are_seeded(gauss_half):
    a = random_test_signals(gauss_half, 3, seed=7)
    b = random_test_signals(gauss_half, 3, seed=7)
    c = random_test_signals(gauss_half, 3, seed=8)
    for u, v, w in zip(a, b, c):
        np.testing.assert_array_equal(u.values, v.values)
        assert u.norm() == pytest.approx(1.0)
        assert not np.allclose(u.values, w.values)
