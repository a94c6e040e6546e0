"""
Molecules: families whose voice transforms are dominated by one common
envelope translated to the family points,

    |V_g m_i(z)| <= L_{x_i} H(z) = H(x_i^{-1} z).

This module extracts the smallest such envelope on a grid, verifies a
family against a given envelope, builds and checks classical smooth
``(M, N)``-molecules on dyadic intervals, fits power-law decay of their
wavelet transforms, and evaluates the synthesis and analysis bounds that
molecules satisfy in coorbit spaces.

Envelopes live on a grid of *relative* coordinates ``z`` around the
identity.  On the phase plane this is the full periodic phase grid; on
the affine group it is a uniform ``z_x`` axis times a geometric ``z_s``
axis, and member ``i`` is read off its own transform at ``x_i . z``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy import fft as sfft

from .group_geometry import (HEISENBERG, GroupSpec, affine, Neighborhood, PointFamily,
                             default_neighborhood)
from .spaces import (Constant, GroupGridFn, MixedNormParams, PowerScale, SequenceData,
                     WeightSpec, amalgam_integrand, amalgam_norm, boundary_fraction,
                     geometric_axis, sample_function, sequence_norm, symmetrize_weight,
                     uniform_axis)
from .transforms import (PhaseGrid, SignalGrid, TransformSettings, Window, coorbit_norm,
                         cwt, phase_axes, stft)

#: relative boundary mass above which a sampled envelope counts as not decaying
TRUNCATION_TOL = 1e-3


# ---------------------------------------------------------------------------
# families and envelopes
# ---------------------------------------------------------------------------

@dataclass
class MoleculeFamily:
    """Signals ``m_i`` on a common grid, each attached to a group point.

    ``values`` has one row per member; ``locations`` holds the points
    ``x_i`` in the same order.
    """

    grid: SignalGrid
    values: np.ndarray
    locations: PointFamily

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, complex))
        if len(self.locations) == 0 or self.values.shape[0] == 0:
            raise ValueError("empty molecule family")
        if self.values.shape != (len(self.locations), self.grid.n):
            raise ValueError("need one member per location, each on the common grid")

    @property
    def spec(self) -> GroupSpec:
        return self.locations.spec

    @property
    def members(self) -> List[SignalGrid]:
        return [self.grid.with_values(v) for v in self.values]

    def __len__(self):
        return len(self.locations)

    def synthesize(self, coeffs) -> SignalGrid:
        """``sum_i c_i m_i``."""
        return self.grid.with_values(np.asarray(coeffs) @ self.values)


def atom_family(system) -> MoleculeFamily:
    """The atoms of a frame system as a molecule family."""
    return MoleculeFamily(system.grid, system.atoms, system.family)


@dataclass(frozen=True)
class EnvelopeGrid:
    """Relative-coordinate grid for affine envelopes.

    ``z_step=None`` picks ``h / min_i s_i`` so that ``x_i + s_i z_x`` lands
    on signal samples for dyadic families.
    """

    z_extent: float = 32.0
    z_step: Optional[float] = None
    s_min: float = 2.0 ** -3
    s_max: float = 2.0 ** 3
    voices: int = 8


def envelope_axes(fam: MoleculeFamily, env_grid: EnvelopeGrid = EnvelopeGrid(),
                  phase_grid: PhaseGrid = PhaseGrid()) -> GroupGridFn:
    """Empty grid function on which envelopes of ``fam`` are sampled."""
    if fam.spec.kind == HEISENBERG:
        _, x, w, _, periodic = phase_axes(fam.grid, phase_grid)
        return GroupGridFn(fam.spec, x, w, np.zeros((len(x), len(w))), (True, periodic))
    step = env_grid.z_step
    if step is None:
        step = fam.grid.spacing / fam.locations.points[:, 1].min()
    zx = uniform_axis(-env_grid.z_extent, env_grid.z_extent + 0.5 * step, step)
    zs = geometric_axis(env_grid.s_min, env_grid.s_max, env_grid.voices)
    return GroupGridFn(fam.spec, zx, zs, np.zeros((len(zx), len(zs))))


def _pulled_back(fam: MoleculeFamily, g: Window, axes: GroupGridFn,
                 phase_grid: PhaseGrid = PhaseGrid(),
                 chunk: int = 64, radius_eps: float = 1e-8,
                 max_elements: int = 2 ** 23) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield ``(member indices, |V_g m_i(x_i . z)|)`` over ``axes``.

    Samples that fall outside the transform's domain are NaN.  On the
    affine group ``x_i . z = (x_i + s_i z_x, s_i z_s)``; the scale is used
    exactly and the position is the nearest signal sample.  The transform
    of a member at scale ``s`` is spread over about ``(s_i + s) R`` around
    ``x_i``, with ``R = g.radius(radius_eps)``, and the periodic grid folds
    whatever lies beyond half a period back in.  Samples with
    ``|s_i z_x| + s_i (1 + z_s) R > L / 2`` are therefore rejected, as are
    scales at which a band-limited window reaches beyond the Nyquist
    frequency of the grid.
    """
    grid = fam.grid
    pts = fam.locations.points
    Z = axes.points()
    if fam.spec.kind == HEISENBERG:
        for i0 in range(0, len(fam), chunk):
            idx = np.arange(i0, min(i0 + chunk, len(fam)))
            out = np.empty((len(idx),) + Z.shape[:2])
            for r, i in enumerate(idx):
                V = stft(grid.with_values(fam.values[i]), g, phase_grid)
                out[r] = np.abs(V.sample(Z + pts[i], fill=np.nan))
            yield idx, out
        return
    w = grid.freqs
    zx, zs = axes.x, axes.y
    spectra = sfft.fft(fam.values, axis=1)
    scales = pts[:, 1]
    for s in np.unique(scales):
        members = np.nonzero(scales == s)[0]
        sc = s * zs
        mult = np.conj(g.fourier(np.multiply.outer(sc, w))) * np.sqrt(sc)[:, None]   # (ns, N)
        pos = s * zx
        R = g.radius(radius_eps)
        valid = (np.abs(pos)[:, None] + s * (1.0 + zs)[None, :] * R
                 <= 0.5 * grid.period + 1e-9)                                    # (nx, ns)
        edge = getattr(g, "band_edge", None)
        if edge is not None:
            valid &= (edge / sc <= 0.5 / grid.spacing + 1e-9)[None, :]
        chunk = max(1, min(chunk, max_elements // (len(zs) * grid.n)))
        for i0 in range(0, len(members), chunk):
            idx = members[i0:i0 + chunk]
            W = sfft.ifft(spectra[idx][:, None, :] * mult[None, :, :], axis=2)   # (n, ns, N)
            k = np.round((pts[idx, 0][:, None] + pos[None, :] - grid.offset) / grid.spacing)
            k = np.mod(k.astype(np.int64), grid.n)                                # (n, nx)
            vals = np.abs(np.take_along_axis(W, k[:, None, :], axis=2))           # (n, ns, nx)
            vals = np.swapaxes(vals, 1, 2)
            vals[:, ~valid] = np.nan
            yield idx, vals


@dataclass
class Envelope:
    """Nonnegative envelope ``H`` with its cached right amalgam norm.

    ``truncation`` is the share of the amalgam integrand carried by the
    outer 5% of each grid axis.  A decaying envelope has almost none; an
    envelope with a non-integrable tail keeps a fixed share however large
    the grid, which is how sampled envelopes are judged.  For analytic
    power envelopes it is the extrapolated tail of the nested-domain scan
    instead.
    """

    H: GroupGridFn
    U: Neighborhood
    weight: WeightSpec
    amalgam: float
    truncation: float
    exponents: Optional[Dict] = None
    analytic_finite: Optional[bool] = None
    _left: Optional[float] = field(default=None, repr=False)

    @property
    def finite(self) -> bool:
        """Analytic envelopes carry the verdict of the nested-domain scan;
        sampled ones are finite when their boundary mass is negligible."""
        if self.analytic_finite is not None:
            return bool(self.analytic_finite and np.isfinite(self.amalgam))
        return bool(np.isfinite(self.amalgam) and self.truncation <= TRUNCATION_TOL)

    def left_amalgam(self) -> float:
        if self._left is None:
            self._left = amalgam_norm(self.H, self.U, self.weight, "left")
        return self._left

    def scaled(self, factor: float) -> "Envelope":
        return make_envelope(self.H.with_values(factor * self.H.values), self.U, self.weight,
                             self.exponents)

    def sidecar(self) -> Dict:
        out = {"amalgam": float(self.amalgam), "weight": self.weight.to_dict(),
               "U": {"a": self.U.a, "b": self.U.b, "group": self.U.spec.to_dict()},
               "truncation_estimate": float(self.truncation), "finite": self.finite}
        if self.exponents is not None:
            out["exponents"] = {k: float(v) for k, v in self.exponents.items()}
        return out

    def save(self, prefix: str) -> None:
        """Write ``prefix.npz`` (the grid function) and ``prefix.json``."""
        self.H.save_npz(prefix + ".npz")
        with open(prefix + ".json", "w") as fh:
            json.dump(self.sidecar(), fh, sort_keys=True, indent=2)


def make_envelope(H: GroupGridFn, U: Optional[Neighborhood] = None,
                  weight: Optional[WeightSpec] = None,
                  exponents: Optional[Dict] = None) -> Envelope:
    """Wrap a sampled envelope, computing its right amalgam norm.

    The default weight is the constant 1 on the phase plane and the
    symmetrized ``s^0`` weight on the affine group.
    """
    if np.any(np.asarray(H.values).real < 0) or np.any(np.iscomplex(H.values)):
        raise ValueError("an envelope must be real and nonnegative")
    H = H.with_values(np.asarray(H.values).real.astype(float))
    U = U if U is not None else default_neighborhood(H.spec)
    if weight is None:
        weight = Constant() if H.spec.kind == HEISENBERG \
            else symmetrize_weight(PowerScale(0.0), H.spec)
    D = amalgam_integrand(H, U, weight)
    amalgam = float(np.sum(D.values * H.haar_weights))
    trunc = boundary_fraction(GroupGridFn(H.spec, H.x, H.y, D.values, (False, False)),
                              MixedNormParams(1.0, 1.0))
    return Envelope(H, U, weight, amalgam, trunc, exponents)


def envelope_extract(fam: MoleculeFamily, g: Window, U: Optional[Neighborhood] = None,
                     weight: Optional[WeightSpec] = None,
                     env_grid: EnvelopeGrid = EnvelopeGrid(),
                     phase_grid: PhaseGrid = PhaseGrid()) -> Envelope:
    """Smallest sampled envelope: ``H(z) = max_i |V_g m_i(x_i . z)|``.

    Parameters
    ----------
    fam : MoleculeFamily
    g : Window
        Analysing window.
    U, weight
        Neighbourhood and weight of the amalgam norm (see
        :func:`make_envelope` for the defaults).
    env_grid, phase_grid
        Relative-coordinate grids for the affine and Heisenberg cases.

    Returns
    -------
    Envelope
    """
    if len(fam) == 0:
        raise ValueError("empty molecule family")
    axes = envelope_axes(fam, env_grid, phase_grid)
    H = np.zeros(axes.values.shape)
    for _, vals in _pulled_back(fam, g, axes, phase_grid):
        H = np.maximum(H, np.nanmax(np.where(np.isnan(vals), 0.0, vals), axis=0))
    return make_envelope(axes.with_values(H), U, weight)


def verify_molecule(fam: MoleculeFamily, g: Window, env: Envelope, slack: float = 1.0,
                    phase_grid: PhaseGrid = PhaseGrid(), atol: float = 1e-13) -> Dict:
    """Check ``|V_g m_i(x_i . z)| <= slack * H(z)`` on every envelope sample.

    ``atol`` (relative to ``max H``) ignores round-off where both sides are
    numerically zero.  Returns ``ok``, the worst ratio, and the member and
    relative point where it occurs.
    """
    if slack < 1:
        raise ValueError("slack must be at least 1")
    axes = env.H
    Hv = np.asarray(axes.values, float)
    floor = atol * max(Hv.max(), 1e-300)
    worst, where = 0.0, None
    for idx, vals in _pulled_back(fam, g, axes, phase_grid):
        v = np.where(np.isnan(vals), 0.0, vals)
        v = np.where(v <= floor, 0.0, v)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(v > 0, v / Hv[None], 0.0)
        k = int(np.argmax(r))
        if r.flat[k] > worst:
            m, a, b = np.unravel_index(k, r.shape)
            worst = float(r.flat[k])
            where = {"member": int(idx[m]), "z": [float(axes.x[a]), float(axes.y[b])]}
    return {"ok": bool(worst <= slack), "worst_ratio": worst, "worst_point": where}


# ---------------------------------------------------------------------------
# power-law envelopes and their amalgam norms
# ---------------------------------------------------------------------------

def power_envelope(x, s, alpha: float, beta: float, gamma: float, C: float = 1.0):
    """``C s^alpha (1 + s)^{-beta} (1 + |x|)^{-gamma}``."""
    return C * s ** alpha * (1.0 + s) ** (-beta) * (1.0 + np.abs(x)) ** (-gamma)


def amalgam_criterion(alpha: float, beta: float, gamma: float, sigma: float, d: int = 1) -> bool:
    """Closed-form finiteness of the right amalgam norm of the power envelope
    under the weight ``s^{-sigma}``: ``gamma > d`` and ``beta > alpha + sigma > 0``.

    The lower condition ``alpha + sigma > 0`` is what makes the coarse-scale
    end of the integral converge.
    """
    return bool(gamma > d and beta > alpha + sigma > 0)


def power_amalgam_scan(alpha: float, beta: float, gamma: float, sigma: float = 0.0,
                       U: Optional[Neighborhood] = None, levels=((8, 4), (32, 8), (128, 12)),
                       dx: float = 0.125, voices: int = 8, ratio_tol: float = 0.5) -> Dict:
    """Decide numerically whether the power envelope has a finite amalgam norm.

    The right amalgam norm with weight ``s^{-sigma}`` is computed on nested
    domains ``|x| <= X``, ``2^{-K} <= s <= 2^K`` from ``levels``.  Each
    extension quadruples ``X`` and multiplies the scale range by 16 at both
    ends, so a convergent integral has increments shrinking by a factor of
    at least 4 while a divergent (power or logarithmic) one does not.  The
    verdict is ``finite`` iff the last increment is at most ``ratio_tol``
    times the previous one.
    """
    from .group_geometry import affine
    spec = affine(1)
    U = U if U is not None else default_neighborhood(spec)
    w = PowerScale(sigma)
    norms = []
    for X, K in levels:
        x = uniform_axis(-X, X + 0.5 * dx, dx)
        s = geometric_axis(2.0 ** -K, 2.0 ** K, voices)
        F = sample_function(spec, lambda a, b: power_envelope(a, b, alpha, beta, gamma), x, s)
        norms.append(amalgam_norm(F, U, w, "right"))
    inc = np.diff(norms)
    if len(inc) < 2:
        raise ValueError("need at least three nested levels")
    finite = bool(inc[-1] <= ratio_tol * max(inc[-2], 0.0) + 1e-12 * norms[-1])
    return {"norms": [float(v) for v in norms], "finite": finite}


# ---------------------------------------------------------------------------
# classical (M, N)-molecules
# ---------------------------------------------------------------------------

MAX_ORDER = 8


@dataclass(frozen=True)
class ClassicalMoleculeParams:
    """Orders and dyadic interval ``Q_{jk} = 2^{-j}[k, k + 1)``.

    ``M`` is the decay and smoothness order, ``N`` the number of vanishing
    moments minus one; ``-1`` switches a condition off.
    """

    M: int = 4
    N: int = 2
    j: int = 0
    k: int = 0

    def __post_init__(self):
        for name in ("M", "N"):
            v = getattr(self, name)
            if int(v) != v or v < -1:
                raise ValueError(f"{name} must be an integer >= -1")
            if v > MAX_ORDER:
                raise ValueError(f"{name} > {MAX_ORDER} is not supported")

    @property
    def side(self) -> float:
        return 2.0 ** (-self.j)

    @property
    def corner(self) -> float:
        return 2.0 ** (-self.j) * self.k


@lru_cache(maxsize=None)
def _bump_poly(n: int) -> Polynomial:
    """``P_n`` with ``psi^{(n)} = P_n (1 - t^2)^{-2n} psi`` for
    ``psi(t) = exp(-1/(1 - t^2))`` on ``(-1, 1)``."""
    if n == 0:
        return Polynomial([1.0])
    P = _bump_poly(n - 1)
    q = Polynomial([1.0, 0.0, -1.0])
    t = Polynomial([0.0, 1.0])
    return P.deriv() * q ** 2 + 4 * (n - 1) * t * q * P - 2 * t * P


def bump_derivative(t, n: int) -> np.ndarray:
    """``n``-th derivative of ``exp(-1/(1 - t^2))`` (zero outside ``(-1, 1)``)."""
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    ti = t[inside]
    q = 1.0 - ti ** 2
    out[inside] = _bump_poly(n)(ti) * np.exp(-1.0 / q - 2 * n * np.log(q))
    return out


@lru_cache(maxsize=None)
def _normalization(M: int, N: int) -> float:
    """Largest ``c`` with ``c |psi^{(N+1+a)}(u)| <= (1 + |u|)^{-M}`` for all
    ``a <= M`` (checked on a fine grid; the bump is supported in ``|u| < 1``)."""
    u = np.linspace(-1, 1, 40001)[1:-1]
    worst = 0.0
    for a in range(max(M, 0) + 1):
        d = np.abs(bump_derivative(u, N + 1 + a)) * (1.0 + np.abs(u)) ** max(M, 0)
        worst = max(worst, d.max())
    if not np.isfinite(worst) or worst <= 0:
        raise RuntimeError("unattainable molecule normalization")
    return 1.0 / worst


def classical_molecule_make(params: ClassicalMoleculeParams, grid: SignalGrid) -> SignalGrid:
    """Smooth ``(M, N)``-molecule for the interval ``Q_{jk}``.

    ``m_Q(x) = 2^{j/2} c psi^{(N+1)}(2^j x - k)`` with ``psi`` the standard
    bump.  Being an ``(N+1)``-th derivative, ``m_Q`` has vanishing moments
    of order ``0..N``; ``c`` is chosen so that

        |D^a m_Q(x)| <= |Q|^{-1/2 - a} (1 + |x - x_Q| / l(Q))^{-M},  a <= M,

    holds with constant 1.  ``x_Q = 2^{-j} k`` is the point attached to the
    interval, at which the bump is centred.
    """
    c = _normalization(params.M, params.N)
    u = (grid.t - params.corner) / params.side
    return grid.with_values(2.0 ** (params.j / 2) * c * bump_derivative(u, params.N + 1))


def bump_fourier(xi, nodes: int = 4097, chunk: int = 2048) -> np.ndarray:
    """Fourier transform of ``exp(-1/(1 - t^2))``.

    Trapezoid rule on ``[-1, 1]``; the bump vanishes to all orders at the
    end points, so the rule converges faster than any power of the node
    count.  The bump is even, so the transform is real.
    """
    xi = np.asarray(xi, float)
    t = np.linspace(-1.0, 1.0, nodes)
    h = t[1] - t[0]
    psi = bump_derivative(t, 0) * h
    flat = xi.ravel()
    out = np.empty(flat.shape)
    for i0 in range(0, len(flat), chunk):
        out[i0:i0 + chunk] = np.cos(2 * np.pi * np.multiply.outer(flat[i0:i0 + chunk], t)) @ psi
    return out.reshape(xi.shape)


def _bump_spectrum_on(xi: np.ndarray, period: float, oversample: int = 1024) -> np.ndarray:
    """``psi^`` at frequencies ``xi`` that are multiples of ``1 / period``.

    Uses one FFT of the bump sampled with spacing ``1 / oversample`` over
    ``period``; aliasing is of the size of ``psi^(oversample)``, far below
    double precision.
    """
    if period < 2:
        raise ValueError("period must contain the bump support [-1, 1]")
    nf = int(2 ** np.ceil(np.log2(period * oversample)))
    fine = SignalGrid(period / nf, -period / 2, bump_derivative(
        -period / 2 + period / nf * np.arange(nf), 0))
    spec_vals = fine.spectrum().real
    k = np.round(np.asarray(xi) * period).astype(np.int64)
    out = np.zeros(k.shape)
    ok = np.abs(k) < nf // 2
    out[ok] = spec_vals[np.mod(k[ok], nf)]
    return out


def classical_molecule_spectrum(params: ClassicalMoleculeParams, grid: SignalGrid) -> np.ndarray:
    """Fourier transform of the molecule of :func:`classical_molecule_make` on
    the frequencies of ``grid``,
    ``c l^{1/2} (2 pi i w l)^{N+1} psi^(l w) exp(-2 pi i w x_Q)`` with ``l = 2^{-j}``."""
    w = grid.freqs
    ell = params.side
    c = _normalization(params.M, params.N)
    psi_hat = _bump_spectrum_on(ell * w, grid.period / ell)
    return (c * np.sqrt(ell) * (2j * np.pi * w * ell) ** (params.N + 1) * psi_hat
            * np.exp(-2j * np.pi * w * params.corner))


def classical_molecule_bandlimited(params: ClassicalMoleculeParams, grid: SignalGrid) -> SignalGrid:
    """Projection of the molecule onto the frequency band of ``grid``.

    Point samples of the molecule alias, because the bump's spectrum only
    decays like ``exp(-sqrt(|w|))``.  Wavelet transforms with a window
    supported inside the band see exactly this projection, so it is what
    the decay checks use.
    """
    return SignalGrid.from_spectrum(grid, classical_molecule_spectrum(params, grid))


def _fd_weights(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Centred fourth-order finite-difference stencil for ``D^order``."""
    p = (order + 3) // 2
    offs = np.arange(-p, p + 1)
    A = np.vander(offs, increasing=True).T.astype(float)
    rhs = np.zeros(len(offs))
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return offs, np.linalg.solve(A, rhs)


def finite_difference(m: SignalGrid, order: int) -> np.ndarray:
    """``D^order m`` on the periodic grid with a fourth-order stencil."""
    if order == 0:
        return m.values.copy()
    offs, wts = _fd_weights(order)
    out = np.zeros(m.n, complex)
    for o, c in zip(offs, wts):
        out += c * np.roll(m.values, -o)
    return out / m.spacing ** order


def classical_molecule_check(m: SignalGrid, params: ClassicalMoleculeParams,
                             tol_factor: float = 1.05, moment_tol: float = 1e-6,
                             min_samples: int = 32) -> Dict:
    """Check the decay and moment conditions of an ``(M, N)``-molecule.

    Decay: finite differences ``D^a m`` with ``a <= M`` must stay below
    ``tol_factor`` times the bound.  Moments: ``|int x^b m| <= moment_tol *
    ||m||_1 * l(Q)^b`` for ``b <= N``, with ``x`` measured from ``x_Q``.

    Raises
    ------
    ValueError
        If the interval is resolved by fewer than ``min_samples`` samples.
    """
    ell = params.side
    if params.M > 0 and ell / m.spacing < min_samples:
        raise ValueError(f"grid too coarse: {ell / m.spacing:.1f} samples per interval, "
                         f"need {min_samples} for derivatives of order {params.M}")
    x = m.t - params.corner
    decay = []
    for a in range(max(params.M, 0) + 1):
        bound = ell ** (-0.5 - a) * (1.0 + np.abs(x) / ell) ** (-max(params.M, 0))
        D = np.abs(finite_difference(m, a))
        decay.append(float(np.max(D / bound)))
    if params.M == -1:
        # only the size bound |m| <= |Q|^{-1/2} remains
        decay = [float(np.max(np.abs(m.values)) * ell ** 0.5)]
    l1 = float(np.sum(np.abs(m.values)) * m.spacing)
    moments = []
    for b in range(params.N + 1):
        moments.append(float(abs(np.sum(x ** b * m.values) * m.spacing)))
    moments_ok = all(mo <= moment_tol * l1 * ell ** b for b, mo in enumerate(moments))
    return {"decay_ok": bool(max(decay) <= tol_factor), "moments_ok": bool(moments_ok),
            "details": {"decay_ratios": decay, "moments": moments, "l1": l1}}


# ---------------------------------------------------------------------------
# decay of wavelet transforms
# ---------------------------------------------------------------------------

def decay_grid_scales(voices: int = 8, s_min: float = 2.0 ** -5) -> np.ndarray:
    """Default scales of the decay check, ``[2^-5, 2^3]``.

    The small-scale slope of a classical molecule only settles below
    ``s = 1/8``; resolving ``2^-5`` with a window supported in ``|w| <= 2``
    needs a band up to ``|w| = 64`` (see :func:`prototype_grid`).
    """
    return geometric_axis(s_min, 2.0 ** 3, voices)


#: scale range on which classical molecules are fitted and verified
CLASSICAL_ENVELOPE_GRID = EnvelopeGrid(z_extent=32.0, s_min=2.0 ** -5, s_max=2.0 ** 3)


def _tail_slope(u: np.ndarray, P: np.ndarray) -> float:
    ok = P > 0
    if ok.sum() < 3:
        return -np.inf
    return float(np.polyfit(np.log(u[ok]), np.log(P[ok]), 1)[0])


class DecayProfiles:
    """Precomputed pieces of the decay fit for one transform.

    The power envelope is separable, so for fixed ``gamma`` the ratio field
    is ``B_gamma(x, s) / (s^alpha (1 + s)^{-beta})`` with
    ``B_gamma = |W| (1 + |x - center|)^gamma``.  Only the column maxima of
    ``B_gamma`` and its rows near the spatial edges are needed, so scanning
    many exponent triples costs one pass over ``W`` per ``gamma``.
    """

    def __init__(self, W: GroupGridFn, center: float = 0.0, noise: float = 1e-10,
                 dilation: float = 1.0):
        A = np.abs(W.values)
        self.A = np.where(A > noise * max(A.max(), 1e-300), A, 0.0)
        self.s = W.y / dilation
        self.dist = np.abs(W.x - center) / dilation
        self.edge = self.dist >= 0.75 * self.dist.max()
        self.octave = max(3, int(round(np.log(2) / W.dy)) + 1)
        self._cache: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}

    def _gamma(self, gamma: float):
        if gamma not in self._cache:
            B = self.A * (1.0 + self.dist[:, None]) ** gamma
            self._cache[gamma] = (B.max(axis=0), B[self.edge])
        return self._cache[gamma]

    def fit(self, alpha: float, beta: float, gamma: float, slope_tol: float = 0.25,
            significance: float = 1e-3) -> Dict:
        colmax, edge_rows = self._gamma(gamma)
        fs = self.s ** alpha * (1.0 + self.s) ** (-beta)
        Ps = colmax / fs
        C = float(Ps.max())
        if C == 0:
            return {"C_fit": 0.0, "ok": True, "slopes": {}, "failures": {}}
        o, ns = self.octave, len(self.s)
        small = _tail_slope(self.s[:o], Ps[:o])
        large = _tail_slope(self.s[ns - o:], Ps[ns - o:])
        Px = (edge_rows / fs[None, :]).max(axis=1)
        xs = _tail_slope(1.0 + self.dist[self.edge], Px)
        fails = {
            "small_scale": bool(small < -slope_tol and Ps[0] >= significance * C),
            "large_scale": bool(large > slope_tol and Ps[-1] >= significance * C),
            "position": bool(xs > slope_tol and Px.max() >= significance * C),
        }
        return {"C_fit": C, "ok": bool(np.isfinite(C) and not any(fails.values())),
                "slopes": {"small_scale": small, "large_scale": large, "position": xs},
                "failures": fails}


def wavelet_decay_check(m: SignalGrid, g: Window, exponents: Sequence[float],
                        scales=None, center: float = 0.0, W: Optional[GroupGridFn] = None,
                        slope_tol: float = 0.25, significance: float = 1e-3,
                        noise: float = 1e-10, dilation: float = 1.0) -> Dict:
    """Fit ``|W_g m(x, s)| <= C s^a (1 + s)^{-b} (1 + |x - center|)^{-c}``.

    With ``dilation = 2^{-j}`` the fit is made in the molecule's own
    coordinates ``((x - center) / dilation, s / dilation)``, and the default
    scales are stretched by the same factor.  This is the natural form for
    the dyadic member ``(j, k)``, whose transform is that of ``m_{0,0}``
    pulled back along the dilation.

    ``C_fit`` is the largest ratio on the grid.  The fit is ``ok`` when the
    ratio shows no growth at any edge of the grid: the log-log slope of
    the ratio profile over the outer octave of scales (or the outer
    quarter of positions) must stay below ``slope_tol`` in the outward
    direction, unless the ratio there is below ``significance * C_fit``.
    Transform values below ``noise`` times the maximum count as zero.
    """
    if W is None:
        W = cwt(m, g, dilation * decay_grid_scales() if scales is None else scales)
    a, b, c = (float(e) for e in exponents)
    return DecayProfiles(W, center, noise, dilation).fit(a, b, c, slope_tol, significance)


@dataclass
class ClassicalFamily:
    """Classical molecules on dyadic intervals ``(j, k)`` sharing ``M, N``."""

    grid: SignalGrid
    M: int
    N: int
    labels: List[Tuple[int, int]]

    def molecule_family(self) -> MoleculeFamily:
        """Band-limited members on ``grid`` located at ``(2^{-j} k, 2^{-j})``.

        Members with the same ``j`` are translates by multiples of
        ``2^{-j}``, applied as a phase factor on the spectrum.
        """
        if not self.labels:
            raise ValueError("empty molecule family")
        w = self.grid.freqs
        base = {}
        vals = []
        for j, k in self.labels:
            if j not in base:
                base[j] = classical_molecule_spectrum(
                    ClassicalMoleculeParams(self.M, self.N, j, 0), self.grid)
            spec_vals = base[j] * np.exp(-2j * np.pi * w * 2.0 ** (-j) * k)
            vals.append(SignalGrid.from_spectrum(self.grid, spec_vals).values)
        pts = np.array([(2.0 ** (-j) * k, 2.0 ** (-j)) for j, k in self.labels])
        loc = PointFamily(affine(1), pts, list(self.labels), "dyadic",
                          {"labels": [list(l) for l in self.labels]})
        return MoleculeFamily(self.grid, np.array(vals), loc)


def classical_family(grid: SignalGrid, M: int, N: int, j_range=(-1, 1),
                     k_range=(-2, 2)) -> ClassicalFamily:
    labels = [(j, k) for j in range(j_range[0], j_range[1] + 1)
              for k in range(k_range[0], k_range[1] + 1)]
    if not labels:
        raise ValueError("empty molecule family")
    return ClassicalFamily(grid, M, N, labels)


def prototype_grid() -> SignalGrid:
    """Grid for the reference molecule ``m_{0,0}``: spacing 1/128 on [-256, 256).

    The band reaches ``|w| = 64`` so that scales down to ``2^-5`` are
    resolved by a window supported in ``|w| <= 2``; the period leaves room
    for the spread of the transform at scale 8.
    """
    return SignalGrid(1.0 / 128, -256.0, np.zeros(65536))


def classical_to_coorbit(fam: ClassicalFamily, g: Window, sigma: float = 0.0,
                         exponents: Optional[Sequence[float]] = None,
                         slack: float = 1.1, U: Optional[Neighborhood] = None,
                         env_grid: EnvelopeGrid = CLASSICAL_ENVELOPE_GRID,
                         search=range(0, MAX_ORDER + 1)) -> Envelope:
    """Power-law envelope for a family of classical molecules.

    The reference molecule ``m_{0,0}`` (band-limited, see
    :func:`classical_molecule_bandlimited`) is transformed once.  Unless
    ``exponents`` are given, integer triples from ``search`` are scanned
    and among those passing the decay fit whose envelope has a finite
    amalgam norm under ``s^{-sigma}`` the smallest ``alpha``, then the
    largest ``gamma``, then the largest ``beta`` is taken.  The fitted
    envelope ``C s^alpha (1+s)^{-beta} (1+|x|)^{-gamma}`` is sampled on the
    relative grid and the whole family is verified against it with
    ``slack``.  Its amalgam norm and truncation estimate come from
    :func:`power_amalgam_scan`, i.e. from the analytic tail rather than
    from the sampled window.

    Raises
    ------
    ValueError
        If the exponents give an infinite amalgam norm, or verification fails.
    """
    if not fam.labels:
        raise ValueError("empty molecule family")
    pg = prototype_grid()
    m0 = classical_molecule_bandlimited(ClassicalMoleculeParams(fam.M, fam.N, 0, 0), pg)
    prof = DecayProfiles(cwt(m0, g, geometric_axis(env_grid.s_min, env_grid.s_max,
                                                    env_grid.voices)))
    if exponents is not None:
        a, b, c = (float(e) for e in exponents)
        if not amalgam_criterion(a, b, c, sigma):
            raise ValueError(f"envelope exponents (alpha, beta, gamma) = ({a}, {b}, {c}) give an "
                             f"infinite amalgam norm for sigma = {sigma}: need gamma > 1 and "
                             f"beta > alpha + sigma > 0")
        fit = prof.fit(a, b, c)
        if not fit["ok"]:
            raise ValueError(f"exponents {(a, b, c)} do not bound the wavelet transform")
        best = (a, b, c, fit["C_fit"])
    else:
        best = _scan_exponents(prof, sigma, search)
        if best is None:
            raise ValueError("no exponents in the search range bound the wavelet transform")
    a, b, c, C = best
    scan = power_amalgam_scan(a, b, c, sigma, U)
    if not scan["finite"]:
        raise ValueError("power envelope has an infinite amalgam norm")
    mf = fam.molecule_family()
    axes = envelope_axes(mf, env_grid)
    X, S = np.meshgrid(axes.x, axes.y, indexing="ij")
    H = axes.with_values(power_envelope(X, S, a, b, c, C))
    n = scan["norms"]
    r = (n[2] - n[1]) / (n[1] - n[0]) if n[1] > n[0] else 0.0
    tail = (n[2] - n[1]) * r / (1.0 - r) if 0 < r < 1 else 0.0
    env = Envelope(H, U if U is not None else default_neighborhood(mf.spec), PowerScale(sigma),
                   C * n[2], tail / n[2] if n[2] > 0 else 0.0,
                   {"alpha": a, "beta": b, "gamma": c, "C": C}, analytic_finite=True)
    res = verify_molecule(mf, g, env, slack)
    if not res["ok"]:
        raise ValueError(f"family exceeds the fitted envelope (worst ratio "
                         f"{res['worst_ratio']:.3f} at {res['worst_point']})")
    return env


def _scan_exponents(prof: DecayProfiles, sigma: float, search):
    """Smallest alpha, then largest gamma, then largest beta that fit."""
    for a in sorted(search):
        for c in sorted(search, reverse=True):
            for b in sorted(search, reverse=True):
                if not amalgam_criterion(a, b, c, sigma):
                    continue
                fit = prof.fit(a, b, c)
                if fit["ok"]:
                    return float(a), float(b), float(c), fit["C_fit"]
    return None


# ---------------------------------------------------------------------------
# synthesis and analysis bounds
# ---------------------------------------------------------------------------

def molecule_synthesis_bound(fam: MoleculeFamily, g: Window, env: Envelope, c: SequenceData,
                             params: MixedNormParams,
                             settings: TransformSettings = TransformSettings()) -> Dict:
    """``|| sum c_i m_i | CoY ||`` against ``|| c | Y_d || * || H | W^R ||``."""
    if len(c.coeffs) != len(fam):
        raise ValueError("one coefficient per molecule is required")
    f = fam.synthesize(c.coeffs)
    lhs = coorbit_norm(f, g, fam.spec, params, settings)
    rhs = sequence_norm(c, params, env.U) * env.amalgam
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)}


def molecule_analysis_bound(fam: MoleculeFamily, g: Window, env: Envelope, f: SignalGrid,
                            params: MixedNormParams,
                            settings: TransformSettings = TransformSettings()) -> Dict:
    """``|| (<f, m_i>) | Y_d ||`` against ``|| f | CoY ||``.

    The bound needs the envelope in the two-sided amalgam space, so the
    left amalgam norm must be finite as well.
    """
    left = env.left_amalgam()
    if not (np.isfinite(left) and env.finite):
        raise ValueError("envelope is not in the two-sided amalgam space")
    if not f.same_grid(fam.grid):
        raise ValueError("signal and molecules live on different grids")
    coeffs = (fam.values.conj() @ f.values) * f.spacing
    lhs = sequence_norm(SequenceData(fam.locations, coeffs), params, env.U)
    rhs = coorbit_norm(f, g, fam.spec, params, settings)
    return {"lhs": lhs, "rhs": rhs, "left_amalgam": left,
            "ratio": lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)}
