"""
Voice transforms of sampled signals: the short-time Fourier transform
(Heisenberg group), the continuous wavelet transform (affine group), the
reproducing-formula check, the Weyl quantization and the Hilbert transform.

Signals are periodic samples ``f(t_n)``, ``t_n = offset + n h``, over one
period ``L = N h``.  The Fourier convention is

    f^(w) = int f(t) exp(-2 pi i w t) dt,

discretized as ``h * exp(-2 pi i w offset) * fft(f)`` on the frequencies
``k / L``.  Time-frequency shifts are ``M_w T_x g (t) = exp(2 pi i w t) g(t - x)``
and dilations are ``D_s g (t) = s^{-1/2} g(t / s)``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from typing import Callable, Dict, Optional

import numpy as np
from scipy import fft as sfft

from .group_geometry import AFFINE, HEISENBERG, GroupSpec, affine, heisenberg
from .spaces import GroupGridFn, MixedNormParams, geometric_axis, mixed_norm, uniform_axis

_TOL = 1e-9


# ---------------------------------------------------------------------------
# signals
# ---------------------------------------------------------------------------

@dataclass
class SignalGrid:
    """Complex samples of a periodic signal on a uniform grid (d = 1)."""

    spacing: float
    offset: float
    values: np.ndarray
    d: int = 1

    def __post_init__(self):
        if self.d != 1:
            raise NotImplementedError("signals are implemented for d = 1")
        if not self.spacing > 0:
            raise ValueError("grid spacing must be positive")
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1 or len(self.values) < 2:
            raise ValueError("signal must be a 1-D array with at least two samples")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def period(self) -> float:
        return self.n * self.spacing

    @property
    def t(self) -> np.ndarray:
        return self.offset + self.spacing * np.arange(self.n)

    @property
    def freqs(self) -> np.ndarray:
        """Frequencies of the FFT bins (numpy ordering)."""
        return sfft.fftfreq(self.n, self.spacing)

    def with_values(self, values) -> "SignalGrid":
        return replace(self, values=np.asarray(values, dtype=complex))

    def same_grid(self, other: "SignalGrid") -> bool:
        return (self.n == other.n and abs(self.spacing - other.spacing) < _TOL * self.spacing
                and abs(self.offset - other.offset) < _TOL * max(1.0, abs(self.offset)))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.spacing))

    def inner(self, other: "SignalGrid") -> complex:
        return complex(np.sum(self.values * np.conj(other.values)) * self.spacing)

    def spectrum(self) -> np.ndarray:
        """Samples of the Fourier transform on ``self.freqs``."""
        w = self.freqs
        return self.spacing * np.exp(-2j * np.pi * w * self.offset) * sfft.fft(self.values)

    @classmethod
    def from_spectrum(cls, grid: "SignalGrid", spec_vals) -> "SignalGrid":
        w = grid.freqs
        vals = sfft.ifft(np.asarray(spec_vals) * np.exp(2j * np.pi * w * grid.offset)) / grid.spacing
        return grid.with_values(vals)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,re,im\n")
        np.savetxt(buf, np.column_stack([self.t, self.values.real, self.values.imag]),
                   delimiter=",", fmt="%.17g")
        return buf.getvalue()


def signal_grid(n: int = 256, extent: float = 16.0, values=None) -> SignalGrid:
    """Grid of ``n`` samples on ``[-extent/2, extent/2)``."""
    h = extent / n
    vals = np.zeros(n, complex) if values is None else values
    return SignalGrid(h, -extent / 2.0, vals)


def heisenberg_grid() -> SignalGrid:
    """Default time-frequency grid: 256 samples on [-8, 8), band [-8, 8)."""
    return signal_grid(256, 16.0)


def affine_grid() -> SignalGrid:
    """Default time-scale grid: 1024 samples on [-32, 32), band [-8, 8)."""
    return signal_grid(1024, 64.0)


def from_function(grid: SignalGrid, fn: Callable) -> SignalGrid:
    return grid.with_values(fn(grid.t))


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

class Window:
    """Analysing window.  Subclasses provide time samples and, when known,
    the Fourier transform as a function."""

    name = "window"

    def samples(self, grid: SignalGrid) -> np.ndarray:
        raise NotImplementedError

    def fourier(self, w) -> np.ndarray:
        raise NotImplementedError

    def signal(self, grid: SignalGrid) -> SignalGrid:
        return grid.with_values(self.samples(grid))

    def dilate(self, lam: float) -> "Window":
        return DilatedWindow(self, lam)

    def radius(self, eps: float = 1e-8) -> float:
        """Essential radius: ``|g(t)| <= eps max|g|`` for ``|t| > radius``.

        Measured on 16384 samples of spacing 1/16 centred at 0.
        """
        return _radius(self.samples(SignalGrid(1.0 / 16, -512.0, np.zeros(16384))),
                       1.0 / 16, -512.0, eps)

    def describe(self) -> Dict:
        return {"name": self.name}


def _radius(vals, h, offset, eps):
    a = np.abs(vals)
    if a.max() == 0:
        return 0.0
    t = offset + h * np.arange(len(a))
    return float(np.abs(t[a > eps * a.max()]).max())


class GaussianWindow(Window):
    """``g(t) = 2^{1/4} lam^{-1/2} exp(-pi (t/lam)^2)``, unit L^2 norm."""

    name = "gaussian"

    def __init__(self, width: float = 1.0):
        if not width > 0:
            raise ValueError("width must be positive")
        self.width = float(width)

    def samples(self, grid):
        t = grid.t
        return 2 ** 0.25 / np.sqrt(self.width) * np.exp(-np.pi * (t / self.width) ** 2) + 0j

    def fourier(self, w):
        w = np.asarray(w, float)
        return 2 ** 0.25 * np.sqrt(self.width) * np.exp(-np.pi * (self.width * w) ** 2) + 0j

    def describe(self):
        return {"name": self.name, "width": self.width}


def _meyer_profile(w, sharpness):
    v = (np.abs(np.asarray(w, float)) - 1.25) / 0.75
    out = np.zeros_like(v)
    inside = np.abs(v) < 1
    out[inside] = np.exp(-sharpness / (1.0 - v[inside] ** 2))
    return out


class MeyerWindow(Window):
    """Band-limited wavelet with real, even, C-infinity Fourier transform
    supported in ``1/2 <= |w| <= 2``.

    The profile is ``exp(-A / (1 - v^2))`` with ``v = (|w| - 5/4) / (3/4)``.
    It is linear in ``|w|`` rather than in ``log |w|`` because that gives
    much faster decay in time: for the default ``A = 2`` the window is
    below 1e-8 of its peak for ``|t| >= 32``.  Larger ``A`` decays faster
    but overlaps less across octaves, which worsens dyadic frame bounds.

    ``normalization="calderon"`` (default) scales it so that
    ``int_0^inf |g^(w)|^2 dw / w = 1``, which makes the continuous wavelet
    transform an isometry onto its range.  ``"unit"`` gives ``||g|| = 1``.
    The two cannot hold together for this support.
    """

    name = "meyer"
    band_edge = 2.0

    def __init__(self, sharpness: float = 2.0, normalization: str = "calderon"):
        if normalization not in ("calderon", "unit"):
            raise ValueError("normalization must be 'calderon' or 'unit'")
        self.sharpness = float(sharpness)
        self.normalization = normalization
        w = np.linspace(0.5, 2.0, 20001)
        p2 = _meyer_profile(w, self.sharpness) ** 2
        if normalization == "calderon":
            c2 = np.trapezoid(p2 / w, w)
        else:
            c2 = 2.0 * np.trapezoid(p2, w)
        self.scale = 1.0 / np.sqrt(c2)

    def fourier(self, w):
        return self.scale * _meyer_profile(w, self.sharpness) + 0j

    def samples(self, grid):
        return SignalGrid.from_spectrum(grid, self.fourier(grid.freqs)).values

    def describe(self):
        return {"name": self.name, "sharpness": self.sharpness,
                "normalization": self.normalization}


class GridWindow(Window):
    """Window given by samples on a fixed signal grid."""

    name = "grid"

    def __init__(self, signal: SignalGrid, name: str = "grid"):
        self.signal_ = signal
        self.name = name

    def samples(self, grid):
        if not grid.same_grid(self.signal_):
            raise ValueError("custom window is sampled on a different grid")
        return self.signal_.values

    def fourier(self, w):
        w = np.asarray(w, float)
        t = self.signal_.t
        out = np.exp(-2j * np.pi * np.multiply.outer(w, t)) @ self.signal_.values
        return out * self.signal_.spacing

    def radius(self, eps: float = 1e-8) -> float:
        f = self.signal_
        return _radius(f.values, f.spacing, f.offset, eps)


class DilatedWindow(Window):
    """``D_lam g``; Fourier transform ``lam^{1/2} g^(lam w)``."""

    def __init__(self, base: Window, lam: float):
        if not lam > 0:
            raise ValueError("dilation must be positive")
        self.base, self.lam = base, float(lam)
        self.name = f"dilated-{base.name}"

    def fourier(self, w):
        return np.sqrt(self.lam) * self.base.fourier(self.lam * np.asarray(w, float))

    @property
    def band_edge(self):
        edge = getattr(self.base, "band_edge", None)
        return None if edge is None else edge / self.lam

    def radius(self, eps: float = 1e-8) -> float:
        return self.lam * self.base.radius(eps)

    def samples(self, grid):
        if isinstance(self.base, GaussianWindow):
            return GaussianWindow(self.base.width * self.lam).samples(grid)
        return SignalGrid.from_spectrum(grid, self.fourier(grid.freqs)).values

    def describe(self):
        return {"name": self.name, "lam": self.lam, "base": self.base.describe()}


def window_from_dict(d: Dict, grid: Optional[SignalGrid] = None) -> Window:
    """Inverse of ``describe`` for the analytic windows.

    Grid windows carry their samples under ``"values"`` as ``[re, im]``
    pairs and need the ``grid`` they were sampled on.
    """
    name = d.get("name")
    if name == "gaussian":
        return GaussianWindow(float(d.get("width", 1.0)))
    if name == "meyer":
        return MeyerWindow(float(d.get("sharpness", 2.0)), d.get("normalization", "calderon"))
    if name is not None and name.startswith("dilated-"):
        return DilatedWindow(window_from_dict(d["base"], grid), float(d["lam"]))
    if "values" in d and grid is not None:
        v = np.asarray(d["values"], float)
        return GridWindow(grid.with_values(v[:, 0] + 1j * v[:, 1]), name or "grid")
    raise ValueError(f"cannot rebuild window from {d!r}")


def box_window(grid: SignalGrid) -> GridWindow:
    """Indicator of ``[0, 1)``; with lattice constants 1 it gives an
    orthonormal Gabor basis."""
    t = grid.t
    return GridWindow(grid.with_values(((t >= -_TOL) & (t < 1 - _TOL)).astype(complex)), "box")


# ---------------------------------------------------------------------------
# short-time Fourier transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseGrid:
    """Sampling of the phase plane.

    ``x_step`` must be a multiple of the signal spacing and ``w_step`` a
    multiple of ``1/L``.  ``w_range=None`` covers the whole band
    ``[-1/(2h), 1/(2h))``, in which case both axes are periodic.
    """

    x_step: float = 0.25
    w_step: float = 0.25
    w_range: Optional[tuple] = None


def _stride(step: float, unit: float, what: str) -> int:
    k = step / unit
    ki = int(round(k))
    if ki < 1 or abs(k - ki) > 1e-6:
        raise ValueError(f"{what} step {step} is not a multiple of {unit}")
    return ki


def phase_axes(f: SignalGrid, pg: PhaseGrid):
    sx = _stride(pg.x_step, f.spacing, "time")
    x = f.t[::sx]
    full = pg.w_range is None
    lo, hi = (-0.5 / f.spacing, 0.5 / f.spacing) if full else pg.w_range
    sw = _stride(pg.w_step, 1.0 / f.period, "frequency")
    w = uniform_axis(lo, hi, pg.w_step)
    bins = np.mod(np.round(w * f.period).astype(int), f.n)
    return sx, x, w, bins, full and (f.n % sw == 0)


def stft(f: SignalGrid, g: Window, phase_grid: PhaseGrid = PhaseGrid()) -> GroupGridFn:
    """``V_g f(x, w) = int f(t) conj(g(t - x)) exp(-2 pi i w t) dt``."""
    if np.any(~np.isfinite(f.values)):
        raise ValueError("signal contains non-finite samples")
    sx, x, w, bins, periodic = phase_axes(f, phase_grid)
    G = g.samples(f)
    shifts = np.round(x / f.spacing).astype(np.int64)
    idx = (np.arange(f.n)[None, :] - shifts[:, None]) % f.n
    P = f.values[None, :] * np.conj(G[idx])
    spec = sfft.fft(P, axis=1)[:, bins]
    V = f.spacing * spec * np.exp(-2j * np.pi * w * f.offset)[None, :]
    return GroupGridFn(heisenberg(1), x, w, V, (True, periodic))


def istft(V: GroupGridFn, g: Window, grid: SignalGrid) -> SignalGrid:
    """Inverse STFT ``||g||^{-2} int int V(x, w) M_w T_x g dx dw`` (Riemann sum).

    ``grid`` is the signal grid on which ``V`` was computed.
    """
    G = g.samples(grid)
    gn2 = np.sum(np.abs(G) ** 2) * grid.spacing
    sx = _stride(V.dx, grid.spacing, "time")
    shifts = np.round(V.x / grid.spacing).astype(np.int64)
    if len(shifts) * sx != grid.n:
        raise ValueError("phase grid does not match the signal grid")
    bins = np.mod(np.round(V.y * grid.period).astype(int), grid.n)
    # sum over w of V e^{2 pi i w t}: place on FFT bins, accumulate duplicates
    C = np.zeros((len(V.x), grid.n), complex)
    phase = np.exp(2j * np.pi * V.y * grid.offset)
    np.add.at(C, (slice(None), bins), V.values * phase[None, :])
    S = sfft.ifft(C, axis=1) * grid.n
    idx = (np.arange(grid.n)[None, :] - shifts[:, None]) % grid.n
    out = np.sum(S * G[idx], axis=0) * V.dx * V.dy / gn2
    return grid.with_values(out)


# ---------------------------------------------------------------------------
# continuous wavelet transform
# ---------------------------------------------------------------------------

def cwt(f: SignalGrid, g: Window, scales=None, x_stride: int = 1) -> GroupGridFn:
    """``W_g f(x, s) = s^{-1/2} int f(t) conj(g((t - x)/s)) dt``.

    Computed per scale as a Fourier multiplier,
    ``W_g f(., s)^ (w) = f^(w) conj(g^(s w)) s^{1/2}``.
    The default scale axis is ``2^{k/16}`` on ``[2^-5, 2^5]``.
    """
    if np.any(~np.isfinite(f.values)):
        raise ValueError("signal contains non-finite samples")
    s = geometric_axis() if scales is None else np.asarray(scales, float)
    if np.any(s <= 0):
        raise ValueError("scales must be positive")
    w = f.freqs
    F = sfft.fft(f.values)
    M = np.conj(g.fourier(np.multiply.outer(s, w))) * np.sqrt(s)[:, None]
    W = sfft.ifft(F[None, :] * M, axis=1)[:, ::x_stride].T
    return GroupGridFn(affine(1), f.t[::x_stride], s, W, (True, False))


def cwt_at(f: SignalGrid, g: Window, s: float) -> np.ndarray:
    """One row ``W_g f(t_n, s)`` on the full signal grid."""
    w = f.freqs
    return sfft.ifft(sfft.fft(f.values) * np.conj(g.fourier(s * w)) * np.sqrt(s))


def atom(grid: SignalGrid, g: Window, spec: GroupSpec, p) -> SignalGrid:
    """``pi(p) g``: ``M_w T_x g`` or ``T_x D_s g`` sampled on ``grid``."""
    p = np.asarray(p, float)
    w = grid.freqs
    if spec.kind == HEISENBERG:
        x, om = p
        k = x / grid.spacing
        if abs(k - round(k)) < 1e-9:
            shifted = np.roll(g.samples(grid), int(round(k)))
        else:
            spec_g = g.signal(grid).spectrum() * np.exp(-2j * np.pi * w * x)
            shifted = SignalGrid.from_spectrum(grid, spec_g).values
        return grid.with_values(np.exp(2j * np.pi * om * grid.t) * shifted)
    x, s = p
    spec_vals = np.sqrt(s) * g.fourier(s * w) * np.exp(-2j * np.pi * w * x)
    return SignalGrid.from_spectrum(grid, spec_vals)


# ---------------------------------------------------------------------------
# transform settings shared by norms and molecule checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformSettings:
    """Sampling of the group used for coorbit norms.

    ``phase_grid`` is used on the Heisenberg group; ``scales`` (default
    ``2^{k/16}`` on ``[2^-4, 2^4]``) and ``x_stride`` on the affine group.
    """

    phase_grid: PhaseGrid = PhaseGrid()
    scales: Optional[tuple] = None
    x_stride: int = 1

    def scale_axis(self) -> np.ndarray:
        if self.scales is None:
            return geometric_axis(2.0 ** -4, 2.0 ** 4)
        return np.asarray(self.scales, float)


def voice_transform(f: SignalGrid, g: Window, spec: GroupSpec,
                    settings: TransformSettings = TransformSettings()) -> GroupGridFn:
    """STFT on the Heisenberg group, CWT on the affine group."""
    if spec.kind == HEISENBERG:
        return stft(f, g, settings.phase_grid)
    return cwt(f, g, settings.scale_axis(), settings.x_stride)


def coorbit_norm(f: SignalGrid, g: Window, spec: GroupSpec, params: MixedNormParams,
                 settings: TransformSettings = TransformSettings()) -> float:
    """``|| V_g f | L^{p,q}_m ||`` on the sampled group."""
    return mixed_norm(voice_transform(f, g, spec, settings), params)


# ---------------------------------------------------------------------------
# reproducing formula
# ---------------------------------------------------------------------------

def _twisted_convolution(V: GroupGridFn, K: GroupGridFn, rel_cut: float = 1e-15) -> np.ndarray:
    """``int int V(y, e) K(x - y, w - e) exp(-2 pi i (w - e) y) dy de``
    on a fully periodic phase grid."""
    nx, nw = V.values.shape
    Krel = np.roll(np.roll(K.values, -nx // 2, axis=0), -nw // 2, axis=1)
    Kmax = np.abs(Krel).max()
    out = np.zeros_like(V.values, dtype=complex)
    ny = np.arange(nw)
    for m in range(nw):
        col = Krel[:, m]
        if np.abs(col).max() <= rel_cut * Kmax:
            continue
        nu = (m if m < nw // 2 else m - nw) * V.dy
        A = np.roll(V.values, m, axis=1) * np.exp(-2j * np.pi * nu * V.x)[:, None]
        out += sfft.ifft(sfft.fft(A, axis=0) * sfft.fft(col)[:, None], axis=0)
    return out * V.dx * V.dy


def affine_reproduce(V: GroupGridFn, f: SignalGrid, g: Window) -> np.ndarray:
    """Group convolution ``V * W_g g`` with Haar measure, evaluated per output
    scale as a Fourier multiplier (needs the full spatial grid)."""
    if len(V.x) != f.n:
        raise ValueError("affine convolution needs the transform on the full signal grid")
    w = f.freqs
    r = V.y
    Fh = sfft.fft(V.values, axis=0)                      # (N, nr)
    gr = g.fourier(np.multiply.outer(w, r))              # (N, nr)
    acc = Fh * gr / np.sqrt(r)[None, :] * V.dy           # dr/r^2 * r (scaling) = dlog r
    total = acc.sum(axis=1)
    gs = np.conj(g.fourier(np.multiply.outer(w, r))) * np.sqrt(r)[None, :]
    return sfft.ifft(total[:, None] * gs, axis=0)


def reproducing_check(f: SignalGrid, g: Window, spec: GroupSpec, phase_grid: PhaseGrid = PhaseGrid(),
                      scales=None) -> Dict:
    """Relative residual ``||V - V * V_g g|| / ||V||`` in ``L^2`` of the group.

    The Heisenberg convolution is the twisted convolution on the phase
    plane normalized by ``||g||^2``; the affine one uses left Haar measure
    and assumes an admissible window with Calderon constant 1.
    """
    if spec.kind == HEISENBERG:
        V = stft(f, g, phase_grid)
        if not all(V.periodic):
            raise ValueError("the twisted convolution needs the full periodic phase grid")
        gs = g.signal(f)
        K = stft(gs, g, phase_grid)
        conv = _twisted_convolution(V, K) / gs.norm() ** 2
    else:
        V = cwt(f, g, scales if scales is not None else geometric_axis(2.0 ** -4, 2.0 ** 4))
        conv = affine_reproduce(V, f, g)
    l2 = MixedNormParams(2, 2)
    nv = mixed_norm(V, l2)
    if nv == 0:
        raise ValueError("transform vanishes identically; residual undefined")
    return {"residual": mixed_norm(V.with_values(V.values - conv), l2) / nv}


def random_bandlimited(grid: SignalGrid, rng: np.random.Generator, band=(0.0, 4.0),
                       taper: bool = True) -> SignalGrid:
    """Random signal with complex Gaussian spectrum on ``band[0] <= |w| <= band[1]``.

    With ``taper`` the spectrum is multiplied by a smooth bump over the band
    and the signal by a smooth time window on the central half of the
    period, so it is essentially supported away from the grid edges.
    """
    w = grid.freqs
    a = np.abs(w)
    lo, hi = band
    mask = (a >= lo) & (a <= hi)
    spec_vals = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * mask
    if taper:
        u = np.clip((a - lo) / max(hi - lo, _TOL), 0, 1)
        spec_vals = spec_vals * np.sin(np.pi * u) ** 2
    f = SignalGrid.from_spectrum(grid, spec_vals)
    if taper:
        t = (f.t - (f.offset + f.period / 2)) / (f.period / 4)
        env = np.where(np.abs(t) < 1, np.cos(np.pi * t / 2) ** 2, 0.0)
        f = f.with_values(f.values * env)
        # restore the band limit removed by the time window
        spec2 = f.spectrum() * (mask if lo > 0 else 1.0)
        f = SignalGrid.from_spectrum(grid, spec2)
    return f.with_values(f.values / f.norm())


# ---------------------------------------------------------------------------
# Weyl quantization
# ---------------------------------------------------------------------------

def symbol_axes(f: SignalGrid):
    """Symbol grid matching ``f``: x step ``h/2`` over one period, w the full
    band with step ``1/L``."""
    x = f.offset + 0.5 * f.spacing * np.arange(2 * f.n)
    w = uniform_axis(-0.5 / f.spacing, 0.5 / f.spacing, 1.0 / f.period)
    return x, w


def sample_symbol(fn: Callable, f: SignalGrid) -> GroupGridFn:
    x, w = symbol_axes(f)
    X, W = np.meshgrid(x, w, indexing="ij")
    return GroupGridFn(heisenberg(1), x, w, fn(X, W) + 0j, (True, True))


def symbol_aliased(fn: Callable, f: SignalGrid, tol: float = 1e-8) -> bool:
    """True if ``fn`` carries content beyond what the symbol grid resolves.

    The symbol is sampled on a grid refined by 2 in both axes (twice the
    band) and the share of its 2-D spectrum outside the coarse band is
    measured.
    """
    fine = SignalGrid(f.spacing / 2, f.offset, np.zeros(2 * f.n))
    S = sample_symbol(fn, fine).values
    F = np.abs(sfft.fft2(S)) ** 2
    nx, nw = S.shape
    kx = np.abs(sfft.fftfreq(nx, 1.0 / nx))
    kw = np.abs(sfft.fftfreq(nw, 1.0 / nw))
    outside = (kx[:, None] >= nx // 4) | (kw[None, :] >= nw // 4)
    tot = F.sum()
    return bool(tot > 0 and F[outside].sum() > tol * tot)


def weyl_kernel(symbol: GroupGridFn, f: SignalGrid) -> np.ndarray:
    """Matrix ``K`` with ``(sigma^w f)(t_n) = sum_k K[n, k] f(t_k)``.

    Built from the spreading representation

        sigma^w f = int int sigma^(xi, u) exp(-pi i xi u) T_{-u} M_xi f dxi du,

    where ``sigma^`` is the 2-D Fourier transform of the symbol.  The
    ``xi``-integral is an inverse FFT that returns the symbol's partial
    transform at the midpoints ``t + u/2``, which is why the symbol grid
    uses half the signal spacing.
    """
    xs, ws = symbol_axes(f)
    if symbol.values.shape != (len(xs), len(ws)) or abs(symbol.x[0] - xs[0]) > _TOL \
            or abs(symbol.dx - 0.5 * f.spacing) > _TOL or abs(symbol.dy - 1.0 / f.period) > _TOL:
        raise ValueError("symbol is not sampled on the symbol grid of the signal")
    N, L, h = f.n, f.period, f.spacing
    x0, w0 = symbol.x[0], symbol.y[0]
    c = sfft.fftfreq(2 * N, 1.0 / (2 * N))          # xi = c / L
    m = sfft.fftfreq(N, 1.0 / N)                    # u = m h
    S = sfft.fft2(symbol.values) * (0.5 * h) * (1.0 / L)
    S *= np.exp(-2j * np.pi * c * x0 / L)[:, None] * np.exp(-2j * np.pi * m * h * w0)[None, :]
    # partial inverse transform over xi, evaluated at x_a = x0 + a h/2
    A = sfft.ifft(S * np.exp(2j * np.pi * c * x0 / L)[:, None], axis=0) * (2 * N) / L
    K = np.zeros((N, N), complex)
    n = np.arange(N)
    for mi in range(N):
        mm = mi if mi < N // 2 else mi - N
        a = (2 * n + mm) % (2 * N)
        K[n, (n + mm) % N] += A[a, mi] * h
    return K


def weyl_apply(symbol: GroupGridFn, f: SignalGrid) -> SignalGrid:
    """Weyl quantization ``sigma^w f`` of a sampled symbol."""
    return f.with_values(weyl_kernel(symbol, f) @ f.values)


# ---------------------------------------------------------------------------
# Hilbert transform
# ---------------------------------------------------------------------------

def hilbert_multiplier(w) -> np.ndarray:
    """``-i sgn(w)``."""
    return -1j * np.sign(np.asarray(w, float))


def hilbert(f: SignalGrid) -> SignalGrid:
    """Hilbert transform as the Fourier multiplier ``-i sgn(w)``.

    The zero frequency and the Nyquist bin are mapped to zero, so
    ``H H f = -f`` holds for signals without content in those two bins.
    """
    if f.d != 1:
        raise ValueError("the Hilbert transform is defined here for d = 1 only")
    w = f.freqs
    mult = hilbert_multiplier(w)
    if f.n % 2 == 0:
        mult[f.n // 2] = 0.0
    return f.with_values(sfft.ifft(sfft.fft(f.values) * mult))
