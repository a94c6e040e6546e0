"""
Function spaces on the groups: sampled group functions, weights, weighted
mixed norms, the induced sequence norms, local maximum functions and
Wiener amalgam norms.

Only d = 1 grids are implemented.  A :class:`GroupGridFn` stores samples on a
rectangular grid whose first axis is the spatial variable ``x`` (uniform) and
whose second axis is the frequency ``w`` (uniform, Heisenberg) or the scale
``s`` (geometric, affine).  Quadrature uses the midpoint rule in ``x`` and
``w`` and the midpoint rule in ``log s``.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import ndimage

from .group_geometry import (AFFINE, HEISENBERG, GroupSpec, Neighborhood, PointFamily,
                             group_inv, group_mul, haar_density, modular_fn)

_TOL = 1e-9


# ---------------------------------------------------------------------------
# sampled group functions
# ---------------------------------------------------------------------------

@dataclass
class GroupGridFn:
    """Samples of a complex function on a rectangular grid in group coordinates.

    Parameters
    ----------
    spec : GroupSpec
    x : ndarray, shape (nx,)
        Uniform spatial axis.
    y : ndarray, shape (ny,)
        Frequency axis (uniform) for the Heisenberg group, scale axis
        (geometric, increasing) for the affine group.
    values : ndarray, shape (nx, ny)
    periodic : (bool, bool)
        Whether each axis wraps around.  A periodic axis of length ``n`` and
        step ``h`` has period ``n h``.
    """

    spec: GroupSpec
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    periodic: Tuple[bool, bool] = (False, False)

    def __post_init__(self):
        self.x = np.asarray(self.x, float)
        self.y = np.asarray(self.y, float)
        self.values = np.asarray(self.values)
        if self.spec.d != 1:
            raise NotImplementedError("grid functions are implemented for d = 1")
        if self.values.shape != (len(self.x), len(self.y)):
            raise ValueError(f"values shape {self.values.shape} does not match axes "
                             f"({len(self.x)}, {len(self.y)})")
        if self.spec.kind == AFFINE and np.any(self.y <= 0):
            raise ValueError("affine scale axis must be positive")

    # -- axis geometry -----------------------------------------------------
    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0]) if len(self.x) > 1 else 1.0

    @property
    def dy(self) -> float:
        """Step of the second axis (log step for the affine scale axis)."""
        if len(self.y) < 2:
            return 1.0
        if self.spec.kind == AFFINE:
            return float(np.log(self.y[1] / self.y[0]))
        return float(self.y[1] - self.y[0])

    @property
    def y_widths(self) -> np.ndarray:
        """Lebesgue cell widths along the second axis."""
        if self.spec.kind == AFFINE:
            return self.y * self.dy
        return np.full(len(self.y), self.dy)

    @property
    def outer_weights(self) -> np.ndarray:
        """Haar-measure weights of the outer (second) axis."""
        pts = np.stack([np.zeros_like(self.y), self.y], axis=-1)
        if self.spec.kind == HEISENBERG:
            return self.y_widths
        return self.y_widths * haar_density(self.spec, pts)

    @property
    def haar_weights(self) -> np.ndarray:
        """Cell volume times Haar density, shape (nx, ny)."""
        return self.dx * self.outer_weights[None, :] * np.ones((len(self.x), 1))

    def points(self) -> np.ndarray:
        """Coordinates of all samples, shape (nx, ny, 2)."""
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def with_values(self, values) -> "GroupGridFn":
        return replace(self, values=np.asarray(values))

    def abs(self) -> "GroupGridFn":
        return self.with_values(np.abs(self.values))

    # -- nearest-sample lookup ---------------------------------------------
    def axis_index(self, axis: int, coords) -> Tuple[np.ndarray, np.ndarray]:
        """Nearest-sample indices along one axis and a validity mask.

        Coordinates outside a non-periodic axis (beyond half a cell) are
        flagged invalid.  Periodic axes wrap.
        """
        coords = np.asarray(coords, float)
        if axis == 0:
            ax, step, geometric = self.x, self.dx, False
        else:
            ax, step, geometric = self.y, self.dy, self.spec.kind == AFFINE
        n = len(ax)
        if geometric:
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (np.log(np.where(coords > 0, coords, np.nan)) - np.log(ax[0])) / step
        else:
            t = (coords - ax[0]) / step
        bad = ~np.isfinite(t)
        t = np.where(bad, 0.0, t)
        idx = np.floor(t + 0.5 + _TOL).astype(np.int64)
        if self.periodic[axis]:
            idx = np.mod(idx, n)
            valid = ~bad
        else:
            valid = (~bad) & (idx >= 0) & (idx < n)
            idx = np.clip(idx, 0, n - 1)
        return idx, valid

    def sample(self, coords, fill: float = 0.0) -> np.ndarray:
        """Nearest-sample evaluation at points ``coords`` (..., 2)."""
        coords = np.asarray(coords, float)
        ix, vx = self.axis_index(0, coords[..., 0])
        iy, vy = self.axis_index(1, coords[..., 1])
        out = self.values[ix, iy]
        return np.where(vx & vy, out, fill)

    # -- serialization -----------------------------------------------------
    def to_csv(self) -> str:
        """CSV text with header ``axis0,axis1,re,im,haar_w`` (row-major)."""
        P = self.points().reshape(-1, 2)
        v = self.values.reshape(-1).astype(complex)
        w = self.haar_weights.reshape(-1)
        buf = io.StringIO()
        buf.write("axis0,axis1,re,im,haar_w\n")
        np.savetxt(buf, np.column_stack([P, v.real, v.imag, w]), delimiter=",", fmt="%.17g")
        return buf.getvalue()

    def save_npz(self, path) -> None:
        """Binary layout: arrays ``x``, ``y``, ``values`` plus ``meta`` (JSON)."""
        meta = json.dumps({"spec": self.spec.to_dict(), "periodic": list(self.periodic)})
        np.savez(path, x=self.x, y=self.y, values=self.values, meta=np.array(meta))

    @classmethod
    def load_npz(cls, path) -> "GroupGridFn":
        with np.load(path) as data:
            meta = json.loads(str(data["meta"]))
            spec = GroupSpec(meta["spec"]["kind"], meta["spec"]["d"])
            return cls(spec, data["x"], data["y"], data["values"], tuple(meta["periodic"]))


def uniform_axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Samples ``lo, lo + step, ...`` strictly below ``hi`` (half-open)."""
    n = int(np.floor((hi - lo) / step + 0.5))
    return lo + step * np.arange(n)


def geometric_axis(s_min: float = 2.0 ** -5, s_max: float = 2.0 ** 5,
                   voices: int = 16) -> np.ndarray:
    """Scales ``2^{k/voices}`` between ``s_min`` and ``s_max`` inclusive."""
    k0 = int(np.ceil(np.log2(s_min) * voices - _TOL))
    k1 = int(np.floor(np.log2(s_max) * voices + _TOL))
    return 2.0 ** (np.arange(k0, k1 + 1) / voices)


def sample_function(spec: GroupSpec, fn: Callable, x, y,
                    periodic=(False, False)) -> GroupGridFn:
    """Evaluate ``fn(x, y)`` (vectorized) on the product grid."""
    X, Y = np.meshgrid(np.asarray(x, float), np.asarray(y, float), indexing="ij")
    return GroupGridFn(spec, x, y, fn(X, Y), tuple(periodic))


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """A weight on the group.

    kinds
        ``polynomial_phase`` : ``(1 + |z|)^s`` on the phase plane.
        ``power_scale`` : ``s^{-sigma}`` on the affine group.
        ``constant`` : ``c``.
        ``symmetrized`` : ``max{w(p), w(p^{-1}) Delta(p^{-1})}`` of ``base``.
    """

    kind: str
    param: float = 0.0
    base: Optional["WeightSpec"] = None
    spec: Optional[GroupSpec] = None

    def to_dict(self) -> Dict:
        out = {"kind": self.kind, "param": float(self.param)}
        if self.base is not None:
            out["base"] = self.base.to_dict()
        return out


def PolynomialPhase(s: float) -> WeightSpec:
    return WeightSpec("polynomial_phase", float(s))


def PowerScale(sigma: float) -> WeightSpec:
    return WeightSpec("power_scale", float(sigma))


def Constant(c: float = 1.0) -> WeightSpec:
    if not c > 0:
        raise ValueError("constant weight must be positive")
    return WeightSpec("constant", float(c))


def eval_weight(w: WeightSpec, p, spec: Optional[GroupSpec] = None) -> np.ndarray:
    """Evaluate a weight at group points ``p`` (..., dim)."""
    p = np.asarray(p, float)
    if w.kind == "constant":
        return np.full(p.shape[:-1], w.param)
    if w.kind == "polynomial_phase":
        if spec is not None and spec.kind != HEISENBERG:
            raise ValueError("polynomial phase weights live on the phase plane")
        return (1.0 + np.sqrt(np.sum(p ** 2, axis=-1))) ** w.param
    if w.kind == "power_scale":
        if spec is not None and spec.kind != AFFINE:
            raise ValueError("power-scale weights live on the affine group")
        s = p[..., -1]
        if np.any(s <= 0):
            raise ValueError("scale must be positive")
        return s ** (-w.param)
    if w.kind == "symmetrized":
        gs = w.spec if w.spec is not None else spec
        inv = group_inv(gs, p)
        return np.maximum(eval_weight(w.base, p, gs),
                          eval_weight(w.base, inv, gs) * modular_fn(gs, inv))
    raise ValueError(f"unknown weight kind {w.kind!r}")


def symmetrize_weight(w: WeightSpec, spec: GroupSpec) -> WeightSpec:
    """``w#(p) = max{w(p), w(p^{-1}) Delta(p^{-1})}``."""
    return WeightSpec("symmetrized", 0.0, base=w, spec=spec)


def weight_on_grid(w: WeightSpec, F: GroupGridFn) -> np.ndarray:
    return eval_weight(w, F.points(), F.spec)


# ---------------------------------------------------------------------------
# mixed norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixedNormParams:
    """Exponents and weight of ``L^{p,q}_m``; inner integral over ``x``."""

    p: float = 2.0
    q: float = 2.0
    weight: WeightSpec = field(default_factory=Constant)

    def __post_init__(self):
        for e in (self.p, self.q):
            if not (e >= 1):
                raise ValueError("mixed-norm exponents must lie in [1, inf]")

    def to_dict(self) -> Dict:
        return {"p": _num(self.p), "q": _num(self.q), "weight": self.weight.to_dict()}


def _num(v: float):
    return "inf" if np.isinf(v) else float(v)


def _lp(a: np.ndarray, w: np.ndarray, p: float, axis: int) -> np.ndarray:
    if np.isinf(p):
        return np.max(a, axis=axis)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(m > 0, m, 1.0)
    return np.squeeze(m, axis=axis) * np.sum((a / m) ** p * w, axis=axis) ** (1.0 / p)


def mixed_norm(F: GroupGridFn, params: MixedNormParams) -> float:
    """Weighted mixed norm ``( int ( int |F m|^p dx )^{q/p} dmu(y) )^{1/q}``.

    ``dmu`` is the Haar measure of the outer coordinate: ``dw`` on the phase
    plane, ``ds / s^2`` on the affine group.  Infinite exponents give maxima.
    """
    vals = np.asarray(F.values)
    if np.any(np.isnan(vals)):
        raise ValueError("grid function contains NaN")
    a = np.abs(vals) * weight_on_grid(params.weight, F)
    inner = _lp(a, np.full((len(F.x), 1), F.dx), params.p, axis=0)
    return float(_lp(inner, F.outer_weights, params.q, axis=0))


def boundary_fraction(F: GroupGridFn, params: MixedNormParams, band: float = 0.05) -> float:
    """Share of the norm carried by the outer ``band`` of non-periodic axes.

    Used as a truncation-error estimate for norms of sampled data.
    """
    total = mixed_norm(F, params)
    if total == 0:
        return 0.0
    mask = np.zeros(F.values.shape, bool)
    for axis, n in enumerate(F.values.shape):
        if F.periodic[axis]:
            continue
        k = max(1, int(round(band * n)))
        sl = [slice(None), slice(None)]
        sl[axis] = slice(0, k)
        mask[tuple(sl)] = True
        sl[axis] = slice(n - k, n)
        mask[tuple(sl)] = True
    edge = F.with_values(np.where(mask, F.values, 0))
    return mixed_norm(edge, params) / total


def norm_report(norm: float, params: MixedNormParams, truncation: float) -> str:
    return json.dumps({"norm": float(norm), "p": _num(params.p), "q": _num(params.q),
                       "weight": params.weight.to_dict(),
                       "truncation_estimate": float(truncation)}, sort_keys=True)


# ---------------------------------------------------------------------------
# sequence spaces
# ---------------------------------------------------------------------------

@dataclass
class SequenceData:
    """Coefficients indexed by a point family."""

    family: PointFamily
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs)
        if self.coeffs.shape != (len(self.family),):
            raise ValueError("one coefficient per family point is required")

    def scaled(self, c: complex) -> "SequenceData":
        return SequenceData(self.family, c * self.coeffs)


def _boxes_disjoint(family: PointFamily, U: Neighborhood) -> bool:
    lo, hi = U.translated_box(family.points)
    order = np.argsort(lo[:, 0], kind="stable")
    lo, hi = lo[order], hi[order]
    # boxes starting before box i ends in x are the only candidates
    stop = np.searchsorted(lo[:, 0], hi[:, 0] - _TOL, "left")
    for i in range(len(lo)):
        j = slice(i + 1, stop[i])
        if np.any((lo[j, 1] < hi[i, 1] - _TOL) & (lo[i, 1] < hi[j, 1] - _TOL)
                  & (lo[i, 0] < hi[j, 0] - _TOL)):
            return False
    return True


def cell_weight_integrals(family: PointFamily, U: Neighborhood, w: WeightSpec,
                          power: float, n_quad: int = 24) -> np.ndarray:
    """``int_{x_i U} w^power dHaar`` for every family point (Gauss-Legendre).

    The scale variable is integrated in ``log s``.
    """
    spec = family.spec
    lo, hi = U.translated_box(family.points)
    t, tw = np.polynomial.legendre.leggauss(n_quad)
    out = np.empty(len(family))
    for i in range(len(family)):
        xs = 0.5 * (hi[i, 0] - lo[i, 0]) * t + 0.5 * (hi[i, 0] + lo[i, 0])
        wx = 0.5 * (hi[i, 0] - lo[i, 0]) * tw
        if spec.kind == AFFINE:
            l0, l1 = np.log(lo[i, 1]), np.log(hi[i, 1])
            ys = np.exp(0.5 * (l1 - l0) * t + 0.5 * (l1 + l0))
            wy = 0.5 * (l1 - l0) * tw * ys
        else:
            ys = 0.5 * (hi[i, 1] - lo[i, 1]) * t + 0.5 * (hi[i, 1] + lo[i, 1])
            wy = 0.5 * (hi[i, 1] - lo[i, 1]) * tw
        P = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
        dens = haar_density(spec, P)
        out[i] = np.sum(eval_weight(w, P, spec) ** power * dens * wx[:, None] * wy[None, :])
    return out


def rasterize(c: SequenceData, U: Neighborhood, grid: GroupGridFn) -> GroupGridFn:
    """Sample ``sum_i |c_i| chi_{x_i U}`` on ``grid`` (half-open cells)."""
    lo, hi = U.translated_box(c.family.points)
    # both axes are increasing, so every box is a rectangle of indices
    x0 = np.searchsorted(grid.x, lo[:, 0] - _TOL, "left")
    x1 = np.searchsorted(grid.x, hi[:, 0] - _TOL, "left")
    y0 = np.searchsorted(grid.y, lo[:, 1] * (1 - _TOL), "left")
    y1 = np.searchsorted(grid.y, hi[:, 1] * (1 - _TOL), "left")
    out = np.zeros((len(grid.x), len(grid.y)))
    for i, ci in enumerate(np.abs(c.coeffs)):
        out[x0[i]:x1[i], y0[i]:y1[i]] += ci
    return grid.with_values(out)


def default_raster_grid(family: PointFamily, U: Neighborhood, per_cell: int = 32) -> GroupGridFn:
    """Cell-centred grid fine enough to resolve every ``x_i U``."""
    lo, hi = U.translated_box(family.points)
    spec = family.spec
    if spec.kind == HEISENBERG:
        hx = 2 * U.a / per_cell
        x = uniform_axis(lo[:, 0].min(), hi[:, 0].max(), hx) + hx / 2
        y = uniform_axis(lo[:, 1].min(), hi[:, 1].max(), hx) + hx / 2
    else:
        hx = 2 * U.a * family.points[:, 1].min() / per_cell
        x = uniform_axis(lo[:, 0].min(), hi[:, 0].max(), hx) + hx / 2
        dl = 2 * np.log(U.b) / per_cell
        ly = uniform_axis(np.log(lo[:, 1].min()), np.log(hi[:, 1].max()), dl) + dl / 2
        y = np.exp(ly)
    return GroupGridFn(spec, x, y, np.zeros((len(x), len(y))))


def sequence_norm(c: SequenceData, params: MixedNormParams, U: Neighborhood,
                  raster_grid: Optional[GroupGridFn] = None) -> float:
    """Norm in the sequence space induced by ``L^{p,q}_m``.

    ``|| c ||`` is ``|| sum_i |c_i| chi_{x_i U} ||``.  When ``p == q`` and the
    sets ``x_i U`` are pairwise disjoint this equals the weighted l^p norm
    ``( sum_i |c_i|^p int_{x_i U} m^p dHaar )^{1/p}``, which is evaluated in
    closed form.  Otherwise the indicator sum is rasterized.
    """
    if np.any(np.isnan(c.coeffs)):
        raise ValueError("coefficients contain NaN")
    if params.p == params.q and _boxes_disjoint(c.family, U) and raster_grid is None:
        p = params.p
        a = np.abs(c.coeffs)
        if np.isinf(p):
            lo, hi = U.translated_box(c.family.points)
            corners = [np.stack([lo[:, 0], lo[:, 1]], -1), np.stack([hi[:, 0], hi[:, 1]], -1),
                       np.stack([lo[:, 0], hi[:, 1]], -1), np.stack([hi[:, 0], lo[:, 1]], -1),
                       c.family.points]
            wmax = np.max([eval_weight(params.weight, q, c.family.spec) for q in corners], axis=0)
            return float(np.max(a * wmax))
        vol = cell_weight_integrals(c.family, U, params.weight, p)
        return float(np.sum(a ** p * vol) ** (1.0 / p))
    grid = raster_grid if raster_grid is not None else default_raster_grid(c.family, U)
    return mixed_norm(rasterize(c, U, grid), params)


def sequence_weights(c_family: PointFamily, U: Neighborhood, w: WeightSpec,
                     p: float) -> np.ndarray:
    """Effective l^p weights ``( int_{x_i U} w^p dHaar )^{1/p}``."""
    return cell_weight_integrals(c_family, U, w, p) ** (1.0 / p)


# ---------------------------------------------------------------------------
# local maximum functions and amalgam norms
# ---------------------------------------------------------------------------

def _half_width(radius: float, step: float) -> int:
    return int(np.floor(radius / step + _TOL))


def _row_max(row: np.ndarray, k: int, periodic: bool) -> np.ndarray:
    if k <= 0:
        return row
    return ndimage.maximum_filter1d(row, size=2 * k + 1,
                                    mode="wrap" if periodic else "constant", cval=0.0)


def _scale_offsets(F: GroupGridFn, U: Neighborhood) -> np.ndarray:
    """Scale-index offsets ``k`` with ``rho^k`` in ``[1/b, b]``."""
    kb = _half_width(np.log(U.b), F.dy)
    return np.arange(-kb, kb + 1)


def _heis_left_max(A: np.ndarray, F: GroupGridFn, U: Neighborhood) -> np.ndarray:
    kx, ky = _half_width(U.a, F.dx), _half_width(U.a, F.dy)
    modes = ["wrap" if per else "constant" for per in F.periodic]
    return ndimage.maximum_filter(A, size=(2 * kx + 1, 2 * ky + 1), mode=modes, cval=0.0)


def local_max(F: GroupGridFn, U: Neighborhood, side: str = "left",
              out_grid: Optional[GroupGridFn] = None) -> GroupGridFn:
    """Local maximum function of ``|F|``.

    ``left``:  ``F#(x) = sup_{y in xU} |F(y)|``.
    ``right``: ``F#R(x) = sup_{y in U^{-1} x^{-1}} |F(y)|``.

    The supremum runs over grid samples of the translated neighbourhood;
    translated points are located by exact group multiplication followed
    by nearest-sample lookup, and points outside the grid are ignored.
    ``out_grid`` selects the evaluation grid of the right version
    (default: the grid of ``F``).
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    A = np.abs(F.values).astype(float)
    spec = F.spec
    if side == "left":
        if spec.kind == HEISENBERG:
            return F.with_values(_heis_left_max(A, F, U))
        out = np.zeros_like(A)
        offs = _scale_offsets(F, U)
        ns = len(F.y)
        for i, s in enumerate(F.y):
            k = _half_width(s * U.a, F.dx)
            for o in offs:
                if 0 <= i + o < ns:
                    out[:, i] = np.maximum(out[:, i], _row_max(A[:, i + o], k, F.periodic[0]))
        return F.with_values(out)

    grid = out_grid if out_grid is not None else F
    if spec.kind == HEISENBERG:
        L = F.with_values(_heis_left_max(A, F, U))
        return grid.with_values(L.sample(-grid.points()))
    out = np.zeros((len(grid.x), len(grid.y)))
    offs = _scale_offsets(F, U)
    rho = np.exp(F.dy)
    # target scale 1/(r s): index of 1/s shifted by -o for r = rho^o
    inv_idx, inv_ok = F.axis_index(1, 1.0 / grid.y)
    for j, s in enumerate(grid.y):
        if not inv_ok[j]:
            continue
        for o in offs:
            t = inv_idx[j] - o
            if not 0 <= t < len(F.y):
                continue
            r = rho ** o
            row = _row_max(A[:, t], _half_width(U.a / r, F.dx), F.periodic[0])
            ix, ok = F.axis_index(0, -grid.x / (s * r))
            out[:, j] = np.maximum(out[:, j], np.where(ok, row[ix], 0.0))
    return grid.with_values(out)


def reflected_local_max(F: GroupGridFn, U: Neighborhood) -> GroupGridFn:
    """``M(y) = sup_{z in U^{-1} y} |F(z)|`` on the grid of ``F``.

    Since ``F#R(y^{-1}) = M(y)``, this is the right local maximum function
    pulled back through inversion, which keeps the computation on the
    region where ``F`` is sampled.
    """
    A = np.abs(F.values).astype(float)
    if F.spec.kind == HEISENBERG:
        # U^{-1} y = y - U and U is symmetric
        return F.with_values(_heis_left_max(A, F, U))
    out = np.zeros_like(A)
    rho = np.exp(F.dy)
    for o in _scale_offsets(F, U):
        r = rho ** o
        k = _half_width(U.a / r, F.dx)
        ix, ok = F.axis_index(0, F.x / r)
        for i in range(len(F.y)):
            t = i - o
            if not 0 <= t < len(F.y):
                continue
            row = _row_max(A[:, t], k, F.periodic[0])
            out[:, i] = np.maximum(out[:, i], np.where(ok, row[ix], 0.0))
    return F.with_values(out)


def amalgam_integrand(F: GroupGridFn, U: Neighborhood, w: WeightSpec) -> GroupGridFn:
    """Density ``M(y) w(y^{-1}) Delta(y^{-1})`` of the right amalgam norm.

    Integrating it against Haar measure gives ``|| F | W^R(L^inf, L^1_w) ||``;
    see :func:`amalgam_norm`.
    """
    M = reflected_local_max(F, U)
    inv = group_inv(F.spec, F.points())
    return M.with_values(M.values * eval_weight(w, inv, F.spec) * modular_fn(F.spec, inv))


def amalgam_norm(F: GroupGridFn, U: Neighborhood, w: WeightSpec, side: str = "right") -> float:
    """Wiener amalgam norm ``|| F | W(L^inf, L^1_w) ||`` (left or right).

    The right version is computed through the substitution ``x = y^{-1}``,

        int F#R(x) w(x) dx = int M(y) w(y^{-1}) Delta(y^{-1}) dy,

    with ``M`` from :func:`reflected_local_max`.
    """
    if side == "left":
        G = local_max(F, U, "left")
        return mixed_norm(G, MixedNormParams(1.0, 1.0, w))
    if side != "right":
        raise ValueError("side must be 'left' or 'right'")
    D = amalgam_integrand(F, U, w)
    return float(np.sum(D.values * F.haar_weights))


def translate(H: GroupGridFn, p, out_grid: Optional[GroupGridFn] = None) -> GroupGridFn:
    """Left translate ``L_p H (z) = H(p^{-1} z)`` sampled on ``out_grid``."""
    grid = out_grid if out_grid is not None else H
    P = grid.points()
    pinv = group_inv(H.spec, np.asarray(p, float))
    return grid.with_values(H.sample(group_mul(H.spec, pinv, P)))


def convolution_bound_check(c: SequenceData, H: GroupGridFn, params: MixedNormParams,
                            U: Neighborhood, w: Optional[WeightSpec] = None,
                            out_grid: Optional[GroupGridFn] = None) -> Dict:
    """Compare ``|| sum_i c_i L_{x_i} H ||`` with ``|| c || * || H | W^R ||``.

    ``w`` is the amalgam weight (default: the symmetrized norm weight).
    """
    w = w if w is not None else symmetrize_weight(params.weight, H.spec)
    grid = out_grid if out_grid is not None else H
    acc = np.zeros(grid.values.shape, dtype=complex)
    for ci, p in zip(c.coeffs, c.family.points):
        if ci != 0:
            acc += ci * translate(H, p, grid).values
    lhs = mixed_norm(grid.with_values(acc), params)
    rhs = sequence_norm(c, params, U) * amalgam_norm(H, U, w, "right")
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else np.inf}
