"""
Group geometry for the reduced Heisenberg group and the affine group.

Points are stored as real coordinate vectors.  The reduced Heisenberg group
has its center dropped, so a point is a phase-space pair ``(x, w)`` in
R^{2d} and the group law is plain addition.  The affine group ``ax + b``
has points ``(x, s)`` with ``x`` in R^d and ``s > 0``, multiplied as

    (x, s) . (x', s') = (x + s x', s s').

All functions accept a single point (1-D array) or a stack of points whose
last axis holds the coordinates, so they can be used on whole grids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

HEISENBERG = "heisenberg"
AFFINE = "affine"


@dataclass(frozen=True)
class GroupSpec:
    """Which group we work on and its spatial dimension."""

    kind: str
    d: int = 1

    def __post_init__(self):
        if self.kind not in (HEISENBERG, AFFINE):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("spatial dimension d must be a positive integer")

    @property
    def dim(self) -> int:
        """Number of coordinates of a group point."""
        return 2 * self.d if self.kind == HEISENBERG else self.d + 1

    @property
    def identity(self) -> np.ndarray:
        e = np.zeros(self.dim)
        if self.kind == AFFINE:
            e[-1] = 1.0
        return e

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "d": self.d}


def heisenberg(d: int = 1) -> GroupSpec:
    return GroupSpec(HEISENBERG, d)


def affine(d: int = 1) -> GroupSpec:
    return GroupSpec(AFFINE, d)


def _as_points(spec: GroupSpec, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != spec.dim:
        raise ValueError(
            f"{spec.kind} points need {spec.dim} coordinates, got {p.shape[-1]}")
    if spec.kind == AFFINE and np.any(p[..., -1] <= 0):
        raise ValueError("affine scale component must be strictly positive")
    return p


def group_mul(spec: GroupSpec, p, q) -> np.ndarray:
    """Group product ``p . q`` (broadcasts over leading axes)."""
    p = _as_points(spec, p)
    q = _as_points(spec, q)
    if spec.kind == HEISENBERG:
        return p + q
    x = p[..., :-1] + p[..., -1:] * q[..., :-1]
    s = p[..., -1:] * q[..., -1:]
    return np.concatenate(np.broadcast_arrays(x, s), axis=-1)


def group_inv(spec: GroupSpec, p) -> np.ndarray:
    """Group inverse; ``(x, s)^{-1} = (-x/s, 1/s)`` on the affine group."""
    p = _as_points(spec, p)
    if spec.kind == HEISENBERG:
        return -p
    s = p[..., -1:]
    return np.concatenate([-p[..., :-1] / s, 1.0 / s], axis=-1)


def haar_density(spec: GroupSpec, p) -> np.ndarray:
    """Density of left Haar measure w.r.t. Lebesgue measure in coordinates.

    Heisenberg: 1.  Affine: ``s^{-(d+1)}``, i.e. ``dx ds / s^{d+1}``.
    """
    p = _as_points(spec, p)
    if spec.kind == HEISENBERG:
        return np.ones(p.shape[:-1])
    return p[..., -1] ** (-(spec.d + 1.0))


def modular_fn(spec: GroupSpec, p) -> np.ndarray:
    """Modular function, normalized so that right translation obeys

        integral F(y . p) dy = modular_fn(p)^{-1} * integral F(y) dy.

    Heisenberg: 1.  Affine: ``s^{-d}``.
    """
    p = _as_points(spec, p)
    if spec.kind == HEISENBERG:
        return np.ones(p.shape[:-1])
    return p[..., -1] ** (-float(spec.d))


@dataclass(frozen=True)
class Neighborhood:
    """Relatively compact neighbourhood ``U`` of the identity.

    Heisenberg: the box ``[-a, a]^{2d}``.  Affine: ``B(0, a) x [1/b, b]``,
    where the ball is taken in the sup-norm for d > 1 (for d = 1 both agree).
    """

    spec: GroupSpec
    a: float
    b: Optional[float] = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("neighbourhood radius a must be positive")
        if self.spec.kind == AFFINE and (self.b is None or not self.b > 1):
            raise ValueError("affine neighbourhood needs b > 1")

    def contains(self, p) -> np.ndarray:
        p = _as_points(self.spec, p)
        tol = 1e-12
        if self.spec.kind == HEISENBERG:
            return np.all(np.abs(p) <= self.a + tol, axis=-1)
        inside_x = np.all(np.abs(p[..., :-1]) <= self.a + tol, axis=-1)
        s = p[..., -1]
        return inside_x & (s >= 1.0 / self.b - tol) & (s <= self.b + tol)

    def haar_volume(self) -> float:
        """Left Haar measure of ``U``."""
        d = self.spec.d
        if self.spec.kind == HEISENBERG:
            return (2.0 * self.a) ** (2 * d)
        # integral over [1/b, b] of (2a)^d s^{-(d+1)} ds
        return (2.0 * self.a) ** d * (self.b ** d - self.b ** (-d)) / d

    def translated_box(self, p) -> Tuple[np.ndarray, np.ndarray]:
        """Coordinate bounding box of ``p U``; exact since U is a box."""
        p = _as_points(self.spec, p)
        if self.spec.kind == HEISENBERG:
            return p - self.a, p + self.a
        s = p[..., -1:]
        lo = np.concatenate([p[..., :-1] - s * self.a, s / self.b], axis=-1)
        hi = np.concatenate([p[..., :-1] + s * self.a, s * self.b], axis=-1)
        return lo, hi


@dataclass(frozen=True)
class GaborLattice:
    alpha: float
    beta: float
    m_range: Tuple[int, int]
    n_range: Tuple[int, int]
    d: int = 1


@dataclass(frozen=True)
class Dyadic:
    j_range: Tuple[int, int]
    k_range: object  # (lo, hi) for every j, or a callable j -> (lo, hi)
    d: int = 1
    step: float = 1.0  # translation step at scale 1; points (2^-j step k, 2^-j)


@dataclass
class PointFamily:
    """Ordered discrete set of group points with index labels.

    ``points`` has shape ``(n, dim)``; ``labels[i]`` is ``(m, n)`` for Gabor
    lattices and ``(j, k)`` for dyadic families.  Ranges are inclusive.
    """

    spec: GroupSpec
    points: np.ndarray
    labels: List[Tuple]
    kind: str
    params: Dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "params": self.params,
            "points": [list(map(float, p)) for p in self.points],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PointFamily":
        data = json.loads(text)
        pts = np.asarray(data["points"], dtype=float)
        params = data["params"]
        if data["kind"] == "gabor":
            fam = make_point_family(GaborLattice(
                params["alpha"], params["beta"], tuple(params["m_range"]),
                tuple(params["n_range"]), params.get("d", 1)))
        elif data["kind"] == "dyadic":
            if "k_ranges" in params:
                ranges = {int(j): tuple(r) for j, r in params["k_ranges"].items()}
                k_range = ranges.__getitem__
            else:
                k_range = tuple(params["k_range"])
            fam = make_point_family(Dyadic(tuple(params["j_range"]), k_range,
                                           params.get("d", 1), params.get("step", 1.0)))
        else:
            raise ValueError(f"unknown family kind {data['kind']!r}")
        if not np.allclose(fam.points, pts):
            raise ValueError("point list does not match the generator parameters")
        return fam


def make_point_family(generator) -> PointFamily:
    """Build a Gabor lattice or a dyadic family from its generator.

    Gabor points are ordered row-major in ``(m, n)``.  Dyadic points are
    ordered by ``j`` then ``k``.  Only d = 1 is supported for the explicit
    enumerations used by the transforms.
    """
    if isinstance(generator, GaborLattice):
        if generator.alpha <= 0 or generator.beta <= 0:
            raise ValueError("lattice constants must be positive")
        m0, m1 = generator.m_range
        n0, n1 = generator.n_range
        labels = [(m, n) for m in range(m0, m1 + 1) for n in range(n0, n1 + 1)]
        if not labels:
            raise ValueError("empty index range")
        pts = np.array([(generator.alpha * m, generator.beta * n) for m, n in labels], float)
        params = {"alpha": generator.alpha, "beta": generator.beta,
                  "m_range": [m0, m1], "n_range": [n0, n1], "d": generator.d}
        return PointFamily(heisenberg(generator.d), pts, labels, "gabor", params)
    if isinstance(generator, Dyadic):
        j0, j1 = generator.j_range
        labels = []
        per_scale = {}
        for j in range(j0, j1 + 1):
            kr = generator.k_range(j) if callable(generator.k_range) else generator.k_range
            per_scale[str(j)] = [int(kr[0]), int(kr[1])]
            labels.extend((j, k) for k in range(kr[0], kr[1] + 1))
        if not labels:
            raise ValueError("empty index range")
        pts = np.array([(2.0 ** (-j) * generator.step * k, 2.0 ** (-j)) for j, k in labels],
                       float)
        params = {"j_range": [j0, j1], "d": generator.d, "step": generator.step}
        if callable(generator.k_range):
            params["k_ranges"] = per_scale
        else:
            params["k_range"] = list(generator.k_range)
        return PointFamily(affine(generator.d), pts, labels, "dyadic", params)
    raise TypeError("generator must be GaborLattice or Dyadic")


def check_well_spread(family: PointFamily, U: Neighborhood,
                      domain_box: Sequence[Tuple[float, float]],
                      samples_per_axis: int = 81) -> Dict:
    """Test U-density on a box and count overlaps of the sets ``x_i U``.

    Parameters
    ----------
    family : PointFamily
    U : Neighborhood
    domain_box : sequence of (lo, hi)
        Coordinate box on which density is tested (one pair per coordinate).
        For the affine scale axis the probe points are spaced geometrically.
    samples_per_axis : int
        Probe points per coordinate.

    Returns
    -------
    dict
        ``u_dense_on_box``: every probe point lies in some ``x_i U``.
        ``max_overlap``: max over i of ``#{j : x_j U meets x_i U}``
        (touching boundaries do not count as meeting).
    """
    spec = family.spec
    lo, hi = U.translated_box(family.points)
    axes = []
    for k, (a, b) in enumerate(domain_box):
        if spec.kind == AFFINE and k == spec.dim - 1:
            axes.append(np.geomspace(a, b, samples_per_axis))
        else:
            axes.append(np.linspace(a, b, samples_per_axis))
    probes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, spec.dim)
    tol = 1e-12
    covered = np.zeros(len(probes), dtype=bool)
    for i in range(len(family)):
        inside = np.all((probes >= lo[i] - tol) & (probes <= hi[i] + tol), axis=1)
        covered |= inside
    meets = np.all((lo[:, None, :] < hi[None, :, :] - tol)
                   & (lo[None, :, :] < hi[:, None, :] - tol), axis=-1)
    return {"u_dense_on_box": bool(covered.all()),
            "max_overlap": int(meets.sum(axis=1).max())}


def default_neighborhood(spec: GroupSpec) -> Neighborhood:
    """Neighbourhood used when none is given.

    Heisenberg: ``[-1/2, 1/2]^2``, the unit cell of the integer lattice.
    Affine: ``[-1/2, 1/2] x [2^{-1/2}, 2^{1/2}]``, whose translates by the
    dyadic family tile the upper half plane.
    """
    if spec.kind == HEISENBERG:
        return Neighborhood(spec, 0.5)
    return Neighborhood(spec, 0.5, float(np.sqrt(2.0)))
