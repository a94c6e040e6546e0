"""
Coorbit norms and operators built from molecules.

Modulation norms are mixed norms of the short-time Fourier transform.
Homogeneous Besov norms are computed two ways: by a Littlewood-Paley sum
and as a weighted mixed norm of the continuous wavelet transform.  An
operator is known through the images ``m_i = T(pi(x_i) g)`` of the atoms
of a frame; it is extended by

    T~ f = sum_i <f, e_i> m_i,

with ``e_i`` the canonical dual frame.  When the images form a family of
molecules (envelope in the right amalgam space), ``T~`` is bounded on
every coorbit space whose weight is controlled by the envelope weight.
:func:`boundedness_certificate` checks the molecule hypothesis and
measures the ratios ``||T~ f|| / ||f||`` on seeded test signals.

Two applications are provided: Weyl operators with smooth symbols on
modulation spaces and the Hilbert transform on Besov spaces.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import scipy

from . import __version__
from .frames import FrameSystem, dual_coefficients, random_test_signals
from .group_geometry import (AFFINE, HEISENBERG, GroupSpec, Neighborhood, affine,
                             default_neighborhood)
from .molecules import Envelope, MoleculeFamily, atom_family, envelope_extract
from .spaces import (Constant, GroupGridFn, MixedNormParams, PolynomialPhase, PowerScale,
                     SequenceData, WeightSpec, mixed_norm, sequence_norm, symmetrize_weight)
from .transforms import (PhaseGrid, SignalGrid, TransformSettings, Window, hilbert,
                         random_bandlimited, sample_symbol, stft, symbol_aliased, voice_transform, weyl_kernel)

#: slack between the measured ratios and ``C_frame * ||H||``
CERTIFICATE_SLACK = 1.1
#: number of seeded test signals per certificate
N_TEST_SIGNALS = 30
#: identifies the Littlewood-Paley cutoff in reports
CUTOFF_VERSION = "exp(-1/x) smooth step, phi = 1 on [-1, 1], supp phi in (-2, 2); v1"


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoorbitParams:
    """A coorbit space ``Co L^{p,q}_m`` on one of the two groups.

    On the affine group, setting ``besov_exponent = sigma`` selects the
    homogeneous Besov space of smoothness ``sigma``; the weight is then
    ``s^{-(sigma + d/2 - d/q)}`` and the weight in ``mixed`` is ignored.
    """

    group: GroupSpec
    window: Window
    mixed: MixedNormParams = MixedNormParams()
    besov_exponent: Optional[float] = None
    settings: TransformSettings = TransformSettings()

    def __post_init__(self):
        if self.besov_exponent is not None and self.group.kind != AFFINE:
            raise ValueError("a Besov exponent needs the affine group")

    @property
    def weight_exponent(self) -> Optional[float]:
        """``sigma + d/2 - d/q`` (``d/q = 0`` for ``q = inf``)."""
        if self.besov_exponent is None:
            return None
        d = self.group.d
        return float(self.besov_exponent + d / 2 - d / self.mixed.q)

    def norm_params(self) -> MixedNormParams:
        if self.besov_exponent is None:
            return self.mixed
        return MixedNormParams(self.mixed.p, self.mixed.q, PowerScale(self.weight_exponent))

    def norm(self, f: SignalGrid) -> float:
        return mixed_norm(voice_transform(f, self.window, self.group, self.settings),
                          self.norm_params())

    def describe(self) -> Dict:
        p, q = (_num(v) for v in (self.mixed.p, self.mixed.q))
        out = {"p": p, "q": q,
               "sigma": None if self.besov_exponent is None else float(self.besov_exponent)}
        if self.besov_exponent is None:
            out["weight"] = self.mixed.weight.to_dict()
        return out


def _num(v: float):
    return "inf" if np.isinf(v) else float(v)


def canonical_weight(params_list: Sequence[CoorbitParams]) -> WeightSpec:
    """A symmetric weight controlling every weight in ``params_list``.

    Phase plane: ``(1 + |z|)^s`` with the largest exponent used (constant
    when all are unweighted).  Affine group: the symmetrization of
    ``s^{-a}`` with ``a`` the largest ``|weight exponent|``.
    """
    if not params_list:
        raise ValueError("empty parameter list")
    spec = params_list[0].group
    if spec.kind == HEISENBERG:
        exps = []
        for pr in params_list:
            w = pr.mixed.weight
            if w.kind == "polynomial_phase":
                exps.append(abs(w.param))
            elif w.kind != "constant":
                raise ValueError(f"unsupported phase-plane weight {w.kind!r}")
        return PolynomialPhase(max(exps)) if exps and max(exps) > 0 else Constant()
    a = 0.0
    for pr in params_list:
        w = pr.norm_params().weight
        if w.kind == "power_scale":
            a = max(a, abs(w.param))
        elif w.kind != "constant":
            raise ValueError(f"unsupported affine weight {w.kind!r}")
    return symmetrize_weight(PowerScale(a), spec)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def modulation_norm(f: SignalGrid, params: CoorbitParams) -> float:
    """``|| V_g f | L^{p,q}_m ||`` on the phase plane.

    Examples
    --------
    With ``p = q = 2`` and no weight this is ``||f|| ||g||`` (Moyal).
    """
    if params.group.kind != HEISENBERG:
        raise ValueError("modulation norms live on the Heisenberg group")
    return mixed_norm(stft(f, params.window, params.settings.phase_grid), params.norm_params())


def _smooth_step(u):
    """``exp(-1/x)``-based step: 0 for ``u <= 0``, 1 for ``u >= 1``, smooth."""
    u = np.asarray(u, float)
    a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
    b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def lp_cutoff(y) -> np.ndarray:
    """``phi(y)``: 1 on ``|y| <= 1``, 0 on ``|y| >= 2``, smooth in between."""
    return 1.0 - _smooth_step(np.abs(np.asarray(y, float)) - 1.0)


def lp_piece(w, j: int) -> np.ndarray:
    """``phi_j(w) = phi(2^-j w) - phi(2^{-j+1} w)``, supported in
    ``2^{j-1} < |w| < 2^{j+1}``."""
    w = np.asarray(w, float)
    return lp_cutoff(2.0 ** -j * w) - lp_cutoff(2.0 ** (-j + 1) * w)


def lp_range(f: SignalGrid) -> range:
    """Indices ``j`` whose pieces meet the nonzero frequencies of the grid."""
    lo = 1.0 / f.period
    hi = 0.5 / f.spacing
    return range(int(np.floor(np.log2(lo))) - 1, int(np.ceil(np.log2(hi))) + 2)


def lp_pieces(f: SignalGrid) -> Dict[int, np.ndarray]:
    """Littlewood-Paley pieces ``F^-1(phi_j f^)`` (values on the grid)."""
    w = f.freqs
    spec_vals = f.spectrum()
    return {j: SignalGrid.from_spectrum(f, spec_vals * lp_piece(w, j)).values for j in lp_range(f)}


def _seq_norm(a: np.ndarray, r: float) -> float:
    if np.isinf(r):
        return float(np.max(a)) if len(a) else 0.0
    m = np.max(a) if len(a) else 0.0
    return 0.0 if m == 0 else float(m * np.sum((a / m) ** r) ** (1.0 / r))


def besov_norm_lp(f: SignalGrid, p: float, q: float, sigma: float) -> float:
    """Homogeneous Besov norm by the Littlewood-Paley sum

        ( sum_j 2^{j sigma q} || F^-1(phi_j f^) |L^p||^q )^{1/q}

    over :func:`lp_range`.  Content at zero frequency is invisible to a
    homogeneous norm; a warning is issued if ``f`` has any.
    """
    spec_vals = f.spectrum()
    tot = np.sum(np.abs(spec_vals) ** 2)
    if tot > 0 and np.abs(spec_vals[0]) ** 2 > 1e-12 * tot:
        warnings.warn("signal has content at zero frequency, which the homogeneous "
                      "norm does not see", RuntimeWarning, stacklevel=2)
    js, vals = [], []
    for j, piece in lp_pieces(f).items():
        a = np.abs(piece)
        nj = float(np.max(a)) if np.isinf(p) else _seq_norm(a, p) * f.spacing ** (1.0 / p)
        js.append(j)
        vals.append(2.0 ** (j * sigma) * nj)
    return _seq_norm(np.array(vals), q)


def besov_params(p: float, q: float, sigma: float, g: Window,
                 settings: TransformSettings = TransformSettings()) -> CoorbitParams:
    return CoorbitParams(affine(1), g, MixedNormParams(p, q), sigma, settings)


def besov_norm_cwt(f: SignalGrid, p: float, q: float, sigma: float, g: Window,
                   settings: TransformSettings = TransformSettings()) -> float:
    """Besov norm as ``|| W_g f | L^{p,q}_{sigma + 1/2 - 1/q} ||`` on the affine group."""
    return besov_params(p, q, sigma, g, settings).norm(f)


def besov_test_suite(grid: SignalGrid, n: int = 20, seed: int = 0) -> List[SignalGrid]:
    """Seeded band-limited signals of varied bands and sizes.

    Signal ``k`` has its spectrum on ``[lo, hi]`` with ``lo = 2^u``,
    ``u ~ U(-2, 0)``, ``hi = lo 2^v``, ``v ~ U(1, 3)``, and amplitude
    ``2^a``, ``a ~ U(-3, 3)``; norms on the suite therefore spread over
    several orders of magnitude and orderings are meaningful.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        lo = 2.0 ** rng.uniform(-2.0, 0.0)
        hi = min(lo * 2.0 ** rng.uniform(1.0, 3.0), 0.45 / grid.spacing)
        amp = 2.0 ** rng.uniform(-3.0, 3.0)
        f = random_bandlimited(grid, rng, band=(lo, hi))
        out.append(f.with_values(amp * f.values))
    return out


def window_equivalence(f_suite: Sequence[SignalGrid], params: CoorbitParams,
                       g1: Window, g2: Window) -> Dict:
    """Extreme ratios ``||f||_{g1} / ||f||_{g2}`` over a suite of signals."""
    if len(f_suite) == 0:
        raise ValueError("empty suite")
    p1, p2 = replace(params, window=g1), replace(params, window=g2)
    r = []
    for f in f_suite:
        n2 = p2.norm(f)
        if n2 == 0:
            raise ValueError("signal with vanishing norm in the suite")
        r.append(p1.norm(f) / n2)
    return {"ratio_min": float(min(r)), "ratio_max": float(max(r)), "ratios": [float(v) for v in r]}


# ---------------------------------------------------------------------------
# operator extension
# ---------------------------------------------------------------------------

def _check_images(sys: FrameSystem, images: MoleculeFamily) -> None:
    if len(images) != len(sys.family) or not images.grid.same_grid(sys.grid):
        raise ValueError("images must be indexed by the frame family and share its grid")


def operator_extend(sys: FrameSystem, images: MoleculeFamily, f: SignalGrid,
                    coeffs: Optional[SequenceData] = None) -> SignalGrid:
    """``T~ f = sum_i <f, e_i> m_i`` with canonical dual coefficients.

    Gabor systems need their dual window (see ``frames.with_dual``);
    wavelet systems compute dual coefficients by inverting the frame
    operator.  Precomputed ``coeffs`` may be passed.
    """
    _check_images(sys, images)
    if coeffs is None:
        if sys.spec.kind == HEISENBERG and sys.dual_window is None:
            raise ValueError("the frame system has no dual window; compute it first "
                             "with frames.with_dual")
        coeffs = dual_coefficients(sys, f)
    return images.synthesize(coeffs.coeffs)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class Certificate:
    """Outcome of a boundedness check for one operator.

    ``results`` has one entry per coorbit space, sorted by ``(p, q,
    sigma)``; ``bound_holds`` is true when every measured ratio is at most
    ``slack * c_frame * envelope_norm``.  ``verdict`` is ``"certified"``,
    ``"bound-violated"`` or ``"not-molecules"`` (certificate denied).
    """

    envelope_norm: float
    weight: Dict
    results: List[Dict]
    seed: int
    verdict: str
    truncation: float = 0.0
    tolerances: Dict = field(default_factory=dict)
    versions: Dict = field(default_factory=dict)

    @property
    def bound_holds(self) -> bool:
        return self.verdict == "certified"

    def to_dict(self) -> Dict:
        return {"envelope_norm": _clean(self.envelope_norm), "weight": self.weight,
                "results": self.results, "seed": int(self.seed), "verdict": self.verdict,
                "truncation_estimate": _clean(self.truncation), "tolerances": self.tolerances,
                "versions": self.versions}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _clean(v):
    v = float(v)
    if np.isnan(v):
        return "nan"
    return _num(v)


def versions() -> Dict:
    return {"coorbit": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "lp_cutoff": CUTOFF_VERSION}


def _sort_key(pr: CoorbitParams):
    s = pr.besov_exponent if pr.besov_exponent is not None else -np.inf
    return (pr.mixed.p, pr.mixed.q, s)


def boundedness_certificate(sys: FrameSystem, images: MoleculeFamily, g: Window,
                            params_list: Sequence[CoorbitParams],
                            weight: Optional[WeightSpec] = None, seed: int = 0,
                            U: Optional[Neighborhood] = None, envelope: Optional[Envelope] = None,
                            n_signals: int = N_TEST_SIGNALS,
                            slack: float = CERTIFICATE_SLACK) -> Certificate:
    """Check that ``T~`` is bounded on each coorbit space in ``params_list``.

    One envelope is extracted from the images (or taken from
    ``envelope``) and its right amalgam norm under ``weight`` (default
    :func:`canonical_weight`) is shared by all spaces.  If it is not
    finite the certificate is denied.  Otherwise ``n_signals`` seeded test
    signals are expanded in the dual frame and, for each space,

    * ``max_ratio = max ||T~ f|| / ||f||``,
    * ``c_frame = max ||(<f, e_i>)|Y_d|| / ||f||``, the measured constant
      of the frame expansion,

    are recorded.  The bound holds when ``max_ratio <= slack * c_frame *
    ||H||``.  The continuity hypothesis on the test-function space cannot
    be checked numerically and is not part of the certificate.
    """
    _check_images(sys, images)
    params_list = sorted(params_list, key=_sort_key)
    if not params_list:
        raise ValueError("empty parameter list")
    if weight is None:
        weight = canonical_weight(params_list)
    U = U if U is not None else default_neighborhood(sys.spec)
    env = envelope if envelope is not None else envelope_extract(images, g, U, weight)
    tol = {"slack": slack, "n_signals": n_signals}
    if not env.finite:
        return Certificate(float(env.amalgam), weight.to_dict(), [], seed, "not-molecules",
                           env.truncation, tol, versions())
    signals = random_test_signals(sys, n_signals, seed)
    coeffs = [dual_coefficients(sys, f) for f in signals]
    outputs = [operator_extend(sys, images, f, c) for f, c in zip(signals, coeffs)]
    results = []
    for pr in params_list:
        ratios, cf = [], []
        for f, c, Tf in zip(signals, coeffs, outputs):
            nf = pr.norm(f)
            ratios.append(pr.norm(Tf) / nf)
            cf.append(sequence_norm(c, pr.norm_params(), U) / nf)
        r, c_frame = float(max(ratios)), float(max(cf))
        bound = slack * c_frame * env.amalgam
        entry = pr.describe()
        entry.update({"max_ratio": r, "min_ratio": float(min(ratios)), "c_frame": c_frame,
                      "bound": float(bound),
                      "bound_holds": bool(np.isfinite(r) and r <= bound)})
        results.append(entry)
    verdict = "certified" if all(e["bound_holds"] for e in results) else "bound-violated"
    return Certificate(float(env.amalgam), weight.to_dict(), results, seed, verdict,
                       env.truncation, tol, versions())


def fattened_tail_family(sys: FrameSystem, eps: float = 0.25) -> MoleculeFamily:
    """Atoms plus a slowly decaying perturbation.

    On the phase plane each atom ``M_w T_x g`` gets ``eps`` times a unit
    spike at ``x`` modulated by ``w``; its transform does not decay in
    frequency, so the envelope keeps a fixed share of its mass at the edge
    of every grid.  On the affine group the perturbation is ``eps``
    times a translate of ``(1 + |t|)^{-1/2}``, whose transform does not
    decay in scale.
    """
    fam = atom_family(sys)
    grid = sys.grid
    pts = sys.family.points
    vals = fam.values.copy()
    t = grid.t
    for i, (x, y) in enumerate(pts):
        d = np.mod(t - x - grid.offset, grid.period) + grid.offset
        if sys.spec.kind == HEISENBERG:
            k = int(np.argmin(np.abs(d)))
            spike = np.zeros(grid.n, complex)
            spike[k] = np.exp(2j * np.pi * y * t[k]) / np.sqrt(grid.spacing)
            vals[i] += eps * spike
        else:
            vals[i] += eps * (1.0 + np.abs(d)) ** -0.5
    return MoleculeFamily(grid, vals, fam.locations)


# ---------------------------------------------------------------------------
# Weyl operators
# ---------------------------------------------------------------------------

def weyl_images(symbol: GroupGridFn, sys: FrameSystem) -> MoleculeFamily:
    """``m_lambda = sigma^w pi(lambda) g`` for every lattice point."""
    K = weyl_kernel(symbol, sys.grid)
    return MoleculeFamily(sys.grid, sys.atoms @ K.T, sys.family)


def weyl_tf_molecule_check(symbol: Union[GroupGridFn, Callable], g: Window, sys: FrameSystem,
                           weight: Optional[WeightSpec] = None,
                           phase_grid: PhaseGrid = PhaseGrid()) -> Dict:
    """Is ``sigma^w`` a molecule map for the Gabor system ``sys``?

    The images of the atoms are computed and their envelope, which on the
    phase plane depends on ``z - lambda`` only, is extracted.  The map
    qualifies when the envelope has a finite amalgam norm.

    A callable symbol is first tested for content beyond the resolution of
    the symbol grid; an aliased symbol is declined with a warning, as is a
    sampled symbol whose spectrum reaches the edge of its band.
    """
    if sys.spec.kind != HEISENBERG:
        raise ValueError("time-frequency molecules need a Gabor system")
    if callable(symbol) and not isinstance(symbol, GroupGridFn):
        if symbol_aliased(symbol, sys.grid):
            warnings.warn("symbol is not resolved by the grid; check declined",
                          RuntimeWarning, stacklevel=2)
            return {"is_molecule_map": False, "declined": True, "envelope": None}
        symbol = sample_symbol(symbol, sys.grid)
    elif _edge_content(symbol) > 1e-8:
        warnings.warn("sampled symbol has content at the edge of its band; check declined",
                      RuntimeWarning, stacklevel=2)
        return {"is_molecule_map": False, "declined": True, "envelope": None}
    images = weyl_images(symbol, sys)
    env = envelope_extract(images, g, None, weight if weight is not None else Constant(),
                           phase_grid=phase_grid)
    return {"is_molecule_map": env.finite, "declined": False, "envelope": env,
            "images": images}


def _edge_content(symbol: GroupGridFn) -> float:
    F = np.abs(np.fft.fft2(symbol.values)) ** 2
    nx, nw = F.shape
    kx = np.abs(np.fft.fftfreq(nx, 1.0 / nx))
    kw = np.abs(np.fft.fftfreq(nw, 1.0 / nw))
    edge = (kx[:, None] >= 0.45 * nx) | (kw[None, :] >= 0.45 * nw)
    tot = F.sum()
    return float(F[edge].sum() / tot) if tot > 0 else 0.0


def bump_symbol(center=(0.0, 0.0), radius: float = 3.0) -> Callable:
    """Smooth compactly supported symbol ``exp(1 - 1/(1 - r^2))`` on a disc."""
    def fn(x, w):
        r2 = ((np.asarray(x) - center[0]) ** 2 + (np.asarray(w) - center[1]) ** 2) / radius ** 2
        inside = r2 < 1
        out = np.zeros(np.broadcast(x, w).shape)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out
    return fn


# ---------------------------------------------------------------------------
# Hilbert transform
# ---------------------------------------------------------------------------

def hilbert_images(sys: FrameSystem) -> MoleculeFamily:
    """Hilbert transforms of the atoms of ``sys``."""
    fam = atom_family(sys)
    vals = np.stack([hilbert(m).values for m in fam.members])
    return MoleculeFamily(sys.grid, vals, fam.locations)
