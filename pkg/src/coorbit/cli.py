"""
Command-line front end.

Every subcommand reads a flat ``key = value`` configuration (``--config``)
with flag overrides, writes deterministic JSON (and CSV where a signal or
grid function is produced) to ``--out``, and exits with

* 0 when the check passes,
* 2 when the computation finishes but certifies a failure (not a frame,
  not molecules, bound violated, infinite amalgam norm, ...),
* 1 on errors, including malformed configuration.

``--emit-plot`` adds a whitespace-separated ``a b v`` data file for 2-D
fields, with a comment header naming the axes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence, get_type_hints

import numpy as np

#: exit codes
EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class ConfigError(ValueError):
    """Malformed configuration (reported with the offending line or field)."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """All recognised configuration keys with their defaults."""

    group: str = "heisenberg"
    grid_n: int = 0                 # 0: default grid of the group
    grid_extent: float = 0.0
    window: str = "auto"            # gaussian | meyer | auto (by group)
    window_width: float = 1.0
    window_dilation: float = 1.0
    alpha: float = 0.5
    beta: float = 1.0
    j_min: int = -2
    j_max: int = 2
    p: float = 2.0
    q: float = 2.0
    sigma: float = 0.0
    weight: str = "auto"            # auto | const | s=<exp> | sigma=<exp>
    seed: int = 0
    n_signals: int = 30
    signal: str = "random"          # random | path to a t,re,im CSV
    band_lo: float = 0.0
    band_hi: float = 4.0
    family: str = ""                # path to a point-family JSON
    frame_spec: str = ""            # path to a frame-system JSON
    op: str = "identity"            # identity | hilbert | weyl | fattened
    symbol: str = "bump"            # one | bump | plane
    symbol_radius: float = 3.0
    symbol_freq: float = 40.0
    M: int = 4
    N: int = 2
    j: int = 0
    k: int = 0
    env_alpha: float = 1.0
    env_beta: float = 3.0
    env_gamma: float = 2.0
    slack: float = 1.1
    tol: float = 1e-6


_TOLERANCE_KEYS = ("slack", "tol")


def _field_types() -> Dict[str, type]:
    hints = get_type_hints(RunConfig)
    return {f.name: hints[f.name] for f in fields(RunConfig)}


def _convert(key: str, raw: str, where: str):
    types = _field_types()
    if key not in types:
        raise ConfigError(f"{where}: unknown key {key!r}")
    typ = types[key]
    raw = raw.strip()
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: field {key!r} expects {typ.__name__}, got {raw!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, object]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source} line {lineno}: expected 'key = value'")
        key, val = line.split("=", 1)
        out[key.strip()] = _convert(key.strip(), val, f"{source} line {lineno}")
    return out


def build_config(path: Optional[str], overrides: Dict[str, object]) -> RunConfig:
    values = {}
    if path:
        with open(path) as fh:
            values.update(parse_config_text(fh.read(), path))
    values.update(overrides)
    cfg = RunConfig(**values)
    for key in _TOLERANCE_KEYS:
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"field {key!r}: tolerances must be positive")
    if cfg.group not in ("heisenberg", "affine"):
        raise ConfigError(f"field 'group': expected heisenberg or affine, got {cfg.group!r}")
    return cfg


# ---------------------------------------------------------------------------
# building blocks from the configuration
# ---------------------------------------------------------------------------

def _spec(cfg: RunConfig):
    from .group_geometry import affine, heisenberg
    return heisenberg(1) if cfg.group == "heisenberg" else affine(1)


def _grid(cfg: RunConfig):
    from .transforms import affine_grid, heisenberg_grid, signal_grid
    if cfg.grid_n > 0:
        if not cfg.grid_extent > 0:
            raise ConfigError("field 'grid_extent': must be positive when grid_n is set")
        return signal_grid(cfg.grid_n, cfg.grid_extent)
    return heisenberg_grid() if cfg.group == "heisenberg" else affine_grid()


def _window(cfg: RunConfig):
    from .transforms import GaussianWindow, MeyerWindow
    name = cfg.window
    if name == "auto":
        name = "gaussian" if cfg.group == "heisenberg" else "meyer"
    if name == "gaussian":
        g = GaussianWindow(cfg.window_width)
    elif name == "meyer":
        g = MeyerWindow()
    else:
        raise ConfigError(f"field 'window': unknown window {cfg.window!r}")
    return g if cfg.window_dilation == 1.0 else g.dilate(cfg.window_dilation)


def _weight(cfg: RunConfig):
    from .spaces import Constant, PolynomialPhase, PowerScale, symmetrize_weight
    w = cfg.weight.replace(" ", "")
    if w in ("auto", ""):
        return None
    if w in ("const", "constant", "1"):
        return Constant()
    if "=" in w:
        k, v = w.split("=", 1)
        try:
            val = float(v)
        except ValueError:
            raise ConfigError(f"field 'weight': bad exponent in {cfg.weight!r}") from None
        if k == "s":
            return PolynomialPhase(val)
        if k == "sigma":
            return symmetrize_weight(PowerScale(val), _spec(cfg))
    raise ConfigError(f"field 'weight': expected const, s=<exp> or sigma=<exp>, got {cfg.weight!r}")


def _signal(cfg: RunConfig, grid):
    from .transforms import SignalGrid, random_bandlimited
    if cfg.signal == "random":
        return random_bandlimited(grid, np.random.default_rng(cfg.seed), (cfg.band_lo, cfg.band_hi))
    data = np.loadtxt(cfg.signal, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3 or len(data) < 2:
        raise ConfigError(f"field 'signal': {cfg.signal} is not a t,re,im CSV")
    h = float(data[1, 0] - data[0, 0])
    return SignalGrid(h, float(data[0, 0]), data[:, 1] + 1j * data[:, 2])


def _system(cfg: RunConfig, dual: bool = False):
    from .frames import FrameSystem, dyadic_system, gabor_system, with_dual
    if cfg.frame_spec:
        with open(cfg.frame_spec) as fh:
            sys_ = FrameSystem.from_json(fh.read())
    elif cfg.group == "heisenberg":
        sys_ = gabor_system(_grid(cfg), _window(cfg), cfg.alpha, cfg.beta)
    else:
        sys_ = dyadic_system(_grid(cfg), _window(cfg), (cfg.j_min, cfg.j_max))
    if dual and sys_.spec.kind == "heisenberg" and sys_.dual_window is None:
        sys_ = with_dual(sys_)
    return sys_


def _params_list(cfg: RunConfig, g, triples: Sequence):
    from .coorbit_operators import CoorbitParams, besov_params
    from .spaces import Constant, MixedNormParams
    out = []
    for p, q, s in triples:
        if cfg.group == "affine":
            out.append(besov_params(p, q, s, g))
        else:
            w = _weight(cfg) or Constant()
            out.append(CoorbitParams(_spec(cfg), g, MixedNormParams(p, q, w)))
    return out


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


class Output:
    """Writes the artifacts of one run into ``out_dir``."""

    def __init__(self, out_dir: str, name: str, emit_plot: bool):
        self.dir, self.name, self.emit_plot = out_dir, name, emit_plot
        os.makedirs(out_dir, exist_ok=True)
        self.written: List[str] = []

    def path(self, suffix: str) -> str:
        return os.path.join(self.dir, f"{self.name}{suffix}")

    def text(self, suffix: str, text: str) -> None:
        p = self.path(suffix)
        with open(p, "w") as fh:
            fh.write(text)
        self.written.append(p)

    def json(self, data: Dict, suffix: str = ".json") -> None:
        self.text(suffix, json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n")

    def plot(self, F, a_label: str, b_label: str, v_label: str, suffix: str = ".dat") -> None:
        """Gnuplot-ready ``a b v`` rows (one block per value of ``a``)."""
        if not self.emit_plot:
            return
        v = np.abs(np.asarray(F.values))
        lines = [f"# a: {a_label}", f"# b: {b_label}", f"# v: {v_label}"]
        for i, a in enumerate(F.x):
            lines.extend(f"{a:.10g} {b:.10g} {v[i, k]:.10g}" for k, b in enumerate(F.y))
            lines.append("")
        self.text(suffix, "\n".join(lines) + "\n")


def _axes_labels(spec_kind: str):
    if spec_kind == "heisenberg":
        return "x (time)", "omega (frequency, cycles per unit time)"
    return "x (time)", "s (scale, dimensionless)"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_stft(cfg: RunConfig, out: Output) -> int:
    from .spaces import MixedNormParams, boundary_fraction, mixed_norm
    from .transforms import stft
    cfg.group = "heisenberg"
    grid = _grid(cfg)
    f = _signal(cfg, grid)
    V = stft(f, _window(cfg))
    out.text(".csv", V.to_csv())
    prm = MixedNormParams(cfg.p, cfg.q)
    out.json({"norm": mixed_norm(V, prm), "p": cfg.p, "q": cfg.q, "weight": {"kind": "constant"},
              "truncation_estimate": boundary_fraction(V, prm), "shape": list(V.values.shape)})
    out.plot(V, *_axes_labels("heisenberg"), "|V_g f|")
    return EXIT_PASS


def cmd_cwt(cfg: RunConfig, out: Output) -> int:
    from .spaces import MixedNormParams, boundary_fraction, mixed_norm
    from .transforms import cwt
    cfg.group = "affine"
    grid = _grid(cfg)
    f = _signal(cfg, grid)
    W = cwt(f, _window(cfg))
    out.text(".csv", W.to_csv())
    prm = MixedNormParams(cfg.p, cfg.q)
    out.json({"norm": mixed_norm(W, prm), "p": cfg.p, "q": cfg.q, "weight": {"kind": "constant"},
              "truncation_estimate": boundary_fraction(W, prm), "shape": list(W.values.shape)})
    out.plot(W, *_axes_labels("affine"), "|W_g f|")
    return EXIT_PASS


def cmd_frame_bounds(cfg: RunConfig, out: Output) -> int:
    from .frames import frame_bounds
    sys_ = _system(cfg)
    res = frame_bounds(sys_, seed=cfg.seed)
    res.update({"size": len(sys_.family), "group": sys_.spec.kind})
    out.json(res)
    return EXIT_PASS if res["verdict"] == "frame" else EXIT_FAIL


def cmd_dual_window(cfg: RunConfig, out: Output) -> int:
    from .frames import with_dual
    cfg.group = "heisenberg"
    sys_ = _system(cfg)
    try:
        sys_ = with_dual(sys_)
    except RuntimeError as exc:
        out.json({"verdict": "near-singular", "message": str(exc)})
        return EXIT_FAIL
    out.text(".csv", sys_.dual_window.to_csv())
    out.text("_frame.json", sys_.to_json() + "\n")
    out.json({"verdict": "frame", "dual_norm": sys_.dual_window.norm()})
    return EXIT_PASS


def _family_atoms(cfg: RunConfig):
    from .frames import FrameSystem
    from .group_geometry import PointFamily
    from .molecules import atom_family
    if cfg.family:
        with open(cfg.family) as fh:
            fam = PointFamily.from_json(fh.read())
        cfg.group = fam.spec.kind
        sys_ = FrameSystem(_grid(cfg), _window(cfg), fam)
    else:
        sys_ = _system(cfg)
    return sys_, atom_family(sys_)


def _apply_op(cfg: RunConfig, sys_, fam):
    from .coorbit_operators import fattened_tail_family, hilbert_images
    if cfg.op == "identity":
        return fam
    if cfg.op == "hilbert":
        return hilbert_images(sys_)
    if cfg.op == "fattened":
        return fattened_tail_family(sys_)
    raise ConfigError(f"field 'op': {cfg.op!r} is not available here")


def cmd_envelope(cfg: RunConfig, out: Output) -> int:
    from .molecules import envelope_extract
    sys_, fam = _family_atoms(cfg)
    fam = _apply_op(cfg, sys_, fam)
    env = envelope_extract(fam, _window(cfg), None, _weight(cfg))
    env.save(out.path(""))
    out.written.extend([out.path(".npz"), out.path(".json")])
    out.plot(env.H, *_axes_labels(fam.spec.kind), "H (envelope)")
    return EXIT_PASS if env.finite else EXIT_FAIL


def cmd_molecule_check(cfg: RunConfig, out: Output) -> int:
    from .molecules import envelope_extract, verify_molecule
    sys_, fam = _family_atoms(cfg)
    fam = _apply_op(cfg, sys_, fam)
    g = _window(cfg)
    env = envelope_extract(fam, g, None, _weight(cfg))
    res = verify_molecule(fam, g, env, 1.0 + 1e-9)
    env.save(out.path("_envelope"))
    out.written.extend([out.path("_envelope.npz"), out.path("_envelope.json")])
    report = {"envelope": env.sidecar(), "verify": res, "members": len(fam),
              "verdict": "molecules" if (env.finite and res["ok"]) else "not-molecules"}
    out.json(report)
    out.plot(env.H, *_axes_labels(fam.spec.kind), "H (envelope)")
    return EXIT_PASS if report["verdict"] == "molecules" else EXIT_FAIL


def cmd_classical_check(cfg: RunConfig, out: Output) -> int:
    from .molecules import (ClassicalMoleculeParams, classical_molecule_bandlimited,
                            classical_molecule_check, classical_molecule_make, prototype_grid,
                            wavelet_decay_check)
    from .transforms import MeyerWindow, signal_grid
    prm = ClassicalMoleculeParams(cfg.M, cfg.N, cfg.j, cfg.k)
    fine = signal_grid(cfg.grid_n or 16384, cfg.grid_extent or 32.0)
    chk = classical_molecule_check(classical_molecule_make(prm, fine), prm)
    m0 = classical_molecule_bandlimited(ClassicalMoleculeParams(cfg.M, cfg.N, 0, 0),
                                        prototype_grid())
    fit = wavelet_decay_check(m0, MeyerWindow(), (cfg.env_alpha, cfg.env_beta, cfg.env_gamma))
    ok = chk["decay_ok"] and chk["moments_ok"] and fit["ok"]
    out.json({"molecule": {"M": cfg.M, "N": cfg.N, "j": cfg.j, "k": cfg.k},
              "conditions": chk, "decay_fit": fit, "verdict": "pass" if ok else "fail"})
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_amalgam_norm(cfg: RunConfig, out: Output) -> int:
    from .molecules import amalgam_criterion, power_amalgam_scan
    a, b, c = cfg.env_alpha, cfg.env_beta, cfg.env_gamma
    scan = power_amalgam_scan(a, b, c, cfg.sigma)
    crit = amalgam_criterion(a, b, c, cfg.sigma)
    out.json({"exponents": {"alpha": a, "beta": b, "gamma": c}, "sigma": cfg.sigma,
              "nested_norms": scan["norms"], "finite_numerical": scan["finite"],
              "finite_criterion": crit})
    return EXIT_PASS if scan["finite"] else EXIT_FAIL


def cmd_besov_norm(cfg: RunConfig, out: Output) -> int:
    from .coorbit_operators import besov_norm_cwt, besov_norm_lp
    cfg.group = "affine"
    f = _signal(cfg, _grid(cfg))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lp = besov_norm_lp(f, cfg.p, cfg.q, cfg.sigma)
    cw = besov_norm_cwt(f, cfg.p, cfg.q, cfg.sigma, _window(cfg))
    out.json({"p": cfg.p, "q": cfg.q, "sigma": cfg.sigma, "littlewood_paley": lp,
              "wavelet": cw, "ratio": cw / lp if lp > 0 else None,
              "warnings": [str(w.message) for w in caught]})
    return EXIT_PASS


def cmd_modulation_norm(cfg: RunConfig, out: Output) -> int:
    from .coorbit_operators import modulation_norm
    cfg.group = "heisenberg"
    g = _window(cfg)
    f = _signal(cfg, _grid(cfg))
    prm = _params_list(cfg, g, [(cfg.p, cfg.q, None)])[0]
    out.json({"p": cfg.p, "q": cfg.q, "weight": prm.mixed.weight.to_dict(),
              "norm": modulation_norm(f, prm)})
    return EXIT_PASS


def _symbol_fn(cfg: RunConfig):
    from .coorbit_operators import bump_symbol
    if cfg.symbol == "one":
        return lambda x, w: np.ones(np.broadcast(x, w).shape)
    if cfg.symbol == "bump":
        return bump_symbol(radius=cfg.symbol_radius)
    if cfg.symbol == "plane":
        return lambda x, w: np.exp(2j * np.pi * cfg.symbol_freq * np.asarray(x)) + 0 * np.asarray(w)
    raise ConfigError(f"field 'symbol': unknown symbol {cfg.symbol!r}")


def cmd_weyl_apply(cfg: RunConfig, out: Output) -> int:
    from .coorbit_operators import weyl_tf_molecule_check
    from .transforms import sample_symbol, weyl_apply
    cfg.group = "heisenberg"
    grid = _grid(cfg)
    f = _signal(cfg, grid)
    fn = _symbol_fn(cfg)
    sys_ = _system(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        chk = weyl_tf_molecule_check(fn, _window(cfg), sys_)
    report = {"symbol": cfg.symbol, "declined": chk["declined"],
              "is_molecule_map": chk["is_molecule_map"],
              "warnings": [str(w.message) for w in caught]}
    if not chk["declined"]:
        sig = sample_symbol(fn, grid)
        out.text(".csv", weyl_apply(sig, f).to_csv())
        report["envelope"] = chk["envelope"].sidecar()
        out.plot(sig, "x (time)", "omega (frequency)", "|sigma| (symbol)", "_symbol.dat")
    out.json(report)
    return EXIT_PASS if chk["is_molecule_map"] else EXIT_FAIL


_DEFAULT_TRIPLES = {"heisenberg": [(1.0, 1.0, None), (2.0, 2.0, None), (np.inf, 1.0, None)],
                    "affine": [(2.0, 2.0, 0.0), (1.0, 1.0, 1.0), (2.0, 1.0, 0.5)]}


def _certify(cfg: RunConfig, out: Output, triples) -> int:
    from .coorbit_operators import (boundedness_certificate, weyl_tf_molecule_check)
    from .molecules import atom_family
    g = _window(cfg)
    sys_ = _system(cfg, dual=True)
    envelope = None
    if cfg.op == "weyl":
        if sys_.spec.kind != "heisenberg":
            raise ConfigError("field 'op': weyl needs group = heisenberg")
        chk = weyl_tf_molecule_check(_symbol_fn(cfg), g, sys_)
        if chk["declined"]:
            out.json({"verdict": "declined", "reason": "symbol not resolved by the grid"})
            return EXIT_FAIL
        images, envelope = chk["images"], chk["envelope"]
    else:
        images = _apply_op(cfg, sys_, atom_family(sys_))
    params = _params_list(cfg, g, triples)
    cert = boundedness_certificate(sys_, images, g, params, weight=_weight(cfg), seed=cfg.seed,
                                   envelope=envelope, n_signals=cfg.n_signals, slack=cfg.slack)
    data = cert.to_dict()
    data["operator"] = cfg.op
    out.json(data)
    return EXIT_PASS if cert.bound_holds else EXIT_FAIL


def cmd_certify(cfg: RunConfig, out: Output) -> int:
    return _certify(cfg, out, _DEFAULT_TRIPLES[cfg.group])


def cmd_hilbert_demo(cfg: RunConfig, out: Output) -> int:
    from .coorbit_operators import besov_norm_lp
    from .frames import random_test_signals
    from .transforms import hilbert
    cfg.group, cfg.op = "affine", "hilbert"
    code = _certify(cfg, out, [(cfg.p, cfg.q, cfg.sigma)])
    sys_ = _system(cfg)
    f = random_test_signals(sys_, 1, cfg.seed)[0]
    iso = besov_norm_lp(hilbert(f), 2, 2, 0) / besov_norm_lp(f, 2, 2, 0)
    out.json({"besov_022_ratio": iso}, "_isometry.json")
    return code


# name, handler, anchor (concept the subcommand implements), flags exposed
COMMANDS = {
    "stft": (cmd_stft, "short-time Fourier transform (voice transform of the "
             "Schroedinger representation of the reduced Heisenberg group)",
             ["window", "window_width", "signal", "p", "q", "seed"]),
    "cwt": (cmd_cwt, "continuous wavelet transform (voice transform of the affine group)",
            ["window", "signal", "p", "q", "seed"]),
    "frame-bounds": (cmd_frame_bounds, "frames of atoms over well-spread families and "
                     "their frame bounds", ["group", "window", "alpha", "beta", "j_min",
                                            "j_max", "frame_spec", "seed"]),
    "dual-window": (cmd_dual_window, "canonical dual frame of a Gabor system",
                    ["window", "alpha", "beta", "frame_spec"]),
    "envelope": (cmd_envelope, "envelope of a set of molecules in the right Wiener amalgam space",
                 ["group", "window", "family", "op", "weight", "alpha", "beta"]),
    "molecule-check": (cmd_molecule_check, "definition of a set of molecules; every set of "
                       "atoms is a set of molecules", ["group", "window", "family", "op",
                                                        "weight", "alpha", "beta"]),
    "classical-check": (cmd_classical_check, "classical (M, N)-molecules and wavelet decay "
                        "estimates", ["M", "N", "j", "k", "env_alpha", "env_beta", "env_gamma"]),
    "amalgam-norm": (cmd_amalgam_norm, "right amalgam norm of a power-law envelope",
                     ["env_alpha", "env_beta", "env_gamma", "sigma"]),
    "besov-norm": (cmd_besov_norm, "homogeneous Besov spaces as coorbit spaces of the "
                   "affine group", ["window", "signal", "p", "q", "sigma", "seed"]),
    "modulation-norm": (cmd_modulation_norm, "modulation spaces as coorbit spaces of the "
                        "Heisenberg group", ["window", "window_width", "signal", "p", "q",
                                             "weight", "seed"]),
    "weyl-apply": (cmd_weyl_apply, "Weyl transform and time-frequency molecules",
                   ["symbol", "symbol_radius", "symbol_freq", "signal", "seed"]),
    "certify": (cmd_certify, "extension of an operator mapping atoms to molecules to a "
                "bounded operator on coorbit spaces", ["group", "op", "symbol", "weight",
                                                       "seed", "n_signals", "slack"]),
    "hilbert-demo": (cmd_hilbert_demo, "boundedness of the Hilbert transform on homogeneous "
                     "Besov spaces", ["p", "q", "sigma", "seed", "n_signals", "slack"]),
}


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors: exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: config error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="coorbit", description="Coorbit-space toolkit: transforms, frames, molecules, "
                                    "coorbit norms and boundedness certificates.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND",
                                parser_class=_Parser)
    for name, (_, anchor, keys) in COMMANDS.items():
        sp = sub.add_parser(name, help=anchor, description=f"Anchor: {anchor}.")
        sp.add_argument("--config", help="flat key = value configuration file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any configuration key")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--emit-plot", action="store_true",
                        help="also write 'a b v' plot data for 2-D fields")
        sp.add_argument("--threads", type=int, default=None,
                        help="cap on worker threads (default: available cores)")
        for key in keys:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, type=_field_types()[key],
                            default=None, help=f"configuration key {key}")
    return parser


def _overrides(args, keys) -> Dict[str, object]:
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected KEY=VALUE")
        k, v = item.split("=", 1)
        out[k.strip()] = _convert(k.strip(), v, f"--set {k.strip()}")
    for key in keys:
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler, _, keys = COMMANDS[args.command]
    try:
        cfg = build_config(args.config, _overrides(args, keys))
        threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
        if threads < 1:
            raise ConfigError("--threads must be positive")
        from scipy import fft as sfft
        from threadpoolctl import threadpool_limits
        out = Output(args.out, args.command.replace("-", "_"), args.emit_plot)
        with threadpool_limits(limits=threads), sfft.set_workers(threads):
            code = handler(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    verdict = {EXIT_PASS: "pass", EXIT_FAIL: "certified failure"}.get(code, "error")
    print(f"{args.command}: {verdict}; wrote {', '.join(out.written)}")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
