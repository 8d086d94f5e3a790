"""Command-line interface.

Subcommands read a JSON config (``--config``) holding a generator in the
core schema plus command parameters, and write data files for external
plotting tools. Exit codes: 0 success, 2 config or validation error,
3 numerical failure.
"""

from __future__ import annotations

import os

# CMV_THREADS caps BLAS threads; must be set before numpy loads its BLAS
_threads = os.environ.get("CMV_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._numerics import is_power_of_two, radial_schedule
from .core import (TWO_PI, Arc, CMVError, DomainError, Geometric, Gauged, NumericalError,
                   Periodic, VerblunskySequence, canonical_angle, sequence_from_json)

EPILOG = """\
config keys (JSON object):
  generator   {"type": "explicit"|"periodic"|"geometric", ...}; complex numbers as [re, im]
  arc         {"theta0": t0, "theta1": t1} (borg, verify)
  arcs        list of arcs (verify; computed for periodic/geometric generators if absent)
  phase       arg(alpha_0) for borg (default 0)
  site        lattice site k (trace, measure; default 0)
  sites       list of sites (verify; default [0, 1])
  J           number of trace coefficients (trace; capped at 12)
  r_depth     last m of the radial schedule r_m = 1 - 2^-m (default 14)
  function    measure: "M11" (default), "M_plus" or "M_minus"

output files written to --out DIR:
  spectrum  bands.json {"arcs": [{"theta0", "theta1"}]}; eigenvalues.csv columns: theta
  trace     trace.csv columns: j, re_L, im_L, residual
  borg      borg.json (BorgResult or arc)
  verify    report.json (ReflectionlessReport)
  measure   measure.csv columns: theta, re_f, im_f, density, xi
angles are radians in [0, 2 pi).
"""


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    generator: VerblunskySequence | None = None
    section: int = 256
    grid: int = 4096
    r_depth: int = 14
    tol: float = 1e-4
    out: Path | None = None
    site: int = 0
    sites: list = field(default_factory=lambda: [0, 1])
    J: int = 4
    arc: Arc | None = None
    arcs: list | None = None
    phase: float = 0.0
    function: str = "M11"
    as_json: bool = False

    @property
    def r_schedule(self):
        return radial_schedule(4, self.r_depth)

    def validate(self):
        for name in ("section", "grid", "r_depth", "J"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if not is_power_of_two(self.grid):
            raise ConfigError("grid N must be a power of two")
        if self.r_depth < 6:
            raise ConfigError("r_depth must be at least 6")
        if self.function not in ("M11", "M_plus", "M_minus"):
            raise ConfigError(f"unknown function {self.function!r}")


def _arc_from(obj) -> Arc:
    try:
        return Arc(float(obj["theta0"]), float(obj["theta1"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid arc {obj!r}: {exc}") from None


def load_config(args) -> RunConfig:
    raw: dict = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    cfg = RunConfig()
    if "generator" in raw:
        cfg.generator = sequence_from_json(raw["generator"])
    if "arc" in raw:
        cfg.arc = _arc_from(raw["arc"])
    if "arcs" in raw:
        cfg.arcs = [_arc_from(a) for a in raw["arcs"]]
    try:
        for key, typ in (("site", int), ("J", int), ("r_depth", int), ("phase", float),
                         ("section", int), ("grid", int), ("tol", float), ("function", str)):
            if key in raw:
                setattr(cfg, key, typ(raw[key]))
        if "sites" in raw:
            cfg.sites = [int(s) for s in raw["sites"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameter: {exc}") from None
    if args.grid is not None:
        cfg.grid = args.grid
    if args.section is not None:
        cfg.section = args.section
    if args.tol is not None:
        cfg.tol = args.tol
    cfg.out = Path(args.out) if args.out else None
    cfg.as_json = args.json
    cfg.validate()
    return cfg


def _need_generator(cfg):
    if cfg.generator is None:
        raise ConfigError("config needs a 'generator'")
    return cfg.generator


def _write(cfg, name, text):
    if cfg.out is None:
        return None
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    path.write_text(text)
    return path


def spectral_arcs(seq):
    """Band arcs for generators with a known spectrum, else None."""
    from .borg import borg_inverse
    from .floquet import band_arcs
    if isinstance(seq, Periodic):
        return band_arcs(seq)
    if isinstance(seq, Geometric):
        return [borg_inverse(seq)]
    if isinstance(seq, Gauged) and isinstance(seq.base, Periodic):
        # sigma(U_seq) = gamma1 sigma(U_base) for seq = gauge(base)
        rot = float(np.angle(seq.gamma1))
        out = []
        for a in band_arcs(seq.base):
            t0 = canonical_angle(a.theta0 + rot)
            out.append(Arc(t0, t0 + a.width))
        return out
    return None


def cmd_spectrum(cfg: RunConfig) -> dict:
    from .cmv import build_full_section, eigenvalues
    seq = _need_generator(cfg)
    arcs = spectral_arcs(seq)
    lo = -(cfg.section // 2)
    if seq.index_range[0] > lo:
        lo = int(seq.index_range[0])
    hi = lo + cfg.section - 1
    ev = eigenvalues(build_full_section(seq, lo, hi))
    ang = np.sort(np.mod(np.angle(ev), TWO_PI))
    result = {"arcs": None if arcs is None else [a.to_json() for a in arcs],
              "section": [lo, hi], "n_eigenvalues": int(len(ang))}
    _write(cfg, "bands.json", json.dumps({"arcs": result["arcs"]}))
    _write(cfg, "eigenvalues.csv", "theta\n" + "\n".join(f"{t:.15g}" for t in ang) + "\n")
    if not cfg.as_json:
        if arcs is None:
            print("no closed-form band spectrum for this generator")
        for a in arcs or []:
            print(f"arc [{a.theta0:.10f}, {a.theta1:.10f}]" + (" full circle" if a.is_full else ""))
        print(f"{len(ang)} section eigenvalues on [{lo}, {hi}]")
    return result


def cmd_trace(cfg: RunConfig) -> dict:
    from .trace import J_CAP, L_coeffs, xi_quadrature_check
    seq = _need_generator(cfg)
    J = cfg.J
    if J > J_CAP:
        warnings.warn(f"J = {J} capped at {J_CAP}")
        J = J_CAP
    L = L_coeffs(seq, cfg.site, J)
    res = xi_quadrature_check(seq, cfg.site, J, N=cfg.grid)
    rows = ["j,re_L,im_L,residual"]
    rows += [f"{j},{l.real:.15g},{l.imag:.15g},{r:.6e}" for j, (l, r) in enumerate(zip(L, res), 1)]
    _write(cfg, "trace.csv", "\n".join(rows) + "\n")
    if not cfg.as_json:
        print("\n".join(rows))
    return {"site": cfg.site, "L": [[l.real, l.imag] for l in L], "residual": res.tolist()}


def cmd_borg(cfg: RunConfig) -> dict:
    from .borg import borg_inverse, borg_result
    if cfg.arc is not None:
        result = borg_result(cfg.arc, cfg.phase).to_json()
    else:
        seq = _need_generator(cfg)
        if not isinstance(seq, Geometric):
            raise ConfigError("borg needs an 'arc' or a geometric generator")
        result = borg_inverse(seq).to_json()
    _write(cfg, "borg.json", json.dumps(result))
    if not cfg.as_json:
        for k, v in result.items():
            print(f"{k:>16}: {v}")
    return result


def cmd_verify(cfg: RunConfig) -> dict:
    from .borg import CRITERIA, check_reflectionless
    from .trace import xi_quadrature_check
    from .weyl import M_functions
    seq = _need_generator(cfg)
    arcs = cfg.arcs or ([cfg.arc] if cfg.arc else None) or spectral_arcs(seq)
    if arcs is None:
        raise ConfigError("verify needs 'arcs' for this generator")
    rep = check_reflectionless(seq, arcs, cfg.sites, cfg.tol, r_schedule=cfg.r_schedule)
    m11 = M_functions(seq, cfg.sites[0], np.array([0.0])).M11[0]
    extra = {"M11_at_0_error": float(abs(m11 - 1.0))}
    if isinstance(seq, (Periodic, Geometric, Gauged)):
        extra["trace_residual_j1_3"] = xi_quadrature_check(seq, cfg.sites[0], 3, cfg.grid).tolist()
    out = rep.to_json()
    out["identities"] = extra
    _write(cfg, "report.json", json.dumps(out))
    if not cfg.as_json:
        print(f"{'criterion':>10} {'median':>12} {'max':>12} verdict")
        for c in CRITERIA:
            print(f"{c:>10} {out['medians'][c]:12.3e} {out['maxima'][c]:12.3e} {out['verdicts'][c]}")
        if rep.propagation:
            print(f"{'propagate':>10} {max(rep.propagation['medians_v']):12.3e} "
                  f"{'':12} {rep.propagation['verdict']}")
        print(f"reflectionless: {rep.verdict}")
        for k, v in extra.items():
            print(f"{k}: {v}")
    return out


def cmd_measure(cfg: RunConfig) -> dict:
    from .herglotz import CaratheodoryFunction, boundary_table
    from .weyl import M_functions
    seq = _need_generator(cfg)
    k = cfg.site
    attr = cfg.function
    orient = "anti" if attr == "M_minus" else "caratheodory"
    f = CaratheodoryFunction.reflected(lambda z: getattr(M_functions(seq, k, z), attr), orient)
    r = 1.0 - 2.0 ** (-cfg.r_depth)
    rows = boundary_table(f, cfg.grid, r)
    text = "theta,re_f,im_f,density,xi\n" + "\n".join(
        ",".join(f"{x:.12g}" for x in row) for row in rows) + "\n"
    _write(cfg, "measure.csv", text)
    if not cfg.as_json and cfg.out is None:
        sys.stdout.write(text)
    return {"function": attr, "site": k, "radius": r, "rows": int(len(rows))}


COMMANDS = {"spectrum": cmd_spectrum, "trace": cmd_trace, "borg": cmd_borg,
            "verify": cmd_verify, "measure": cmd_measure}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmvkit", description="CMV operator spectral toolkit",
                                epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--json", action="store_true", help="print machine-readable JSON to stdout")
    p.add_argument("--grid", type=int, help="grid size N on the circle (power of two)")
    p.add_argument("--section", type=int, help="finite section size n")
    p.add_argument("--tol", type=float, help="verdict tolerance")
    p.add_argument("--out", help="directory for output files")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = load_config(args)
        result = COMMANDS[args.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, CMVError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if cfg.as_json:
        print(json.dumps(result))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
