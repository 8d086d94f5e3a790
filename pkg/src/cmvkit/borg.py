"""Reflectionless checks and the arc <-> geometric sequence correspondence.

A sequence whose spectrum is a single arc [theta0, theta1] and which is
reflectionless is geometric: alpha_k = alpha0 g^k with
g = -exp(i (theta0 + theta1)/2) and |alpha0| = cos((theta1 - theta0)/4).
The phase of alpha0 is free; it defaults to 0 and is always recorded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import radial_schedule, richardson, trapezoid_grid
from .core import (TWO_PI, Arc, DomainError, Geometric, GaugeTransform,
                   VerblunskySequence, canonical_angle, full_circle, rho)
from .floquet import period2_lambdas
from .herglotz import XiProfile
from .weyl import schur_pair

EDGE_MARGIN = 1e-3
CRITERIA = ("v", "iii", "vii", "viii", "ix")


@dataclass
class BorgResult:
    arc: Arc
    g: complex
    alpha0_mod: float
    phase: float = 0.0

    @property
    def theta_star(self) -> float:
        return float(canonical_angle(self.arc.midpoint + math.pi))

    @property
    def sequence(self) -> Geometric:
        return Geometric(self.alpha0_mod * np.exp(1j * self.phase), self.g)

    def to_json(self) -> dict:
        return {"theta0": self.arc.theta0, "theta1": self.arc.theta1,
                "g": [self.g.real, self.g.imag], "alpha0_mod": self.alpha0_mod,
                "phase": self.phase, "phase_convention": "arg(alpha_0)",
                "theta_star": self.theta_star, "full_circle": self.arc.is_full}


def borg_result(arc: Arc, phase: float = 0.0) -> BorgResult:
    if not 0 < arc.width <= TWO_PI:
        raise DomainError("arc width must lie in (0, 2 pi]")
    g = -np.exp(1j * arc.midpoint)
    mod = 0.0 if arc.is_full else math.cos(arc.width / 4.0)
    return BorgResult(arc, complex(g), mod, float(phase))


def borg_forward(arc: Arc, phase: float = 0.0) -> Geometric:
    """The geometric sequence with spectrum ``arc`` (zero sequence for the full circle)."""
    return borg_result(arc, phase).sequence


def borg_inverse(seq: Geometric) -> Arc:
    """Spectrum of a geometric sequence.

    Gauging by (conj(alpha0)/|alpha0|, conj(g)) gives the constant sequence
    |alpha0|, whose band is {cos theta <= lambda_+ = 1 - 2|alpha0|^2}; the
    spectrum of seq is that band rotated by arg g.
    """
    if not isinstance(seq, Geometric):
        raise DomainError("borg_inverse needs a Geometric sequence")
    a = abs(seq.alpha0)
    if a == 0.0:
        return full_circle()
    lam_plus, _ = period2_lambdas(a, a)
    # arccos(lam_plus) written as 2 atan2(a, rho) to stay accurate near a = 1
    half_gap = 2.0 * math.atan2(a, float(rho(a)))
    assert abs(math.cos(half_gap) - lam_plus) < 1e-12
    rot = float(np.angle(seq.g))
    t0 = canonical_angle(half_gap + rot)
    return Arc(t0, t0 + TWO_PI - 2.0 * half_gap)


def xi_step_profile(arc: Arc, N: int = 4096):
    """Three-level step profile of Xi and the jump angle theta_*.

    Values are 0 on the arc, +pi/2 on (theta1, theta_*) and -pi/2 on
    (theta_*, theta0 + 2 pi). Each grid value is the average over its cell
    [theta_n - h/2, theta_n + h/2], so the trapezoid sum of the grid equals
    the exact integral and the mean is zero to rounding.
    """
    if arc.is_full:
        raise DomainError("step profile needs an arc narrower than the full circle")
    t0, t1 = arc.theta0, arc.theta1
    ts = arc.midpoint + math.pi
    half = math.pi / 2

    def G(t):
        # primitive of the profile on [t0, t0 + 2 pi], zero at both ends
        u = t0 + np.mod(t - t0, TWO_PI)
        return np.where(u <= t1, 0.0,
                        np.where(u <= ts, half * (u - t1),
                                 half * (ts - t1) - half * (u - ts)))

    theta = trapezoid_grid(N)
    h = TWO_PI / N
    vals = (G(theta + h / 2) - G(theta - h / 2)) / h
    # cells that wrap past t0 + 2 pi pick up the periodic primitive (total 0)
    return XiProfile(theta, vals), float(canonical_angle(ts))


def step_profile_moment_exact(arc: Arc, j: int) -> complex:
    """Closed-form integral of the step profile times conj(zeta)^j d mu_0."""
    t0, t1 = arc.theta0, arc.theta1
    ts = arc.midpoint + math.pi
    e = lambda t: np.exp(-1j * j * t) / (-1j * j)
    val = (math.pi / 2) * (e(ts) - e(t1)) - (math.pi / 2) * (e(t0 + TWO_PI) - e(ts))
    return complex(val / TWO_PI)


# ---------------------------------------------------------------- reflectionless

@dataclass
class ReflectionlessReport:
    sites: list
    arcs: list
    theta: np.ndarray
    edge_margin: float
    tol: float
    residuals: dict                     # criterion -> (n_sites, n_theta)
    propagation: dict = field(default_factory=dict)

    def median(self, name: str) -> float:
        return float(np.median(self.residuals[name]))

    def site_medians(self, name: str) -> np.ndarray:
        return np.median(self.residuals[name], axis=1)

    def verdict_for(self, name: str, tol: float | None = None) -> bool:
        tol = self.tol if tol is None else tol
        return bool(np.all(self.site_medians(name) < tol))

    @property
    def verdicts(self) -> dict:
        return {c: self.verdict_for(c) for c in CRITERIA}

    @property
    def verdict(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self, grids: bool = True) -> dict:
        out = {
            "sites": list(map(int, self.sites)),
            "arcs": [a.to_json() for a in self.arcs],
            "edge_margin": self.edge_margin,
            "tol": self.tol,
            "medians": {c: self.median(c) for c in CRITERIA},
            "maxima": {c: float(np.max(self.residuals[c])) for c in CRITERIA},
            "verdicts": self.verdicts,
            "verdict": self.verdict,
            "propagation": self.propagation,
        }
        if grids:
            out["theta"] = self.theta.tolist()
            out["residuals"] = {c: self.residuals[c].tolist() for c in CRITERIA}
        return out

    def dumps(self, grids: bool = True) -> str:
        return json.dumps(self.to_json(grids))


def boundary_schur(seq, k, theta, r_schedule=None, method="auto"):
    """Radial limits of Phi_+(., k) and psi = 1/Phi_-(., k) at e^{i theta}."""
    radii = radial_schedule() if r_schedule is None else np.asarray(r_schedule)
    zeta = np.exp(1j * np.asarray(theta))
    z = radii[:, None] * zeta[None, :]
    p, s = schur_pair(seq, k, z, method)
    bp, _ = richardson(1.0 - radii, p)
    bs, _ = richardson(1.0 - radii, s)
    return bp, bs


def _criteria(phi_p, psi):
    with np.errstate(divide="ignore", invalid="ignore"):
        # Phi_+ conj(Phi_-) - 1 = (Phi_+ - conj psi) / conj psi; 0/0 (free case) counts as 0
        num = np.abs(phi_p - np.conj(psi))
        res_v = np.where(num <= 1e-15, 0.0, num / np.abs(psi))
        Mp = (1.0 + phi_p) / (1.0 - phi_p)
        Mm = (psi + 1.0) / (psi - 1.0)
        res_iii = np.abs(Mp + np.conj(Mm))
        phi11 = phi_p * psi
        M11 = (1.0 + phi11) / (1.0 - phi11)
        res_vii = np.abs(np.angle(M11))
        res_viii = np.abs(M11.imag)
        res_ix = np.abs(phi11.imag) + np.maximum(np.abs(phi11.real) - 1.0, 0.0)
    out = {"v": res_v, "iii": res_iii, "vii": res_vii, "viii": res_viii, "ix": res_ix}
    return {k: np.where(np.isfinite(v), v, np.inf) for k, v in out.items()}


def _propagate_boundary(seq, k_from, k_to, zeta, phi_p, psi):
    """Carry boundary values of Phi_+ and psi from k_from to k_to with the Riccati steps."""
    p, s = phi_p.copy(), psi.copy()
    if k_to >= k_from:
        for k in range(k_from + 1, k_to + 1):
            a = seq.alpha(k)
            p = (p + zeta * np.conj(a)) / (a * p + zeta)
            s = (a + zeta * s) / (1.0 + zeta * np.conj(a) * s)
    else:
        for k in range(k_from, k_to, -1):
            a = seq.alpha(k)
            p = zeta * (p - np.conj(a)) / (1.0 - a * p)
            s = (s - a) / (zeta * (1.0 - np.conj(a) * s))
    return p, s


def check_reflectionless(seq: VerblunskySequence, spectrum, sites=(0,), tol: float = 1e-4,
                         n_theta: int = 256, edge_margin: float = EDGE_MARGIN,
                         r_schedule=None, method: str = "auto") -> ReflectionlessReport:
    """Evaluate the Theorem 4.3 criteria on interior grids of the spectral arcs.

    Residuals per site and angle: (v) |Phi_+ conj(Phi_-) - 1|,
    (iii) |M_+ + conj(M_-)|, (vii) |Xi|, (viii) |Im M_{1,1}| and
    (ix) |Im Phi_{1,1}| plus the excess of |Re Phi_{1,1}| over 1. Verdicts
    compare per-site medians with ``tol``.

    The propagation entry realizes (vi) => (v): boundary values at the first
    site are carried to the others by the Riccati recursion and criterion (v)
    is re-evaluated there.
    """
    arcs = list(spectrum)
    if not arcs:
        raise DomainError("spectrum must contain at least one arc")
    per = max(8, n_theta // len(arcs))
    theta = np.concatenate([a.interior_grid(per, edge_margin) for a in arcs])
    theta = np.mod(theta, TWO_PI)
    zeta = np.exp(1j * theta)
    sites = list(sites)
    res = {c: np.empty((len(sites), len(theta))) for c in CRITERIA}
    bvals = []
    for i, k in enumerate(sites):
        bp, bs = boundary_schur(seq, k, theta, r_schedule, method)
        bvals.append((bp, bs))
        for c, v in _criteria(bp, bs).items():
            res[c][i] = v
    report = ReflectionlessReport(sites, arcs, theta, edge_margin, tol, res)
    if len(sites) > 1:
        p0, s0 = bvals[0]
        prop = []
        for k in sites[1:]:
            p, s = _propagate_boundary(seq, sites[0], k, zeta, p0, s0)
            prop.append(float(np.median(_criteria(p, s)["v"])))
        site0 = report.site_medians("v")[0] < tol
        report.propagation = {
            "from_site": int(sites[0]),
            "medians_v": prop,
            "verdict": bool(site0 and all(m < tol for m in prop)),
            "agrees_with_all_sites": bool((site0 and all(m < tol for m in prop))
                                          == report.verdict_for("v")),
        }
    return report


def empirical_xi(seq: VerblunskySequence, k: int = 0, N: int = 4096, r_schedule=None,
                 method: str = "auto") -> XiProfile:
    """Boundary Xi = arg M_{1,1}(zeta, k) from radial limits of Phi_+ and psi."""
    theta = trapezoid_grid(N)
    bp, bs = boundary_schur(seq, k, theta, r_schedule, method)
    phi11 = bp * bs
    with np.errstate(divide="ignore", invalid="ignore"):
        M11 = (1.0 + phi11) / (1.0 - phi11)
    xi = np.clip(np.angle(M11), -math.pi / 2, math.pi / 2)
    xi = np.where(np.isfinite(xi), xi, 0.0)
    return XiProfile(theta, xi, k)


def edge_mask(theta, arc: Arc, theta_star: float, margin: float = 1e-2):
    """Points farther than ``margin`` from the jumps theta0, theta1 and theta_*."""
    pts = np.array([arc.theta0, arc.theta1, theta_star])
    d = np.abs(np.angle(np.exp(1j * (theta[:, None] - pts[None, :]))))
    return np.all(d > margin, axis=1)


def gauge_for(seq: Geometric) -> GaugeTransform:
    """(gamma0, gamma1) = (conj(alpha0)/|alpha0|, conj(g)) reducing seq to |alpha0|."""
    a0 = seq.alpha0
    g0 = np.conj(a0) / abs(a0) if a0 != 0 else 1.0
    return GaugeTransform(g0, np.conj(seq.g))
