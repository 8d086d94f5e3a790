"""Caratheodory and Schur function calculus on the unit disk.

Boundary values are computed along radii r_m = 1 - 2^-m with Richardson
extrapolation in h = 1 - r. Caratheodory functions satisfy
f(1/conj z) = -conj f(z), so evaluators only need to cover |z| < 1 when
constructed through the reflection helper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ._numerics import radial_schedule, richardson, trapezoid_grid
from .cmv import SpectralMeasure
from .core import TWO_PI, Arc, DomainError, NumericalError

ATOM_THRESHOLD = 1e-4
UNRESOLVED_THRESHOLD = 1e-7


class SingularSupportError(NumericalError):
    """Radial values grow like 1/(1-r): the point carries singular mass."""

    def __init__(self, msg, angles=()):
        super().__init__(msg)
        self.angles = tuple(angles)


class CaratheodoryFunction:
    """Evaluator z -> f(z) off the unit circle with Re f >= 0 on the disk.

    ``orientation`` is "caratheodory" or "anti" (Re f <= 0 on the disk).
    """

    def __init__(self, evaluator, orientation: str = "caratheodory", name: str = ""):
        if orientation not in ("caratheodory", "anti"):
            raise DomainError(f"unknown orientation {orientation!r}")
        self._f = evaluator
        self.orientation = orientation
        self.name = name

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.asarray(self._f(z), dtype=complex)

    @property
    def sign(self) -> int:
        return 1 if self.orientation == "caratheodory" else -1

    @property
    def at_zero(self) -> complex:
        return complex(self(np.array([0.0]))[0])

    @property
    def c(self) -> float:
        return self.at_zero.imag

    @property
    def mass(self) -> float:
        return self.sign * self.at_zero.real

    @classmethod
    def constant(cls, value: complex, name: str = "const"):
        value = complex(value)
        orient = "caratheodory" if value.real >= 0 else "anti"
        return cls(lambda z: np.full(np.shape(z), value, dtype=complex), orient, name)

    @classmethod
    def from_measure(cls, measure: SpectralMeasure, c: float = 0.0, name: str = ""):
        return cls(lambda z: herglotz_eval(measure, c, z), "caratheodory", name)

    @classmethod
    def reflected(cls, inside, orientation="caratheodory", name=""):
        """Extend an evaluator valid on |z| < 1 by f(z) = -conj f(1/conj z)."""
        def ev(z):
            z = np.asarray(z, dtype=complex)
            out = np.abs(z) > 1
            if not np.any(out):
                return inside(z)
            w = np.where(out, 1.0 / np.conj(np.where(out, z, 1.0)), z)
            v = inside(w)
            return np.where(out, -np.conj(v), v)
        return cls(ev, orientation, name)


class SchurFunction:
    """Evaluator for phi with |phi| <= 1 on the disk.

    For orientation "anti-schur" the stored evaluator returns 1/phi, the
    bounded object.
    """

    def __init__(self, evaluator, orientation: str = "schur", name: str = ""):
        if orientation not in ("schur", "anti-schur"):
            raise DomainError(f"unknown orientation {orientation!r}")
        self._f = evaluator
        self.orientation = orientation
        self.name = name

    def __call__(self, z):
        """The bounded object: phi (schur) or 1/phi (anti-schur)."""
        return np.asarray(self._f(np.asarray(z, dtype=complex)), dtype=complex)

    def value(self, z):
        """phi itself; infinite where the stored reciprocal vanishes."""
        v = self(z)
        if self.orientation == "schur":
            return v
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v == 0, complex(np.inf), 1.0 / np.where(v == 0, 1.0, v))


def _kernel(zeta, z):
    return (zeta + z) / (zeta - z)


def herglotz_eval(measure: SpectralMeasure, c: float, z):
    """ic + integral of (zeta + z)/(zeta - z) d mu(zeta).

    Atoms are summed; a sampled density is integrated by the trapezoid rule
    on its uniform grid.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(np.abs(z) - 1.0) < 1e-12):
        raise DomainError("Herglotz integral is evaluated off the unit circle")
    zf = z.reshape(-1, 1)
    val = np.zeros(zf.shape[0], dtype=complex)
    if len(measure.atoms):
        w = measure.weights
        if w.ndim != 1:
            raise DomainError("herglotz_eval handles scalar measures")
        val += np.sum(w * _kernel(measure.atoms[None, :], zf), axis=1)
    if measure.density is not None:
        zeta = np.exp(1j * measure.theta)
        val += np.mean(measure.density * _kernel(zeta[None, :], zf), axis=1)
    return (1j * c + val).reshape(z.shape)


def cayley(f: CaratheodoryFunction) -> SchurFunction:
    """phi = (f - 1)/(f + 1); anti-Caratheodory input gives an anti-Schur function."""
    if f.orientation == "caratheodory":
        return SchurFunction(lambda z: (f(z) - 1.0) / (f(z) + 1.0), "schur", f.name)
    return SchurFunction(lambda z: (f(z) + 1.0) / (f(z) - 1.0), "anti-schur", f.name)


def inverse_cayley(phi: SchurFunction) -> CaratheodoryFunction:
    """f = (1 + phi)/(1 - phi); a pole (phi = 1) evaluates to complex infinity."""
    def ev(z):
        v = phi(z)
        if phi.orientation == "schur":
            num, den = 1.0 + v, 1.0 - v
        else:
            num, den = v + 1.0, v - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den == 0, complex(np.inf), num / np.where(den == 0, 1.0, den))
    orient = "caratheodory" if phi.orientation == "schur" else "anti"
    return CaratheodoryFunction(ev, orient, phi.name)


# ---------------------------------------------------------------- radial limits

def radial_values(f, zeta, radii):
    """f(r zeta) for every radius; shape (len(radii),) + zeta.shape."""
    zeta = np.asarray(zeta, dtype=complex)
    radii = np.asarray(radii, dtype=float)
    z = radii.reshape((-1,) + (1,) * zeta.ndim) * zeta[None, ...]
    return f(z)


def boundary_value(f, zeta, r_schedule=None):
    """Richardson-extrapolated radial limit of f at zeta; returns (value, error)."""
    radii = radial_schedule() if r_schedule is None else np.asarray(r_schedule)
    vals = radial_values(f, zeta, radii)
    return richardson(1.0 - radii, vals)


def point_mass(f, zeta0, r_schedule=None) -> float:
    """Weight of a possible atom at zeta0: lim (1-r)/2 Re f(r zeta0)."""
    radii = radial_schedule() if r_schedule is None else np.asarray(r_schedule)
    vals = radial_values(f, np.asarray([zeta0]), radii)[:, 0]
    sign = getattr(f, "sign", 1)
    g = sign * 0.5 * (1.0 - radii) * vals.real
    best, _ = richardson(1.0 - radii, g)
    return float(best)


def ac_density(f, zeta, r_schedule=None, tol: float = 1e-6, strict: bool = True):
    """A.c. density of the measure of f at zeta (w.r.t. d theta / 2 pi).

    Radial limit of Re f(r zeta), extrapolated. Values that dip below -tol
    are clamped to zero and reported in the second return value. Points
    where (1-r)/2 Re f does not go to zero (threshold ATOM_THRESHOLD) are in
    the singular support: with
    ``strict`` a SingularSupportError is raised, otherwise NaN is returned.

    Returns
    -------
    density : ndarray
    clamped : ndarray of bool
    """
    radii = radial_schedule() if r_schedule is None else np.asarray(r_schedule)
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    sign = getattr(f, "sign", 1)
    vals = sign * radial_values(f, zeta, radii).real
    growth, _ = richardson(1.0 - radii, 0.5 * (1.0 - radii)[:, None] * vals)
    singular = growth > ATOM_THRESHOLD
    dens, _ = richardson(1.0 - radii, vals)
    clamped = dens < -tol
    dens = np.where(dens < 0, 0.0, dens)
    if np.any(singular):
        if strict:
            ang = np.mod(np.angle(zeta[singular]), TWO_PI)
            raise SingularSupportError("radial values diverge like 1/(1-r)", ang)
        dens = np.where(singular, np.nan, dens)
    return dens, clamped


# ---------------------------------------------------------------- atoms and arcs

@dataclass
class Atom:
    theta: float
    weight: float
    resolved: bool


def detect_atoms(f, N: int = 4096, r_schedule=None, arc: Arc | None = None):
    """Locate point masses by scanning (1-r)/2 Re f(r zeta) at the outermost radius.

    Candidate peaks above UNRESOLVED_THRESHOLD are sharpened by maximizing
    Re f along the circle at each radius of the schedule, then the weight is
    extrapolated. Weights above ATOM_THRESHOLD are atoms; those between the
    thresholds are returned with ``resolved=False``.
    """
    radii = radial_schedule() if r_schedule is None else np.asarray(r_schedule)
    sign = getattr(f, "sign", 1)
    theta = trapezoid_grid(N)
    r_scan = radii[min(len(radii) - 1, 6)]
    g = sign * 0.5 * (1 - r_scan) * f(r_scan * np.exp(1j * theta)).real
    # strict local maxima standing out of the a.c. background 3 cells away
    bg = np.minimum(np.roll(g, 3), np.roll(g, -3))
    peaks = [i for i in range(N) if g[i] > g[i - 1] and g[i] >= g[(i + 1) % N]
             and g[i] - bg[i] > UNRESOLVED_THRESHOLD and g[i] > 1.1 * bg[i]]
    atoms = []
    h = TWO_PI / N
    for i in peaks:
        t = theta[i]
        width = 2 * h
        for r in radii:
            obj = lambda s: -sign * float(f(np.array([r * np.exp(1j * s)]))[0].real)
            res = minimize_scalar(obj, bounds=(t - width, t + width), method="bounded",
                                  options={"xatol": 1e-3 * (1 - r)})
            t = res.x
            width = max(4 * (1 - r), 1e-9)
        t = float(np.mod(t, TWO_PI))
        if arc is not None and not arc.contains(t):
            continue
        w = point_mass(f, np.exp(1j * t), radii)
        if w > ATOM_THRESHOLD:
            atoms.append(Atom(t, w, True))
        elif w > UNRESOLVED_THRESHOLD:
            atoms.append(Atom(t, w, False))
    # merge duplicates found from neighbouring grid peaks
    merged: list[Atom] = []
    for a in sorted(atoms, key=lambda a: a.theta):
        if merged and abs(a.theta - merged[-1].theta) < 1e-6:
            continue
        merged.append(a)
    return merged


def _poisson_arc(r, t1, t2):
    """(1/2pi) integral_{t1}^{t2} P_r(t) dt for the Poisson kernel centred at 0."""
    def F(t):
        n = np.round(t / TWO_PI)
        s = t - TWO_PI * n
        return TWO_PI * n + 2.0 * np.arctan2((1 + r) * np.sin(s / 2), (1 - r) * np.cos(s / 2))
    return (F(t2) - F(t1)) / TWO_PI


def arc_mass(f, arc: Arc, r_schedule=None, n_nodes: int = 2000, atoms=None):
    """mu((theta0, theta1]) from the radial limits of (1/2pi) int Re f(r e^{it}) dt.

    Detected atoms are removed analytically (their Poisson integrals are
    known in closed form), the remainder is integrated with Gauss-Legendre
    nodes, extrapolated in 1-r, and atoms inside the half-open arc are added
    back. Returns (mass, error_estimate, atoms).
    """
    radii = radial_schedule() if r_schedule is None else np.asarray(r_schedule)
    sign = getattr(f, "sign", 1)
    if atoms is None:
        atoms = [a for a in detect_atoms(f, r_schedule=radii) if a.resolved]
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    t0, t1 = arc.theta0, arc.theta1
    t = 0.5 * (t1 - t0) * x + 0.5 * (t1 + t0)
    wt = 0.5 * (t1 - t0) * w / TWO_PI
    vals = []
    for r in radii:
        integrand = sign * f(r * np.exp(1j * t)).real
        m = float(np.sum(wt * integrand))
        for a in atoms:
            m -= a.weight * float(_poisson_arc(r, t0 - a.theta, t1 - a.theta))
        vals.append(m)
    best, err = richardson(1.0 - radii, np.array(vals))
    mass = float(best)
    half_open = Arc(t0, t1, closed0=False, closed1=True) if not arc.is_full else arc
    for a in atoms:
        if half_open.contains(a.theta):
            mass += a.weight
    return mass, float(err), atoms


def reconstruct_measure(f, arc: Arc | None = None, N: int = 1024, r_schedule=None) -> SpectralMeasure:
    """Sampled a.c. density on a uniform grid plus detected atoms.

    Density samples are radial limits of Re f; points in the singular
    support are set to zero there and reported as atoms or, if unresolved,
    through ``SpectralMeasure.unresolved``. Outside ``arc`` the density is 0.
    """
    radii = radial_schedule() if r_schedule is None else np.asarray(r_schedule)
    theta = trapezoid_grid(N)
    found = detect_atoms(f, max(N, 1024), radii, arc)
    atoms = [a for a in found if a.resolved]
    unresolved = np.array([a.theta for a in found if not a.resolved])
    dens, _ = ac_density(f, np.exp(1j * theta), radii, strict=False)
    dens = np.where(np.isnan(dens), 0.0, dens)
    if arc is not None:
        mask = np.array([arc.contains(t) for t in theta])
        dens = np.where(mask, dens, 0.0)
    return SpectralMeasure(np.exp(1j * np.array([a.theta for a in atoms])),
                           np.array([a.weight for a in atoms]), theta, dens, unresolved)


# ---------------------------------------------------------------- exponential representation

def _radial_phase(f, zeta, radii):
    """arg(i f) continued from z = 0 outward along each radius."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    inner = np.linspace(0.0, radii[0], 9)[:-1]
    allr = np.concatenate([inner, radii])
    vals = radial_values(f, zeta, allr)
    ph = np.angle(1j * vals)
    steps = np.diff(ph, axis=0)
    jumps = np.abs(np.angle(np.exp(1j * steps)))
    if np.any(jumps > math.pi / 2):
        raise NumericalError("phase tracking failed; use a finer radial grid")
    cont = ph[0] + np.concatenate([np.zeros((1,) + ph.shape[1:]),
                                   np.cumsum(np.angle(np.exp(1j * steps)), axis=0)])
    return cont[len(inner):]


def exp_herglotz(f: CaratheodoryFunction, r_schedule=None):
    """(d, Upsilon) with d = -ln|f(0)| and Upsilon(zeta) = lim Im ln(i f(r zeta)).

    Upsilon is returned as a callable on boundary points with values in [0, pi].
    """
    f0 = f.at_zero
    if f0 == 0:
        raise DomainError("f(0) = 0 has no logarithm")
    radii = radial_schedule() if r_schedule is None else np.asarray(r_schedule)

    def upsilon(zeta):
        ph = _radial_phase(f, zeta, radii)
        best, _ = richardson(1.0 - radii, ph)
        return np.clip(best, 0.0, math.pi)

    return -math.log(abs(f0)), upsilon


@dataclass
class XiProfile:
    """Xi on the uniform grid theta_n = 2 pi n / N.

    With ``radius`` set, ``values`` hold arg f(radius e^{i theta}) (the
    Poisson smoothing of the boundary profile); otherwise they are boundary
    values.
    """

    theta: np.ndarray
    values: np.ndarray
    site: int | None = None
    radius: float | None = None

    @property
    def N(self) -> int:
        return len(self.theta)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def moment(self, j: int) -> complex:
        """Integral of Xi conj(zeta)^j d mu_0 of the boundary profile."""
        m = complex(np.mean(self.values * np.exp(-1j * j * self.theta)))
        if self.radius is not None and j:
            m /= self.radius ** abs(j)
        return m

    def l1_distance(self, other: "XiProfile", mask=None) -> float:
        d = np.abs(self.values - other.values)
        if mask is None:
            return float(np.mean(d))
        return float(np.sum(d[mask]) / len(d))

    @property
    def upsilon(self) -> np.ndarray:
        return self.values + math.pi / 2


def xi_profile(f, N: int = 4096, site=None, radius: float | None = None, r_schedule=None) -> XiProfile:
    """Xi = arg f on the circle (radial limits) or on the circle of given radius."""
    theta = trapezoid_grid(N)
    zeta = np.exp(1j * theta)
    if radius is not None:
        return XiProfile(theta, np.angle(f(radius * zeta)), site, radius)
    radii = radial_schedule() if r_schedule is None else np.asarray(r_schedule)
    ph = _radial_phase(f, zeta, radii) - math.pi / 2
    best, _ = richardson(1.0 - radii, ph)
    return XiProfile(theta, np.clip(best, -math.pi / 2, math.pi / 2), site)


def boundary_table(f, N: int = 512, r: float = 1 - 2.0 ** -10):
    """Rows (theta, Re f, Im f, density, Xi) at radius r."""
    theta = trapezoid_grid(N)
    v = f(r * np.exp(1j * theta))
    sign = getattr(f, "sign", 1)
    return np.column_stack([theta, v.real, v.imag, sign * v.real, np.angle(v)])


def boundary_csv(f, N: int = 512, r: float = 1 - 2.0 ** -10) -> str:
    rows = boundary_table(f, N, r)
    lines = ["theta,re_f,im_f,density,xi"]
    lines += [",".join(f"{x:.12g}" for x in row) for row in rows]
    return "\n".join(lines) + "\n"
