"""Floquet theory for periodic Verblunsky coefficients.

The monodromy matrix is the ordered product T(z,k0+w) ... T(z,k0+1) over an
even period w (odd periods are doubled). The spectrum of U is the set of
angles where the discriminant Delta = tr/2 lies in [-1, 1].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import TWO_PI, Arc, DomainError, Periodic, canonical_angle, rho
from .szego import _entries


def even_cycle(seq: Periodic) -> np.ndarray:
    if not isinstance(seq, Periodic):
        raise DomainError("Floquet theory needs a Periodic generator")
    c = seq.cycle
    return np.concatenate([c, c]) if len(c) % 2 else c.copy()


def monodromy(seq: Periodic, k0: int, z) -> np.ndarray:
    """Monodromy matrix at base point k0; shape z.shape + (2, 2)."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("monodromy is undefined at z = 0")
    cyc = even_cycle(seq)
    w = len(cyc)
    m11, m12 = np.ones_like(z), np.zeros_like(z)
    m21, m22 = np.zeros_like(z), np.ones_like(z)
    for j in range(1, w + 1):
        k = k0 + j
        t11, t12, t21, t22 = _entries(cyc[k % w], k, z)
        m11, m12, m21, m22 = (t11 * m11 + t12 * m21, t11 * m12 + t12 * m22,
                              t21 * m11 + t22 * m21, t21 * m12 + t22 * m22)
    return np.stack([np.stack([m11, m12], -1), np.stack([m21, m22], -1)], -2)


def discriminant(seq: Periodic, z, k0: int = 0):
    M = monodromy(seq, k0, z)
    return 0.5 * (M[..., 0, 0] + M[..., 1, 1])


def discriminant_theta(seq: Periodic, theta, k0: int = 0) -> np.ndarray:
    """Real part of Delta(e^{i theta}) (Delta is real on the circle)."""
    return discriminant(seq, np.exp(1j * np.asarray(theta, dtype=float)), k0).real


def multipliers(seq: Periodic, z, k0: int = 0):
    """Floquet multipliers (rho_+, rho_-) with rho_+ rho_- = 1 and |rho_+| <= 1."""
    d = np.asarray(discriminant(seq, z, k0))
    s = np.sqrt(d * d - 1.0 + 0j)
    r1, r2 = d - s, d + s
    swap = np.abs(r1) > np.abs(r2)
    rp = np.where(swap, r2, r1)
    rm = np.where(swap, r1, r2)
    return rp, rm


def period2_discriminant(a1: float, a2: float, theta):
    """Closed-form discriminant for period-2 data |alpha| = (a1, a2)."""
    if not (0 <= a1 < 1 and 0 <= a2 < 1):
        raise DomainError("moduli must lie in [0, 1)")
    return (np.cos(theta) + a1 * a2) / (math.sqrt(1 - a1 * a1) * math.sqrt(1 - a2 * a2))


def period2_lambdas(a1: float, a2: float):
    """lambda_+- = -a1 a2 +- rho1 rho2: the band is lambda_- <= cos(theta) <= lambda_+."""
    r = float(rho(a1)) * float(rho(a2))
    return -a1 * a2 + r, -a1 * a2 - r


def _merge_wrap(intervals):
    """Join [t0, t1] pieces touching across theta = 0 / 2 pi."""
    if len(intervals) >= 2 and intervals[0][0] <= 1e-12 and intervals[-1][1] >= TWO_PI - 1e-12:
        first = intervals.pop(0)
        last = intervals.pop(-1)
        intervals.append((last[0], first[1] + TWO_PI, last[2] + first[2]))
    return intervals


def band_arcs(seq: Periodic, N: int = 1024, tol: float = 1e-10, k0: int = 0):
    """Maximal arcs where -1 <= Delta(e^{i theta}) <= 1.

    The scan uses N uniform angles; sign changes of Delta -+ 1 are refined
    with Brent's method to ``tol``. Tangential touches of +-1 inside a band
    (closed gaps) are detected by minimizing 1 - |Delta| between samples and
    reported on the arc's ``closed_gaps``.
    """
    theta = TWO_PI * np.arange(N + 1) / N
    D = discriminant_theta(seq, theta, k0)
    f = lambda t: discriminant_theta(seq, t, k0)
    g = lambda t: 1.0 - abs(float(f(t)))
    inside = np.abs(D) <= 1.0 + 1e-12
    if np.all(inside):
        gaps = _closed_gaps(seq, theta, D, g, tol, k0)
        return [Arc(0.0, TWO_PI, closed_gaps=tuple(gaps))]

    def edge(i):
        # crossing of |Delta| = 1 inside [theta_i, theta_{i+1}]
        j = i if not inside[i] else i + 1
        s = 1.0 if D[j] > 0 else -1.0
        fa, fb = D[i] - s, D[i + 1] - s
        if fa * fb > 0 or fa == 0 or fb == 0:
            # edge sits on a grid node (within rounding)
            return theta[i] if abs(fa) <= abs(fb) else theta[i + 1]
        return brentq(lambda t: float(f(t)) - s, theta[i], theta[i + 1],
                      xtol=tol, rtol=4 * np.finfo(float).eps)

    pieces = []
    start = 0.0 if inside[0] else None
    for i in range(N):
        if inside[i] and not inside[i + 1]:
            pieces.append((start, edge(i)))
            start = None
        elif not inside[i] and inside[i + 1]:
            start = edge(i)
    if start is not None:
        pieces.append((start, TWO_PI))
    # isolated tangencies from outside (band of zero width) are ignored
    withgaps = []
    for t0, t1 in pieces:
        mask = (theta > t0) & (theta < t1)
        gaps = _closed_gaps(seq, theta[mask], D[mask], g, tol, k0) if mask.sum() > 2 else []
        withgaps.append((t0, t1, gaps))
    withgaps = _merge_wrap(withgaps)
    arcs = [Arc(canonical_angle(t0), canonical_angle(t0) + (t1 - t0), closed_gaps=tuple(gs))
            for t0, t1, gs in withgaps]
    return sorted(arcs, key=lambda a: a.theta0)


def _closed_gaps(seq, theta, D, g, tol, k0):
    """Local maxima of |Delta| that touch 1 from inside (closed gaps)."""
    out = []
    A = np.abs(D)
    for i in range(1, len(theta) - 1):
        if A[i] >= A[i - 1] and A[i] >= A[i + 1] and A[i] > 1 - 1e-3:
            res = minimize_scalar(g, bounds=(theta[i - 1], theta[i + 1]), method="bounded",
                                  options={"xatol": tol})
            if abs(res.fun) < 1e-9:
                out.append(float(canonical_angle(res.x)))
    return sorted(set(round(t, 9) for t in out))


def period_map(seq: Periodic, k: int, z):
    """Coefficients (a, b, c, d) of the Mobius map Phi(k) -> Phi(k + w).

    One step is Phi(j) = (Phi(j-1) + z conj(alpha_j)) / (alpha_j Phi(j-1) + z).
    """
    z = np.asarray(z, dtype=complex)
    cyc = even_cycle(seq)
    w = len(cyc)
    a, b = np.ones_like(z), np.zeros_like(z)
    c, d = np.zeros_like(z), np.ones_like(z)
    for j in range(k + 1, k + w + 1):
        al = cyc[j % w]
        s11, s12, s21, s22 = 1.0, z * np.conj(al), al, z
        a, b, c, d = s11 * a + s12 * c, s11 * b + s12 * d, s21 * a + s22 * c, s21 * b + s22 * d
        nrm = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d)))
        a, b, c, d = a / nrm, b / nrm, c / nrm, d / nrm
    return a, b, c, d


def schur_fixed_points(seq: Periodic, k: int, z):
    """(Phi_+(z,k), 1/Phi_-(z,k)) for |z| < 1 as fixed points of the period map.

    Phi_+ is the fixed point inside the disk, Phi_- the one outside. The
    quadratic c X^2 + (d - a) X - b = 0 is solved in the cancellation-free
    form q = -(B + sgn sqrt(B^2 - 4AC)) / 2 and both reciprocals are formed
    without dividing by small numbers.
    """
    z = np.asarray(z, dtype=complex)
    zero = z == 0
    zs = np.where(zero, 0.5, z)
    a, b, c, d = period_map(seq, k, zs)
    B = d - a
    disc = np.sqrt(B * B + 4.0 * b * c)
    sgn = np.where((np.conj(B) * disc).real >= 0, 1.0, -1.0)
    q = -0.5 * (B + sgn * disc)
    # roots X1 = q / c, X2 = -b / q; reciprocals c / q and -q / b
    with np.errstate(divide="ignore", invalid="ignore"):
        first_small = np.abs(q) ** 2 < np.abs(b) * np.abs(c)   # |X1| < |X2|
        phi_p = np.where(first_small, q / c, -b / q)
        psi = np.where(first_small, -q / b, c / q)
    # degenerate c = 0 or b = 0 (e.g. the free case): X = 0 and X = inf
    bad = ~np.isfinite(phi_p) | ~np.isfinite(psi)
    if np.any(bad & ~zero):
        phi_p = np.where(bad, _fallback_plus(seq, k, zs), phi_p)
        psi = np.where(bad, _fallback_psi(seq, k, zs), psi)
    al = seq.alpha(k)
    phi_p = np.where(zero, 0.0, phi_p)
    psi = np.where(zero, al, psi)
    return phi_p, psi


def _fallback_plus(seq, k, z):
    from .weyl import _riccati_plus
    return _riccati_plus(seq.window(k + 1, k + 4096), z)


def _fallback_psi(seq, k, z):
    from .weyl import _riccati_psi
    return _riccati_psi(seq.window(k - 4095, k), z)


@dataclass
class FloquetData:
    """Monodromy, discriminant, multipliers and bands of a periodic sequence."""

    seq: Periodic
    k0: int = 0

    @property
    def period(self) -> int:
        return len(even_cycle(self.seq))

    def monodromy(self, z):
        return monodromy(self.seq, self.k0, z)

    def discriminant(self, z):
        return discriminant(self.seq, z, self.k0)

    def multipliers(self, z):
        return multipliers(self.seq, z, self.k0)

    def bands(self, N: int = 1024, tol: float = 1e-10):
        return band_arcs(self.seq, N, tol, self.k0)


def arcs_to_json(arcs) -> str:
    return json.dumps({"arcs": [a.to_json() for a in arcs]})


def discriminant_csv(seq: Periodic, N: int = 1024) -> str:
    theta = TWO_PI * np.arange(N) / N
    D = discriminant_theta(seq, theta)
    lines = ["theta,Delta"] + [f"{t:.12g},{d:.15g}" for t, d in zip(theta, D)]
    return "\n".join(lines) + "\n"


def distance_to_arcs(angles, arcs) -> np.ndarray:
    """Angular distance of each angle to the union of arcs."""
    angles = np.asarray(angles, dtype=float)
    out = np.full(angles.shape, np.inf)
    for arc in arcs:
        if arc.is_full:
            return np.zeros(angles.shape)
        t = arc.theta0 + np.mod(angles - arc.theta0, TWO_PI)
        inside = t <= arc.theta1
        d = np.where(inside, 0.0, np.minimum(t - arc.theta1, arc.theta0 + TWO_PI - t))
        out = np.minimum(out, d)
    return out


def truncation_spectrum_check(seq: Periodic, arcs, n: int, k_lo: int = 0):
    """Distances of section eigenvalues to the bands and band coverage by eigenvalues.

    Returns (outside, coverage): the eigenvalue distances to the band union and
    the largest distance from a band point to the nearest eigenvalue.
    """
    from .cmv import build_full_section, eigenvalues
    ev = eigenvalues(build_full_section(seq, k_lo, k_lo + n - 1))
    ang = np.mod(np.angle(ev), TWO_PI)
    outside = distance_to_arcs(ang, arcs)
    samples = np.concatenate([a.interior_grid(400) for a in arcs])
    diff = np.abs(np.angle(np.exp(1j * (samples[:, None] - ang[None, :]))))
    coverage = float(np.max(np.min(diff, axis=1)))
    return outside, coverage
