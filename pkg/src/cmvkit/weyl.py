"""Weyl-Titchmarsh functions of CMV operators.

Two independent constructions are provided:

* resolvent truncation: m_+(z,k0) = <delta_k0, (U_+ + z)(U_+ - z)^{-1} delta_k0>
  on a split half-lattice section, with the section length doubled until the
  value settles;
* Riccati cutoff: Phi_+(z,K) = 0 far to the right, iterated back to k0, and
  1/Phi_-(z,-K) = 0 far to the left, iterated forward.

Periodic sequences additionally admit the exact fixed-point solution of the
period map (``floquet``), and geometric or gauged sequences are reduced to
their base sequence (``gauge``). Phi_- is always carried as psi = 1/Phi_-.

All evaluators accept arrays of z. Points outside the closed disk are
handled through the reflection f(1/conj z) = -conj f(z), valid for every
function here with a Herglotz representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import floquet as _floquet
from .cmv import build_full_section, build_half_lattice
from .core import (DomainError, Explicit, NumericalError, OutOfRangeError,
                   Periodic, VerblunskySequence, gauge_reduction, rho)
from .szego import initial_values, propagate, solution, transfer_inverse, transfer_matrix

SINGULAR_TOL = 1e-8
RICCATI_TOL = 1e-9
RESOLVENT_TOL = 1e-11
N_START, N_MAX = 64, 8192
K_START, K_MAX = 64, 1 << 20


def _as_z(z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(np.abs(z) - 1.0) < 1e-12):
        raise DomainError("z must stay off the unit circle")
    return z


# ---------------------------------------------------------------- resolvent

def _half_m(seq, k0, z, n, side):
    """m_{side}(z,k0) on a section of length n+1 (no adaptivity)."""
    mat = build_half_lattice(seq, k0, n, side=side)
    i = mat.index(k0)
    rhs = np.zeros(mat.size, dtype=complex)
    rhs[i] = 1.0
    out = np.empty(z.shape, dtype=complex)
    for idx, zz in np.ndenumerate(z):
        x = mat.resolvent_solve(zz, rhs)
        out[idx] = side * (1.0 + 2.0 * zz * x[i])
    return out


def _section_singular(seq, k0, n, side, z):
    from .cmv import eigenvalues
    ev = eigenvalues(build_half_lattice(seq, k0, n, side=side))
    d = np.min(np.abs(z.reshape(-1, 1) - ev.reshape(1, -1)), axis=1)
    return np.any(d < SINGULAR_TOL)


def half_lattice_m(seq, k0, z, n=None, side=+1, tol=RESOLVENT_TOL):
    """m_+(z,k0) (side=+1) or m_-(z,k0) (side=-1) by resolvent truncation.

    With ``n`` given a single section of n+1 sites is used; otherwise n is
    doubled from 64 until successive values differ by less than ``tol``.
    """
    z = _as_z(z)
    if n is not None:
        if n < 8:
            raise DomainError("half-lattice section needs n >= 8")
        if np.any(np.abs(np.abs(z) - 1) < 0.05) and _section_singular(seq, k0, n, side, z):
            raise NumericalError("z is within 1e-8 of a section eigenvalue")
        return _half_m(seq, k0, z, n, side)
    n = N_START
    prev = _half_m(seq, k0, z, n, side)
    while True:
        n2 = 2 * n
        try:
            cur = _half_m(seq, k0, z, n2, side)
        except OutOfRangeError:
            return prev
        if np.max(np.abs(cur - prev), initial=0.0) < tol or n2 >= N_MAX:
            return cur
        prev, n = cur, n2


def m_plus(seq, k0, z, n=None):
    return half_lattice_m(seq, k0, z, n, +1)


def m_minus(seq, k0, z, n=None):
    return half_lattice_m(seq, k0, z, n, -1)


def m_plus_spectral(seq, k0, z, n):
    """m_+ from the eigendecomposition of the half-lattice section."""
    from .cmv import eigendecompose
    meas = eigendecompose(build_half_lattice(seq, k0, n, side=+1), k0)
    z = np.asarray(z, dtype=complex)
    zeta = meas.atoms
    return np.sum(meas.weights * (zeta + z[..., None]) / (zeta - z[..., None]), axis=-1)


def _mobius_minus(alpha, m_minus_prev):
    """M_-(z,k0) from m_-(z,k0-1)."""
    a, b = 1.0 + alpha, 1.0 - alpha
    den = 1j * a.imag + b.real * m_minus_prev
    if np.any(np.abs(den) < 1e-12):
        raise NumericalError("Mobius denominator vanishes")
    return (a.real + 1j * b.imag * m_minus_prev) / den


def _resolvent_pair(seq, k0, z, n=None):
    Mp = half_lattice_m(seq, k0, z, n, +1)
    mm = half_lattice_m(seq, k0 - 1, z, n, -1)
    Mm = _mobius_minus(seq.alpha(k0), mm)
    return Mp, Mm


# ---------------------------------------------------------------- riccati

def _riccati_plus(alphas_right, z):
    """Backward Riccati for Phi_+ from Phi = 0; alphas_right = alpha_{k+1..k+L}."""
    phi = np.zeros_like(z)
    inside = np.abs(z) < 1
    for a in alphas_right[::-1]:
        phi = z * (phi - np.conj(a)) / (1.0 - a * phi)
    if np.any(np.abs(phi[inside]) > 1 + 1e-8):
        raise NumericalError("Riccati iteration left the unit disk")
    return phi


def _riccati_psi(alphas_left, z):
    """Forward Riccati for psi = 1/Phi_- from psi = 0; alphas_left = alpha_{k-L+1..k}."""
    psi = np.zeros_like(z)
    inside = np.abs(z) < 1
    for a in alphas_left:
        psi = (a + z * psi) / (1.0 + z * np.conj(a) * psi)
    if np.any(np.abs(psi[inside]) > 1 + 1e-8):
        raise NumericalError("Riccati iteration left the unit disk")
    return psi


def _riccati_schur(seq, k, z, K=None, tol=RICCATI_TOL):
    lo, hi = seq.index_range
    kmax_r = K_MAX if hi == np.inf else int(hi - k)
    kmax_l = K_MAX if lo == -np.inf else int(k - lo)
    if kmax_r < 0 or kmax_l < 0:
        raise OutOfRangeError(f"site {k} outside the stored range")

    def run(L):
        Lr, Ll = min(L, kmax_r), min(L, kmax_l)
        ar = seq.window(k + 1, k + Lr) if Lr > 0 else np.array([])
        al = seq.window(k - Ll + 1, k) if Ll > 0 else np.array([])
        return _riccati_plus(ar, z), _riccati_psi(al, z)

    if K is not None:
        return run(int(K))
    L = K_START
    p, s = run(L)
    while True:
        L2 = 2 * L
        p2, s2 = run(L2)
        d = max(np.max(np.abs(_cay(p2) - _cay(p)), initial=0.0),
                np.max(np.abs(_cay_psi(s2) - _cay_psi(s)), initial=0.0))
        if d < tol or L2 >= max(min(kmax_r, K_MAX), min(kmax_l, K_MAX)) or L2 >= K_MAX:
            return p2, s2
        p, s, L = p2, s2, L2


def _cay(phi):
    return (1.0 + phi) / (1.0 - phi)


def _cay_psi(psi):
    return (psi + 1.0) / (psi - 1.0)


# ---------------------------------------------------------------- dispatch

def _default_method(seq):
    if isinstance(seq, Periodic):
        return "floquet"
    if gauge_reduction(seq) is not None:
        return "gauge"
    return "riccati"


def schur_pair(seq: VerblunskySequence, k: int, z, method: str = "auto", K=None, n=None):
    """(Phi_+(z,k), 1/Phi_-(z,k)) for z in the closed disk minus the circle.

    Points with |z| > 1 are reflected: Phi(1/conj z) = 1/conj Phi(z).
    """
    z = _as_z(z)
    out = np.abs(z) > 1
    if np.any(out):
        w = np.where(out, 1.0 / np.conj(np.where(out, z, 1.0)), z)
        p, s = schur_pair(seq, k, w, method, K, n)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(out, 1.0 / np.conj(p), p)
            s = np.where(out, 1.0 / np.conj(s), s)
        return p, s
    if method == "auto":
        method = _default_method(seq)
    if method == "riccati":
        return _riccati_schur(seq, k, z, K)
    if method == "floquet":
        if not isinstance(seq, Periodic):
            raise DomainError("floquet method needs a periodic sequence")
        return _floquet.schur_fixed_points(seq, k, z)
    if method == "gauge":
        red = gauge_reduction(seq)
        if red is None:
            raise DomainError("gauge method needs a geometric or gauged sequence")
        base, t = red
        # seq = t(base): Phi(z,k;base) = c_k Phi(g1 z,k;seq) with c_k = g0 g1^k,
        # so Phi(z,k;seq) = Phi(conj(g1) z,k;base) / c_k and psi picks up c_k
        ck = complex(t.factor(k))
        p, s = schur_pair(base, k, np.conj(t.gamma1) * z, "auto", K, n)
        return p / ck, ck * s
    if method == "resolvent":
        Mp, Mm = _resolvent_pair(seq, k, z, n)
        return (Mp - 1.0) / (Mp + 1.0), (Mm + 1.0) / (Mm - 1.0)
    raise DomainError(f"unknown method {method!r}")


@dataclass
class WeylPoint:
    """Weyl-Titchmarsh quantities at one site for an array of z."""

    k: int
    z: np.ndarray
    alpha: complex
    Phi_plus: np.ndarray
    inv_Phi_minus: np.ndarray
    method: str

    @property
    def M_plus(self):
        return _cay(self.Phi_plus)

    @property
    def M_minus(self):
        return _cay_psi(self.inv_Phi_minus)

    @property
    def Phi11(self):
        """Phi_{1,1} = Phi_+ / Phi_- = Phi_+ psi."""
        return self.Phi_plus * self.inv_Phi_minus

    @property
    def M11(self):
        p = self.Phi11
        return (1.0 + p) / (1.0 - p)

    def matrix(self):
        return M_matrix_from(self.M_plus, self.M_minus, self.alpha, self.k)


def M_functions(seq: VerblunskySequence, k0: int, z, method: str = "auto",
                K=None, n=None) -> WeylPoint:
    """Evaluate M_+, M_-, Phi_+, 1/Phi_- and Phi_{1,1} at site k0.

    ``method`` is one of auto, riccati, resolvent, floquet, gauge.
    """
    z = np.asarray(z, dtype=complex)
    if method == "resolvent":
        zz = _as_z(z)
        Mp, Mm = _resolvent_pair(seq, k0, zz, n)
        p = (Mp - 1.0) / (Mp + 1.0)
        s = (Mm + 1.0) / (Mm - 1.0)
    else:
        p, s = schur_pair(seq, k0, z, method, K, n)
    used = _default_method(seq) if method == "auto" else method
    return WeylPoint(k0, z, seq.alpha(k0), p, s, used)


def M_matrix_from(Mp, Mm, alpha, k):
    """Assemble [[M00, M01], [M10, M11]] from M_+ and M_- at site k."""
    Mp, Mm = np.asarray(Mp), np.asarray(Mm)
    diff = Mp - Mm
    if np.any(np.abs(diff) < 1e-12):
        raise NumericalError("M_+ = M_-: degenerate Wronskian")
    a, b = 1.0 + alpha, 1.0 - alpha
    ca, cb = np.conj(a), np.conj(b)
    r = float(rho(alpha))
    M00 = 1.0 + (ca - cb * Mp) * (a + b * Mm) / (r * r * diff)
    M11 = (1.0 - Mp * Mm) / diff
    t_odd = (1.0 - Mp) * (ca - cb * Mm)
    t_even = (1.0 + Mp) * (a + b * Mm)
    if k % 2:
        M01, M10 = -t_odd / (r * diff), -t_even / (r * diff)
    else:
        M01, M10 = -t_even / (r * diff), -t_odd / (r * diff)
    return np.stack([np.stack([M00, M01], -1), np.stack([M10, M11], -1)], -2)


def M_matrix(seq: VerblunskySequence, k0: int, z, method: str = "auto"):
    w = M_functions(seq, k0, z, method)
    return w.matrix()


def M_matrix_direct(seq: VerblunskySequence, k: int, z, n: int = 512):
    """<delta_i, (U+z)(U-z)^{-1} delta_j> for i, j in {k-1, k} on a full section."""
    z = _as_z(z)
    half = n // 2
    mat = build_full_section(seq, k - half, k + half)
    i0, i1 = mat.index(k - 1), mat.index(k)
    out = np.empty(z.shape + (2, 2), dtype=complex)
    for idx, zz in np.ndenumerate(z):
        rhs = np.zeros((mat.size, 2), dtype=complex)
        rhs[i0, 0] = rhs[i1, 1] = 1.0
        x = mat.resolvent_solve(zz, rhs)
        blk = 2.0 * zz * x[[i0, i1], :] + np.eye(2)
        out[idx] = blk
    return out


def _site_column(seq, k_lo, k_hi, vals):
    # alpha_{k_lo+1..k_hi} shaped to broadcast against vals[1:] (sites on axis 0)
    a = seq.window(k_lo + 1, k_hi)
    return a.reshape((-1,) + (1,) * (np.ndim(vals) - 1))


def riccati_residual_phi(seq, k_lo, k_hi, z, phis):
    """|alpha_k Phi(k-1) Phi(k) - Phi(k-1) + z Phi(k) - conj(alpha_k) z| for k in (k_lo, k_hi].

    ``phis`` holds Phi(k) for k = k_lo..k_hi along axis 0.
    """
    a = _site_column(seq, k_lo, k_hi, phis)
    p0, p1 = phis[:-1], phis[1:]
    return np.abs(a * p0 * p1 - p0 + z * p1 - np.conj(a) * z)


def riccati_residual_psi(seq, k_lo, k_hi, z, psis):
    """Residual of the reciprocal Riccati equation for psi = 1/Phi_-."""
    a = _site_column(seq, k_lo, k_hi, psis)
    s0, s1 = psis[:-1], psis[1:]
    return np.abs(np.conj(a) * z * s0 * s1 + s1 - z * s0 - a)


def riccati_residual_M(seq, k_lo, k_hi, z, Ms):
    al = _site_column(seq, k_lo, k_hi, Ms)
    a, b = 1.0 + al, 1.0 - al
    m0, m1 = Ms[:-1], Ms[1:]
    lhs = ((z * np.conj(b) - b) * m0 * m1 + (z * np.conj(b) + b) * m1
           - (z * np.conj(a) + a) * m0)
    return np.abs(lhs - (z * np.conj(a) - a))


# ---------------------------------------------------------------- resolvent kernel

def _weyl_directions(seq, z, k_min, k_max, tag):
    """Unit-free directions d_k of the +/- Weyl solution on [k_min, k_max].

    Phi_+ is carried backward from k_max and psi = 1/Phi_- forward from k_min,
    the stable directions of the Riccati maps. (u, v) is parallel to
    (Phi, 1) for k even and (z, Phi) for k odd; for Phi_- the same vectors are
    written with psi to avoid overflow.
    """
    zz = np.array([z])
    out = {}
    if tag == "+":
        phi = schur_pair(seq, k_max, zz)[0][0]
        for k in range(k_max, k_min - 1, -1):
            out[k] = np.array([phi, 1.0]) if k % 2 == 0 else np.array([z, phi])
            a = seq.alpha(k)
            phi = z * (phi - np.conj(a)) / (1.0 - a * phi)
    else:
        psi = schur_pair(seq, k_min, zz)[1][0]
        for k in range(k_min, k_max + 1):
            out[k] = np.array([1.0, psi]) if k % 2 == 0 else np.array([z * psi, 1.0])
            if k < k_max:
                a = seq.alpha(k + 1)
                psi = (a + z * psi) / (1.0 + z * np.conj(a) * psi)
    return out


def weyl_solutions(seq, k0, z, k_min, k_max, M_plus, M_minus):
    """u_+-, v_+- = (q_+, s_+) + M_+- (p_+, r_+) on [k_min, k_max].

    The values at k0 come from the initial data; elsewhere each solution is
    its Riccati direction times an amplitude carried by the transfer
    matrices, so the decaying solutions are never propagated in their
    growing direction.
    """
    z = complex(z)
    p0 = initial_values("p_r", 1, k0, z)
    q0 = initial_values("q_s", 1, k0, z)
    out = {}
    for tag, M in (("+", M_plus), ("-", M_minus)):
        d = _weyl_directions(seq, z, k_min, k_max, tag)
        start = np.array([complex(q0[0] + M * p0[0]), complex(q0[1] + M * p0[1])])
        dk = d[k0]
        lam = {k0: np.vdot(dk, start) / np.vdot(dk, dk)}
        for k in range(k0 + 1, k_max + 1):
            T = transfer_matrix(seq, z, k)
            w = T @ d[k - 1]
            lam[k] = lam[k - 1] * np.vdot(d[k], w) / np.vdot(d[k], d[k])
        for k in range(k0, k_min, -1):
            Ti = transfer_inverse(seq, z, k)
            w = Ti @ d[k]
            lam[k - 1] = lam[k] * np.vdot(d[k - 1], w) / np.vdot(d[k - 1], d[k - 1])
        u = {k: lam[k] * d[k][0] for k in range(k_min, k_max + 1)}
        v = {k: lam[k] * d[k][1] for k in range(k_min, k_max + 1)}
        out[tag] = (u, v)
    return out


def wronskian_closed_form(k0, k1, z, M_plus, M_minus):
    return (-1) ** k1 * (M_plus - M_minus) * (2 * z if k0 % 2 else 2.0)


def resolvent_entry(seq: VerblunskySequence, k0: int, z: complex, k: int, kprime: int,
                    k1: int | None = None, method: str = "auto") -> complex:
    """(U - z)^{-1}(k, k') from the Weyl solutions anchored at k0."""
    z = complex(z)
    if abs(abs(z) - 1) < 1e-12:
        raise DomainError("z must stay off the unit circle")
    if z == 0:
        raise DomainError("the kernel is evaluated for z != 0; use analytic continuation")
    if k1 is None:
        k1 = k0
    w = M_functions(seq, k0, np.array([z]), method)
    Mp, Mm = complex(w.M_plus[0]), complex(w.M_minus[0])
    lo, hi = min(k, kprime, k1, k0), max(k, kprime, k1, k0)
    sols = weyl_solutions(seq, k0, z, lo, hi, Mp, Mm)
    up, vp = sols["+"]
    um, vm = sols["-"]
    W = up[k1] * vm[k1] - um[k1] * vp[k1]
    if abs(W) < 1e-12:
        raise NumericalError("Wronskian vanishes")
    pref = (-1) ** (k1 + 1) / (z * W)
    if k < kprime or (k == kprime and k % 2):
        val = um[k] * vp[kprime]
    else:
        val = vm[kprime] * up[k]
    return complex(pref * val)
