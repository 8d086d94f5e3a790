"""Szego recursion and transfer-matrix solutions of U u = z u.

Transfer matrices are parity dependent:

    k odd:  T(z,k) = (1/rho_k) [[alpha_k, z], [1/z, conj(alpha_k)]]
    k even: T(z,k) = (1/rho_k) [[conj(alpha_k), 1], [1, alpha_k]]

and map (u(k-1), v(k-1)) to (u(k), v(k)). Both have determinant -1, so the
inverse is written in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, VerblunskySequence, rho


def _check_z(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("transfer matrices are undefined at z = 0")
    return z


def _entries(alpha, k, z):
    """(t11, t12, t21, t22) of T(z,k); broadcasts over z."""
    r = rho(alpha)
    one = np.ones_like(z)
    if k % 2:
        return alpha / r * one, z / r, 1.0 / (z * r), np.conj(alpha) / r * one
    return np.conj(alpha) / r * one, one / r, one / r, alpha / r * one


def transfer_matrix(seq: VerblunskySequence, z: complex, k: int) -> np.ndarray:
    z = complex(_check_z(z))
    t11, t12, t21, t22 = _entries(seq.alpha(k), k, z)
    return np.array([[t11, t12], [t21, t22]], dtype=complex)


def transfer_inverse(seq: VerblunskySequence, z: complex, k: int) -> np.ndarray:
    """T(z,k)^{-1} = -adj T(z,k) (det T = -1)."""
    z = complex(_check_z(z))
    t11, t12, t21, t22 = _entries(seq.alpha(k), k, z)
    return np.array([[-t22, t12], [t21, -t11]], dtype=complex)


@dataclass
class SzegoPair:
    """Values of phi_+(zeta, k) and phi*_+(zeta, k) with gamma_k."""

    k: int
    phi: complex
    phi_star: complex
    gamma: float


def szego_recurse(seq: VerblunskySequence, zeta: complex, n: int, on_circle: bool = True):
    """Run S(zeta,k) = [[zeta, alpha_k], [conj(alpha_k) zeta, 1]] from (1, 1).

    Returns SzegoPair for k = 0..n. Coefficients alpha_1..alpha_n are used.
    """
    zeta = complex(zeta)
    if zeta == 0:
        raise DomainError("zeta = 0 is excluded")
    if on_circle and abs(abs(zeta) - 1.0) > 1e-12:
        raise DomainError("zeta must lie on the unit circle (pass on_circle=False to continue)")
    out = [SzegoPair(0, 1.0 + 0j, 1.0 + 0j, 1.0)]
    phi, phs, gam = 1.0 + 0j, 1.0 + 0j, 1.0
    alphas = seq.window(1, n) if n >= 1 else np.array([])
    for k in range(1, n + 1):
        a = alphas[k - 1]
        phi, phs = zeta * phi + a * phs, np.conj(a) * zeta * phi + phs
        gam /= float(rho(a))
        out.append(SzegoPair(k, phi, phs, gam))
    return out


def szego_coefficients(seq: VerblunskySequence, n: int):
    """Monomial coefficients of phi_+(., k) and phi*_+(., k) for k = 0..n.

    ``phi[k]`` has length k+1 with ``phi[k][j]`` the coefficient of zeta**j.
    phi*_+ is the coefficient reversal of phi_+ with conjugation, which also
    defines it off the circle.
    """
    phis = [np.array([1.0 + 0j])]
    stars = [np.array([1.0 + 0j])]
    alphas = seq.window(1, n) if n >= 1 else np.array([])
    for k in range(1, n + 1):
        a = alphas[k - 1]
        p, s = phis[-1], stars[-1]
        zp = np.concatenate([[0.0], p])
        sp_ = np.concatenate([s, [0.0]])
        phis.append(zp + a * sp_)
        stars.append(np.conj(a) * zp + sp_)
    return phis, stars


class Laurent:
    """Laurent polynomial sum_i c[i] z**(lo + i)."""

    __slots__ = ("lo", "c")

    def __init__(self, lo: int, c):
        self.lo = int(lo)
        self.c = np.asarray(c, dtype=complex)

    @classmethod
    def monomial(cls, power: int, coef=1.0):
        return cls(power, [coef])

    @property
    def hi(self) -> int:
        return self.lo + len(self.c) - 1

    def shift(self, p: int) -> "Laurent":
        return Laurent(self.lo + p, self.c)

    def scale(self, s) -> "Laurent":
        return Laurent(self.lo, self.c * s)

    def __add__(self, other: "Laurent") -> "Laurent":
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        c = np.zeros(hi - lo + 1, dtype=complex)
        c[self.lo - lo:self.lo - lo + len(self.c)] += self.c
        c[other.lo - lo:other.lo - lo + len(other.c)] += other.c
        return Laurent(lo, c)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        p = np.arange(self.lo, self.hi + 1)
        return np.sum(self.c * z[..., None] ** p, axis=-1)


def _apply_laurent(alpha, k, u: Laurent, v: Laurent, inverse: bool):
    r = float(rho(alpha))
    ca = np.conj(alpha)
    if k % 2:
        # forward: u' = (alpha u + z v)/r, v' = (u/z + ca v)/r
        if not inverse:
            return (u.scale(alpha / r) + v.shift(1).scale(1 / r),
                    u.shift(-1).scale(1 / r) + v.scale(ca / r))
        # inverse: u = (-ca u' + z v')/r, v = (u'/z - alpha v')/r
        return (u.scale(-ca / r) + v.shift(1).scale(1 / r),
                u.shift(-1).scale(1 / r) + v.scale(-alpha / r))
    if not inverse:
        return (u.scale(ca / r) + v.scale(1 / r), u.scale(1 / r) + v.scale(alpha / r))
    return (u.scale(-alpha / r) + v.scale(1 / r), u.scale(1 / r) + v.scale(-ca / r))


VARIANTS = ("p_r", "q_s")


def initial_values(variant: str, sign: int, k0: int, z):
    """Initial data at k0 for the fundamental solutions.

    (p_+, r_+): (1, 1) for k0 even, (z, 1) for k0 odd.
    (q_+, s_+): (-1, 1) for k0 even, (z, -1) for k0 odd.
    (p_-, r_-): (-z, 1) for k0 even, (1, -1) for k0 odd.
    (q_-, s_-): (z, 1) for k0 even, (1, 1) for k0 odd.
    """
    z = np.asarray(z, dtype=complex)
    one = np.ones_like(z)
    even = k0 % 2 == 0
    table = {
        ("p_r", 1): (one, one) if even else (z, one),
        ("q_s", 1): (-one, one) if even else (z, -one),
        ("p_r", -1): (-z, one) if even else (one, -one),
        ("q_s", -1): (z, one) if even else (one, one),
    }
    try:
        return table[(variant, 1 if sign > 0 else -1)]
    except KeyError:
        raise DomainError(f"unknown solution variant {variant!r}") from None


def _initial_laurent(variant, sign, k0):
    # same table as initial_values with z -> monomial z^1
    even = k0 % 2 == 0
    m = Laurent.monomial
    table = {
        ("p_r", 1): (m(0), m(0)) if even else (m(1), m(0)),
        ("q_s", 1): (m(0, -1.0), m(0)) if even else (m(1), m(0, -1.0)),
        ("p_r", -1): (m(1, -1.0), m(0)) if even else (m(0), m(0, -1.0)),
        ("q_s", -1): (m(1), m(0)) if even else (m(0), m(0)),
    }
    return table[(variant, 1 if sign > 0 else -1)]


@dataclass
class LaurentSolution:
    """Solution values (u(k), v(k)) on a contiguous window [k_min, k_max].

    ``u``/``v`` map k to arrays broadcast against ``z``. When built with
    ``coefficients=True`` the Laurent coefficients are tracked alongside.
    """

    k0: int
    z: np.ndarray
    variant: str
    sign: int
    u: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    lu: dict | None = None
    lv: dict | None = None

    @property
    def k_min(self) -> int:
        return min(self.u)

    @property
    def k_max(self) -> int:
        return max(self.u)

    def at(self, k: int):
        return self.u[k], self.v[k]

    def laurent(self, k: int):
        if self.lu is None:
            raise DomainError("solution was built without Laurent coefficients")
        return self.lu[k], self.lv[k]


def solution(seq, k0: int, z, variant: str = "p_r", sign: int = 1,
             coefficients: bool = False, init=None) -> LaurentSolution:
    """Fundamental solution with the standard initial data at k0.

    ``init`` overrides the initial pair (used for Weyl solutions).
    """
    z = _check_z(z)
    if init is None:
        u0, v0 = initial_values(variant, sign, k0, z)
    else:
        u0, v0 = (np.asarray(x, dtype=complex) * np.ones_like(z) for x in init)
    sol = LaurentSolution(k0, z, variant, sign, {k0: u0}, {k0: v0})
    if coefficients:
        if init is not None:
            raise DomainError("Laurent coefficients are tracked only for standard initial data")
        lu, lv = _initial_laurent(variant, sign, k0)
        sol.lu, sol.lv = {k0: lu}, {k0: lv}
    return sol


def propagate(sol: LaurentSolution, seq: VerblunskySequence, z, to_k: int) -> LaurentSolution:
    """Extend ``sol`` to include site ``to_k`` (forward with T, backward with T^{-1})."""
    z = _check_z(z)
    if not np.array_equal(np.broadcast_to(z, np.shape(sol.z)), sol.z):
        raise DomainError("propagation must use the solution's own z")
    if to_k > sol.k_max:
        ks = range(sol.k_max + 1, to_k + 1)
        alphas = seq.window(sol.k_max + 1, to_k)
        for k, a in zip(ks, alphas):
            t11, t12, t21, t22 = _entries(a, k, z)
            u, v = sol.u[k - 1], sol.v[k - 1]
            sol.u[k] = t11 * u + t12 * v
            sol.v[k] = t21 * u + t22 * v
            if sol.lu is not None:
                sol.lu[k], sol.lv[k] = _apply_laurent(a, k, sol.lu[k - 1], sol.lv[k - 1], False)
    elif to_k < sol.k_min:
        # (u(k-1), v(k-1)) = T(z,k)^{-1} (u(k), v(k))
        ks = range(sol.k_min, to_k, -1)
        alphas = seq.window(to_k + 1, sol.k_min)[::-1]
        for k, a in zip(ks, alphas):
            t11, t12, t21, t22 = _entries(a, k, z)
            u, v = sol.u[k], sol.v[k]
            sol.u[k - 1] = -t22 * u + t12 * v
            sol.v[k - 1] = t21 * u - t11 * v
            if sol.lu is not None:
                sol.lu[k - 1], sol.lv[k - 1] = _apply_laurent(a, k, sol.lu[k], sol.lv[k], True)
    return sol


def wronskian(sol_a: LaurentSolution, sol_b: LaurentSolution, k: int):
    """det [[u_a, u_b], [v_a, v_b]] at site k."""
    ua, va = sol_a.at(k)
    ub, vb = sol_b.at(k)
    return ua * vb - ub * va
