"""Trace formulas: moments M_j, log-Taylor coefficients L_j and their
quadrature representation through Xi.

M_{1,1}(z,k) = 1 + sum_j M_j z^j with M_j = 2 <delta_k, (U*)^j delta_k>, and
ln M_{1,1}(z,k) = sum_j L_j z^j = 2i sum_j z^j integral of Xi conj(zeta)^j d mu_0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cmv import build_full_section
from .core import DomainError, VerblunskySequence
from .herglotz import CaratheodoryFunction, xi_profile
from .weyl import M_functions

J_CAP = 12


@dataclass
class TraceCoefficients:
    site: int
    M: np.ndarray          # M_1 .. M_J
    L: np.ndarray          # L_1 .. L_J
    residual: np.ndarray | None = None

    def to_csv(self) -> str:
        lines = ["j,re_L,im_L,residual"]
        for j, lj in enumerate(self.L, start=1):
            res = "" if self.residual is None else f"{self.residual[j - 1]:.6e}"
            lines.append(f"{j},{lj.real:.15g},{lj.imag:.15g},{res}")
        return "\n".join(lines) + "\n"


def _cap(J: int) -> int:
    if J < 1:
        raise DomainError("J must be at least 1")
    if J > J_CAP:
        warnings.warn(f"J = {J} capped at {J_CAP}", stacklevel=3)
        return J_CAP
    return J


def moments(seq: VerblunskySequence, k: int, J: int, n: int | None = None) -> np.ndarray:
    """M_j = 2 <delta_k, (U*)^j delta_k> for j = 1..J by banded matvecs.

    The section [k - n//2, k - n//2 + n - 1] must have n >= 4J + 8, so the
    split boundary cannot be seen from site k within J steps.
    """
    if J < 1:
        raise DomainError("J must be at least 1")
    need = 4 * J + 8
    if n is None:
        n = need
    if n < need:
        raise DomainError(f"section size {n} < 4J + 8 = {need}")
    lo = k - n // 2
    mat = build_full_section(seq, lo, lo + n - 1)
    Ustar = mat.sparse().conj().T.tocsr()
    x = np.zeros(mat.size, dtype=complex)
    i = mat.index(k)
    x[i] = 1.0
    out = np.empty(J, dtype=complex)
    for j in range(J):
        x = Ustar @ x
        out[j] = 2.0 * x[i]
    return out


def log_taylor(c) -> np.ndarray:
    """Coefficients d_j of ln(1 + sum c_j z^j) = sum d_j z^j.

    d_1 = c_1, d_j = c_j - sum_{l=1}^{j-1} (l/j) c_{j-l} d_l.
    """
    c = np.asarray(c, dtype=complex)
    d = np.zeros_like(c)
    for j in range(1, len(c) + 1):
        acc = c[j - 1]
        for l in range(1, j):
            acc -= (l / j) * c[j - l - 1] * d[l - 1]
        d[j - 1] = acc
    return d


def exp_taylor(d) -> np.ndarray:
    """Coefficients c_j of exp(sum d_j z^j) = 1 + sum c_j z^j (inverse of log_taylor)."""
    d = np.asarray(d, dtype=complex)
    J = len(d)
    e = np.zeros(J + 1, dtype=complex)
    e[0] = 1.0
    # j e_j = sum_{l=1}^{j} l d_l e_{j-l}
    for j in range(1, J + 1):
        e[j] = sum(l * d[l - 1] * e[j - l] for l in range(1, j + 1)) / j
    return e[1:]


def L_coeffs(seq: VerblunskySequence, k: int, J: int, n: int | None = None) -> np.ndarray:
    return log_taylor(moments(seq, k, J, n))


def _default_radius(N: int) -> float:
    # Poisson smoothing radius with r^N = 1e-10 keeps aliasing below 1e-10
    return math.exp(math.log(1e-10) / N)


def xi_moments(seq: VerblunskySequence, k: int, J: int, N: int = 4096,
               radius: float | None = None, method: str = "auto") -> np.ndarray:
    """2i integral of Xi conj(zeta)^j d mu_0 for j = 1..J by trapezoid quadrature.

    Xi is sampled as arg M_{1,1} on the circle of radius ``radius`` (default
    chosen from N), whose Fourier coefficients are r^j times the boundary
    ones. ``radius=1`` requests radial limits instead.
    """
    f = CaratheodoryFunction.reflected(lambda z: M_functions(seq, k, z, method).M11)
    if radius is None:
        radius = _default_radius(N)
    prof = xi_profile(f, N, k, None if radius >= 1 else radius)
    return np.array([2j * prof.moment(j) for j in range(1, J + 1)])


def xi_quadrature_check(seq: VerblunskySequence, k: int, J: int, N: int = 4096,
                        radius: float | None = None, method: str = "auto") -> np.ndarray:
    """|L_j - 2i integral Xi conj(zeta)^j d mu_0| for j = 1..J."""
    J = _cap(J)
    return np.abs(L_coeffs(seq, k, J) - xi_moments(seq, k, J, N, radius, method))


def trace_coefficients(seq: VerblunskySequence, k: int, J: int, N: int = 4096,
                       check: bool = True) -> TraceCoefficients:
    J = _cap(J)
    M = moments(seq, k, J)
    L = log_taylor(M)
    res = np.abs(L - xi_moments(seq, k, J, N)) if check else None
    return TraceCoefficients(k, M, L, res)


def step_profile_moments(profile, J: int) -> np.ndarray:
    """2i integral Xi conj(zeta)^j d mu_0 for a supplied XiProfile."""
    return np.array([2j * profile.moment(j) for j in range(1, J + 1)])
