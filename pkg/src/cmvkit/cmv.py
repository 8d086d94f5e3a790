"""Finite sections of the CMV matrix U = V W and their spectral measures.

Index conventions follow the doubly infinite operator: theta_k acts on the
basis pair (delta_{k-1}, delta_k); even k populate V, odd k populate W.
Parity is absolute, so a section starting at an odd index has the same
entries as the corresponding block of the full operator.

A section on [k_lo, k_hi] is cut out exactly by replacing alpha_{k_lo} and
alpha_{k_hi+1} with unimodular numbers e^{i s_lo}, e^{i s_hi}: the
corresponding theta blocks become diagonal and the operator splits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp

from .core import DomainError, NumericalError, VerblunskySequence, rho


@dataclass(frozen=True)
class ThetaFactor:
    """The 2x2 block [[-alpha, rho], [rho, conj(alpha)]] at index k."""

    alpha: complex
    k: int = 0

    @property
    def rho(self) -> float:
        return float(rho(self.alpha))

    @property
    def matrix(self) -> np.ndarray:
        a, r = self.alpha, self.rho
        return np.array([[-a, r], [r, np.conj(a)]], dtype=complex)


def build_theta(alpha: complex, k: int = 0) -> ThetaFactor:
    alpha = complex(alpha)
    if abs(alpha) >= 1.0:
        raise DomainError("theta factor needs |alpha| < 1")
    return ThetaFactor(alpha, k)


def _theta_block(alpha):
    r = rho(alpha)
    return np.array([[-alpha, r], [r, np.conj(alpha)]], dtype=complex)


def _effective_alphas(seq, k_lo, k_hi, s_lo, s_hi):
    """alpha on [k_lo - 1, k_hi + 2] with the cut values substituted.

    The outermost entries are never used with a nonzero weight; they are set
    to 0 so no coefficient outside [k_lo + 1, k_hi] is read.
    """
    a = np.zeros(k_hi - k_lo + 4, dtype=complex)
    if k_hi > k_lo:
        a[2:-2] = seq.window(k_lo + 1, k_hi)
    a[1] = np.exp(1j * s_lo)
    a[-2] = np.exp(1j * s_hi)
    return a


def _bands_from_alphas(a, k_lo):
    """Five diagonals of U on [k_lo, k_hi] in closed form.

    ``a`` holds alpha_{k_lo-1} .. alpha_{k_hi+2}. Returns ab with ab[2 + i - j, j]
    = U[i, j] (the layout of scipy.linalg.solve_banded with l = u = 2).
    """
    n = len(a) - 3
    r = rho(a)
    # r for the cut values is exactly 0
    r[1] = 0.0
    r[-2] = 0.0
    ab = np.zeros((5, n), dtype=complex)
    ca = np.conj(a)
    for i in range(n):
        j = k_lo + i          # global row index
        p = i + 1             # position of alpha_j in a
        if j % 2:
            entries = {-1: -a[p + 1] * r[p],
                       0: -a[p + 1] * ca[p],
                       1: -r[p + 1] * a[p + 2],
                       2: r[p + 1] * r[p + 2]}
        else:
            entries = {-2: r[p] * r[p - 1],
                       -1: r[p] * ca[p - 1],
                       0: -ca[p] * a[p + 1],
                       1: ca[p] * r[p + 1]}
        for off, val in entries.items():
            c = i + off
            if 0 <= c < n:
                ab[2 - off, c] = val
    return ab


def _factor(a, k_lo, parity):
    """Block-diagonal factor built from theta_j with j % 2 == parity."""
    n = len(a) - 3
    rows, cols, vals = [], [], []
    k_hi = k_lo + n - 1
    for j in range(k_lo, k_hi + 2):
        if j % 2 != parity:
            continue
        alpha = a[j - k_lo + 1]
        if j in (k_lo, k_hi + 1):
            # cut block, rho = 0
            blk = np.array([[-alpha, 0.0], [0.0, np.conj(alpha)]])
        else:
            blk = _theta_block(alpha)
        for di in range(2):
            for dj in range(2):
                gi, gj = j - 1 + di, j - 1 + dj
                if k_lo <= gi <= k_hi and k_lo <= gj <= k_hi:
                    rows.append(gi - k_lo)
                    cols.append(gj - k_lo)
                    vals.append(blk[di, dj])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)


@dataclass(frozen=True, eq=False)
class CMVMatrix:
    """Finite unitary section of U on the index range [k_lo, k_hi]."""

    k_lo: int
    k_hi: int
    s_lo: float
    s_hi: float
    alphas: np.ndarray      # alpha_{k_lo-1} .. alpha_{k_hi+2}, cuts substituted
    band: np.ndarray        # (5, n) banded storage, solve_banded layout
    V: sp.csr_matrix
    W: sp.csr_matrix

    @property
    def size(self) -> int:
        return self.k_hi - self.k_lo + 1

    def index(self, k: int) -> int:
        if not self.k_lo <= k <= self.k_hi:
            raise DomainError(f"site {k} outside section [{self.k_lo}, {self.k_hi}]")
        return k - self.k_lo

    def dense(self) -> np.ndarray:
        n = self.size
        U = np.zeros((n, n), dtype=complex)
        for d in range(5):
            off = 2 - d                  # column minus row
            i = np.arange(max(0, -off), min(n, n - off))
            U[i, i + off] = self.band[d, i + off]
        return U

    def sparse(self) -> sp.csr_matrix:
        n = self.size
        offsets = [2, 1, 0, -1, -2]
        diags = []
        for d, off in enumerate(offsets):
            if off >= 0:
                diags.append(self.band[d, off:])
            else:
                diags.append(self.band[d, :n + off])
        return sp.diags(diags, offsets, shape=(n, n), format="csr")

    def product(self) -> sp.csr_matrix:
        """V @ W assembled from the theta blocks."""
        return (self.V @ self.W).tocsr()

    def matvec(self, x):
        return self.sparse() @ x

    def adjoint_matvec(self, x):
        return self.sparse().conj().T @ x

    def resolvent_solve(self, z: complex, rhs: np.ndarray) -> np.ndarray:
        """Solve (U - z) x = rhs with a banded LU factorization."""
        ab = self.band.copy()
        ab[2, :] -= z
        return scipy.linalg.solve_banded((2, 2), ab, rhs, check_finite=False)

    def diagonal(self) -> np.ndarray:
        return self.band[2].copy()

    def dump_matrix_market(self, path, comment: str = "") -> None:
        scipy.io.mmwrite(path, self.sparse().tocoo(), comment=comment, field="complex")


def build_full_section(seq: VerblunskySequence, k_lo: int, k_hi: int,
                       s_lo: float = 0.0, s_hi: float = 0.0) -> CMVMatrix:
    """Split the operator at k_lo and k_hi + 1 and return the block on [k_lo, k_hi]."""
    if k_hi - k_lo < 2:
        raise DomainError("section needs k_hi - k_lo >= 2")
    a = _effective_alphas(seq, k_lo, k_hi, s_lo, s_hi)
    band = _bands_from_alphas(a, k_lo)
    V = _factor(a, k_lo, 0)
    W = _factor(a, k_lo, 1)
    a.setflags(write=False)
    return CMVMatrix(k_lo, k_hi, float(s_lo), float(s_hi), a, band, V, W)


def build_half_lattice(seq: VerblunskySequence, k0: int, n: int,
                       side: int = +1, s_far: float = 0.0) -> CMVMatrix:
    """Section of the half-lattice operator U_{+,k0} (side=+1) or U_{-,k0} (side=-1).

    For side=+1 the section is [k0, k0+n] with alpha_{k0} = 1 and a cut of
    phase ``s_far`` at k0+n+1. For side=-1 it is [k0-n, k0] with
    alpha_{k0+1} = 1 and the far cut at k0-n.
    """
    if n < 2:
        raise DomainError("half-lattice section needs n >= 2")
    if side > 0:
        return build_full_section(seq, k0, k0 + n, 0.0, s_far)
    return build_full_section(seq, k0 - n, k0, s_far, 0.0)


def unitarity_residual(mat: CMVMatrix) -> float:
    U = mat.dense()
    return float(np.max(np.abs(U.conj().T @ U - np.eye(mat.size))))


@dataclass
class SpectralMeasure:
    """Measure on the unit circle: atoms plus an optional sampled density.

    ``weights`` has shape (m,) for scalar measures and (m, 2, 2) for 2x2
    matrix measures. ``density`` (if present) is the Radon-Nikodym derivative
    with respect to d theta / 2 pi sampled at the uniform angles ``theta``.
    """

    atoms: np.ndarray
    weights: np.ndarray
    theta: np.ndarray | None = None
    density: np.ndarray | None = None
    unresolved: np.ndarray | None = None   # angles flagged by atom detection
    site: int | None = None

    @property
    def is_matrix(self) -> bool:
        return self.weights.ndim == 3

    @property
    def total_mass(self):
        mass = self.weights.sum(axis=0) if len(self.weights) else 0.0
        if self.density is not None:
            mass = mass + np.mean(self.density, axis=0)
        return mass

    def moment(self, j: int):
        """Integral of conj(zeta)**j d mu."""
        w = np.conj(self.atoms) ** j
        out = np.tensordot(w, self.weights, axes=(0, 0)) if len(self.atoms) else 0.0
        if self.density is not None:
            out = out + np.mean(np.exp(-1j * j * self.theta) * self.density)
        return out

    def mass_on(self, arc) -> float:
        """Mass of an arc (scalar measures)."""
        ang = np.angle(self.atoms) % (2 * np.pi)
        inside = np.array([arc.contains(t) for t in ang], dtype=bool)
        m = float(np.sum(self.weights[inside])) if inside.size else 0.0
        if self.density is not None:
            ins = np.array([arc.contains(t) for t in self.theta], dtype=bool)
            m += float(np.sum(self.density[ins])) / len(self.theta)
        return m


def _eigenbasis(mat: CMVMatrix, tol: float = 1e-10):
    U = mat.dense()
    n = mat.size
    res = float(np.max(np.abs(U.conj().T @ U - np.eye(n))))
    if res > tol:
        raise NumericalError(f"section is not unitary (residual {res:.3e})")
    # complex Schur form of a normal matrix is diagonal with unitary Z
    T, Z = scipy.linalg.schur(U, output="complex")
    off = np.max(np.abs(np.triu(T, 1))) if n > 1 else 0.0
    if off > 1e-8:
        raise NumericalError(f"Schur form not diagonal (off-diagonal {off:.3e})")
    ev = np.diag(T).copy()
    if np.max(np.abs(np.abs(ev) - 1.0)) > 1e-10:
        raise NumericalError("eigenvalues are not unimodular")
    Q = Z
    orth = float(np.max(np.abs(Q.conj().T @ Q - np.eye(n))))
    if orth > 1e-12:
        # phases of the columns are irrelevant for the weights
        Q, _ = np.linalg.qr(Z)
        orth = float(np.max(np.abs(Q.conj().T @ Q - np.eye(n))))
    if orth > 1e-10:
        raise NumericalError(f"eigenbasis not orthonormal after re-orthogonalization ({orth:.3e})")
    return ev / np.abs(ev), Q


def eigenvalues(mat: CMVMatrix) -> np.ndarray:
    """Section eigenvalues sorted by angle in [0, 2 pi)."""
    ev, _ = _eigenbasis(mat)
    return ev[np.argsort(np.mod(np.angle(ev), 2 * np.pi))]


def eigendecompose(mat: CMVMatrix, k, matrix: bool = False) -> SpectralMeasure:
    """Spectral measure of the section for the vector delta_k.

    With ``matrix=True`` the 2x2 measure for the pair (delta_{k-1}, delta_k)
    is returned: weight_j[l, l'] = phi_j[k-1+l] conj(phi_j[k-1+l']).
    """
    ev, Q = _eigenbasis(mat)
    if matrix:
        i0, i1 = mat.index(k - 1), mat.index(k)
        v = np.stack([Q[i0, :], Q[i1, :]], axis=1)       # (m, 2)
        w = v[:, :, None] * np.conj(v[:, None, :])
    else:
        w = np.abs(Q[mat.index(k), :]) ** 2
    return SpectralMeasure(ev, w, site=k)
