import numpy as np
import pytest
import scipy.io
from hypothesis import given, settings, strategies as st

from cmvkit.cmv import (build_full_section, build_half_lattice, build_theta, eigendecompose,
                        eigenvalues, unitarity_residual)
from cmvkit.core import DomainError, Explicit, Periodic

from conftest import random_disk, random_explicit, random_periodic


def _theta(a):
    r = np.sqrt(max(0.0, 1 - abs(a) ** 2))
    return np.array([[-a, r], [r, np.conj(a)]])


def _oracle_section(seq, k_lo, k_hi, s_lo=0.0, s_hi=0.0):
    """Dense V W on [k_lo - 1, k_hi + 1] from explicit theta blocks, then cropped."""
    lo, hi = k_lo - 2, k_hi + 2
    n = hi - lo + 1
    V = np.zeros((n, n), complex)
    W = np.zeros((n, n), complex)
    for k in range(lo + 1, hi + 1):
        if k == k_lo:
            a = np.exp(1j * s_lo)
        elif k == k_hi + 1:
            a = np.exp(1j * s_hi)
        else:
            a = seq.alpha(k)
        blk = _theta(a)
        i = k - 1 - lo
        (V if k % 2 == 0 else W)[i:i + 2, i:i + 2] = blk
    # fill the uncovered corners with 1 so both factors stay unitary
    for M in (V, W):
        for i in range(n):
            if not M[i].any():
                M[i, i] = 1
    U = V @ W
    sl = slice(k_lo - lo, k_hi - lo + 1)
    return U[sl, sl]


def test_theta_examples():
    np.testing.assert_allclose(build_theta(0).matrix, [[0, 1], [1, 0]])
    np.testing.assert_allclose(build_theta(0.5).matrix, [[-0.5, 0.8660254], [0.8660254, 0.5]],
                               atol=1e-7)
    np.testing.assert_allclose(build_theta(0.6j).matrix, [[-0.6j, 0.8], [0.8, -0.6j]], atol=1e-15)
    with pytest.raises(DomainError):
        build_theta(1.0)


@pytest.mark.parametrize("k_lo,k_hi", [(0, 9), (-3, 8), (1, 12), (-4, 5)])
def test_section_matches_block_oracle(rng, k_lo, k_hi):
    seq = random_periodic(rng, 5)
    s_lo, s_hi = rng.uniform(0, 2 * np.pi, 2)
    mat = build_full_section(seq, k_lo, k_hi, s_lo, s_hi)
    np.testing.assert_allclose(mat.dense(), _oracle_section(seq, k_lo, k_hi, s_lo, s_hi),
                               atol=1e-14)
    np.testing.assert_allclose(mat.product().toarray(), mat.dense(), atol=1e-14)


def test_free_section():
    mat = build_full_section(Periodic([0.0]), 0, 63)
    assert unitarity_residual(mat) < 1e-12
    ev = eigenvalues(mat)
    np.testing.assert_allclose(np.abs(ev), 1, atol=1e-12)


def test_constant_diagonal():
    mat = build_full_section(Periodic([0.5]), -10, 20)
    # interior slots only: the cut coefficients enter at both ends
    np.testing.assert_allclose(mat.diagonal()[1:-1], -0.25, atol=1e-15)


@given(st.integers(0, 2 ** 32 - 1), st.integers(-5, 5), st.integers(3, 40))
@settings(max_examples=40, deadline=None)
def test_unitary_any_sequence(seed, k_lo, n):
    rng = np.random.default_rng(seed)
    seq = Explicit(random_disk(rng, n + 8, 0.99), offset=k_lo - 4)
    mat = build_full_section(seq, k_lo, k_lo + n - 1)
    assert unitarity_residual(mat) < 1e-12
    assert abs(mat.product() - mat.sparse()).max() < 1e-14


def test_half_lattice_free():
    mat = build_half_lattice(Periodic([0.0]), 0, 63)
    assert mat.size == 64
    assert unitarity_residual(mat) < 1e-12


def test_half_lattice_m_at_zero(rng):
    # m_+(0, k0) = <d, (U+0)(U-0)^{-1} d> = 1
    seq = random_periodic(rng)
    from cmvkit.weyl import m_plus
    assert abs(m_plus(seq, 2, 0.0, n=60) - 1) < 1e-14


def test_half_lattice_convergence():
    from cmvkit.weyl import m_plus
    seq = Periodic([0.5])
    m = [complex(m_plus(seq, 0, 0.3, n=n)) for n in (32, 64, 128, 256)]
    d = np.abs(np.diff(m))
    assert d[1] < d[0] or d[0] < 1e-15
    assert abs(m[-1] - m[-2]) < 1e-8


def test_free_moments_vanish():
    meas = eigendecompose(build_full_section(Periodic([0.0]), -32, 31), 0)
    assert abs(meas.total_mass - 1) < 1e-10
    for j in range(1, 6):
        assert abs(meas.moment(j)) < 1e-12


def test_weights_and_matrix_measure(rng):
    seq = random_explicit(rng, -40, 40)
    mat = build_full_section(seq, -30, 30)
    meas = eigendecompose(mat, 3)
    assert abs(meas.weights.sum() - 1) < 1e-10
    # moments agree with the matrix elements of U*^j
    U = mat.dense()
    e = np.zeros(mat.size)
    e[mat.index(3)] = 1
    for j in (1, 2, 3):
        direct = e @ np.linalg.matrix_power(U.conj().T, j) @ e
        assert abs(meas.moment(j) - direct) < 1e-12
    mm = eigendecompose(mat, 3, matrix=True)
    assert mm.is_matrix
    np.testing.assert_allclose(mm.weights[:, 1, 0], np.conj(mm.weights[:, 0, 1]), atol=1e-15)
    np.testing.assert_allclose(mm.total_mass, np.eye(2), atol=1e-10)


def test_eigenvalues_sorted(rng):
    ev = eigenvalues(build_full_section(random_periodic(rng), 0, 40))
    ang = np.mod(np.angle(ev), 2 * np.pi)
    assert np.all(np.diff(ang) >= 0)


def test_resolvent_solve_matches_dense(rng):
    mat = build_full_section(random_periodic(rng), -20, 20)
    z = 0.4 - 0.3j
    b = rng.standard_normal(mat.size) + 0j
    x = mat.resolvent_solve(z, b)
    np.testing.assert_allclose((mat.dense() - z * np.eye(mat.size)) @ x, b, atol=1e-12)


def test_matrix_market_dump(tmp_path, rng):
    mat = build_full_section(random_periodic(rng), 0, 15)
    path = tmp_path / "u.mtx"
    mat.dump_matrix_market(path)
    back = scipy.io.mmread(path).toarray()
    np.testing.assert_allclose(back, mat.dense(), atol=1e-14)


def test_section_too_small():
    with pytest.raises(DomainError):
        build_full_section(Periodic([0.1]), 0, 1)
